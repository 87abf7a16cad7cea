//! Euclidean distances and the condensed inter-cluster distance matrix.
//!
//! The matrix is laid out over fixed *slots*, one per leaf. A merged cluster
//! takes over the slot of its left child and the right child's slot is
//! retired; retired slots are skipped, never compacted.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};

/// Identifier of a leaf (`0..n`) or of a merged cluster (`n..2n-1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClusterId(pub usize);

impl std::fmt::Display for ClusterId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Unordered cluster pair, stored with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub lo: ClusterId,
    pub hi: ClusterId,
}

impl Pair {
    pub fn new(a: ClusterId, b: ClusterId) -> Self {
        if a <= b {
            Pair { lo: a, hi: b }
        } else {
            Pair { lo: b, hi: a }
        }
    }
}

/// Straight-line distance, summing squared differences left to right.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(euclidean_unchecked(a, b))
}

#[inline]
pub(crate) fn euclidean_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// Offset of slot pair `(i, j)`, `i < j`, in an `n`-slot condensed array.
#[inline]
fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n_slots: usize,
    entries: Vec<f64>,
    slot_ids: Vec<ClusterId>,
    active: Vec<bool>,
    /// `slot_of[id]` for every id ever issued; `None` once retired.
    slot_of: Vec<Option<usize>>,
    n_active: usize,
}

impl DistanceMatrix {
    /// Builds a matrix over leaves `0..n` from a condensed upper triangle
    /// (row-major, `n*(n-1)/2` entries).
    pub fn from_condensed(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(invalid("a distance matrix needs at least 2 points"));
        }
        if entries.len() != n * (n - 1) / 2 {
            return Err(Error::LengthMismatch {
                expected: n * (n - 1) / 2,
                found: entries.len(),
            });
        }
        if let Some(bad) = entries.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(invalid(format!(
                "distance {bad} is not finite and non-negative"
            )));
        }
        Ok(Self {
            n_slots: n,
            entries,
            slot_ids: (0..n).map(ClusterId).collect(),
            active: vec![true; n],
            slot_of: (0..n).map(Some).collect(),
            n_active: n,
        })
    }

    /// Number of active clusters.
    pub fn size(&self) -> usize {
        self.n_active
    }

    /// Number of stored entries between active clusters.
    pub fn n_entries(&self) -> usize {
        self.n_active * self.n_active.saturating_sub(1) / 2
    }

    pub fn active_ids(&self) -> impl Iterator<Item = ClusterId> + '_ {
        (0..self.n_slots)
            .filter(|&s| self.active[s])
            .map(|s| self.slot_ids[s])
    }

    pub fn get(&self, a: ClusterId, b: ClusterId) -> Option<f64> {
        let sa = self.slot(a)?;
        let sb = self.slot(b)?;
        if sa == sb {
            return None;
        }
        let (i, j) = if sa < sb { (sa, sb) } else { (sb, sa) };
        Some(self.entries[condensed_index(self.n_slots, i, j)])
    }

    fn slot(&self, id: ClusterId) -> Option<usize> {
        self.slot_of.get(id.0).copied().flatten()
    }

    /// Visits every active entry in slot order.
    pub fn for_each_entry(&self, mut f: impl FnMut(ClusterId, ClusterId, f64)) {
        let n = self.n_slots;
        for i in 0..n {
            if !self.active[i] {
                continue;
            }
            let base = condensed_index_row(n, i);
            for j in i + 1..n {
                if self.active[j] {
                    f(
                        self.slot_ids[i],
                        self.slot_ids[j],
                        self.entries[base + j - i - 1],
                    );
                }
            }
        }
    }

    /// Replaces clusters `left` and `right` with `new_id`, setting the new
    /// cluster's distance to every survivor `k` to `single_linkage_update`.
    pub fn merge(&mut self, left: ClusterId, right: ClusterId, new_id: ClusterId) -> Result<()> {
        let sl = self.slot(left).ok_or(Error::UnknownCluster(left.0))?;
        let sr = self.slot(right).ok_or(Error::UnknownCluster(right.0))?;
        if sl == sr {
            return Err(invalid("cannot merge a cluster with itself"));
        }
        if self.slot(new_id).is_some() || new_id.0 < self.slot_of.len() {
            return Err(invalid(format!("cluster id {new_id} was already issued")));
        }
        let (keep, drop) = (sl.min(sr), sl.max(sr));
        let n = self.n_slots;
        for k in 0..n {
            if !self.active[k] || k == keep || k == drop {
                continue;
            }
            let ik = pair_index(n, keep, k);
            let jk = pair_index(n, drop, k);
            self.entries[ik] = single_linkage_update(self.entries[ik], self.entries[jk]);
        }
        self.active[drop] = false;
        self.slot_of[left.0] = None;
        self.slot_of[right.0] = None;
        self.slot_of.resize(new_id.0 + 1, None);
        self.slot_of[new_id.0] = Some(keep);
        self.slot_ids[keep] = new_id;
        self.n_active -= 1;
        Ok(())
    }
}

#[inline]
fn condensed_index_row(n: usize, i: usize) -> usize {
    i * (2 * n - i - 1) / 2
}

#[inline]
fn pair_index(n: usize, a: usize, b: usize) -> usize {
    if a < b {
        condensed_index(n, a, b)
    } else {
        condensed_index(n, b, a)
    }
}

/// Single-linkage distance from a merged cluster to a third cluster.
#[inline]
pub fn single_linkage_update(d_ik: f64, d_jk: f64) -> f64 {
    d_ik.min(d_jk)
}

/// Pairwise distances between all instances. Rows are computed in parallel;
/// each entry is produced by the same sequential kernel, so the result does
/// not depend on the thread count.
pub fn build_distance_matrix(ds: &Dataset) -> Result<DistanceMatrix> {
    let n = ds.n_instances();
    if n < 2 {
        return Err(invalid(
            "at least 2 instances are needed to compute distances",
        ));
    }
    let rows: Vec<Vec<f64>> = (0..n - 1)
        .into_par_iter()
        .map(|i| {
            let a = ds.row(i);
            (i + 1..n)
                .map(|j| euclidean_unchecked(a, ds.row(j)))
                .collect()
        })
        .collect();
    DistanceMatrix::from_condensed(n, rows.concat())
}

/// Minimum distance and every pair within tolerance of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TieSet {
    pub min_value: f64,
    /// Sorted ascending by `(lo, hi)`.
    pub candidates: Vec<Pair>,
}

impl TieSet {
    /// Number of pairs attaining the minimum.
    pub fn occ(&self) -> usize {
        self.candidates.len()
    }
}

/// Finds the global minimum and all pairs whose distance `d` satisfies
/// `d - min <= tie_eps * max(1, min)`.
pub fn min_with_ties(mat: &DistanceMatrix, tie_eps: f64) -> Result<TieSet> {
    if !tie_eps.is_finite() || tie_eps < 0.0 {
        return Err(invalid(format!(
            "tie tolerance {tie_eps} must be finite and >= 0"
        )));
    }
    let mut min = f64::INFINITY;
    mat.for_each_entry(|_, _, d| {
        if d < min {
            min = d;
        }
    });
    if min == f64::INFINITY {
        return Err(invalid("distance matrix has no entries"));
    }
    let bound = tie_eps * min.max(1.0);
    let mut candidates = Vec::new();
    mat.for_each_entry(|a, b, d| {
        if d - min <= bound {
            candidates.push(Pair::new(a, b));
        }
    });
    candidates.sort_unstable();
    Ok(TieSet {
        min_value: min,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    fn ids(a: usize, b: usize) -> Pair {
        Pair::new(ClusterId(a), ClusterId(b))
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(euclidean(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        let ab = euclidean(&[2.0, 3.0], &[3.0, 2.0]).unwrap();
        assert!((ab - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!(euclidean(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn table1_matrix() {
        let ds = parse_csv("2,3\n3,2\n1,2", false, None).unwrap();
        let m = build_distance_matrix(&ds).unwrap();
        assert_eq!(m.n_entries(), 3);
        assert_eq!(m.get(ClusterId(0), ClusterId(1)), Some(SQRT2));
        assert_eq!(m.get(ClusterId(0), ClusterId(2)), Some(SQRT2));
        assert_eq!(m.get(ClusterId(1), ClusterId(2)), Some(2.0));
        assert_eq!(m.get(ClusterId(2), ClusterId(1)), Some(2.0));
    }

    #[test]
    fn duplicate_points_and_counts() {
        let ds = parse_csv("1,1\n1,1", false, None).unwrap();
        let m = build_distance_matrix(&ds).unwrap();
        assert_eq!(m.n_entries(), 1);
        assert_eq!(m.get(ClusterId(0), ClusterId(1)), Some(0.0));

        let ds = parse_csv("1\n2\n3\n4\n5\n6\n7", false, None).unwrap();
        assert_eq!(build_distance_matrix(&ds).unwrap().n_entries(), 21);

        let one = parse_csv("1,2", false, None).unwrap();
        assert!(build_distance_matrix(&one).is_err());
    }

    #[test]
    fn table1_ties() {
        let m = DistanceMatrix::from_condensed(3, vec![SQRT2, SQRT2, 2.0]).unwrap();
        let t = min_with_ties(&m, 1e-9).unwrap();
        assert_eq!(t.min_value, SQRT2);
        assert_eq!(t.candidates, vec![ids(0, 1), ids(0, 2)]);
        assert_eq!(t.occ(), 2);
    }

    #[test]
    fn distinct_and_total_ties() {
        let m = DistanceMatrix::from_condensed(3, vec![2.0, 1.0, 3.0]).unwrap();
        let t = min_with_ties(&m, 1e-9).unwrap();
        assert_eq!((t.min_value, t.candidates.clone()), (1.0, vec![ids(0, 2)]));

        let m = DistanceMatrix::from_condensed(4, vec![0.5; 6]).unwrap();
        assert_eq!(min_with_ties(&m, 0.0).unwrap().occ(), 6);
    }

    #[test]
    fn tolerance_is_relative_above_one() {
        let m = DistanceMatrix::from_condensed(3, vec![1000.0, 1000.0 + 5e-7, 1001.0]).unwrap();
        assert_eq!(min_with_ties(&m, 1e-9).unwrap().occ(), 2);
        assert_eq!(min_with_ties(&m, 0.0).unwrap().occ(), 1);
        assert!(min_with_ties(&m, -1.0).is_err());
    }

    #[test]
    fn merge_applies_single_linkage() {
        let mut m = DistanceMatrix::from_condensed(3, vec![SQRT2, SQRT2, 2.0]).unwrap();
        m.merge(ClusterId(0), ClusterId(1), ClusterId(3)).unwrap();
        assert_eq!(m.size(), 2);
        assert_eq!(m.get(ClusterId(3), ClusterId(2)), Some(SQRT2));
        assert_eq!(m.get(ClusterId(0), ClusterId(2)), None);
        assert_eq!(
            m.active_ids().collect::<Vec<_>>(),
            vec![ClusterId(3), ClusterId(2)]
        );
        assert!(m.merge(ClusterId(0), ClusterId(2), ClusterId(4)).is_err());
        assert!(m.merge(ClusterId(3), ClusterId(2), ClusterId(3)).is_err());
    }

    #[test]
    fn single_linkage_update_is_min() {
        assert_eq!(single_linkage_update(1.414, 2.0), 1.414);
        assert_eq!(single_linkage_update(0.7, 0.7), 0.7);
        assert_eq!(single_linkage_update(SQRT2, 2.0), SQRT2);
    }
}
