//! The merge loop: single-linkage agglomeration where equidistant candidate
//! pairs are resolved by inter-cluster homogeneity.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{invalid, Error, Result};
use crate::homogeneity::{qualified_couple, ClusterState, WeightVector, DEFAULT_HC_TOLERANCE};
use crate::metric::{build_distance_matrix, min_with_ties, ClusterId};

pub const DEFAULT_TIE_EPS: f64 = 1e-9;

/// How the merged pair was chosen at one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    /// Exactly one pair attained the minimum distance.
    UniqueMin,
    /// Several pairs tied on distance; one had strictly the smallest `hc`.
    Homogeneity,
    /// Several pairs tied on distance and on `hc`; lowest ids won.
    IdOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub step: usize,
    pub left: ClusterId,
    pub right: ClusterId,
    pub new_id: ClusterId,
    /// Merge height: the step's minimum inter-cluster distance.
    #[serde(with = "crate::export::sig17")]
    pub distance: f64,
    pub occ: usize,
    pub resolved_by: Resolution,
    #[serde(with = "crate::export::sig17_opt")]
    pub hc_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub final_k: usize,
    pub records: Vec<MergeRecord>,
}

impl Dendrogram {
    /// Checks the structural invariants: record count, fresh ids, each id
    /// consumed at most once, `left < right`, non-decreasing heights, and
    /// consistent tie bookkeeping.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_leaves;
        if self.final_k == 0 || self.final_k > n {
            return Err(invalid(format!("final_k {} outside 1..={n}", self.final_k)));
        }
        if self.records.len() != n - self.final_k {
            return Err(invalid(format!(
                "{} records for {n} leaves and k = {}",
                self.records.len(),
                self.final_k
            )));
        }
        let mut used = vec![false; 2 * n];
        let mut last_height = f64::NEG_INFINITY;
        for (i, r) in self.records.iter().enumerate() {
            let expected_id = n + i;
            if r.step != i + 1 || r.new_id.0 != expected_id {
                return Err(invalid(format!(
                    "record {i} has step {} id {}",
                    r.step, r.new_id
                )));
            }
            if r.left >= r.right {
                return Err(invalid(format!(
                    "step {}: left id not below right id",
                    r.step
                )));
            }
            for id in [r.left, r.right] {
                if id.0 >= expected_id || used[id.0] {
                    return Err(invalid(format!("step {}: id {id} unavailable", r.step)));
                }
                used[id.0] = true;
            }
            if r.distance.is_nan() || r.distance < last_height {
                return Err(invalid(format!("step {}: merge height decreased", r.step)));
            }
            last_height = r.distance;
            let multi = r.occ > 1;
            if r.occ == 0
                || multi == (r.resolved_by == Resolution::UniqueMin)
                || multi != r.hc_value.is_some()
            {
                return Err(invalid(format!("step {}: inconsistent tie fields", r.step)));
            }
        }
        Ok(())
    }
}

/// Flat cluster assignment, labels numbered by first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub k: usize,
}

impl Partition {
    /// Relabels arbitrary group keys to `0..k` in order of first occurrence.
    pub fn canonical<T: PartialEq>(keys: &[T]) -> Self {
        let mut seen: Vec<&T> = Vec::new();
        let assignment = keys
            .iter()
            .map(|key| match seen.iter().position(|s| *s == key) {
                Some(p) => p,
                None => {
                    seen.push(key);
                    seen.len() - 1
                }
            })
            .collect();
        Self {
            assignment,
            k: seen.len(),
        }
    }

    /// Member instances of each label.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (i, &label) in self.assignment.iter().enumerate() {
            groups[label].push(i);
        }
        groups
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    /// Relative tolerance for distance ties.
    pub tie_eps: f64,
    /// Absolute tolerance for `hc` ties.
    pub hc_tolerance: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            tie_eps: DEFAULT_TIE_EPS,
            hc_tolerance: DEFAULT_HC_TOLERANCE,
        }
    }
}

/// Clusters `ds` down to `k` clusters.
pub fn shachom(
    ds: &Dataset,
    k: usize,
    w: &WeightVector,
    tie_eps: f64,
) -> Result<(Dendrogram, Partition)> {
    run(
        ds,
        k,
        w,
        &EngineOptions {
            tie_eps,
            ..EngineOptions::default()
        },
    )
}

pub fn run(
    ds: &Dataset,
    k: usize,
    w: &WeightVector,
    opts: &EngineOptions,
) -> Result<(Dendrogram, Partition)> {
    let n = ds.n_instances();
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} must lie in 1..={n}")));
    }
    if w.len() != ds.n_attributes() {
        return Err(invalid(format!(
            "{} weights for {} attributes",
            w.len(),
            ds.n_attributes()
        )));
    }
    if opts.hc_tolerance.is_nan() || opts.hc_tolerance < 0.0 {
        return Err(invalid("hc tolerance must be >= 0"));
    }

    let mut state = ClusterState::singletons(ds.rows())?;
    let mut records = Vec::with_capacity(n - k);

    if n > k {
        let mut matrix = build_distance_matrix(ds)?;
        for step in 1..=n - k {
            let ties = min_with_ties(&matrix, opts.tie_eps)?;
            let (pair, resolved_by, hc_value) = if ties.occ() == 1 {
                (ties.candidates[0], Resolution::UniqueMin, None)
            } else {
                let q = qualified_couple(&ties, &state, w, opts.hc_tolerance)?;
                let how = if q.hc_tie {
                    Resolution::IdOrder
                } else {
                    Resolution::Homogeneity
                };
                (q.pair, how, Some(q.hc))
            };
            let new_id = ClusterId(n + step - 1);
            matrix.merge(pair.lo, pair.hi, new_id)?;
            state.merge(pair.lo, pair.hi, new_id)?;
            records.push(MergeRecord {
                step,
                left: pair.lo,
                right: pair.hi,
                new_id,
                distance: ties.min_value,
                occ: ties.occ(),
                resolved_by,
                hc_value,
            });
        }
    }

    let dendrogram = Dendrogram {
        n_leaves: n,
        final_k: k,
        records,
    };
    let mut owner = vec![0usize; n];
    for c in state.iter() {
        for &m in c.members() {
            owner[m] = c.id().0;
        }
    }
    let partition = Partition::canonical(&owner);
    if partition.k != k {
        return Err(Error::Internal(format!(
            "ended with {} clusters, expected {k}",
            partition.k
        )));
    }
    Ok((dendrogram, partition))
}

/// Cuts the merge history at `k_prime` clusters by replaying its first
/// `n_leaves - k_prime` records.
pub fn partition_at(dg: &Dendrogram, k_prime: usize) -> Result<Partition> {
    let n = dg.n_leaves;
    if k_prime < dg.final_k || k_prime > n || k_prime == 0 {
        return Err(invalid(format!(
            "k' = {k_prime} outside {}..={n}",
            dg.final_k.max(1)
        )));
    }
    // Union-find over ids; each merge points both children at the new id.
    let mut parent: Vec<usize> = (0..n + (n - k_prime)).collect();
    for r in &dg.records[..n - k_prime] {
        let new = r.new_id.0;
        if new >= parent.len() || r.left.0 >= new || r.right.0 >= new {
            return Err(invalid(format!("record {} references invalid ids", r.step)));
        }
        parent[r.left.0] = new;
        parent[r.right.0] = new;
    }
    let roots: Vec<usize> = (0..n)
        .map(|leaf| {
            let mut x = leaf;
            while parent[x] != x {
                x = parent[x];
            }
            x
        })
        .collect();
    Ok(Partition::canonical(&roots))
}
