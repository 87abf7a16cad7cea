//! Inter-cluster homogeneity: attribute weights, the homogeneity measure
//! `hc`, and selection of the qualified couple among equidistant merge
//! candidates.
//!
//! For clusters `i` and `j` over `N` attributes with per-cluster attribute
//! sums `S_i[t]`:
//!
//! ```text
//! hc(i, j) = (1 / N) * sum_t (1 - alpha_t) * |S_i[t] - S_j[t]|
//! ```
//!
//! Sums are raw (not means), so `hc` grows with cluster size. A larger
//! `alpha_t` shrinks attribute `t`'s contribution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::metric::{ClusterId, Pair, TieSet};

/// Absolute tolerance used when comparing `hc` values of tied candidates.
pub const DEFAULT_HC_TOLERANCE: f64 = 1e-12;

/// Per-attribute weighting coefficients, each strictly inside `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("weight vector must not be empty"));
        }
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(invalid(format!(
                "alpha {a} is outside the open interval (0, 1)"
            )));
        }
        Ok(Self(alphas))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// One coefficient repeated for every attribute.
pub fn broadcast_alpha(alpha: f64, n_attributes: usize) -> Result<WeightVector> {
    if n_attributes == 0 {
        return Err(invalid("attribute count must be at least 1"));
    }
    WeightVector::new(vec![alpha; n_attributes])
}

/// Alpha as written by a user: one scalar, or one value per attribute.
///
/// Text form is `0.2` or `0.2,0.4,...`. In TOML/JSON it may be a number, a
/// list of numbers, or that same string.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    Scalar(f64),
    PerAttribute(Vec<f64>),
}

impl AlphaSpec {
    pub fn resolve(&self, n_attributes: usize) -> Result<WeightVector> {
        match self {
            AlphaSpec::Scalar(a) => broadcast_alpha(*a, n_attributes),
            AlphaSpec::PerAttribute(v) => {
                if v.len() != n_attributes {
                    return Err(invalid(format!(
                        "{} alpha values given for {} attributes",
                        v.len(),
                        n_attributes
                    )));
                }
                WeightVector::new(v.clone())
            }
        }
    }

    /// Range check that does not need the attribute count.
    pub fn validate(&self) -> Result<()> {
        let values = match self {
            AlphaSpec::Scalar(a) => std::slice::from_ref(a),
            AlphaSpec::PerAttribute(v) => v.as_slice(),
        };
        WeightVector::new(values.to_vec()).map(|_| ())
    }
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Scalar(0.2)
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Scalar(a) => write!(f, "{a}"),
            AlphaSpec::PerAttribute(v) => {
                let parts: Vec<String> = v.iter().map(f64::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| invalid(format!("cannot parse alpha value {p:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let spec = if values.len() == 1 {
            AlphaSpec::Scalar(values[0])
        } else {
            AlphaSpec::PerAttribute(values)
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for AlphaSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaSpec::Scalar(a) => s.serialize_f64(*a),
            AlphaSpec::PerAttribute(v) => v.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            List(Vec<f64>),
            Text(String),
        }
        let spec = match Raw::deserialize(d)? {
            Raw::Num(a) => AlphaSpec::Scalar(a),
            Raw::List(v) if v.len() == 1 => AlphaSpec::Scalar(v[0]),
            Raw::List(v) => AlphaSpec::PerAttribute(v),
            Raw::Text(t) => return t.parse().map_err(serde::de::Error::custom),
        };
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

/// A cluster's members and its per-attribute column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSums {
    id: ClusterId,
    members: Vec<usize>,
    sums: Vec<f64>,
}

impl ClusterSums {
    pub fn new(id: ClusterId, mut members: Vec<usize>, sums: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(invalid("a cluster must have at least one member"));
        }
        if sums.is_empty() {
            return Err(invalid("cluster sums must cover at least one attribute"));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("cluster members must be distinct"));
        }
        Ok(Self { id, members, sums })
    }

    pub fn singleton(id: ClusterId, instance: usize, row: &[f64]) -> Result<Self> {
        Self::new(id, vec![instance], row.to_vec())
    }

    pub fn id(&self) -> ClusterId {
        self.id
    }

    /// Member instance indices, ascending.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }
}

pub fn hc(ci: &ClusterSums, cj: &ClusterSums, w: &WeightVector) -> Result<f64> {
    let n = w.len();
    for len in [ci.sums.len(), cj.sums.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let total: f64 = ci
        .sums
        .iter()
        .zip(&cj.sums)
        .zip(w.as_slice())
        .map(|((a, b), alpha)| (1.0 - alpha) * (a - b).abs())
        .sum();
    Ok(total / n as f64)
}

/// Combines two disjoint clusters under a new id.
pub fn merged_sums(ci: &ClusterSums, cj: &ClusterSums, new_id: ClusterId) -> Result<ClusterSums> {
    if ci.sums.len() != cj.sums.len() {
        return Err(Error::LengthMismatch {
            expected: ci.sums.len(),
            found: cj.sums.len(),
        });
    }
    let mut members = Vec::with_capacity(ci.members.len() + cj.members.len());
    let (mut a, mut b) = (ci.members.iter().peekable(), cj.members.iter().peekable());
    while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
        if x == y {
            return Err(Error::OverlappingClusters {
                left: ci.id.0,
                right: cj.id.0,
                member: x,
            });
        }
        if x < y {
            members.push(x);
            a.next();
        } else {
            members.push(y);
            b.next();
        }
    }
    members.extend(a);
    members.extend(b);
    let sums = ci.sums.iter().zip(&cj.sums).map(|(x, y)| x + y).collect();
    Ok(ClusterSums {
        id: new_id,
        members,
        sums,
    })
}

/// Live clusters indexed by id.
#[derive(Debug, Clone, Default)]
pub struct ClusterState {
    slots: Vec<Option<ClusterSums>>,
    n_active: usize,
}

impl ClusterState {
    /// One singleton per row, ids `0..n`.
    pub fn singletons<'a>(rows: impl Iterator<Item = &'a [f64]>) -> Result<Self> {
        let mut state = Self::default();
        for (i, row) in rows.enumerate() {
            state.insert(ClusterSums::singleton(ClusterId(i), i, row)?);
        }
        Ok(state)
    }

    pub fn insert(&mut self, c: ClusterSums) {
        let idx = c.id.0;
        if idx >= self.slots.len() {
            self.slots.resize(idx + 1, None);
        }
        if self.slots[idx].is_none() {
            self.n_active += 1;
        }
        self.slots[idx] = Some(c);
    }

    pub fn get(&self, id: ClusterId) -> Option<&ClusterSums> {
        self.slots.get(id.0).and_then(Option::as_ref)
    }

    pub fn remove(&mut self, id: ClusterId) -> Option<ClusterSums> {
        let taken = self.slots.get_mut(id.0).and_then(Option::take);
        if taken.is_some() {
            self.n_active -= 1;
        }
        taken
    }

    pub fn len(&self) -> usize {
        self.n_active
    }

    pub fn is_empty(&self) -> bool {
        self.n_active == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &ClusterSums> {
        self.slots.iter().flatten()
    }

    /// Merges `left` and `right` into `new_id`, removing both.
    pub fn merge(&mut self, left: ClusterId, right: ClusterId, new_id: ClusterId) -> Result<()> {
        let a = self.get(left).ok_or(Error::UnknownCluster(left.0))?;
        let b = self.get(right).ok_or(Error::UnknownCluster(right.0))?;
        let merged = merged_sums(a, b, new_id)?;
        self.remove(left);
        self.remove(right);
        self.insert(merged);
        Ok(())
    }
}

/// Outcome of qualified-couple selection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualifiedCouple {
    pub pair: Pair,
    pub hc: f64,
    /// More than one candidate shared the minimal `hc`; the pair was then
    /// chosen by ascending id order.
    pub hc_tie: bool,
    /// `hc` of every candidate, in canonical candidate order.
    pub evaluated: Vec<(Pair, f64)>,
}

/// Picks the candidate pair with the smallest `hc`. Candidates are put into
/// ascending `(lo, hi)` order first, and values within `hc_tolerance` of the
/// minimum count as tied, with the first such pair winning.
pub fn qualified_couple(
    candidates: &TieSet,
    state: &ClusterState,
    w: &WeightVector,
    hc_tolerance: f64,
) -> Result<QualifiedCouple> {
    if candidates.candidates.is_empty() {
        return Err(invalid("no merge candidates"));
    }
    let mut ordered = candidates.candidates.clone();
    ordered.sort_unstable();
    ordered.dedup();

    let evaluated = ordered
        .iter()
        .map(|&p| {
            let a = state.get(p.lo).ok_or(Error::UnknownCluster(p.lo.0))?;
            let b = state.get(p.hi).ok_or(Error::UnknownCluster(p.hi.0))?;
            Ok((p, hc(a, b, w)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let min = evaluated
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::INFINITY, f64::min);
    let mut within = evaluated.iter().filter(|(_, v)| *v - min <= hc_tolerance);
    let &(pair, value) = within
        .next()
        .ok_or_else(|| Error::Internal("no candidate attained the minimum".into()))?;
    let hc_tie = within.next().is_some();
    Ok(QualifiedCouple {
        pair,
        hc: value,
        hc_tie,
        evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cluster(id: usize, members: &[usize], sums: &[f64]) -> ClusterSums {
        ClusterSums::new(ClusterId(id), members.to_vec(), sums.to_vec()).unwrap()
    }

    fn w(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn ties(pairs: &[(usize, usize)]) -> TieSet {
        TieSet {
            min_value: 1.0,
            candidates: pairs
                .iter()
                .map(|&(a, b)| Pair::new(ClusterId(a), ClusterId(b)))
                .collect(),
        }
    }

    #[test]
    fn worked_example_is_two_and_a_half() {
        let c1 = cluster(3, &[0, 1], &[5.0, 5.0]);
        let c2 = cluster(2, &[2], &[1.0, 2.0]);
        let v = hc(&c1, &c2, &w(&[0.2, 0.4])).unwrap();
        assert!((v - 2.5).abs() < 1e-12, "{v}");
    }

    #[test]
    fn scalar_alpha_on_worked_example() {
        let c1 = cluster(3, &[0, 1], &[5.0, 5.0]);
        let c2 = cluster(2, &[2], &[1.0, 2.0]);
        let v = hc(&c1, &c2, &broadcast_alpha(0.2, 2).unwrap()).unwrap();
        assert!((v - 2.8).abs() < 1e-12, "{v}");
    }

    #[test]
    fn identical_sums_give_zero() {
        let a = cluster(0, &[0], &[1.5, -3.0]);
        let b = cluster(1, &[1], &[1.5, -3.0]);
        assert_eq!(hc(&a, &b, &w(&[0.9, 0.1])).unwrap(), 0.0);
    }

    #[test]
    fn hc_length_mismatch() {
        let a = cluster(0, &[0], &[1.0, 2.0]);
        let b = cluster(1, &[1], &[1.0, 2.0]);
        assert!(hc(&a, &b, &w(&[0.5])).is_err());
    }

    #[test]
    fn broadcast() {
        let v = broadcast_alpha(0.2, 13).unwrap();
        assert_eq!(v.as_slice(), &[0.2; 13]);
        assert_eq!(broadcast_alpha(0.5, 1).unwrap().as_slice(), &[0.5]);
        assert!(broadcast_alpha(1.0, 3).is_err());
        assert!(broadcast_alpha(0.0, 3).is_err());
        assert!(broadcast_alpha(f64::NAN, 3).is_err());
        assert!(broadcast_alpha(0.5, 0).is_err());
    }

    #[test]
    fn alpha_spec_parsing() {
        assert_eq!("0.2".parse::<AlphaSpec>().unwrap(), AlphaSpec::Scalar(0.2));
        assert_eq!(
            "0.2, 0.4".parse::<AlphaSpec>().unwrap(),
            AlphaSpec::PerAttribute(vec![0.2, 0.4])
        );
        assert!("1.5".parse::<AlphaSpec>().is_err());
        assert!("0.2,abc".parse::<AlphaSpec>().is_err());
        let spec: AlphaSpec = "0.2,0.4".parse().unwrap();
        assert!(spec.resolve(3).is_err());
        assert_eq!(spec.resolve(2).unwrap().as_slice(), &[0.2, 0.4]);

        let from_json: AlphaSpec = serde_json::from_str("[0.1, 0.3]").unwrap();
        assert_eq!(from_json, AlphaSpec::PerAttribute(vec![0.1, 0.3]));
        let from_json: AlphaSpec = serde_json::from_str("\"0.35\"").unwrap();
        assert_eq!(from_json, AlphaSpec::Scalar(0.35));
        assert!(serde_json::from_str::<AlphaSpec>("2.0").is_err());
    }

    #[test]
    fn table1_singletons_tie_on_hc() {
        let rows: Vec<Vec<f64>> = vec![vec![2.0, 3.0], vec![3.0, 2.0], vec![1.0, 2.0]];
        let state = ClusterState::singletons(rows.iter().map(Vec::as_slice)).unwrap();
        let q = qualified_couple(&ties(&[(0, 1), (0, 2)]), &state, &w(&[0.2, 0.4]), 1e-12).unwrap();
        assert_eq!(q.pair, Pair::new(ClusterId(0), ClusterId(1)));
        assert!((q.hc - 0.7).abs() < 1e-12);
        assert!(q.hc_tie);
        assert_eq!(q.evaluated.len(), 2);
        assert!((q.evaluated[1].1 - 0.7).abs() < 1e-12);
    }

    #[test]
    fn single_candidate_passes_through() {
        let mut state = ClusterState::default();
        state.insert(cluster(0, &[0], &[1.0]));
        state.insert(cluster(1, &[1], &[4.0]));
        let q = qualified_couple(&ties(&[(0, 1)]), &state, &w(&[0.5]), 1e-12).unwrap();
        assert_eq!(q.pair, Pair::new(ClusterId(0), ClusterId(1)));
        assert_eq!(q.hc, 1.5);
        assert!(!q.hc_tie);
    }

    #[test]
    fn smallest_hc_wins() {
        // alpha 0.5 on one attribute: hc = 0.5 * |dx|.
        let mut state = ClusterState::default();
        state.insert(cluster(0, &[0], &[0.0]));
        state.insert(cluster(1, &[1], &[0.6]));
        state.insert(cluster(2, &[2], &[1.8]));
        let q = qualified_couple(&ties(&[(0, 2), (0, 1)]), &state, &w(&[0.5]), 1e-12).unwrap();
        assert_eq!(q.pair, Pair::new(ClusterId(0), ClusterId(1)));
        assert!((q.hc - 0.3).abs() < 1e-15);
        let brute = q
            .evaluated
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert_eq!(brute.0, q.pair);
        assert!((q.evaluated[1].1 - 0.9).abs() < 1e-15);
        assert!(!q.hc_tie);
    }

    #[test]
    fn unknown_cluster_rejected() {
        let mut state = ClusterState::default();
        state.insert(cluster(0, &[0], &[0.0]));
        assert!(matches!(
            qualified_couple(&ties(&[(0, 7)]), &state, &w(&[0.5]), 1e-12),
            Err(Error::UnknownCluster(7))
        ));
    }

    #[test]
    fn merging_sums() {
        let a = cluster(0, &[0], &[2.0, 3.0]);
        let b = cluster(1, &[1], &[3.0, 2.0]);
        let m = merged_sums(&a, &b, ClusterId(3)).unwrap();
        assert_eq!(m.members(), &[0, 1]);
        assert_eq!(m.sums(), &[5.0, 5.0]);
        assert_eq!(m.id(), ClusterId(3));
        assert!(matches!(
            merged_sums(&m, &a, ClusterId(4)),
            Err(Error::OverlappingClusters { member: 0, .. })
        ));
        assert!(ClusterSums::new(ClusterId(9), vec![], vec![1.0]).is_err());
    }

    #[test]
    fn three_successive_merges() {
        let rows = [[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]];
        let mut state = ClusterState::singletons(rows.iter().map(|r| &r[..])).unwrap();
        state
            .merge(ClusterId(0), ClusterId(1), ClusterId(3))
            .unwrap();
        state
            .merge(ClusterId(3), ClusterId(2), ClusterId(4))
            .unwrap();
        assert_eq!(state.len(), 1);
        let last = state.get(ClusterId(4)).unwrap();
        assert_eq!(last.sums(), &[6.0, 6.0]);
        assert_eq!(last.members(), &[0, 1, 2]);
    }
}
