//! Cluster-quality evaluation through a decision tree: the cluster labels
//! become classes, continuous attributes are binned, an ID3 tree is trained
//! on one part of the data and scored on the other.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::engine::Partition;
use crate::error::{invalid, Error, Result};

/// Gains closer than this are treated as equal when choosing a split.
pub const GAIN_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_BINS: usize = 10;

/// Replaces the dataset's labels with the partition's cluster labels.
pub fn annotate_with_clusters(ds: &Dataset, p: &Partition) -> Result<Dataset> {
    if p.assignment.len() != ds.n_instances() {
        return Err(Error::LengthMismatch {
            expected: ds.n_instances(),
            found: p.assignment.len(),
        });
    }
    ds.clone()
        .with_labels(p.assignment.iter().map(usize::to_string).collect())
}

/// A class name ordered numerically when both sides are integers, and
/// lexically otherwise (integers sort first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassLabel(pub String);

impl Ord for ClassLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<i64>(), other.0.parse::<i64>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Ok(_), Err(_)) => Ordering::Less,
            (Err(_), Ok(_)) => Ordering::Greater,
            (Err(_), Err(_)) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for ClassLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Binned attributes plus a class per instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NominalDataset {
    /// `features[i][a]` is the bin index of instance `i` on attribute `a`.
    pub features: Vec<Vec<usize>>,
    pub classes: Vec<String>,
    /// Interior cut points per attribute, strictly increasing. Attribute `a`
    /// has `bin_edges[a].len() + 1` bins.
    pub bin_edges: Vec<Vec<f64>>,
}

impl NominalDataset {
    pub fn new(
        features: Vec<Vec<usize>>,
        classes: Vec<String>,
        bin_edges: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if features.len() != classes.len() {
            return Err(Error::LengthMismatch {
                expected: features.len(),
                found: classes.len(),
            });
        }
        for edges in &bin_edges {
            if edges
                .windows(2)
                .any(|w| w[0].is_nan() || w[1].is_nan() || w[0] >= w[1])
            {
                return Err(invalid("bin edges must be strictly increasing"));
            }
        }
        for row in &features {
            if row.len() != bin_edges.len() {
                return Err(Error::LengthMismatch {
                    expected: bin_edges.len(),
                    found: row.len(),
                });
            }
            if row.iter().zip(&bin_edges).any(|(&b, e)| b > e.len()) {
                return Err(invalid("feature value outside its attribute's bins"));
            }
        }
        Ok(Self {
            features,
            classes,
            bin_edges,
        })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn n_attributes(&self) -> usize {
        self.bin_edges.len()
    }
}

/// Equal-width bins fitted on one dataset and reusable on another.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discretizer {
    pub bin_edges: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl Discretizer {
    /// Splits each column's `[min, max]` into `n_bins` equal-width bins.
    /// A constant column gets a single bin and a warning.
    pub fn fit(ds: &Dataset, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(invalid(format!("need at least 2 bins, got {n_bins}")));
        }
        let mut bin_edges = Vec::with_capacity(ds.n_attributes());
        let mut warnings = Vec::new();
        for a in 0..ds.n_attributes() {
            let (lo, hi) = ds
                .rows()
                .map(|r| r[a])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
            if lo == hi {
                warnings.push(format!(
                    "attribute {} ({}) is constant; using a single bin",
                    a,
                    ds.attribute_names()[a]
                ));
                bin_edges.push(Vec::new());
                continue;
            }
            let width = (hi - lo) / n_bins as f64;
            let mut edges: Vec<f64> = (1..n_bins).map(|i| lo + i as f64 * width).collect();
            edges.dedup();
            edges.retain(|&e| e > lo && e < hi);
            if edges.len() + 1 < n_bins {
                warnings.push(format!(
                    "attribute {a} range too narrow for {n_bins} bins; using {}",
                    edges.len() + 1
                ));
            }
            bin_edges.push(edges);
        }
        Ok(Self {
            bin_edges,
            warnings,
        })
    }

    /// Bin index of `value`: the number of edges at or below it. Values on an
    /// edge go to the upper bin; out-of-range values clamp to the outer bins.
    pub fn bin(&self, attribute: usize, value: f64) -> usize {
        self.bin_edges[attribute].partition_point(|&e| e <= value)
    }

    pub fn transform(&self, ds: &Dataset) -> Result<NominalDataset> {
        if ds.n_attributes() != self.bin_edges.len() {
            return Err(Error::LengthMismatch {
                expected: self.bin_edges.len(),
                found: ds.n_attributes(),
            });
        }
        let classes = ds
            .labels()
            .ok_or_else(|| invalid("discretizing requires class labels"))?
            .to_vec();
        let features = ds
            .rows()
            .map(|r| r.iter().enumerate().map(|(a, &v)| self.bin(a, v)).collect())
            .collect();
        NominalDataset::new(features, classes, self.bin_edges.clone())
    }
}

/// Fits bins on `ds` and applies them to it.
pub fn discretize(ds: &Dataset, n_bins: usize) -> Result<NominalDataset> {
    if ds.labels().is_none() {
        return Err(invalid("discretizing requires class labels"));
    }
    Discretizer::fit(ds, n_bins)?.transform(ds)
}

/// Shannon entropy in bits of the class distribution given by `counts`.
pub fn entropy_from_counts(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Class ids in first-seen order, plus the id of every instance.
fn encode_classes(classes: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut names: Vec<String> = Vec::new();
    let ids = classes
        .iter()
        .map(|c| match names.iter().position(|n| n == c) {
            Some(i) => i,
            None => {
                names.push(c.clone());
                names.len() - 1
            }
        })
        .collect();
    (names, ids)
}

struct Encoded<'a> {
    data: &'a NominalDataset,
    class_ids: Vec<usize>,
    n_classes: usize,
}

impl Encoded<'_> {
    fn class_counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.class_ids[r]] += 1;
        }
        counts
    }

    fn gain(&self, rows: &[usize], attribute: usize) -> f64 {
        let n_bins = self.data.bin_edges[attribute].len() + 1;
        let mut per_bin = vec![vec![0usize; self.n_classes]; n_bins];
        for &r in rows {
            per_bin[self.data.features[r][attribute]][self.class_ids[r]] += 1;
        }
        let total = rows.len() as f64;
        let conditional: f64 = per_bin
            .iter()
            .map(|counts| {
                let size: usize = counts.iter().sum();
                (size as f64 / total) * entropy_from_counts(counts)
            })
            .sum();
        entropy_from_counts(&self.class_counts(rows)) - conditional
    }

    /// Most frequent class; ties go to the class whose first occurrence in
    /// `rows` comes earliest.
    fn majority(&self, rows: &[usize]) -> usize {
        let counts = self.class_counts(rows);
        let mut best: Option<usize> = None;
        for &r in rows {
            let c = self.class_ids[r];
            match best {
                None => best = Some(c),
                Some(b) if counts[c] > counts[b] => best = Some(c),
                _ => {}
            }
        }
        best.unwrap_or(0)
    }
}

/// Information gain, in bits, of splitting `data` on `attribute`.
pub fn information_gain(data: &NominalDataset, attribute: usize) -> Result<f64> {
    if data.is_empty() {
        return Err(invalid("information gain of an empty dataset"));
    }
    if attribute >= data.n_attributes() {
        return Err(invalid(format!("attribute {attribute} out of range")));
    }
    let (names, class_ids) = encode_classes(&data.classes);
    let enc = Encoded {
        data,
        class_ids,
        n_classes: names.len(),
    };
    let rows: Vec<usize> = (0..data.len()).collect();
    Ok(enc.gain(&rows, attribute))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionNode {
    Leaf {
        class: String,
    },
    Split {
        attribute: usize,
        children: BTreeMap<usize, DecisionNode>,
        /// Majority class of the training subset reaching this node, used
        /// for bins not seen in training.
        majority: String,
    },
}

impl DecisionNode {
    pub fn depth(&self) -> usize {
        match self {
            DecisionNode::Leaf { .. } => 0,
            DecisionNode::Split { children, .. } => {
                1 + children
                    .values()
                    .map(DecisionNode::depth)
                    .max()
                    .unwrap_or(0)
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            DecisionNode::Leaf { .. } => 1,
            DecisionNode::Split { children, .. } => {
                children.values().map(DecisionNode::n_leaves).sum()
            }
        }
    }
}

/// Grows an unpruned ID3 tree.
pub fn id3_train(train: &NominalDataset) -> Result<DecisionNode> {
    if train.is_empty() {
        return Err(invalid("cannot train on an empty dataset"));
    }
    let (names, class_ids) = encode_classes(&train.classes);
    let enc = Encoded {
        data: train,
        class_ids,
        n_classes: names.len(),
    };
    let rows: Vec<usize> = (0..train.len()).collect();
    let mut available = vec![true; train.n_attributes()];
    Ok(grow(&enc, &names, &rows, &mut available))
}

fn grow(
    enc: &Encoded<'_>,
    names: &[String],
    rows: &[usize],
    available: &mut [bool],
) -> DecisionNode {
    let majority = enc.majority(rows);
    let pure = rows
        .iter()
        .all(|&r| enc.class_ids[r] == enc.class_ids[rows[0]]);
    let mut best: Option<(usize, f64)> = None;
    if !pure {
        for a in (0..available.len()).filter(|&a| available[a]) {
            let g = enc.gain(rows, a);
            if best.is_none_or(|(_, bg)| g > bg + GAIN_TOLERANCE) {
                best = Some((a, g));
            }
        }
    }
    let Some((attribute, _)) = best else {
        return DecisionNode::Leaf {
            class: names[majority].clone(),
        };
    };

    let mut subsets: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        subsets
            .entry(enc.data.features[r][attribute])
            .or_default()
            .push(r);
    }
    available[attribute] = false;
    let children = subsets
        .into_iter()
        .map(|(bin, sub)| (bin, grow(enc, names, &sub, available)))
        .collect();
    available[attribute] = true;
    DecisionNode::Split {
        attribute,
        children,
        majority: names[majority].clone(),
    }
}

pub fn id3_predict<'t>(tree: &'t DecisionNode, instance: &[usize]) -> &'t str {
    let mut node = tree;
    loop {
        match node {
            DecisionNode::Leaf { class } => return class,
            DecisionNode::Split {
                attribute,
                children,
                majority,
            } => match instance.get(*attribute).and_then(|b| children.get(b)) {
                Some(child) => node = child,
                None => return majority,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub tp_rate: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedMetrics {
    pub tp_rate: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Rows are actual classes, columns predicted classes, both in `classes`
/// order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub test_size: usize,
    pub per_class: BTreeMap<ClassLabel, ClassMetrics>,
    pub weighted: WeightedMetrics,
    pub confusion: ConfusionMatrix,
    /// Rates whose denominator was zero (reported as 0).
    pub flags: Vec<String>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Scores `tree` on `test`. Classes are every label that occurs as an actual
/// or predicted value; weighted averages use actual-class support.
pub fn evaluate(tree: &DecisionNode, test: &NominalDataset) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(invalid("cannot evaluate on an empty test set"));
    }
    let predictions: Vec<&str> = test
        .features
        .iter()
        .map(|row| id3_predict(tree, row))
        .collect();

    let mut labels: Vec<ClassLabel> = test
        .classes
        .iter()
        .map(String::as_str)
        .chain(predictions.iter().copied())
        .map(|c| ClassLabel(c.to_owned()))
        .collect();
    labels.sort();
    labels.dedup();
    let index = |c: &str| {
        labels
            .binary_search(&ClassLabel(c.to_owned()))
            .expect("label collected above")
    };

    let m = labels.len();
    let mut counts = vec![vec![0usize; m]; m];
    for (actual, predicted) in test.classes.iter().zip(&predictions) {
        counts[index(actual)][index(predicted)] += 1;
    }

    let n = test.len();
    let mut per_class = BTreeMap::new();
    let mut flags = Vec::new();
    let (mut w_tp, mut w_fp, mut w_prec) = (0.0, 0.0, 0.0);
    let mut weighted_support = 0usize;
    for (x, label) in labels.iter().enumerate() {
        let tp = counts[x][x];
        let support: usize = counts[x].iter().sum();
        let predicted: usize = counts.iter().map(|row| row[x]).sum();
        let fn_ = support - tp;
        let fp = predicted - tp;
        let tn = n - tp - fn_ - fp;

        let mut rate = |name: &str, num: usize, den: usize| {
            ratio(num, den).unwrap_or_else(|| {
                flags.push(format!(
                    "class {}: {name} undefined (0/0), reported as 0",
                    label.0
                ));
                0.0
            })
        };
        let tp_rate = rate("tp_rate", tp, tp + fn_);
        let fp_rate = rate("fp_rate", fp, fp + tn);
        let precision = rate("precision", tp, tp + fp);

        if support > 0 {
            let s = support as f64;
            w_tp += s * tp_rate;
            w_fp += s * fp_rate;
            w_prec += s * precision;
            weighted_support += support;
        }
        per_class.insert(
            label.clone(),
            ClassMetrics {
                tp_rate,
                fp_rate,
                precision,
                recall: tp_rate,
                support,
            },
        );
    }
    let total = weighted_support as f64;
    let weighted = WeightedMetrics {
        tp_rate: w_tp / total,
        fp_rate: w_fp / total,
        precision: w_prec / total,
        recall: w_tp / total,
    };
    Ok(Evaluation {
        test_size: n,
        per_class,
        weighted,
        confusion: ConfusionMatrix {
            classes: labels.into_iter().map(|l| l.0).collect(),
            counts,
        },
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;

    fn nominal(rows: &[&[usize]], classes: &[&str], bins: usize) -> NominalDataset {
        let n_attr = rows[0].len();
        let edges = (0..n_attr)
            .map(|_| (1..bins).map(|i| i as f64).collect())
            .collect();
        NominalDataset::new(
            rows.iter().map(|r| r.to_vec()).collect(),
            classes.iter().map(|c| c.to_string()).collect(),
            edges,
        )
        .unwrap()
    }

    // attribute 0 splits {+,+} / {+,-}; attribute 1 is constant.
    fn gain_table() -> NominalDataset {
        nominal(
            &[&[0, 0], &[0, 0], &[1, 0], &[1, 0]],
            &["+", "+", "+", "-"],
            2,
        )
    }

    #[test]
    fn annotate() {
        let ds = parse_csv("2,3\n3,2\n1,2", false, None).unwrap();
        let p = Partition {
            assignment: vec![0, 0, 1],
            k: 2,
        };
        let a = annotate_with_clusters(&ds, &p).unwrap();
        assert_eq!(a.labels().unwrap(), &["0", "0", "1"]);
        let bad = Partition {
            assignment: vec![0, 0],
            k: 1,
        };
        assert!(annotate_with_clusters(&ds, &bad).is_err());
    }

    #[test]
    fn class_label_order() {
        let mut v: Vec<ClassLabel> = ["10", "2", "b", "a", "0"]
            .iter()
            .map(|s| ClassLabel(s.to_string()))
            .collect();
        v.sort();
        let s: Vec<&str> = v.iter().map(|c| c.0.as_str()).collect();
        assert_eq!(s, ["0", "2", "10", "a", "b"]);
    }

    #[test]
    fn equal_width_boundary_rule() {
        let ds = parse_csv("0,a\n5,b\n10,c", false, Some(1)).unwrap();
        let nd = discretize(&ds, 2).unwrap();
        assert_eq!(nd.bin_edges, vec![vec![5.0]]);
        let bins: Vec<usize> = nd.features.iter().map(|r| r[0]).collect();
        assert_eq!(bins, vec![0, 1, 1]);
    }

    #[test]
    fn clamping_and_max() {
        let train = parse_csv("0,a\n3,b\n10,c", false, Some(1)).unwrap();
        let d = Discretizer::fit(&train, 4).unwrap();
        assert_eq!(d.bin(0, 10.0), 3);
        assert_eq!(d.bin(0, -7.0), 0);
        assert_eq!(d.bin(0, 99.0), 3);
        let test = parse_csv("-1,a\n11,b", false, Some(1)).unwrap();
        let nd = d.transform(&test).unwrap();
        assert_eq!(nd.features, vec![vec![0], vec![3]]);
    }

    #[test]
    fn constant_column_warns() {
        let ds = parse_csv("1,0,a\n1,4,b", false, Some(2)).unwrap();
        let d = Discretizer::fit(&ds, 3).unwrap();
        assert!(d.bin_edges[0].is_empty());
        assert_eq!(d.warnings.len(), 1);
        assert!(Discretizer::fit(&ds, 1).is_err());
        let unlabelled = parse_csv("1\n2", false, None).unwrap();
        assert!(discretize(&unlabelled, 2).is_err());
    }

    #[test]
    fn gain_examples() {
        let perfect = nominal(&[&[0], &[0], &[1], &[1]], &["+", "+", "-", "-"], 2);
        assert!((information_gain(&perfect, 0).unwrap() - 1.0).abs() < 1e-12);

        let constant = nominal(&[&[1], &[1], &[1], &[1]], &["+", "+", "-", "-"], 2);
        assert_eq!(information_gain(&constant, 0).unwrap(), 0.0);

        let t = gain_table();
        let h = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        let expected = h - 0.5 * 0.0 - 0.5 * 1.0;
        let g = information_gain(&t, 0).unwrap();
        assert!((g - expected).abs() < 1e-12);
        assert!((g - 0.3113).abs() < 1e-4);
        assert_eq!(information_gain(&t, 1).unwrap(), 0.0);
        assert!(information_gain(&t, 2).is_err());
    }

    #[test]
    fn trees() {
        let pure = nominal(&[&[0], &[1]], &["x", "x"], 2);
        assert_eq!(
            id3_train(&pure).unwrap(),
            DecisionNode::Leaf { class: "x".into() }
        );

        let sep = nominal(&[&[0], &[0], &[1], &[1]], &["+", "+", "-", "-"], 2);
        let tree = id3_train(&sep).unwrap();
        match &tree {
            DecisionNode::Split {
                attribute,
                children,
                ..
            } => {
                assert_eq!(*attribute, 0);
                assert_eq!(children.len(), 2);
                assert!(children
                    .values()
                    .all(|c| matches!(c, DecisionNode::Leaf { .. })));
            }
            leaf => panic!("expected split, got {leaf:?}"),
        }
        for (row, class) in sep.features.iter().zip(&sep.classes) {
            assert_eq!(id3_predict(&tree, row), class);
        }

        let tree = id3_train(&gain_table()).unwrap();
        let DecisionNode::Split {
            attribute,
            majority,
            ..
        } = &tree
        else {
            panic!("expected split");
        };
        assert_eq!(*attribute, 0);
        assert_eq!(majority, "+");
        // bin 2 never appears at the root in training
        assert_eq!(id3_predict(&tree, &[2, 0]), "+");
    }

    #[test]
    fn majority_tie_goes_to_first_seen() {
        // attribute carries no information; 2 vs 2 tie.
        let t = nominal(&[&[0], &[0], &[0], &[0]], &["b", "a", "a", "b"], 2);
        let tree = id3_train(&t).unwrap();
        // single attribute with gain 0 is still split on, leaving one child
        // whose attributes are exhausted.
        assert_eq!(id3_predict(&tree, &[0]), "b");
        assert_eq!(id3_predict(&tree, &[1]), "b");
    }

    #[test]
    fn empty_inputs() {
        let empty = NominalDataset::new(vec![], vec![], vec![vec![]]).unwrap();
        assert!(id3_train(&empty).is_err());
        assert!(information_gain(&empty, 0).is_err());
        let leaf = DecisionNode::Leaf { class: "a".into() };
        assert!(evaluate(&leaf, &empty).is_err());
    }

    #[test]
    fn perfect_predictions() {
        let sep = nominal(&[&[0], &[0], &[1], &[1]], &["+", "+", "-", "-"], 2);
        let tree = id3_train(&sep).unwrap();
        let e = evaluate(&tree, &sep).unwrap();
        assert!(e
            .per_class
            .values()
            .all(|m| m.tp_rate == 1.0 && m.fp_rate == 0.0));
        assert_eq!(e.weighted.precision, 1.0);
        assert!(e.flags.is_empty());
    }

    #[test]
    fn binary_confusion() {
        // Leaf predicts by bin: bin 0 -> "p", bin 1 -> "n".
        let tree = DecisionNode::Split {
            attribute: 0,
            children: BTreeMap::from([
                (0, DecisionNode::Leaf { class: "p".into() }),
                (1, DecisionNode::Leaf { class: "n".into() }),
            ]),
            majority: "p".into(),
        };
        // actual p: 3 predicted p, 1 predicted n; actual n: 1 p, 3 n.
        let test = nominal(
            &[&[0], &[0], &[0], &[1], &[0], &[1], &[1], &[1]],
            &["p", "p", "p", "p", "n", "n", "n", "n"],
            2,
        );
        let e = evaluate(&tree, &test).unwrap();
        assert_eq!(e.confusion.classes, vec!["n", "p"]);
        assert_eq!(e.confusion.counts, vec![vec![3, 1], vec![1, 3]]);
        for m in e.per_class.values() {
            assert_eq!((m.tp_rate, m.fp_rate, m.precision), (0.75, 0.25, 0.75));
        }
        assert_eq!(e.weighted.tp_rate, 0.75);
        assert_eq!(e.weighted.fp_rate, 0.25);
        assert_eq!(e.weighted.precision, 0.75);
        assert_eq!(e.weighted.recall, 0.75);
    }

    #[test]
    fn unseen_and_unpredicted_classes() {
        let tree = DecisionNode::Leaf { class: "a".into() };
        let test = nominal(&[&[0], &[0], &[0]], &["a", "a", "z"], 2);
        let e = evaluate(&tree, &test).unwrap();
        let z = &e.per_class[&ClassLabel("z".into())];
        assert_eq!((z.tp_rate, z.precision, z.support), (0.0, 0.0, 1));
        assert!(e.flags.iter().any(|f| f.contains("class z: precision")));
        let a = &e.per_class[&ClassLabel("a".into())];
        assert!((a.precision - 2.0 / 3.0).abs() < 1e-15);
        // weighted recall = accuracy = 2/3
        assert!((e.weighted.recall - 2.0 / 3.0).abs() < 1e-15);
    }
}
