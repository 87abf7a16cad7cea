//! Serialized forms of a dendrogram: JSON with 17-significant-digit reals,
//! and Newick for tree viewers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::Dendrogram;
use crate::error::{Error, Result};

/// Version of the dendrogram/partition/report document layouts.
pub const SCHEMA_VERSION: u32 = 1;

/// Formats a finite real with exactly 17 significant digits.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serde adapter writing `f64` as a bare JSON number with 17 significant
/// digits. Only meaningful with `serde_json`.
pub mod sig17 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if !v.is_finite() {
            return Err(serde::ser::Error::custom("non-finite value"));
        }
        let raw =
            RawValue::from_string(super::format_sig17(*v)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }
}

pub mod sig17_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => super::sig17::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<f64>::deserialize(d)
    }
}

/// Dendrogram document: schema version, provenance, then the tree itself
/// (`n_leaves`, `final_k`, `records`) at top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramDocument<C> {
    pub schema_version: u32,
    pub config: C,
    #[serde(flatten)]
    pub dendrogram: Dendrogram,
}

pub fn dendrogram_json<C: Serialize>(dg: &Dendrogram, config: &C) -> Result<String> {
    #[derive(Serialize)]
    struct Borrowed<'a, C> {
        schema_version: u32,
        config: &'a C,
        #[serde(flatten)]
        dendrogram: &'a Dendrogram,
    }
    let mut s = serde_json::to_string_pretty(&Borrowed {
        schema_version: SCHEMA_VERSION,
        config,
        dendrogram: dg,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn parse_dendrogram_json<C: for<'de> Deserialize<'de>>(
    text: &str,
) -> Result<DendrogramDocument<C>> {
    let doc: DendrogramDocument<C> = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidArgument(format!(
            "unsupported schema version {}",
            doc.schema_version
        )));
    }
    doc.dendrogram.validate()?;
    Ok(doc)
}

/// Newick rendering. Leaves are named by instance index unless `leaf_names`
/// is given; branch lengths are parent height minus child height, and
/// sibling subtrees are ordered by their smallest leaf. A
/// dendrogram stopped at `final_k > 1` yields one tree per line.
pub fn to_newick(dg: &Dendrogram, leaf_names: Option<&[String]>) -> Result<String> {
    dg.validate()?;
    let n = dg.n_leaves;
    if let Some(names) = leaf_names {
        if names.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: names.len(),
            });
        }
    }
    let total = n + dg.records.len();
    let mut children: Vec<Option<(usize, usize)>> = vec![None; total];
    let mut height = vec![0.0f64; total];
    let mut is_root = vec![true; total];
    for r in &dg.records {
        children[r.new_id.0] = Some((r.left.0, r.right.0));
        height[r.new_id.0] = r.distance;
        is_root[r.left.0] = false;
        is_root[r.right.0] = false;
    }

    let mut out = String::new();
    // Roots ordered by their smallest leaf.
    let mut roots: Vec<(usize, usize)> = (0..total)
        .filter(|&id| is_root[id])
        .map(|id| (min_leaf(id, &children), id))
        .collect();
    roots.sort_unstable();
    for (_, root) in roots {
        write_node(root, None, &children, &height, leaf_names, &mut out);
        out.push_str(";\n");
    }
    Ok(out)
}

fn min_leaf(id: usize, children: &[Option<(usize, usize)>]) -> usize {
    match children[id] {
        Some((a, b)) => min_leaf(a, children).min(min_leaf(b, children)),
        None => id,
    }
}

fn write_node(
    id: usize,
    parent_height: Option<f64>,
    children: &[Option<(usize, usize)>],
    height: &[f64],
    leaf_names: Option<&[String]>,
    out: &mut String,
) {
    match children[id] {
        Some((a, b)) => {
            let (l, r) = if min_leaf(a, children) <= min_leaf(b, children) {
                (a, b)
            } else {
                (b, a)
            };
            out.push('(');
            write_node(l, Some(height[id]), children, height, leaf_names, out);
            out.push(',');
            write_node(r, Some(height[id]), children, height, leaf_names, out);
            out.push(')');
        }
        None => match leaf_names {
            Some(names) => out.push_str(&newick_label(&names[id])),
            None => {
                let _ = write!(out, "{id}");
            }
        },
    }
    if let Some(ph) = parent_height {
        let _ = write!(out, ":{}", ph - height[id]);
    }
}

fn newick_label(name: &str) -> String {
    if name
        .chars()
        .any(|c| matches!(c, '(' | ')' | ',' | ':' | ';' | '[' | ']' | '\'' | ' '))
    {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_owned()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_csv;
    use crate::engine::shachom;
    use crate::homogeneity::WeightVector;

    fn table1_dendrogram(k: usize) -> Dendrogram {
        let ds = parse_csv("2,3\n3,2\n1,2", false, None).unwrap();
        let w = WeightVector::new(vec![0.2, 0.4]).unwrap();
        shachom(&ds, k, &w, 1e-9).unwrap().0
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(
            format_sig17(std::f64::consts::SQRT_2),
            "1.4142135623730951e0"
        );
        assert_eq!(format_sig17(0.7), "6.9999999999999996e-1");
        assert_eq!(format_sig17(0.0), "0.0000000000000000e0");
    }

    #[test]
    fn json_round_trip() {
        let dg = table1_dendrogram(1);
        let text = dendrogram_json(&dg, &serde_json::json!({"k": 1})).unwrap();
        assert!(
            text.contains("\"distance\": 1.4142135623730951e0"),
            "{text}"
        );
        assert!(text.contains("\"resolved_by\": \"id-order\""));
        assert!(text.contains("\"hc_value\": null"));
        let doc: DendrogramDocument<serde_json::Value> = parse_dendrogram_json(&text).unwrap();
        assert_eq!(doc.dendrogram, dg);
        assert_eq!(doc.config["k"], 1);
    }

    #[test]
    fn newick_forms() {
        let dg = table1_dendrogram(1);
        let s2 = std::f64::consts::SQRT_2;
        assert_eq!(
            to_newick(&dg, None).unwrap(),
            format!("((0:{s2},1:{s2}):0,2:{s2});\n")
        );
        let dg = table1_dendrogram(2);
        let names: Vec<String> = ["A", "B", "C d"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            to_newick(&dg, Some(&names)).unwrap(),
            format!("(A:{s2},B:{s2});\n'C d';\n")
        );
    }
}
