#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shachom::Dataset;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-100.0..100.0)).collect())
        .collect();
    Dataset::from_rows(rows, None, None).unwrap()
}

/// One merge of the reference implementation: `(left, right, new_id, height)`.
pub type OracleMerge = (usize, usize, usize, f64);

fn point_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .fold(0.0, |acc, v| acc + v)
        .sqrt()
}

/// Textbook single linkage: every step recomputes each inter-cluster
/// distance as the minimum over member pairs and merges the strictly
/// smallest (first found on exact ties). Ids follow the `n, n+1, ...` scheme.
pub fn naive_single_linkage(ds: &Dataset, k: usize) -> Vec<OracleMerge> {
    let n = ds.n_instances();
    let rows: Vec<Vec<f64>> = ds.rows().map(<[f64]>::to_vec).collect();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    let mut next_id = n;
    while clusters.len() > k {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut d = f64::INFINITY;
                for &i in &clusters[a].1 {
                    for &j in &clusters[b].1 {
                        d = d.min(point_distance(&rows[i], &rows[j]));
                    }
                }
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let (d, a, b) = best.unwrap();
        let (ida, ma) = clusters[a].clone();
        let (idb, mb) = clusters[b].clone();
        clusters.remove(b);
        clusters.remove(a);
        let mut members = ma;
        members.extend(mb);
        clusters.push((next_id, members));
        merges.push((ida.min(idb), ida.max(idb), next_id, d));
        next_id += 1;
    }
    merges
}

/// Column sums of the given rows, recomputed from scratch.
pub fn column_sums(ds: &Dataset, members: &[usize]) -> Vec<f64> {
    let mut sums = vec![0.0; ds.n_attributes()];
    for &m in members {
        for (s, v) in sums.iter_mut().zip(ds.row(m)) {
            *s += v;
        }
    }
    sums
}
