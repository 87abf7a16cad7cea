//! Numeric datasets: CSV loading and writing, column/row truncation, and
//! seeded train/test splits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A dense, row-major table of finite reals with optional class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n_attributes: usize,
    values: Vec<f64>,
    attribute_names: Vec<String>,
    labels: Option<Vec<String>>,
}

impl Dataset {
    pub fn from_rows(
        rows: Vec<Vec<f64>>,
        attribute_names: Option<Vec<String>>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n_attributes = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * n_attributes);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_attributes {
                return Err(Error::Ragged {
                    row: i + 1,
                    expected: n_attributes,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        let names = attribute_names.unwrap_or_else(|| default_names(n_attributes));
        Self::new(n_attributes, values, names, labels)
    }

    fn new(
        n_attributes: usize,
        values: Vec<f64>,
        attribute_names: Vec<String>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if n_attributes == 0 || values.is_empty() {
            return Err(Error::Dataset(
                "need at least one instance and one attribute".into(),
            ));
        }
        if attribute_names.len() != n_attributes {
            return Err(Error::Dataset(format!(
                "{} attribute names for {} attributes",
                attribute_names.len(),
                n_attributes
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Dataset(format!(
                "non-finite value at row {}, column {}",
                pos / n_attributes + 1,
                pos % n_attributes + 1
            )));
        }
        let n_instances = values.len() / n_attributes;
        if let Some(labels) = &labels {
            if labels.len() != n_instances {
                return Err(Error::Dataset(format!(
                    "{} labels for {} instances",
                    labels.len(),
                    n_instances
                )));
            }
        }
        Ok(Self {
            n_attributes,
            values,
            attribute_names,
            labels,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.values.len() / self.n_attributes
    }

    pub fn n_attributes(&self) -> usize {
        self.n_attributes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_attributes..(i + 1) * self.n_attributes]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_attributes)
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Replaces (or sets) the class labels.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_instances() {
            return Err(Error::LengthMismatch {
                expected: self.n_instances(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    /// Builds a new dataset from the given row indices, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.n_attributes);
        for &i in indices {
            if i >= self.n_instances() {
                return Err(invalid(format!("row index {i} out of range")));
            }
            values.extend_from_slice(self.row(i));
        }
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&i| l[i].clone()).collect());
        Self::new(
            self.n_attributes,
            values,
            self.attribute_names.clone(),
            labels,
        )
    }
}

fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("a{i}")).collect()
}

/// Reads a comma-separated numeric table.
///
/// Rows keep file order. When `label_column` is given, that column is taken
/// out of the features and kept verbatim as the class label. Parse errors
/// report 1-based file line and column numbers.
pub fn load_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    label_column: Option<usize>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    parse_csv(&text, has_header, label_column)
}

pub fn parse_csv(text: &str, has_header: bool, label_column: Option<usize>) -> Result<Dataset> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let header: Option<Vec<String>> = if has_header {
        let (_, line) = lines
            .next()
            .ok_or_else(|| Error::Dataset("file has no header row".into()))?;
        Some(line.split(',').map(|c| c.trim().to_owned()).collect())
    } else {
        None
    };

    let mut width = header.as_ref().map(Vec::len);
    let mut values = Vec::new();
    let mut labels = label_column.map(|_| Vec::new());
    for (line_no, line) in lines {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(Error::Ragged {
                row: line_no,
                expected,
                found: cells.len(),
            });
        }
        if let Some(lc) = label_column {
            if lc >= expected {
                return Err(invalid(format!(
                    "label column {lc} out of range for {expected} columns"
                )));
            }
        }
        for (col, cell) in cells.iter().enumerate() {
            if Some(col) == label_column {
                if let Some(labels) = labels.as_mut() {
                    labels.push((*cell).to_owned());
                }
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        row: line_no,
                        column: col + 1,
                        value: (*cell).to_owned(),
                    })
                }
            }
        }
    }

    let width = width.ok_or_else(|| Error::Dataset("file has no data rows".into()))?;
    let n_attributes = width - usize::from(label_column.is_some());
    let names = match header {
        Some(mut h) => {
            if let Some(lc) = label_column {
                h.remove(lc);
            }
            h
        }
        None => default_names(n_attributes),
    };
    Dataset::new(n_attributes, values, names, labels)
}

/// Renders a dataset in the dialect `parse_csv(_, true, Some(last))` reads
/// back. Values use Rust's shortest round-trip formatting, so a reload is
/// bit-identical.
pub fn to_csv_string(ds: &Dataset) -> String {
    let mut out = String::new();
    let mut header = ds.attribute_names.join(",");
    if ds.labels.is_some() {
        header.push_str(",class");
    }
    out.push_str(&header);
    out.push('\n');
    for (i, row) in ds.rows().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        if let Some(labels) = &ds.labels {
            out.push(',');
            out.push_str(&labels[i]);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv_string(ds)).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })
}

/// Removes the final `m` attribute columns.
pub fn drop_last_attributes(ds: &Dataset, m: usize) -> Result<Dataset> {
    let n = ds.n_attributes;
    if m >= n {
        return Err(invalid(format!(
            "cannot drop {m} of {n} attributes; at least one must remain"
        )));
    }
    let keep = n - m;
    let values = ds.rows().flat_map(|r| r[..keep].iter().copied()).collect();
    Dataset::new(
        keep,
        values,
        ds.attribute_names[..keep].to_vec(),
        ds.labels.clone(),
    )
}

/// Removes the final `m` instances.
pub fn drop_last_instances(ds: &Dataset, m: usize) -> Result<Dataset> {
    let n = ds.n_instances();
    if m >= n {
        return Err(invalid(format!(
            "cannot drop {m} of {n} instances; at least one must remain"
        )));
    }
    let keep: Vec<usize> = (0..n - m).collect();
    ds.select_rows(&keep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    /// Parent row indices of the training rows, ascending.
    pub train_rows: Vec<usize>,
    /// Parent row indices of the test rows, ascending.
    pub test_rows: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
    pub stratified: bool,
}

/// Seeded train/test split.
///
/// The training side gets `round(ratio * n)` rows. With `stratify`, per-class
/// training counts are allocated by largest remainder so each class lands
/// within one instance of `ratio * class_size`; remainder ties go to the class
/// seen first. Both sides keep the parent's row order.
pub fn split(ds: &Dataset, ratio: f64, seed: u64, stratify: bool) -> Result<SplitPair> {
    let labels = ds
        .labels()
        .ok_or_else(|| invalid("split requires a labelled dataset"))?;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(invalid(format!("split ratio {ratio} is outside (0, 1)")));
    }
    let n = ds.n_instances();
    let n_train = (ratio * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(invalid(format!(
            "ratio {ratio} over {n} instances leaves one side of the split empty"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_rows = Vec::with_capacity(n_train);

    if stratify {
        let groups = class_groups(labels);
        if let Some((class, rows)) = groups.iter().find(|(_, rows)| rows.len() < 2) {
            return Err(invalid(format!(
                "class {class:?} has {} member(s); stratification needs at least 2",
                rows.len()
            )));
        }
        let quotas = largest_remainder(
            &groups.iter().map(|(_, r)| r.len()).collect::<Vec<_>>(),
            ratio,
            n_train,
        );
        for ((_, mut rows), quota) in groups.into_iter().zip(quotas) {
            rows.shuffle(&mut rng);
            train_rows.extend_from_slice(&rows[..quota]);
        }
    } else {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut rng);
        train_rows.extend_from_slice(&rows[..n_train]);
    }

    train_rows.sort_unstable();
    let mut in_train = vec![false; n];
    for &r in &train_rows {
        in_train[r] = true;
    }
    let test_rows: Vec<usize> = (0..n).filter(|&r| !in_train[r]).collect();

    Ok(SplitPair {
        train: ds.select_rows(&train_rows)?,
        test: ds.select_rows(&test_rows)?,
        train_rows,
        test_rows,
        seed,
        ratio,
        stratified: stratify,
    })
}

/// Row indices per class, classes in first-seen order.
pub(crate) fn class_groups(labels: &[String]) -> Vec<(String, Vec<usize>)> {
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        match groups.iter_mut().find(|(c, _)| c == label) {
            Some((_, rows)) => rows.push(i),
            None => groups.push((label.clone(), vec![i])),
        }
    }
    groups
}

fn largest_remainder(sizes: &[usize], ratio: f64, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = sizes.iter().map(|&s| ratio * s as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = total.saturating_sub(assigned);
    for &c in order.iter().cycle().take(sizes.len() * 2) {
        if left == 0 {
            break;
        }
        if quotas[c] < sizes[c] {
            quotas[c] += 1;
            left -= 1;
        }
    }
    quotas
}
