//! End-to-end runs driven by a [`RunConfig`]: clustering, cluster-label
//! evaluation, and parameter sweeps. Every file written embeds the config
//! that produced it.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    class_groups, drop_last_attributes, drop_last_instances, load_csv, split, Dataset,
};
use crate::engine::{self, Dendrogram, EngineOptions, Partition, DEFAULT_TIE_EPS};
use crate::error::{invalid, Error, Result};
use crate::eval::{
    annotate_with_clusters, evaluate, id3_train, Discretizer, Evaluation, DEFAULT_BINS,
};
use crate::export::{dendrogram_json, to_newick, SCHEMA_VERSION};
use crate::homogeneity::{AlphaSpec, WeightVector};

pub const DENDROGRAM_FILE: &str = "dendrogram.json";
pub const NEWICK_FILE: &str = "dendrogram.nwk";
pub const PARTITION_FILE: &str = "partition.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const CELLS_DIR: &str = "cells";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    /// First non-empty line of the input is a header.
    pub has_header: bool,
    /// 0-based column holding class labels or ids, excluded from features.
    pub label_column: Option<usize>,
    pub k: usize,
    pub alpha: AlphaSpec,
    pub tie_eps: f64,
    pub split_ratio: f64,
    pub stratify: bool,
    pub seed: u64,
    pub bins: usize,
    pub drop_attributes: usize,
    pub drop_instances: usize,
    pub out: PathBuf,
    /// Also write a Newick rendering of the dendrogram.
    pub newick: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            has_header: false,
            label_column: None,
            k: 3,
            alpha: AlphaSpec::default(),
            tie_eps: DEFAULT_TIE_EPS,
            split_ratio: 0.66,
            stratify: true,
            seed: 42,
            bins: DEFAULT_BINS,
            drop_attributes: 0,
            drop_instances: 0,
            out: PathBuf::from("out"),
            newick: false,
        }
    }
}

impl RunConfig {
    /// Checks every field that can be checked without reading the input.
    pub fn validate(&self) -> Result<()> {
        if self.input.as_os_str().is_empty() {
            return Err(invalid("no input file given"));
        }
        if self.k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        self.alpha.validate()?;
        if !(self.tie_eps >= 0.0 && self.tie_eps.is_finite()) {
            return Err(invalid(format!(
                "tie_eps {} must be finite and >= 0",
                self.tie_eps
            )));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(invalid(format!(
                "split_ratio {} is outside (0, 1)",
                self.split_ratio
            )));
        }
        if self.bins < 2 {
            return Err(invalid("bins must be at least 2"));
        }
        if self.out.as_os_str().is_empty() {
            return Err(invalid("no output directory given"));
        }
        Ok(())
    }

    fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Loads the input and applies the configured truncations.
pub fn prepare_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let mut ds = load_csv(&cfg.input, cfg.has_header, cfg.label_column)?;
    if cfg.drop_attributes > 0 {
        ds = drop_last_attributes(&ds, cfg.drop_attributes)?;
    }
    if cfg.drop_instances > 0 {
        ds = drop_last_instances(&ds, cfg.drop_instances)?;
    }
    Ok(ds)
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub dataset: Dataset,
    pub weights: WeightVector,
    pub dendrogram: Dendrogram,
    pub partition: Partition,
}

/// Runs the clustering step without touching the filesystem beyond reading
/// the input.
pub fn cluster(cfg: &RunConfig) -> Result<ClusterOutcome> {
    cfg.validate()?;
    let dataset = prepare_dataset(cfg)?;
    let weights = cfg.alpha.resolve(dataset.n_attributes())?;
    let opts = EngineOptions {
        tie_eps: cfg.tie_eps,
        ..EngineOptions::default()
    };
    let (dendrogram, partition) = engine::run(&dataset, cfg.k, &weights, &opts)?;
    dendrogram.validate()?;
    Ok(ClusterOutcome {
        dataset,
        weights,
        dendrogram,
        partition,
    })
}

/// One row per K mirroring the published results layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "Rate TP")]
    pub tp_rate: f64,
    #[serde(rename = "Rate FP")]
    pub fp_rate: f64,
    #[serde(rename = "Precision")]
    pub precision: f64,
    #[serde(rename = "Recall")]
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub config: RunConfig,
    pub k: usize,
    pub alpha: Vec<f64>,
    pub split_seed: u64,
    pub split_ratio: f64,
    /// Whether the split was stratified; falls back to a plain split when
    /// some cluster has fewer than two members.
    pub stratified: bool,
    pub n_bins: usize,
    pub train_size: usize,
    pub tree_depth: usize,
    pub tree_leaves: usize,
    pub table: Vec<TableRow>,
    #[serde(flatten)]
    pub evaluation: Evaluation,
    pub notes: Vec<String>,
}

/// Annotates, splits, discretizes, trains and scores.
pub fn evaluate_outcome(cfg: &RunConfig, outcome: &ClusterOutcome) -> Result<EvalReport> {
    let mut notes = Vec::new();
    if outcome.dataset.labels().is_some() {
        notes.push("input labels replaced by cluster labels".to_owned());
    }
    let annotated = annotate_with_clusters(&outcome.dataset, &outcome.partition)?;

    let labels = annotated.labels().unwrap_or_default();
    let mut stratify = cfg.stratify;
    if stratify {
        let small: Vec<String> = class_groups(labels)
            .into_iter()
            .filter(|(_, rows)| rows.len() < 2)
            .map(|(c, _)| c)
            .collect();
        if !small.is_empty() {
            stratify = false;
            notes.push(format!(
                "stratification skipped: {} cluster(s) with a single member",
                small.len()
            ));
        }
    }
    let parts = split(&annotated, cfg.split_ratio, cfg.seed, stratify)?;

    let discretizer = Discretizer::fit(&parts.train, cfg.bins)?;
    notes.extend(discretizer.warnings.iter().cloned());
    let train = discretizer.transform(&parts.train)?;
    let test = discretizer.transform(&parts.test)?;
    let tree = id3_train(&train)?;
    let evaluation = evaluate(&tree, &test)?;

    let w = &evaluation.weighted;
    Ok(EvalReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        k: cfg.k,
        alpha: outcome.weights.as_slice().to_vec(),
        split_seed: cfg.seed,
        split_ratio: cfg.split_ratio,
        stratified: stratify,
        n_bins: cfg.bins,
        train_size: train.len(),
        tree_depth: tree.depth(),
        tree_leaves: tree.n_leaves(),
        table: vec![TableRow {
            k: cfg.k,
            tp_rate: w.tp_rate,
            fp_rate: w.fp_rate,
            precision: w.precision,
            recall: w.recall,
        }],
        evaluation,
        notes,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Write {
        path: path.to_owned(),
        source,
    })
}

pub fn partition_csv(cfg: &RunConfig, p: &Partition) -> Result<String> {
    let mut s = format!("# config={}\ninstance,cluster\n", cfg.to_json()?);
    for (i, label) in p.assignment.iter().enumerate() {
        let _ = writeln!(s, "{i},{label}");
    }
    Ok(s)
}

/// Writes the dendrogram, the partition and, if configured, the Newick tree.
pub fn write_cluster_outputs(cfg: &RunConfig, outcome: &ClusterOutcome) -> Result<()> {
    ensure_dir(&cfg.out)?;
    write_file(
        &cfg.out.join(DENDROGRAM_FILE),
        &dendrogram_json(&outcome.dendrogram, cfg)?,
    )?;
    write_file(
        &cfg.out.join(PARTITION_FILE),
        &partition_csv(cfg, &outcome.partition)?,
    )?;
    if cfg.newick {
        write_file(
            &cfg.out.join(NEWICK_FILE),
            &to_newick(&outcome.dendrogram, None)?,
        )?;
    }
    Ok(())
}

pub fn run_cluster(cfg: &RunConfig) -> Result<ClusterOutcome> {
    let outcome = cluster(cfg)?;
    write_cluster_outputs(cfg, &outcome)?;
    Ok(outcome)
}

pub fn report_json(report: &EvalReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Cluster, evaluate, and write all artifacts.
pub fn run_eval(cfg: &RunConfig) -> Result<EvalReport> {
    let outcome = cluster(cfg)?;
    let report = evaluate_outcome(cfg, &outcome)?;
    write_cluster_outputs(cfg, &outcome)?;
    write_file(&cfg.out.join(REPORT_FILE), &report_json(&report)?)?;
    Ok(report)
}

/// Values to vary. An empty axis keeps the base config's value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub k: Vec<usize>,
    pub alpha: Vec<AlphaSpec>,
    pub drop_attributes: Vec<usize>,
    pub drop_instances: Vec<usize>,
}

impl FromStr for SweepGrid {
    type Err = Error;

    /// `k=3,10,30;alpha=0.05,0.2;drop_attributes=4,8`. A per-attribute
    /// alpha is written with `:` between its components.
    fn from_str(s: &str) -> Result<Self> {
        let mut grid = SweepGrid::default();
        for axis in s.split(';').map(str::trim).filter(|a| !a.is_empty()) {
            let (name, values) = axis
                .split_once('=')
                .ok_or_else(|| invalid(format!("grid axis {axis:?} lacks '='")))?;
            let values: Vec<&str> = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .collect();
            let counts = || -> Result<Vec<usize>> {
                values
                    .iter()
                    .map(|v| {
                        v.parse()
                            .map_err(|_| invalid(format!("bad count {v:?} on axis {name}")))
                    })
                    .collect()
            };
            match name.trim() {
                "k" => grid.k = counts()?,
                "drop_attributes" | "drop-attributes" => grid.drop_attributes = counts()?,
                "drop_instances" | "drop-instances" => grid.drop_instances = counts()?,
                "alpha" => {
                    grid.alpha = values
                        .iter()
                        .map(|v| v.replace(':', ",").parse())
                        .collect::<Result<_>>()?
                }
                other => return Err(invalid(format!("unknown grid axis {other:?}"))),
            }
        }
        Ok(grid)
    }
}

impl SweepGrid {
    /// One config per grid cell, each writing under `<out>/cells/<name>`.
    pub fn cells(&self, base: &RunConfig) -> Vec<RunConfig> {
        fn axis<T: Clone>(values: &[T], base: T) -> Vec<T> {
            if values.is_empty() {
                vec![base]
            } else {
                values.to_vec()
            }
        }
        let mut out = Vec::new();
        for da in axis(&self.drop_attributes, base.drop_attributes) {
            for di in axis(&self.drop_instances, base.drop_instances) {
                for alpha in axis(&self.alpha, base.alpha.clone()) {
                    for &k in &axis(&self.k, base.k) {
                        let mut cfg = base.clone();
                        cfg.k = k;
                        cfg.alpha = alpha.clone();
                        cfg.drop_attributes = da;
                        cfg.drop_instances = di;
                        cfg.out = base.out.join(CELLS_DIR).join(cell_name(&cfg));
                        out.push(cfg);
                    }
                }
            }
        }
        out
    }
}

fn alpha_token(alpha: &AlphaSpec) -> String {
    alpha.to_string().replace(',', ":")
}

pub fn cell_name(cfg: &RunConfig) -> String {
    format!(
        "k{}_alpha{}_da{}_di{}",
        cfg.k,
        alpha_token(&cfg.alpha),
        cfg.drop_attributes,
        cfg.drop_instances
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub cell: String,
    pub k: usize,
    pub alpha: String,
    pub drop_attributes: usize,
    pub drop_instances: usize,
    pub result: std::result::Result<WeightedRow, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedRow {
    pub tp_rate: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub merges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn n_failed(&self) -> usize {
        self.rows.iter().filter(|r| r.result.is_err()).count()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

pub fn sweep_csv(base: &RunConfig, grid: &SweepGrid, summary: &SweepSummary) -> Result<String> {
    let mut s = format!(
        "# config={}\n# grid={}\n",
        base.to_json()?,
        serde_json::to_string(grid)?
    );
    s.push_str(
        "cell,k,alpha,drop_attributes,drop_instances,status,tp_rate,fp_rate,precision,recall,merges,error\n",
    );
    for r in &summary.rows {
        let _ = write!(
            s,
            "{},{},{},{},{},",
            csv_field(&r.cell),
            r.k,
            csv_field(&r.alpha),
            r.drop_attributes,
            r.drop_instances
        );
        match &r.result {
            Ok(w) => {
                let _ = writeln!(
                    s,
                    "ok,{},{},{},{},{},",
                    w.tp_rate, w.fp_rate, w.precision, w.recall, w.merges
                );
            }
            Err(e) => {
                let _ = writeln!(s, "error,,,,,,{}", csv_field(e));
            }
        }
    }
    Ok(s)
}

/// Runs every grid cell (in parallel), writes per-cell artifacts and the
/// aggregate table, and fails only if every cell failed.
pub fn run_sweep(base: &RunConfig, grid: &SweepGrid) -> Result<SweepSummary> {
    base.validate()?;
    for alpha in &grid.alpha {
        alpha.validate()?;
    }
    let cells = grid.cells(base);
    let results: Vec<(RunConfig, Result<EvalReport>)> = cells
        .into_par_iter()
        .map(|cfg| {
            let r = run_eval(&cfg);
            (cfg, r)
        })
        .collect();

    let mut keyed: Vec<(SweepKey, SweepRow)> = Vec::with_capacity(results.len());
    let mut first_error = None;
    for (cfg, result) in results {
        let row = SweepRow {
            cell: cell_name(&cfg),
            k: cfg.k,
            alpha: alpha_token(&cfg.alpha),
            drop_attributes: cfg.drop_attributes,
            drop_instances: cfg.drop_instances,
            result: match result {
                Ok(report) => Ok(WeightedRow {
                    tp_rate: report.evaluation.weighted.tp_rate,
                    fp_rate: report.evaluation.weighted.fp_rate,
                    precision: report.evaluation.weighted.precision,
                    recall: report.evaluation.weighted.recall,
                    merges: report.train_size + report.evaluation.test_size - report.k,
                }),
                Err(e) => {
                    let msg = e.to_string();
                    first_error.get_or_insert(e);
                    Err(msg)
                }
            },
        };
        keyed.push((SweepKey::of(&cfg), row));
    }
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    let summary = SweepSummary {
        rows: keyed.into_iter().map(|(_, r)| r).collect(),
    };

    ensure_dir(&base.out)?;
    write_file(
        &base.out.join(SWEEP_FILE),
        &sweep_csv(base, grid, &summary)?,
    )?;
    match first_error {
        Some(e) if summary.n_failed() == summary.rows.len() => Err(e),
        _ => Ok(summary),
    }
}

#[derive(Debug)]
struct SweepKey(usize, usize, Vec<f64>, usize);

impl SweepKey {
    fn of(cfg: &RunConfig) -> Self {
        let alpha = match &cfg.alpha {
            AlphaSpec::Scalar(a) => vec![*a],
            AlphaSpec::PerAttribute(v) => v.clone(),
        };
        SweepKey(cfg.drop_attributes, cfg.drop_instances, alpha, cfg.k)
    }

    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .cmp(&other.0)
            .then(self.1.cmp(&other.1))
            .then_with(|| {
                self.2
                    .iter()
                    .zip(&other.2)
                    .map(|(a, b)| a.total_cmp(b))
                    .find(|o| o.is_ne())
                    .unwrap_or(self.2.len().cmp(&other.2.len()))
            })
            .then(self.3.cmp(&other.3))
    }
}
