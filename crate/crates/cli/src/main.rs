use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use shachom::pipeline::{self, RunConfig, SweepGrid};
use shachom::{AlphaSpec, Error, ErrorKind};

/// Homogeneity-tie-broken single-linkage clustering and ID3 evaluation.
#[derive(Debug, Parser)]
#[command(name = "shachom", version)]
struct Cli {
    /// TOML file setting any flag; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a dataset and write the dendrogram and partition.
    Cluster(RunArgs),
    /// Cluster, then score the clusters with an ID3 tree.
    Eval(RunArgs),
    /// Run `eval` over a grid of k, alpha and truncation values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// e.g. "k=3,10,30;alpha=0.05,0.2,0.35;drop_attributes=4,8".
        /// Per-attribute alphas use ':' between values.
        #[arg(long)]
        grid: Option<String>,
    },
}

#[derive(Debug, Clone, Default, Args)]
struct RunArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    /// Input has a header row.
    #[arg(long)]
    header: bool,
    /// 0-based column holding labels or ids; excluded from the features.
    #[arg(long)]
    label_column: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// A scalar, or one comma-separated value per attribute, each in (0, 1).
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    tie_eps: Option<f64>,
    #[arg(long)]
    split_ratio: Option<f64>,
    /// Use a plain random split instead of a stratified one.
    #[arg(long)]
    no_stratify: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    drop_attributes: Option<usize>,
    #[arg(long)]
    drop_instances: Option<usize>,
    /// Also write dendrogram.nwk.
    #[arg(long)]
    newick: bool,
}

impl RunArgs {
    fn apply(self, cfg: &mut RunConfig) -> Result<(), Error> {
        if let Some(v) = self.input {
            cfg.input = v;
        }
        if self.header {
            cfg.has_header = true;
        }
        if self.label_column.is_some() {
            cfg.label_column = self.label_column;
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v.parse::<AlphaSpec>()?;
        }
        if let Some(v) = self.tie_eps {
            cfg.tie_eps = v;
        }
        if let Some(v) = self.split_ratio {
            cfg.split_ratio = v;
        }
        if self.no_stratify {
            cfg.stratify = false;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.bins {
            cfg.bins = v;
        }
        if let Some(v) = self.out {
            cfg.out = v;
        }
        if let Some(v) = self.drop_attributes {
            cfg.drop_attributes = v;
        }
        if let Some(v) = self.drop_instances {
            cfg.drop_instances = v;
        }
        if self.newick {
            cfg.newick = true;
        }
        Ok(())
    }
}

/// Reads a config file: run settings at top level, an optional `[grid]`
/// table for sweeps.
fn load_config_file(path: &PathBuf) -> Result<(RunConfig, Option<SweepGrid>), Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.clone(),
        source,
    })?;
    let bad =
        |e: toml::de::Error| Error::InvalidArgument(format!("{}: {}", path.display(), e.message()));
    let mut table: toml::Table = toml::from_str(&text).map_err(bad)?;
    let grid = match table.remove("grid") {
        Some(g) => Some(g.try_into::<SweepGrid>().map_err(bad)?),
        None => None,
    };
    let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(bad)?;
    Ok((cfg, grid))
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    code: i32,
    message: String,
}

fn fail(kind: ErrorKind, message: String) -> ExitCode {
    let code = kind.exit_code();
    let line = ErrorLine {
        error: ErrorBody {
            kind: kind.as_str(),
            code,
            message,
        },
    };
    eprintln!(
        "{}",
        serde_json::to_string(&line).unwrap_or_else(|_| format!("error: {}", line.error.message))
    );
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> Result<(), Error> {
    let (mut cfg, file_grid) = match &cli.config {
        Some(path) => load_config_file(path)?,
        None => (RunConfig::default(), None),
    };
    match cli.command {
        Command::Cluster(args) => {
            args.apply(&mut cfg)?;
            let outcome = pipeline::run_cluster(&cfg)?;
            println!(
                "clustered {} instances into {} clusters ({} merges); wrote {}",
                outcome.dendrogram.n_leaves,
                outcome.partition.k,
                outcome.dendrogram.records.len(),
                cfg.out.display()
            );
        }
        Command::Eval(args) => {
            args.apply(&mut cfg)?;
            let report = pipeline::run_eval(&cfg)?;
            for note in &report.notes {
                eprintln!("note: {note}");
            }
            let w = &report.evaluation.weighted;
            println!("K\tRate TP\tRate FP\tPrecision\tRecall");
            println!(
                "{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
                report.k, w.tp_rate, w.fp_rate, w.precision, w.recall
            );
        }
        Command::Sweep { run, grid } => {
            run.apply(&mut cfg)?;
            let grid = match grid {
                Some(g) => g.parse::<SweepGrid>()?,
                None => file_grid.unwrap_or_default(),
            };
            let summary = pipeline::run_sweep(&cfg, &grid)?;
            println!("cell\tRate TP\tRate FP\tPrecision\tRecall");
            for row in &summary.rows {
                match &row.result {
                    Ok(w) => println!(
                        "{}\t{:.3}\t{:.3}\t{:.3}\t{:.3}",
                        row.cell, w.tp_rate, w.fp_rate, w.precision, w.recall
                    ),
                    Err(e) => println!("{}\terror: {e}", row.cell),
                }
            }
            if summary.n_failed() > 0 {
                eprintln!(
                    "{} of {} cells failed",
                    summary.n_failed(),
                    summary.rows.len()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            return fail(
                ErrorKind::Validation,
                first.trim_start_matches("error: ").to_owned(),
            );
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string()),
    }
}
