//! Command-line front end. Every number it writes comes from the library;
//! this module only parses arguments, schedules work and writes files.

pub mod output;

use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    bound_report_for_graph, build_hypergraph, class_distance_stats, compute_bound_report, extract_strategy,
    pairwise_from_graph, solve_graph, BoundConfig, BoundReport, CaroWeiWeights, SolveOptions,
};
use crate::data::{gen_gaussian, load_csv, load_idx, CsvSchema, GaussianConfig, LabeledDataset, Normalization};
use crate::error::{Error, Result};
use crate::hypergraph::{build_conflict_graph, ConflictHypergraph, HypergraphJson};
use crate::lp::Tolerances;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "OPTLOSS_OUT";

#[derive(Debug, Parser)]
#[command(name = "optloss", version, about = "Optimal adversarial 0-1 loss and its bounds")]
pub struct Cli {
    /// Worker threads for parallel stages (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = ".")]
    pub out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the planar Gaussian-mixture dataset.
    GenGaussian(GaussianArgs),
    /// Enumerate the conflict hypergraph and write it as JSON.
    Build(BuildArgs),
    /// Compute the bound chain for each ε.
    Bound(BoundArgs),
    /// One-versus-one optimal losses for each ε.
    Pairwise(SweepArgs),
    /// Optimal adversarial strategy and per-vertex q.
    Strategy(StrategyArgs),
    /// Per-class mean distance to the nearest other-class point.
    Stats(DataArgs),
}

#[derive(Debug, Args)]
pub struct GaussianArgs {
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 1000)]
    pub per_class: usize,
    #[arg(long, default_value_t = 0.05)]
    pub variance: f64,
    #[arg(long, default_value_t = 3.0)]
    pub mean_radius: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizeArg {
    None,
    DivideBy255,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Dataset: `.json` export, numeric CSV, or IDX images (with `--labels`).
    #[arg(long)]
    pub data: PathBuf,
    /// IDX label file paired with IDX images in `--data`.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// CSV has a header row.
    #[arg(long)]
    pub csv_header: bool,
    #[arg(long, value_enum, default_value_t = NormalizeArg::None)]
    pub normalize: NormalizeArg,
    /// Keep only these class names, e.g. `1,4,7`.
    #[arg(long, value_delimiter = ',')]
    pub classes: Vec<String>,
    /// Keep the first N points of each kept class.
    #[arg(long)]
    pub per_class: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Budgets, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub epsilon: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_gap: f64,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value_t = 3)]
    pub max_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    LStar2,
    Ones,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value_t = 3)]
    pub max_degree: usize,
    /// Drop LP rows contained in larger rows.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub dedupe: bool,
    /// Brute-force the hard loss up to this many vertices (0 disables).
    #[arg(long, default_value_t = 30)]
    pub hard_cap: usize,
    /// Caro-Wei vertex weights.
    #[arg(long, value_enum, default_value_t = WeightsArg::LStar2)]
    pub caro_wei_weights: WeightsArg,
    /// File with one weight per vertex; overrides `--caro-wei-weights`.
    #[arg(long)]
    pub caro_wei_weights_file: Option<PathBuf>,
    /// Reuse a hypergraph written by `build` (one per ε, matched by ε).
    #[arg(long)]
    pub hypergraph: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StrategyArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value_t = 3)]
    pub max_degree: usize,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub dedupe: bool,
}

/// Loads and subsets the dataset described by `args`.
pub fn load_dataset(args: &DataArgs) -> Result<LabeledDataset> {
    let norm = match args.normalize {
        NormalizeArg::None => Normalization::None,
        NormalizeArg::DivideBy255 => Normalization::DivideBy255,
    };
    let d = if let Some(labels) = &args.labels {
        load_idx(&args.data, labels, norm)?
    } else if args.data.extension().is_some_and(|e| e == "json") {
        LabeledDataset::read_json(&args.data)?
    } else {
        let schema = CsvSchema {
            has_header: args.csv_header,
            ..CsvSchema::default()
        };
        load_csv(&args.data, &schema, norm)?
    };
    if args.classes.is_empty() && args.per_class.is_none() {
        return Ok(d);
    }
    let names: Vec<&str> = if args.classes.is_empty() {
        d.class_names().iter().map(String::as_str).collect()
    } else {
        args.classes.iter().map(String::as_str).collect()
    };
    d.subset(&names, args.per_class)
}

/// Validates a budget list: nonempty, finite, nonnegative. Returns it sorted
/// with duplicates removed.
pub fn epsilons(list: &[f64]) -> Result<Vec<f64>> {
    if list.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon list".into()));
    }
    if let Some(e) = list.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {e} must be a finite nonnegative number"
        )));
    }
    let mut v = list.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

fn tolerances(tol_gap: f64) -> Result<Tolerances> {
    if !(tol_gap > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "--tol-gap must be positive, got {tol_gap}"
        )));
    }
    Ok(Tolerances {
        gap_rel: tol_gap,
        ..Tolerances::default()
    })
}

fn check_degree(m: usize, d: &LabeledDataset) -> Result<()> {
    if m < 2 || m > d.num_classes().max(2) {
        return Err(Error::InvalidArgument(format!(
            "--max-degree {m} must lie in [2, {}]",
            d.num_classes().max(2)
        )));
    }
    Ok(())
}

/// File-name tag for a budget, e.g. `eps2.5`.
pub fn eps_tag(e: f64) -> String {
    format!("eps{e}")
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Json => "json",
        Format::Csv => "csv",
    }
}

/// Runs one parsed command and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<Vec<PathBuf>> {
    let out = &cli.out;
    let mut written = Vec::new();
    let mut emit = |name: String, bytes: Vec<u8>| -> Result<()> {
        let p = out.join(name);
        output::write_atomic(&p, &bytes)?;
        written.push(p);
        Ok(())
    };
    match &cli.command {
        Command::GenGaussian(a) => {
            let d = gen_gaussian(&GaussianConfig {
                num_classes: a.classes,
                per_class: a.per_class,
                variance: a.variance,
                mean_radius: a.mean_radius,
                seed: a.seed,
            })?;
            let bytes = match cli.format {
                Format::Json => d.to_json()?.into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    crate::data::write_csv(&d, &mut buf)?;
                    buf
                }
            };
            emit(format!("gaussian.{}", ext(cli.format)), bytes)?;
        }
        Command::Build(a) => {
            let d = load_dataset(&a.sweep.data)?;
            check_degree(a.max_degree, &d)?;
            let eps = epsilons(&a.sweep.epsilon)?;
            let graphs: Vec<Result<ConflictHypergraph>> =
                eps.par_iter().map(|&e| build_hypergraph(&d, e, a.max_degree)).collect();
            for (e, g) in eps.iter().zip(graphs) {
                let g = g?;
                emit(
                    format!("hypergraph_{}.json", eps_tag(*e)),
                    HypergraphJson::to_json(&g)?.into_bytes(),
                )?;
            }
        }
        Command::Bound(a) => {
            let reports = cmd_bound(a)?;
            match cli.format {
                Format::Json => emit("bound_report.json".into(), output::to_json_pretty(&reports)?)?,
                Format::Csv => {
                    emit("bound_report.csv".into(), output::bound_csv(&reports)?)?;
                    emit("q_histogram.csv".into(), output::histogram_csv(&reports)?)?;
                }
            }
        }
        Command::Pairwise(a) => {
            let d = load_dataset(&a.data)?;
            let tol = tolerances(a.tol_gap)?;
            let eps = epsilons(&a.epsilon)?;
            let mats: Vec<Result<_>> = eps
                .par_iter()
                .map(|&e| pairwise_from_graph(&d, &build_conflict_graph(&d, e)?, &tol))
                .collect();
            for (e, m) in eps.iter().zip(mats) {
                let m = m?;
                let bytes = match cli.format {
                    Format::Json => output::to_json_pretty(&m)?,
                    Format::Csv => output::pairwise_csv(&m)?,
                };
                emit(format!("pairwise_{}.{}", eps_tag(*e), ext(cli.format)), bytes)?;
            }
        }
        Command::Strategy(a) => {
            let d = load_dataset(&a.sweep.data)?;
            check_degree(a.max_degree, &d)?;
            let opts = SolveOptions {
                tolerances: tolerances(a.sweep.tol_gap)?,
                dedupe_dominated: a.dedupe,
            };
            for e in epsilons(&a.sweep.epsilon)? {
                let g = build_hypergraph(&d, e, a.max_degree)?;
                let (lp, sol) = solve_graph(&g, &opts)?;
                let s = extract_strategy(&lp, &sol, &d, opts.tolerances.feasibility_abs)?;
                let doc = StrategyDocument {
                    epsilon: e,
                    max_degree: a.max_degree,
                    loss: sol.loss(),
                    over_covered: s.num_over_covered(),
                    strategy: &s,
                };
                emit(format!("strategy_{}.json", eps_tag(e)), output::to_json_pretty(&doc)?)?;
                let bytes = match cli.format {
                    Format::Csv => output::q_csv(d.labels(), d.masses(), &sol.q)?,
                    Format::Json => output::to_json_pretty(&QDocument { epsilon: e, q: &sol.q })?,
                };
                emit(format!("q_{}.{}", eps_tag(e), ext(cli.format)), bytes)?;
            }
        }
        Command::Stats(a) => {
            let d = load_dataset(a)?;
            let s = class_distance_stats(&d)?;
            let bytes = match cli.format {
                Format::Json => output::to_json_pretty(&s)?,
                Format::Csv => output::stats_csv(&s)?,
            };
            emit(format!("class_stats.{}", ext(cli.format)), bytes)?;
        }
    }
    Ok(written)
}

#[derive(Serialize)]
struct StrategyDocument<'a> {
    epsilon: f64,
    max_degree: usize,
    loss: f64,
    over_covered: usize,
    strategy: &'a crate::bounds::AdversarialStrategy,
}

#[derive(Serialize)]
struct QDocument<'a> {
    epsilon: f64,
    q: &'a [f64],
}

/// Bound reports for every ε of a `bound` invocation, in increasing ε.
pub fn cmd_bound(a: &BoundArgs) -> Result<Vec<BoundReport>> {
    let d = load_dataset(&a.sweep.data)?;
    check_degree(a.max_degree, &d)?;
    let weights = match &a.caro_wei_weights_file {
        Some(p) => CaroWeiWeights::Custom(read_weights(p)?),
        None => match a.caro_wei_weights {
            WeightsArg::LStar2 => CaroWeiWeights::LStar2,
            WeightsArg::Ones => CaroWeiWeights::Ones,
        },
    };
    let cfg = BoundConfig {
        max_degree: a.max_degree,
        solve: SolveOptions {
            tolerances: tolerances(a.sweep.tol_gap)?,
            dedupe_dominated: a.dedupe,
        },
        hard_cap: (a.hard_cap > 0).then_some(a.hard_cap),
        caro_wei_weights: weights,
    };
    let eps = epsilons(&a.sweep.epsilon)?;
    let mut graphs = Vec::new();
    for p in &a.hypergraph {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        graphs.push(HypergraphJson::from_json(&text)?);
    }
    eps.par_iter()
        .map(|&e| match graphs.iter().find(|g| g.epsilon() == e) {
            Some(g) => bound_report_for_graph(&d, g, &cfg),
            None => compute_bound_report(&d, e, &cfg),
        })
        .collect()
}

fn read_weights(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(i, t)| {
            t.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("weight {t:?} is not a number"),
            })
        })
        .collect()
}

/// Machine-readable error document written to standard error.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": { "kind": err.kind(), "message": err.to_string() } }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_validation() {
        assert!(epsilons(&[]).is_err());
        assert!(epsilons(&[-1.0]).is_err());
        assert!(epsilons(&[f64::NAN]).is_err());
        assert_eq!(epsilons(&[2.0, 1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn empty_epsilon_is_usage_error() {
        let r = Cli::try_parse_from(["optloss", "bound", "--data", "x.csv"]);
        assert!(r.is_err());
        let r = Cli::try_parse_from([
            "optloss",
            "bound",
            "--data",
            "x.csv",
            "--epsilon",
            "1,2.5",
            "--dedupe",
            "false",
        ]);
        let cli = r.unwrap();
        match cli.command {
            Command::Bound(b) => {
                assert_eq!(b.sweep.epsilon, vec![1.0, 2.5]);
                assert!(!b.dedupe);
            }
            _ => panic!(),
        }
    }
}
