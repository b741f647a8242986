//! Command-line front end. Exit codes: 0 success, 2 invalid input,
//! 3 numerical failure, 4 capability limit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use graphcov::ar::{
    ar_power_spectrum, build_ar_model, build_ar_scheme, estimate_ar, generate_ar_signals,
    max_degree_node, ArCovariances, ArParams,
};
use graphcov::design::{
    check_valid, greedy_design, is_sparse_ruler, minimal_sparse_ruler,
    minimal_sparse_ruler_with_limit, smallest_valid_greedy, Design, DesignCost, DesignProblem,
    RulerSet, RULER_SEARCH_LIMIT,
};
use graphcov::estimators::{ls_estimate, nnls_estimate, wls_estimate, EstimationResult, Method};
use graphcov::experiment::{make_shift, run_nmse, write_nmse_csv, ExperimentConfig, ShiftChoice};
use graphcov::graph::{generators, Graph, GraphFilter, ShiftOperator};
use graphcov::io::{self, DesignReport, EstimationReport};
use graphcov::linalg::vec_col_major;
use graphcov::models::{
    build_psi_ma, build_psi_spectral, compress_model, default_ma_order, MaParams, Psi, Subsampler,
};
use graphcov::stationary::{generate_signals, sample_covariance, SnapshotMatrix};
use graphcov::{Error, Result};

#[derive(Parser)]
#[command(
    name = "graphcov",
    version,
    about = "Graph covariance subsampling and power spectrum estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Graph generation.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Sampler design and sparse rulers.
    #[command(subcommand)]
    Sampler(SamplerCmd),
    /// Signal generation.
    #[command(subcommand)]
    Signal(SignalCmd),
    /// Estimate model parameters from snapshots.
    Estimate(EstimateArgs),
    /// Monte-Carlo experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Write a graph JSON file.
    Gen(GraphGenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKindArg {
    Sensor,
    Cycle,
    Mobius,
    Path,
    Star,
    Complete,
}

#[derive(Args)]
struct GraphGenArgs {
    #[arg(long, value_enum)]
    kind: GraphKindArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Neighbour count of the sensor graph.
    #[arg(long, default_value_t = generators::SENSOR_DEFAULT_K)]
    k: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SamplerCmd {
    /// Design a sampler greedily or from a minimal sparse ruler.
    Design(DesignArgs),
    /// Compute a minimal sparse ruler or check a given mark set.
    Ruler(RulerArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Spectral,
    Ma,
    Ar,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShiftArg {
    Laplacian,
    Adjacency,
    CirculantDft,
}

impl From<ShiftArg> for ShiftChoice {
    fn from(s: ShiftArg) -> Self {
        match s {
            ShiftArg::Laplacian => ShiftChoice::Laplacian,
            ShiftArg::Adjacency => ShiftChoice::Adjacency,
            ShiftArg::CirculantDft => ShiftChoice::CirculantDft,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CostArg {
    Logdet,
    FramePotential,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RulerArg {
    Minimal,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "spectral")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "laplacian")]
    shift: ShiftArg,
    /// MA order.
    #[arg(long)]
    q: Option<usize>,
    /// Node budget.
    #[arg(long)]
    k: Option<usize>,
    /// Use the smallest budget whose greedy design is valid.
    #[arg(long)]
    smallest_valid: bool,
    #[arg(long, value_enum, default_value = "logdet")]
    cost: CostArg,
    /// Diagonal loading; scale-relative default when absent.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Sparse-ruler sampler instead of greedy design.
    #[arg(long, value_enum)]
    ruler: Option<RulerArg>,
    /// Node count for `--ruler` without a graph.
    #[arg(long)]
    n: Option<usize>,
    /// Sampler JSON output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Design report JSON output.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct RulerArgs {
    #[arg(long)]
    n: usize,
    /// Comma-separated marks to check instead of searching.
    #[arg(long, value_delimiter = ',')]
    check: Option<Vec<usize>>,
    /// Largest N the exhaustive search accepts.
    #[arg(long, default_value_t = RULER_SEARCH_LIMIT)]
    limit: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SignalCmd {
    /// Write snapshots as CSV.
    Gen(SignalGenArgs),
}

#[derive(Args)]
struct SignalGenArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "laplacian")]
    shift: ShiftArg,
    /// Filter coefficients `h`, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "1,0.5"
    )]
    filter: Vec<f64>,
    /// AR coefficients; generates AR data instead of filtered noise.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ar: Option<Vec<f64>>,
    #[arg(long)]
    n_snapshots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep only the sampler's nodes.
    #[arg(long)]
    sampler: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "laplacian")]
    shift: ShiftArg,
    #[arg(long)]
    snapshots: PathBuf,
    /// Sampler JSON (spectral and MA); all snapshot nodes when absent.
    #[arg(long)]
    sampler: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "spectral")]
    model: ModelArg,
    #[arg(long, default_value = "ls")]
    method: Method,
    /// MA order; `min(2L − 1, N)` from `--filter-len` when absent.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 2)]
    filter_len: usize,
    /// AR order.
    #[arg(long, default_value_t = 1)]
    p: usize,
    /// AR core nodes; the max-degree node when absent.
    #[arg(long, value_delimiter = ',')]
    core: Option<Vec<usize>>,
    /// Subtract each node's sample mean before estimating.
    #[arg(long)]
    demean: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Run an NMSE study from a JSON config and write CSV.
    Nmse(NmseArgs),
}

#[derive(Args)]
struct NmseArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's output path; stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_string(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> Result<Graph> {
    io::graph_from_json(&io::read_to_string(path)?)
}

fn load_shift(path: &Path, shift: ShiftArg) -> Result<ShiftOperator> {
    make_shift(&load_graph(path)?, shift.into())
}

fn graph_gen(args: &GraphGenArgs) -> Result<()> {
    let g = match args.kind {
        GraphKindArg::Sensor => generators::sensor(args.n, args.k, args.seed)?,
        GraphKindArg::Cycle => generators::cycle(args.n)?,
        GraphKindArg::Mobius => generators::mobius_ladder(args.n)?,
        GraphKindArg::Path => generators::path(args.n)?,
        GraphKindArg::Star => generators::star(args.n)?,
        GraphKindArg::Complete => generators::complete(args.n)?,
    };
    emit(args.out.as_deref(), &io::graph_to_json(&g))
}

fn design_psi(shift: &ShiftOperator, model: ModelArg, q: Option<usize>) -> Result<Psi> {
    match model {
        ModelArg::Spectral => Ok(build_psi_spectral(shift.basis()?)),
        ModelArg::Ma => {
            let q = q.ok_or_else(|| Error::InvalidInput("--model ma needs --q".into()))?;
            build_psi_ma(shift, q)
        }
        ModelArg::Ar => Err(Error::InvalidInput(
            "AR samplers follow the neighborhood scheme; use `estimate --model ar --core`".into(),
        )),
    }
}

fn sampler_design(args: &DesignArgs) -> Result<()> {
    let (sampler, report) = if args.ruler == Some(RulerArg::Minimal) {
        let (n, psi) = match &args.graph {
            Some(path) => {
                let shift = load_shift(path, args.shift)?;
                (
                    shift.n_nodes(),
                    Some(design_psi(&shift, args.model, args.q)?),
                )
            }
            None => (
                args.n
                    .ok_or_else(|| Error::InvalidInput("--ruler needs --n or --graph".into()))?,
                None,
            ),
        };
        let ruler = minimal_sparse_ruler(n)?;
        let sampler = ruler.to_sampler(n)?;
        let report = match psi {
            Some(psi) => {
                let v = check_valid(&psi, &sampler)?;
                json!({"selected": sampler.selected(), "objective_trace": [],
                       "valid": v.valid, "min_singular": v.min_singular})
            }
            None => json!({"selected": sampler.selected(), "objective_trace": [],
                           "valid": is_sparse_ruler(&ruler, n), "min_singular": null}),
        };
        (sampler, report)
    } else {
        let path = args
            .graph
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("greedy design needs --graph".into()))?;
        let shift = load_shift(path, args.shift)?;
        let psi = design_psi(&shift, args.model, args.q)?;
        let (design, validity): (Design, _) = if args.smallest_valid {
            smallest_valid_greedy(&psi)?
        } else {
            let k = args.k.ok_or_else(|| {
                Error::InvalidInput("greedy design needs --k or --smallest-valid".into())
            })?;
            let mut problem = DesignProblem::new(&psi, k).with_cost(match args.cost {
                CostArg::Logdet => DesignCost::LogDet,
                CostArg::FramePotential => DesignCost::FramePotential,
            });
            if let Some(eps) = args.epsilon {
                problem = problem.with_epsilon(eps);
            }
            let design = greedy_design(&problem)?;
            let validity = check_valid(&psi, &design.sampler)?;
            (design, validity)
        };
        if !validity.feasible {
            eprintln!(
                "warning: K² = {} < {} parameters; no sampler of this size is valid",
                design.sampler.k() * design.sampler.k(),
                psi.n_params()
            );
        } else if !validity.valid {
            eprintln!(
                "warning: designed sampler is not valid (rank {})",
                validity.rank
            );
        }
        let report = serde_json::to_value(DesignReport::new(&design, &validity))?;
        (design.sampler, report)
    };
    if let Some(path) = &args.report {
        io::write_string(path, &serde_json::to_string_pretty(&report)?)?;
    } else {
        eprintln!("{}", serde_json::to_string(&report)?);
    }
    emit(args.out.as_deref(), &io::sampler_to_json(&sampler))
}

fn sampler_ruler(args: &RulerArgs) -> Result<()> {
    let ruler = match &args.check {
        Some(marks) => RulerSet::new(marks.clone()),
        None => minimal_sparse_ruler_with_limit(args.n, args.limit)?,
    };
    let doc = json!({
        "n": args.n,
        "marks": ruler.marks(),
        "size": ruler.len(),
        "is_sparse_ruler": is_sparse_ruler(&ruler, args.n),
        "compression": 1.0 - ruler.len() as f64 / args.n as f64,
        "compression_rate": ruler.len() as f64 / args.n as f64,
    });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&doc)?)
}

fn signal_gen(args: &SignalGenArgs) -> Result<()> {
    let shift = load_shift(&args.graph, args.shift)?;
    let x = match &args.ar {
        Some(a) => {
            generate_ar_signals(
                &shift,
                &ArParams::from_slice(a)?,
                args.n_snapshots,
                args.seed,
            )?
            .x
        }
        None => generate_signals(
            &shift,
            &GraphFilter::new(args.filter.clone())?,
            args.n_snapshots,
            args.seed,
        )?,
    };
    let mut snaps = SnapshotMatrix::full(x)?;
    if let Some(path) = &args.sampler {
        let sampler = io::sampler_from_json(&io::read_to_string(path)?)?;
        if sampler.n_nodes() != shift.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: shift.n_nodes(),
                got: sampler.n_nodes(),
            });
        }
        snaps = snaps.subsample(&sampler)?;
    }
    match &args.out {
        Some(p) => io::write_snapshots_csv(&snaps, std::fs::File::create(p)?),
        None => io::write_snapshots_csv(&snaps, std::io::stdout().lock()),
    }
}

fn run_estimator(
    model: &graphcov::models::ObservationModel,
    snaps: &SnapshotMatrix,
    method: Method,
) -> Result<EstimationResult> {
    let r = sample_covariance(snaps);
    let r_hat = vec_col_major(r.matrix());
    match method {
        Method::Ls => ls_estimate(model, &r_hat),
        Method::Nnls => nnls_estimate(model, &r_hat),
        Method::Wls => wls_estimate(model, &r_hat, &r),
    }
}

fn estimate(args: &EstimateArgs) -> Result<()> {
    let shift = load_shift(&args.graph, args.shift)?;
    let n = shift.n_nodes();
    let mut snaps = io::read_snapshots_csv(std::fs::File::open(&args.snapshots)?)?;
    if args.demean {
        snaps = snaps.demeaned();
    }
    if let Some(&bad) = snaps.node_indices().iter().find(|&&i| i >= n) {
        return Err(Error::InvalidInput(format!(
            "snapshot node {bad} is not in the graph"
        )));
    }
    let report = match args.model {
        ModelArg::Spectral | ModelArg::Ma => {
            let sampler = match &args.sampler {
                Some(p) => io::sampler_from_json(&io::read_to_string(p)?)?,
                None => Subsampler::new(n, snaps.node_indices().to_vec())?,
            };
            if sampler.n_nodes() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: sampler.n_nodes(),
                });
            }
            let observed = snaps.subsample(&sampler).map_err(|_| {
                Error::InvalidInput("sampler nodes are not all present in the snapshot file".into())
            })?;
            let psi = match args.model {
                ModelArg::Spectral => build_psi_spectral(shift.basis()?),
                _ => build_psi_ma(
                    &shift,
                    args.q.unwrap_or(default_ma_order(args.filter_len, n)),
                )?,
            };
            let model = compress_model(&psi, &sampler)?;
            let result = run_estimator(&model, &observed, args.method)?;
            let p = match args.model {
                ModelArg::Spectral => result.theta.clone(),
                _ => MaParams::new(result.theta.clone())?.spectrum(shift.basis()?.eigvals()),
            };
            EstimationReport::new(&result, p.as_slice())
        }
        ModelArg::Ar => {
            if args.method != Method::Ls {
                return Err(Error::InvalidInput(
                    "the AR model supports only --method ls".into(),
                ));
            }
            let core = args
                .core
                .clone()
                .unwrap_or_else(|| vec![max_degree_node(&shift)]);
            let scheme = build_ar_scheme(&shift, &core, args.p)?;
            let nodes = scheme.distinct_nodes();
            let observed = snaps.select_nodes(&nodes).map_err(|_| {
                Error::InvalidInput("snapshot file lacks nodes required by the AR scheme".into())
            })?;
            let r = sample_covariance(&observed).matrix().map(|z| z.re);
            let cov = ArCovariances::from_covariance(&r, &nodes, &scheme)?;
            let system = build_ar_model(&shift, &scheme, &cov)?;
            let fit = estimate_ar(&system.model, &system.target)?;
            let p = ar_power_spectrum(shift.basis()?.eigvals(), &fit.params)?;
            let result = EstimationResult {
                theta: fit.params.a().clone(),
                residual_norm: fit.residual_norm,
                method: Method::Ls,
                condition_number: fit.condition_number,
            };
            EstimationReport::new(&result, p.values().as_slice())
        }
    };
    emit(args.out.as_deref(), &io::to_json_pretty(&report)?)
}

fn experiment_nmse(args: &NmseArgs) -> Result<()> {
    let cfg = ExperimentConfig::from_json(&io::read_to_string(&args.config)?)?;
    let result = run_nmse(&cfg)?;
    for row in result.rows.iter().filter(|r| r.failures > 0) {
        eprintln!(
            "warning: {} of {} trials failed (sampler {}, method {}, N_s = {})",
            row.failures,
            row.trials,
            row.sampler,
            row.method.as_str(),
            row.n_snapshots
        );
    }
    let out = args.out.clone().or(cfg.output.as_ref().map(PathBuf::from));
    match out {
        Some(p) => write_nmse_csv(&result.rows, std::fs::File::create(p)?),
        None => write_nmse_csv(&result.rows, std::io::stdout().lock()),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Graph(GraphCmd::Gen(a)) => graph_gen(&a),
        Command::Sampler(SamplerCmd::Design(a)) => sampler_design(&a),
        Command::Sampler(SamplerCmd::Ruler(a)) => sampler_ruler(&a),
        Command::Signal(SignalCmd::Gen(a)) => signal_gen(&a),
        Command::Estimate(a) => estimate(&a),
        Command::Experiment(ExperimentCmd::Nmse(a)) => experiment_nmse(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
