//! Monte-Carlo NMSE harness.
//!
//! Every `(N_s, trial)` pair draws one realization from a seed that depends
//! only on the master seed and the pair, so all samplers and methods in a
//! trial see the same data. Trials run on a rayon pool (capped by
//! `GRAPHCOV_THREADS`) and results are reduced in trial order, which makes
//! the output independent of scheduling.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ar::{
    ar_true_covariance, build_ar_model, build_ar_scheme, estimate_ar, estimate_ar_uncompressed,
    generate_ar_signals, max_degree_node, ArCovariances, ArParams, ArScheme,
};
use crate::design::{greedy_design, minimal_sparse_ruler, smallest_valid_greedy, DesignProblem};
use crate::error::{Error, Result};
use crate::estimators::{
    crb, crb_db, fisher_info, ls_estimate, nmse_from_sums, nnls_estimate, wls_estimate, Method,
    NmseNorm, NU_REAL,
};
use crate::graph::{build_shift, generators, Graph, GraphFilter, ShiftKind, ShiftOperator};
use crate::io;
use crate::linalg::{vec_col_major, C64};
use crate::models::{
    build_psi_ma, build_psi_spectral, compress_model, ma_b_from_h, ObservationModel, Psi,
    Subsampler,
};
use crate::stationary::{
    generate_signals, power_spectrum_from_cov, sample_covariance_of, true_covariance,
    CovarianceMatrix,
};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "GRAPHCOV_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Sensor,
    Cycle,
    Mobius,
    Path,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub kind: GraphKind,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    /// Neighbour count of the sensor graph.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub path: Option<String>,
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph> {
        match self.kind {
            GraphKind::Sensor => generators::sensor(
                self.n,
                self.k.unwrap_or(generators::SENSOR_DEFAULT_K),
                self.seed,
            ),
            GraphKind::Cycle => generators::cycle(self.n),
            GraphKind::Mobius => generators::mobius_ladder(self.n),
            GraphKind::Path => generators::path(self.n),
            GraphKind::File => {
                let path = self
                    .path
                    .as_deref()
                    .ok_or_else(|| Error::invalid("graph kind 'file' needs a path"))?;
                io::graph_from_json(&io::read_to_string(path.as_ref())?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShiftChoice {
    #[default]
    Laplacian,
    Adjacency,
    /// Adjacency of a circulant graph with the DFT basis.
    CirculantDft,
}

pub fn make_shift(graph: &Graph, choice: ShiftChoice) -> Result<ShiftOperator> {
    match choice {
        ShiftChoice::Laplacian => build_shift(graph, ShiftKind::Laplacian),
        ShiftChoice::Adjacency => build_shift(graph, ShiftKind::Adjacency),
        ShiftChoice::CirculantDft => ShiftOperator::circulant_adjacency(graph),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Spectral,
    Ma { q: Option<usize> },
    Ar { a: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    /// Every node (no compression).
    Full,
    Greedy {
        k: usize,
    },
    /// Greedy design with the smallest valid budget.
    SmallestValid,
    /// Minimal sparse ruler of length `N − 1`.
    Ruler,
    Explicit {
        selected: Vec<usize>,
    },
    /// AR neighborhood scheme; the max-degree node when `core` is absent.
    ArCore {
        core: Option<Vec<usize>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub shift: ShiftChoice,
    /// Graph filter coefficients `h` generating the data (spectral and MA).
    #[serde(default = "default_filter")]
    pub filter: Vec<f64>,
    pub model: ModelSpec,
    pub samplers: Vec<SamplerSpec>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    pub n_snapshots: Vec<usize>,
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Estimate from true covariances instead of sample covariances.
    #[serde(default)]
    pub exact_covariance: bool,
    #[serde(default)]
    pub nmse_norm: NmseNormSpec,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmseNormSpec {
    #[default]
    Printed,
    Squared,
}

impl From<NmseNormSpec> for NmseNorm {
    fn from(s: NmseNormSpec) -> Self {
        match s {
            NmseNormSpec::Printed => NmseNorm::Printed,
            NmseNormSpec::Squared => NmseNorm::Squared,
        }
    }
}

fn default_filter() -> Vec<f64> {
    vec![1.0, 0.5]
}

fn default_methods() -> Vec<Method> {
    vec![Method::Ls]
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_snapshots.is_empty() {
            return Err(Error::invalid("snapshot grid must not be empty"));
        }
        if self.n_snapshots.contains(&0) {
            return Err(Error::invalid("snapshot counts must be >= 1"));
        }
        if self.n_trials == 0 {
            return Err(Error::invalid("n_trials must be >= 1"));
        }
        if self.samplers.is_empty() {
            return Err(Error::invalid("at least one sampler is required"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("at least one method is required"));
        }
        if let ModelSpec::Ar { a } = &self.model {
            if a.is_empty() {
                return Err(Error::invalid("AR model needs coefficients"));
            }
            if self.methods.iter().any(|&m| m != Method::Ls) {
                return Err(Error::invalid("the AR model supports only the ls method"));
            }
        }
        if let Some(path) = &self.graph.path {
            if self.graph.kind == GraphKind::File && !std::path::Path::new(path).exists() {
                return Err(Error::invalid(format!(
                    "graph file '{path}' does not exist"
                )));
            }
        }
        GraphFilter::new(self.filter.clone())?;
        Ok(())
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct NmseRow {
    pub n_snapshots: usize,
    pub method: Method,
    pub compression: f64,
    pub nmse_db: f64,
    pub crb_db: Option<f64>,
    /// Sampler position in the config.
    pub sampler: usize,
    pub trials: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<NmseRow>,
}

impl ExperimentResult {
    pub fn total_failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at snapshot-grid position `ns_index`.
pub fn trial_seed(master: u64, ns_index: usize, trial: usize) -> u64 {
    mix(mix(mix(master) ^ ns_index as u64) ^ trial as u64)
}

/// Rayon pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("{THREADS_ENV} must be a positive integer")))?;
        if n == 0 {
            return Err(Error::invalid(format!("{THREADS_ENV} must be >= 1")));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::Capability(format!("cannot start worker pool: {e}")))
}

/// A sampler resolved to its model for the spectral and MA families.
struct LinearCell {
    sampler: Subsampler,
    model: Option<ObservationModel>,
    true_r_y: CovarianceMatrix,
}

enum ArCell {
    Full,
    Scheme(ArScheme),
}

/// Runs the experiment described by `config`.
pub fn run_nmse(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let graph = config.graph.build()?;
    let shift = make_shift(&graph, config.shift)?;
    let pool = thread_pool()?;
    pool.install(|| match &config.model {
        ModelSpec::Ar { a } => run_ar(config, &shift, &ArParams::from_slice(a)?),
        _ => run_linear(config, &shift),
    })
}

fn resolve_sampler(spec: &SamplerSpec, psi: &Psi) -> Result<Subsampler> {
    let n = psi.n_nodes();
    match spec {
        SamplerSpec::Full => Subsampler::all(n),
        SamplerSpec::Greedy { k } => Ok(greedy_design(&DesignProblem::new(psi, *k))?.sampler),
        SamplerSpec::SmallestValid => Ok(smallest_valid_greedy(psi)?.0.sampler),
        SamplerSpec::Ruler => minimal_sparse_ruler(n)?.to_sampler(n),
        SamplerSpec::Explicit { selected } => Subsampler::new(n, selected.clone()),
        SamplerSpec::ArCore { .. } => Err(Error::invalid("ar_core sampler requires the AR model")),
    }
}

fn run_linear(config: &ExperimentConfig, shift: &ShiftOperator) -> Result<ExperimentResult> {
    let filter = GraphFilter::new(config.filter.clone())?;
    let n = shift.n_nodes();
    let r_x = true_covariance(shift, &filter);
    let (psi, theta_true) = match &config.model {
        ModelSpec::Spectral => {
            let basis = shift.basis()?;
            (
                build_psi_spectral(basis),
                power_spectrum_from_cov(basis, &r_x)?.0,
            )
        }
        ModelSpec::Ma { q } => {
            let b = ma_b_from_h(&filter);
            let q = q.unwrap_or_else(|| crate::models::default_ma_order(filter.len(), n));
            (build_psi_ma(shift, q)?, b.truncated(q)?.b().clone())
        }
        ModelSpec::Ar { .. } => unreachable!("handled by run_ar"),
    };
    let norm: NmseNorm = config.nmse_norm.into();

    let cells = config
        .samplers
        .iter()
        .map(|spec| {
            let sampler = resolve_sampler(spec, &psi)?;
            let model = compress_model(&psi, &sampler)?;
            let model = model.full_column_rank().then_some(model);
            Ok(LinearCell {
                true_r_y: r_x.compress(&sampler)?,
                sampler,
                model,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (ns_index, &ns) in config.n_snapshots.iter().enumerate() {
        // errors[trial][cell][method]
        let errors: Vec<Vec<Vec<Option<f64>>>> = (0..config.n_trials)
            .into_par_iter()
            .map(|trial| {
                let seed = trial_seed(config.seed, ns_index, trial);
                let x = if config.exact_covariance {
                    None
                } else {
                    generate_signals(shift, &filter, ns, seed).ok()
                };
                cells
                    .iter()
                    .map(|cell| {
                        config
                            .methods
                            .iter()
                            .map(|&method| {
                                linear_trial(cell, x.as_ref(), method)
                                    .ok()
                                    .map(|theta| (&theta - &theta_true).norm_squared())
                                    .filter(|e| e.is_finite())
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for (ci, cell) in cells.iter().enumerate() {
            let crb_value = cell.model.as_ref().and_then(|model| {
                let f = fisher_info(model, &cell.true_r_y, ns, NU_REAL).ok()?;
                crb_db(&crb(&f), &theta_true, norm).ok()
            });
            for (mi, &method) in config.methods.iter().enumerate() {
                let mut sum = 0.0;
                let mut ok = 0;
                for trial in &errors {
                    if let Some(e) = trial[ci][mi] {
                        sum += e;
                        ok += 1;
                    }
                }
                let nmse_db = if ok > 0 {
                    nmse_from_sums(sum, ok, &theta_true, norm)?
                } else {
                    f64::NAN
                };
                rows.push(NmseRow {
                    n_snapshots: ns,
                    method,
                    compression: cell.sampler.compression(),
                    nmse_db,
                    crb_db: crb_value,
                    sampler: ci,
                    trials: config.n_trials,
                    failures: config.n_trials - ok,
                });
            }
        }
    }
    Ok(ExperimentResult { rows })
}

fn linear_trial(
    cell: &LinearCell,
    x: Option<&DMatrix<f64>>,
    method: Method,
) -> Result<DVector<f64>> {
    let model = cell
        .model
        .as_ref()
        .ok_or_else(|| Error::Singular("sampler is not valid for this model".into()))?;
    let r_y = match x {
        None => cell.true_r_y.clone(),
        Some(x) => sample_covariance_of(&x.select_rows(cell.sampler.selected())),
    };
    let r_hat: DVector<C64> = vec_col_major(r_y.matrix());
    let est = match method {
        Method::Ls => ls_estimate(model, &r_hat)?,
        Method::Nnls => nnls_estimate(model, &r_hat)?,
        Method::Wls => wls_estimate(model, &r_hat, &r_y)?,
    };
    Ok(est.theta)
}

fn run_ar(
    config: &ExperimentConfig,
    shift: &ShiftOperator,
    params: &ArParams,
) -> Result<ExperimentResult> {
    let order = params.order();
    let a_true = params.a().clone();
    let r_x = ar_true_covariance(shift, params)?;
    let norm: NmseNorm = config.nmse_norm.into();
    let cells = config
        .samplers
        .iter()
        .map(|spec| match spec {
            SamplerSpec::Full => Ok(ArCell::Full),
            SamplerSpec::ArCore { core } => {
                let core = core.clone().unwrap_or_else(|| vec![max_degree_node(shift)]);
                Ok(ArCell::Scheme(build_ar_scheme(shift, &core, order)?))
            }
            _ => Err(Error::invalid(
                "the AR model supports the full and ar_core samplers",
            )),
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (ns_index, &ns) in config.n_snapshots.iter().enumerate() {
        let errors: Vec<Vec<Option<f64>>> = (0..config.n_trials)
            .into_par_iter()
            .map(|trial| {
                let seed = trial_seed(config.seed, ns_index, trial);
                let r_hat = if config.exact_covariance {
                    Some(r_x.clone())
                } else {
                    generate_ar_signals(shift, params, ns, seed)
                        .ok()
                        .map(|s| sample_covariance_of(&s.x))
                };
                cells
                    .iter()
                    .map(|cell| {
                        let r_hat = r_hat.as_ref()?;
                        ar_trial(shift, cell, r_hat, order)
                            .ok()
                            .map(|a| (&a - &a_true).norm_squared())
                            .filter(|e| e.is_finite())
                    })
                    .collect()
            })
            .collect();
        for (ci, cell) in cells.iter().enumerate() {
            let mut sum = 0.0;
            let mut ok = 0;
            for trial in &errors {
                if let Some(e) = trial[ci] {
                    sum += e;
                    ok += 1;
                }
            }
            let nmse_db = if ok > 0 {
                nmse_from_sums(sum, ok, &a_true, norm)?
            } else {
                f64::NAN
            };
            let compression = match cell {
                ArCell::Full => 0.0,
                ArCell::Scheme(s) => s.compression(),
            };
            rows.push(NmseRow {
                n_snapshots: ns,
                method: Method::Ls,
                compression,
                nmse_db,
                crb_db: None,
                sampler: ci,
                trials: config.n_trials,
                failures: config.n_trials - ok,
            });
        }
    }
    Ok(ExperimentResult { rows })
}

fn ar_trial(
    shift: &ShiftOperator,
    cell: &ArCell,
    r_hat: &CovarianceMatrix,
    order: usize,
) -> Result<DVector<f64>> {
    let fit = match cell {
        ArCell::Full => estimate_ar_uncompressed(shift, r_hat, order)?,
        ArCell::Scheme(scheme) => {
            let cov = ArCovariances::from_full(r_hat, scheme)?;
            let sys = build_ar_model(shift, scheme, &cov)?;
            estimate_ar(&sys.model, &sys.target)?
        }
    };
    Ok(fit.params.a().clone())
}

/// Writes `n_snapshots,method,compression,nmse_db,crb_db`.
pub fn write_nmse_csv<W: Write>(rows: &[NmseRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_snapshots", "method", "compression", "nmse_db", "crb_db"])?;
    for r in rows {
        w.write_record([
            r.n_snapshots.to_string(),
            r.method.as_str().to_string(),
            format!("{:.6}", r.compression),
            format!("{:.6}", r.nmse_db),
            r.crb_db.map(|v| format!("{v:.6}")).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
