//! Parameter recovery from compressed covariances: least squares,
//! nonnegative least squares, one-step weighted least squares, the Fisher
//! information with its Cramér-Rao bound, and the NMSE figure of merit.
//!
//! Parameters are real. Complex models are solved on the real-stacked system
//! `[Re G; Im G] θ = [Re r; Im r]`.

use nalgebra::{Cholesky, DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::linalg::{
    hpd_inverse, lstsq_full_rank, min_eigenvalue_hermitian, numerical_rank, real_stack_system,
    unvec, RankInfo, C64,
};
use crate::models::ObservationModel;
use crate::stationary::CovarianceMatrix;

/// Real-valued data: `ν = 1/2`.
pub const NU_REAL: f64 = 0.5;
/// Circular complex data: `ν = 1`.
pub const NU_COMPLEX: f64 = 1.0;

/// Reported NMSE floor, used for exact recovery.
pub const NMSE_FLOOR_DB: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ls,
    Nnls,
    Wls,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Ls => "ls",
            Method::Nnls => "nnls",
            Method::Wls => "wls",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ls" => Ok(Method::Ls),
            "nnls" => Ok(Method::Nnls),
            "wls" => Ok(Method::Wls),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub theta: DVector<f64>,
    /// `‖G θ − r‖₂`, unweighted.
    pub residual_norm: f64,
    pub method: Method,
    /// Condition number of the real-stacked model.
    pub condition_number: f64,
}

/// Real-stacked system with its rank, after input validation.
struct Prepared {
    a: DMatrix<f64>,
    b: DVector<f64>,
    rank: RankInfo,
}

fn prepare(model: &ObservationModel, r_y: &DVector<C64>) -> Result<Prepared> {
    if r_y.len() != model.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: model.n_rows(),
            got: r_y.len(),
        });
    }
    if r_y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::invalid("observation vector contains NaN or Inf"));
    }
    if model
        .matrix()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::invalid("model matrix contains NaN or Inf"));
    }
    let (a, b) = real_stack_system(model.matrix(), r_y);
    let rank = numerical_rank(&a, model.n_rows());
    if rank.rank < model.n_params() {
        return Err(Error::RankDeficient {
            rank: rank.rank,
            cols: model.n_params(),
        });
    }
    Ok(Prepared { a, b, rank })
}

/// Least squares via column-pivoted QR. Requires full column rank.
pub fn ls_estimate(model: &ObservationModel, r_y: &DVector<C64>) -> Result<EstimationResult> {
    let sys = prepare(model, r_y)?;
    let theta = lstsq_full_rank(&sys.a, &sys.b)?;
    Ok(EstimationResult {
        residual_norm: (&sys.a * &theta - &sys.b).norm(),
        theta,
        method: Method::Ls,
        condition_number: sys.rank.condition_number,
    })
}

/// Least squares subject to `θ ≥ 0`, by the Lawson–Hanson active-set method.
///
/// Stops when the KKT residual `max_j max(0, ∇_j)` over the active set falls
/// below `1e-8 · max(1, ‖Aᵀb‖∞)`.
pub fn nnls_estimate(model: &ObservationModel, r_y: &DVector<C64>) -> Result<EstimationResult> {
    let sys = prepare(model, r_y)?;
    let theta = nnls(&sys.a, &sys.b)?;
    Ok(EstimationResult {
        residual_norm: (&sys.a * &theta - &sys.b).norm(),
        theta,
        method: Method::Nnls,
        condition_number: sys.rank.condition_number,
    })
}

/// Lawson–Hanson NNLS on a full-column-rank real system.
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let m = a.ncols();
    let max_iter = (10 * m * m).max(10);
    let atb = a.transpose() * b;
    let tol = 1e-8 * atb.amax().max(1.0);
    let mut x = DVector::<f64>::zeros(m);
    let mut passive = vec![false; m];
    let mut iterations = 0;

    let solve_passive = |passive: &[bool]| -> Result<DVector<f64>> {
        let cols: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
        let sub = a.select_columns(&cols);
        let zs = lstsq_full_rank(&sub, b)?;
        let mut z = DVector::zeros(m);
        for (k, &j) in cols.iter().enumerate() {
            z[j] = zs[k];
        }
        Ok(z)
    };

    loop {
        // Negative gradient of ½‖Ax − b‖².
        let w = a.transpose() * (b - a * &x);
        let next = (0..m)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(j) = next else { break };
        passive[j] = true;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::Convergence { iterations });
            }
            let z = solve_passive(&passive)?;
            if (0..m).filter(|&i| passive[i]).all(|i| z[i] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for i in (0..m).filter(|&i| passive[i] && z[i] <= 0.0) {
                let step = x[i] / (x[i] - z[i]);
                alpha = alpha.min(step);
            }
            x += (z - &x) * alpha;
            for i in 0..m {
                if passive[i] && x[i] <= 1e-15 * x.amax().max(1.0) {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            if passive.iter().all(|&p| !p) {
                break;
            }
        }
    }
    Ok(x)
}

/// Adds `δ I`, `δ = 1e-8 · tr(R)/K`, when the smallest eigenvalue is below `δ`.
pub fn regularize(r: &CovarianceMatrix) -> DMatrix<C64> {
    let k = r.dim();
    let delta = 1e-8 * r.trace() / k as f64;
    let mut m = r.matrix().clone();
    if min_eigenvalue_hermitian(&m) < delta {
        for i in 0..k {
            m[(i, i)] += C64::new(delta, 0.0);
        }
    }
    m
}

/// `K` for a model whose rows are the `K²` entries of a `K × K` covariance.
fn square_side(model: &ObservationModel) -> Result<usize> {
    let rows = model.n_rows();
    let k = (rows as f64).sqrt().round() as usize;
    if k * k != rows {
        return Err(Error::invalid(format!(
            "model has {rows} rows, not the K² entries of a square covariance"
        )));
    }
    Ok(k)
}

/// Parameter blocks `G_i` (column `i` reshaped `K × K`).
fn column_blocks(model: &ObservationModel, k: usize) -> Result<Vec<DMatrix<C64>>> {
    (0..model.n_params())
        .map(|i| unvec(&model.matrix().column(i).into_owned(), k, k))
        .collect()
}

/// `Re ⟨X, Y⟩ = Re tr(X^H Y)`.
fn re_inner(x: &DMatrix<C64>, y: &DMatrix<C64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Weighted problem data with `C_w x = vec(R⁻¹ X R⁻¹)` (the `νN_s` scale
/// cancels in the solution and in the relative stationarity residual).
struct Weighted {
    blocks: Vec<DMatrix<C64>>,
    weighted_blocks: Vec<DMatrix<C64>>,
    r_hat: DMatrix<C64>,
    r_inv: DMatrix<C64>,
}

fn weighted(
    model: &ObservationModel,
    r_hat: &DVector<C64>,
    r_y_hat: &CovarianceMatrix,
) -> Result<Weighted> {
    let k = square_side(model)?;
    if r_y_hat.dim() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: r_y_hat.dim(),
        });
    }
    if r_hat.len() != k * k {
        return Err(Error::DimensionMismatch {
            expected: k * k,
            got: r_hat.len(),
        });
    }
    let r_inv = hpd_inverse(&regularize(r_y_hat))?;
    let blocks = column_blocks(model, k)?;
    let weighted_blocks = blocks.iter().map(|g| &r_inv * g * &r_inv).collect();
    Ok(Weighted {
        blocks,
        weighted_blocks,
        r_hat: unvec(r_hat, k, k)?,
        r_inv,
    })
}

/// One-step weighted least squares with `Ĉ_w = νN_s (R̂^{−T} ⊗ R̂^{−1})`.
///
/// Solves `Re(Gᴴ Ĉ_w G) θ = Re(Gᴴ Ĉ_w r̂)`. `R̂` is regularized as in
/// [`regularize`].
pub fn wls_estimate(
    model: &ObservationModel,
    r_hat: &DVector<C64>,
    r_y_hat: &CovarianceMatrix,
) -> Result<EstimationResult> {
    let sys = prepare(model, r_hat)?;
    let w = weighted(model, r_hat, r_y_hat)?;
    let m = model.n_params();
    let normal = DMatrix::from_fn(m, m, |i, j| re_inner(&w.blocks[i], &w.weighted_blocks[j]));
    let normal = (&normal + normal.transpose()) * 0.5;
    let rhs = DVector::from_fn(m, |i, _| re_inner(&w.weighted_blocks[i], &w.r_hat));
    let theta = match Cholesky::new(normal.clone()) {
        Some(c) => c.solve(&rhs),
        None => lstsq_full_rank(&normal, &rhs)?,
    };
    Ok(EstimationResult {
        residual_norm: (&sys.a * &theta - &sys.b).norm(),
        theta,
        method: Method::Wls,
        condition_number: sys.rank.condition_number,
    })
}

/// Relative stationarity residual of the weighted problem at `θ`:
/// `max_i |Re g_iᴴ C(Gθ − r̂)| / max_i |Re g_iᴴ C r̂|`.
pub fn wls_gradient(
    model: &ObservationModel,
    theta: &DVector<f64>,
    r_hat: &DVector<C64>,
    r_y_hat: &CovarianceMatrix,
) -> Result<f64> {
    if theta.len() != model.n_params() {
        return Err(Error::DimensionMismatch {
            expected: model.n_params(),
            got: theta.len(),
        });
    }
    let w = weighted(model, r_hat, r_y_hat)?;
    let k = w.r_hat.nrows();
    let mut fitted = DMatrix::<C64>::zeros(k, k);
    for (g, &t) in w.blocks.iter().zip(theta.iter()) {
        fitted += g * C64::new(t, 0.0);
    }
    let residual = &w.r_inv * (fitted - &w.r_hat) * &w.r_inv;
    let weighted_rhs = &w.r_inv * &w.r_hat * &w.r_inv;
    let num = w
        .blocks
        .iter()
        .map(|g| re_inner(g, &residual).abs())
        .fold(0.0, f64::max);
    let den = w
        .blocks
        .iter()
        .map(|g| re_inner(g, &weighted_rhs).abs())
        .fold(0.0, f64::max);
    Ok(if den > 0.0 { num / den } else { num })
}

/// Fisher information of `θ` for Gaussian snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherInfo {
    pub matrix: DMatrix<f64>,
    pub nu: f64,
    pub n_snapshots: usize,
}

/// `F_ij = νN_s Re tr(R⁻¹ G_i R⁻¹ G_jᴴ)`.
pub fn fisher_info(
    model: &ObservationModel,
    r_y: &CovarianceMatrix,
    n_snapshots: usize,
    nu: f64,
) -> Result<FisherInfo> {
    if n_snapshots == 0 {
        return Err(Error::invalid("n_snapshots must be >= 1"));
    }
    if nu.is_nan() || nu <= 0.0 {
        return Err(Error::invalid("nu must be positive"));
    }
    let k = square_side(model)?;
    if r_y.dim() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: r_y.dim(),
        });
    }
    let r_inv = hpd_inverse(&regularize(r_y))?;
    let blocks = column_blocks(model, k)?;
    let weighted: Vec<_> = blocks.iter().map(|g| &r_inv * g * &r_inv).collect();
    let m = blocks.len();
    let scale = nu * n_snapshots as f64;
    let f = DMatrix::from_fn(m, m, |i, j| scale * re_inner(&blocks[j], &weighted[i]));
    Ok(FisherInfo {
        matrix: (&f + f.transpose()) * 0.5,
        nu,
        n_snapshots,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Crb {
    pub matrix: DMatrix<f64>,
    /// Set when `F` was singular and the pseudo-inverse was used.
    pub pseudo_inverse: bool,
}

impl Crb {
    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// `F⁻¹`, or the pseudo-inverse with a warning flag when `F` is singular.
pub fn crb(fisher: &FisherInfo) -> Crb {
    let f = &fisher.matrix;
    let info = numerical_rank(f, f.nrows());
    if info.rank == f.ncols() && info.condition_number < 1e12 {
        if let Some(c) = Cholesky::new(f.clone()) {
            return Crb {
                matrix: c.inverse(),
                pseudo_inverse: false,
            };
        }
    }
    let svd = SVD::new(f.clone(), true, true);
    let tol = f.nrows() as f64 * f64::EPSILON * info.sigma_max;
    let pinv = svd
        .pseudo_inverse(tol)
        .unwrap_or_else(|_| DMatrix::zeros(f.ncols(), f.nrows()));
    Crb {
        matrix: pinv,
        pseudo_inverse: true,
    }
}

/// Denominator convention of the NMSE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NmseNorm {
    /// `N_exp ‖p‖₂`.
    #[default]
    Printed,
    /// `N_exp ‖p‖₂²`.
    Squared,
}

/// `10 log10(Σ_m ‖p − p̂_m‖² / (N_exp · ‖p‖))`, floored at −300 dB.
pub fn nmse(true_p: &DVector<f64>, estimates: &[DVector<f64>], norm: NmseNorm) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::invalid("nmse needs at least one estimate"));
    }
    let sq_err: f64 = estimates
        .iter()
        .map(|e| {
            if e.len() != true_p.len() {
                return Err(Error::DimensionMismatch {
                    expected: true_p.len(),
                    got: e.len(),
                });
            }
            Ok((true_p - e).norm_squared())
        })
        .sum::<Result<f64>>()?;
    nmse_from_sums(sq_err, estimates.len(), true_p, norm)
}

/// NMSE from an accumulated squared error over `n_exp` estimates.
pub fn nmse_from_sums(
    sq_err: f64,
    n_exp: usize,
    true_p: &DVector<f64>,
    norm: NmseNorm,
) -> Result<f64> {
    let denom = normalizer(true_p, norm)?;
    Ok(to_db(sq_err / (n_exp as f64 * denom)))
}

/// NMSE an efficient estimator would reach: `trace(CRB)` in place of the
/// mean squared error.
pub fn crb_db(crb: &Crb, true_p: &DVector<f64>, norm: NmseNorm) -> Result<f64> {
    Ok(to_db(crb.trace() / normalizer(true_p, norm)?))
}

fn normalizer(true_p: &DVector<f64>, norm: NmseNorm) -> Result<f64> {
    let n = true_p.norm();
    if n.is_nan() || n <= 0.0 {
        return Err(Error::invalid("true parameter vector is zero"));
    }
    Ok(match norm {
        NmseNorm::Printed => n,
        NmseNorm::Squared => n * n,
    })
}

fn to_db(ratio: f64) -> f64 {
    if ratio > 0.0 {
        (10.0 * ratio.log10()).max(NMSE_FLOOR_DB)
    } else {
        NMSE_FLOOR_DB
    }
}
