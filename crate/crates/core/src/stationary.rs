//! Stationary graph signals: generation by filtering white noise, true and
//! sample covariances, power spectra and a stationarity diagnostic.
//!
//! Noise is drawn from `ChaCha8Rng::seed_from_u64(seed)` through
//! `rand_distr::StandardNormal`; both are platform independent, so a seed
//! fully determines the generated snapshots.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{apply_filter, GraphFilter, ShiftOperator, SpectralBasis};
use crate::linalg::{max_abs_c, min_eigenvalue_hermitian, to_complex, C64};
use crate::models::Subsampler;

/// Graph power spectrum `p`, one value per graph frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum(pub DVector<f64>);

impl PowerSpectrum {
    pub fn values(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Tolerance on negative entries: `1e-6 · max(p)`.
    pub fn negativity_tolerance(&self) -> f64 {
        1e-6 * self.0.max().max(0.0)
    }

    /// True when no entry dips below `−negativity_tolerance()`.
    pub fn is_nonnegative(&self) -> bool {
        let tol = self.negativity_tolerance();
        self.0.iter().all(|&v| v >= -tol)
    }
}

/// `K × N_s` matrix of observed realizations, column `k` being snapshot `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotMatrix {
    data: DMatrix<f64>,
    node_indices: Vec<usize>,
}

impl SnapshotMatrix {
    pub fn new(data: DMatrix<f64>, node_indices: Vec<usize>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::invalid("snapshot matrix needs K >= 1 and N_s >= 1"));
        }
        if node_indices.len() != data.nrows() {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                got: node_indices.len(),
            });
        }
        Ok(SnapshotMatrix { data, node_indices })
    }

    /// Snapshots observed on every node `0..N`.
    pub fn full(data: DMatrix<f64>) -> Result<Self> {
        let n = data.nrows();
        Self::new(data, (0..n).collect())
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn node_indices(&self) -> &[usize] {
        &self.node_indices
    }

    pub fn n_snapshots(&self) -> usize {
        self.data.ncols()
    }

    /// Keeps the rows of the nodes picked by `sampler`, in sampler order.
    pub fn subsample(&self, sampler: &Subsampler) -> Result<SnapshotMatrix> {
        self.select_nodes(sampler.selected())
    }

    /// Keeps the rows of `nodes`, in that order. Every node must be present.
    pub fn select_nodes(&self, nodes: &[usize]) -> Result<SnapshotMatrix> {
        let rows = nodes
            .iter()
            .map(|node| {
                self.node_indices
                    .iter()
                    .position(|n| n == node)
                    .ok_or_else(|| Error::invalid(format!("node {node} was not observed")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SnapshotMatrix {
            data: self.data.select_rows(&rows),
            node_indices: nodes.to_vec(),
        })
    }

    /// Subtracts the per-node sample mean.
    pub fn demeaned(&self) -> SnapshotMatrix {
        let mut data = self.data.clone();
        for mut row in data.row_iter_mut() {
            let mean = row.mean();
            row.add_scalar_mut(-mean);
        }
        SnapshotMatrix {
            data,
            node_indices: self.node_indices.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    True,
    Sample,
}

/// Hermitian positive semidefinite covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<C64>,
    kind: CovarianceKind,
    n_snapshots: Option<usize>,
}

impl CovarianceMatrix {
    /// Wraps a matrix after checking it is Hermitian and PSD within tolerance.
    pub fn new(
        matrix: DMatrix<C64>,
        kind: CovarianceKind,
        n_snapshots: Option<usize>,
    ) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::invalid(
                "covariance must be a non-empty square matrix",
            ));
        }
        let scale = max_abs_c(&matrix).max(f64::MIN_POSITIVE);
        let n = matrix.nrows();
        for i in 0..n {
            for j in i..n {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::invalid(format!(
                        "covariance not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let trace: f64 = (0..n).map(|i| matrix[(i, i)].re).sum();
        if min_eigenvalue_hermitian(&matrix) < -1e-10 * trace.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::invalid("covariance is not positive semidefinite"));
        }
        Ok(CovarianceMatrix {
            matrix,
            kind,
            n_snapshots,
        })
    }

    /// A true covariance from a real matrix.
    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new(to_complex(&matrix), CovarianceKind::True, None)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn n_snapshots(&self) -> Option<usize> {
        self.n_snapshots
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).sum()
    }

    /// `Φ R Φ^T`: rows and columns of the selected nodes.
    pub fn compress(&self, sampler: &Subsampler) -> Result<CovarianceMatrix> {
        if sampler.n_nodes() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: sampler.n_nodes(),
            });
        }
        Ok(CovarianceMatrix {
            matrix: self.submatrix(sampler.selected(), sampler.selected()),
            kind: self.kind,
            n_snapshots: self.n_snapshots,
        })
    }

    /// Block with the given row and column indices.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.matrix[(rows[i], cols[j])]
        })
    }
}

/// `H H^H` for `H = Σ h_l S^l` driven by unit-variance white noise.
pub fn true_covariance(shift: &ShiftOperator, filter: &GraphFilter) -> CovarianceMatrix {
    let h = filter.matrix(shift);
    let r = &h * h.transpose();
    let r = (&r + r.transpose()) * 0.5;
    CovarianceMatrix {
        matrix: to_complex(&r),
        kind: CovarianceKind::True,
        n_snapshots: None,
    }
}

/// Standard normal `rows × cols` matrix, filled column by column.
pub fn white_noise(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::zeros(rows, cols);
    for v in m.iter_mut() {
        *v = StandardNormal.sample(&mut rng);
    }
    m
}

/// `N × N_s` matrix whose columns are filtered standard normal noise vectors.
pub fn generate_signals(
    shift: &ShiftOperator,
    filter: &GraphFilter,
    n_snapshots: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if n_snapshots == 0 {
        return Err(Error::invalid("n_snapshots must be >= 1"));
    }
    let n = shift.n_nodes();
    let noise = white_noise(n, n_snapshots, seed);
    let mut out = DMatrix::zeros(n, n_snapshots);
    for k in 0..n_snapshots {
        let col = apply_filter(shift, filter, &noise.column(k).into_owned())?;
        out.set_column(k, &col);
    }
    Ok(out)
}

/// `(1/N_s) Y Y^H`.
pub fn sample_covariance(y: &SnapshotMatrix) -> CovarianceMatrix {
    sample_covariance_of(y.data())
}

/// `(1/N_s) Y Y^H` of a raw `K × N_s` matrix. PSD by construction, so the
/// eigenvalue check of [`CovarianceMatrix::new`] is skipped.
pub fn sample_covariance_of(data: &DMatrix<f64>) -> CovarianceMatrix {
    let ns = data.ncols();
    let r = data * data.transpose() / ns as f64;
    CovarianceMatrix {
        matrix: to_complex(&r),
        kind: CovarianceKind::Sample,
        n_snapshots: Some(ns),
    }
}

/// `p_n = u_n^H R u_n`, the uncompressed power-spectrum estimate.
pub fn power_spectrum_from_cov(
    basis: &SpectralBasis,
    r: &CovarianceMatrix,
) -> Result<PowerSpectrum> {
    let n = basis.n_nodes();
    if r.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.dim(),
        });
    }
    let u = basis.eigvecs();
    let ru = r.matrix() * u;
    let p = DVector::from_iterator(n, (0..n).map(|k| u.column(k).dotc(&ru.column(k)).re));
    Ok(PowerSpectrum(p))
}

/// Fraction of the energy of `U^H R U` on its main diagonal.
///
/// Equals 1 for a covariance that is simultaneously diagonalizable with the
/// shift. A zero matrix scores 1.
pub fn stationarity_score(basis: &SpectralBasis, r: &CovarianceMatrix) -> Result<f64> {
    let n = basis.n_nodes();
    if r.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.dim(),
        });
    }
    let u = basis.eigvecs();
    let spectral = u.adjoint() * r.matrix() * u;
    let total: f64 = spectral.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(1.0);
    }
    let diag: f64 = (0..n).map(|i| spectral[(i, i)].norm_sqr()).sum();
    Ok((diag / total).clamp(0.0, 1.0))
}
