//! Linear observation models `r_y = G θ` for the nonparametric spectral and
//! moving-average parameterizations, and their compression by a node
//! subsampler.
//!
//! Row `a + b·N` of an uncompressed model `Ψ` corresponds to the covariance
//! entry `(a, b)`, i.e. to the column-major vectorization of `R_x`. A
//! compressed model keeps the rows of pairs `(selected[i], selected[j])` in
//! the column-major order of `R_y`, row `i + j·K`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{GraphFilter, ShiftOperator, SpectralBasis};
use crate::linalg::{numerical_rank, real_stack, vec_col_major, RankInfo, C64};
use crate::stationary::CovarianceMatrix;

/// Node selection `w ∈ {0,1}^N` with `K` ones; `Φ(w)` keeps the selected rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsampler {
    n: usize,
    selected: Vec<usize>,
}

impl Subsampler {
    /// Sorts and validates the selection: `1 ≤ K ≤ N`, indices distinct and in range.
    pub fn new(n: usize, mut selected: Vec<usize>) -> Result<Self> {
        selected.sort_unstable();
        if selected.is_empty() {
            return Err(Error::invalid("sampler must select at least one node"));
        }
        if selected.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("sampler selects a node twice"));
        }
        if let Some(&last) = selected.last() {
            if last >= n {
                return Err(Error::invalid(format!(
                    "sampler index {last} out of range for {n} nodes"
                )));
            }
        }
        Ok(Subsampler { n, selected })
    }

    pub fn from_mask(w: &[bool]) -> Result<Self> {
        let selected = w
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
            .collect();
        Self::new(w.len(), selected)
    }

    /// Observes every node.
    pub fn all(n: usize) -> Result<Self> {
        Self::new(n, (0..n).collect())
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.selected.len()
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Boolean selection vector `w`.
    pub fn w(&self) -> Vec<bool> {
        let mut w = vec![false; self.n];
        for &i in &self.selected {
            w[i] = true;
        }
        w
    }

    /// Fraction of nodes that are not observed, `1 − K/N`.
    pub fn compression(&self) -> f64 {
        1.0 - self.compression_rate()
    }

    /// Fraction of nodes that are observed, `K/N`.
    pub fn compression_rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    /// Row-selection matrix `Φ(w)`, `K × N`.
    pub fn phi(&self) -> DMatrix<f64> {
        let mut phi = DMatrix::zeros(self.k(), self.n);
        for (r, &c) in self.selected.iter().enumerate() {
            phi[(r, c)] = 1.0;
        }
        phi
    }
}

/// Parameter family of an observation model and its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Spectral(usize),
    MovingAverage(usize),
    Autoregressive(usize),
}

impl ParamKind {
    pub fn dim(&self) -> usize {
        match *self {
            ParamKind::Spectral(m) | ParamKind::MovingAverage(m) | ParamKind::Autoregressive(m) => {
                m
            }
        }
    }
}

/// Uncompressed model `Ψ`, `N² × M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Psi {
    matrix: DMatrix<C64>,
    n_nodes: usize,
    kind: ParamKind,
}

impl Psi {
    pub fn new(matrix: DMatrix<C64>, n_nodes: usize, kind: ParamKind) -> Result<Self> {
        if matrix.nrows() != n_nodes * n_nodes {
            return Err(Error::DimensionMismatch {
                expected: n_nodes * n_nodes,
                got: matrix.nrows(),
            });
        }
        if matrix.ncols() != kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: kind.dim(),
                got: matrix.ncols(),
            });
        }
        Ok(Psi {
            matrix,
            n_nodes,
            kind,
        })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_params(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn kind(&self) -> ParamKind {
        self.kind
    }

    /// Entry of the row for pair `(a, b)` in column `m`.
    pub fn entry(&self, a: usize, b: usize, m: usize) -> C64 {
        self.matrix[(a + b * self.n_nodes, m)]
    }
}

/// Compressed model `G` with the node pair behind every row.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationModel {
    matrix: DMatrix<C64>,
    param_kind: ParamKind,
    row_index: Vec<(usize, usize)>,
}

impl ObservationModel {
    pub fn new(
        matrix: DMatrix<C64>,
        param_kind: ParamKind,
        row_index: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if matrix.nrows() != row_index.len() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: row_index.len(),
            });
        }
        if matrix.ncols() != param_kind.dim() {
            return Err(Error::DimensionMismatch {
                expected: param_kind.dim(),
                got: matrix.ncols(),
            });
        }
        Ok(ObservationModel {
            matrix,
            param_kind,
            row_index,
        })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn param_kind(&self) -> ParamKind {
        self.param_kind
    }

    pub fn row_index(&self) -> &[(usize, usize)] {
        &self.row_index
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_params(&self) -> usize {
        self.matrix.ncols()
    }

    /// Singular-value summary of the real-stacked model, threshold
    /// `max(rows, M)·eps·σ_max` with `rows` the complex row count.
    pub fn rank_info(&self) -> RankInfo {
        numerical_rank(&real_stack(&self.matrix), self.n_rows())
    }

    pub fn full_column_rank(&self) -> bool {
        self.rank_info().rank == self.n_params()
    }
}

/// Moving-average parameters `b`, with `p = V_Q b`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaParams {
    b: DVector<f64>,
}

impl MaParams {
    pub fn new(b: DVector<f64>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::invalid("MA parameter vector must have Q >= 1"));
        }
        Ok(MaParams { b })
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn order(&self) -> usize {
        self.b.len()
    }

    /// Power spectrum `V_Q b` at the given graph frequencies.
    pub fn spectrum(&self, eigvals: &DVector<f64>) -> DVector<f64> {
        vandermonde(eigvals, self.order()) * &self.b
    }

    /// Keeps the first `q` coefficients, zero-padding if `q` exceeds the order.
    pub fn truncated(&self, q: usize) -> Result<MaParams> {
        MaParams::new(DVector::from_fn(q, |i, _| {
            self.b.get(i).copied().unwrap_or(0.0)
        }))
    }
}

/// Shift powers `S^0, …, S^{count−1}`, computed once by repeated
/// multiplication and shared by the MA model, the AR model and design.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftPowers {
    powers: Vec<DMatrix<f64>>,
}

impl ShiftPowers {
    pub fn new(shift: &ShiftOperator, count: usize) -> Self {
        ShiftPowers {
            powers: shift.powers(count),
        }
    }

    pub fn len(&self) -> usize {
        self.powers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.powers.is_empty()
    }

    pub fn get(&self, k: usize) -> &DMatrix<f64> {
        &self.powers[k]
    }

    pub fn as_slice(&self) -> &[DMatrix<f64>] {
        &self.powers
    }
}

/// `Ψ_s = Ū ∘ U`: column `n` is `conj(u_n) ⊗ u_n`, so row `(a, b)` holds
/// `u_n[a]·conj(u_n[b])`.
pub fn build_psi_spectral(basis: &SpectralBasis) -> Psi {
    let n = basis.n_nodes();
    let u = basis.eigvecs();
    let mut m = DMatrix::zeros(n * n, n);
    for col in 0..n {
        for b in 0..n {
            let ub = u[(b, col)].conj();
            for a in 0..n {
                m[(a + b * n, col)] = u[(a, col)] * ub;
            }
        }
    }
    Psi {
        matrix: m,
        n_nodes: n,
        kind: ParamKind::Spectral(n),
    }
}

/// `Ψ_MA = [vec(S^0), …, vec(S^{Q−1})]`.
pub fn build_psi_ma(shift: &ShiftOperator, q: usize) -> Result<Psi> {
    let n = shift.n_nodes();
    if q == 0 || q > n {
        return Err(Error::invalid(format!(
            "MA order must satisfy 1 <= Q <= N = {n}, got {q}"
        )));
    }
    psi_ma_from_powers(&ShiftPowers::new(shift, q))
}

/// `Ψ_MA` from precomputed powers; the order is `powers.len()`.
pub fn psi_ma_from_powers(powers: &ShiftPowers) -> Result<Psi> {
    let q = powers.len();
    if q == 0 {
        return Err(Error::invalid("MA order must be >= 1"));
    }
    let n = powers.get(0).nrows();
    if q > n {
        return Err(Error::invalid(format!(
            "MA order must satisfy Q <= N = {n}, got {q}"
        )));
    }
    let mut m = DMatrix::zeros(n * n, q);
    for (k, p) in powers.as_slice().iter().enumerate() {
        for (r, &v) in p.as_slice().iter().enumerate() {
            m[(r, k)] = C64::new(v, 0.0);
        }
    }
    Psi::new(m, n, ParamKind::MovingAverage(q))
}

/// `N × Q` Vandermonde matrix with entries `λ_i^j`, `j = 0..Q`.
pub fn vandermonde(eigvals: &DVector<f64>, q: usize) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(eigvals.len(), q);
    for (i, &lambda) in eigvals.iter().enumerate() {
        let mut acc = 1.0;
        for j in 0..q {
            v[(i, j)] = acc;
            acc *= lambda;
        }
    }
    v
}

/// Structure matrix `M`, `(2L−1) × L²`: row `l` is `vec(Θ_l)^T`, where `Θ_l`
/// has ones on its `l`-th anti-diagonal (entries with `i + j = l`).
pub fn ma_structure_matrix(l: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(2 * l - 1, l * l);
    for j in 0..l {
        for i in 0..l {
            m[(i + j, i + j * l)] = 1.0;
        }
    }
    m
}

/// `b(h) = M vec(h h^T)`, the coefficients of `(Σ h_l t^l)²`.
pub fn ma_b_from_h(filter: &GraphFilter) -> MaParams {
    let h = DVector::from_column_slice(filter.coeffs());
    let l = h.len();
    let hh = &h * h.transpose();
    let b = ma_structure_matrix(l) * vec_col_major(&hh);
    MaParams { b }
}

/// `Q = min(2L − 1, N)`.
pub fn default_ma_order(filter_len: usize, n_nodes: usize) -> usize {
    (2 * filter_len).saturating_sub(1).min(n_nodes).max(1)
}

/// Keeps the `K²` rows of `Ψ` for pairs in `selected × selected`, ordered as
/// the column-major vectorization of `R_y`.
pub fn compress_model(psi: &Psi, sampler: &Subsampler) -> Result<ObservationModel> {
    let n = psi.n_nodes();
    if sampler.n_nodes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sampler.n_nodes(),
        });
    }
    let sel = sampler.selected();
    let mut rows = Vec::with_capacity(sel.len() * sel.len());
    let mut row_index = Vec::with_capacity(sel.len() * sel.len());
    for &b in sel {
        for &a in sel {
            rows.push(a + b * n);
            row_index.push((a, b));
        }
    }
    ObservationModel::new(psi.matrix.select_rows(&rows), psi.kind, row_index)
}

/// Column-major `vec(R_y)`.
pub fn vectorize_compressed_cov(r_y: &CovarianceMatrix) -> DVector<C64> {
    vec_col_major(r_y.matrix())
}
