//! Graphs, graph-shift operators, graph Fourier bases and polynomial filters.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, to_complex, C64};

pub mod generators;

/// Relative tolerance used when checking symmetry of a shift operator.
const SYMMETRY_TOL: f64 = 1e-12;

/// An undirected weighted graph with 0-based node indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate pairs, out-of-range
    /// indices and non-positive weights.
    pub fn new(n_nodes: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(i, j, w) in &edges {
            if i >= n_nodes || j >= n_nodes {
                return Err(Error::invalid(format!(
                    "edge ({i}, {j}) out of range for {n_nodes} nodes"
                )));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at node {i}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::invalid(format!("edge ({i}, {j}) has weight {w}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::invalid(format!("duplicate edge ({i}, {j})")));
            }
        }
        Ok(Graph { n_nodes, edges })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Weighted adjacency matrix W.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(self.n_nodes, self.n_nodes);
        for &(i, j, wt) in &self.edges {
            w[(i, j)] = wt;
            w[(j, i)] = wt;
        }
        w
    }

    /// Number of neighbours of each node.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_nodes];
        for &(i, j, _) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        if self.n_nodes == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n_nodes];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n_nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftKind {
    Laplacian,
    Adjacency,
    Custom,
    /// A circulant operator whose Fourier basis is the unitary DFT matrix.
    CirculantDft,
}

/// A real symmetric graph-shift operator with a lazily computed spectral basis.
#[derive(Debug)]
pub struct ShiftOperator {
    matrix: DMatrix<f64>,
    kind: ShiftKind,
    /// Nonzero pattern per row: `(column, value)`.
    rows: Vec<Vec<(usize, f64)>>,
    basis: OnceLock<SpectralBasis>,
}

impl Clone for ShiftOperator {
    fn clone(&self) -> Self {
        let basis = OnceLock::new();
        if let Some(b) = self.basis.get() {
            let _ = basis.set(b.clone());
        }
        ShiftOperator {
            matrix: self.matrix.clone(),
            kind: self.kind,
            rows: self.rows.clone(),
            basis,
        }
    }
}

/// Builds the Laplacian `D − W` or the adjacency `W` of a graph.
pub fn build_shift(graph: &Graph, kind: ShiftKind) -> Result<ShiftOperator> {
    if graph.n_nodes() == 0 {
        return Err(Error::invalid("graph has no nodes"));
    }
    let w = graph.adjacency();
    let matrix = match kind {
        ShiftKind::Adjacency => w,
        ShiftKind::Laplacian => {
            let mut l = -w.clone();
            for i in 0..w.nrows() {
                l[(i, i)] = w.row(i).sum();
            }
            l
        }
        other => {
            return Err(Error::invalid(format!(
                "build_shift supports laplacian or adjacency, got {other:?}"
            )))
        }
    };
    ShiftOperator::from_matrix(matrix, kind)
}

impl ShiftOperator {
    /// Wraps a symmetric matrix. `CirculantDft` additionally requires the
    /// matrix to be exactly circulant.
    pub fn from_matrix(matrix: DMatrix<f64>, kind: ShiftKind) -> Result<Self> {
        check_symmetric(&matrix)?;
        if kind == ShiftKind::CirculantDft && !is_circulant(&matrix) {
            return Err(Error::invalid("matrix is not circulant"));
        }
        let rows = (0..matrix.nrows())
            .map(|i| {
                (0..matrix.ncols())
                    .filter(|&j| matrix[(i, j)] != 0.0)
                    .map(|j| (j, matrix[(i, j)]))
                    .collect()
            })
            .collect();
        Ok(ShiftOperator {
            matrix,
            kind,
            rows,
            basis: OnceLock::new(),
        })
    }

    /// Adjacency of a circulant graph, tagged to use the DFT basis.
    pub fn circulant_adjacency(graph: &Graph) -> Result<Self> {
        Self::from_matrix(graph.adjacency(), ShiftKind::CirculantDft)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> ShiftKind {
        self.kind
    }

    pub fn n_nodes(&self) -> usize {
        self.matrix.nrows()
    }

    /// Nonzero entries `(column, value)` of row `i`.
    pub fn row_nonzeros(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Spectral basis: the DFT basis for `CirculantDft`, the numerical
    /// eigendecomposition otherwise. Computed once.
    pub fn basis(&self) -> Result<&SpectralBasis> {
        if let Some(b) = self.basis.get() {
            return Ok(b);
        }
        let b = match self.kind {
            ShiftKind::CirculantDft => circulant_dft_basis(self)?,
            _ => eigendecompose(self)?,
        };
        Ok(self.basis.get_or_init(|| b))
    }

    /// Sparse matrix-vector product `S x`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.n_nodes(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|&(j, v)| v * x[j]).sum::<f64>()),
        )
    }

    /// Dense powers `S^0, …, S^{count−1}`.
    pub fn powers(&self, count: usize) -> Vec<DMatrix<f64>> {
        let n = self.n_nodes();
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        out.push(DMatrix::identity(n, n));
        for k in 1..count {
            let next = &out[k - 1] * &self.matrix;
            out.push(next);
        }
        out
    }
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::invalid(format!(
            "shift operator must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Err(Error::invalid("shift operator is empty"));
    }
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::invalid(format!(
                    "shift operator is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Exact test that every row is a one-step cyclic shift of the previous one.
pub fn is_circulant(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    m.is_square() && (0..n).all(|i| (0..n).all(|j| m[(i, j)] == m[(0, (j + n - i) % n)]))
}

/// Graph Fourier basis: eigenvectors as columns and matching eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigvecs: DMatrix<C64>,
    eigvals: DVector<f64>,
    distinct: bool,
    real: bool,
}

impl SpectralBasis {
    /// Wraps a unitary basis. `eigvals` are only used by the parametric models.
    pub fn new(eigvecs: DMatrix<C64>, eigvals: DVector<f64>) -> Result<Self> {
        let n = eigvecs.nrows();
        if !eigvecs.is_square() || eigvals.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: eigvals.len(),
            });
        }
        let gram = eigvecs.adjoint() * &eigvecs;
        let err = (gram - DMatrix::<C64>::identity(n, n))
            .iter()
            .fold(0.0_f64, |a, z| a.max(z.norm()));
        if err > 1e-10 {
            return Err(Error::invalid(format!(
                "basis is not unitary (error {err:e})"
            )));
        }
        let scale = eigvals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        let distinct = eigenvalues_distinct(&eigvals, gap_tol(scale));
        let real = eigvecs.iter().all(|z| z.im == 0.0);
        Ok(SpectralBasis {
            eigvecs,
            eigvals,
            distinct,
            real,
        })
    }

    /// Unitary matrix U with the basis vectors as columns.
    pub fn eigvecs(&self) -> &DMatrix<C64> {
        &self.eigvecs
    }

    pub fn eigvals(&self) -> &DVector<f64> {
        &self.eigvals
    }

    /// True when all eigenvalue gaps exceed the distinctness threshold.
    pub fn distinct(&self) -> bool {
        self.distinct
    }

    /// True when every basis vector is real.
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn n_nodes(&self) -> usize {
        self.eigvals.len()
    }

    /// Graph Fourier transform `U^H x`.
    pub fn gft(&self, x: &DVector<f64>) -> Result<DVector<C64>> {
        self.gft_complex(&x.map(|v| C64::new(v, 0.0)))
    }

    pub fn gft_complex(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        self.check_len(x.len())?;
        Ok(self.eigvecs.ad_mul(x))
    }

    /// Inverse transform `U x_f`.
    pub fn inverse_gft(&self, xf: &DVector<C64>) -> Result<DVector<C64>> {
        self.check_len(xf.len())?;
        Ok(&self.eigvecs * xf)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: self.n_nodes(),
                got: len,
            });
        }
        Ok(())
    }
}

fn gap_tol(scale: f64) -> f64 {
    1e-8 * scale.max(1.0)
}

fn eigenvalues_distinct(eigvals: &DVector<f64>, tol: f64) -> bool {
    let mut sorted: Vec<f64> = eigvals.iter().cloned().collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.windows(2).all(|w| w[1] - w[0] > tol)
}

/// Numerical eigendecomposition of a symmetric shift operator.
///
/// Eigenvalues come out ascending and each eigenvector is scaled so that its
/// largest-magnitude entry (first one on ties) is positive.
pub fn eigendecompose(shift: &ShiftOperator) -> Result<SpectralBasis> {
    let s = shift.matrix();
    check_symmetric(s)?;
    let n = s.nrows();
    let eig = SymmetricEigen::new(s.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut vecs = DMatrix::<f64>::zeros(n, n);
    let mut vals = DVector::<f64>::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let peak = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let lead = v
            .iter()
            .position(|x| x.abs() >= peak * (1.0 - 1e-12))
            .unwrap_or(0);
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        vecs.set_column(col, &v);
        vals[col] = eig.eigenvalues[src];
    }
    let distinct = eigenvalues_distinct(&vals, gap_tol(max_abs(s)));
    Ok(SpectralBasis {
        eigvecs: to_complex(&vecs),
        eigvals: vals,
        distinct,
        real: true,
    })
}

/// DFT basis of a circulant shift operator, no eigensolver involved.
///
/// Column `n` is `u_n[k] = exp(−i2πnk/N)/√N` and its eigenvalue is the `n`-th
/// DFT coefficient of the first row. Eigenvalues are kept in DFT order.
pub fn circulant_dft_basis(shift: &ShiftOperator) -> Result<SpectralBasis> {
    let s = shift.matrix();
    if !is_circulant(s) {
        return Err(Error::invalid("matrix is not circulant"));
    }
    let n = s.nrows();
    let norm = 1.0 / (n as f64).sqrt();
    let u = DMatrix::from_fn(n, n, |k, col| {
        let angle = -2.0 * std::f64::consts::PI * ((col * k) % n) as f64 / n as f64;
        C64::from_polar(norm, angle)
    });

    let mut first_row: Vec<C64> = (0..n).map(|j| C64::new(s[(0, j)], 0.0)).collect();
    FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut first_row);
    // Symmetric circulant matrices have a real spectrum.
    let eigvals = DVector::from_iterator(n, first_row.iter().map(|z| z.re));
    let distinct = eigenvalues_distinct(&eigvals, gap_tol(max_abs(s)));
    Ok(SpectralBasis {
        eigvecs: u,
        eigvals,
        distinct,
        real: n <= 2,
    })
}

/// Polynomial graph filter `H = Σ_l h_l S^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFilter {
    coeffs: Vec<f64>,
}

impl GraphFilter {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("filter needs at least one coefficient"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("filter coefficients must be finite"));
        }
        Ok(GraphFilter { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of taps L.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Dense filter matrix, built by Horner's rule on `S`.
    pub fn matrix(&self, shift: &ShiftOperator) -> DMatrix<f64> {
        let n = shift.n_nodes();
        let eye = DMatrix::<f64>::identity(n, n);
        let mut h = &eye * *self.coeffs.last().unwrap();
        for &c in self.coeffs.iter().rev().skip(1) {
            h = shift.matrix() * h + &eye * c;
        }
        h
    }
}

/// `Σ_l h_l S^l x` by iterated sparse shift-and-accumulate.
pub fn apply_filter(
    shift: &ShiftOperator,
    filter: &GraphFilter,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = shift.n_nodes();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    if filter.len() > n {
        return Err(Error::invalid(format!(
            "filter with {} taps exceeds {} nodes",
            filter.len(),
            n
        )));
    }
    let coeffs = filter.coeffs();
    let mut y = x * coeffs[coeffs.len() - 1];
    for &c in coeffs.iter().rev().skip(1) {
        y = shift.apply(&y);
        y.axpy(c, x, 1.0);
    }
    Ok(y)
}

/// Frequency response `V_L h`: the filter polynomial evaluated at each eigenvalue.
pub fn frequency_response(eigvals: &DVector<f64>, filter: &GraphFilter) -> DVector<f64> {
    eigvals.map(|lambda| {
        filter
            .coeffs()
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * lambda + c)
    })
}
