//! Autoregressive graph model `x = Σ_k a_k S^k x + n`.
//!
//! Observation follows the neighborhood scheme: level 0 is a set of core
//! nodes, level `p` is the union of their `p`-hop neighborhoods, where the
//! `p`-hop neighborhood of `k` is the sparsity pattern of row `k` of `S^p`.
//! With `R_{k,q} = Φ_k R_x Φ_qᵀ`, the core rows satisfy
//!
//! `R_{0,q} ≈ Σ_k a_k Φ_0 S^k Φ_kᵀ R_{k,q}`,
//!
//! the noise/signal cross term being dropped. Stacking over `q = 0..P` gives
//! the linear model solved by least squares.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimators::ls_estimate;
use crate::graph::ShiftOperator;
use crate::linalg::{to_complex, C64};
use crate::models::{ObservationModel, ParamKind, ShiftPowers, Subsampler};
use crate::stationary::{white_noise, CovarianceMatrix, PowerSpectrum};

/// Smallest `|1 − Σ a_k λ^k|` accepted by [`ar_power_spectrum`].
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ArParams {
    a: DVector<f64>,
}

impl ArParams {
    pub fn new(a: DVector<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::invalid("AR order must be >= 1"));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("AR coefficients must be finite"));
        }
        Ok(ArParams { a })
    }

    pub fn from_slice(a: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(a))
    }

    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// `A = Σ_k a_k S^k`.
    pub fn polynomial(&self, shift: &ShiftOperator) -> DMatrix<f64> {
        let powers = ShiftPowers::new(shift, self.order() + 1);
        let n = shift.n_nodes();
        let mut acc = DMatrix::zeros(n, n);
        for (k, &ak) in self.a.iter().enumerate() {
            acc += powers.get(k + 1) * ak;
        }
        acc
    }
}

/// Observation levels `Φ_0, …, Φ_P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArScheme {
    n_nodes: usize,
    core: Vec<usize>,
    levels: Vec<Vec<usize>>,
}

impl ArScheme {
    pub fn core(&self) -> &[usize] {
        &self.core
    }

    pub fn order(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Sorted node lists, level 0 being the core.
    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }

    pub fn level_sampler(&self, p: usize) -> Result<Subsampler> {
        Subsampler::new(self.n_nodes, self.levels[p].clone())
    }

    /// Total observations `Σ_p K_p`, counting overlaps between levels.
    pub fn total_observations(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Sorted union of all levels.
    pub fn distinct_nodes(&self) -> Vec<usize> {
        self.levels
            .iter()
            .flatten()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    /// `1 − (distinct observed nodes)/N`.
    pub fn compression(&self) -> f64 {
        1.0 - self.distinct_nodes().len() as f64 / self.n_nodes as f64
    }
}

/// `{l : [S^p]_{node,l} ≠ 0}` from Boolean propagation of the sparsity pattern.
pub fn neighborhood(shift: &ShiftOperator, node: usize, p: usize) -> Result<Vec<usize>> {
    let n = shift.n_nodes();
    if node >= n {
        return Err(Error::invalid(format!(
            "node {node} out of range for {n} nodes"
        )));
    }
    if p == 0 {
        return Err(Error::invalid("neighborhood order must be >= 1"));
    }
    let mut current = vec![false; n];
    current[node] = true;
    for _ in 0..p {
        let mut next = vec![false; n];
        for (i, _) in current.iter().enumerate().filter(|(_, &on)| on) {
            for &(j, _) in shift.row_nonzeros(i) {
                next[j] = true;
            }
        }
        current = next;
    }
    Ok((0..n).filter(|&i| current[i]).collect())
}

pub fn build_ar_scheme(shift: &ShiftOperator, core: &[usize], order: usize) -> Result<ArScheme> {
    let n = shift.n_nodes();
    if order == 0 {
        return Err(Error::invalid("AR order must be >= 1"));
    }
    let core: BTreeSet<usize> = core.iter().copied().collect();
    if core.is_empty() {
        return Err(Error::invalid("AR core set must not be empty"));
    }
    if let Some(&bad) = core.iter().find(|&&c| c >= n) {
        return Err(Error::invalid(format!(
            "core node {bad} out of range for {n} nodes"
        )));
    }
    let mut levels = vec![core.iter().copied().collect::<Vec<_>>()];
    for p in 1..=order {
        let mut level = BTreeSet::new();
        for &k in &core {
            level.extend(neighborhood(shift, k, p)?);
        }
        if level.is_empty() {
            return Err(Error::invalid(format!(
                "level {p} of the AR scheme is empty; the core nodes are isolated"
            )));
        }
        levels.push(level.into_iter().collect());
    }
    Ok(ArScheme {
        n_nodes: n,
        core: levels[0].clone(),
        levels,
    })
}

/// Node with the most off-diagonal nonzeros in `S`, lowest index on ties.
pub fn max_degree_node(shift: &ShiftOperator) -> usize {
    let degree = |i: usize| {
        shift
            .row_nonzeros(i)
            .iter()
            .filter(|&&(j, _)| j != i)
            .count()
    };
    (0..shift.n_nodes())
        .max_by(|&a, &b| degree(a).cmp(&degree(b)).then(b.cmp(&a)))
        .unwrap_or(0)
}

/// Blocks `R_{k,q} = Φ_k R Φ_qᵀ` for `k, q = 0..P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArCovariances {
    blocks: Vec<Vec<DMatrix<f64>>>,
}

impl ArCovariances {
    /// Extracts the blocks from a covariance over `nodes` (its row order).
    /// Every node of the scheme must be present in `nodes`.
    pub fn from_covariance(r: &DMatrix<f64>, nodes: &[usize], scheme: &ArScheme) -> Result<Self> {
        if r.nrows() != nodes.len() || r.ncols() != nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                got: r.nrows(),
            });
        }
        let position = |node: usize| {
            nodes
                .iter()
                .position(|&v| v == node)
                .ok_or_else(|| Error::invalid(format!("node {node} missing from the covariance")))
        };
        let idx = scheme
            .levels()
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|&v| position(v))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let blocks = idx
            .iter()
            .map(|rows| {
                idx.iter()
                    .map(|cols| {
                        DMatrix::from_fn(rows.len(), cols.len(), |i, j| r[(rows[i], cols[j])])
                    })
                    .collect()
            })
            .collect();
        Ok(ArCovariances { blocks })
    }

    /// Blocks from a full `N × N` covariance.
    pub fn from_full(r: &CovarianceMatrix, scheme: &ArScheme) -> Result<Self> {
        let nodes: Vec<usize> = (0..r.dim()).collect();
        Self::from_covariance(&r.matrix().map(|z| z.re), &nodes, scheme)
    }

    pub fn block(&self, k: usize, q: usize) -> Result<&DMatrix<f64>> {
        self.blocks
            .get(k)
            .and_then(|row| row.get(q))
            .ok_or_else(|| Error::invalid(format!("missing covariance block R_({k},{q})")))
    }
}

/// Stacked model `G` and target `r_y = [vec(R_{0,0}); …; vec(R_{0,P})]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArSystem {
    pub model: ObservationModel,
    pub target: DVector<C64>,
}

/// Builds `G_q` with columns `vec(Φ_0 S^k Φ_kᵀ R_{k,q})`, `k = 1..P`, stacked
/// over `q = 0..P`.
pub fn build_ar_model(
    shift: &ShiftOperator,
    scheme: &ArScheme,
    cov: &ArCovariances,
) -> Result<ArSystem> {
    if shift.n_nodes() != scheme.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: scheme.n_nodes(),
            got: shift.n_nodes(),
        });
    }
    let order = scheme.order();
    let powers = ShiftPowers::new(shift, order + 1);
    let core = &scheme.levels()[0];
    let k0 = core.len();
    let rows: usize = scheme.levels().iter().map(|l| k0 * l.len()).sum();
    let mut g = DMatrix::<f64>::zeros(rows, order);
    let mut target = DVector::<f64>::zeros(rows);
    let mut row_index = Vec::with_capacity(rows);
    // Φ_0 S^k Φ_kᵀ for each k.
    let couplings: Vec<DMatrix<f64>> = (1..=order)
        .map(|k| {
            let level = &scheme.levels()[k];
            DMatrix::from_fn(k0, level.len(), |i, j| powers.get(k)[(core[i], level[j])])
        })
        .collect();
    let mut offset = 0;
    for (q, level_q) in scheme.levels().iter().enumerate() {
        let size = k0 * level_q.len();
        let r0q = cov.block(0, q)?;
        target
            .rows_mut(offset, size)
            .copy_from_slice(r0q.as_slice());
        for k in 1..=order {
            let col = &couplings[k - 1] * cov.block(k, q)?;
            g.view_mut((offset, k - 1), (size, 1))
                .copy_from_slice(col.as_slice());
        }
        for &b in level_q {
            for &a in core {
                row_index.push((a, b));
            }
        }
        offset += size;
    }
    Ok(ArSystem {
        model: ObservationModel::new(to_complex(&g), ParamKind::Autoregressive(order), row_index)?,
        target: target.map(|v| C64::new(v, 0.0)),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub params: ArParams,
    pub residual_norm: f64,
    pub condition_number: f64,
}

/// `â = G† r_y` by least squares.
pub fn estimate_ar(model: &ObservationModel, r_y: &DVector<C64>) -> Result<ArFit> {
    let est = ls_estimate(model, r_y)?;
    Ok(ArFit {
        params: ArParams::new(est.theta)?,
        residual_norm: est.residual_norm,
        condition_number: est.condition_number,
    })
}

/// Uncompressed fit of `vec(R_x)` against `vec(S^k R_x)`, `k = 1..P`.
pub fn estimate_ar_uncompressed(
    shift: &ShiftOperator,
    r_x: &CovarianceMatrix,
    order: usize,
) -> Result<ArFit> {
    let n = shift.n_nodes();
    if r_x.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r_x.dim(),
        });
    }
    let scheme = build_ar_scheme(shift, &(0..n).collect::<Vec<_>>(), order)?;
    let cov = ArCovariances::from_full(r_x, &scheme)?;
    let system = build_ar_model(shift, &scheme, &cov)?;
    estimate_ar(&system.model, &system.target)
}

/// `p_n = 1 / |1 − Σ_k a_k λ_n^k|²`.
pub fn ar_power_spectrum(eigvals: &DVector<f64>, params: &ArParams) -> Result<PowerSpectrum> {
    let mut p = DVector::zeros(eigvals.len());
    for (n, &lambda) in eigvals.iter().enumerate() {
        let mut pow = 1.0;
        let mut denom = 1.0;
        for &ak in params.a().iter() {
            pow *= lambda;
            denom -= ak * pow;
        }
        if denom.abs() < POLE_TOL {
            return Err(Error::Singular(format!(
                "AR spectrum has a pole at eigenvalue {lambda}"
            )));
        }
        p[n] = 1.0 / (denom * denom);
    }
    Ok(PowerSpectrum(p))
}

/// `(I − A)⁻¹`, failing when `I − A` is numerically singular.
fn ar_filter_inverse(shift: &ShiftOperator, params: &ArParams) -> Result<DMatrix<f64>> {
    let n = shift.n_nodes();
    let m = DMatrix::identity(n, n) - params.polynomial(shift);
    let rcond = {
        let sv = m.singular_values();
        sv.min() / sv.max()
    };
    if rcond.is_nan() || rcond <= 1e-12 {
        return Err(Error::Singular(
            "I − Σ a_k S^k is singular for these AR coefficients".into(),
        ));
    }
    m.try_inverse()
        .ok_or_else(|| Error::Singular("I − Σ a_k S^k is not invertible".into()))
}

/// `R_x = (I − A)⁻¹ (I − A)⁻ᵀ` for unit-variance white innovations.
pub fn ar_true_covariance(shift: &ShiftOperator, params: &ArParams) -> Result<CovarianceMatrix> {
    let inv = ar_filter_inverse(shift, params)?;
    let r = &inv * inv.transpose();
    let r = (&r + r.transpose()) * 0.5;
    CovarianceMatrix::from_real(r)
}

/// Realizations of `x = A x + n` with the innovations that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct ArSignals {
    pub x: DMatrix<f64>,
    pub noise: DMatrix<f64>,
}

/// `N × N_s` AR snapshots driven by standard normal innovations.
pub fn generate_ar_signals(
    shift: &ShiftOperator,
    params: &ArParams,
    n_snapshots: usize,
    seed: u64,
) -> Result<ArSignals> {
    if n_snapshots == 0 {
        return Err(Error::invalid("n_snapshots must be >= 1"));
    }
    let inv = ar_filter_inverse(shift, params)?;
    let noise = white_noise(shift.n_nodes(), n_snapshots, seed);
    Ok(ArSignals {
        x: inv * &noise,
        noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_shift, generators, ShiftKind};

    fn adjacency(g: crate::graph::Graph) -> ShiftOperator {
        build_shift(&g, ShiftKind::Adjacency).unwrap()
    }

    #[test]
    fn neighborhood_examples() {
        let s = adjacency(generators::path(3).unwrap());
        assert_eq!(neighborhood(&s, 1, 1).unwrap(), vec![0, 2]);
        assert_eq!(neighborhood(&s, 1, 2).unwrap(), vec![1]);
        let square = s.matrix() * s.matrix();
        assert_eq!(
            square,
            DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 1.0, 0.0, 1.0])
        );
        let l = build_shift(&generators::path(3).unwrap(), ShiftKind::Laplacian).unwrap();
        assert!(neighborhood(&l, 0, 1).unwrap().contains(&0));
        assert!(neighborhood(&s, 3, 1).is_err());
    }

    #[test]
    fn scheme_examples() {
        let s = adjacency(generators::cycle(10).unwrap());
        let scheme = build_ar_scheme(&s, &[0], 2).unwrap();
        assert_eq!(scheme.levels(), &[vec![0], vec![1, 9], vec![0, 2, 8]]);
        assert_eq!(scheme.level_sizes(), vec![1, 2, 3]);
        assert_eq!(scheme.total_observations(), 6);
        assert_eq!(scheme.distinct_nodes(), vec![0, 1, 2, 8, 9]);

        let all = build_ar_scheme(&s, &(0..10).collect::<Vec<_>>(), 1).unwrap();
        assert_eq!(all.distinct_nodes().len(), 10);

        let star = adjacency(generators::star(7).unwrap());
        let hub = max_degree_node(&star);
        assert_eq!(hub, 0);
        let scheme = build_ar_scheme(&star, &[hub], 1).unwrap();
        assert_eq!(scheme.level_sizes()[1], 6);
    }

    #[test]
    fn max_degree_ties_go_to_lowest_index() {
        let s = adjacency(generators::cycle(6).unwrap());
        assert_eq!(max_degree_node(&s), 0);
        let p = adjacency(generators::path(4).unwrap());
        assert_eq!(max_degree_node(&p), 1);
    }

    #[test]
    fn single_column_structure() {
        let s = adjacency(generators::cycle(8).unwrap());
        let scheme = build_ar_scheme(&s, &[0, 3], 1).unwrap();
        let r = CovarianceMatrix::from_real(DMatrix::identity(8, 8)).unwrap();
        let cov = ArCovariances::from_full(&r, &scheme).unwrap();
        let sys = build_ar_model(&s, &scheme, &cov).unwrap();
        assert_eq!(sys.model.n_params(), 1);
        assert_eq!(sys.model.n_rows(), 2 * 2 + 2 * scheme.level_sizes()[1]);

        let zero = CovarianceMatrix::from_real(DMatrix::zeros(8, 8)).unwrap();
        let cov = ArCovariances::from_full(&zero, &scheme).unwrap();
        let sys = build_ar_model(&s, &scheme, &cov).unwrap();
        assert!(sys.model.matrix().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn estimate_on_embedded_column() {
        let g = DMatrix::from_column_slice(3, 1, &[0.0, 1.0, 0.0]);
        let model = ObservationModel::new(
            to_complex(&g),
            ParamKind::Autoregressive(1),
            vec![(0, 0); 3],
        )
        .unwrap();
        let r = DVector::from_vec(vec![0.0, 2.0, 0.0]).map(|v| C64::new(v, 0.0));
        let fit = estimate_ar(&model, &r).unwrap();
        assert!((fit.params.a()[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn uncompressed_on_identity_covariance() {
        let s = adjacency(generators::cycle(7).unwrap());
        let r = CovarianceMatrix::from_real(DMatrix::identity(7, 7)).unwrap();
        let fit = estimate_ar_uncompressed(&s, &r, 1).unwrap();
        assert!(fit.params.a()[0].abs() < 1e-14);
    }

    #[test]
    fn full_core_matches_uncompressed() {
        let s = adjacency(generators::cycle(12).unwrap());
        let params = ArParams::from_slice(&[0.2, -0.05]).unwrap();
        let r = ar_true_covariance(&s, &params).unwrap();
        let scheme = build_ar_scheme(&s, &(0..12).collect::<Vec<_>>(), 2).unwrap();
        let cov = ArCovariances::from_full(&r, &scheme).unwrap();
        let sys = build_ar_model(&s, &scheme, &cov).unwrap();
        let a = estimate_ar(&sys.model, &sys.target).unwrap();
        let b = estimate_ar_uncompressed(&s, &r, 2).unwrap();
        assert!((a.params.a() - b.params.a()).norm() < 1e-12);
    }

    #[test]
    fn normal_equations_of_full_observation() {
        // With Φ_p = I, the stacked system has the normal equations of the
        // fit of R against S^k R, taken once per level.
        let s = adjacency(generators::cycle(9).unwrap());
        let params = ArParams::from_slice(&[0.3]).unwrap();
        let r = ar_true_covariance(&s, &params)
            .unwrap()
            .matrix()
            .map(|z| z.re);
        let sr = s.matrix() * &r;
        let direct = sr.dot(&r) / sr.dot(&sr);
        let fit =
            estimate_ar_uncompressed(&s, &CovarianceMatrix::from_real(r).unwrap(), 1).unwrap();
        assert!((fit.params.a()[0] - direct).abs() < 1e-12);
    }

    #[test]
    fn innovations_are_recovered_per_realization() {
        let s = adjacency(generators::cycle(10).unwrap());
        let params = ArParams::from_slice(&[0.25, 0.04]).unwrap();
        let sig = generate_ar_signals(&s, &params, 5, 42).unwrap();
        let scheme = build_ar_scheme(&s, &[max_degree_node(&s)], 2).unwrap();
        let powers = ShiftPowers::new(&s, 3);
        let core = scheme.core();
        for t in 0..5 {
            let x = sig.x.column(t);
            for (i, &c) in core.iter().enumerate() {
                let mut y0 = x[c];
                for k in 1..=2 {
                    for &l in &scheme.levels()[k] {
                        y0 -= params.a()[k - 1] * powers.get(k)[(c, l)] * x[l];
                    }
                }
                assert!((y0 - sig.noise[(core[i], t)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spectrum_examples() {
        let ev = DVector::from_vec(vec![1.0, -1.0, 0.5]);
        let white = ar_power_spectrum(&ev, &ArParams::from_slice(&[0.0]).unwrap()).unwrap();
        assert!(white.values().iter().all(|&v| v == 1.0));
        let p = ar_power_spectrum(&ev, &ArParams::from_slice(&[0.5]).unwrap()).unwrap();
        assert!((p.values()[0] - 4.0).abs() < 1e-12);
        let pole = ar_power_spectrum(&ev, &ArParams::from_slice(&[2.0]).unwrap());
        assert!(matches!(pole, Err(Error::Singular(msg)) if msg.contains("0.5")));
    }

    #[test]
    fn true_covariance_matches_spectrum() {
        let s = adjacency(generators::cycle(8).unwrap());
        let params = ArParams::from_slice(&[0.2]).unwrap();
        let r = ar_true_covariance(&s, &params).unwrap();
        let b = s.basis().unwrap();
        let p = crate::stationary::power_spectrum_from_cov(b, &r).unwrap();
        let q = ar_power_spectrum(b.eigvals(), &params).unwrap();
        assert!((p.values() - q.values()).amax() < 1e-12);
        assert!(ar_true_covariance(&s, &ArParams::from_slice(&[0.5]).unwrap()).is_err());
    }
}
