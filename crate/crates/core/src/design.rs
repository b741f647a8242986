//! Sampler design: validity of a node selection, the log-det set function
//! with its greedy maximizer, the frame-potential alternative, and sparse
//! rulers for circulant graphs.
//!
//! For a Hermitian-structured model (`ψ_{b,a} = conj(ψ_{a,b})`, true of every
//! model of a Hermitian covariance with real parameters), the Gram matrix
//! `T(𝒳) = Σ_{(a,b)∈𝒳×𝒳} ψ_{a,b} ψ_{a,b}ᴴ` is real and equals
//! `Σ (Re ψ_{a,b} Re ψ_{a,b}ᵀ + Im ψ_{a,b} Im ψ_{a,b}ᵀ)`. All design
//! computations use these real rank-one terms.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::RankInfo;
use crate::models::{compress_model, Psi, Subsampler};

/// Default upper bound on `N` for [`minimal_sparse_ruler`]. The search
/// grows roughly 15× per extra mark; `N = 50` takes a few seconds.
pub const RULER_SEARCH_LIMIT: usize = 50;
/// Hard bound imposed by the 128-bit difference set.
pub const RULER_HARD_LIMIT: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DesignCost {
    #[default]
    LogDet,
    FramePotential,
}

#[derive(Debug, Clone)]
pub struct DesignProblem<'a> {
    pub psi: &'a Psi,
    pub k: usize,
    pub epsilon: f64,
    pub cost: DesignCost,
}

impl<'a> DesignProblem<'a> {
    /// Log-det problem with the default loading [`default_epsilon`].
    pub fn new(psi: &'a Psi, k: usize) -> Self {
        DesignProblem {
            psi,
            k,
            epsilon: default_epsilon(psi),
            cost: DesignCost::LogDet,
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_cost(mut self, cost: DesignCost) -> Self {
        self.cost = cost;
        self
    }
}

/// `ε = 1e-6 · (1 + mean diag(ΨᴴΨ))`.
pub fn default_epsilon(psi: &Psi) -> f64 {
    let m = psi.n_params().max(1);
    let diag: f64 = psi.matrix().iter().map(|z| z.norm_sqr()).sum();
    1e-6 * (1.0 + diag / m as f64)
}

/// Outcome of a design run.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub sampler: Subsampler,
    /// Objective after each greedy step: `f` for log-det (increasing), the
    /// frame potential for the removal strategy (decreasing).
    pub objective_trace: Vec<f64>,
}

/// Real rank-one terms contributed by the pair `(a, b)`.
fn pair_terms(psi: &Psi, a: usize, b: usize, out: &mut Vec<DVector<f64>>) {
    let m = psi.n_params();
    let re = DVector::from_fn(m, |j, _| psi.entry(a, b, j).re);
    let im = DVector::from_fn(m, |j, _| psi.entry(a, b, j).im);
    out.push(re);
    if im.iter().any(|&v| v != 0.0) {
        out.push(im);
    }
}

/// Rank-one terms added when node `s` joins `selected` (pairs `(s, j)`,
/// `(j, s)` for selected `j`, and `(s, s)`).
fn node_terms(psi: &Psi, selected: &[usize], s: usize) -> Vec<DVector<f64>> {
    let mut out = Vec::with_capacity(4 * selected.len() + 2);
    for &j in selected {
        pair_terms(psi, s, j, &mut out);
        pair_terms(psi, j, s, &mut out);
    }
    pair_terms(psi, s, s, &mut out);
    out
}

fn check_mask(psi: &Psi, w: &[bool]) -> Result<Vec<usize>> {
    if w.len() != psi.n_nodes() {
        return Err(Error::DimensionMismatch {
            expected: psi.n_nodes(),
            got: w.len(),
        });
    }
    Ok(w.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i)
        .collect())
}

fn check_indices(psi: &Psi, selected: &[usize]) -> Result<()> {
    let n = psi.n_nodes();
    let mut seen = vec![false; n];
    for &s in selected {
        if s >= n || seen[s] {
            return Err(Error::invalid(format!(
                "invalid or repeated node {s} in the selection"
            )));
        }
        seen[s] = true;
    }
    Ok(())
}

fn gram_of(psi: &Psi, selected: &[usize]) -> DMatrix<f64> {
    let m = psi.n_params();
    let mut t = DMatrix::zeros(m, m);
    let mut terms = Vec::new();
    for &b in selected {
        for &a in selected {
            terms.clear();
            pair_terms(psi, a, b, &mut terms);
            for v in &terms {
                t.ger(1.0, v, v, 1.0);
            }
        }
    }
    t
}

/// `T(w) = Σ_{(a,b)∈𝒳×𝒳} ψ_{a,b} ψ_{a,b}ᴴ`, returned as its real part.
pub fn gram(psi: &Psi, w: &[bool]) -> Result<DMatrix<f64>> {
    Ok(gram_of(psi, &check_mask(psi, w)?))
}

/// `f(𝒳) = log det(T(𝒳) + εI) − M log ε`.
pub fn set_objective(psi: &Psi, selected: &[usize], epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    check_indices(psi, selected)?;
    if selected.is_empty() {
        return Ok(0.0);
    }
    let m = psi.n_params();
    let loaded = gram_of(psi, selected) + DMatrix::identity(m, m) * epsilon;
    let chol = Cholesky::new(loaded)
        .ok_or_else(|| Error::Singular("loaded Gram matrix is not positive definite".into()))?;
    let root = epsilon.sqrt();
    Ok(chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|&l| 2.0 * (l / root).ln())
        .sum())
}

/// `log det(I + Wᵀ W)` with `W = L⁻¹ V`.
fn logdet_gain(l: &DMatrix<f64>, terms: &[DVector<f64>]) -> f64 {
    if terms.is_empty() {
        return 0.0;
    }
    let v = DMatrix::from_columns(terms);
    let w = l
        .solve_lower_triangular(&v)
        .expect("Cholesky factor has a positive diagonal");
    let r = terms.len();
    let inner = w.transpose() * &w + DMatrix::identity(r, r);
    match Cholesky::new(inner) {
        Some(c) => c.l_dirty().diagonal().iter().map(|&d| 2.0 * d.ln()).sum(),
        None => f64::NEG_INFINITY,
    }
}

/// Index of the maximum, ties (within a relative `1e-12`) to the lowest index.
fn argmax_lowest(values: &[(usize, f64)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(i, v) in values {
        match best {
            None => best = Some((i, v)),
            Some((_, b)) if v > b + 1e-12 * b.abs().max(1.0) => best = Some((i, v)),
            _ => {}
        }
    }
    best
}

fn validate_problem(problem: &DesignProblem<'_>) -> Result<()> {
    let n = problem.psi.n_nodes();
    if problem.k == 0 || problem.k > n {
        return Err(Error::invalid(format!(
            "design budget must satisfy 1 <= K <= N = {n}, got {}",
            problem.k
        )));
    }
    if problem.epsilon.is_nan() || problem.epsilon <= 0.0 {
        return Err(Error::invalid("epsilon must be positive"));
    }
    Ok(())
}

/// Greedy design: maximizes `f` by augmentation for [`DesignCost::LogDet`],
/// minimizes the frame potential by removal for [`DesignCost::FramePotential`].
pub fn greedy_design(problem: &DesignProblem<'_>) -> Result<Design> {
    validate_problem(problem)?;
    match problem.cost {
        DesignCost::LogDet => greedy_logdet(problem),
        DesignCost::FramePotential => greedy_frame_potential(problem),
    }
}

fn greedy_logdet(problem: &DesignProblem<'_>) -> Result<Design> {
    let psi = problem.psi;
    let n = psi.n_nodes();
    let m = psi.n_params();
    let mut chol: Cholesky<f64, Dyn> = Cholesky::new(DMatrix::identity(m, m) * problem.epsilon)
        .ok_or_else(|| Error::Singular("epsilon loading is not positive definite".into()))?;
    let mut selected: Vec<usize> = Vec::with_capacity(problem.k);
    let mut in_set = vec![false; n];
    let mut trace = Vec::with_capacity(problem.k);
    let mut value = 0.0;
    for _ in 0..problem.k {
        let l = chol.l_dirty().clone();
        let gains: Vec<(usize, f64)> = (0..n)
            .into_par_iter()
            .filter(|&s| !in_set[s])
            .map(|s| (s, logdet_gain(&l, &node_terms(psi, &selected, s))))
            .collect();
        let (best, gain) = argmax_lowest(&gains).expect("K <= N leaves a candidate");
        for v in node_terms(psi, &selected, best) {
            chol.rank_one_update(&v, 1.0);
        }
        selected.push(best);
        in_set[best] = true;
        value += gain;
        trace.push(value);
    }
    Ok(Design {
        sampler: Subsampler::new(n, selected)?,
        objective_trace: trace,
    })
}

fn greedy_frame_potential(problem: &DesignProblem<'_>) -> Result<Design> {
    let psi = problem.psi;
    let n = psi.n_nodes();
    let mut selected: Vec<usize> = (0..n).collect();
    let mut t = gram_of(psi, &selected);
    let mut trace = Vec::new();
    while selected.len() > problem.k {
        let scores: Vec<(usize, f64)> = selected
            .par_iter()
            .map(|&s| {
                let others: Vec<usize> = selected.iter().copied().filter(|&j| j != s).collect();
                let d = removal_term(psi, &others, s);
                (s, -(&t - d).norm_squared())
            })
            .collect();
        let (worst, _) = argmax_lowest(&scores).expect("non-empty selection");
        selected.retain(|&j| j != worst);
        t -= removal_term(psi, &selected, worst);
        trace.push(t.norm_squared());
    }
    Ok(Design {
        sampler: Subsampler::new(n, selected)?,
        objective_trace: trace,
    })
}

/// Contribution of node `s` to `T` given the other selected nodes.
fn removal_term(psi: &Psi, others: &[usize], s: usize) -> DMatrix<f64> {
    let m = psi.n_params();
    let mut d = DMatrix::zeros(m, m);
    for v in node_terms(psi, others, s) {
        d.ger(1.0, &v, &v, 1.0);
    }
    d
}

/// `tr(Tᴴ T) = ‖T(w)‖_F²`.
pub fn frame_potential(psi: &Psi, w: &[bool]) -> Result<f64> {
    Ok(gram(psi, w)?.norm_squared())
}

/// Rank test of the compressed model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    /// Compressed model has full column rank.
    pub valid: bool,
    pub rank: usize,
    pub min_singular: f64,
    /// Necessary condition `K² ≥ M`.
    pub feasible: bool,
    pub rank_info: RankInfo,
}

/// Numerical rank of `(Φ ⊗ Φ) Ψ` with threshold `max(K², M)·eps·σ_max`.
pub fn check_valid(psi: &Psi, sampler: &Subsampler) -> Result<Validity> {
    let model = compress_model(psi, sampler)?;
    let info = model.rank_info();
    let m = psi.n_params();
    let feasible = sampler.k() * sampler.k() >= m;
    Ok(Validity {
        valid: feasible && info.rank == m,
        rank: info.rank,
        min_singular: info.sigma_min,
        feasible,
        rank_info: info,
    })
}

/// Smallest `K` for which the greedy log-det design is valid, with that design.
pub fn smallest_valid_greedy(psi: &Psi) -> Result<(Design, Validity)> {
    let n = psi.n_nodes();
    let k_min = (1..=n).find(|k| k * k >= psi.n_params()).unwrap_or(n);
    for k in k_min..=n {
        let design = greedy_design(&DesignProblem::new(psi, k))?;
        let validity = check_valid(psi, &design.sampler)?;
        if validity.valid {
            return Ok((design, validity));
        }
    }
    Err(Error::RankDeficient {
        rank: check_valid(psi, &Subsampler::all(n)?)?.rank,
        cols: psi.n_params(),
    })
}

/// Sorted, distinct ruler marks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RulerSet {
    marks: Vec<usize>,
}

impl RulerSet {
    pub fn new(mut marks: Vec<usize>) -> Self {
        marks.sort_unstable();
        marks.dedup();
        RulerSet { marks }
    }

    pub fn marks(&self) -> &[usize] {
        &self.marks
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn to_sampler(&self, n: usize) -> Result<Subsampler> {
        Subsampler::new(n, self.marks.clone())
    }
}

/// True iff every `m ∈ {0, …, N−1}` is a difference of two marks in `[0, N−1]`.
pub fn is_sparse_ruler(marks: &RulerSet, n: usize) -> bool {
    if n == 0 || marks.is_empty() || marks.marks().iter().any(|&m| m >= n) {
        return false;
    }
    let mut covered = vec![false; n];
    let ms = marks.marks();
    for (i, &a) in ms.iter().enumerate() {
        for &b in &ms[i..] {
            covered[b - a] = true;
        }
    }
    covered.into_iter().all(|c| c)
}

/// Lexicographically smallest minimal sparse ruler of length `N − 1`, for
/// `2 ≤ N ≤` [`RULER_SEARCH_LIMIT`].
pub fn minimal_sparse_ruler(n: usize) -> Result<RulerSet> {
    minimal_sparse_ruler_with_limit(n, RULER_SEARCH_LIMIT)
}

/// As [`minimal_sparse_ruler`] with a caller-chosen limit (at most
/// [`RULER_HARD_LIMIT`]).
pub fn minimal_sparse_ruler_with_limit(n: usize, limit: usize) -> Result<RulerSet> {
    if n < 2 {
        return Err(Error::invalid("sparse ruler needs N >= 2"));
    }
    let limit = limit.min(RULER_HARD_LIMIT);
    if n > limit {
        return Err(Error::Capability(format!(
            "minimal sparse ruler search is limited to N <= {limit}; \
             check a known ruler with is_sparse_ruler instead"
        )));
    }
    if n == 2 {
        return Ok(RulerSet::new(vec![0, 1]));
    }
    let mut search = RulerSearch::new(n);
    for extra in 0..=(n - 2) {
        if let Some(marks) = search.run(extra) {
            return Ok(RulerSet::new(marks));
        }
    }
    unreachable!("the full set {{0, …, N−1}} is a ruler")
}

/// Depth-first search over interior marks in increasing order, so the first
/// ruler found at a given cardinality is the lexicographically smallest.
struct RulerSearch {
    n: usize,
    full: u128,
    marks: Vec<usize>,
}

impl RulerSearch {
    fn new(n: usize) -> Self {
        let full = if n == 128 {
            u128::MAX
        } else {
            (1u128 << n) - 1
        };
        RulerSearch {
            n,
            full,
            marks: Vec::new(),
        }
    }

    fn run(&mut self, extra: usize) -> Option<Vec<usize>> {
        self.marks = vec![0, self.n - 1];
        let covered = 1u128 | (1u128 << (self.n - 1));
        let mark_bits = 1u128 | (1u128 << (self.n - 1));
        if self.dfs(extra, 0, covered, mark_bits) {
            let mut out = self.marks.clone();
            out.sort_unstable();
            Some(out)
        } else {
            None
        }
    }

    /// Differences realized by a new mark `x` against the marks in `mark_bits`.
    fn diffs(&self, x: usize, mark_bits: u128) -> u128 {
        // Marks below x give x − e; marks above x give e − x.
        let below = mark_bits & ((1u128 << x) - 1);
        let above = mark_bits >> (x + 1);
        let reversed_below = reverse_low_bits(below, x);
        reversed_below | (above << 1)
    }

    fn dfs(&mut self, remaining: usize, last: usize, covered: u128, mark_bits: u128) -> bool {
        if covered == self.full {
            return true;
        }
        if remaining == 0 {
            return false;
        }
        let uncovered = (self.full & !covered).count_ones() as usize;
        let placed = self.marks.len();
        if remaining * placed + remaining * (remaining - 1) / 2 < uncovered {
            return false;
        }
        if !self.reachable(covered, mark_bits, last) {
            return false;
        }
        let top = self.n - 1;
        for x in (last + 1)..top {
            // Leave room for the remaining marks.
            if top - x < remaining {
                break;
            }
            let add = self.diffs(x, mark_bits);
            self.marks.push(x);
            if self.dfs(remaining - 1, x, covered | add, mark_bits | (1u128 << x)) {
                return true;
            }
            self.marks.pop();
        }
        false
    }

    /// Every uncovered difference `d` must be realizable by a pair with at
    /// least one mark in `(last, N−1)`: either two new marks or a new mark
    /// against an existing one (`d < N−1−last`), or a new mark `e + d` with
    /// `e` an existing mark other than `N−1`.
    fn reachable(&self, covered: u128, mark_bits: u128, last: usize) -> bool {
        let top = self.n - 1;
        let lower_marks = mark_bits & !(1u128 << top);
        let mut missing = self.full & !covered;
        while missing != 0 {
            let d = missing.trailing_zeros() as usize;
            missing &= missing - 1;
            if d + last < top {
                continue;
            }
            // Need e with last < e + d < top, i.e. e in (last − d, top − d).
            let lo = (last + 1).saturating_sub(d);
            let hi = top.saturating_sub(d);
            if hi <= lo || lower_marks & range_mask(lo, hi) == 0 {
                return false;
            }
        }
        true
    }
}

/// Bits `lo..hi`.
fn range_mask(lo: usize, hi: usize) -> u128 {
    let upto = |k: usize| {
        if k >= 128 {
            u128::MAX
        } else {
            (1u128 << k) - 1
        }
    };
    upto(hi) & !upto(lo)
}

/// Maps bit `e` (for `e < x`) to bit `x − e`.
fn reverse_low_bits(bits: u128, x: usize) -> u128 {
    if x == 0 {
        return 0;
    }
    // Shift so bit e lands at 127 − (x − 1 − e), reverse, then bit x − e remains.
    (bits << (128 - x)).reverse_bits() << 1
}
