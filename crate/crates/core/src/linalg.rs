//! Small dense linear-algebra helpers shared by the model, design and
//! estimation modules.

use nalgebra::{Cholesky, ColPivQR, DMatrix, DVector, SVD};

use crate::error::{Error, Result};

pub type C64 = nalgebra::Complex<f64>;

pub(crate) fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

pub(crate) fn is_real(m: &DMatrix<C64>) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub(crate) fn is_real_vec(v: &DVector<C64>) -> bool {
    v.iter().all(|z| z.im == 0.0)
}

pub(crate) fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub(crate) fn max_abs_c(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.norm()))
}

/// Stacks a complex matrix as `[Re(A); Im(A)]`, or returns `Re(A)` when the
/// imaginary part is identically zero.
pub fn real_stack(a: &DMatrix<C64>) -> DMatrix<f64> {
    let re = a.map(|z| z.re);
    if is_real(a) {
        return re;
    }
    let im = a.map(|z| z.im);
    let (rows, cols) = a.shape();
    let mut out = DMatrix::zeros(2 * rows, cols);
    out.rows_mut(0, rows).copy_from(&re);
    out.rows_mut(rows, rows).copy_from(&im);
    out
}

/// Real-stacks a complex system `A θ = b` with real unknowns θ.
pub fn real_stack_system(a: &DMatrix<C64>, b: &DVector<C64>) -> (DMatrix<f64>, DVector<f64>) {
    let rows = a.nrows();
    if is_real(a) && is_real_vec(b) {
        return (a.map(|z| z.re), b.map(|z| z.re));
    }
    let cols = a.ncols();
    let mut m = DMatrix::zeros(2 * rows, cols);
    let mut v = DVector::zeros(2 * rows);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = a[(i, j)].re;
            m[(rows + i, j)] = a[(i, j)].im;
        }
        v[i] = b[i].re;
        v[rows + i] = b[i].im;
    }
    (m, v)
}

/// Singular-value summary of a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankInfo {
    pub rank: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub condition_number: f64,
}

/// Numerical rank with threshold `max(tol_rows, cols) · eps · σ_max`.
pub fn numerical_rank(a: &DMatrix<f64>, tol_rows: usize) -> RankInfo {
    let cols = a.ncols();
    if a.nrows() == 0 || cols == 0 {
        return RankInfo {
            rank: 0,
            sigma_max: 0.0,
            sigma_min: 0.0,
            condition_number: f64::INFINITY,
        };
    }
    let sv = SVD::new(a.clone(), false, false).singular_values;
    let sigma_max = sv.iter().cloned().fold(0.0, f64::max);
    let tol = tol_rows.max(cols) as f64 * f64::EPSILON * sigma_max;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    // A wide matrix has zero singular values that the thin SVD omits.
    let sigma_min = if sv.len() < cols {
        0.0
    } else {
        sv.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let condition_number = if sigma_min > 0.0 {
        sigma_max / sigma_min
    } else {
        f64::INFINITY
    };
    RankInfo {
        rank,
        sigma_max,
        sigma_min,
        condition_number,
    }
}

/// Least-squares solution of a full-column-rank tall system via a
/// column-pivoted Householder QR factorization.
pub fn lstsq_full_rank(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, cols) = a.shape();
    if b.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            got: b.len(),
        });
    }
    if rows < cols {
        return Err(Error::RankDeficient { rank: rows, cols });
    }
    let qr = ColPivQR::new(a.clone());
    let mut rhs = b.clone();
    qr.q_tr_mul(&mut rhs);
    let r = qr.r();
    let r_top = r.view((0, 0), (cols, cols));
    let mut x = DVector::from_iterator(cols, rhs.iter().take(cols).cloned());
    if !r_top.solve_upper_triangular_mut(&mut x) {
        return Err(Error::Singular("triangular factor has a zero pivot".into()));
    }
    qr.p().inv_permute_rows(&mut x);
    Ok(x)
}

/// Inverse of a Hermitian positive definite matrix via Cholesky.
pub(crate) fn hpd_inverse(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    Cholesky::new(m.clone())
        .map(|c| c.inverse())
        .ok_or_else(|| Error::Singular("matrix is not positive definite".into()))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_eigenvalue_hermitian(m: &DMatrix<C64>) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    eig.eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Column-major vectorization.
pub fn vec_col_major<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> DVector<T> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_col_major`] for a `rows × cols` matrix.
pub fn unvec<T: nalgebra::Scalar + Copy>(
    v: &DVector<T>,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<T>> {
    if v.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            got: v.len(),
        });
    }
    Ok(DMatrix::from_column_slice(rows, cols, v.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0, 3.0, -1.0]);
        let x = DVector::from_vec(vec![0.5, -2.0]);
        let b = &a * &x;
        let got = lstsq_full_rank(&a, &b).unwrap();
        assert!((got - x).norm() < 1e-12);
    }

    #[test]
    fn lstsq_matches_normal_equations() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 2.0]);
        let got = lstsq_full_rank(&a, &b).unwrap();
        let normal = (a.transpose() * &a).try_inverse().unwrap() * a.transpose() * &b;
        assert!((got - normal).norm() < 1e-12);
    }

    #[test]
    fn rank_of_wide_and_deficient_matrices() {
        let wide = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]);
        let info = numerical_rank(&wide, 1);
        assert_eq!(info.rank, 1);
        assert_eq!(info.sigma_min, 0.0);
        let deficient = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert_eq!(numerical_rank(&deficient, 3).rank, 1);
    }

    #[test]
    fn real_stack_drops_zero_imaginary_part() {
        let a = to_complex(&DMatrix::identity(2, 2));
        assert_eq!(real_stack(&a).nrows(), 2);
        let mut b = a.clone();
        b[(0, 1)] = C64::new(0.0, 1.0);
        let s = real_stack(&b);
        assert_eq!(s.nrows(), 4);
        assert_eq!(s[(2, 1)], 1.0);
    }

    #[test]
    fn vec_roundtrip() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let v = vec_col_major(&m);
        assert_eq!(v.as_slice(), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvec(&v, 2, 2).unwrap(), m);
    }
}
