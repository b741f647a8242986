//! Moving-average parameterization: the spectrum is a degree-(Q−1) polynomial
//! of the eigenvalues, so far fewer nodes suffice than for the
//! nonparametric model.
//!
//! `cargo run --release --example moving_average`

use graphcov::design::smallest_valid_greedy;
use graphcov::estimators::ls_estimate;
use graphcov::graph::{build_shift, frequency_response, generators, GraphFilter, ShiftKind};
use graphcov::models::{
    build_psi_ma, build_psi_spectral, compress_model, default_ma_order, ma_b_from_h,
    vectorize_compressed_cov, MaParams,
};
use graphcov::stationary::{generate_signals, sample_covariance_of, true_covariance};
use nalgebra::DMatrix;

fn main() -> graphcov::Result<()> {
    let n = 30;
    let shift = build_shift(
        &generators::sensor(n, generators::SENSOR_DEFAULT_K, 1)?,
        ShiftKind::Laplacian,
    )?;
    let eig = shift.basis()?.eigvals().clone();
    let lmax = eig.max();
    let filter = GraphFilter::new(vec![1.0, -1.2 / lmax, 0.3 / (lmax * lmax)])?;
    let q = default_ma_order(filter.len(), n);
    let b = ma_b_from_h(&filter);
    let p = frequency_response(&eig, &filter).map(|v| v * v);

    let psi_ma = build_psi_ma(&shift, q)?;
    let (ma_design, _) = smallest_valid_greedy(&psi_ma)?;
    let (np_design, _) = smallest_valid_greedy(&build_psi_spectral(shift.basis()?))?;
    println!(
        "Q = {q}: MA needs {} nodes, the nonparametric model {}",
        ma_design.sampler.k(),
        np_design.sampler.k()
    );

    let sampler = &ma_design.sampler;
    let model = compress_model(&psi_ma, sampler)?;
    let r_y = true_covariance(&shift, &filter).compress(sampler)?;
    let exact = ls_estimate(&model, &vectorize_compressed_cov(&r_y))?;
    println!("b       = {:.5?}", b.b().as_slice());
    println!(
        "b̂ exact = {:.5?}  (cond {:.2e})",
        exact.theta.as_slice(),
        exact.condition_number
    );

    for ns in [1_000, 100_000] {
        let x = generate_signals(&shift, &filter, ns, 3)?;
        let y = DMatrix::from_fn(sampler.k(), ns, |i, t| x[(sampler.selected()[i], t)]);
        let est = ls_estimate(&model, &vectorize_compressed_cov(&sample_covariance_of(&y)))?;
        let p_hat = MaParams::new(est.theta)?.spectrum(&eig);
        println!(
            "N_s = {ns:>6}: spectrum relative error {:.3}",
            (&p_hat - &p).norm() / p.norm()
        );
    }
    Ok(())
}
