//! Finite-snapshot accuracy of LS and one-step WLS against the Cramér-Rao
//! bound, for full and half-compressed observation of a sensor graph.
//!
//! `cargo run --release --example finite_sample_crb`

use graphcov::design::{greedy_design, DesignProblem};
use graphcov::estimators::{crb, fisher_info, ls_estimate, wls_estimate, NU_REAL};
use graphcov::graph::{build_shift, frequency_response, generators, GraphFilter, ShiftKind};
use graphcov::models::{build_psi_spectral, compress_model, vectorize_compressed_cov, Subsampler};
use graphcov::stationary::{generate_signals, sample_covariance_of, true_covariance};
use nalgebra::DMatrix;

fn main() -> graphcov::Result<()> {
    let n = 30;
    let trials = 200;
    let shift = build_shift(
        &generators::sensor(n, generators::SENSOR_DEFAULT_K, 7)?,
        ShiftKind::Laplacian,
    )?;
    let basis = shift.basis()?;
    let filter = GraphFilter::new(vec![1.0, -0.8 / basis.eigvals().max()])?;
    let p = frequency_response(basis.eigvals(), &filter).map(|v| v * v);
    let psi = build_psi_spectral(basis);
    let samplers = [
        ("full", Subsampler::all(n)?),
        (
            "K = 15",
            greedy_design(&DesignProblem::new(&psi, 15))?.sampler,
        ),
    ];
    let r_x = true_covariance(&shift, &filter);
    let m = n as f64;

    println!(
        "{:<8} {:>6} {:>12} {:>12} {:>12}",
        "sampler", "N_s", "MSE LS", "MSE WLS", "tr(CRB)/M"
    );
    for (label, sampler) in &samplers {
        let model = compress_model(&psi, sampler)?;
        let r_y = r_x.compress(sampler)?;
        for ns in [100, 1_000] {
            let bound = crb(&fisher_info(&model, &r_y, ns, NU_REAL)?).trace() / m;
            let (mut ls_err, mut wls_err) = (0.0, 0.0);
            for t in 0..trials {
                let x = generate_signals(&shift, &filter, ns, t as u64)?;
                let y = DMatrix::from_fn(sampler.k(), ns, |i, k| x[(sampler.selected()[i], k)]);
                let r_hat = sample_covariance_of(&y);
                let v = vectorize_compressed_cov(&r_hat);
                ls_err += (ls_estimate(&model, &v)?.theta - &p).norm_squared();
                wls_err += (wls_estimate(&model, &v, &r_hat)?.theta - &p).norm_squared();
            }
            let scale = trials as f64 * m;
            println!(
                "{label:<8} {ns:>6} {:>12.4e} {:>12.4e} {bound:>12.4e}",
                ls_err / scale,
                wls_err / scale
            );
        }
    }
    Ok(())
}
