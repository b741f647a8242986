//! Autoregressive parameterization with the neighborhood sampling scheme: a
//! core node plus its hop neighborhoods, estimated by least squares.
//!
//! `cargo run --release --example autoregressive`

use graphcov::ar::{
    ar_true_covariance, build_ar_model, build_ar_scheme, estimate_ar, estimate_ar_uncompressed,
    generate_ar_signals, max_degree_node, ArCovariances, ArParams,
};
use graphcov::graph::{build_shift, generators, ShiftKind};
use nalgebra::DMatrix;

fn main() -> graphcov::Result<()> {
    let n = 20;
    let shift = build_shift(&generators::cycle(n)?, ShiftKind::Adjacency)?;
    let params = ArParams::from_slice(&[0.2])?;
    let core = vec![max_degree_node(&shift)];
    let scheme = build_ar_scheme(&shift, &core, params.order())?;
    println!(
        "core {:?}, levels {:?}: {} distinct nodes, compression {:.2}",
        scheme.core(),
        scheme.levels(),
        scheme.distinct_nodes().len(),
        scheme.compression()
    );

    let r_x = ar_true_covariance(&shift, &params)?;
    let cov = ArCovariances::from_full(&r_x, &scheme)?;
    let system = build_ar_model(&shift, &scheme, &cov)?;
    let compressed = estimate_ar(&system.model, &system.target)?;
    let full = estimate_ar_uncompressed(&shift, &r_x, params.order())?;
    println!(
        "a = 0.2; from true covariances: compressed â = {:.5}, uncompressed â = {:.5}",
        compressed.params.a()[0],
        full.params.a()[0]
    );
    println!("(the gap to 0.2 is the ignored noise-signal cross term)");

    let nodes = scheme.distinct_nodes();
    for ns in [100, 1_000, 10_000, 100_000] {
        let x = generate_ar_signals(&shift, &params, ns, 5)?.x;
        let y = DMatrix::from_fn(nodes.len(), ns, |i, t| x[(nodes[i], t)]);
        let r_hat = &y * y.transpose() / ns as f64;
        let cov = ArCovariances::from_covariance(&r_hat, &nodes, &scheme)?;
        let sys = build_ar_model(&shift, &scheme, &cov)?;
        println!(
            "N_s = {ns:>6}: â = {:.5}",
            estimate_ar(&sys.model, &sys.target)?.params.a()[0]
        );
    }
    Ok(())
}
