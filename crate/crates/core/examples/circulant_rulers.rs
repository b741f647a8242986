//! Sampling a circulant graph: a minimal sparse ruler against the greedy
//! log-det design with the same budget, on a Möbius ladder with 80 nodes.
//!
//! `cargo run --release --example circulant_rulers`

use graphcov::design::{
    check_valid, gram, greedy_design, is_sparse_ruler, minimal_sparse_ruler, DesignProblem,
    RulerSet,
};
use graphcov::graph::{generators, ShiftOperator};
use graphcov::models::{build_psi_spectral, Subsampler};

fn spectrum_summary(
    label: &str,
    psi: &graphcov::models::Psi,
    sampler: &Subsampler,
) -> graphcov::Result<()> {
    let t = gram(psi, &sampler.w())?;
    let eig = t.symmetric_eigenvalues();
    let validity = check_valid(psi, sampler)?;
    println!(
        "{label:<14} K = {:>2}  valid = {}  eig(T) in [{:.3e}, {:.3e}]  cond = {:.1}",
        sampler.k(),
        validity.valid,
        eig.min(),
        eig.max(),
        eig.max() / eig.min()
    );
    Ok(())
}

fn main() -> graphcov::Result<()> {
    for n in [10, 20, 30, 40] {
        let r = minimal_sparse_ruler(n)?;
        println!(
            "minimal sparse ruler, N = {n}: {:?} ({} marks)",
            r.marks(),
            r.len()
        );
    }

    let n = 80;
    let shift = ShiftOperator::circulant_adjacency(&generators::mobius_ladder(n)?)?;
    let psi = build_psi_spectral(shift.basis()?);
    // A known minimal ruler for N = 80; exhaustive search at this length is slow.
    let ruler = RulerSet::new(vec![0, 1, 2, 5, 10, 15, 26, 37, 48, 59, 65, 71, 77, 78, 79]);
    assert!(is_sparse_ruler(&ruler, n));
    let ruler_sampler = ruler.to_sampler(n)?;
    let greedy = greedy_design(&DesignProblem::new(&psi, ruler.len()))?;
    println!(
        "\nMöbius ladder, N = {n}, compression rate K/N = {}",
        ruler_sampler.compression_rate()
    );
    spectrum_summary("sparse ruler", &psi, &ruler_sampler)?;
    spectrum_summary("greedy log-det", &psi, &greedy.sampler)?;
    println!("greedy nodes: {:?}", greedy.sampler.selected());
    Ok(())
}
