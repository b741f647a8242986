//! Monte-Carlo NMSE sweep over snapshot counts, samplers, and estimators,
//! written as CSV to stdout. Set `GRAPHCOV_THREADS` to cap the worker pool.
//!
//! `cargo run --release --example nmse_sweep > nmse.csv`

use graphcov::estimators::Method;
use graphcov::experiment::{
    run_nmse, write_nmse_csv, ExperimentConfig, GraphKind, GraphSpec, ModelSpec, SamplerSpec,
    ShiftChoice,
};

fn main() -> graphcov::Result<()> {
    let config = ExperimentConfig {
        graph: GraphSpec {
            kind: GraphKind::Sensor,
            n: 30,
            seed: 7,
            k: None,
            path: None,
        },
        shift: ShiftChoice::Laplacian,
        filter: vec![1.0, -0.1],
        model: ModelSpec::Spectral,
        samplers: vec![
            SamplerSpec::Full,
            SamplerSpec::Greedy { k: 15 },
            SamplerSpec::SmallestValid,
        ],
        methods: vec![Method::Ls, Method::Nnls, Method::Wls],
        n_snapshots: vec![100, 300, 1_000, 3_000, 10_000],
        n_trials: 100,
        seed: 1,
        exact_covariance: false,
        nmse_norm: Default::default(),
        output: None,
    };
    let result = run_nmse(&config)?;
    if result.total_failures() > 0 {
        eprintln!("{} trials failed", result.total_failures());
    }
    write_nmse_csv(&result.rows, std::io::stdout().lock())
}
