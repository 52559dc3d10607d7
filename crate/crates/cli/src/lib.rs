//! CLI harness for the portfolio QUBO pipeline: run configuration,
//! orchestration, reproduction tables, backtests, plot data, and seeded
//! synthetic fixtures.

pub mod ablation;
pub mod backtest;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod plotdata;
pub mod synth;

pub use ablation::{ablation_table, AblationRow};
pub use backtest::{backtest, BacktestOutput};
pub use config::{PipelineConfig, SparsifierToken};
pub use error::{CliError, Result};
pub use pipeline::{run_pipeline, scaling_table, RunRecord, ScalingRow};
pub use plotdata::emit_plot_data;

/// Run a closure on a Rayon pool with the requested thread count
/// (0 = library default). Outputs are independent of the choice.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    if threads == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("thread pool")
            .install(f)
    }
}
