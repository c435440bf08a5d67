//! Recovery metrics, the gNSP falsifier and the benchmark harnesses.

pub mod gnsp;
pub mod harness;
pub mod metrics;

pub use gnsp::{gnsp_falsifier, GnspVerdict};
pub use harness::{
    run_noisy, run_sigma_sweep, run_success_rate, run_superres, to_csv, CsvRow, ExperimentKind, ExperimentOutput,
    ExperimentSpec, NoisyCell, RateCell, SuccessRow, SuperResCell, SweepRow, TrialRecord,
};
pub use metrics::{oracle_mse, relative_error, squared_error, success};
