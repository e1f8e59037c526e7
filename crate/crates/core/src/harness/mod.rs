//! Monte Carlo studies and the flat-file formats shared with the CLI.

pub mod io;
pub mod study;

pub use study::{
    run_table1_study, run_tdc_validation, run_theta_validation, ModelConfig, StudyCell,
    StudyReport, TdcRow, TdcValidationReport, ThetaRow, ThetaValidationReport, Workers,
};

/// Version tag written into every JSON document.
pub const FORMAT_VERSION: &str = "stopped-clock/1";

/// Environment fallback for the worker count.
pub const THREADS_ENV: &str = "STOPPED_CLOCK_THREADS";
