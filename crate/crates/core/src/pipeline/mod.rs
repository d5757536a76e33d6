//! End-to-end orchestration: configuration, run, export.

mod config;
mod export;
mod roundtrip;
mod run;

pub use config::{
    generators, presets, DataSpec, GridSettings, Mode, NonlinearitySpec, ProblemConfig, SharedGenerator,
    StateGenerator, Tolerances,
};
pub use export::{export, EXPORTED_FILES};
pub use roundtrip::{roundtrip_check, RoundTripReport};
pub use run::{
    find_amplitude, fitted_class_constant, run_exact_control, AmplitudeProbe, AmplitudeSearch, BorelSummary,
    RunOutcome, RunReport, StageFailure,
};
