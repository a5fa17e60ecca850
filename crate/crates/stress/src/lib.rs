//! Stress testing of concurrent objects against precomputed atomic outcomes.
//!
//! [`sut`] holds the objects under test, [`executor`] runs one harness many
//! times concurrently and classifies the observed outcomes, and [`check`]
//! drives enumeration and stress testing until a violation or a bound.

pub mod check;
pub mod executor;
pub mod report;
pub mod sut;

pub use check::{check, CheckConfig, CheckError};
pub use executor::{
    record_history_trial, run_trial, stress, OutcomeHistogram, PhasePlan, StressBudget,
    StressError, Verdict,
};
pub use report::{write_report, CheckReport, HarnessRecord, ReportFormat, ReportVerdict};
pub use sut::{builtin_suts, sequential_conformance, ConcurrentObject, SutAdapter, SutRegistry};
