//! Core model for checking atomicity of concurrent-object methods against a
//! set of core methods.
//!
//! A [`Harness`] lists invocation sequences, each meant to run in its own
//! thread, with happens-before constraints between sequences. The
//! [`oracle`] computes every outcome a linearized execution of the harness
//! can produce on a [`SequentialSpec`]; a concurrent execution whose outcome
//! falls outside that set exposes a non-atomic method. The [`enumerate`]
//! module generates harnesses for a method under test in increasing size.

pub mod enumerate;
pub mod harness;
pub mod lincheck;
pub mod oracle;
pub mod order;
pub mod outcome;
pub mod spec;
pub mod value;

pub use enumerate::{
    construct_harnesses, shuffle, EnumError, EnumOptions, EnumParams, HarnessCode, HarnessSpace,
    ParamSchedule, ScheduleKind,
};
pub use harness::{
    parse_harness, parse_outcome, Harness, HarnessError, HarnessStats, History, InvocIndex,
};
pub use oracle::{
    atomic_outcomes, count_linearizations, is_atomic_outcome, linearizations, AtomicOutcomeSet,
};
pub use outcome::Outcome;
pub use spec::{
    ArgKind, Family, MethodOverride, MethodSpec, Mutability, ReturnKind, SequentialSpec, SpecError,
    State,
};
pub use value::{Invocation, Value};
