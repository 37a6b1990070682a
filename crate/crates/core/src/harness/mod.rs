//! Checks the type system against the interpreter.
//!
//! Programs come from a random generator, an exhaustive enumerator of tiny programs and a
//! mutator. Every accepted program is run on all branches; reaching a stuck state or a
//! state that disagrees with the type tables is a counterexample.

mod enumerate;
mod fuzz;
mod generate;
mod mutate;
mod trial;

pub use enumerate::{count_small_programs, enumerate_small_programs, EnumError, ENUMERATION_CAP};
pub use fuzz::{fuzz, fuzz_generated, fuzz_mutants, trial_seed, Finding, FuzzConfig, FuzzSummary, PhaseSummary};
pub use generate::{generate_program, GenBounds};
pub use mutate::{covers_above, covers_below, mutate, step_annotation};
pub use trial::{
    load_trace, persist_counterexample, program_digest, replay, run_trace, soundness_trial, soundness_trial_with,
    Counterexample, TrialVerdict, ViolationKind,
};
