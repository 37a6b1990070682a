//! Small-step semantics with dynamic policy checks.
//!
//! A call whose receiver or argument does not satisfy the callee's annotations has no
//! transition: the machine is stuck. Well-typed programs never get there.

mod digest;
mod heap;
mod run;
mod step;
mod wf;

pub use heap::{value_has_type, Heap, HeapObject, Loc, SetInitError, Value};
pub use run::{
    explore, run, run_traced, trace_line, BranchPolicy, Exploration, Outcome, RunOutcome, DEFAULT_FUEL,
    DEFAULT_MAX_PATHS,
};
pub use step::{eval_expr, step, Frame, Locals, MachineState, StepResult, StuckReason};
pub use wf::{check_state, state_well_formed, TypeTables, WfMonitor};

#[cfg(test)]
mod tests;
