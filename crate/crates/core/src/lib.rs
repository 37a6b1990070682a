//! Initialization types for a small object-oriented language.
//!
//! The crate parses programs written in a tiny Java-like intermediate language,
//! checks them against per-method initialization policies (`Init`, `Raw(C)`, `Raw`),
//! runs them under a small-step semantics that gets stuck when a policy is violated
//! at run time, and fuzzes the checker against the interpreter.

pub mod checker;
pub mod cli;
pub mod corpus;
pub mod diag;
pub mod harness;
pub mod interp;
pub mod model;
pub mod parser;

pub use checker::{check_program, CheckReport, Verdict};
pub use diag::{Code, Diagnostic, Severity, Site, SourceLocation};
pub use model::{InitType, Program};
