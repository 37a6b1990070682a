//! Abstract syntax, class hierarchy and the initialization-type lattice.

mod build;
mod defaults;
mod hierarchy;
mod ids;
mod syntax;
mod validate;

/// Small program builders for tests and examples.
pub mod testing;

pub use defaults::{apply_default_annotations, PartialClass, PartialMethod, PartialProgram};
pub use hierarchy::{ModelError, ModelResult};
pub use ids::*;
pub use syntax::{ClassDef, Expr, Handlers, InitType, Instr, MethodDef, Program};
pub use validate::{call_target, validate_structure};
