//! Flow-sensitive initialization type checking.
//!
//! Every method is checked on its own: a worklist computes the least type state at each
//! program point and the side conditions of each rule are checked against it. Overrides
//! are checked separately so that calls can be typed from the statically named method.

mod method;
mod overrides;
mod state;
mod transfer;

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::diag::{has_errors, Diagnostic};
use crate::model::{validate_structure, MethodRef, Program};

pub use method::{check_method, entry_state};
pub use overrides::check_overrides;
pub use state::{MethodTypeTable, TypeState};
pub use transfer::{transfer, type_expr, MethodCtx};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    WellTyped,
    IllTyped,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    #[serde(serialize_with = "tables_by_name")]
    pub tables: BTreeMap<MethodRef, MethodTypeTable>,
    pub diagnostics: Vec<Diagnostic>,
}

fn tables_by_name<S: Serializer>(t: &BTreeMap<MethodRef, MethodTypeTable>, s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(t.len()))?;
    for (m, table) in t {
        map.serialize_entry(&m.to_string(), table)?;
    }
    map.end()
}

impl CheckReport {
    pub fn is_well_typed(&self) -> bool {
        self.verdict == Verdict::WellTyped
    }

    /// True when the program was rejected before typing (structure errors).
    pub fn is_structural_failure(&self) -> bool {
        self.diagnostics.iter().any(|d| d.is_error() && d.code.is_structural())
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

/// Checks the structure, the overrides and every method of `p`, constructors included.
pub fn check_program(p: &Program) -> CheckReport {
    let mut diagnostics = validate_structure(p);
    let mut tables = BTreeMap::new();
    if has_errors(&diagnostics) {
        return CheckReport { verdict: Verdict::IllTyped, tables, diagnostics };
    }
    diagnostics.extend(check_overrides(p));
    for cd in p.classes.values() {
        for m in std::iter::once(&cd.ctor).chain(cd.methods.values()) {
            let ctx = MethodCtx::new(p, cd, m);
            match check_method(&ctx) {
                Ok((table, warnings)) => {
                    tables.insert(ctx.mref(), table);
                    diagnostics.extend(warnings);
                }
                Err(errs) => diagnostics.extend(errs),
            }
        }
    }
    let verdict = if has_errors(&diagnostics) { Verdict::IllTyped } else { Verdict::WellTyped };
    CheckReport { verdict, tables, diagnostics }
}

/// Shorthand for `check_program(p).is_well_typed()`.
pub fn is_well_typed(p: &Program) -> bool {
    check_program(p).is_well_typed()
}
