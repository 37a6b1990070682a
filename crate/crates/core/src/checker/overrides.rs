use std::collections::BTreeSet;

use super::transfer::model_diag;
use crate::diag::{Code, Diagnostic, Site};
use crate::model::{InitType, MethodRef, Program};

/// Checks every pair of a method and a method overriding it.
///
/// Preconditions and argument types may only widen (`m.pre ⊑ m'.pre`), postconditions
/// and return types may only narrow (`m'.post ⊑ m.post`).
pub fn check_overrides(p: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut seen: BTreeSet<(MethodRef, MethodRef)> = BTreeSet::new();
    for (d, cd) in &p.classes {
        for (name, m) in &cd.methods {
            let base = MethodRef::new(d.clone(), name.clone());
            for c in p.subclasses(d) {
                let Some(over) = p.lookup_ref(c, name) else { continue };
                if over == base || !seen.insert((base.clone(), over.clone())) {
                    continue;
                }
                let Some(m2) = p.method(&over) else { continue };
                let site = Site::Method { method: over.clone() };
                let checks: [(Code, &str, &InitType, &InitType); 4] = [
                    (Code::OverridePreViolation, "precondition", &m.pre, &m2.pre),
                    (Code::OverrideArgViolation, "argument type", &m.argtype, &m2.argtype),
                    (Code::OverridePostViolation, "postcondition", &m2.post, &m.post),
                    (Code::OverrideRetViolation, "return type", &m2.rettype, &m.rettype),
                ];
                for (code, what, lo, hi) in checks {
                    match p.subtype(lo, hi) {
                        Ok(true) => {}
                        Ok(false) => diags.push(
                            Diagnostic::error(
                                code,
                                format!("{what} of `{over}` is incompatible with `{base}`: {lo} is not a subtype of {hi}"),
                            )
                            .at(site.clone()),
                        ),
                        Err(e) => diags.push(model_diag(e).at(site.clone())),
                    }
                }
            }
        }
    }
    diags
}
