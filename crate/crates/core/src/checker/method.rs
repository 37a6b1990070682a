use std::collections::BTreeSet;

use super::state::{MethodTypeTable, TypeState};
use super::transfer::{model_diag, post_state, side_conditions, MethodCtx};
use crate::diag::{Code, Diagnostic, Site};
use crate::model::{InitType, VarId};

/// Type state on entry: `this : pre`, `arg : argtype`, every other variable `Init` (it holds `null`).
pub fn entry_state(ctx: &MethodCtx) -> TypeState {
    TypeState::all_init(ctx.method.variables().iter())
        .with(VarId::this(), ctx.method.pre.clone())
        .with(VarId::arg(), ctx.method.argtype.clone())
}

/// Computes the least fixpoint of the transfer functions over the method body,
/// then checks every side condition on it.
///
/// On success returns the table plus warnings; otherwise every error found.
pub fn check_method(ctx: &MethodCtx) -> Result<(MethodTypeTable, Vec<Diagnostic>), Vec<Diagnostic>> {
    let p = ctx.program;
    let m = ctx.method;
    let mref = ctx.mref();
    let mut errors = Vec::new();

    if ctx.method.is_constructor && m.pre != InitType::RawBot {
        errors.push(
            Diagnostic::error(Code::ConstructorPreViolation, format!("constructor precondition must be Raw, found {}", m.pre))
                .at(Site::Method { method: mref.clone() }),
        );
    }

    let mut table = MethodTypeTable::new();
    if m.instrs.is_empty() {
        return Err(errors);
    }
    table.insert(0, entry_state(ctx));
    let mut work: BTreeSet<usize> = BTreeSet::from([0]);
    while let Some(pc) = work.pop_first() {
        let l = table[&pc].clone();
        let ins = &m.instrs[pc];
        let out = post_state(ctx, ins, &l);
        let mut edges: Vec<(usize, &TypeState)> = m.successors(pc).into_iter().map(|s| (s, &out)).collect();
        for ((hpc, _), target) in &m.handlers {
            if *hpc == pc {
                edges.push((*target, &l));
            }
        }
        for (succ, state) in edges {
            if succ >= m.instrs.len() {
                continue;
            }
            let changed = match table.get_mut(&succ) {
                Some(cur) => match cur.join_in_place(p, state) {
                    Ok(c) => c,
                    Err(e) => return Err(vec![model_diag(e).at(Site::Instr { method: mref, pc })]),
                },
                None => {
                    table.insert(succ, state.clone());
                    true
                }
            };
            if changed {
                work.insert(succ);
            }
        }
    }

    for (pc, l) in &table {
        if let Err(d) = side_conditions(ctx, *pc, &m.instrs[*pc], l) {
            errors.push(d);
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok((table.clone(), unreachable_warnings(ctx, &table)))
}

fn unreachable_warnings(ctx: &MethodCtx, table: &MethodTypeTable) -> Vec<Diagnostic> {
    let mut warnings = Vec::new();
    let n = ctx.method.instrs.len();
    let mut pc = 0;
    while pc < n {
        if table.contains_key(&pc) {
            pc += 1;
            continue;
        }
        let start = pc;
        while pc < n && !table.contains_key(&pc) {
            pc += 1;
        }
        let range = if pc - start == 1 { format!("instruction {start}") } else { format!("instructions {start}..{}", pc - 1) };
        warnings.push(
            Diagnostic::warning(Code::UnreachableCode, format!("{range} of `{}` never execute", ctx.mref()))
                .at(Site::Instr { method: ctx.mref(), pc: start }),
        );
    }
    warnings
}
