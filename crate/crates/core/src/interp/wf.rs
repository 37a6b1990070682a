use std::collections::BTreeMap;

use super::heap::{value_has_type, Heap, HeapObject, Loc, Value};
use super::step::{Locals, MachineState};
use crate::checker::MethodTypeTable;
use crate::model::{ClassId, MethodRef, Program};

pub type TypeTables = BTreeMap<MethodRef, MethodTypeTable>;

/// Checks that every field value, local and saved local inhabits its static type.
///
/// Returns a description of the first violation.
pub fn check_state(p: &Program, s: &MachineState, tables: &TypeTables) -> Result<(), String> {
    for (l, o) in s.heap.iter() {
        check_object(p, &s.heap, l, o)?;
    }
    check_frame(p, s, &s.method, s.pc, &s.locals, tables)?;
    for f in s.stack.iter().rev() {
        check_frame(p, s, &f.method, f.pc, &f.locals, tables)?;
    }
    Ok(())
}

fn check_object(p: &Program, h: &Heap, l: usize, o: &HeapObject) -> Result<(), String> {
    for (f, v) in &o.fields {
        let Some(t) = p.fields.get(f) else {
            return Err(format!("@{l} holds undeclared field `{f}`"));
        };
        if !value_has_type(p, h, *v, t) {
            return Err(format!("field @{l}.{f} = {v} is not {t}"));
        }
    }
    Ok(())
}

fn check_frame(
    p: &Program,
    s: &MachineState,
    m: &MethodRef,
    pc: usize,
    locals: &Locals,
    tables: &TypeTables,
) -> Result<(), String> {
    let Some(l) = tables.get(m).and_then(|t| t.get(&pc)) else {
        return Err(format!("no type state for {m} pc {pc}"));
    };
    for (x, v) in locals {
        let t = l.get(x);
        if !value_has_type(p, &s.heap, *v, t) {
            return Err(format!("{m} pc {pc}: local {x} = {v} is not {t}"));
        }
        if let Value::Loc(loc) = v {
            if s.heap.get(*loc).is_none() {
                return Err(format!("{m} pc {pc}: local {x} dangles"));
            }
        }
    }
    Ok(())
}

/// `wf(s)`: heap, locals and call stack all agree with the type tables.
pub fn state_well_formed(p: &Program, s: &MachineState, tables: &TypeTables) -> bool {
    check_state(p, s, tables).is_ok()
}

fn touches<'v>(moved: &[Loc], mut vs: impl Iterator<Item = &'v Value>) -> bool {
    !moved.is_empty() && vs.any(|v| matches!(v, Value::Loc(l) if moved.contains(l)))
}

/// [`check_state`] for a sequence of states, skipping work already done.
///
/// The monitor remembers the digests of the last state it accepted. An object or a stack
/// prefix with the same digest as there has the same contents, so it was already found well
/// formed. The type of a value depends only on the class and tag of the object it points
/// to, so such a part needs another look only when it points at a location whose class or
/// tag differs from the accepted state. Any state can be checked, not only successors.
pub struct WfMonitor<'a> {
    p: &'a Program,
    tables: &'a TypeTables,
    digests: Vec<u128>,
    shapes: Vec<(ClassId, Option<ClassId>)>,
    chains: Vec<u128>,
}

impl<'a> WfMonitor<'a> {
    pub fn new(p: &'a Program, tables: &'a TypeTables) -> Self {
        Self { p, tables, digests: Vec::new(), shapes: Vec::new(), chains: Vec::new() }
    }

    pub fn check(&mut self, s: &MachineState) -> Result<(), String> {
        let (p, tables) = (self.p, self.tables);
        let mut changed = Vec::new();
        let mut moved = Vec::new();
        for l in 0..s.heap.len() {
            if self.digests.get(l) == s.heap.digest_at(l).as_ref() {
                continue;
            }
            changed.push(l);
            let o = s.heap.get(l).expect("in range");
            // Locations past the old heap were dangling there, so no accepted part points at them.
            if self.shapes.get(l).is_some_and(|(c, t)| *c != o.dyn_class || *t != o.init_level) {
                moved.push(l);
            }
        }
        for (l, o) in s.heap.iter() {
            if changed.binary_search(&l).is_ok() || touches(&moved, o.fields.values()) {
                check_object(p, &s.heap, l, o)?;
            }
        }
        check_frame(p, s, &s.method, s.pc, &s.locals, tables)?;
        // Frames below the deepest frame whose chain digest matches are unchanged too.
        let mut kept = s.stack.len().min(self.chains.len());
        while kept > 0 && self.chains[kept - 1] != s.stack[kept - 1].chain {
            kept -= 1;
        }
        for (i, f) in s.stack.iter().enumerate() {
            if i >= kept || touches(&moved, f.locals.values()) {
                check_frame(p, s, &f.method, f.pc, &f.locals, tables)?;
            }
        }
        self.shapes.truncate(s.heap.len());
        self.digests.truncate(s.heap.len());
        for l in changed {
            let o = s.heap.get(l).expect("in range");
            let shape = (o.dyn_class.clone(), o.init_level.clone());
            let d = s.heap.digest_at(l).expect("in range");
            if l < self.digests.len() {
                self.shapes[l] = shape;
                self.digests[l] = d;
            } else {
                self.shapes.push(shape);
                self.digests.push(d);
            }
        }
        self.chains.truncate(kept);
        self.chains.extend(s.stack[kept..].iter().map(|f| f.chain));
        Ok(())
    }
}
