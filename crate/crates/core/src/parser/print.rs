use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::{ClassDef, ClassId, MethodDef, Program};

/// Canonical, fully annotated source text for `p`.
///
/// Classes appear parents first, then by name; every annotation is explicit.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for (i, c) in class_order(p).into_iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_class(p, &p.classes[c], &mut out);
    }
    if !p.classes.is_empty() {
        out.push('\n');
    }
    let _ = writeln!(out, "main {};", p.main);
    out
}

fn class_order(p: &Program) -> Vec<&ClassId> {
    let mut done: BTreeSet<&ClassId> = BTreeSet::new();
    let mut order = Vec::with_capacity(p.classes.len());
    loop {
        let ready: Vec<&ClassId> = p
            .classes
            .values()
            .filter(|cd| !done.contains(&cd.id))
            .filter(|cd| match &cd.super_class {
                None => true,
                Some(s) => done.contains(s) || !p.classes.contains_key(s),
            })
            .map(|cd| &cd.id)
            .collect();
        if ready.is_empty() {
            break;
        }
        for c in ready {
            done.insert(c);
            order.push(c);
        }
    }
    // Whatever is left sits on a cycle.
    order.extend(p.classes.keys().filter(|c| !done.contains(c)));
    order
}

fn print_class(p: &Program, cd: &ClassDef, out: &mut String) {
    let _ = write!(out, "class {}", cd.id);
    if let Some(s) = &cd.super_class {
        let _ = write!(out, " extends {s}");
    }
    out.push_str(" {\n");
    for f in &cd.fields {
        match p.fields.get(f) {
            Some(t) => {
                let _ = writeln!(out, "  field {f} : {t};");
            }
            None => {
                let _ = writeln!(out, "  field {f};");
            }
        }
    }
    print_method(&cd.ctor, "init", out);
    for m in cd.methods.values() {
        print_method(m, &format!("method {}", m.name), out);
    }
    out.push_str("}\n");
}

fn print_method(m: &MethodDef, head: &str, out: &mut String) {
    let _ = writeln!(out, "  {head}(arg: {}) pre {} post {} ret {} {{", m.argtype, m.pre, m.post, m.rettype);
    for (pc, ins) in m.instrs.iter().enumerate() {
        let _ = writeln!(out, "    {pc}: {ins};");
    }
    for ((pc, exc), target) in &m.handlers {
        let _ = writeln!(out, "    handler {pc} {exc} -> {target};");
    }
    out.push_str("  }\n");
}
