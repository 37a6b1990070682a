//! Structural well-formedness: everything a program must satisfy before typing is meaningful.

use std::collections::BTreeSet;

use super::ids::{ClassId, MethodRef, CTOR, MAIN};
use super::syntax::{ClassDef, Expr, InitType, Instr, MethodDef, Program};
use crate::diag::{Code, Diagnostic, Site};

pub fn validate_structure(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_hierarchy(p, &mut out);
    check_main(p, &mut out);
    for (f, t) in &p.fields {
        if let Some(d) = unknown_type_class(p, t) {
            out.push(
                Diagnostic::error(Code::UnresolvedName, format!("type of field `{f}` names undeclared class `{d}`"))
                    .at(Site::Field { field: f.clone() }),
            );
        }
    }
    for cd in p.classes.values() {
        for f in &cd.fields {
            if !p.fields.contains_key(f) {
                out.push(
                    Diagnostic::error(Code::UnresolvedName, format!("field `{f}` has no type"))
                        .at(Site::Field { field: f.clone() }),
                );
            }
        }
        if cd.methods.contains_key(CTOR) {
            out.push(
                Diagnostic::error(Code::ReservedName, format!("class `{}` declares a method named `init`", cd.id))
                    .at(Site::Class { class: cd.id.clone() }),
            );
        }
        check_method(p, cd, &cd.ctor, &mut out);
        for m in cd.methods.values() {
            check_method(p, cd, m, &mut out);
        }
    }
    out
}

fn unknown_type_class<'a>(p: &Program, t: &'a InitType) -> Option<&'a ClassId> {
    match t {
        InitType::Raw(c) if !p.classes.contains_key(c) => Some(c),
        _ => None,
    }
}

fn check_hierarchy(p: &Program, out: &mut Vec<Diagnostic>) {
    for cd in p.classes.values() {
        if let Some(s) = &cd.super_class {
            if !p.classes.contains_key(s) {
                out.push(
                    Diagnostic::error(Code::UnresolvedName, format!("class `{}` extends undeclared class `{s}`", cd.id))
                        .at(Site::Class { class: cd.id.clone() }),
                );
            }
        }
    }
    // A class lies on a cycle iff walking its super chain comes back to it.
    let mut reported: BTreeSet<ClassId> = BTreeSet::new();
    for c in p.classes.keys() {
        let chain: Vec<&ClassId> = p.ancestors(c).skip(1).collect();
        if chain.contains(&c) && !reported.contains(c) {
            let cycle: Vec<&ClassId> = std::iter::once(c).chain(chain.iter().copied().take_while(|a| *a != c)).collect();
            reported.extend(cycle.iter().map(|x| (*x).clone()));
            let names: Vec<String> = cycle.iter().map(|x| x.to_string()).collect();
            out.push(
                Diagnostic::error(Code::HierarchyCycle, format!("inheritance cycle {} -> {c}", names.join(" -> ")))
                    .at(Site::Class { class: c.clone() }),
            );
        }
    }
    let roots = p.roots();
    if roots.len() != 1 && !p.classes.is_empty() {
        let names: Vec<String> = roots.iter().map(|r| r.to_string()).collect();
        out.push(
            Diagnostic::error(
                Code::HierarchyRoot,
                format!("expected exactly one root class, found {} [{}]", roots.len(), names.join(", ")),
            )
            .at(Site::Program),
        );
    }
}

fn check_main(p: &Program, out: &mut Vec<Diagnostic>) {
    match p.classes.get(&p.main) {
        None => out.push(
            Diagnostic::error(Code::UnresolvedName, format!("main class `{}` is not declared", p.main)).at(Site::Program),
        ),
        Some(cd) if !cd.methods.contains_key(MAIN) => out.push(
            Diagnostic::error(Code::MissingMain, format!("main class `{}` has no method `main`", p.main))
                .at(Site::Class { class: cd.id.clone() }),
        ),
        Some(_) => {}
    }
}

fn check_method(p: &Program, cd: &ClassDef, m: &MethodDef, out: &mut Vec<Diagnostic>) {
    let mref = MethodRef::new(cd.id.clone(), m.name.clone());
    let at_method = Site::Method { method: mref.clone() };
    let at = |pc: usize| Site::Instr { method: mref.clone(), pc };

    if m.is_constructor != m.name.is_ctor() {
        out.push(
            Diagnostic::error(Code::ReservedName, format!("`{mref}` is misdeclared as constructor/method"))
                .at(at_method.clone()),
        );
    }
    for (what, t) in [("pre", &m.pre), ("post", &m.post), ("argument", &m.argtype), ("result", &m.rettype)] {
        if let Some(c) = unknown_type_class(p, t) {
            out.push(
                Diagnostic::error(Code::UnresolvedName, format!("{what} type of `{mref}` names undeclared class `{c}`"))
                    .at(at_method.clone()),
            );
        }
    }
    let len = m.instrs.len();
    if len == 0 {
        out.push(Diagnostic::error(Code::EmptyMethod, format!("`{mref}` has no instructions")).at(at_method));
        return;
    }
    if !m.instrs[len - 1].is_return() {
        out.push(
            Diagnostic::error(
                Code::MissingNextInstruction,
                format!("last instruction of `{mref}` is not a return and has no next instruction"),
            )
            .at(at(len - 1)),
        );
    }
    for ((pc, exc), target) in &m.handlers {
        if *pc >= len || *target >= len {
            out.push(
                Diagnostic::error(
                    Code::TargetOutOfRange,
                    format!("handler {pc} {exc} -> {target} is outside `{mref}` (length {len})"),
                )
                .at(Site::Handler { method: mref.clone(), pc: *pc }),
            );
        }
    }
    for (pc, ins) in m.instrs.iter().enumerate() {
        check_instr(p, cd, m, ins, pc, &mref, out);
    }
}

fn check_instr(
    p: &Program,
    cd: &ClassDef,
    m: &MethodDef,
    ins: &Instr,
    pc: usize,
    mref: &MethodRef,
    out: &mut Vec<Diagnostic>,
) {
    let site = Site::Instr { method: mref.clone(), pc };
    let mut err = |code: Code, msg: String| out.push(Diagnostic::error(code, msg).at(site.clone()));
    let check_class = |c: &ClassId, err: &mut dyn FnMut(Code, String)| {
        if !p.classes.contains_key(c) {
            err(Code::UnresolvedName, format!("undeclared class `{c}` in `{ins}`"));
        }
    };

    if let Some(dst) = ins.defined_var() {
        if dst.is_this() {
            err(Code::AssignToThis, format!("`{ins}` assigns to `this`"));
        }
    }
    match ins {
        Instr::Assign { expr, .. } => {
            let mut e = expr;
            while let Expr::Field(base, f) = e {
                if !p.fields.contains_key(f) {
                    err(Code::UnresolvedName, format!("undeclared field `{f}`"));
                }
                e = base;
            }
        }
        Instr::FieldWrite { field, .. } => {
            if !p.fields.contains_key(field) {
                err(Code::UnresolvedName, format!("undeclared field `{field}`"));
            }
        }
        Instr::New { class, .. } | Instr::CastRaw { class, .. } => check_class(class, &mut err),
        Instr::IfStar { target } => {
            if *target >= m.instrs.len() {
                err(Code::TargetOutOfRange, format!("jump target {target} is outside the method (length {})", m.instrs.len()));
            }
        }
        Instr::SuperCall { .. } => {
            if !m.is_constructor {
                err(Code::SuperCallOutsideConstructor, "`super` outside a constructor".into());
            } else if cd.super_class.is_none() {
                err(Code::SuperCallInRoot, format!("root class `{}` has no super constructor", cd.id));
            }
        }
        Instr::VirtualCall { declaring, method, .. } => {
            if method.is_ctor() {
                err(Code::ReservedName, "constructors cannot be called virtually".into());
            } else {
                match p.classes.get(declaring) {
                    None => check_class(declaring, &mut err),
                    Some(d) if !d.methods.contains_key(method) => {
                        err(Code::UnresolvedName, format!("class `{declaring}` does not declare `{method}`"))
                    }
                    Some(_) => {}
                }
            }
        }
        Instr::Return { var } => {
            if m.is_constructor && !var.is_this() {
                err(Code::ConstructorReturnNotThis, format!("constructor returns `{var}` instead of `this`"));
            }
        }
        Instr::SetInit => {
            if !m.is_constructor {
                err(Code::SetInitOutsideConstructor, "`setinit` outside a constructor".into());
            }
        }
        Instr::CastInit { .. } => {}
    }
}

/// Name of the method a call instruction statically targets.
pub fn call_target(ins: &Instr) -> Option<MethodRef> {
    match ins {
        Instr::VirtualCall { declaring, method, .. } => Some(MethodRef::new(declaring.clone(), method.clone())),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MethodName, VarId};

    fn v(s: &str) -> VarId {
        VarId::new(s)
    }

    fn ret(s: &str) -> Instr {
        Instr::Return { var: v(s) }
    }

    fn base() -> Program {
        Program::new("Main")
            .with_class(ClassDef::new("Object", None, vec![ret("this")]))
            .with_class(
                ClassDef::new("Main", Some("Object"), vec![Instr::SuperCall { arg: v("arg") }, ret("this")])
                    .with_method(MethodDef::new("main", vec![ret("x")])),
            )
    }

    fn codes(p: &Program) -> Vec<Code> {
        validate_structure(p).into_iter().map(|d| d.code).collect()
    }

    #[test]
    fn minimal_program_is_valid() {
        assert!(validate_structure(&base()).is_empty());
    }

    #[test]
    fn last_ifstar_is_missing_next_instruction() {
        let p = base().with_class(
            ClassDef::new("A", Some("Object"), vec![Instr::SuperCall { arg: v("arg") }, ret("this")])
                .with_method(MethodDef::new("m", vec![Instr::IfStar { target: 0 }])),
        );
        assert_eq!(codes(&p), vec![Code::MissingNextInstruction]);
    }

    #[test]
    fn two_class_cycle() {
        let p = base()
            .with_class(ClassDef::new("A", Some("B"), vec![ret("this")]))
            .with_class(ClassDef::new("B", Some("A"), vec![ret("this")]));
        let cs = codes(&p);
        assert_eq!(cs.iter().filter(|c| **c == Code::HierarchyCycle).count(), 1, "{cs:?}");
    }

    #[test]
    fn empty_method() {
        let p = base().with_class(
            ClassDef::new("A", Some("Object"), vec![Instr::SuperCall { arg: v("arg") }, ret("this")])
                .with_method(MethodDef::new("m", vec![])),
        );
        assert_eq!(codes(&p), vec![Code::EmptyMethod]);
    }

    #[test]
    fn bad_targets_and_handlers() {
        let m = MethodDef::new("m", vec![Instr::IfStar { target: 7 }, ret("x")]).with_handler(0, "np", 9);
        let p = base().with_class(
            ClassDef::new("A", Some("Object"), vec![Instr::SuperCall { arg: v("arg") }, ret("this")]).with_method(m),
        );
        assert_eq!(codes(&p), vec![Code::TargetOutOfRange, Code::TargetOutOfRange]);
    }

    #[test]
    fn assignments_to_this() {
        let m = MethodDef::new(
            "m",
            vec![
                Instr::Assign { dst: v("this"), expr: Expr::Null },
                Instr::CastInit { dst: v("this"), src: v("x") },
                ret("x"),
            ],
        );
        let p = base().with_class(
            ClassDef::new("A", Some("Object"), vec![Instr::SuperCall { arg: v("arg") }, ret("this")]).with_method(m),
        );
        assert_eq!(codes(&p), vec![Code::AssignToThis, Code::AssignToThis]);
    }

    #[test]
    fn constructor_discipline() {
        let p = base()
            .with_class(ClassDef::new("A", Some("Object"), vec![Instr::SuperCall { arg: v("arg") }, ret("arg")]))
            .with_class(ClassDef::new("B", Some("Object"), vec![Instr::SetInit, ret("this")]).with_method(
                MethodDef::new("m", vec![Instr::SetInit, Instr::SuperCall { arg: v("arg") }, ret("x")]),
            ));
        assert_eq!(
            codes(&p),
            vec![Code::ConstructorReturnNotThis, Code::SetInitOutsideConstructor, Code::SuperCallOutsideConstructor]
        );
        let root_super = Program::new("Object").with_class(
            ClassDef::new("Object", None, vec![Instr::SuperCall { arg: v("arg") }, ret("this")])
                .with_method(MethodDef::new("main", vec![ret("x")])),
        );
        assert_eq!(codes(&root_super), vec![Code::SuperCallInRoot]);
    }

    #[test]
    fn unresolved_names() {
        let m = MethodDef::new(
            "m",
            vec![
                Instr::New { dst: v("x"), class: ClassId::new("Nope"), arg: v("y") },
                Instr::VirtualCall {
                    dst: v("x"),
                    recv: v("y"),
                    declaring: ClassId::new("Object"),
                    method: MethodName::new("absent"),
                    arg: v("y"),
                },
                Instr::Assign { dst: v("x"), expr: Expr::field(Expr::var("y"), "nofield") },
                ret("x"),
            ],
        )
        .with_pre(InitType::raw("Ghost"));
        let p = base().with_class(
            ClassDef::new("A", Some("Object"), vec![Instr::SuperCall { arg: v("arg") }, ret("this")]).with_method(m),
        );
        assert_eq!(codes(&p), vec![Code::UnresolvedName; 4]);
    }

    #[test]
    fn missing_main_and_roots() {
        let p = Program::new("Object").with_class(ClassDef::new("Object", None, vec![ret("this")]));
        assert_eq!(codes(&p), vec![Code::MissingMain]);
        let two_roots = base().with_class(ClassDef::new("Other", None, vec![ret("this")]));
        assert_eq!(codes(&two_roots), vec![Code::HierarchyRoot]);
    }
}
