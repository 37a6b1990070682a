use super::*;
use crate::checker::check_program;
use crate::corpus;
use crate::model::{ClassId, Expr, FieldId, MethodRef, Program, VarId};
use crate::parser::parse;

fn exhaustive() -> BranchPolicy {
    BranchPolicy::Exhaustive { max_paths: DEFAULT_MAX_PATHS }
}

fn prog(body: &str) -> Program {
    parse(&format!(
        "class Object {{ field f : Raw; init() {{ 0: return this; }} }}
class A extends Object {{
  init(arg: Raw) {{ 0: super(n); 1: return this; }}
  method m() pre Init {{ 0: return this; }}
}}
class B extends A {{
  init(arg: Raw) {{ 0: super(arg); 1: return this; }}
}}
class Main extends Object {{
  init() {{ 0: super(arg); 1: return this; }}
  method main() {{ {body} }}
}}
main Main;"
    ))
    .unwrap()
}

fn steps_until(p: &Program, s: MachineState, n: usize) -> MachineState {
    let mut s = s;
    for _ in 0..n {
        match step(p, s, false) {
            StepResult::Next(next) => s = next,
            other => panic!("unexpected {other:?}"),
        }
    }
    s
}

#[test]
fn return_of_a_null_local() {
    let out = run(&corpus_program(corpus::MINIMAL), 100, BranchPolicy::Seeded(0));
    assert_eq!(out.outcome, Outcome::Final { value: Value::Null });
    assert_eq!(out.steps, 1);
}

fn corpus_program(src: &str) -> Program {
    parse(src).unwrap()
}

#[test]
fn zero_fuel() {
    let out = run(&corpus_program(corpus::MINIMAL), 0, exhaustive());
    assert_eq!(out.outcome, Outcome::FuelExhausted);
    assert_eq!(out.state, MachineState::initial(&corpus_program(corpus::MINIMAL)));
}

#[test]
fn new_enters_the_constructor() {
    let p = prog("0: y <- null; 1: x <- new B(y); 2: return x;");
    let s = steps_until(&p, MachineState::initial(&p), 2);
    assert_eq!(s.method, MethodRef::ctor(ClassId::new("B")));
    assert_eq!(s.pc, 0);
    assert_eq!(s.stack.len(), 1);
    assert_eq!(s.local(&VarId::this()), Value::Loc(0));
    assert_eq!(s.local(&VarId::arg()), Value::Null);
    assert_eq!(s.locals.len(), 2);
    let o = s.heap.get(0).unwrap();
    assert_eq!((o.dyn_class.as_str(), &o.init_level), ("B", &None));
    assert!(o.fields.values().all(|v| *v == Value::Null));
}

#[test]
fn constructor_chain_tags_the_object() {
    let p = prog("0: x <- new B(y); 1: return x;");
    let out = run(&p, 100, BranchPolicy::Seeded(1));
    assert_eq!(out.outcome, Outcome::Final { value: Value::Loc(0) });
    assert_eq!(out.state.heap.get(0).unwrap().init_level, Some(ClassId::new("B")));
}

#[test]
fn root_constructor_return_tags_the_root() {
    let p = prog("0: x <- new Object(y); 1: return x;");
    let s = steps_until(&p, MachineState::initial(&p), 2);
    assert_eq!(s.method.name.as_str(), "main");
    assert_eq!(s.pc, 1);
    assert_eq!(s.heap.get(0).unwrap().init_level, Some(ClassId::new("Object")));
}

#[test]
fn call_on_half_built_receiver_is_stuck() {
    let p = prog("0: x <- new B(y); 1: z <- x.A::m(y); 2: return z;");
    let mut s = MachineState::initial(&p);
    let l = s.heap.alloc(&p, &ClassId::new("B"));
    s.heap.set_init(&p, &ClassId::new("Object"), l).unwrap();
    s.heap.set_init(&p, &ClassId::new("A"), l).unwrap();
    s.locals.insert(VarId::new("x"), Value::Loc(l));
    s.pc = 1;
    match step(&p, s, false) {
        StepResult::Stuck { reason, pc, .. } => {
            assert_eq!(reason, StuckReason::CallPreViolation);
            assert_eq!(pc, 1);
        }
        other => panic!("expected stuck, got {other:?}"),
    }
}

#[test]
fn expressions() {
    let p = prog("0: return x;");
    let mut s = MachineState::initial(&p);
    assert_eq!(eval_expr(&s.heap, &s, &Expr::field(Expr::var("x"), "f")), Err(crate::model::ExcId::new("np")));
    assert_eq!(eval_expr(&s.heap, &s, &Expr::Null), Ok(Value::Null));
    let l = s.heap.alloc(&p, &ClassId::new("A"));
    let k = s.heap.alloc(&p, &ClassId::new("A"));
    s.heap.update(l, |o| o.fields.insert(FieldId::new("f"), Value::Loc(k))).unwrap();
    s.locals.insert(VarId::new("x"), Value::Loc(l));
    assert_eq!(eval_expr(&s.heap, &s, &Expr::field(Expr::var("x"), "f")), Ok(Value::Loc(k)));
}

#[test]
fn exceptions_unwind_to_handlers() {
    let caught = prog("0: y <- x.f; 1: return y; 2: return x; handler 0 np -> 2;");
    assert_eq!(run(&caught, 100, BranchPolicy::Seeded(0)).outcome, Outcome::Final { value: Value::Null });
    let uncaught = prog("0: y <- x.f; 1: return y;");
    assert_eq!(
        run(&uncaught, 100, BranchPolicy::Seeded(0)).outcome,
        Outcome::FinalExceptional { exception: "np".into() }
    );
    // Raised inside the constructor, caught by the caller at the `new`.
    let nested = parse(
        "class Object { field f : Raw; init() { 0: x <- x.f; 1: return this; } }
class Main extends Object {
  init() { 0: super(arg); 1: return this; }
  method main() { 0: x <- new Main(y); 1: return x; 2: return y; handler 0 np -> 2; }
}
main Main;",
    )
    .unwrap();
    let out = run(&nested, 100, BranchPolicy::Seeded(0));
    assert_eq!(out.outcome, Outcome::Final { value: Value::Null });
    assert!(out.state.stack.is_empty());
}

#[test]
fn casts_check_tags() {
    let p = prog("0: x <- new B(y); 1: z <- (Init) x; 2: w <- (Raw(A)) z; 3: return w;");
    assert_eq!(run(&p, 100, BranchPolicy::Seeded(0)).outcome, Outcome::Final { value: Value::Loc(0) });
    let mut s = MachineState::initial(&p);
    let l = s.heap.alloc(&p, &ClassId::new("B"));
    s.locals.insert(VarId::new("x"), Value::Loc(l));
    s.pc = 1;
    let StepResult::Next(s) = step(&p, s, false) else { panic!() };
    assert_eq!(s.exc, Some("cce".into()));
}

#[test]
fn nonconforming_receiver_raises() {
    let p = prog("0: x <- new Main(y); 1: z <- x.A::m(y); 2: return z;");
    assert_eq!(run(&p, 100, BranchPolicy::Seeded(0)).outcome, Outcome::FinalExceptional { exception: "icce".into() });
}

#[test]
fn attack_gets_stuck_on_some_branch() {
    let p = corpus_program(corpus::CLASSLOADER_ATTACK);
    let out = run(&p, 1000, exhaustive());
    assert!(matches!(out.outcome, Outcome::Stuck { reason: StuckReason::CallPreViolation, .. }), "{}", out.outcome);
    let replay = run(&p, 1000, BranchPolicy::Scripted(out.choices.clone()));
    assert_eq!(replay.outcome, out.outcome);
}

#[test]
fn seeded_runs_are_deterministic() {
    let p = corpus_program(corpus::CLASSLOADER);
    for seed in 0..8 {
        let a = run(&p, 1000, BranchPolicy::Seeded(seed));
        let b = run(&p, 1000, BranchPolicy::Seeded(seed));
        assert_eq!((a.outcome, a.choices), (b.outcome, b.choices));
    }
}

#[test]
fn exploration_covers_both_branches() {
    let p = prog("0: if * jmp 2; 1: y <- x.f; 2: return x;");
    let mut outcomes = Vec::new();
    let ex = explore(&p, 100, 16, |_| Ok(()), |path| outcomes.push((path.choices.clone(), path.outcome.clone())));
    assert_eq!(ex.paths, 2);
    assert!(!ex.truncated);
    assert!(outcomes.contains(&(vec![true], Outcome::Final { value: Value::Null })));
    assert!(outcomes.contains(&(vec![false], Outcome::FinalExceptional { exception: "np".into() })));
}

#[test]
fn loops_are_explored_once_per_state() {
    let p = prog("0: if * jmp 0; 1: return x;");
    let ex = explore(&p, 1000, DEFAULT_MAX_PATHS, |_| Ok(()), |_| {});
    assert!(!ex.truncated);
    assert!(ex.total_steps < 10, "{}", ex.total_steps);
}

#[test]
fn trace_reports_tag_changes() {
    let p = prog("0: x <- new Object(y); 1: return x;");
    let out = run_traced(&p, 100, BranchPolicy::Seeded(0), true);
    assert_eq!(out.trace.len(), out.steps);
    assert!(out.trace.iter().any(|l| l.contains("@0 ⊥ -> Object")), "{:?}", out.trace);
}

#[test]
fn well_formedness() {
    let p = corpus_program(corpus::SETINIT_REGISTER);
    let report = check_program(&p);
    assert!(report.is_well_typed());
    let init = MachineState::initial(&p);
    assert!(state_well_formed(&p, &init, &report.tables));
    let ex = explore(&p, 1000, DEFAULT_MAX_PATHS, |s| check_state(&p, s, &report.tables), |_| {});
    assert!(ex.violation.is_none(), "{:?}", ex.violation);
    assert!(ex.paths >= 2);

    // A Raw(C) field holding a fresh object breaks heap well-formedness.
    let mut bad = init.clone();
    let l = bad.heap.alloc(&p, &ClassId::new("C"));
    let r = bad.heap.alloc(&p, &ClassId::new("Registry"));
    bad.heap.update(r, |o| o.fields.insert(FieldId::new("last"), Value::Loc(l))).unwrap();
    assert!(!state_well_formed(&p, &bad, &report.tables));
}

#[test]
fn monitor_agrees_with_full_check() {
    use crate::harness::{generate_program, GenBounds};
    let mut compared = 0;
    for seed in 0..150 {
        let p = generate_program(seed, &GenBounds::default());
        let report = check_program(&p);
        if report.is_structural_failure() {
            continue;
        }
        // Ill-typed programs have partial tables, which gives the monitor failures to agree on too.
        let mut m = WfMonitor::new(&p, &report.tables);
        explore(&p, 300, 64, |s| {
            compared += 1;
            let (fast, full) = (m.check(s), check_state(&p, s, &report.tables));
            assert_eq!(fast.is_ok(), full.is_ok(), "seed {seed}: {fast:?} vs {full:?} at {s}");
            Ok(())
        }, |_| {});
    }
    assert!(compared > 1000);
}

#[test]
fn monitor_sees_a_rewritten_tag() {
    let p = corpus_program(corpus::SETINIT_REGISTER);
    let report = check_program(&p);
    let mut m = WfMonitor::new(&p, &report.tables);
    let out = run(&p, 1000, BranchPolicy::Scripted(vec![]));
    let mut s = MachineState::initial(&p);
    for _ in 0..out.steps - 1 {
        let StepResult::Next(n) = step(&p, s, false) else { panic!("ended early") };
        assert!(m.check(&n).is_ok());
        s = n;
    }
    // Clearing the tag of a registered object invalidates the Init field pointing at it.
    let Some(l) = s.heap.iter().find(|(_, o)| o.init_level.is_some()).map(|(l, _)| l) else { panic!("no tagged object") };
    s.heap.update(l, |o| o.init_level = None).unwrap();
    assert_eq!(m.check(&s).is_ok(), state_well_formed(&p, &s, &report.tables));
    assert!(m.check(&s).is_err());
}
