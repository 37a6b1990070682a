//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.
//!
//! Runs without the libtest harness so the lines reach the terminal uncaptured.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rawtypes::corpus;
use rawtypes::harness::{fuzz_generated, fuzz_mutants, generate_program, FuzzConfig, FuzzSummary, GenBounds};
use rawtypes::interp::{value_has_type, Heap, HeapObject, Value};
use rawtypes::model::testing::hierarchy;
use rawtypes::model::{ClassId, InitType, Program};
use rawtypes::parser::{parse, pretty_print};

struct Criterion {
    name: &'static str,
    ok: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn timed(name: &'static str, budget: Duration, f: impl FnOnce() -> (bool, String)) -> Criterion {
    let t = Instant::now();
    let (ok, detail) = f();
    Criterion { name, ok, detail, elapsed: t.elapsed(), budget }
}

fn corpus_path(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(file)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rawtypes")).args(args).output().expect("binary runs")
}

fn check_file(file: &str) -> (Option<i32>, String) {
    let out = cli(&["check", corpus_path(file).to_str().unwrap()]);
    (out.status.code(), String::from_utf8_lossy(&out.stdout).into_owned())
}

/// `line:col` of the first instruction after `class <class>` whose text contains `needle`,
/// found by scanning the source directly.
fn locate(src: &str, class: &str, needle: &str) -> Option<String> {
    let start = src.lines().position(|l| l.trim_start().starts_with(&format!("class {class} ")))?;
    src.lines().enumerate().skip(start).find(|(_, l)| l.contains(needle)).map(|(i, l)| {
        let col = l.len() - l.trim_start().len() + 1;
        format!("{}:{col}", i + 1)
    })
}

fn classloader() -> (bool, String) {
    let mut notes = Vec::new();
    let mut ok = true;
    for file in ["classloader.rt", "classloader_patched.rt"] {
        let (code, _) = check_file(file);
        ok &= code == Some(0);
        notes.push(format!("{file} exit {code:?}"));
    }
    let (code, stdout) = check_file("classloader_attack.rt");
    let at = locate(corpus::CLASSLOADER_ATTACK, "Attacker", "ClassLoader::resolveClass(").unwrap_or_default();
    let expected = format!("classloader_attack.rt:{at} call-pre-violation-static");
    let located = stdout.lines().any(|l| l.contains(&expected));
    ok &= code == Some(1) && located && !at.is_empty();
    notes.push(format!("classloader_attack.rt exit {code:?}, diagnostic at {at}: {}", if located { "yes" } else { "no" }));
    (ok, notes.join("; "))
}

fn raw_class_motivation() -> (bool, String) {
    let accepted = rawtypes::check_program(&parse(corpus::EX1_RAW_CLASS).unwrap());
    // The rejected variant differs in the one annotation only.
    let strict_src = corpus::EX1_RAW_CLASS.replace("method getF() pre Raw(Ex1A)", "method getF() pre Init");
    let strict = rawtypes::check_program(&parse(&strict_src).unwrap());
    let in_ex1b = strict.errors().all(|d| d.to_string().starts_with("Ex1B.init@"));
    let ok = strict_src != corpus::EX1_RAW_CLASS
        && accepted.is_well_typed()
        && !strict.is_well_typed()
        && in_ex1b
        && strict.errors().count() >= 1;
    let (c1, _) = check_file("ex1_raw_class.rt");
    let (c2, _) = check_file("ex1_init_getter.rt");
    let ok = ok && c1 == Some(0) && c2 == Some(1);
    let errs: Vec<String> = strict.errors().map(|d| d.to_string()).collect();
    (ok, format!("pre Raw(Ex1A): {:?}; pre Init: {:?} [{}]; cli exits {c1:?}/{c2:?}", accepted.verdict, strict.verdict, errs.join(" | ")))
}

fn demonstrated_stuck() -> (bool, String) {
    let out = cli(&["run", "--exhaustive", "--fuel", "1000", corpus_path("classloader_attack.rt").to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let line = stdout.lines().last().unwrap_or("").to_string();
    let ok = out.status.code() == Some(4) && line.starts_with("Stuck(call-pre-violation) at Attacker.finalize");
    (ok, format!("exit {:?}: {line}", out.status.code()))
}

fn round_trip() -> (bool, String) {
    let b = GenBounds::default();
    let mut bad = Vec::new();
    for seed in 0..1000 {
        let p = generate_program(seed, &b);
        if parse(&pretty_print(&p)).ok().as_ref() != Some(&p) {
            bad.push(seed);
        }
    }
    (bad.is_empty(), format!("1000 programs, {} mismatches {:?}", bad.len(), &bad[..bad.len().min(5)]))
}

/// A class or the ends of the lattice, numbered independently of the library's types.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum T {
    Init,
    Raw(usize),
    Bot,
}

fn to_init(t: T) -> InitType {
    match t {
        T::Init => InitType::Init,
        T::Raw(i) => InitType::raw(format!("K{i}").as_str()),
        T::Bot => InitType::RawBot,
    }
}

/// Every forest on `n` classes, with parents numbered below their children.
fn forests(n: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![vec![]];
    for i in 0..n {
        let mut next = Vec::new();
        for f in &out {
            for parent in std::iter::once(None).chain((0..i).map(Some)) {
                let mut g = f.clone();
                g.push(parent);
                next.push(g);
            }
        }
        out = next;
    }
    out
}

fn build(parents: &[Option<usize>]) -> Program {
    let names: Vec<String> = (0..parents.len()).map(|i| format!("K{i}")).collect();
    let pairs: Vec<(&str, Option<&str>)> =
        parents.iter().enumerate().map(|(i, p)| (names[i].as_str(), p.map(|j| names[j].as_str()))).collect();
    hierarchy(&pairs)
}

/// The oracle order: `Init` at the bottom, `Raw` on top, `Raw(a) ⊑ Raw(b)` when `b` is on
/// the parent chain of `a`.
fn oracle_le(parents: &[Option<usize>], a: T, b: T) -> bool {
    match (a, b) {
        (T::Init, _) | (_, T::Bot) => true,
        (T::Raw(x), T::Raw(y)) => {
            let mut cur = Some(x);
            while let Some(c) = cur {
                if c == y {
                    return true;
                }
                cur = parents[c];
            }
            false
        }
        _ => false,
    }
}

fn lattice_laws() -> (bool, String) {
    let mut failures: Vec<String> = Vec::new();
    let (mut hierarchies, mut monotony_checks) = (0usize, 0usize);
    for n in 1..=4 {
        for parents in forests(n) {
            hierarchies += 1;
            let p = build(&parents);
            let types: Vec<T> = std::iter::once(T::Init).chain((0..n).map(T::Raw)).chain([T::Bot]).collect();
            let le = |a: T, b: T| p.subtype(&to_init(a), &to_init(b)).unwrap();
            for &a in &types {
                if !le(a, a) {
                    failures.push(format!("{parents:?}: {a:?} not reflexive"));
                }
                for &b in &types {
                    if le(a, b) != oracle_le(&parents, a, b) {
                        failures.push(format!("{parents:?}: order disagrees on {a:?}, {b:?}"));
                    }
                    if a != b && le(a, b) && le(b, a) {
                        failures.push(format!("{parents:?}: {a:?} and {b:?} not antisymmetric"));
                    }
                    for &c in &types {
                        if le(a, b) && le(b, c) && !le(a, c) {
                            failures.push(format!("{parents:?}: {a:?} {b:?} {c:?} not transitive"));
                        }
                    }
                    // Least upper bound by brute force over the oracle order.
                    let ubs: Vec<T> =
                        types.iter().copied().filter(|&u| oracle_le(&parents, a, u) && oracle_le(&parents, b, u)).collect();
                    let least: Vec<T> =
                        ubs.iter().copied().filter(|&u| ubs.iter().all(|&v| oracle_le(&parents, u, v))).collect();
                    let got = p.join(&to_init(a), &to_init(b)).unwrap();
                    if least.len() != 1 || got != to_init(least[0]) {
                        failures.push(format!("{parents:?}: join {a:?} {b:?} = {got}, lub {least:?}"));
                    }
                }
            }
            monotony_checks += monotony(&p, n, &parents, &types, &mut failures);
        }
    }
    failures.truncate(5);
    (
        failures.is_empty(),
        format!("{hierarchies} hierarchies, {monotony_checks} monotony checks; {}", if failures.is_empty() { "no violations".into() } else { failures.join(" | ") }),
    )
}

/// Over every heap of at most three objects (any class, any tag): `h ⊢ v : t1` and
/// `t1 ⊑ t2` give `h ⊢ v : t2`.
fn monotony(p: &Program, n: usize, parents: &[Option<usize>], types: &[T], failures: &mut Vec<String>) -> usize {
    let objects: Vec<(usize, Option<usize>)> =
        (0..n).flat_map(|c| std::iter::once(None).chain((0..n).map(Some)).map(move |t| (c, t))).collect();
    let pairs: Vec<(InitType, InitType)> = types
        .iter()
        .flat_map(|&a| types.iter().map(move |&b| (a, b)))
        .filter(|&(a, b)| oracle_le(parents, a, b))
        .map(|(a, b)| (to_init(a), to_init(b)))
        .collect();
    let mut checks = 0;
    let mut heaps: Vec<Vec<(usize, Option<usize>)>> = vec![vec![]];
    for size in 0..=3 {
        for objs in heaps.iter().filter(|h| h.len() == size) {
            let mut h = Heap::new();
            for &(c, tag) in objs {
                h.push(HeapObject {
                    dyn_class: ClassId::new(format!("K{c}")),
                    init_level: tag.map(|t| ClassId::new(format!("K{t}"))),
                    fields: BTreeMap::new(),
                });
            }
            // One dangling location as well.
            let values = std::iter::once(Value::Null).chain((0..=size).map(Value::Loc));
            for v in values {
                for (t1, t2) in &pairs {
                    checks += 1;
                    if value_has_type(p, &h, v, t1) && !value_has_type(p, &h, v, t2) {
                        failures.push(format!("{parents:?} heap {objs:?}: {v} has {t1} but not {t2}"));
                    }
                }
            }
        }
        if size < 3 {
            let grown: Vec<_> = heaps
                .iter()
                .filter(|h| h.len() == size)
                .flat_map(|h| objects.iter().map(move |o| [h.clone(), vec![*o]].concat()))
                .collect();
            heaps.extend(grown);
        }
    }
    checks
}

fn main() {
    let mut results = vec![
        timed("corpus fidelity: class loader", secs(3), classloader),
        timed("corpus fidelity: Raw(C) getter", secs(2), raw_class_motivation),
        timed("lattice laws", secs(60), lattice_laws),
        timed("demonstrated stuckness", secs(1), demonstrated_stuck),
        timed("parser round-trip", secs(30), round_trip),
    ];

    let cfg = FuzzConfig {
        trials: 10_000,
        mutants: 10_000,
        fuel: 1000,
        max_paths: 1 << 12,
        extra_bases: corpus::well_typed(),
        ..FuzzConfig::default()
    };
    let mut summary = FuzzSummary::default();
    let t = Instant::now();
    let accepted = fuzz_generated(&cfg, &mut summary);
    let gen_time = t.elapsed();
    let g = summary.generated.clone();
    let nonvacuous = g.well_typed > 0 && g.ill_typed > 0;
    let gen_detail = format!("{} programs, {} accepted, {} paths ({} truncated)", g.programs, g.well_typed, g.paths, g.truncated);
    results.push(Criterion {
        name: "soundness (progress)",
        ok: g.programs >= 10_000 && nonvacuous && g.stuck_found == 0,
        detail: format!("{gen_detail}, {} stuck", g.stuck_found),
        elapsed: gen_time,
        budget: secs(300),
    });
    results.push(Criterion {
        name: "soundness (preservation)",
        ok: g.programs >= 10_000 && nonvacuous && g.wf_violations == 0,
        detail: format!("{gen_detail}, {} ill-formed states", g.wf_violations),
        elapsed: gen_time,
        budget: secs(300),
    });

    let t = Instant::now();
    let mut bases: Vec<&Program> = cfg.extra_bases.iter().collect();
    bases.extend(accepted.iter());
    fuzz_mutants(&cfg, &bases, &mut summary);
    let m = &summary.mutated;
    results.push(Criterion {
        name: "mutation probe",
        ok: m.programs >= 10_000 && m.well_typed > 0 && m.stuck_found == 0 && m.wf_violations == 0,
        detail: format!(
            "{} mutants of {} bases, {} accepted, {} rejected, {} stuck, {} ill-formed states",
            m.programs,
            bases.len(),
            m.well_typed,
            m.ill_typed,
            m.stuck_found,
            m.wf_violations
        ),
        elapsed: t.elapsed(),
        budget: secs(300),
    });
    for f in summary.counterexamples.iter().take(3) {
        eprintln!("counterexample ({}): {}\n{}", f.origin, f.counterexample.reason, f.program);
    }

    let mut failed = 0;
    for c in &results {
        let in_time = c.elapsed <= c.budget;
        let pass = c.ok && in_time;
        failed += usize::from(!pass);
        println!(
            "{} {} ({:.2}s, budget {}s{}): {}",
            if pass { "PASS" } else { "FAIL" },
            c.name,
            c.elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            c.detail
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
