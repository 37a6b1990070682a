use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diag::has_errors;
use crate::model::{validate_structure, ClassId, InitType, Instr, MethodDef, MethodRef, Program};

const ATTEMPTS: u64 = 32;

/// The types directly above `t` in the lattice.
pub fn covers_above(p: &Program, t: &InitType) -> Vec<InitType> {
    match t {
        InitType::Init => leaves(p).into_iter().map(InitType::Raw).collect(),
        InitType::Raw(c) => vec![p.raw_super(c)],
        InitType::RawBot => vec![],
    }
}

/// The types directly below `t` in the lattice.
pub fn covers_below(p: &Program, t: &InitType) -> Vec<InitType> {
    match t {
        InitType::Init => vec![],
        InitType::Raw(c) => {
            let kids: Vec<InitType> = children(p, c).into_iter().map(InitType::Raw).collect();
            if kids.is_empty() {
                vec![InitType::Init]
            } else {
                kids
            }
        }
        InitType::RawBot => p.roots().into_iter().cloned().map(InitType::Raw).collect(),
    }
}

fn children(p: &Program, c: &ClassId) -> Vec<ClassId> {
    p.classes.values().filter(|cd| cd.super_class.as_ref() == Some(c)).map(|cd| cd.id.clone()).collect()
}

fn leaves(p: &Program) -> Vec<ClassId> {
    p.classes.keys().filter(|c| children(p, c).is_empty()).cloned().collect()
}

fn all_methods(p: &Program) -> Vec<MethodRef> {
    p.method_refs()
}

fn method_mut<'a>(p: &'a mut Program, r: &MethodRef) -> &'a mut MethodDef {
    let cd = p.classes.get_mut(&r.class).expect("declared class");
    if r.is_ctor() {
        &mut cd.ctor
    } else {
        cd.methods.get_mut(&r.name).expect("declared method")
    }
}

/// Removes the instruction at `pc` (never the last one) and renumbers targets.
fn delete_instr(m: &mut MethodDef, pc: usize) {
    m.instrs.remove(pc);
    let fix = |t: usize| if t > pc { t - 1 } else { t };
    for ins in &mut m.instrs {
        if let Instr::IfStar { target } = ins {
            *target = fix(*target);
        }
    }
    m.handlers = std::mem::take(&mut m.handlers)
        .into_iter()
        .filter(|((h, _), _)| *h != pc)
        .map(|((h, e), t)| ((fix(h), e), fix(t)))
        .collect();
}

fn try_mutate(p: &Program, rng: &mut ChaCha8Rng) -> Option<Program> {
    let mut q = p.clone();
    let methods = all_methods(&q);
    let r = methods.choose(rng)?.clone();
    match rng.gen_range(0..6) {
        // Field types count as annotations too.
        0 if !q.fields.is_empty() => {
            let f = q.fields.keys().cloned().collect::<Vec<_>>().choose(rng)?.clone();
            let t = q.fields[&f].clone();
            let next = if rng.gen_bool(0.5) { covers_above(&q, &t) } else { covers_below(&q, &t) };
            q.fields.insert(f, next.choose(rng)?.clone());
        }
        0 | 1 => {
            let up = rng.gen_bool(0.5);
            let slot = rng.gen_range(0..4);
            let snapshot = q.clone();
            let m = method_mut(&mut q, &r);
            let t = match slot {
                0 => &mut m.pre,
                1 => &mut m.post,
                2 => &mut m.argtype,
                _ => &mut m.rettype,
            };
            let next = if up { covers_above(&snapshot, t) } else { covers_below(&snapshot, t) };
            *t = next.choose(rng)?.clone();
        }
        2 => {
            let callees: Vec<MethodRef> = methods.iter().filter(|m| !m.is_ctor()).cloned().collect();
            let m = method_mut(&mut q, &r);
            let calls: Vec<usize> =
                (0..m.instrs.len()).filter(|&i| matches!(m.instrs[i], Instr::VirtualCall { .. })).collect();
            let pc = *calls.choose(rng)?;
            let to = callees.choose(rng)?.clone();
            if let Instr::VirtualCall { declaring, method, .. } = &mut m.instrs[pc] {
                if (declaring.clone(), method.clone()) == (to.class.clone(), to.name.clone()) {
                    return None;
                }
                *declaring = to.class;
                *method = to.name;
            }
        }
        3 => {
            let m = method_mut(&mut q, &r);
            let sets: Vec<usize> = (0..m.instrs.len()).filter(|&i| m.instrs[i] == Instr::SetInit).collect();
            let pc = *sets.choose(rng)?;
            delete_instr(m, pc);
        }
        4 => {
            let m = method_mut(&mut q, &r);
            if m.instrs.len() < 3 {
                return None;
            }
            let last = m.instrs.len() - 1;
            let (i, j) = (rng.gen_range(0..last), rng.gen_range(0..last));
            if i == j || m.instrs[i] == m.instrs[j] {
                return None;
            }
            m.instrs.swap(i, j);
        }
        _ => {
            let m = method_mut(&mut q, &r);
            let jumps: Vec<usize> = (0..m.instrs.len()).filter(|&i| matches!(m.instrs[i], Instr::IfStar { .. })).collect();
            let pc = *jumps.choose(rng)?;
            let n = m.instrs.len();
            if let Instr::IfStar { target } = &mut m.instrs[pc] {
                let t = rng.gen_range(0..n);
                if t == *target {
                    return None;
                }
                *target = t;
            }
        }
    }
    (q != *p && !has_errors(&validate_structure(&q))).then_some(q)
}

/// One random structure-preserving change to `p`, determined by `seed`.
///
/// Candidates that fail structural validation are thrown away and another is drawn;
/// if none survives a bounded number of draws, `p` is returned unchanged.
pub fn mutate(p: &Program, seed: u64) -> Program {
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        if let Some(q) = try_mutate(p, &mut rng) {
            return q;
        }
    }
    p.clone()
}

/// Weakens (or strengthens) one annotation of `m` by a single lattice step; used by tests and examples.
pub fn step_annotation(p: &Program, m: &MethodRef, up: bool) -> Option<Program> {
    let mut q = p.clone();
    let t = p.method(m)?.pre.clone();
    let next = if up { covers_above(p, &t) } else { covers_below(p, &t) };
    method_mut(&mut q, m).pre = next.into_iter().next()?;
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check_program;
    use crate::corpus;
    use crate::model::testing::hierarchy;
    use crate::model::MethodName;
    use crate::parser::parse;

    #[test]
    fn covers_step_once() {
        let p = hierarchy(&[("A", None), ("B", Some("A")), ("C", Some("B")), ("D", Some("A"))]);
        for t in p.all_types() {
            for u in covers_above(&p, &t) {
                assert!(p.subtype(&t, &u).unwrap() && t != u);
                // Nothing strictly between.
                for w in p.all_types() {
                    let between = p.subtype(&t, &w).unwrap() && p.subtype(&w, &u).unwrap() && w != t && w != u;
                    assert!(!between, "{t} < {w} < {u}");
                }
                assert!(covers_below(&p, &u).contains(&t), "{u} should cover {t}");
            }
        }
        assert_eq!(covers_below(&p, &InitType::raw("C")), vec![InitType::Init]);
    }

    #[test]
    fn mutants_stay_valid_and_deterministic() {
        let p = parse(corpus::CLASSLOADER).unwrap();
        let mut changed = 0;
        for seed in 0..200 {
            let q = mutate(&p, seed);
            assert_eq!(q, mutate(&p, seed));
            assert!(!has_errors(&validate_structure(&q)));
            if q != p {
                changed += 1;
            }
        }
        assert!(changed > 150);
    }

    #[test]
    fn dropping_setinit_is_rejected() {
        let p = parse(corpus::SETINIT_REGISTER).unwrap();
        let r = MethodRef::ctor(ClassId::new("C"));
        let mut q = p.clone();
        delete_instr(method_mut(&mut q, &r), 3);
        assert!(!has_errors(&validate_structure(&q)));
        assert!(!check_program(&q).is_well_typed());
    }

    #[test]
    fn weakening_an_unused_method_keeps_typing() {
        let src = "class Object { init() { 0: return this; } method main() { 0: return x; } method unused() pre Init post Raw { 0: return x; } }\nmain Object;";
        let p = parse(src).unwrap();
        let q = step_annotation(&p, &MethodRef::new(ClassId::new("Object"), MethodName::new("unused")), true).unwrap();
        assert_eq!(q.method(&MethodRef::new(ClassId::new("Object"), MethodName::new("unused"))).unwrap().pre, InitType::raw("Object"));
        assert!(check_program(&q).is_well_typed());
    }
}
