use proptest::prelude::*;

use rawtypes::checker::{transfer, MethodCtx, TypeState};
use rawtypes::harness::{covers_below, generate_program, GenBounds};
use rawtypes::interp::{run, BranchPolicy};
use rawtypes::model::testing::hierarchy;
use rawtypes::model::{ClassId, InitType, Program, VarId};
use rawtypes::parser::{parse, pretty_print};

const VARS: [&str; 5] = ["this", "arg", "v0", "v1", "v2"];

fn forest() -> impl Strategy<Value = Vec<Option<usize>>> {
    (1usize..=6).prop_flat_map(|n| {
        (0..n)
            .map(|i| if i == 0 { Just(None).boxed() } else { proptest::option::of(0..i).boxed() })
            .collect::<Vec<_>>()
    })
}

fn build(parents: &[Option<usize>]) -> Program {
    let names: Vec<String> = (0..parents.len()).map(|i| format!("K{i}")).collect();
    let pairs: Vec<(&str, Option<&str>)> =
        parents.iter().enumerate().map(|(i, p)| (names[i].as_str(), p.map(|j| names[j].as_str()))).collect();
    hierarchy(&pairs)
}

/// Reflexive-transitive closure of the parent relation, by Warshall.
fn closure(parents: &[Option<usize>]) -> Vec<Vec<bool>> {
    let n = parents.len();
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
        if let Some(j) = parents[i] {
            r[i][j] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                r[i][j] |= r[i][k] && r[k][j];
            }
        }
    }
    r
}

/// One random cover step down from `t` per choice, stopping at the bottom.
fn descend(p: &Program, mut t: InitType, choices: &[u8]) -> InitType {
    for &c in choices {
        let below = covers_below(p, &t);
        if below.is_empty() {
            break;
        }
        t = below[c as usize % below.len()].clone();
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn class_le_is_the_closure_of_super(parents in forest(), a in 0usize..6, b in 0usize..6) {
        let p = build(&parents);
        let n = parents.len();
        let (a, b) = (a % n, b % n);
        let oracle = closure(&parents)[a][b];
        let got = p.class_le(&ClassId::new(format!("K{a}")), &ClassId::new(format!("K{b}"))).unwrap();
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn join_is_an_upper_bound(parents in forest(), i in 0usize..8, j in 0usize..8) {
        let p = build(&parents);
        let ts = p.all_types();
        let (a, b) = (&ts[i % ts.len()], &ts[j % ts.len()]);
        let m = p.join(a, b).unwrap();
        prop_assert!(p.subtype(a, &m).unwrap() && p.subtype(b, &m).unwrap());
        prop_assert_eq!(m, p.join(b, a).unwrap());
    }

    #[test]
    fn transfer_is_monotone(
        seed in any::<u64>(),
        pick in any::<usize>(),
        upper in proptest::collection::vec(any::<usize>(), VARS.len()),
        down in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..4), VARS.len()),
    ) {
        let p = generate_program(seed, &GenBounds::default());
        let refs = p.method_refs();
        let r = &refs[pick % refs.len()];
        let class = p.class(&r.class).unwrap();
        let m = p.method(r).unwrap();
        let pc = (pick / refs.len()) % m.instrs.len();
        let ctx = MethodCtx::new(&p, class, m);
        let types = p.all_types();
        let (mut lo, mut hi) = (TypeState::all_init(&[]), TypeState::all_init(&[]));
        for (k, v) in VARS.iter().enumerate() {
            let t = types[upper[k] % types.len()].clone();
            lo.set(VarId::new(v), descend(&p, t.clone(), &down[k]));
            hi.set(VarId::new(v), t);
        }
        prop_assert!(lo.le(&p, &hi).unwrap());
        let ins = &m.instrs[pc];
        if let Ok(out_hi) = transfer(&ctx, pc, ins, &hi) {
            let out_lo = transfer(&ctx, pc, ins, &lo);
            prop_assert!(out_lo.is_ok(), "{} accepts {} but not {}: {:?}", ins, hi, lo, out_lo);
            prop_assert!(out_lo.unwrap().le(&p, &out_hi).unwrap(), "{} not monotone", ins);
        }
    }

    #[test]
    fn printing_then_parsing_is_the_identity(seed in any::<u64>(), classes in 1usize..4, instrs in 2usize..9) {
        let b = GenBounds { max_classes: classes, max_instrs_per_method: instrs, ..GenBounds::default() };
        let p = generate_program(seed, &b);
        let text = pretty_print(&p);
        prop_assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn seeded_runs_repeat(seed in any::<u64>(), coin in any::<u64>()) {
        let p = generate_program(seed, &GenBounds::default());
        let a = run(&p, 300, BranchPolicy::Seeded(coin));
        let b = run(&p, 300, BranchPolicy::Seeded(coin));
        prop_assert_eq!(&a.outcome, &b.outcome);
        prop_assert_eq!(a.choices.clone(), b.choices.clone());
        // Replaying the recorded choices takes the same path.
        let c = run(&p, 300, BranchPolicy::Scripted(a.choices));
        prop_assert_eq!(c.outcome, a.outcome);
        prop_assert_eq!(c.steps, a.steps);
    }
}
