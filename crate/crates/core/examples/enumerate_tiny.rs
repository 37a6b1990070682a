//! Enumerates every program in a tiny space and runs the soundness trial on each.

use rawtypes::harness::{count_small_programs, enumerate_small_programs, soundness_trial, GenBounds};

fn main() {
    let b = GenBounds {
        max_classes: 1,
        max_methods_per_class: 1,
        max_instrs_per_method: 3,
        max_vars: 1,
        max_fields: 0,
        allow_casts: false,
        allow_handlers: false,
    };
    println!("space size: {}", count_small_programs(&b).expect("small space"));
    let (mut accepted, mut total, mut bad) = (0, 0, 0);
    for p in enumerate_small_programs(&b).expect("small space") {
        let v = soundness_trial(&p, 200);
        total += 1;
        accepted += usize::from(v.typecheck == rawtypes::Verdict::WellTyped);
        bad += usize::from(v.is_counterexample());
    }
    println!("{total} programs, {accepted} accepted, {bad} counterexamples");
}
