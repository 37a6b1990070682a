//! A small soundness campaign: random programs and mutants of the accepted ones, each
//! run on every branch. Usage: `soundness_fuzz [trials] [seed]`.

use rawtypes::harness::{fuzz, FuzzConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = FuzzConfig { trials, mutants: trials, seed, ..FuzzConfig::default() };
    let s = fuzz(&cfg);
    println!("generated: {:?}", s.generated);
    println!("mutants:   {:?}", s.mutated);
    for f in &s.counterexamples {
        println!("counterexample ({}): {}\n{}", f.origin, f.counterexample.reason, f.program);
    }
    println!("sound: {}", s.is_sound());
}
