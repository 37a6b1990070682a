//! Runs the rejected attacker program anyway. Exploring every branch finds the path on
//! which the finalizer calls a method needing an initialized receiver with a raw one.

use rawtypes::corpus;
use rawtypes::interp::{run_traced, BranchPolicy};
use rawtypes::parser::parse;

fn main() {
    let p = parse(corpus::CLASSLOADER_ATTACK).expect("corpus parses");
    let out = run_traced(&p, 1000, BranchPolicy::Exhaustive { max_paths: 64 }, true);
    for line in &out.trace {
        println!("{line}");
    }
    println!("=> {}", out.outcome);
    println!("final state: {}", out.state);
}
