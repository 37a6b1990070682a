//! A raw method that casts its receiver to `Init` before using it is well typed; on the
//! attack path the cast fails with `cce` instead of reaching the protected call.

use rawtypes::corpus;
use rawtypes::interp::{explore, BranchPolicy, run};
use rawtypes::parser::parse;
use rawtypes::check_program;

fn main() {
    let p = parse(corpus::CLASSLOADER_CAST).expect("corpus parses");
    println!("verdict: {:?}", check_program(&p).verdict);
    explore(&p, 1000, 64, |_| Ok(()), |path| {
        let bits: String = path.choices.iter().map(|b| if *b { '1' } else { '0' }).collect();
        println!("path [{bits}]: {}", path.outcome);
    });
    println!("worst: {}", run(&p, 1000, BranchPolicy::Exhaustive { max_paths: 64 }).outcome);
}
