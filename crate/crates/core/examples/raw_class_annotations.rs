//! A getter called from a subclass constructor: accepted with `pre Raw(Ex1A)`,
//! rejected with `pre Init`.

use rawtypes::corpus;
use rawtypes::interp::{run, BranchPolicy};
use rawtypes::parser::parse;
use rawtypes::check_program;

fn main() {
    for (name, src) in [("pre Raw(Ex1A)", corpus::EX1_RAW_CLASS), ("pre Init", corpus::EX1_INIT_GETTER)] {
        let p = parse(src).expect("corpus parses");
        let report = check_program(&p);
        println!("getF {name}: {:?}", report.verdict);
        for d in report.errors() {
            println!("  {d}");
        }
        let out = run(&p, 1000, BranchPolicy::Exhaustive { max_paths: 64 });
        println!("  worst run: {}", out.outcome);
    }
}
