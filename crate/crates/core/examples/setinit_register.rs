//! `setinit` lets a constructor publish `this` as `Raw(C)` before it returns.
//! Prints the type state the checker inferred at each instruction of the constructor.

use rawtypes::corpus;
use rawtypes::model::{ClassId, MethodRef};
use rawtypes::parser::parse;
use rawtypes::check_program;

fn main() {
    for (name, src) in [("with setinit", corpus::SETINIT_REGISTER), ("without", corpus::SETINIT_MISSING)] {
        let p = parse(src).expect("corpus parses");
        let report = check_program(&p);
        println!("{name}: {:?}", report.verdict);
        let ctor = MethodRef::ctor(ClassId::new("C"));
        let instrs = &p.method(&ctor).expect("C has a constructor").instrs;
        if let Some(table) = report.tables.get(&ctor) {
            for (pc, state) in table {
                println!("  {pc}: {:<40} {}", instrs[*pc].to_string(), state);
            }
        }
        for d in report.errors() {
            println!("  {d}");
        }
    }
}
