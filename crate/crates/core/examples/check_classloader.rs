//! Type checks the class loader programs: the annotated original, the attacker subclass
//! and the patched version.

use rawtypes::corpus;
use rawtypes::parser::parse_file;
use rawtypes::check_program;

fn main() {
    for (file, src) in [
        ("classloader.rt", corpus::CLASSLOADER),
        ("classloader_attack.rt", corpus::CLASSLOADER_ATTACK),
        ("classloader_patched.rt", corpus::CLASSLOADER_PATCHED),
    ] {
        let parsed = parse_file(file, src).expect("corpus parses");
        let mut report = check_program(&parsed.program);
        parsed.source_map.attach(&mut report.diagnostics);
        println!("{file}: {:?}", report.verdict);
        for d in &report.diagnostics {
            println!("  {d}");
        }
    }
}
