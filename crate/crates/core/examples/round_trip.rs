//! Generates a program, prints it and parses the text back.

use rawtypes::harness::{generate_program, GenBounds};
use rawtypes::parser::{parse, pretty_print};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let p = generate_program(seed, &GenBounds::default());
    let text = pretty_print(&p);
    print!("{text}");
    let back = parse(&text).expect("printed programs parse");
    println!("\nround trip identical: {}", back == p);
}
