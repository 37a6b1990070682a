use std::io::Write;

use clap::Parser;
use rawtypes::cli::{execute, Cli};

fn main() {
    let r = execute(&Cli::parse());
    print!("{}", r.stdout);
    eprint!("{}", r.stderr);
    let _ = std::io::stdout().flush();
    std::process::exit(r.code);
}
