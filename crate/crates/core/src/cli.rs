//! Command-line front end: `check`, `run` and `fuzz`.
//!
//! [`execute`] does all the work and returns the exit code with the text to print, so the
//! binary stays a thin wrapper and tests can drive commands without spawning processes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use crate::checker::check_program;
use crate::corpus;
use crate::diag::Diagnostic;
use crate::harness::{fuzz, load_trace, persist_counterexample, FuzzConfig, FuzzSummary, GenBounds, PhaseSummary};
use crate::interp::{run_traced, BranchPolicy, Outcome, RunOutcome, DEFAULT_FUEL, DEFAULT_MAX_PATHS};
use crate::parser::{parse, parse_file};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ILL_TYPED: i32 = 1;
/// Parse or structural errors, and invalid arguments.
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_STUCK: i32 = 4;
pub const EXIT_FUEL: i32 = 5;
/// `fuzz` found an accepted program that misbehaves.
pub const EXIT_UNSOUND: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "rawtypes", version, about = "Initialization type checker, interpreter and soundness fuzzer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Type check `.rt` programs.
    Check(CheckArgs),
    /// Run a program, type checked or not.
    Run(RunArgs),
    /// Check the type system against the interpreter on generated programs and mutants.
    Fuzz(FuzzArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub path: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FUEL)]
    pub fuel: usize,
    /// Seed of the coin flipped at each `if *`.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Explore every branch and report the worst outcome.
    #[arg(long, conflicts_with = "replay")]
    pub exhaustive: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_PATHS)]
    pub max_paths: usize,
    /// Follow the branch choices stored in a trace file (as written by `fuzz --out`).
    #[arg(long)]
    pub replay: Option<PathBuf>,
    /// Print one line per step.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    /// Generated programs.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Mutants of the well-typed programs; defaults to `--trials`.
    #[arg(long)]
    pub mutants: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub fuel: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_PATHS)]
    pub max_paths: usize,
    #[arg(long, default_value_t = 3)]
    pub max_classes: usize,
    #[arg(long, default_value_t = 3)]
    pub max_methods: usize,
    #[arg(long, default_value_t = 8)]
    pub max_instrs: usize,
    #[arg(long, default_value_t = 3)]
    pub max_vars: usize,
    #[arg(long, default_value_t = 2)]
    pub max_fields: usize,
    #[arg(long)]
    pub no_casts: bool,
    #[arg(long)]
    pub no_handlers: bool,
    /// Write each counterexample as `<name>.rt` plus a `<name>.trace` under this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

impl FuzzArgs {
    pub fn bounds(&self) -> GenBounds {
        GenBounds {
            max_classes: self.max_classes,
            max_methods_per_class: self.max_methods,
            max_instrs_per_method: self.max_instrs,
            max_vars: self.max_vars,
            max_fields: self.max_fields,
            allow_casts: !self.no_casts,
            allow_handlers: !self.no_handlers,
        }
    }
}

/// What a command prints and how it exits.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Response {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Response {
    fn fail(code: i32, msg: impl Into<String>) -> Self {
        Self { code, stdout: String::new(), stderr: msg.into() + "\n" }
    }
}

pub fn execute(cli: &Cli) -> Response {
    match &cli.command {
        Command::Check(a) => cmd_check(&a.paths, a.format),
        Command::Run(a) => cmd_run(a),
        Command::Fuzz(a) => cmd_fuzz(a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum FileVerdict {
    WellTyped,
    IllTyped,
    Invalid,
    IoError,
}

impl FileVerdict {
    fn as_str(self) -> &'static str {
        match self {
            FileVerdict::WellTyped => "well-typed",
            FileVerdict::IllTyped => "ill-typed",
            FileVerdict::Invalid => "invalid",
            FileVerdict::IoError => "io-error",
        }
    }

    fn code(self) -> i32 {
        match self {
            FileVerdict::WellTyped => EXIT_OK,
            FileVerdict::IllTyped => EXIT_ILL_TYPED,
            FileVerdict::Invalid => EXIT_INVALID,
            FileVerdict::IoError => EXIT_IO,
        }
    }
}

struct FileCheck {
    path: String,
    verdict: FileVerdict,
    diagnostics: Vec<Diagnostic>,
    tables: Json,
    io_error: Option<String>,
}

fn check_one(path: &Path) -> FileCheck {
    let name = path.display().to_string();
    let mut fc = FileCheck {
        path: name.clone(),
        verdict: FileVerdict::IoError,
        diagnostics: Vec::new(),
        tables: Json::Null,
        io_error: None,
    };
    let src = match fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            fc.io_error = Some(format!("{name}: {e}"));
            return fc;
        }
    };
    match parse_file(&name, &src) {
        Err(diags) => {
            fc.verdict = FileVerdict::Invalid;
            fc.diagnostics = diags;
        }
        Ok(parsed) => {
            let mut report = check_program(&parsed.program);
            parsed.source_map.attach(&mut report.diagnostics);
            fc.verdict = if report.is_well_typed() { FileVerdict::WellTyped } else { FileVerdict::IllTyped };
            fc.tables = serde_json::to_value(&report).map(|mut v| v["tables"].take()).unwrap_or(Json::Null);
            fc.diagnostics = report.diagnostics;
        }
    }
    fc
}

/// Exit code: the worst over all files, where an I/O failure beats a parse error, which
/// beats a type error.
pub fn cmd_check(paths: &[PathBuf], format: Format) -> Response {
    let files: Vec<FileCheck> = paths.iter().map(|p| check_one(p)).collect();
    let worst = files.iter().map(|f| f.verdict).max().unwrap_or(FileVerdict::WellTyped);
    let mut r = Response { code: worst.code(), ..Response::default() };
    for f in &files {
        if let Some(e) = &f.io_error {
            let _ = writeln!(r.stderr, "{e}");
        }
    }
    match format {
        Format::Text => {
            for f in &files {
                for d in &f.diagnostics {
                    let _ = writeln!(r.stdout, "{d}");
                }
                let _ = writeln!(r.stdout, "{}: {}", f.path, f.verdict.as_str());
            }
        }
        Format::Machine => {
            let doc = json!({
                "verdict": worst.as_str(),
                "diagnostics": files.iter().flat_map(|f| &f.diagnostics).collect::<Vec<_>>(),
                "tables": files.iter().map(|f| (f.path.clone(), f.tables.clone())).collect::<serde_json::Map<_, _>>(),
                "files": files.iter().map(|f| json!({"path": f.path, "verdict": f.verdict.as_str()})).collect::<Vec<_>>(),
            });
            r.stdout = serde_json::to_string_pretty(&doc).expect("json") + "\n";
        }
    }
    r
}

fn outcome_code(o: &Outcome) -> i32 {
    match o {
        Outcome::Final { .. } | Outcome::FinalExceptional { .. } => EXIT_OK,
        Outcome::Stuck { .. } => EXIT_STUCK,
        Outcome::FuelExhausted => EXIT_FUEL,
    }
}

fn bits(choices: &[bool]) -> String {
    choices.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

pub fn cmd_run(a: &RunArgs) -> Response {
    let name = a.path.display().to_string();
    let src = match fs::read_to_string(&a.path) {
        Ok(s) => s,
        Err(e) => return Response::fail(EXIT_IO, format!("{name}: {e}")),
    };
    let program = match parse_file(&name, &src) {
        Ok(parsed) => parsed.program,
        Err(diags) => {
            let lines: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
            return Response::fail(EXIT_INVALID, lines.join("\n"));
        }
    };
    let policy = if a.exhaustive {
        BranchPolicy::Exhaustive { max_paths: a.max_paths }
    } else if let Some(t) = &a.replay {
        match load_trace(t) {
            Ok(choices) => BranchPolicy::Scripted(choices),
            Err(e) => return Response::fail(EXIT_IO, format!("{}: {e}", t.display())),
        }
    } else {
        BranchPolicy::Seeded(a.seed)
    };
    let out: RunOutcome = run_traced(&program, a.fuel, policy, a.trace);
    let mut r = Response { code: outcome_code(&out.outcome), ..Response::default() };
    match a.format {
        Format::Text => {
            for line in &out.trace {
                let _ = writeln!(r.stdout, "{line}");
            }
            let _ = writeln!(r.stdout, "{} after {} steps, choices [{}]", out.outcome, out.steps, bits(&out.choices));
        }
        Format::Machine => {
            let doc = json!({
                "verdict": outcome_kind(&out.outcome),
                "diagnostics": Vec::<Diagnostic>::new(),
                "outcome": out.outcome,
                "steps": out.steps,
                "choices": bits(&out.choices),
                "trace": out.trace,
            });
            r.stdout = serde_json::to_string_pretty(&doc).expect("json") + "\n";
        }
    }
    r
}

fn outcome_kind(o: &Outcome) -> &'static str {
    match o {
        Outcome::Final { .. } => "final",
        Outcome::FinalExceptional { .. } => "final-exceptional",
        Outcome::Stuck { .. } => "stuck",
        Outcome::FuelExhausted => "fuel-exhausted",
    }
}

fn phase_line(label: &str, s: &PhaseSummary) -> String {
    format!(
        "{label}: {} programs, {} well-typed, {} ill-typed, {} paths ({} truncated), max steps {}, stuck {}, ill-formed states {}",
        s.programs, s.well_typed, s.ill_typed, s.paths, s.truncated, s.max_steps, s.stuck_found, s.wf_violations
    )
}

pub fn cmd_fuzz(a: &FuzzArgs) -> Response {
    let bounds = a.bounds();
    if let Err(e) = bounds.validate() {
        return Response::fail(EXIT_INVALID, format!("invalid bounds: {e}"));
    }
    let cfg = FuzzConfig {
        bounds,
        seed: a.seed,
        trials: a.trials,
        mutants: a.mutants.unwrap_or(a.trials),
        fuel: a.fuel,
        max_paths: a.max_paths,
        // Well-typed corpus programs are mutation bases too.
        extra_bases: corpus::well_typed(),
    };
    let summary: FuzzSummary = fuzz(&cfg);
    let mut r = Response { code: if summary.is_sound() { EXIT_OK } else { EXIT_UNSOUND }, ..Response::default() };
    if let Some(dir) = &a.out {
        for (i, f) in summary.counterexamples.iter().enumerate() {
            let Ok(p) = parse(&f.program) else { continue };
            match persist_counterexample(dir, &format!("cex{i}"), &p, &f.counterexample) {
                Ok(path) => {
                    let _ = writeln!(r.stderr, "wrote {}", path.display());
                }
                Err(e) => return Response::fail(EXIT_IO, format!("{}: {e}", dir.display())),
            }
        }
    }
    match a.format {
        Format::Text => {
            let _ = writeln!(r.stdout, "{}", phase_line("generated", &summary.generated));
            let _ = writeln!(r.stdout, "{}", phase_line("mutants", &summary.mutated));
            let _ = writeln!(r.stdout, "counterexamples: {}", summary.counterexamples.len());
            for f in &summary.counterexamples {
                let c = &f.counterexample;
                let _ = writeln!(r.stdout, "== {}: {} [{}]\n{}", f.origin, c.reason, bits(&c.trace), f.program);
            }
        }
        Format::Machine => {
            let doc = json!({
                "verdict": if summary.is_sound() { "sound" } else { "unsound" },
                "diagnostics": Vec::<Diagnostic>::new(),
                "trials": summary,
            });
            r.stdout = serde_json::to_string_pretty(&doc).expect("json") + "\n";
        }
    }
    r
}
