use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::checker::{check_program, Verdict};
use crate::interp::{explore, run, BranchPolicy, MachineState, Outcome, StepResult, TypeTables, WfMonitor};
use crate::interp::{step, DEFAULT_MAX_PATHS};
use crate::model::Program;
use crate::parser::pretty_print;

/// A path on which an accepted program misbehaved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Branch choices from the initial state, `true` = jump.
    pub trace: Vec<bool>,
    pub kind: ViolationKind,
    pub reason: String,
    /// The offending state, printed.
    pub state: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Stuck,
    IllFormedState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialVerdict {
    pub digest: String,
    pub typecheck: Verdict,
    /// Explored paths.
    pub runs: usize,
    pub max_steps: usize,
    pub truncated: bool,
    pub stuck_found: bool,
    pub wf_violation_found: bool,
    pub first_counterexample: Option<Counterexample>,
}

impl TrialVerdict {
    pub fn is_counterexample(&self) -> bool {
        self.typecheck == Verdict::WellTyped && (self.stuck_found || self.wf_violation_found)
    }
}

/// Hex SHA-256 of the canonical text of `p`.
pub fn program_digest(p: &Program) -> String {
    let hash = Sha256::digest(pretty_print(p).as_bytes());
    hash.iter().map(|b| format!("{b:02x}")).collect()
}

/// Type checks `p`; if it is accepted, runs it on every branch (up to the path cap) and checks
/// progress and well-formedness after every step.
pub fn soundness_trial(p: &Program, fuel: usize) -> TrialVerdict {
    soundness_trial_with(p, fuel, DEFAULT_MAX_PATHS)
}

pub fn soundness_trial_with(p: &Program, fuel: usize, max_paths: usize) -> TrialVerdict {
    let report = check_program(p);
    let mut v = TrialVerdict {
        digest: program_digest(p),
        typecheck: report.verdict,
        runs: 0,
        max_steps: 0,
        truncated: false,
        stuck_found: false,
        wf_violation_found: false,
        first_counterexample: None,
    };
    if !report.is_well_typed() {
        return v;
    }
    let tables = &report.tables;
    let mut stuck: Option<Counterexample> = None;
    let mut wf = WfMonitor::new(p, tables);
    let ex = explore(p, fuel, max_paths, |s| wf.check(s), |path| {
        if let Outcome::Stuck { reason, method, pc } = &path.outcome {
            if stuck.is_none() {
                stuck = Some(Counterexample {
                    trace: path.choices.clone(),
                    kind: ViolationKind::Stuck,
                    reason: format!("{reason} at {method} pc {pc}"),
                    state: path.state.to_string(),
                });
            }
        }
    });
    v.runs = ex.paths;
    v.max_steps = ex.max_steps;
    v.truncated = ex.truncated;
    v.stuck_found = stuck.is_some();
    if let Some((trace, state, msg)) = ex.violation {
        v.wf_violation_found = true;
        v.first_counterexample =
            Some(Counterexample { trace, kind: ViolationKind::IllFormedState, reason: msg, state: state.to_string() });
    } else {
        v.first_counterexample = stuck;
    }
    v
}

/// Re-runs the path of `cex` and reports the violation it reaches, if any.
pub fn replay(p: &Program, cex: &Counterexample, fuel: usize) -> Option<String> {
    let report = check_program(p);
    replay_path(p, &cex.trace, fuel, &report.tables)
}

fn replay_path(p: &Program, choices: &[bool], fuel: usize, tables: &TypeTables) -> Option<String> {
    let mut s = MachineState::initial(p);
    let mut wf = WfMonitor::new(p, tables);
    if let Err(e) = wf.check(&s) {
        return Some(e);
    }
    let mut it = choices.iter().copied();
    for _ in 0..fuel {
        let jump = if s.at_branch(p) { it.next().unwrap_or(false) } else { false };
        match step(p, s, jump) {
            StepResult::Next(n) => {
                if let Err(e) = wf.check(&n) {
                    return Some(e);
                }
                s = n;
            }
            StepResult::Stuck { reason, method, pc, .. } => return Some(format!("{reason} at {method} pc {pc}")),
            StepResult::Final(..) | StepResult::FinalExceptional(..) => return None,
        }
    }
    None
}

/// Writes `<dir>/<name>.rt` and the branch trace next to it as `<name>.trace`.
pub fn persist_counterexample(dir: &Path, name: &str, p: &Program, cex: &Counterexample) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let rt = dir.join(format!("{name}.rt"));
    fs::write(&rt, pretty_print(p))?;
    let bits: String = cex.trace.iter().map(|b| if *b { '1' } else { '0' }).collect();
    fs::write(dir.join(format!("{name}.trace")), format!("{bits}\n# {}\n", cex.reason))?;
    Ok(rt)
}

/// Reads a trace sidecar: the first line holds the choices as `0`/`1`.
pub fn load_trace(path: &Path) -> io::Result<Vec<bool>> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().next().unwrap_or("").chars().filter_map(|c| match c {
        '1' => Some(true),
        '0' => Some(false),
        _ => None,
    }).collect())
}

/// Runs `p` along a stored trace.
pub fn run_trace(p: &Program, choices: Vec<bool>, fuel: usize) -> Outcome {
    run(p, fuel, BranchPolicy::Scripted(choices)).outcome
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::parser::parse;

    #[test]
    fn ill_typed_programs_stop_at_the_checker() {
        let v = soundness_trial(&parse(corpus::CLASSLOADER_ATTACK).unwrap(), 1000);
        assert_eq!(v.typecheck, Verdict::IllTyped);
        assert_eq!(v.runs, 0);
        assert!(!v.is_counterexample());
    }

    #[test]
    fn well_typed_corpus_is_sound() {
        for (name, src) in corpus::ALL {
            let p = parse(src).unwrap();
            let v = soundness_trial(&p, 1000);
            assert!(!v.is_counterexample(), "{name}: {:?}", v.first_counterexample);
            if v.typecheck == Verdict::WellTyped {
                assert!(v.runs >= 1, "{name}");
            }
        }
    }

    #[test]
    fn zero_fuel() {
        let v = soundness_trial(&parse(corpus::CLASSLOADER).unwrap(), 0);
        assert_eq!(v.typecheck, Verdict::WellTyped);
        assert_eq!(v.runs, 1);
        assert!(!v.stuck_found && !v.wf_violation_found);
    }

    #[test]
    fn digest_is_stable() {
        let p = parse(corpus::MINIMAL).unwrap();
        assert_eq!(program_digest(&p), program_digest(&parse(&pretty_print(&p)).unwrap()));
        assert_eq!(program_digest(&p).len(), 64);
    }

    #[test]
    fn forged_counterexample_replays() {
        // Run the ill-typed attack as if it had been accepted, using its own (partial) tables.
        let p = parse(corpus::CLASSLOADER_ATTACK).unwrap();
        let out = run(&p, 1000, BranchPolicy::Exhaustive { max_paths: 64 });
        let cex = Counterexample {
            trace: out.choices.clone(),
            kind: ViolationKind::Stuck,
            reason: out.outcome.to_string(),
            state: out.state.to_string(),
        };
        let dir = tempfile::tempdir().unwrap();
        let rt = persist_counterexample(dir.path(), "attack", &p, &cex).unwrap();
        let reloaded = parse(&fs::read_to_string(rt).unwrap()).unwrap();
        let trace = load_trace(&dir.path().join("attack.trace")).unwrap();
        assert_eq!(trace, cex.trace);
        assert_eq!(run_trace(&reloaded, trace, 1000), out.outcome);
    }
}
