use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::digest::digest;
use super::heap::Value;
use super::step::{step, MachineState, StepResult, StuckReason};
use crate::model::{ClassId, ExcId, MethodRef, Program};

pub const DEFAULT_FUEL: usize = 10_000;
pub const DEFAULT_MAX_PATHS: usize = 1 << 12;

/// How `if *` is resolved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchPolicy {
    /// A ChaCha coin with this seed.
    Seeded(u64),
    /// Every branch, up to a number of paths.
    Exhaustive { max_paths: usize },
    /// The given choices in order (`true` = jump), then fall through.
    Scripted(Vec<bool>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Final { value: Value },
    FinalExceptional { exception: ExcId },
    Stuck { reason: StuckReason, method: MethodRef, pc: usize },
    FuelExhausted,
}

impl Outcome {
    /// Ordering used to report the worst outcome of an exploration.
    fn severity(&self) -> u8 {
        match self {
            Outcome::Final { .. } => 0,
            Outcome::FinalExceptional { .. } => 1,
            Outcome::FuelExhausted => 2,
            Outcome::Stuck { .. } => 3,
        }
    }

    pub fn is_stuck(&self) -> bool {
        matches!(self, Outcome::Stuck { .. })
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Final { value } => write!(f, "Final({value})"),
            Outcome::FinalExceptional { exception } => write!(f, "FinalExceptional({exception})"),
            Outcome::Stuck { reason, method, pc } => write!(f, "Stuck({reason}) at {method} pc {pc}"),
            Outcome::FuelExhausted => f.write_str("FuelExhausted"),
        }
    }
}

/// One execution path: its branch choices, how it ended and the last state.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub outcome: Outcome,
    pub steps: usize,
    pub choices: Vec<bool>,
    pub state: MachineState,
    pub trace: Vec<String>,
}

/// One line per step: method and pc, the instruction, the heap size and any tag change.
pub fn trace_line(p: &Program, before: &MachineState, after: Option<&MachineState>) -> String {
    let ins = match (&before.exc, before.instr(p)) {
        (Some(e), _) => format!("<raise {e}>"),
        (None, Some(i)) => i.to_string(),
        (None, None) => "<none>".to_string(),
    };
    let mut line = format!("{} {}: {} | heap {}", before.method, before.pc, ins, after.map_or(before.heap.len(), |a| a.heap.len()));
    if let Some(a) = after {
        for (l, o) in a.heap.iter() {
            let old = before.heap.get(l).and_then(|b| b.init_level.clone());
            if old != o.init_level && l < before.heap.len() {
                let show = |t: &Option<ClassId>| t.as_ref().map_or("⊥".to_string(), |c| c.to_string());
                line.push_str(&format!(" | @{l} {} -> {}", show(&old), show(&o.init_level)));
            }
        }
    }
    line
}

enum Walk {
    Done(Outcome, MachineState),
    Continue(MachineState),
}

fn one_step(p: &Program, s: MachineState, jump: bool) -> Walk {
    match step(p, s, jump) {
        StepResult::Next(n) => Walk::Continue(n),
        StepResult::Final(value, s) => Walk::Done(Outcome::Final { value }, *s),
        StepResult::FinalExceptional(exception, s) => Walk::Done(Outcome::FinalExceptional { exception }, *s),
        StepResult::Stuck { reason, method, pc, state } => Walk::Done(Outcome::Stuck { reason, method, pc }, *state),
    }
}

/// Runs `p` from its initial state for at most `fuel` steps.
///
/// Under [`BranchPolicy::Exhaustive`] the worst outcome over all explored paths is returned.
pub fn run(p: &Program, fuel: usize, policy: BranchPolicy) -> RunOutcome {
    run_traced(p, fuel, policy, false)
}

pub fn run_traced(p: &Program, fuel: usize, policy: BranchPolicy, trace: bool) -> RunOutcome {
    match policy {
        BranchPolicy::Exhaustive { max_paths } => {
            let mut worst: Option<RunOutcome> = None;
            explore(p, fuel, max_paths, |_| Ok(()), |path| {
                if worst.as_ref().map_or(true, |w| path.outcome.severity() > w.outcome.severity()) {
                    worst = Some(path.clone());
                }
            });
            let mut w = worst.expect("exploration visits at least one path");
            if trace {
                let replayed = run_traced(p, fuel, BranchPolicy::Scripted(w.choices.clone()), true);
                w.trace = replayed.trace;
            }
            w
        }
        BranchPolicy::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            linear(p, fuel, trace, move || rng.gen_bool(0.5))
        }
        BranchPolicy::Scripted(choices) => {
            let mut it = choices.into_iter();
            linear(p, fuel, trace, move || it.next().unwrap_or(false))
        }
    }
}

fn linear(p: &Program, fuel: usize, trace: bool, mut coin: impl FnMut() -> bool) -> RunOutcome {
    let mut s = MachineState::initial(p);
    let mut choices = Vec::new();
    let mut lines = Vec::new();
    for steps in 0..fuel {
        let jump = if s.at_branch(p) {
            let c = coin();
            choices.push(c);
            c
        } else {
            false
        };
        let before = trace.then(|| s.clone());
        match one_step(p, s, jump) {
            Walk::Continue(n) => {
                if let Some(b) = before {
                    lines.push(trace_line(p, &b, Some(&n)));
                }
                s = n;
            }
            Walk::Done(outcome, last) => {
                if let Some(b) = before {
                    lines.push(format!("{} => {outcome}", trace_line(p, &b, Some(&last))));
                }
                return RunOutcome { outcome, steps: steps + 1, choices, state: last, trace: lines };
            }
        }
    }
    RunOutcome { outcome: Outcome::FuelExhausted, steps: fuel, choices, state: s, trace: lines }
}

/// Result of a depth-first exploration of every branch.
#[derive(Debug, Clone, Default)]
pub struct Exploration {
    /// Paths that ended (terminated, ran out of fuel, or joined an already explored branch point).
    pub paths: usize,
    /// True when the path cap stopped the exploration early.
    pub truncated: bool,
    pub max_steps: usize,
    pub total_steps: usize,
    /// The first state rejected by the visitor: branch choices leading to it, the state, the message.
    pub violation: Option<(Vec<bool>, MachineState, String)>,
}

/// Explores every resolution of `if *`, depth first with the fall-through branch first.
///
/// `visit` sees the initial state and every state reached by a step; an `Err` stops the
/// exploration. `on_path` sees each completed path. Branch points already explored with at
/// least as much remaining fuel are not explored again, since their futures are identical.
pub fn explore(
    p: &Program,
    fuel: usize,
    max_paths: usize,
    mut visit: impl FnMut(&MachineState) -> Result<(), String>,
    mut on_path: impl FnMut(&RunOutcome),
) -> Exploration {
    let mut ex = Exploration::default();
    let init = MachineState::initial(p);
    if let Err(msg) = visit(&init) {
        ex.violation = Some((Vec::new(), init, msg));
        return ex;
    }
    let mut seen: HashMap<u128, usize> = HashMap::new();
    // A pending entry whose flag is set sits at a branch point and takes the jump first.
    let mut pending: Vec<(MachineState, usize, Vec<bool>, bool)> = vec![(init, 0, Vec::new(), false)];
    'paths: while let Some((mut s, mut steps, mut choices, mut forced)) = pending.pop() {
        if ex.paths >= max_paths.max(1) {
            ex.truncated = true;
            break;
        }
        loop {
            if steps >= fuel {
                ex.paths += 1;
                ex.max_steps = ex.max_steps.max(steps);
                on_path(&RunOutcome { outcome: Outcome::FuelExhausted, steps, choices, state: s, trace: Vec::new() });
                continue 'paths;
            }
            let jump = if forced {
                forced = false;
                true
            } else if s.at_branch(p) {
                let remaining = fuel - steps;
                let key = digest(&s);
                if seen.get(&key).is_some_and(|&r| r >= remaining) {
                    ex.paths += 1;
                    ex.max_steps = ex.max_steps.max(steps);
                    continue 'paths;
                }
                seen.insert(key, remaining);
                let mut alt = choices.clone();
                alt.push(true);
                pending.push((s.clone(), steps, alt, true));
                choices.push(false);
                false
            } else {
                false
            };
            steps += 1;
            ex.total_steps += 1;
            match one_step(p, s, jump) {
                Walk::Continue(n) => {
                    if let Err(msg) = visit(&n) {
                        ex.max_steps = ex.max_steps.max(steps);
                        ex.violation = Some((choices, n, msg));
                        return ex;
                    }
                    s = n;
                }
                Walk::Done(outcome, last) => {
                    ex.paths += 1;
                    ex.max_steps = ex.max_steps.max(steps);
                    on_path(&RunOutcome { outcome, steps, choices, state: last, trace: Vec::new() });
                    continue 'paths;
                }
            }
        }
    }
    ex
}
