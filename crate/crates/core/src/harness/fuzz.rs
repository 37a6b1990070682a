use rayon::prelude::*;
use serde::Serialize;

use super::generate::{generate_program, GenBounds};
use super::mutate::mutate;
use super::trial::{soundness_trial_with, Counterexample, TrialVerdict};
use crate::checker::Verdict;
use crate::model::Program;
use crate::parser::pretty_print;

#[derive(Debug, Clone, Serialize)]
pub struct FuzzConfig {
    pub bounds: GenBounds,
    pub seed: u64,
    /// Generated programs.
    pub trials: usize,
    /// Mutants, drawn from the well-typed generated programs (or from `extra_bases`).
    pub mutants: usize,
    pub fuel: usize,
    pub max_paths: usize,
    /// Additional mutation bases, such as corpus programs.
    #[serde(skip)]
    pub extra_bases: Vec<Program>,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            bounds: GenBounds::default(),
            seed: 0,
            trials: 1000,
            mutants: 0,
            fuel: 1000,
            max_paths: crate::interp::DEFAULT_MAX_PATHS,
            extra_bases: Vec::new(),
        }
    }
}

/// Where a failing program came from.
#[derive(Debug, Clone, Serialize)]
pub struct Finding {
    pub origin: String,
    pub program: String,
    pub counterexample: Counterexample,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct PhaseSummary {
    pub programs: usize,
    pub well_typed: usize,
    pub ill_typed: usize,
    pub paths: usize,
    pub truncated: usize,
    pub max_steps: usize,
    pub stuck_found: usize,
    pub wf_violations: usize,
}

impl PhaseSummary {
    fn add(&mut self, v: &TrialVerdict) {
        self.programs += 1;
        match v.typecheck {
            Verdict::WellTyped => self.well_typed += 1,
            Verdict::IllTyped => self.ill_typed += 1,
        }
        self.paths += v.runs;
        self.truncated += usize::from(v.truncated);
        self.max_steps = self.max_steps.max(v.max_steps);
        self.stuck_found += usize::from(v.stuck_found);
        self.wf_violations += usize::from(v.wf_violation_found);
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FuzzSummary {
    pub generated: PhaseSummary,
    pub mutated: PhaseSummary,
    pub counterexamples: Vec<Finding>,
}

impl FuzzSummary {
    pub fn is_sound(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Seed of the `i`-th trial.
pub fn trial_seed(seed: u64, i: usize) -> u64 {
    seed.wrapping_add(i as u64)
}

/// Generated trials followed by mutants; trials run in parallel, results are merged in seed order.
pub fn fuzz(cfg: &FuzzConfig) -> FuzzSummary {
    let mut summary = FuzzSummary::default();
    let accepted = fuzz_generated(cfg, &mut summary);
    let mut bases: Vec<&Program> = cfg.extra_bases.iter().collect();
    bases.extend(accepted.iter());
    fuzz_mutants(cfg, &bases, &mut summary);
    summary
}

/// The generated phase alone. Returns the accepted programs, the usual mutation bases.
pub fn fuzz_generated(cfg: &FuzzConfig, summary: &mut FuzzSummary) -> Vec<Program> {
    let generated: Vec<(Program, TrialVerdict)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let p = generate_program(trial_seed(cfg.seed, i), &cfg.bounds);
            let v = soundness_trial_with(&p, cfg.fuel, cfg.max_paths);
            (p, v)
        })
        .collect();
    let mut accepted = Vec::new();
    for (i, (p, v)) in generated.into_iter().enumerate() {
        summary.generated.add(&v);
        record(summary, format!("generated seed {}", trial_seed(cfg.seed, i)), &p, &v);
        if v.typecheck == Verdict::WellTyped {
            accepted.push(p);
        }
    }
    accepted
}

/// The mutation phase alone: `cfg.mutants` mutants, the `j`-th one of `bases[j % len]`.
pub fn fuzz_mutants(cfg: &FuzzConfig, bases: &[&Program], summary: &mut FuzzSummary) {
    if bases.is_empty() || cfg.mutants == 0 {
        return;
    }
    let mutated: Vec<(Program, TrialVerdict)> = (0..cfg.mutants)
        .into_par_iter()
        .map(|j| {
            let base = bases[j % bases.len()];
            let q = mutate(base, trial_seed(cfg.seed, j).rotate_left(17) ^ 0xA5A5);
            let v = soundness_trial_with(&q, cfg.fuel, cfg.max_paths);
            (q, v)
        })
        .collect();
    for (j, (q, v)) in mutated.iter().enumerate() {
        summary.mutated.add(v);
        record(summary, format!("mutant {j} of base {}", j % bases.len()), q, v);
    }
}

fn record(summary: &mut FuzzSummary, origin: String, p: &Program, v: &TrialVerdict) {
    if v.is_counterexample() {
        if let Some(cex) = &v.first_counterexample {
            summary.counterexamples.push(Finding { origin, program: pretty_print(p), counterexample: cex.clone() });
        }
    }
}
