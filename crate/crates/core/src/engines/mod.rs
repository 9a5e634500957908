//! Verification engines: exhaustive enumeration, SAT-based bounded model
//! checking, counterexample replay and SMV export.

mod bmc;
mod explicit;
mod replay;
mod smv;

use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bmc::{bmc_cnf, verify_bmc};
pub use explicit::{verify_explicit, DEFAULT_BIT_BUDGET};
pub use replay::{replay_counterexample, Difference, ReplayReport};
pub use smv::emit_smv;

use crate::ir::{CycleRecord, SlotRole, TypedProgram, Valuation};
use crate::sat::Limits;

/// Bound used for stateful programs when none is given.
pub const DEFAULT_STATEFUL_BOUND: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Explicit,
    Bmc,
}

impl std::str::FromStr for EngineKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "explicit" => Ok(EngineKind::Explicit),
            "bmc" => Ok(EngineKind::Bmc),
            other => Err(format!("unknown engine `{other}` (expected explicit or bmc)")),
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EngineKind::Explicit => "explicit",
            EngineKind::Bmc => "bmc",
        })
    }
}

/// One requirement of one program checked up to `bound` cycles.
#[derive(Debug, Clone)]
pub struct VerificationCase {
    pub id: String,
    /// The program with only this requirement attached.
    pub program: TypedProgram,
    pub bound: usize,
}

impl VerificationCase {
    /// `None` when the program has no requirement named `id`.
    pub fn new(program: &TypedProgram, id: &str, bound: Option<usize>) -> Option<VerificationCase> {
        let restricted = program.restricted_to(id)?;
        let bound = bound.unwrap_or_else(|| default_bound(program, id));
        Some(VerificationCase { id: id.to_string(), program: restricted, bound })
    }

    /// One cycle suffices when no state carries over.
    pub fn is_exhaustive(&self) -> bool {
        !self.program.has_state()
    }
}

/// 1 for cycle-local requirements on stateless programs, otherwise 16.
pub fn default_bound(program: &TypedProgram, id: &str) -> usize {
    if program.needs_multiple_cycles(id) {
        DEFAULT_STATEFUL_BOUND
    } else {
        1
    }
}

/// A concrete execution that breaks the requirement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub requirement_id: String,
    pub config: Valuation,
    /// Inputs, statics, outputs and assertion results per cycle, up to and
    /// including the violating one.
    pub cycles: Vec<CycleRecord>,
    /// 1-based.
    pub violating_cycle: usize,
}

impl Counterexample {
    pub fn inputs(&self) -> Vec<Valuation> {
        self.cycles.iter().map(|c| c.inputs.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    /// Holds in every execution of up to `bound` cycles; `exhaustive` when
    /// that covers every execution.
    Satisfied { bound: usize, exhaustive: bool },
    Violated { counterexample: Counterexample },
    Unknown { reason: String },
    EngineError { message: String },
}

impl Outcome {
    pub fn class(&self) -> &'static str {
        match self {
            Outcome::Satisfied { .. } => "satisfied",
            Outcome::Violated { .. } => "violated",
            Outcome::Unknown { .. } => "unknown",
            Outcome::EngineError { .. } => "engine_error",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineStats {
    pub encode_ms: f64,
    pub solve_ms: f64,
    pub decisions: u64,
    pub conflicts: u64,
    pub clauses: u64,
    pub variables: u64,
    /// Cycle executions performed by the explicit engine.
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub engine: EngineKind,
    pub outcome: Outcome,
    pub stats: EngineStats,
}

/// Engine selection and limits shared by a run.
#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    pub engine: EngineKind,
    pub limits: Limits,
    pub bit_budget: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { engine: EngineKind::Bmc, limits: Limits::default(), bit_budget: DEFAULT_BIT_BUDGET }
    }
}

impl EngineOptions {
    pub fn with_timeout(mut self, t: Duration) -> Self {
        self.limits.time = t;
        self
    }
}

pub fn verify(case: &VerificationCase, opts: &EngineOptions) -> Verdict {
    match opts.engine {
        EngineKind::Explicit => verify_explicit(case, opts.bit_budget),
        EngineKind::Bmc => verify_bmc(case, opts.limits),
    }
}

/// Verifies cases on `jobs` worker threads; results keep the input order.
pub fn verify_all(cases: &[VerificationCase], opts: &EngineOptions, jobs: usize) -> Vec<Verdict> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build();
    match pool {
        Ok(pool) => pool.install(|| cases.par_iter().map(|c| verify(c, opts)).collect()),
        Err(_) => cases.iter().map(|c| verify(c, opts)).collect(),
    }
}

/// Total nondeterministic bits of `k` cycles: configuration once, inputs per cycle.
pub fn unrolled_bits(program: &TypedProgram, k: usize) -> u64 {
    let width = |r| program.slots_with_role(r).map(|(_, s)| s.dtype.bit_width()).sum::<u64>();
    width(SlotRole::Config) + k as u64 * width(SlotRole::Input)
}

#[cfg(test)]
mod tests;
