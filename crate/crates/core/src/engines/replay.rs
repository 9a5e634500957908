use serde::{Deserialize, Serialize};

use super::Counterexample;
use crate::ir::{run_scenario, TypedProgram, Value};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Difference {
    pub cycle: usize,
    pub signal: String,
    pub expected: Option<Value>,
    pub actual: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ReplayReport {
    /// The interpreter reproduces the trace and the requirement fails at `cycle`.
    Confirmed { cycle: usize },
    Diverged { reason: String, first_difference: Option<Difference> },
}

impl ReplayReport {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, ReplayReport::Confirmed { .. })
    }
}

/// Runs the counterexample's inputs through the reference interpreter and
/// compares every recorded static and output.
pub fn replay_counterexample(program: &TypedProgram, cex: &Counterexample) -> ReplayReport {
    let inputs = cex.inputs();
    let trace = match run_scenario(program, &cex.config, &inputs) {
        Ok(t) => t,
        Err(e) => return ReplayReport::Diverged { reason: e.to_string(), first_difference: None },
    };
    for (rec, got) in cex.cycles.iter().zip(&trace.cycles) {
        for (want, have) in [(&rec.statics, &got.statics), (&rec.outputs, &got.outputs)] {
            let names = want.keys().chain(have.keys().filter(|k| !want.contains_key(*k)));
            for name in names {
                let (e, a) = (want.get(name), have.get(name));
                if e != a {
                    return ReplayReport::Diverged {
                        reason: format!("`{name}` differs in cycle {}", rec.cycle),
                        first_difference: Some(Difference {
                            cycle: rec.cycle,
                            signal: name.clone(),
                            expected: e.cloned(),
                            actual: a.cloned(),
                        }),
                    };
                }
            }
        }
    }
    match trace.first_failure(&cex.requirement_id) {
        None => ReplayReport::Diverged { reason: "assertion holds on replay".into(), first_difference: None },
        Some(c) if c != cex.violating_cycle => ReplayReport::Diverged {
            reason: format!("assertion fails in cycle {c}, not {}", cex.violating_cycle),
            first_difference: None,
        },
        Some(c) => ReplayReport::Confirmed { cycle: c },
    }
}
