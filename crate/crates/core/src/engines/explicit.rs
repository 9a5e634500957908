use std::time::Instant;

use super::{unrolled_bits, Counterexample, EngineKind, EngineStats, Outcome, Verdict, VerificationCase};
use crate::ir::{run_scenario, DataType, Machine, SlotId, SlotRole, TypedProgram, Valuation, Value};

pub const DEFAULT_BIT_BUDGET: u64 = 24;

/// Builds the values of `slots` from the low bits of `n`. The first slot
/// takes the most significant bits, words are read MSB first and array
/// elements in index order.
fn assign_from_counter(program: &TypedProgram, slots: &[SlotId], mut n: u64) -> Vec<Value> {
    fn take(ty: &DataType, n: &mut u64) -> Value {
        match ty {
            DataType::Bool => {
                let v = *n & 1 == 1;
                *n >>= 1;
                Value::Bool(v)
            }
            DataType::Word => {
                let v = (*n & 0xFFFF) as u16;
                *n >>= 16;
                Value::Word(v)
            }
            DataType::Array { elem, lo, hi } => {
                let mut items: Vec<Value> = (*lo..=*hi).map(|_| take(elem, n)).collect();
                items.reverse();
                Value::Array(items)
            }
        }
    }
    let mut out: Vec<Value> = slots.iter().rev().map(|&s| take(&program.slots[s].dtype, &mut n)).collect();
    out.reverse();
    out
}

fn valuation(program: &TypedProgram, slots: &[SlotId], values: &[Value]) -> Valuation {
    slots.iter().zip(values).map(|(&s, v)| (program.slots[s].name.clone(), v.clone())).collect()
}

struct Search<'a> {
    program: &'a TypedProgram,
    inputs: Vec<SlotId>,
    input_bits: u64,
    /// Input values per counter, precomputed when the input space is small.
    table: Vec<Vec<Value>>,
    bound: usize,
    evaluations: u64,
    prefix: Vec<u64>,
}

const TABLE_BITS: u64 = 16;

impl<'a> Search<'a> {
    /// Depth-first over input sequences; returns the violating prefix.
    fn dfs(&mut self, machine: &Machine<'a>, depth: usize) -> Option<Vec<u64>> {
        let mut results = Vec::new();
        let mut m = machine.clone();
        for n in 0..(1u64 << self.input_bits) {
            m.copy_from(machine);
            if self.table.is_empty() {
                for (&s, v) in self.inputs.iter().zip(assign_from_counter(self.program, &self.inputs, n)) {
                    m.set(s, v);
                }
            } else {
                for (&s, v) in self.inputs.iter().zip(&self.table[n as usize]) {
                    m.set(s, v.clone());
                }
            }
            results.clear();
            m.step(&mut results);
            self.evaluations += 1;
            self.prefix.push(n);
            if results.iter().any(|(_, ok)| !ok) {
                return Some(self.prefix.clone());
            }
            if depth + 1 < self.bound {
                if let Some(p) = self.dfs(&m, depth + 1) {
                    return Some(p);
                }
            }
            self.prefix.pop();
        }
        None
    }
}

/// Enumerates every configuration and input sequence of up to `case.bound`
/// cycles in lexicographic order and returns the first violation.
pub fn verify_explicit(case: &VerificationCase, bit_budget: u64) -> Verdict {
    let program = &case.program;
    let started = Instant::now();
    let mut stats = EngineStats::default();
    let required = unrolled_bits(program, case.bound);
    if required > bit_budget {
        return Verdict {
            engine: EngineKind::Explicit,
            outcome: Outcome::Unknown {
                reason: format!(
                    "explicit enumeration needs {required} bits but the budget is {bit_budget}"
                ),
            },
            stats,
        };
    }
    let config: Vec<SlotId> = program.slots_with_role(SlotRole::Config).map(|(i, _)| i).collect();
    let inputs: Vec<SlotId> = program.slots_with_role(SlotRole::Input).map(|(i, _)| i).collect();
    let config_bits: u64 = config.iter().map(|&s| program.slots[s].dtype.bit_width()).sum();
    let input_bits: u64 = inputs.iter().map(|&s| program.slots[s].dtype.bit_width()).sum();
    let mut search = Search {
        program,
        inputs: inputs.clone(),
        input_bits,
        table: if input_bits <= TABLE_BITS {
            (0..1u64 << input_bits).map(|n| assign_from_counter(program, &inputs, n)).collect()
        } else {
            Vec::new()
        },
        bound: case.bound,
        evaluations: 0,
        prefix: Vec::new(),
    };
    let mut found = None;
    for cn in 0..(1u64 << config_bits) {
        let cvals = assign_from_counter(program, &config, cn);
        let mut m = Machine::new(program);
        for (&s, v) in config.iter().zip(&cvals) {
            m.set(s, v.clone());
        }
        if let Some(seq) = search.dfs(&m, 0) {
            found = Some((valuation(program, &config, &cvals), seq));
            break;
        }
    }
    stats.evaluations = search.evaluations;
    stats.solve_ms = started.elapsed().as_secs_f64() * 1e3;
    let outcome = match found {
        None => Outcome::Satisfied { bound: case.bound, exhaustive: case.is_exhaustive() },
        Some((config_vals, seq)) => {
            let sequence: Vec<Valuation> = seq
                .iter()
                .map(|&n| valuation(program, &inputs, &assign_from_counter(program, &inputs, n)))
                .collect();
            match counterexample_from(program, &case.id, config_vals, &sequence) {
                Ok(cex) => Outcome::Violated { counterexample: cex },
                Err(message) => Outcome::EngineError { message },
            }
        }
    };
    Verdict { engine: EngineKind::Explicit, outcome, stats }
}

/// Replays a violating input sequence to record the per-cycle snapshots.
pub(crate) fn counterexample_from(
    program: &TypedProgram,
    id: &str,
    config: Valuation,
    inputs: &[Valuation],
) -> Result<Counterexample, String> {
    let trace = run_scenario(program, &config, inputs).map_err(|e| e.to_string())?;
    let cycle = trace
        .first_failure(id)
        .ok_or_else(|| "engine produced a trace on which the requirement holds".to_string())?;
    let mut cycles = trace.cycles;
    cycles.truncate(cycle);
    Ok(Counterexample { requirement_id: id.to_string(), config, cycles, violating_cycle: cycle })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_declared_variable_is_most_significant() {
        let src = "FUNCTION F : VOID\nVAR_INPUT a : BOOL; w : WORD; END_VAR\nEND_FUNCTION";
        let p = crate::ir::typecheck_program(&crate::il::parse_program(&crate::il::SourceFile::new("f", src)).unwrap())
            .unwrap();
        let slots: Vec<SlotId> = p.slots_with_role(SlotRole::Input).map(|(i, _)| i).collect();
        assert_eq!(assign_from_counter(&p, &slots, 1), vec![Value::Bool(false), Value::Word(1)]);
        assert_eq!(assign_from_counter(&p, &slots, 1 << 16), vec![Value::Bool(true), Value::Word(0)]);
    }
}
