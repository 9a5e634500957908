use std::time::Instant;

use super::explicit::counterexample_from;
use super::{EngineKind, EngineStats, Outcome, Verdict, VerificationCase};
use crate::encoder::{to_cnf, unroll, CnfFormula, Unrolled};
use crate::sat::{Limits, SatResult, Solver};

/// Unrolls the case and converts "some assertion fails" into CNF.
pub fn bmc_cnf(case: &VerificationCase) -> Result<(Unrolled, CnfFormula), String> {
    let u = unroll(&case.program, case.bound).map_err(|e| e.to_string())?;
    let cnf = to_cnf(&u.circuit, u.violation);
    Ok((u, cnf))
}

/// Bounded model checking: satisfiable iff the requirement can fail within
/// `case.bound` cycles.
pub fn verify_bmc(case: &VerificationCase, limits: Limits) -> Verdict {
    let mut stats = EngineStats::default();
    let started = Instant::now();
    let (unrolled, cnf) = match bmc_cnf(case) {
        Ok(x) => x,
        Err(message) => {
            return Verdict { engine: EngineKind::Bmc, outcome: Outcome::EngineError { message }, stats };
        }
    };
    stats.encode_ms = started.elapsed().as_secs_f64() * 1e3;
    stats.clauses = cnf.clauses.len() as u64;
    stats.variables = cnf.num_vars as u64;

    let solving = Instant::now();
    let mut solver = Solver::from_cnf(&cnf);
    let result = solver.solve(limits);
    stats.solve_ms = solving.elapsed().as_secs_f64() * 1e3;
    stats.decisions = solver.stats.decisions;
    stats.conflicts = solver.stats.conflicts;

    let outcome = match result {
        SatResult::Unsat => Outcome::Satisfied { bound: case.bound, exhaustive: case.is_exhaustive() },
        SatResult::Unknown(reason) => Outcome::Unknown { reason },
        SatResult::Sat(model) => {
            let (config, inputs) = unrolled.decode(&case.program, &cnf.input_assignment(&model));
            match counterexample_from(&case.program, &case.id, config, &inputs) {
                Ok(counterexample) => Outcome::Violated { counterexample },
                Err(e) => Outcome::EngineError { message: format!("counterexample replay failed: {e}") },
            }
        }
    };
    Verdict { engine: EngineKind::Bmc, outcome, stats }
}
