//! Seeded random programs small enough for the explicit engine.

use std::fmt::Write;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

/// A random program, its assertion and the bound it should be checked to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomProgram {
    pub seed: u64,
    pub source: String,
    pub bound: usize,
}

struct Gen {
    rng: StdRng,
    readable: Vec<String>,
}

impl Gen {
    fn atom(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0 => if self.rng.gen() { "TRUE".into() } else { "FALSE".into() },
            _ => self.readable.choose(&mut self.rng).expect("at least one variable").clone(),
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_range(0..3) == 0 {
            return self.atom();
        }
        match self.rng.gen_range(0..6) {
            0 => format!("NOT {}", self.atom()),
            1 => format!("({} AND {})", self.expr(depth - 1), self.expr(depth - 1)),
            2 => format!("({} OR {})", self.expr(depth - 1), self.expr(depth - 1)),
            3 => format!("({} XOR {})", self.expr(depth - 1), self.expr(depth - 1)),
            4 => format!("({} = {})", self.expr(depth - 1), self.expr(depth - 1)),
            _ => format!("({} <> {})", self.expr(depth - 1), self.expr(depth - 1)),
        }
    }
}

/// A function block with up to 2 BOOL configuration variables, 1 to 4 BOOL
/// inputs, BOOL and WORD state, IF/ELSIF/ELSE and bit assignments, and one
/// assertion that may refer to OLD values. At most 20 nondeterministic bits
/// over the returned bound (1 or 2).
pub fn random_program(seed: u64) -> RandomProgram {
    let mut rng = StdRng::seed_from_u64(seed);
    let n_cfg = rng.gen_range(0..=2);
    let n_in = rng.gen_range(1..=4);
    let n_state = rng.gen_range(0..=2);
    let bound = rng.gen_range(1..=2);
    let cfg: Vec<String> = (0..n_cfg).map(|i| format!("k{i}")).collect();
    let ins: Vec<String> = (0..n_in).map(|i| format!("x{i}")).collect();
    let state: Vec<String> = (0..n_state).map(|i| format!("s{i}")).collect();
    let mut readable: Vec<String> = cfg.iter().chain(&ins).chain(&state).cloned().collect();
    readable.push("w.%X0".into());
    readable.push("w.%X3".into());
    let mut g = Gen { rng, readable };

    let mut src = String::from("FUNCTION_BLOCK Rnd\n");
    let list = |v: &[String]| v.join(", ");
    if !cfg.is_empty() {
        let _ = writeln!(src, "VAR_CONFIG {} : BOOL; END_VAR", list(&cfg));
    }
    let _ = writeln!(src, "VAR_INPUT {} : BOOL; END_VAR", list(&ins));
    src.push_str("VAR_OUTPUT q : BOOL; END_VAR\n");
    if state.is_empty() {
        src.push_str("VAR w : WORD; END_VAR\n");
    } else {
        let _ = writeln!(src, "VAR {} : BOOL; w : WORD; END_VAR", list(&state));
    }
    src.push_str("VAR_TEMP t : BOOL; END_VAR\n");
    g.readable.push("t".into());

    let targets: Vec<String> =
        state.iter().cloned().chain(["q".to_string(), "t".to_string(), "w.%X0".into(), "w.%X3".into()]).collect();
    let n_stmts = g.rng.gen_range(2..=5);
    for _ in 0..n_stmts {
        if g.rng.gen_range(0..3) == 0 {
            let c1 = g.expr(2);
            let t1 = targets.choose(&mut g.rng).unwrap().clone();
            let e1 = g.expr(2);
            let _ = write!(src, "IF {c1} THEN {t1} := {e1};");
            if g.rng.gen() {
                let c2 = g.expr(1);
                let t2 = targets.choose(&mut g.rng).unwrap().clone();
                let e2 = g.expr(2);
                let _ = write!(src, " ELSIF {c2} THEN {t2} := {e2};");
            }
            if g.rng.gen() {
                let t3 = targets.choose(&mut g.rng).unwrap().clone();
                let e3 = g.expr(2);
                let _ = write!(src, " ELSE {t3} := {e3};");
            }
            src.push_str(" END_IF;\n");
        } else {
            let t = targets.choose(&mut g.rng).unwrap().clone();
            let e = g.expr(3);
            let _ = writeln!(src, "{t} := {e};");
        }
    }
    g.readable.push("q".into());
    let mut assertion = g.expr(2);
    if !state.is_empty() && g.rng.gen() {
        let s = state.choose(&mut g.rng).unwrap();
        assertion = format!("({assertion} OR (OLD({s}) = {s}))");
    }
    let _ = writeln!(src, "//#ASSERT {assertion};");
    src.push_str("END_FUNCTION_BLOCK\n");
    RandomProgram { seed, source: src, bound }
}
