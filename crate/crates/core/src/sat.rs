//! Conflict-driven clause-learning SAT solver.
//!
//! Decisions always pick the lowest-numbered unassigned variable and try
//! FALSE first, so runs are fully deterministic. Two watched literals per
//! clause, first-UIP learning, non-chronological backjumping; no restarts.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::encoder::{CnfFormula, Lit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub conflicts: u64,
    pub time: Duration,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { conflicts: 10_000_000, time: Duration::from_secs(300) }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub learned: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Model indexed by variable; index 0 is unused.
    Sat(Vec<bool>),
    Unsat,
    Unknown(String),
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[inline]
fn ilit(l: Lit) -> u32 {
    let v = l.unsigned_abs();
    (v << 1) | (l < 0) as u32
}

#[inline]
fn var(l: u32) -> usize {
    (l >> 1) as usize
}

#[inline]
fn neg(l: u32) -> u32 {
    l ^ 1
}

pub struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<u32>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    next_var: usize,
    inconsistent: bool,
    seen: Vec<bool>,
    pub stats: SatStats,
}

impl Solver {
    pub fn new(num_vars: usize) -> Solver {
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * (num_vars + 1)],
            assign: vec![UNDEF; num_vars + 1],
            level: vec![0; num_vars + 1],
            reason: vec![None; num_vars + 1],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            next_var: 1,
            inconsistent: false,
            seen: vec![false; num_vars + 1],
            stats: SatStats::default(),
        }
    }

    pub fn from_cnf(f: &CnfFormula) -> Solver {
        let mut s = Solver::new(f.num_vars as usize);
        for c in &f.clauses {
            s.add_clause(c);
        }
        s
    }

    fn value(&self, l: u32) -> i8 {
        let v = self.assign[var(l)];
        if l & 1 == 1 {
            -v
        } else {
            v
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: u32, reason: Option<usize>) {
        let v = var(l);
        self.assign[v] = if l & 1 == 1 { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Adds a clause before solving. Literals outside `1..=num_vars` panic.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if self.inconsistent {
            return;
        }
        let mut c: Vec<u32> = lits.iter().map(|&l| ilit(l)).collect();
        assert!(c.iter().all(|&l| var(l) >= 1 && var(l) <= self.num_vars), "literal out of range");
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == neg(w[1])) {
            return;
        }
        // drop literals already false at level 0; skip satisfied clauses
        if c.iter().any(|&l| self.value(l) == TRUE) {
            return;
        }
        c.retain(|&l| self.value(l) != FALSE);
        match c.len() {
            0 => self.inconsistent = true,
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.inconsistent = true;
                }
            }
            _ => {
                self.attach(c);
            }
        }
    }

    fn attach(&mut self, c: Vec<u32>) -> usize {
        let idx = self.clauses.len();
        self.watches[c[0] as usize].push(idx);
        self.watches[c[1] as usize].push(idx);
        self.clauses.push(c);
        idx
    }

    /// Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = neg(p);
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let clause = &mut self.clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let first = clause[0];
                let first_val = {
                    let v = self.assign[var(first)];
                    if first & 1 == 1 {
                        -v
                    } else {
                        v
                    }
                };
                if first_val == TRUE {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..clause.len() {
                    let l = clause[k];
                    let lv = {
                        let v = self.assign[var(l)];
                        if l & 1 == 1 {
                            -v
                        } else {
                            v
                        }
                    };
                    if lv != FALSE {
                        clause.swap(1, k);
                        let nl = clause[1];
                        self.watches[nl as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                if first_val == FALSE {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(ci));
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis: learned clause (asserting literal first)
    /// and the level to jump back to.
    fn analyze(&mut self, mut confl: usize) -> (Vec<u32>, u32) {
        let mut learnt: Vec<u32> = vec![0];
        let mut counter = 0;
        let mut p: Option<u32> = None;
        let mut idx = self.trail.len();
        let current = self.decision_level();
        loop {
            let clause = self.clauses[confl].clone();
            let start = if p.is_some() { 1 } else { 0 };
            for &q in &clause[start..] {
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let lit = self.trail[idx];
            p = Some(lit);
            self.seen[var(lit)] = false;
            counter -= 1;
            if counter == 0 {
                learnt[0] = neg(lit);
                break;
            }
            confl = self.reason[var(lit)].expect("non-decision literal has a reason");
            // keep the implied literal at index 0 of its reason
            let c = &mut self.clauses[confl];
            if let Some(pos) = c.iter().position(|&x| x == lit) {
                c.swap(0, pos);
            }
        }
        for &l in &learnt[1..] {
            self.seen[var(l)] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[var(learnt[i])] > self.level[var(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[var(learnt[1])];
        }
        (learnt, bt)
    }

    fn backtrack(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for &l in &self.trail[lim..] {
            let v = var(l);
            self.assign[v] = UNDEF;
            self.reason[v] = None;
            if v < self.next_var {
                self.next_var = v;
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.qhead = lim;
    }

    pub fn solve(&mut self, limits: Limits) -> SatResult {
        if self.inconsistent {
            return SatResult::Unsat;
        }
        let started = Instant::now();
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.inconsistent = true;
                    return SatResult::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.backtrack(bt);
                self.stats.learned += 1;
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt);
                    self.enqueue(first, Some(ci));
                }
                if self.stats.conflicts >= limits.conflicts {
                    return SatResult::Unknown(format!("conflict limit of {} reached", limits.conflicts));
                }
                if self.stats.conflicts.is_multiple_of(256) && started.elapsed() > limits.time {
                    return SatResult::Unknown(format!("time limit of {} s reached", limits.time.as_secs()));
                }
            } else {
                while self.next_var <= self.num_vars && self.assign[self.next_var] != UNDEF {
                    self.next_var += 1;
                }
                if self.next_var > self.num_vars {
                    let model = self.assign.iter().map(|&a| a == TRUE).collect();
                    return SatResult::Sat(model);
                }
                self.stats.decisions += 1;
                if self.stats.decisions.is_multiple_of(4096) && started.elapsed() > limits.time {
                    return SatResult::Unknown(format!("time limit of {} s reached", limits.time.as_secs()));
                }
                self.trail_lim.push(self.trail.len());
                let v = self.next_var as u32;
                self.enqueue((v << 1) | 1, None);
            }
        }
    }
}

/// Checks a model against a clause list.
pub fn satisfies(clauses: &[Vec<Lit>], model: &[bool]) -> bool {
    clauses
        .iter()
        .all(|c| c.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(n: usize, clauses: &[Vec<Lit>]) -> bool {
        (0..1u32 << n).any(|m| {
            let model: Vec<bool> = (0..=n).map(|v| v > 0 && (m >> (v - 1)) & 1 == 1).collect();
            satisfies(clauses, &model)
        })
    }

    #[test]
    fn pigeonhole_three_into_two_is_unsat() {
        // p(i,h): pigeon i in hole h, var = 2*i + h + 1
        let p = |i: i32, h: i32| 2 * i + h + 1;
        let mut s = Solver::new(6);
        for i in 0..3 {
            s.add_clause(&[p(i, 0), p(i, 1)]);
        }
        for h in 0..2 {
            for i in 0..3 {
                for j in i + 1..3 {
                    s.add_clause(&[-p(i, h), -p(j, h)]);
                }
            }
        }
        assert_eq!(s.solve(Limits::default()), SatResult::Unsat);
    }

    #[test]
    fn false_first_gives_smallest_model_on_free_vars() {
        let mut s = Solver::new(3);
        s.add_clause(&[2, 3]);
        match s.solve(Limits::default()) {
            SatResult::Sat(m) => assert_eq!(m, vec![false, false, false, true]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_clause_is_unsat() {
        let mut s = Solver::new(1);
        s.add_clause(&[]);
        assert_eq!(s.solve(Limits::default()), SatResult::Unsat);
    }

    #[test]
    fn conflict_limit_reports_unknown() {
        let p = |i: i32, h: i32| 4 * i + h + 1;
        let mut s = Solver::new(20);
        for i in 0..5 {
            s.add_clause(&[p(i, 0), p(i, 1), p(i, 2), p(i, 3)]);
        }
        for h in 0..4 {
            for i in 0..5 {
                for j in i + 1..5 {
                    s.add_clause(&[-p(i, h), -p(j, h)]);
                }
            }
        }
        let r = s.solve(Limits { conflicts: 3, time: Duration::from_secs(10) });
        assert!(matches!(r, SatResult::Unknown(ref m) if m.contains("conflict limit")), "{r:?}");
    }

    fn clause_strategy(n: i32) -> impl Strategy<Value = Vec<Lit>> {
        proptest::collection::vec((1..=n, any::<bool>()).prop_map(|(v, s)| if s { v } else { -v }), 1..4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn agrees_with_brute_force(clauses in proptest::collection::vec(clause_strategy(8), 1..40)) {
            let mut s = Solver::new(8);
            for c in &clauses {
                s.add_clause(c);
            }
            let expected = brute_force(8, &clauses);
            match s.solve(Limits::default()) {
                SatResult::Sat(m) => {
                    prop_assert!(expected);
                    prop_assert!(satisfies(&clauses, &m));
                }
                SatResult::Unsat => prop_assert!(!expected),
                SatResult::Unknown(r) => prop_assert!(false, "unknown: {}", r),
            }
        }
    }
}
