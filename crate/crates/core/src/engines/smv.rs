//! Export of a verification case as an SMV model for external model checkers.
//!
//! Arrays are flattened into one variable per element. The cycle body
//! becomes a chain of DEFINEs, one per assignment, so the next-state
//! relation stays readable.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::VerificationCase;
use crate::ir::{BinOp, DataType, SlotRole, TExpr, TExprKind, TLValue, TStmt, TypedProgram, Value};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Leaf {
    Bool,
    Word,
}

fn leaf_types(ty: &DataType, out: &mut Vec<Leaf>) {
    match ty {
        DataType::Bool => out.push(Leaf::Bool),
        DataType::Word => out.push(Leaf::Word),
        DataType::Array { elem, lo, hi } => {
            for _ in *lo..=*hi {
                leaf_types(elem, out);
            }
        }
    }
}

fn leaf_count(ty: &DataType) -> usize {
    match ty {
        DataType::Array { elem, lo, hi } => leaf_count(elem) * (hi - lo + 1) as usize,
        _ => 1,
    }
}

fn leaf_names(base: &str, ty: &DataType, out: &mut Vec<String>) {
    match ty {
        DataType::Array { elem, lo, hi } => {
            for (pos, _) in (*lo..=*hi).enumerate() {
                leaf_names(&format!("{base}_e{pos}"), elem, out);
            }
        }
        _ => out.push(base.to_string()),
    }
}

fn sanitize(name: &str) -> String {
    let mut s = String::with_capacity(name.len());
    for c in name.chars() {
        match c {
            '.' => s.push_str("__"),
            c if c.is_ascii_alphanumeric() || c == '_' => s.push(c),
            _ => s.push('_'),
        }
    }
    if s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, 'v');
    }
    s
}

fn const_leaves(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Bool(b) => out.push(if *b { "TRUE".into() } else { "FALSE".into() }),
        Value::Word(w) => out.push(format!("0ud16_{w}")),
        Value::Array(items) => items.iter().for_each(|i| const_leaves(i, out)),
    }
}

/// Range of leaves addressed by an element path.
fn path_range(mut ty: &DataType, path: &[usize]) -> (usize, usize, DataType) {
    let mut start = 0;
    for &p in path {
        match ty {
            DataType::Array { elem, .. } => {
                start += p * leaf_count(elem);
                ty = elem;
            }
            _ => unreachable!("path into scalar"),
        }
    }
    (start, leaf_count(ty), ty.clone())
}

struct Emitter<'a> {
    program: &'a TypedProgram,
    /// Base leaf names per slot.
    names: Vec<Vec<String>>,
    types: Vec<Vec<Leaf>>,
    start: Vec<Vec<String>>,
    defines: Vec<String>,
    counter: BTreeMap<String, usize>,
    asserts: Vec<String>,
}

impl Emitter<'_> {
    fn fresh(&mut self, base: &str, value: String) -> String {
        let n = self.counter.entry(base.to_string()).or_insert(0);
        *n += 1;
        let name = format!("{base}__{n}");
        self.defines.push(format!("{name} := {value};"));
        name
    }

    fn expr(&self, env: &[Vec<String>], e: &TExpr) -> Vec<String> {
        match &e.kind {
            TExprKind::Const(v) => {
                let mut out = Vec::new();
                const_leaves(v, &mut out);
                out
            }
            TExprKind::Slot(s) => env[*s].clone(),
            TExprKind::Old(s) => self.start[*s].clone(),
            TExprKind::Index(b, pos) => {
                let (start, len, _) = path_range(&b.ty, &[*pos]);
                self.expr(env, b)[start..start + len].to_vec()
            }
            TExprKind::BitSel(b, k) => {
                let w = &self.expr(env, b)[0];
                vec![format!("bool(({w})[{k}:{k}])")]
            }
            TExprKind::Not(b) => self.expr(env, b).into_iter().map(|x| format!("!({x})")).collect(),
            TExprKind::Bin(op, l, r) => {
                let (l, r) = (self.expr(env, l), self.expr(env, r));
                let pair = |sym: &str| -> Vec<String> {
                    l.iter().zip(&r).map(|(a, b)| format!("({a} {sym} {b})")).collect()
                };
                match op {
                    BinOp::And => pair("&"),
                    BinOp::Or => pair("|"),
                    BinOp::Xor => pair("xor"),
                    BinOp::Eq | BinOp::Neq => {
                        let eq = pair("=").join(" & ");
                        vec![if *op == BinOp::Eq { format!("({eq})") } else { format!("!({eq})") }]
                    }
                }
            }
        }
    }

    fn assign(&mut self, env: &mut [Vec<String>], target: &TLValue, value: &TExpr) {
        let slot = &self.program.slots[target.slot];
        let (start, len, _) = path_range(&slot.dtype, &target.path);
        let rhs = self.expr(env, value);
        for i in 0..len {
            let base = self.names[target.slot][start + i].clone();
            let new = match target.bit {
                None => rhs[i].clone(),
                Some(b) => {
                    let w = &env[target.slot][start + i];
                    let v = format!("word1({})", rhs[0]);
                    let mut parts = Vec::new();
                    if b < 15 {
                        parts.push(format!("({w})[15:{}]", b + 1));
                    }
                    parts.push(v);
                    if b > 0 {
                        parts.push(format!("({w})[{}:0]", b - 1));
                    }
                    parts.join(" :: ")
                }
            };
            env[target.slot][start + i] = self.fresh(&base, new);
        }
    }

    fn block(&mut self, env: &mut [Vec<String>], path: &str, body: &[TStmt]) {
        for s in body {
            match s {
                TStmt::Assign { target, value } => self.assign(env, target, value),
                TStmt::Assert(i) => {
                    debug_assert!(*i < self.program.requirements.len());
                    let e = self.expr(env, &self.program.requirements[*i].expr)[0].clone();
                    let check = if path == "TRUE" { e } else { format!("!({path}) | {e}") };
                    let name = self.fresh("_assert", check);
                    self.asserts.push(name);
                }
                TStmt::If { branches, else_body } => {
                    let mut taken = Vec::new();
                    let mut arms: Vec<(String, Vec<Vec<String>>)> = Vec::new();
                    for (cond, body) in branches {
                        let c = self.expr(env, cond)[0].clone();
                        let c = self.fresh("_cond", c);
                        let mut guard = taken.iter().map(|t| format!("!{t}")).collect::<Vec<_>>();
                        guard.push(c.clone());
                        if path != "TRUE" {
                            guard.insert(0, path.to_string());
                        }
                        let mut branch_env = env.to_vec();
                        self.block(&mut branch_env, &guard.join(" & "), body);
                        arms.push((c.clone(), branch_env));
                        taken.push(c);
                    }
                    let mut else_env = env.to_vec();
                    let mut guard: Vec<String> = taken.iter().map(|t| format!("!{t}")).collect();
                    if path != "TRUE" {
                        guard.insert(0, path.to_string());
                    }
                    self.block(&mut else_env, &guard.join(" & "), else_body);
                    for slot in 0..env.len() {
                        for leaf in 0..env[slot].len() {
                            let changed = arms.iter().any(|(_, e)| e[slot][leaf] != env[slot][leaf])
                                || else_env[slot][leaf] != env[slot][leaf];
                            if !changed {
                                continue;
                            }
                            let mut case = String::from("case ");
                            for (c, e) in &arms {
                                let _ = write!(case, "{c} : {}; ", e[slot][leaf]);
                            }
                            let _ = write!(case, "TRUE : {}; esac", else_env[slot][leaf]);
                            let base = self.names[slot][leaf].clone();
                            env[slot][leaf] = self.fresh(&base, case);
                        }
                    }
                }
            }
        }
    }
}

fn smv_type(l: Leaf) -> &'static str {
    match l {
        Leaf::Bool => "boolean",
        Leaf::Word => "unsigned word[16]",
    }
}

/// Renders the case's program and requirement as an SMV module. The
/// requirement becomes an INVARSPEC; state and configuration variables
/// start from the program's initial values.
pub fn emit_smv(case: &VerificationCase) -> String {
    let program = &case.program;
    let mut names = Vec::new();
    let mut types = Vec::new();
    for s in &program.slots {
        let mut n = Vec::new();
        leaf_names(&sanitize(&s.name), &s.dtype, &mut n);
        let mut t = Vec::new();
        leaf_types(&s.dtype, &mut t);
        names.push(n);
        types.push(t);
    }
    let start: Vec<Vec<String>> = program
        .slots
        .iter()
        .zip(&names)
        .map(|(s, n)| {
            if s.role == SlotRole::Local {
                let mut v = Vec::new();
                const_leaves(&s.init, &mut v);
                v
            } else {
                n.clone()
            }
        })
        .collect();
    let mut em = Emitter {
        program,
        names: names.clone(),
        types: types.clone(),
        start: start.clone(),
        defines: Vec::new(),
        counter: BTreeMap::new(),
        asserts: Vec::new(),
    };
    let mut env = start;
    em.block(&mut env, "TRUE", &program.body);

    let mut out = String::new();
    let _ = writeln!(out, "-- {} : requirement {}", program.entry, case.id);
    let _ = writeln!(out, "-- bound {}", case.bound);
    out.push_str("MODULE main\n");
    let section = |out: &mut String, head: &str, role: SlotRole| {
        let mut first = true;
        for (i, s) in program.slots.iter().enumerate() {
            if s.role != role {
                continue;
            }
            if first {
                let _ = writeln!(out, "{head}");
                first = false;
            }
            for (n, t) in em.names[i].iter().zip(&em.types[i]) {
                let _ = writeln!(out, "  {n} : {};", smv_type(*t));
            }
        }
    };
    section(&mut out, "FROZENVAR", SlotRole::Config);
    section(&mut out, "VAR", SlotRole::Input);
    section(&mut out, "VAR", SlotRole::State);
    if !em.defines.is_empty() || !em.asserts.is_empty() {
        out.push_str("DEFINE\n");
        for d in &em.defines {
            let _ = writeln!(out, "  {d}");
        }
        let all = if em.asserts.is_empty() { "TRUE".to_string() } else { em.asserts.join(" & ") };
        let _ = writeln!(out, "  requirement_holds := {all};");
    }
    let states: Vec<_> = program.slots_with_role(SlotRole::State).collect();
    if !states.is_empty() {
        out.push_str("ASSIGN\n");
        for (i, s) in states {
            let mut init = Vec::new();
            const_leaves(&s.init, &mut init);
            for (leaf, n) in em.names[i].iter().enumerate() {
                let _ = writeln!(out, "  init({n}) := {};", init[leaf]);
                let _ = writeln!(out, "  next({n}) := {};", env[i][leaf]);
            }
        }
    }
    if em.defines.is_empty() && em.asserts.is_empty() {
        out.push_str("INVARSPEC TRUE;\n");
    } else {
        out.push_str("INVARSPEC requirement_holds;\n");
    }
    out
}
