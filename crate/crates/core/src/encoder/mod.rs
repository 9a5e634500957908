//! Bit-level symbolic encoding of scan cycles, unrolling and CNF conversion.

mod circuit;
mod cnf;

use std::collections::BTreeMap;

pub use circuit::{Circuit, InputBit, InputKind, Node, NodeId};
pub use cnf::{to_cnf, CnfFormula, Lit};

use crate::ir::{
    BinOp, DataType, SlotId, SlotRole, TExpr, TExprKind, TLValue, TStmt, TypedProgram, Valuation, Value,
};

type Bits = Vec<NodeId>;

/// The bits of one slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotBits {
    pub slot: SlotId,
    pub bits: Vec<NodeId>,
}

/// One scan cycle as a circuit over configuration, input and current-state
/// bits.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    pub circuit: Circuit,
    pub config: Vec<SlotBits>,
    pub inputs: Vec<SlotBits>,
    pub state: Vec<SlotBits>,
    pub next_state: Vec<SlotBits>,
    pub outputs: Vec<SlotBits>,
    /// Per requirement index: TRUE when every evaluation in the cycle holds.
    pub assertions: Vec<(usize, NodeId)>,
}

/// `K` consecutive cycles from the initial state with shared configuration.
#[derive(Debug, Clone)]
pub struct Unrolled {
    pub circuit: Circuit,
    pub bound: usize,
    pub config: Vec<SlotBits>,
    /// `inputs[k]` holds the input bits of cycle `k + 1`.
    pub inputs: Vec<Vec<SlotBits>>,
    /// `assertions[k]` holds the assertion bits of cycle `k + 1`.
    pub assertions: Vec<Vec<(usize, NodeId)>>,
    /// TRUE iff some assertion fails in some cycle.
    pub violation: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncodeError {
    #[error("unroll bound must be at least 1")]
    ZeroBound,
}

fn const_bits(c: &Circuit, v: &Value) -> Bits {
    v.to_bits().into_iter().map(|b| c.constant(b)).collect()
}

fn fresh_bits(c: &mut Circuit, kind: InputKind, slot: SlotId, width: u64, cycle: u32) -> Bits {
    (0..width as u32).map(|bit| c.input(InputBit { kind, slot, bit, cycle })).collect()
}

fn eval(c: &mut Circuit, env: &[Bits], start: &[Bits], e: &TExpr) -> Bits {
    match &e.kind {
        TExprKind::Const(v) => const_bits(c, v),
        TExprKind::Slot(s) => env[*s].clone(),
        TExprKind::Old(s) => start[*s].clone(),
        TExprKind::Index(base, pos) => {
            let w = match &base.ty {
                DataType::Array { elem, .. } => elem.bit_width() as usize,
                _ => unreachable!("typechecked index"),
            };
            let bits = eval(c, env, start, base);
            bits[pos * w..(pos + 1) * w].to_vec()
        }
        TExprKind::BitSel(base, b) => vec![eval(c, env, start, base)[*b as usize]],
        TExprKind::Not(x) => {
            let bits = eval(c, env, start, x);
            bits.into_iter().map(|b| c.not(b)).collect()
        }
        TExprKind::Bin(op, l, r) => {
            let a = eval(c, env, start, l);
            let b = eval(c, env, start, r);
            match op {
                BinOp::And => a.iter().zip(&b).map(|(x, y)| c.and(*x, *y)).collect(),
                BinOp::Or => a.iter().zip(&b).map(|(x, y)| c.or(*x, *y)).collect(),
                BinOp::Xor => a.iter().zip(&b).map(|(x, y)| c.xor(*x, *y)).collect(),
                BinOp::Eq | BinOp::Neq => {
                    let diffs: Vec<NodeId> = a.iter().zip(&b).map(|(x, y)| c.xor(*x, *y)).collect();
                    let any = c.or_all(diffs);
                    vec![if *op == BinOp::Eq { c.not(any) } else { any }]
                }
            }
        }
    }
}

fn target_range(program: &TypedProgram, t: &TLValue) -> (usize, usize) {
    let mut ty = &program.slots[t.slot].dtype;
    let mut offset = 0usize;
    for &p in &t.path {
        match ty {
            DataType::Array { elem, .. } => {
                offset += p * elem.bit_width() as usize;
                ty = elem;
            }
            _ => unreachable!("typechecked path"),
        }
    }
    match t.bit {
        Some(b) => (offset + b as usize, 1),
        None => (offset, ty.bit_width() as usize),
    }
}

struct Exec<'a> {
    program: &'a TypedProgram,
    start: Vec<Bits>,
    asserts: Vec<(usize, NodeId)>,
}

impl Exec<'_> {
    fn block(&mut self, c: &mut Circuit, env: &mut [Bits], body: &[TStmt], path: NodeId) {
        for s in body {
            match s {
                TStmt::Assign { target, value } => {
                    let v = eval(c, env, &self.start, value);
                    let (off, w) = target_range(self.program, target);
                    env[target.slot][off..off + w].copy_from_slice(&v);
                }
                TStmt::If { branches, else_body } => self.branches(c, env, branches, else_body, path),
                TStmt::Assert(i) => {
                    let e = &self.program.requirements[*i].expr;
                    let holds = eval(c, env, &self.start, e)[0];
                    let np = c.not(path);
                    let bit = c.or(np, holds);
                    self.asserts.push((*i, bit));
                }
            }
        }
    }

    fn branches(
        &mut self,
        c: &mut Circuit,
        env: &mut [Bits],
        branches: &[(TExpr, Vec<TStmt>)],
        else_body: &[TStmt],
        path: NodeId,
    ) {
        let Some(((cond, body), rest)) = branches.split_first() else {
            self.block(c, env, else_body, path);
            return;
        };
        let g = eval(c, env, &self.start, cond)[0];
        let mut then_env = env.to_vec();
        let p_then = c.and(path, g);
        self.block(c, &mut then_env, body, p_then);
        let ng = c.not(g);
        let p_else = c.and(path, ng);
        self.branches(c, env, rest, else_body, p_else);
        for (slot, bits) in env.iter_mut().enumerate() {
            for (k, b) in bits.iter_mut().enumerate() {
                let t = then_env[slot][k];
                if t != *b {
                    *b = c.mux(g, t, *b);
                }
            }
        }
    }
}

/// Runs one cycle symbolically. `env` holds the pre-cycle values of
/// configuration, input and state slots; locals are reset here.
fn exec_cycle(program: &TypedProgram, c: &mut Circuit, env: &mut [Bits]) -> Vec<(usize, NodeId)> {
    for (i, s) in program.slots.iter().enumerate() {
        if s.role == SlotRole::Local {
            env[i] = const_bits(c, &s.init);
        }
    }
    let mut ex = Exec { program, start: env.to_vec(), asserts: Vec::new() };
    let tru = c.constant(true);
    ex.block(c, env, &program.body, tru);
    // several evaluation points of one requirement must all hold
    let mut by_req: BTreeMap<usize, NodeId> = BTreeMap::new();
    for (i, bit) in ex.asserts {
        let prev = by_req.get(&i).copied().unwrap_or(tru);
        by_req.insert(i, c.and(prev, bit));
    }
    by_req.into_iter().collect()
}

fn collect(env: &[Bits], ids: impl Iterator<Item = SlotId>) -> Vec<SlotBits> {
    ids.map(|slot| SlotBits { slot, bits: env[slot].clone() }).collect()
}

/// Encodes one scan cycle with structural hashing.
pub fn encode_cycle(program: &TypedProgram) -> TransitionSystem {
    encode_cycle_with(program, true)
}

pub fn encode_cycle_with(program: &TypedProgram, hashing: bool) -> TransitionSystem {
    let mut c = Circuit::new(hashing);
    let mut env: Vec<Bits> = Vec::with_capacity(program.slots.len());
    for (i, s) in program.slots.iter().enumerate() {
        let w = s.dtype.bit_width();
        env.push(match s.role {
            SlotRole::Config => fresh_bits(&mut c, InputKind::Config, i, w, 0),
            SlotRole::Input => fresh_bits(&mut c, InputKind::Input, i, w, 1),
            SlotRole::State => fresh_bits(&mut c, InputKind::State, i, w, 0),
            SlotRole::Local => const_bits(&c, &s.init),
        });
    }
    let pre = env.clone();
    let assertions = exec_cycle(program, &mut c, &mut env);
    let role = |r: SlotRole| program.slots_with_role(r).map(|(i, _)| i).collect::<Vec<_>>();
    TransitionSystem {
        config: collect(&pre, role(SlotRole::Config).into_iter()),
        inputs: collect(&pre, role(SlotRole::Input).into_iter()),
        state: collect(&pre, role(SlotRole::State).into_iter()),
        next_state: collect(&env, role(SlotRole::State).into_iter()),
        outputs: collect(&env, program.output_slots().map(|(i, _)| i)),
        assertions,
        circuit: c,
    }
}

impl TransitionSystem {
    /// Evaluates the circuit on concrete values and returns next-state,
    /// output and assertion values.
    pub fn evaluate(
        &self,
        program: &TypedProgram,
        config: &Valuation,
        inputs: &Valuation,
        statics: &Valuation,
    ) -> (Valuation, Valuation, Vec<(usize, bool)>) {
        let mut assignment = vec![false; self.circuit.inputs().len()];
        for (k, ib) in self.circuit.inputs().iter().enumerate() {
            let slot = &program.slots[ib.slot];
            let src = match ib.kind {
                InputKind::Config => config,
                InputKind::Input => inputs,
                InputKind::State => statics,
            };
            assignment[k] = src[&slot.name].to_bits()[ib.bit as usize];
        }
        let vals = self.circuit.eval(&assignment);
        let decode = |sb: &[SlotBits]| -> Valuation {
            sb.iter()
                .map(|s| {
                    let bits: Vec<bool> = s.bits.iter().map(|n| vals[*n as usize]).collect();
                    let slot = &program.slots[s.slot];
                    (slot.name.clone(), Value::from_bits(&slot.dtype, &bits))
                })
                .collect()
        };
        let asserts = self.assertions.iter().map(|(i, n)| (*i, vals[*n as usize])).collect();
        (decode(&self.next_state), decode(&self.outputs), asserts)
    }
}

/// Unrolls `k` cycles from the declared initial state.
pub fn unroll(program: &TypedProgram, k: usize) -> Result<Unrolled, EncodeError> {
    unroll_with(program, k, true)
}

pub fn unroll_with(program: &TypedProgram, k: usize, hashing: bool) -> Result<Unrolled, EncodeError> {
    if k == 0 {
        return Err(EncodeError::ZeroBound);
    }
    let mut c = Circuit::new(hashing);
    let mut env: Vec<Bits> = Vec::with_capacity(program.slots.len());
    let mut config = Vec::new();
    for (i, s) in program.slots.iter().enumerate() {
        let bits = match s.role {
            SlotRole::Config => {
                let b = fresh_bits(&mut c, InputKind::Config, i, s.dtype.bit_width(), 0);
                config.push(SlotBits { slot: i, bits: b.clone() });
                b
            }
            // inputs are filled per cycle below
            _ => const_bits(&c, &s.init),
        };
        env.push(bits);
    }
    let mut inputs = Vec::with_capacity(k);
    let mut assertions = Vec::with_capacity(k);
    let mut failures = Vec::new();
    for cycle in 1..=k {
        let mut this = Vec::new();
        for (i, s) in program.slots_with_role(SlotRole::Input) {
            let b = fresh_bits(&mut c, InputKind::Input, i, s.dtype.bit_width(), cycle as u32);
            env[i] = b.clone();
            this.push(SlotBits { slot: i, bits: b });
        }
        inputs.push(this);
        let a = exec_cycle(program, &mut c, &mut env);
        for (_, bit) in &a {
            failures.push(c.not(*bit));
        }
        assertions.push(a);
    }
    let violation = c.or_all(failures);
    Ok(Unrolled { circuit: c, bound: k, config, inputs, assertions, violation })
}

impl Unrolled {
    /// Reads configuration and per-cycle input values from an assignment to
    /// the circuit inputs.
    pub fn decode(&self, program: &TypedProgram, assignment: &[bool]) -> (Valuation, Vec<Valuation>) {
        let value = |sb: &SlotBits| {
            let pos: Vec<bool> = sb
                .bits
                .iter()
                .map(|n| match self.circuit.node(*n) {
                    Node::Input(i) => assignment[i as usize],
                    _ => false,
                })
                .collect();
            let slot = &program.slots[sb.slot];
            (slot.name.clone(), Value::from_bits(&slot.dtype, &pos))
        };
        let config = self.config.iter().map(value).collect();
        let inputs = self.inputs.iter().map(|cy| cy.iter().map(value).collect()).collect();
        (config, inputs)
    }

    /// Inverse of [`Unrolled::decode`].
    pub fn encode_assignment(&self, program: &TypedProgram, config: &Valuation, inputs: &[Valuation]) -> Vec<bool> {
        let mut a = vec![false; self.circuit.inputs().len()];
        let mut put = |sb: &SlotBits, vals: &Valuation| {
            let bits = vals[&program.slots[sb.slot].name].to_bits();
            for (n, b) in sb.bits.iter().zip(bits) {
                if let Node::Input(i) = self.circuit.node(*n) {
                    a[i as usize] = b;
                }
            }
        };
        for sb in &self.config {
            put(sb, config);
        }
        for (cy, vals) in self.inputs.iter().zip(inputs) {
            for sb in cy {
                put(sb, vals);
            }
        }
        a
    }
}
