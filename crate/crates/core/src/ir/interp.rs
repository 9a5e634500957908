//! Reference interpreter with scan-cycle semantics.
//!
//! One cycle: sample inputs, reinitialise locals, run the body once in
//! statement order, evaluate each assertion where it sits. Configuration is
//! fixed for the whole execution and state slots carry over.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::typecheck::{SlotId, SlotRole, TExpr, TExprKind, TLValue, TStmt, TypedProgram};
use super::{BinOp, Valuation, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterpError {
    #[error("no value bound for {role} variable `{name}`")]
    MissingBinding { name: String, role: &'static str },
    #[error("`{0}` is not a bindable variable of this program")]
    UnknownVariable(String),
    #[error("value for `{name}` does not have type {expected}")]
    TypeMismatch { name: String, expected: String },
    #[error("a scenario needs at least one cycle")]
    EmptyScenario,
}

/// State carried between cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleState {
    pub config: Valuation,
    pub statics: Valuation,
    /// Number of cycles executed so far.
    pub cycle_index: usize,
}

impl CycleState {
    /// Cycle-0 state: the given configuration and declared initial statics.
    pub fn initial(program: &TypedProgram, config: Valuation) -> CycleState {
        let statics = program
            .slots_with_role(SlotRole::State)
            .map(|(_, s)| (s.name.clone(), s.init.clone()))
            .collect();
        CycleState { config, statics, cycle_index: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleResult {
    pub state: CycleState,
    pub outputs: Valuation,
    /// One entry per assertion evaluation, in execution order.
    pub assertions: Vec<(String, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// 1-based cycle number.
    pub cycle: usize,
    pub inputs: Valuation,
    pub statics: Valuation,
    pub outputs: Valuation,
    pub assertions: Vec<(String, bool)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub config: Valuation,
    pub cycles: Vec<CycleRecord>,
}

impl Trace {
    /// First (1-based) cycle in which `requirement` evaluated to FALSE.
    pub fn first_failure(&self, requirement: &str) -> Option<usize> {
        self.cycles
            .iter()
            .find(|c| c.assertions.iter().any(|(id, ok)| id == requirement && !ok))
            .map(|c| c.cycle)
    }
}

/// Slot-level executor. Cheap to clone, which the explicit-state engine uses
/// to share cycle prefixes.
#[derive(Debug, Clone)]
pub struct Machine<'p> {
    program: &'p TypedProgram,
    env: Vec<Value>,
    uses_old: bool,
}

impl<'p> Machine<'p> {
    /// All slots at their declared initial values.
    pub fn new(program: &'p TypedProgram) -> Self {
        Machine {
            program,
            env: program.slots.iter().map(|s| s.init.clone()).collect(),
            uses_old: program.requirements.iter().any(|r| r.expr.uses_old()),
        }
    }

    pub fn program(&self) -> &'p TypedProgram {
        self.program
    }

    pub fn values(&self) -> &[Value] {
        &self.env
    }

    pub fn get(&self, slot: SlotId) -> &Value {
        &self.env[slot]
    }

    /// Overwrites this machine's state with `other`'s, reusing storage.
    pub fn copy_from(&mut self, other: &Machine<'p>) {
        self.env.clone_from(&other.env);
    }

    pub fn set(&mut self, slot: SlotId, value: Value) {
        self.env[slot] = value;
    }

    /// Runs one cycle with the currently set inputs. Pushes one
    /// `(requirement index, holds)` pair per assertion evaluation.
    pub fn step(&mut self, results: &mut Vec<(usize, bool)>) {
        for (i, s) in self.program.slots.iter().enumerate() {
            if s.role == SlotRole::Local {
                self.env[i] = s.init.clone();
            }
        }
        let start = if self.uses_old { Some(self.env.clone()) } else { None };
        let program = self.program;
        self.exec(&program.body, start.as_deref(), results);
    }

    fn exec(&mut self, body: &[TStmt], start: Option<&[Value]>, results: &mut Vec<(usize, bool)>) {
        for s in body {
            match s {
                TStmt::Assign { target, value } => {
                    let v = self.eval(value, start).into_owned();
                    self.store(target, v);
                }
                TStmt::If { branches, else_body } => {
                    let taken = branches.iter().find(|(c, _)| self.eval(c, start).as_bool());
                    match taken {
                        Some((_, b)) => self.exec(b, start, results),
                        None => self.exec(else_body, start, results),
                    }
                }
                TStmt::Assert(i) => {
                    let ok = self.eval(&self.program.requirements[*i].expr, start).as_bool();
                    results.push((*i, ok));
                }
            }
        }
    }

    fn store(&mut self, target: &TLValue, v: Value) {
        let mut cell = &mut self.env[target.slot];
        for &p in &target.path {
            cell = match cell {
                Value::Array(items) => &mut items[p],
                _ => unreachable!("typechecked path"),
            };
        }
        match target.bit {
            None => *cell = v,
            Some(b) => {
                let Value::Word(w) = cell else { unreachable!("typechecked bit target") };
                if v.as_bool() {
                    *w |= 1 << b;
                } else {
                    *w &= !(1 << b);
                }
            }
        }
    }

    fn eval<'a>(&'a self, e: &TExpr, start: Option<&'a [Value]>) -> Cow<'a, Value> {
        match &e.kind {
            TExprKind::Const(v) => Cow::Owned(v.clone()),
            TExprKind::Slot(s) => Cow::Borrowed(&self.env[*s]),
            TExprKind::Old(s) => match start {
                Some(st) => Cow::Borrowed(&st[*s]),
                None => Cow::Borrowed(&self.env[*s]),
            },
            TExprKind::Index(base, pos) => match self.eval(base, start) {
                Cow::Borrowed(Value::Array(items)) => Cow::Borrowed(&items[*pos]),
                Cow::Owned(Value::Array(mut items)) => Cow::Owned(items.swap_remove(*pos)),
                _ => unreachable!("typechecked index"),
            },
            TExprKind::BitSel(base, b) => {
                Cow::Owned(Value::Bool((self.eval(base, start).as_word() >> b) & 1 == 1))
            }
            TExprKind::Not(x) => Cow::Owned(match self.eval(x, start).as_ref() {
                Value::Bool(b) => Value::Bool(!b),
                Value::Word(w) => Value::Word(!w),
                Value::Array(_) => unreachable!("typechecked NOT"),
            }),
            TExprKind::Bin(op, l, r) => {
                let a = self.eval(l, start);
                let b = self.eval(r, start);
                Cow::Owned(apply_bin(*op, &a, &b))
            }
        }
    }
}

pub(crate) fn apply_bin(op: BinOp, a: &Value, b: &Value) -> Value {
    match op {
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Neq => Value::Bool(a != b),
        _ => match (a, b) {
            (Value::Bool(x), Value::Bool(y)) => Value::Bool(match op {
                BinOp::And => *x && *y,
                BinOp::Or => *x || *y,
                _ => x ^ y,
            }),
            (Value::Word(x), Value::Word(y)) => Value::Word(match op {
                BinOp::And => x & y,
                BinOp::Or => x | y,
                _ => x ^ y,
            }),
            _ => unreachable!("typechecked operands"),
        },
    }
}

fn bind(
    machine: &mut Machine<'_>,
    role: SlotRole,
    role_name: &'static str,
    values: &Valuation,
) -> Result<(), InterpError> {
    let program = machine.program;
    for (id, slot) in program.slots_with_role(role) {
        let v = values
            .get(&slot.name)
            .ok_or_else(|| InterpError::MissingBinding { name: slot.name.clone(), role: role_name })?;
        if !v.conforms_to(&slot.dtype) {
            return Err(InterpError::TypeMismatch { name: slot.name.clone(), expected: slot.dtype.to_string() });
        }
        machine.set(id, v.clone());
    }
    for name in values.keys() {
        if !program.slots_with_role(role).any(|(_, s)| &s.name == name) {
            return Err(InterpError::UnknownVariable(name.clone()));
        }
    }
    Ok(())
}

fn collect(machine: &Machine<'_>, slots: impl Iterator<Item = SlotId>) -> Valuation {
    slots.map(|id| (machine.program.slots[id].name.clone(), machine.env[id].clone())).collect()
}

/// Executes one scan cycle from `state` with the given inputs.
pub fn run_cycle(
    program: &TypedProgram,
    state: &CycleState,
    inputs: &Valuation,
) -> Result<CycleResult, InterpError> {
    let mut m = Machine::new(program);
    bind(&mut m, SlotRole::Config, "CONFIG", &state.config)?;
    bind(&mut m, SlotRole::State, "STATIC", &state.statics)?;
    bind(&mut m, SlotRole::Input, "INPUT", inputs)?;
    let mut raw = Vec::new();
    m.step(&mut raw);
    let statics = collect(&m, program.slots_with_role(SlotRole::State).map(|(i, _)| i));
    let outputs = collect(&m, program.output_slots().map(|(i, _)| i));
    Ok(CycleResult {
        state: CycleState { config: state.config.clone(), statics, cycle_index: state.cycle_index + 1 },
        outputs,
        assertions: raw.into_iter().map(|(i, ok)| (program.requirements[i].id.clone(), ok)).collect(),
    })
}

/// Runs consecutive cycles under one frozen configuration.
pub fn run_scenario(
    program: &TypedProgram,
    config: &Valuation,
    input_sequence: &[Valuation],
) -> Result<Trace, InterpError> {
    if input_sequence.is_empty() {
        return Err(InterpError::EmptyScenario);
    }
    let mut state = CycleState::initial(program, config.clone());
    let mut cycles = Vec::with_capacity(input_sequence.len());
    for inputs in input_sequence {
        let r = run_cycle(program, &state, inputs)?;
        cycles.push(CycleRecord {
            cycle: r.state.cycle_index,
            inputs: inputs.clone(),
            statics: r.state.statics.clone(),
            outputs: r.outputs,
            assertions: r.assertions,
        });
        state = r.state;
    }
    Ok(Trace { config: config.clone(), cycles })
}
