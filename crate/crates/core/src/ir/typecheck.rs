//! Name resolution, type checking, call inlining and loop unrolling.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{
    AssertionComment, BinOp, DataType, Expr, ExprKind, IndexExpr, Literal, PouKind, Program,
    ProgramPoint, RequirementOrigin, Section, Stmt, StmtKind, Value,
};
use crate::diag::{DiagKind, Diagnostic, Diagnostics, Loc};

pub type SlotId = usize;

/// Upper bound on the number of iterations a single FOR loop may unroll to.
const MAX_UNROLL: i64 = 4096;

/// How a slot behaves across scan cycles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotRole {
    /// Nondeterministic at cycle 0, frozen afterwards.
    Config,
    /// Nondeterministic, fresh every cycle.
    Input,
    /// Persists from one cycle to the next.
    State,
    /// Reinitialised at the start of every cycle (and at every call for callee locals).
    Local,
}

/// One storage location of the flattened program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    /// Plain name for entry-POU variables, `Callee.var` for inlined callees.
    pub name: String,
    pub dtype: DataType,
    pub role: SlotRole,
    pub section: Section,
    pub owner: String,
    pub init: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: DataType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TExprKind {
    Const(Value),
    Slot(SlotId),
    /// Value of the slot at the start of the cycle.
    Old(SlotId),
    /// Array element at a zero-based position.
    Index(Box<TExpr>, usize),
    BitSel(Box<TExpr>, u8),
    Not(Box<TExpr>),
    Bin(BinOp, Box<TExpr>, Box<TExpr>),
}

impl TExpr {
    fn new(kind: TExprKind, ty: DataType) -> Self {
        TExpr { kind, ty }
    }

    pub fn uses_old(&self) -> bool {
        match &self.kind {
            TExprKind::Old(_) => true,
            TExprKind::Const(_) | TExprKind::Slot(_) => false,
            TExprKind::Index(b, _) | TExprKind::BitSel(b, _) | TExprKind::Not(b) => b.uses_old(),
            TExprKind::Bin(_, l, r) => l.uses_old() || r.uses_old(),
        }
    }

    pub fn slots(&self, out: &mut Vec<SlotId>) {
        match &self.kind {
            TExprKind::Const(_) => {}
            TExprKind::Slot(s) | TExprKind::Old(s) => {
                if !out.contains(s) {
                    out.push(*s)
                }
            }
            TExprKind::Index(b, _) | TExprKind::BitSel(b, _) | TExprKind::Not(b) => b.slots(out),
            TExprKind::Bin(_, l, r) => {
                l.slots(out);
                r.slots(out);
            }
        }
    }
}

/// Assignment target: a slot, an element path into it and an optional bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TLValue {
    pub slot: SlotId,
    pub path: Vec<usize>,
    pub bit: Option<u8>,
    pub ty: DataType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TStmt {
    Assign { target: TLValue, value: TExpr },
    If { branches: Vec<(TExpr, Vec<TStmt>)>, else_body: Vec<TStmt> },
    /// Evaluate the requirement with this index.
    Assert(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedRequirement {
    pub id: String,
    pub text: String,
    pub expr: TExpr,
    pub origin: RequirementOrigin,
    pub point: ProgramPoint,
}

/// A resolved, loop-free, call-free program ready for execution and encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedProgram {
    pub entry: String,
    pub kind: PouKind,
    pub slots: Vec<Slot>,
    pub body: Vec<TStmt>,
    pub requirements: Vec<TypedRequirement>,
    entry_scope: BTreeMap<String, SlotId>,
}

impl TypedProgram {
    pub fn slot_id(&self, name: &str) -> Option<SlotId> {
        self.entry_scope
            .get(name)
            .copied()
            .or_else(|| self.slots.iter().position(|s| s.name == name))
    }

    pub fn slot(&self, id: SlotId) -> &Slot {
        &self.slots[id]
    }

    pub fn slots_with_role(&self, role: SlotRole) -> impl Iterator<Item = (SlotId, &Slot)> {
        self.slots.iter().enumerate().filter(move |(_, s)| s.role == role)
    }

    /// OUTPUT variables of the entry POU.
    pub fn output_slots(&self) -> impl Iterator<Item = (SlotId, &Slot)> {
        let entry = self.entry.clone();
        self.slots
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.owner == entry && s.section == Section::Output)
    }

    pub fn has_state(&self) -> bool {
        self.slots.iter().any(|s| s.role == SlotRole::State)
    }

    pub fn requirement_index(&self, id: &str) -> Option<usize> {
        self.requirements.iter().position(|r| r.id == id)
    }

    pub fn requirement(&self, id: &str) -> Option<&TypedRequirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    /// True when the named requirement can depend on earlier cycles.
    pub fn needs_multiple_cycles(&self, requirement: &str) -> bool {
        self.has_state() || self.requirement(requirement).is_some_and(|r| r.expr.uses_old())
    }

    /// Appends a requirement evaluated at the end of the entry body.
    pub fn with_requirement(
        &self,
        id: &str,
        expr: &Expr,
        text: &str,
        origin: RequirementOrigin,
    ) -> Result<TypedProgram, Diagnostics> {
        if self.requirement_index(id).is_some() {
            return Err(Diagnostic::new(
                DiagKind::Requirement,
                format!("duplicate requirement id `{id}`"),
                Some(expr.loc),
            )
            .into());
        }
        let texpr = check_requirement_expr(self, expr)?;
        let mut out = self.clone();
        out.requirements.push(TypedRequirement {
            id: id.to_string(),
            text: text.to_string(),
            expr: texpr,
            origin,
            point: ProgramPoint::BodyEnd { pou: self.entry.clone() },
        });
        out.body.push(TStmt::Assert(out.requirements.len() - 1));
        Ok(out)
    }

    /// Keeps only the named requirement (and its evaluation points).
    pub fn restricted_to(&self, id: &str) -> Option<TypedProgram> {
        let keep = self.requirement_index(id)?;
        fn filter(body: &[TStmt], keep: usize) -> Vec<TStmt> {
            body.iter()
                .filter_map(|s| match s {
                    TStmt::Assert(i) if *i != keep => None,
                    TStmt::Assert(_) => Some(TStmt::Assert(0)),
                    TStmt::If { branches, else_body } => Some(TStmt::If {
                        branches: branches.iter().map(|(c, b)| (c.clone(), filter(b, keep))).collect(),
                        else_body: filter(else_body, keep),
                    }),
                    other => Some(other.clone()),
                })
                .collect()
        }
        let mut out = self.clone();
        out.body = filter(&self.body, keep);
        out.requirements = vec![self.requirements[keep].clone()];
        Some(out)
    }
}

/// Sum of the bit widths of every CONFIG and INPUT variable: the base-2
/// logarithm of the number of (configuration, single-cycle input) combinations.
pub fn log2_input_space(program: &TypedProgram) -> u64 {
    program
        .slots
        .iter()
        .filter(|s| matches!(s.role, SlotRole::Config | SlotRole::Input))
        .map(|s| s.dtype.bit_width())
        .sum()
}

/// Type-checks a requirement expression in the entry POU's scope. `old()` is
/// permitted and the result must be BOOL.
pub fn check_requirement_expr(program: &TypedProgram, expr: &Expr) -> Result<TExpr, Diagnostics> {
    let scope = Scope {
        vars: program.entry_scope.clone().into_iter().collect(),
        loop_vars: Vec::new(),
    };
    let mut diags = Vec::new();
    let mut cx = ExprCx { slots: &program.slots, scope: &scope, allow_old: true, diags: &mut diags };
    let typed = cx.expr(expr, None);
    match typed {
        Some(t) if t.ty == DataType::Bool => Ok(t),
        Some(t) => Err(Diagnostic::at(
            DiagKind::Type,
            format!("requirement must be BOOL, found {}", t.ty),
            expr.loc,
        )
        .into()),
        None => Err(Diagnostics(diags)),
    }
}

#[derive(Debug, Clone)]
struct Scope {
    vars: HashMap<String, SlotId>,
    loop_vars: Vec<(String, i64)>,
}

impl Scope {
    fn loop_value(&self, name: &str) -> Option<i64> {
        self.loop_vars.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

struct ExprCx<'a> {
    slots: &'a [Slot],
    scope: &'a Scope,
    allow_old: bool,
    diags: &'a mut Vec<Diagnostic>,
}

fn is_poly_literal(e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Const(Literal::Int(_)))
}

impl ExprCx<'_> {
    fn err(&mut self, msg: impl Into<String>, loc: Loc) -> Option<TExpr> {
        self.diags.push(Diagnostic::at(DiagKind::Type, msg, loc));
        None
    }

    fn lookup(&mut self, name: &str, loc: Loc) -> Option<SlotId> {
        if let Some(id) = self.scope.vars.get(name) {
            return Some(*id);
        }
        if self.scope.loop_value(name).is_some() {
            self.err(format!("loop variable `{name}` can only be used as an array index"), loc);
        } else {
            self.err(format!("undefined identifier `{name}`"), loc);
        }
        None
    }

    fn index_value(&mut self, idx: &IndexExpr, loc: Loc) -> Option<i64> {
        match idx {
            IndexExpr::Const(c) => Some(*c),
            IndexExpr::LoopVar(v) => match self.scope.loop_value(v) {
                Some(val) => Some(val),
                None if self.scope.vars.contains_key(v) => {
                    self.err(format!("array index `{v}` must be a constant or a loop variable"), loc);
                    None
                }
                None => {
                    self.err(format!("undefined identifier `{v}`"), loc);
                    None
                }
            },
        }
    }

    fn expr(&mut self, e: &Expr, expected: Option<&DataType>) -> Option<TExpr> {
        let t = self.infer(e, expected)?;
        if let Some(exp) = expected {
            if &t.ty != exp {
                return self.err(format!("type mismatch: expected {exp}, found {}", t.ty), e.loc);
            }
        }
        Some(t)
    }

    fn infer(&mut self, e: &Expr, expected: Option<&DataType>) -> Option<TExpr> {
        match &e.kind {
            ExprKind::Const(Literal::Bool(b)) => Some(TExpr::new(TExprKind::Const(Value::Bool(*b)), DataType::Bool)),
            ExprKind::Const(Literal::Word(w)) => Some(TExpr::new(TExprKind::Const(Value::Word(*w)), DataType::Word)),
            ExprKind::Const(Literal::Int(n)) => match expected {
                Some(DataType::Bool) => match n {
                    0 | 1 => Some(TExpr::new(TExprKind::Const(Value::Bool(*n == 1)), DataType::Bool)),
                    _ => self.err(format!("literal {n} is not a BOOL (use 0 or 1)"), e.loc),
                },
                Some(DataType::Array { .. }) => {
                    self.err(format!("type mismatch: expected {}, found integer literal", expected.unwrap()), e.loc)
                }
                _ => match u16::try_from(*n) {
                    Ok(w) => Some(TExpr::new(TExprKind::Const(Value::Word(w)), DataType::Word)),
                    Err(_) => self.err(format!("literal {n} exceeds the WORD range 0..65535"), e.loc),
                },
            },
            ExprKind::Var(name) => {
                let id = self.lookup(name, e.loc)?;
                Some(TExpr::new(TExprKind::Slot(id), self.slots[id].dtype.clone()))
            }
            ExprKind::Old(name) => {
                if !self.allow_old {
                    return self.err("old() is only allowed in requirements", e.loc);
                }
                let id = self.lookup(name, e.loc)?;
                Some(TExpr::new(TExprKind::Old(id), self.slots[id].dtype.clone()))
            }
            ExprKind::Index(base, idx) => {
                let b = self.infer(base, None)?;
                let DataType::Array { elem, lo, hi } = b.ty.clone() else {
                    return self.err(format!("cannot index a value of type {}", b.ty), e.loc);
                };
                let i = self.index_value(idx, e.loc)?;
                if i < lo || i > hi {
                    return self.err(format!("index {i} out of bounds {lo}..{hi}"), e.loc);
                }
                Some(TExpr::new(TExprKind::Index(Box::new(b), (i - lo) as usize), *elem))
            }
            ExprKind::BitSel(base, bit) => {
                let b = self.infer(base, None)?;
                if b.ty != DataType::Word {
                    return self.err(format!("bit selection requires a WORD operand, found {}", b.ty), e.loc);
                }
                if *bit > 15 {
                    return self.err(format!("bit selector %X{bit} out of range: WORD has bits 0..15"), e.loc);
                }
                Some(TExpr::new(TExprKind::BitSel(Box::new(b), *bit as u8), DataType::Bool))
            }
            ExprKind::Not(inner) => {
                let want = expected.filter(|t| t.is_scalar());
                let t = self.expr(inner, want)?;
                if !t.ty.is_scalar() {
                    return self.err(format!("NOT is not defined on {}", t.ty), e.loc);
                }
                let ty = t.ty.clone();
                Some(TExpr::new(TExprKind::Not(Box::new(t)), ty))
            }
            ExprKind::Binary(op, l, r) => {
                let operand_expected = if op.is_comparison() { None } else { expected.filter(|t| t.is_scalar()) };
                let (tl, tr) = if is_poly_literal(l) && !is_poly_literal(r) {
                    let tr = self.expr(r, operand_expected)?;
                    let tl = self.expr(l, Some(&tr.ty))?;
                    (tl, tr)
                } else {
                    let tl = self.expr(l, operand_expected)?;
                    let tr = self.infer(r, Some(&tl.ty))?;
                    (tl, tr)
                };
                if tl.ty != tr.ty {
                    return self.err(format!("type mismatch: {} {} {}", tl.ty, op.symbol(), tr.ty), e.loc);
                }
                if !tl.ty.is_scalar() {
                    return self.err(format!("operator {} is not defined on {}", op.symbol(), tl.ty), e.loc);
                }
                let ty = if op.is_comparison() { DataType::Bool } else { tl.ty.clone() };
                Some(TExpr::new(TExprKind::Bin(*op, Box::new(tl), Box::new(tr)), ty))
            }
        }
    }

    fn lvalue(&mut self, e: &Expr) -> Option<TLValue> {
        match &e.kind {
            ExprKind::Var(name) => {
                let id = self.lookup(name, e.loc)?;
                if self.slots[id].role == SlotRole::Config {
                    self.err(format!("configuration variable `{name}` is read-only"), e.loc);
                    return None;
                }
                Some(TLValue { slot: id, path: Vec::new(), bit: None, ty: self.slots[id].dtype.clone() })
            }
            ExprKind::Index(base, idx) => {
                let mut lv = self.lvalue(base)?;
                let DataType::Array { elem, lo, hi } = lv.ty.clone() else {
                    self.err(format!("cannot index a value of type {}", lv.ty), e.loc);
                    return None;
                };
                if lv.bit.is_some() {
                    self.err("cannot index a bit selection", e.loc);
                    return None;
                }
                let i = self.index_value(idx, e.loc)?;
                if i < lo || i > hi {
                    self.err(format!("index {i} out of bounds {lo}..{hi}"), e.loc);
                    return None;
                }
                lv.path.push((i - lo) as usize);
                lv.ty = *elem;
                Some(lv)
            }
            ExprKind::BitSel(base, bit) => {
                let mut lv = self.lvalue(base)?;
                if lv.ty != DataType::Word || lv.bit.is_some() {
                    self.err(format!("bit selection requires a WORD operand, found {}", lv.ty), e.loc);
                    return None;
                }
                if *bit > 15 {
                    self.err(format!("bit selector %X{bit} out of range: WORD has bits 0..15"), e.loc);
                    return None;
                }
                lv.bit = Some(*bit as u8);
                lv.ty = DataType::Bool;
                Some(lv)
            }
            _ => {
                self.err("assignment target must be a variable, array element or bit selection", e.loc);
                None
            }
        }
    }
}

struct Checker<'p> {
    program: &'p Program,
    entry: String,
    slots: Vec<Slot>,
    requirements: Vec<TypedRequirement>,
    assertions: HashMap<&'p str, &'p AssertionComment>,
    instances: HashMap<String, Scope>,
    call_stack: Vec<String>,
    diags: Vec<Diagnostic>,
}

/// Resolves and type-checks `program`, inlining calls from the entry POU and
/// unrolling FOR loops. Inline `//#ASSERT` requirements reachable from the
/// entry point are type-checked in the scope they appear in.
pub fn typecheck_program(program: &Program) -> Result<TypedProgram, Diagnostics> {
    let entry = program
        .entry_pou()
        .map_err(|m| Diagnostics::single(Diagnostic::new(DiagKind::Declaration, m, None)))?;
    let mut ck = Checker {
        program,
        entry: entry.name.clone(),
        slots: Vec::new(),
        requirements: Vec::new(),
        assertions: program.assertions.iter().map(|a| (a.id.as_str(), a)).collect(),
        instances: HashMap::new(),
        call_stack: vec![entry.name.clone()],
        diags: Vec::new(),
    };
    let mut scope = ck.declare(entry, true);
    let body = ck.block(&entry.body, &mut scope);
    if !ck.diags.is_empty() {
        return Err(Diagnostics(ck.diags));
    }
    Ok(TypedProgram {
        entry: entry.name.clone(),
        kind: entry.kind,
        slots: ck.slots,
        body,
        requirements: ck.requirements,
        entry_scope: scope.vars.into_iter().collect(),
    })
}

impl<'p> Checker<'p> {
    fn diag(&mut self, kind: DiagKind, msg: impl Into<String>, loc: Loc) {
        self.diags.push(Diagnostic::at(kind, msg, loc));
    }

    fn declare(&mut self, pou: &super::Pou, is_entry: bool) -> Scope {
        let mut scope = Scope { vars: HashMap::new(), loop_vars: Vec::new() };
        for d in &pou.decls {
            if scope.vars.contains_key(&d.name) {
                self.diag(DiagKind::Declaration, format!("duplicate declaration of `{}`", d.name), d.loc);
                continue;
            }
            if d.section == Section::Static && pou.kind == PouKind::Fc {
                self.diag(
                    DiagKind::Declaration,
                    format!("FC `{}` cannot declare static variable `{}`", pou.name, d.name),
                    d.loc,
                );
            }
            if d.section == Section::Config && !is_entry {
                self.diag(
                    DiagKind::Declaration,
                    format!("configuration variable `{}` must be declared in the entry POU", d.name),
                    d.loc,
                );
            }
            if let DataType::Array { lo, hi, .. } = &d.dtype {
                if lo > hi {
                    self.diag(DiagKind::Declaration, format!("array bounds {lo}..{hi} are empty"), d.loc);
                    continue;
                }
            }
            let role = match (is_entry, pou.kind, d.section) {
                (true, _, Section::Config) => SlotRole::Config,
                (true, _, Section::Input | Section::InOut) => SlotRole::Input,
                (true, PouKind::Fb, Section::Output | Section::Static) => SlotRole::State,
                (false, PouKind::Fb, s) if s != Section::Temp => SlotRole::State,
                _ => SlotRole::Local,
            };
            let init = match &d.init {
                None => d.dtype.default_value(),
                Some(e) => self.constant(e, &d.dtype).unwrap_or_else(|| d.dtype.default_value()),
            };
            let name = if is_entry { d.name.clone() } else { format!("{}.{}", pou.name, d.name) };
            self.slots.push(Slot {
                name,
                dtype: d.dtype.clone(),
                role,
                section: d.section,
                owner: pou.name.clone(),
                init,
            });
            scope.vars.insert(d.name.clone(), self.slots.len() - 1);
        }
        scope
    }

    fn constant(&mut self, e: &Expr, ty: &DataType) -> Option<Value> {
        if !matches!(e.kind, ExprKind::Const(_)) || !ty.is_scalar() {
            self.diag(DiagKind::Type, "initializer must be a scalar literal", e.loc);
            return None;
        }
        let scope = Scope { vars: HashMap::new(), loop_vars: Vec::new() };
        let mut cx = ExprCx { slots: &self.slots, scope: &scope, allow_old: false, diags: &mut self.diags };
        match cx.expr(e, Some(ty))?.kind {
            TExprKind::Const(v) => Some(v),
            _ => None,
        }
    }

    fn expr(&mut self, e: &Expr, scope: &Scope, expected: Option<&DataType>, allow_old: bool) -> Option<TExpr> {
        ExprCx { slots: &self.slots, scope, allow_old, diags: &mut self.diags }.expr(e, expected)
    }

    fn lvalue(&mut self, e: &Expr, scope: &Scope) -> Option<TLValue> {
        ExprCx { slots: &self.slots, scope, allow_old: false, diags: &mut self.diags }.lvalue(e)
    }

    fn block(&mut self, body: &[Stmt], scope: &mut Scope) -> Vec<TStmt> {
        let mut out = Vec::new();
        for s in body {
            self.stmt(s, scope, &mut out);
        }
        out
    }

    fn stmt(&mut self, s: &Stmt, scope: &mut Scope, out: &mut Vec<TStmt>) {
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let Some(lv) = self.lvalue(target, scope) else { return };
                let ty = lv.ty.clone();
                if let Some(v) = self.expr(value, scope, Some(&ty), false) {
                    out.push(TStmt::Assign { target: lv, value: v });
                }
            }
            StmtKind::If { branches, else_body } => {
                let mut tb = Vec::new();
                for (cond, body) in branches {
                    let c = self.expr(cond, scope, Some(&DataType::Bool), false);
                    let b = self.block(body, scope);
                    if let Some(c) = c {
                        tb.push((c, b));
                    }
                }
                let e = self.block(else_body, scope);
                if tb.len() == branches.len() {
                    out.push(TStmt::If { branches: tb, else_body: e });
                }
            }
            StmtKind::For { var, lo, hi, body } => {
                let bound = |e: &Expr| match e.kind {
                    ExprKind::Const(Literal::Int(n)) => Some(n as i64),
                    ExprKind::Const(Literal::Word(w)) => Some(w as i64),
                    _ => None,
                };
                let (Some(l), Some(h)) = (bound(lo), bound(hi)) else {
                    let loc = if bound(lo).is_none() { lo.loc } else { hi.loc };
                    self.diag(DiagKind::Type, "non-constant loop bound", loc);
                    return;
                };
                if h - l + 1 > MAX_UNROLL {
                    self.diag(DiagKind::Type, format!("loop unrolls to more than {MAX_UNROLL} iterations"), s.loc);
                    return;
                }
                for i in l..=h {
                    scope.loop_vars.push((var.clone(), i));
                    let b = self.block(body, scope);
                    scope.loop_vars.pop();
                    out.extend(b);
                    if !self.diags.is_empty() {
                        // one iteration is enough to report body errors
                        break;
                    }
                }
            }
            StmtKind::Call { callee, inputs, outputs } => self.call(s.loc, callee, inputs, outputs, scope, out),
            StmtKind::Assert(id) => {
                let Some(comment) = self.assertions.get(id.as_str()).copied() else {
                    self.diag(DiagKind::Requirement, format!("unknown assertion `{id}`"), s.loc);
                    return;
                };
                let Some(texpr) = self.expr(&comment.expr, scope, None, true) else { return };
                if texpr.ty != DataType::Bool {
                    self.diag(DiagKind::Type, format!("requirement must be BOOL, found {}", texpr.ty), comment.loc);
                    return;
                }
                let idx = match self.requirements.iter().position(|r| &r.id == id) {
                    Some(i) => i,
                    None => {
                        self.requirements.push(TypedRequirement {
                            id: id.clone(),
                            text: comment.text.clone(),
                            expr: texpr,
                            origin: RequirementOrigin::InlineComment,
                            point: comment.point.clone(),
                        });
                        self.requirements.len() - 1
                    }
                };
                out.push(TStmt::Assert(idx));
            }
        }
    }

    fn call(
        &mut self,
        loc: Loc,
        callee: &str,
        inputs: &[(String, Expr)],
        outputs: &[(String, Expr)],
        scope: &mut Scope,
        out: &mut Vec<TStmt>,
    ) {
        let Some(pou) = self.program.pou(callee) else {
            self.diag(DiagKind::Type, format!("call to undefined POU `{callee}`"), loc);
            return;
        };
        if callee == self.entry || self.call_stack.iter().any(|c| c == callee) {
            self.diag(DiagKind::Type, format!("recursive call to `{callee}`"), loc);
            return;
        }
        let callee_scope = match self.instances.get(callee) {
            Some(s) => s.clone(),
            None => {
                let s = self.declare(pou, false);
                self.instances.insert(callee.to_string(), s.clone());
                s
            }
        };
        // reset locals of this activation
        for d in &pou.decls {
            let id = callee_scope.vars[&d.name];
            let slot = &self.slots[id];
            if slot.role == SlotRole::Local {
                out.push(TStmt::Assign {
                    target: TLValue { slot: id, path: Vec::new(), bit: None, ty: slot.dtype.clone() },
                    value: TExpr::new(TExprKind::Const(slot.init.clone()), slot.dtype.clone()),
                });
            }
        }
        let mut write_back = Vec::new();
        for (param, e) in inputs {
            let Some(d) = pou.decl(param).filter(|d| matches!(d.section, Section::Input | Section::InOut)) else {
                self.diag(DiagKind::Type, format!("`{param}` is not an input of `{callee}`"), e.loc);
                continue;
            };
            let id = callee_scope.vars[param];
            if let Some(v) = self.expr(e, scope, Some(&d.dtype), false) {
                out.push(TStmt::Assign {
                    target: TLValue { slot: id, path: Vec::new(), bit: None, ty: d.dtype.clone() },
                    value: v,
                });
            }
            if d.section == Section::InOut {
                if let Some(lv) = self.lvalue(e, scope) {
                    write_back.push((lv, id));
                }
            }
        }
        for d in pou.decls.iter().filter(|d| matches!(d.section, Section::Input | Section::InOut)) {
            if !inputs.iter().any(|(p, _)| p == &d.name) {
                self.diag(DiagKind::Type, format!("call to `{callee}` does not bind input `{}`", d.name), loc);
            }
        }
        self.call_stack.push(callee.to_string());
        let mut inner = callee_scope.clone();
        let body = self.block(&pou.body, &mut inner);
        self.call_stack.pop();
        out.extend(body);
        for (param, target) in outputs {
            let Some(d) = pou.decl(param).filter(|d| d.section == Section::Output) else {
                self.diag(DiagKind::Type, format!("`{param}` is not an output of `{callee}`"), target.loc);
                continue;
            };
            let id = callee_scope.vars[param];
            if let Some(lv) = self.lvalue(target, scope) {
                if lv.ty != d.dtype {
                    self.diag(
                        DiagKind::Type,
                        format!("type mismatch: expected {}, found {}", lv.ty, d.dtype),
                        target.loc,
                    );
                    continue;
                }
                write_back.push((lv, id));
            }
        }
        for (lv, id) in write_back {
            let ty = self.slots[id].dtype.clone();
            out.push(TStmt::Assign { target: lv, value: TExpr::new(TExprKind::Slot(id), ty) });
        }
    }
}
