//! Intermediate representation of PLC programs.
//!
//! The untyped tree ([`Program`], [`Pou`], [`Stmt`], [`Expr`]) is what the
//! textual and FBD frontends produce. [`typecheck_program`] resolves names,
//! inlines calls and unrolls loops into a [`TypedProgram`], which is the
//! input of the interpreter, the encoder and both engines.

mod interp;
mod typecheck;
mod value;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::Loc;

pub use interp::{
    run_cycle, run_scenario, CycleRecord, CycleResult, CycleState, InterpError, Machine, Trace,
};
pub use typecheck::{
    check_requirement_expr, log2_input_space, typecheck_program, Slot, SlotId, SlotRole, TExpr,
    TExprKind, TLValue, TStmt, TypedProgram, TypedRequirement,
};
pub use value::{Valuation, Value};

/// Width of a WORD in bits.
pub const WORD_BITS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataType {
    Bool,
    Word,
    Array { elem: Box<DataType>, lo: i64, hi: i64 },
}

impl DataType {
    pub fn array(elem: DataType, lo: i64, hi: i64) -> DataType {
        DataType::Array { elem: Box::new(elem), lo, hi }
    }

    /// Number of state bits occupied by a value of this type.
    pub fn bit_width(&self) -> u64 {
        match self {
            DataType::Bool => 1,
            DataType::Word => WORD_BITS as u64,
            DataType::Array { elem, lo, hi } => elem.bit_width() * (hi - lo + 1) as u64,
        }
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, DataType::Array { .. })
    }

    pub fn default_value(&self) -> Value {
        match self {
            DataType::Bool => Value::Bool(false),
            DataType::Word => Value::Word(0),
            DataType::Array { elem, lo, hi } => {
                Value::Array(vec![elem.default_value(); (hi - lo + 1) as usize])
            }
        }
    }
}

impl fmt::Display for DataType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataType::Bool => f.write_str("BOOL"),
            DataType::Word => f.write_str("WORD"),
            DataType::Array { elem, lo, hi } => write!(f, "ARRAY[{lo}..{hi}] OF {elem}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Input,
    Output,
    InOut,
    Static,
    Temp,
    Config,
}

impl Section {
    pub const ALL: [Section; 6] = [
        Section::Input,
        Section::Output,
        Section::InOut,
        Section::Static,
        Section::Temp,
        Section::Config,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Section::Input => "VAR_INPUT",
            Section::Output => "VAR_OUTPUT",
            Section::InOut => "VAR_IN_OUT",
            Section::Static => "VAR",
            Section::Temp => "VAR_TEMP",
            Section::Config => "VAR_CONFIG",
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Section::Input => "INPUT",
            Section::Output => "OUTPUT",
            Section::InOut => "INOUT",
            Section::Static => "STATIC",
            Section::Temp => "TEMP",
            Section::Config => "CONFIG",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub dtype: DataType,
    pub section: Section,
    pub init: Option<Expr>,
    pub loc: Loc,
}

impl VarDecl {
    pub fn new(name: impl Into<String>, dtype: DataType, section: Section) -> Self {
        VarDecl { name: name.into(), dtype, section, init: None, loc: Loc::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    And,
    Or,
    Xor,
    Eq,
    Neq,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::And => "AND",
            BinOp::Or => "OR",
            BinOp::Xor => "XOR",
            BinOp::Eq => "=",
            BinOp::Neq => "<>",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Neq)
    }
}

/// Literal as written in source. Decimal literals take their type from
/// context (`x := 1` with `x : BOOL`), `16#` literals are always WORD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Literal {
    Bool(bool),
    Int(u64),
    Word(u16),
}

/// Array subscript: either a constant or the variable of an enclosing FOR loop.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IndexExpr {
    Const(i64),
    LoopVar(String),
}

impl fmt::Display for IndexExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexExpr::Const(c) => write!(f, "{c}"),
            IndexExpr::LoopVar(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Const(Literal),
    Var(String),
    Index(Box<Expr>, IndexExpr),
    /// `.%Xb` bit selection; the bit is range-checked by the typechecker.
    BitSel(Box<Expr>, u32),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Value of a variable at the start of the current cycle. Requirements only.
    Old(String),
}

impl Expr {
    pub fn new(kind: ExprKind, loc: Loc) -> Self {
        Expr { kind, loc }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Var(name.into()), Loc::default())
    }

    pub fn bool(b: bool) -> Self {
        Expr::new(ExprKind::Const(Literal::Bool(b)), Loc::default())
    }

    pub fn word(w: u16) -> Self {
        Expr::new(ExprKind::Const(Literal::Word(w)), Loc::default())
    }

    pub fn int(v: u64) -> Self {
        Expr::new(ExprKind::Const(Literal::Int(v)), Loc::default())
    }

    pub fn old(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Old(name.into()), Loc::default())
    }

    pub fn not(e: Expr) -> Self {
        let loc = e.loc;
        Expr::new(ExprKind::Not(Box::new(e)), loc)
    }

    pub fn binary(op: BinOp, l: Expr, r: Expr) -> Self {
        let loc = l.loc;
        Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), loc)
    }

    pub fn and(l: Expr, r: Expr) -> Self {
        Self::binary(BinOp::And, l, r)
    }

    pub fn or(l: Expr, r: Expr) -> Self {
        Self::binary(BinOp::Or, l, r)
    }

    pub fn eq(l: Expr, r: Expr) -> Self {
        Self::binary(BinOp::Eq, l, r)
    }

    pub fn bit(base: Expr, b: u32) -> Self {
        let loc = base.loc;
        Expr::new(ExprKind::BitSel(Box::new(base), b), loc)
    }

    pub fn index(base: Expr, i: i64) -> Self {
        let loc = base.loc;
        Expr::new(ExprKind::Index(Box::new(base), IndexExpr::Const(i)), loc)
    }

    /// Structural equality that ignores source locations.
    pub fn same_shape(&self, other: &Expr) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Const(a), Const(b)) => a == b,
            (Var(a), Var(b)) | (Old(a), Old(b)) => a == b,
            (Index(a, i), Index(b, j)) => i == j && a.same_shape(b),
            (BitSel(a, i), BitSel(b, j)) => i == j && a.same_shape(b),
            (Not(a), Not(b)) => a.same_shape(b),
            (Binary(o1, a1, b1), Binary(o2, a2, b2)) => {
                o1 == o2 && a1.same_shape(a2) && b1.same_shape(b2)
            }
            _ => false,
        }
    }

    /// Names of all variables referenced (including inside `old`).
    pub fn free_vars(&self, out: &mut Vec<String>) {
        match &self.kind {
            ExprKind::Const(_) => {}
            ExprKind::Var(v) | ExprKind::Old(v) => {
                if !out.contains(v) {
                    out.push(v.clone())
                }
            }
            ExprKind::Index(b, _) | ExprKind::BitSel(b, _) | ExprKind::Not(b) => b.free_vars(out),
            ExprKind::Binary(_, l, r) => {
                l.free_vars(out);
                r.free_vars(out);
            }
        }
    }

    pub fn contains_old(&self) -> bool {
        match &self.kind {
            ExprKind::Old(_) => true,
            ExprKind::Const(_) | ExprKind::Var(_) => false,
            ExprKind::Index(b, _) | ExprKind::BitSel(b, _) | ExprKind::Not(b) => b.contains_old(),
            ExprKind::Binary(_, l, r) => l.contains_old() || r.contains_old(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    /// `target` is restricted to variables, array elements and bit selections.
    Assign { target: Expr, value: Expr },
    If { branches: Vec<(Expr, Vec<Stmt>)>, else_body: Vec<Stmt> },
    For { var: String, lo: Expr, hi: Expr, body: Vec<Stmt> },
    /// `callee(p := e, ..., q => v)`; inputs/in-outs use `:=`, outputs `=>`.
    Call { callee: String, inputs: Vec<(String, Expr)>, outputs: Vec<(String, Expr)> },
    /// Evaluation point of an inline requirement.
    Assert(String),
}

impl Stmt {
    pub fn new(kind: StmtKind, loc: Loc) -> Self {
        Stmt { kind, loc }
    }

    pub fn assign(target: Expr, value: Expr) -> Self {
        let loc = target.loc;
        Stmt::new(StmtKind::Assign { target, value }, loc)
    }

    pub fn same_shape(&self, other: &Stmt) -> bool {
        fn block(a: &[Stmt], b: &[Stmt]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_shape(y))
        }
        fn binds(a: &[(String, Expr)], b: &[(String, Expr)]) -> bool {
            a.len() == b.len() && a.iter().zip(b).all(|((n, x), (m, y))| n == m && x.same_shape(y))
        }
        use StmtKind::*;
        match (&self.kind, &other.kind) {
            (Assign { target: t1, value: v1 }, Assign { target: t2, value: v2 }) => {
                t1.same_shape(t2) && v1.same_shape(v2)
            }
            (If { branches: b1, else_body: e1 }, If { branches: b2, else_body: e2 }) => {
                b1.len() == b2.len()
                    && b1.iter().zip(b2).all(|((c1, s1), (c2, s2))| c1.same_shape(c2) && block(s1, s2))
                    && block(e1, e2)
            }
            (For { var: v1, lo: l1, hi: h1, body: b1 }, For { var: v2, lo: l2, hi: h2, body: b2 }) => {
                v1 == v2 && l1.same_shape(l2) && h1.same_shape(h2) && block(b1, b2)
            }
            (
                Call { callee: c1, inputs: i1, outputs: o1 },
                Call { callee: c2, inputs: i2, outputs: o2 },
            ) => c1 == c2 && binds(i1, i2) && binds(o1, o2),
            (Assert(a), Assert(b)) => a == b,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PouKind {
    #[serde(rename = "FC")]
    Fc,
    #[serde(rename = "FB")]
    Fb,
}

impl fmt::Display for PouKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PouKind::Fc => "FC",
            PouKind::Fb => "FB",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pou {
    pub name: String,
    pub kind: PouKind,
    pub decls: Vec<VarDecl>,
    pub body: Vec<Stmt>,
    pub loc: Loc,
}

impl Pou {
    pub fn decl(&self, name: &str) -> Option<&VarDecl> {
        self.decls.iter().find(|d| d.name == name)
    }

    pub fn decls_in(&self, section: Section) -> impl Iterator<Item = &VarDecl> {
        self.decls.iter().filter(move |d| d.section == section)
    }

    /// Number of statements, counting nested ones.
    pub fn statement_count(&self) -> usize {
        fn count(body: &[Stmt]) -> usize {
            body.iter()
                .map(|s| {
                    1 + match &s.kind {
                        StmtKind::If { branches, else_body } => {
                            branches.iter().map(|(_, b)| count(b)).sum::<usize>() + count(else_body)
                        }
                        StmtKind::For { body, .. } => count(body),
                        _ => 0,
                    }
                })
                .sum()
        }
        count(&self.body)
    }

    pub fn callees(&self) -> Vec<String> {
        fn walk(body: &[Stmt], out: &mut Vec<String>) {
            for s in body {
                match &s.kind {
                    StmtKind::Call { callee, .. } => {
                        if !out.contains(callee) {
                            out.push(callee.clone())
                        }
                    }
                    StmtKind::If { branches, else_body } => {
                        for (_, b) in branches {
                            walk(b, out);
                        }
                        walk(else_body, out);
                    }
                    StmtKind::For { body, .. } => walk(body, out),
                    _ => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }
}

/// Where an inline requirement is evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProgramPoint {
    /// Immediately before the statement starting at `line`.
    BeforeStmt { pou: String, line: usize },
    /// At the end of a nested block (IF branch or loop body) closing at `line`.
    BlockEnd { pou: String, line: usize },
    /// After the last statement of the POU body.
    BodyEnd { pou: String },
}

impl fmt::Display for ProgramPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgramPoint::BeforeStmt { pou, line } => write!(f, "{pou}: before line {line}"),
            ProgramPoint::BlockEnd { pou, line } => write!(f, "{pou}: end of block at line {line}"),
            ProgramPoint::BodyEnd { pou } => write!(f, "{pou}: end of body"),
        }
    }
}

/// A `//#ASSERT` comment found in source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssertionComment {
    pub id: String,
    /// Expression text between `//#ASSERT` and the terminating `;`.
    pub text: String,
    pub expr: Expr,
    pub loc: Loc,
    pub point: ProgramPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RequirementOrigin {
    InlineComment,
    Template,
    Manifest,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub pous: Vec<Pou>,
    pub assertions: Vec<AssertionComment>,
    /// Explicit cyclic entry point; otherwise the unique POU no other POU calls.
    pub entry: Option<String>,
}

impl Program {
    pub fn pou(&self, name: &str) -> Option<&Pou> {
        self.pous.iter().find(|p| p.name == name)
    }

    pub fn entry_name(&self) -> Result<&str, String> {
        if let Some(e) = &self.entry {
            return self
                .pou(e)
                .map(|p| p.name.as_str())
                .ok_or_else(|| format!("entry POU `{e}` is not defined"));
        }
        let called: Vec<String> = self.pous.iter().flat_map(|p| p.callees()).collect();
        let roots: Vec<&Pou> = self.pous.iter().filter(|p| !called.contains(&p.name)).collect();
        match roots.as_slice() {
            [one] => Ok(&one.name),
            [] if self.pous.is_empty() => Err("no POU found".to_string()),
            [] => Err("every POU is called by another; cannot choose an entry point".to_string()),
            many => Err(format!(
                "ambiguous entry point, candidates: {}",
                many.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", ")
            )),
        }
    }

    pub fn entry_pou(&self) -> Result<&Pou, String> {
        let name = self.entry_name()?;
        Ok(self.pou(name).expect("entry resolved"))
    }

    pub fn same_shape(&self, other: &Program) -> bool {
        self.pous.len() == other.pous.len()
            && self.pous.iter().zip(&other.pous).all(|(a, b)| {
                a.name == b.name
                    && a.kind == b.kind
                    && a.decls.len() == b.decls.len()
                    && a.decls.iter().zip(&b.decls).all(|(x, y)| {
                        x.name == y.name
                            && x.dtype == y.dtype
                            && x.section == y.section
                            && match (&x.init, &y.init) {
                                (Some(i), Some(j)) => i.same_shape(j),
                                (None, None) => true,
                                _ => false,
                            }
                    })
                    && a.body.len() == b.body.len()
                    && a.body.iter().zip(&b.body).all(|(x, y)| x.same_shape(y))
            })
            && self.assertions.len() == other.assertions.len()
            && self.assertions.iter().zip(&other.assertions).all(|(a, b)| {
                a.id == b.id
                    && a.expr.same_shape(&b.expr)
                    && std::mem::discriminant(&a.point) == std::mem::discriminant(&b.point)
            })
    }
}
