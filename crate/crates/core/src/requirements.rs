//! Requirements: assertion parsing, if/elsif/else specification templates
//! and per-safety-chain instantiation.

use crate::diag::{DiagKind, Diagnostic, Diagnostics, Loc};
use crate::il::{parse_expression, print_expr};
use crate::ir::{
    check_requirement_expr, DataType, Expr, ExprKind, Literal, ProgramPoint, RequirementOrigin, TypedProgram,
};

/// An untyped requirement ready to be attached to a program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Requirement {
    pub id: String,
    pub text: String,
    pub expr: Expr,
    pub origin: RequirementOrigin,
    pub point: Option<ProgramPoint>,
}

impl Requirement {
    pub fn new(id: impl Into<String>, expr: Expr, origin: RequirementOrigin) -> Self {
        Requirement { id: id.into(), text: print_expr(&expr), expr, origin, point: None }
    }
}

/// Parses assertion text (with or without the `//#ASSERT` prefix and the
/// trailing `;`) and checks it against `program`.
pub fn parse_assertion(id: &str, text: &str, program: &TypedProgram) -> Result<Requirement, Diagnostics> {
    let mut body = text.trim();
    let mut base = Loc::new(1, 1, 0);
    if let Some(rest) = body.strip_prefix("//#ASSERT") {
        base = Loc::new(1, 10, 9);
        body = rest;
    }
    let body = body.trim_end();
    let body = body.strip_suffix(';').unwrap_or(body);
    let expr = parse_expression(body, base)?;
    check_requirement_expr(program, &expr)?;
    Ok(Requirement {
        id: id.to_string(),
        text: body.trim().to_string(),
        expr,
        origin: RequirementOrigin::Manifest,
        point: None,
    })
}

/// Adds requirements to a program, evaluated at the end of the entry body.
pub fn attach(program: &TypedProgram, reqs: &[Requirement]) -> Result<TypedProgram, Diagnostics> {
    let mut out = program.clone();
    for r in reqs {
        out = out.with_requirement(&r.id, &r.expr, &r.text, r.origin)?;
    }
    Ok(out)
}

/// `IF g1 THEN target := v1; ELSIF g2 THEN ... [ELSE target := target;] END_IF`
/// as a requirement on the end-of-cycle value of `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecTemplate {
    /// A BOOL variable, or a bit selection of a WORD.
    pub target: Expr,
    pub cases: Vec<(Expr, bool)>,
    pub hold_else: bool,
}

fn old_of(target: &Expr) -> Option<Expr> {
    match &target.kind {
        ExprKind::Var(v) => Some(Expr::new(ExprKind::Old(v.clone()), target.loc)),
        ExprKind::BitSel(b, i) => Some(Expr::new(ExprKind::BitSel(Box::new(old_of(b)?), *i), target.loc)),
        ExprKind::Index(b, i) => Some(Expr::new(ExprKind::Index(Box::new(old_of(b)?), i.clone()), target.loc)),
        _ => None,
    }
}

fn conj(terms: Vec<Expr>) -> Expr {
    let mut it = terms.into_iter();
    match it.next() {
        None => Expr::bool(true),
        Some(first) => it.fold(first, Expr::and),
    }
}

fn disj(terms: Vec<Expr>) -> Expr {
    let mut it = terms.into_iter();
    match it.next() {
        None => Expr::bool(false),
        Some(first) => it.fold(first, Expr::or),
    }
}

/// The value `target` must have after the statement, in AND/OR/NOT form.
/// Cases assigning FALSE contribute no disjunct.
fn next_value(t: &SpecTemplate) -> Option<Expr> {
    let mut terms = Vec::new();
    for (i, (guard, value)) in t.cases.iter().enumerate() {
        if *value {
            let mut conds: Vec<Expr> = t.cases[..i].iter().map(|(g, _)| Expr::not(g.clone())).collect();
            conds.push(guard.clone());
            terms.push(conj(conds));
        }
    }
    if t.hold_else {
        let mut conds: Vec<Expr> = t.cases.iter().map(|(g, _)| Expr::not(g.clone())).collect();
        conds.push(old_of(&t.target)?);
        terms.push(conj(conds));
    }
    Some(disj(terms))
}

/// Compiles a template into a requirement expression. With `hold_else` the
/// result is `target = F` where `F` covers the hold branch through `old`;
/// without it, cycles where no guard fires are unconstrained.
pub fn compile_spec_template(t: &SpecTemplate, program: &TypedProgram) -> Result<Expr, Diagnostics> {
    let loc = t.target.loc;
    if t.cases.is_empty() {
        return Err(Diagnostic::at(DiagKind::Requirement, "template needs at least one guarded case", loc).into());
    }
    let target_ty = crate::ir::check_requirement_expr(program, &Expr::eq(t.target.clone(), t.target.clone()))
        .map(|te| match te.kind {
            crate::ir::TExprKind::Bin(_, l, _) => l.ty,
            _ => unreachable!(),
        })?;
    if target_ty != DataType::Bool {
        return Err(Diagnostic::at(
            DiagKind::Requirement,
            format!("template target must be BOOL or a WORD bit, found {target_ty}"),
            loc,
        )
        .into());
    }
    for (i, (g, _)) in t.cases.iter().enumerate() {
        check_requirement_expr(program, g).map_err(|d| {
            let first = d.first().clone();
            Diagnostics::from(Diagnostic::new(
                DiagKind::Requirement,
                format!("guard {} of the template: {}", i + 1, first.message),
                first.loc,
            ))
        })?;
    }
    let value = next_value(t).ok_or_else(|| {
        Diagnostics::from(Diagnostic::at(DiagKind::Requirement, "template target must be a variable", loc))
    })?;
    let eq = Expr::eq(t.target.clone(), value);
    if t.hold_else {
        Ok(eq)
    } else {
        let any = disj(t.cases.iter().map(|(g, _)| g.clone()).collect());
        Ok(Expr::or(Expr::not(any), eq))
    }
}

/// Parses a case value written as TRUE/FALSE/0/1.
pub fn case_value(e: &Expr) -> Option<bool> {
    match e.kind {
        ExprKind::Const(Literal::Bool(b)) => Some(b),
        ExprKind::Const(Literal::Int(0)) => Some(false),
        ExprKind::Const(Literal::Int(1)) => Some(true),
        _ => None,
    }
}

/// A requirement parametrised by the safety chain index. Every `{j}` in
/// `text` is replaced by the chain number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainTemplate {
    pub id: String,
    pub text: String,
    pub chains: usize,
}

pub const DEFAULT_CHAINS: usize = 16;

/// One closed requirement per chain, with ids `<id>_SC<j>`.
pub fn instantiate_chain_cases(t: &ChainTemplate, program: &TypedProgram) -> Result<Vec<Requirement>, Diagnostics> {
    let mut out = Vec::with_capacity(t.chains);
    for j in 0..t.chains {
        let text = t.text.replace("{j}", &j.to_string());
        let expr = parse_expression(&text, Loc::new(1, 1, 0))?;
        check_requirement_expr(program, &expr).map_err(|d| {
            Diagnostics(
                d.0.into_iter()
                    .map(|x| Diagnostic { message: format!("chain j={j}: {}", x.message), ..x })
                    .collect(),
            )
        })?;
        out.push(Requirement {
            id: format!("{}_SC{j}", t.id),
            text,
            expr,
            origin: RequirementOrigin::Template,
            point: None,
        });
    }
    Ok(out)
}
