use std::collections::HashSet;

use super::lexer::{lex, Kw, Tok, Token};
use crate::diag::{DiagKind, Diagnostic, Diagnostics, Loc};
use crate::ir::{
    AssertionComment, DataType, Expr, ExprKind, IndexExpr, Literal, Pou, PouKind, Program,
    ProgramPoint, Section, Stmt, StmtKind, VarDecl,
};

/// A textual source file with its path (for messages only).
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        SourceFile { path: path.into(), text: text.into() }
    }
}

/// Parses a `.il` source into a [`Program`]. Inline `//#ASSERT` comments
/// become `Assert` statements at the position they precede.
pub fn parse_program(src: &SourceFile) -> Result<Program, Diagnostics> {
    let tokens = lex(&src.text, Loc::new(1, 1, 0)).map_err(Diagnostics::single)?;
    let mut p = Parser::new(tokens);
    let program = p.program().map_err(Diagnostics::single)?;
    Ok(program)
}

/// Returns the inline assertions of a source with their program points.
pub fn extract_assertions(src: &SourceFile) -> Result<Vec<(AssertionComment, ProgramPoint)>, Diagnostics> {
    let program = parse_program(src)?;
    Ok(program.assertions.into_iter().map(|a| {
        let point = a.point.clone();
        (a, point)
    }).collect())
}

/// Parses a standalone expression (assertion body, manifest requirement).
/// `base` is the location of the first character of `text`.
pub fn parse_expression(text: &str, base: Loc) -> Result<Expr, Diagnostics> {
    let tokens = lex(text, base).map_err(Diagnostics::single)?;
    let mut p = Parser::new(tokens);
    let e = p.expr().map_err(Diagnostics::single)?;
    if !matches!(p.peek().tok, Tok::Eof) {
        return Err(p.unexpected(&["end of expression"]).into());
    }
    if !p.pending.is_empty() {
        return Err(Diagnostic::at(DiagKind::Syntax, "nested assertion comment", p.pending[0].loc).into());
    }
    Ok(e)
}

struct PendingAssert {
    text: String,
    text_loc: Loc,
    loc: Loc,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    pending: Vec<PendingAssert>,
    assertions: Vec<AssertionComment>,
    current_pou: String,
    assert_counter: usize,
}

const STMT_END: &[&str] = &["END_IF", "ELSIF", "ELSE", "END_FOR", "END_FUNCTION", "END_FUNCTION_BLOCK"];

impl Parser {
    fn new(tokens: Vec<Token>) -> Self {
        Parser { tokens, pos: 0, pending: Vec::new(), assertions: Vec::new(), current_pou: String::new(), assert_counter: 0 }
    }

    fn skip_asserts(&mut self) {
        while let Tok::Assert { text, text_loc } = &self.tokens[self.pos].tok {
            self.pending.push(PendingAssert { text: text.clone(), text_loc: *text_loc, loc: self.tokens[self.pos].loc });
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> &Token {
        self.skip_asserts();
        &self.tokens[self.pos]
    }

    fn peek2(&mut self) -> &Tok {
        self.skip_asserts();
        let mut i = self.pos + 1;
        while i < self.tokens.len() && matches!(self.tokens[i].tok, Tok::Assert { .. }) {
            i += 1;
        }
        &self.tokens[i.min(self.tokens.len() - 1)].tok
    }

    fn next(&mut self) -> Token {
        self.skip_asserts();
        let t = self.tokens[self.pos].clone();
        if !matches!(t.tok, Tok::Eof) {
            self.pos += 1;
        }
        t
    }

    fn at_kw(&mut self, k: Kw) -> bool {
        self.peek().tok == Tok::Kw(k)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if &self.peek().tok == t {
            self.next();
            true
        } else {
            false
        }
    }

    fn unexpected(&mut self, expected: &[&str]) -> Diagnostic {
        let t = self.peek().clone();
        let msg = match &t.tok {
            Tok::Unsupported(op) => format!("operator `{op}` is not supported (only Boolean and bitwise operators are)"),
            other => format!("unexpected {}", other.describe()),
        };
        Diagnostic::at(DiagKind::Syntax, msg, t.loc).with_expected(expected.iter().map(|s| s.to_string()).collect())
    }

    fn expect(&mut self, t: Tok, name: &str) -> Result<Token, Diagnostic> {
        if self.peek().tok == t {
            Ok(self.next())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn expect_kw(&mut self, k: Kw) -> Result<Token, Diagnostic> {
        self.expect(Tok::Kw(k), k.text())
    }

    fn ident(&mut self) -> Result<(String, Loc), Diagnostic> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.next();
                Ok((s, t.loc))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn program(&mut self) -> Result<Program, Diagnostic> {
        let mut pous: Vec<Pou> = Vec::new();
        loop {
            let t = self.peek().clone();
            match t.tok {
                Tok::Eof => break,
                Tok::Kw(Kw::Function) | Tok::Kw(Kw::FunctionBlock) => {
                    let pou = self.pou()?;
                    if pous.iter().any(|p| p.name == pou.name) {
                        return Err(Diagnostic::at(
                            DiagKind::Declaration,
                            format!("duplicate declaration of POU `{}`", pou.name),
                            pou.loc,
                        ));
                    }
                    pous.push(pou);
                }
                _ => return Err(self.unexpected(&["FUNCTION", "FUNCTION_BLOCK"])),
            }
            if let Some(a) = self.pending.first() {
                return Err(Diagnostic::at(DiagKind::Syntax, "assertion comment outside a POU body", a.loc));
            }
        }
        if let Some(a) = self.pending.first() {
            return Err(Diagnostic::at(DiagKind::Syntax, "assertion comment outside a POU body", a.loc));
        }
        if pous.is_empty() {
            return Err(Diagnostic::at(DiagKind::Syntax, "no POU found", self.peek().loc));
        }
        Ok(Program { pous, assertions: std::mem::take(&mut self.assertions), entry: None })
    }

    fn pou(&mut self) -> Result<Pou, Diagnostic> {
        let head = self.next();
        let kind = if head.tok == Tok::Kw(Kw::Function) { PouKind::Fc } else { PouKind::Fb };
        let (name, _) = self.ident()?;
        if kind == PouKind::Fc && self.eat(&Tok::Colon) {
            if !self.at_kw(Kw::Void) {
                return Err(Diagnostic::at(
                    DiagKind::Syntax,
                    "function return values are not supported; declare a VAR_OUTPUT instead",
                    self.peek().loc,
                )
                .with_expected(vec!["VOID".into()]));
            }
            self.next();
        }
        self.current_pou = name.clone();
        self.assert_counter = 0;
        if let Some(a) = self.pending.first() {
            return Err(Diagnostic::at(DiagKind::Syntax, "assertion comment outside a POU body", a.loc));
        }
        let mut decls: Vec<VarDecl> = Vec::new();
        let mut seen = HashSet::new();
        while let Some(section) = self.section_kw() {
            self.next();
            while !self.at_kw(Kw::EndVar) {
                for d in self.decl(section)? {
                    if !seen.insert(d.name.clone()) {
                        return Err(Diagnostic::at(
                            DiagKind::Declaration,
                            format!("duplicate declaration of `{}`", d.name),
                            d.loc,
                        ));
                    }
                    decls.push(d);
                }
            }
            self.expect_kw(Kw::EndVar)?;
        }
        self.eat(&Tok::Kw(Kw::Begin));
        let end = if kind == PouKind::Fc { Kw::EndFunction } else { Kw::EndFunctionBlock };
        let body = self.stmt_list(None)?;
        self.expect_kw(end)?;
        self.eat(&Tok::Semi);
        Ok(Pou { name, kind, decls, body, loc: head.loc })
    }

    fn section_kw(&mut self) -> Option<Section> {
        match self.peek().tok {
            Tok::Kw(Kw::VarInput) => Some(Section::Input),
            Tok::Kw(Kw::VarOutput) => Some(Section::Output),
            Tok::Kw(Kw::VarInOut) => Some(Section::InOut),
            Tok::Kw(Kw::Var) => Some(Section::Static),
            Tok::Kw(Kw::VarTemp) => Some(Section::Temp),
            Tok::Kw(Kw::VarConfig) => Some(Section::Config),
            _ => None,
        }
    }

    fn decl(&mut self, section: Section) -> Result<Vec<VarDecl>, Diagnostic> {
        let mut names = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            names.push(self.ident()?);
        }
        self.expect(Tok::Colon, "`:`")?;
        let dtype = self.dtype()?;
        let init = if self.eat(&Tok::Assign) { Some(self.literal()?) } else { None };
        self.expect(Tok::Semi, "`;`")?;
        Ok(names
            .into_iter()
            .map(|(name, loc)| VarDecl { name, dtype: dtype.clone(), section, init: init.clone(), loc })
            .collect())
    }

    fn dtype(&mut self) -> Result<DataType, Diagnostic> {
        let t = self.next();
        match t.tok {
            Tok::Kw(Kw::Bool) => Ok(DataType::Bool),
            Tok::Kw(Kw::Word) => Ok(DataType::Word),
            Tok::Kw(Kw::Array) => {
                self.expect(Tok::LBracket, "`[`")?;
                let lo = self.signed_int()?;
                self.expect(Tok::DotDot, "`..`")?;
                let hi = self.signed_int()?;
                self.expect(Tok::RBracket, "`]`")?;
                self.expect_kw(Kw::Of)?;
                let elem = self.dtype()?;
                if lo > hi {
                    return Err(Diagnostic::at(DiagKind::Declaration, format!("array bounds {lo}..{hi} are empty"), t.loc));
                }
                Ok(DataType::array(elem, lo, hi))
            }
            _ => {
                self.pos -= 1;
                Err(self.unexpected(&["BOOL", "WORD", "ARRAY"]))
            }
        }
    }

    fn signed_int(&mut self) -> Result<i64, Diagnostic> {
        let neg = self.eat(&Tok::Unsupported("-"));
        match self.peek().tok {
            Tok::Int(n) => {
                self.next();
                let n = n as i64;
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn literal(&mut self) -> Result<Expr, Diagnostic> {
        let t = self.peek().clone();
        let lit = match t.tok {
            Tok::Kw(Kw::True) => Literal::Bool(true),
            Tok::Kw(Kw::False) => Literal::Bool(false),
            Tok::Int(n) => Literal::Int(n),
            Tok::Based(w) => Literal::Word(w),
            _ => return Err(self.unexpected(&["literal"])),
        };
        self.next();
        Ok(Expr::new(ExprKind::Const(lit), t.loc))
    }

    /// Parses statements until a block terminator. `block_end` is `None` for
    /// a POU body.
    fn stmt_list(&mut self, nested: Option<()>) -> Result<Vec<Stmt>, Diagnostic> {
        let mut body = Vec::new();
        let mut unresolved: Vec<usize> = Vec::new();
        loop {
            self.skip_asserts();
            for a in std::mem::take(&mut self.pending) {
                self.assert_counter += 1;
                let id = format!("{}.A{}", self.current_pou, self.assert_counter);
                let expr = parse_expression(&a.text, a.text_loc).map_err(|d| d.0.into_iter().next().unwrap())?;
                self.assertions.push(AssertionComment {
                    id: id.clone(),
                    text: a.text.trim().to_string(),
                    expr,
                    loc: a.loc,
                    point: ProgramPoint::BodyEnd { pou: self.current_pou.clone() },
                });
                unresolved.push(self.assertions.len() - 1);
                body.push(Stmt::new(StmtKind::Assert(id), a.loc));
            }
            let t = self.peek().clone();
            let terminator = match &t.tok {
                Tok::Eof => true,
                Tok::Kw(k) => STMT_END.contains(&k.text()),
                _ => false,
            };
            if terminator {
                for i in unresolved.drain(..) {
                    self.assertions[i].point = match nested {
                        None => ProgramPoint::BodyEnd { pou: self.current_pou.clone() },
                        Some(()) => ProgramPoint::BlockEnd { pou: self.current_pou.clone(), line: t.loc.line },
                    };
                }
                return Ok(body);
            }
            if self.eat(&Tok::Semi) {
                continue;
            }
            let stmt = self.stmt()?;
            for i in unresolved.drain(..) {
                self.assertions[i].point = ProgramPoint::BeforeStmt { pou: self.current_pou.clone(), line: stmt.loc.line };
            }
            body.push(stmt);
        }
    }

    fn stmt(&mut self) -> Result<Stmt, Diagnostic> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Kw(Kw::If) => {
                self.next();
                let mut branches = Vec::new();
                let cond = self.expr()?;
                self.expect_kw(Kw::Then)?;
                let body = self.stmt_list(Some(()))?;
                branches.push((cond, body));
                let mut else_body = Vec::new();
                loop {
                    if self.eat(&Tok::Kw(Kw::Elsif)) {
                        let c = self.expr()?;
                        self.expect_kw(Kw::Then)?;
                        let b = self.stmt_list(Some(()))?;
                        branches.push((c, b));
                    } else if self.eat(&Tok::Kw(Kw::Else)) {
                        else_body = self.stmt_list(Some(()))?;
                        if !self.at_kw(Kw::EndIf) {
                            return Err(self.unexpected(&["END_IF"]));
                        }
                    } else if self.at_kw(Kw::EndIf) {
                        self.next();
                        break;
                    } else {
                        return Err(self.unexpected(&["ELSIF", "ELSE", "END_IF"]));
                    }
                }
                self.eat(&Tok::Semi);
                Ok(Stmt::new(StmtKind::If { branches, else_body }, t.loc))
            }
            Tok::Kw(Kw::For) => {
                self.next();
                let (var, _) = self.ident()?;
                self.expect(Tok::Assign, "`:=`")?;
                let lo = self.expr()?;
                self.expect_kw(Kw::To)?;
                let hi = self.expr()?;
                self.expect_kw(Kw::Do)?;
                let body = self.stmt_list(Some(()))?;
                self.expect_kw(Kw::EndFor)?;
                self.eat(&Tok::Semi);
                Ok(Stmt::new(StmtKind::For { var, lo, hi, body }, t.loc))
            }
            Tok::Ident(_) | Tok::Quoted(_) if *self.peek2() == Tok::LParen => {
                let (callee, _) = self.ident()?;
                self.next();
                let mut inputs = Vec::new();
                let mut outputs = Vec::new();
                if !self.eat(&Tok::RParen) {
                    loop {
                        let (param, _) = self.ident()?;
                        if self.eat(&Tok::Assign) {
                            inputs.push((param, self.expr()?));
                        } else if self.eat(&Tok::Arrow) {
                            outputs.push((param, self.postfix()?));
                        } else {
                            return Err(self.unexpected(&["`:=`", "`=>`"]));
                        }
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(Tok::Comma, "`,`")?;
                    }
                }
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt::new(StmtKind::Call { callee, inputs, outputs }, t.loc))
            }
            Tok::Ident(_) | Tok::Quoted(_) => {
                let target = self.postfix()?;
                self.expect(Tok::Assign, "`:=`")?;
                let value = self.expr()?;
                self.expect(Tok::Semi, "`;`")?;
                Ok(Stmt::new(StmtKind::Assign { target, value }, t.loc))
            }
            _ => Err(self.unexpected(&["statement"])),
        }
    }

    fn expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut l = self.xor_expr()?;
        while self.at_kw(Kw::Or) {
            self.next();
            let r = self.xor_expr()?;
            l = Expr::or(l, r);
        }
        Ok(l)
    }

    fn xor_expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut l = self.and_expr()?;
        while self.at_kw(Kw::Xor) {
            self.next();
            let r = self.and_expr()?;
            l = Expr::binary(crate::ir::BinOp::Xor, l, r);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut l = self.cmp_expr()?;
        while self.at_kw(Kw::And) || self.peek().tok == Tok::Amp {
            self.next();
            let r = self.cmp_expr()?;
            l = Expr::and(l, r);
        }
        Ok(l)
    }

    fn cmp_expr(&mut self) -> Result<Expr, Diagnostic> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Eq => crate::ir::BinOp::Eq,
                Tok::Neq => crate::ir::BinOp::Neq,
                Tok::Unsupported(_) => return Err(self.unexpected(&[])),
                _ => return Ok(l),
            };
            self.next();
            let r = self.unary()?;
            l = Expr::binary(op, l, r);
        }
    }

    fn unary(&mut self) -> Result<Expr, Diagnostic> {
        if self.at_kw(Kw::Not) {
            let t = self.next();
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Not(Box::new(inner)), t.loc));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, Diagnostic> {
        let mut e = self.primary()?;
        loop {
            match self.peek().tok {
                Tok::LBracket => {
                    let t = self.next();
                    let idx = match self.peek().tok.clone() {
                        Tok::Int(n) => IndexExpr::Const(n as i64),
                        Tok::Unsupported("-") => {
                            self.next();
                            match self.peek().tok {
                                Tok::Int(n) => IndexExpr::Const(-(n as i64)),
                                _ => return Err(self.unexpected(&["integer"])),
                            }
                        }
                        Tok::Ident(v) | Tok::Quoted(v) => IndexExpr::LoopVar(v),
                        _ => return Err(self.unexpected(&["integer", "loop variable"])),
                    };
                    self.next();
                    self.expect(Tok::RBracket, "`]`")?;
                    e = Expr::new(ExprKind::Index(Box::new(e), idx), t.loc);
                }
                Tok::Dot => {
                    self.next();
                    let t = self.peek().clone();
                    let Tok::BitSel(b) = t.tok else {
                        return Err(self.unexpected(&["%X<bit>"]));
                    };
                    self.next();
                    e = Expr::new(ExprKind::BitSel(Box::new(e), b), t.loc);
                }
                _ => return Ok(e),
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, Diagnostic> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Kw(Kw::True) | Tok::Kw(Kw::False) | Tok::Int(_) | Tok::Based(_) => self.literal(),
            Tok::Ident(s) | Tok::Quoted(s) => {
                self.next();
                Ok(Expr::new(ExprKind::Var(s), t.loc))
            }
            Tok::Kw(Kw::Old) => {
                self.next();
                self.expect(Tok::LParen, "`(`")?;
                let (name, _) = self.ident()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::new(ExprKind::Old(name), t.loc))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.unexpected(&["expression"])),
        }
    }
}
