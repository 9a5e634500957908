use std::fmt::Write;

use super::is_plain_ident;
use crate::ir::{Expr, ExprKind, Literal, Pou, PouKind, Program, Section, Stmt, StmtKind};

fn ident(name: &str) -> String {
    if is_plain_ident(name) {
        name.to_string()
    } else {
        format!("\"{name}\"")
    }
}

/// Renders an expression with every binary operation parenthesised.
pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Const(Literal::Bool(true)) => "TRUE".into(),
        ExprKind::Const(Literal::Bool(false)) => "FALSE".into(),
        ExprKind::Const(Literal::Int(n)) => n.to_string(),
        ExprKind::Const(Literal::Word(w)) => format!("16#{w:04X}"),
        ExprKind::Var(v) => ident(v),
        ExprKind::Index(b, i) => format!("{}[{}]", print_expr(b), i),
        ExprKind::BitSel(b, bit) => format!("{}.%X{}", print_expr(b), bit),
        ExprKind::Not(x) => format!("NOT {}", atom(x)),
        ExprKind::Binary(op, l, r) => format!("({} {} {})", print_expr(l), op.symbol(), print_expr(r)),
        ExprKind::Old(v) => format!("OLD({})", ident(v)),
    }
}

fn atom(e: &Expr) -> String {
    match e.kind {
        ExprKind::Not(_) => format!("({})", print_expr(e)),
        _ => print_expr(e),
    }
}

/// Canonical source text for a program. Reparsing the result yields a
/// structurally identical program.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (n, pou) in p.pous.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        print_pou(p, pou, &mut out);
    }
    out
}

fn print_pou(p: &Program, pou: &Pou, out: &mut String) {
    match pou.kind {
        PouKind::Fc => writeln!(out, "FUNCTION {} : VOID", ident(&pou.name)).unwrap(),
        PouKind::Fb => writeln!(out, "FUNCTION_BLOCK {}", ident(&pou.name)).unwrap(),
    }
    // consecutive declarations of one section share a block, keeping order
    let mut current: Option<Section> = None;
    for d in &pou.decls {
        if current != Some(d.section) {
            if current.is_some() {
                out.push_str("END_VAR\n");
            }
            writeln!(out, "{}", d.section.keyword()).unwrap();
            current = Some(d.section);
        }
        write!(out, "  {} : {}", ident(&d.name), d.dtype).unwrap();
        if let Some(init) = &d.init {
            write!(out, " := {}", print_expr(init)).unwrap();
        }
        out.push_str(";\n");
    }
    if current.is_some() {
        out.push_str("END_VAR\n");
    }
    print_block(p, &pou.body, 1, out);
    out.push_str(match pou.kind {
        PouKind::Fc => "END_FUNCTION\n",
        PouKind::Fb => "END_FUNCTION_BLOCK\n",
    });
}

fn print_block(p: &Program, body: &[Stmt], depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    for s in body {
        match &s.kind {
            StmtKind::Assign { target, value } => {
                writeln!(out, "{pad}{} := {};", print_expr(target), print_expr(value)).unwrap()
            }
            StmtKind::If { branches, else_body } => {
                for (i, (c, b)) in branches.iter().enumerate() {
                    let kw = if i == 0 { "IF" } else { "ELSIF" };
                    writeln!(out, "{pad}{kw} {} THEN", print_expr(c)).unwrap();
                    print_block(p, b, depth + 1, out);
                }
                if !else_body.is_empty() {
                    writeln!(out, "{pad}ELSE").unwrap();
                    print_block(p, else_body, depth + 1, out);
                }
                writeln!(out, "{pad}END_IF;").unwrap();
            }
            StmtKind::For { var, lo, hi, body } => {
                writeln!(out, "{pad}FOR {} := {} TO {} DO", ident(var), print_expr(lo), print_expr(hi)).unwrap();
                print_block(p, body, depth + 1, out);
                writeln!(out, "{pad}END_FOR;").unwrap();
            }
            StmtKind::Call { callee, inputs, outputs } => {
                let mut args: Vec<String> =
                    inputs.iter().map(|(n, e)| format!("{} := {}", ident(n), print_expr(e))).collect();
                args.extend(outputs.iter().map(|(n, e)| format!("{} => {}", ident(n), print_expr(e))));
                writeln!(out, "{pad}{}({});", ident(callee), args.join(", ")).unwrap();
            }
            StmtKind::Assert(id) => {
                let text = p
                    .assertions
                    .iter()
                    .find(|a| &a.id == id)
                    .map(|a| print_expr(&a.expr))
                    .unwrap_or_else(|| "TRUE".into());
                writeln!(out, "{pad}//#ASSERT {text};").unwrap();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::il::{parse_expression, parse_program, SourceFile};
    use crate::diag::Loc;

    #[test]
    fn precedence_is_made_explicit() {
        let e = parse_expression("a OR b AND NOT c = d", Loc::new(1, 1, 0)).unwrap();
        assert_eq!(print_expr(&e), "(a OR (b AND (NOT c = d)))");
    }

    #[test]
    fn round_trip_keeps_shape() {
        let src = "FUNCTION_BLOCK \"SIF-2\"
VAR_INPUT a : WORD; b : BOOL; END_VAR
VAR q : ARRAY[-1..1] OF BOOL; END_VAR
IF b THEN q[0] := a.%X3; //#ASSERT OLD(b) OR NOT b;
ELSE q[-1] := NOT NOT b; END_IF
//#ASSERT (a AND 16#00FF) <> 16#0100;
END_FUNCTION_BLOCK";
        let p = parse_program(&SourceFile::new("x", src)).unwrap();
        let text = print_program(&p);
        let q = parse_program(&SourceFile::new("y", &text)).unwrap();
        assert!(p.same_shape(&q), "{text}");
    }
}
