//! Source rendering for the recognized AST subset.
//!
//! Output re-parses to a structurally identical tree.

use std::fmt::{self, Write as _};

use super::ast::{Expr, Stmt, StmtKind};

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_EQ: u8 = 3;
const PREC_OPAQUE: u8 = 4;
const PREC_POSTFIX: u8 = 10;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Or(..) => PREC_OR,
        Expr::And(..) => PREC_AND,
        Expr::Eq(..) | Expr::Neq(..) => PREC_EQ,
        Expr::Opaque(_) => PREC_OPAQUE,
        _ => PREC_POSTFIX,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if precedence(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_binary(f: &mut fmt::Formatter<'_>, prec: u8, op: &str, l: &Expr, r: &Expr) -> fmt::Result {
    write_child(f, l, prec)?;
    write!(f, " {op} ")?;
    write_child(f, r, prec + 1)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::MsgSender => f.write_str("msg.sender"),
            Expr::Identifier(name) => f.write_str(name),
            Expr::Literal(text) | Expr::Opaque(text) => f.write_str(text),
            Expr::Member(base, field) => {
                write_child(f, base, PREC_POSTFIX)?;
                write!(f, ".{field}")
            }
            Expr::Index(base, index) => {
                write_child(f, base, PREC_POSTFIX)?;
                write!(f, "[{index}]")
            }
            Expr::Eq(l, r) => write_binary(f, PREC_EQ, "==", l, r),
            Expr::Neq(l, r) => write_binary(f, PREC_EQ, "!=", l, r),
            Expr::And(l, r) => write_binary(f, PREC_AND, "&&", l, r),
            Expr::Or(l, r) => write_binary(f, PREC_OR, "||", l, r),
            Expr::AddressCast(inner) => write!(f, "address({inner})"),
            Expr::CallExpr {
                callee,
                options,
                args,
            } => {
                write_child(f, callee, PREC_POSTFIX)?;
                if !options.is_empty() {
                    f.write_char('{')?;
                    for (i, o) in options.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{}: {}", o.name, o.value)?;
                    }
                    f.write_char('}')?;
                }
                f.write_char('(')?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_char(')')
            }
        }
    }
}

/// Render statements one per line with four-space indentation.
pub fn render_stmts(stmts: &[Stmt], indent: usize) -> String {
    let mut out = String::new();
    for s in stmts {
        render_stmt_into(&mut out, s, indent);
    }
    out
}

pub fn render_stmt(stmt: &Stmt) -> String {
    let mut out = String::new();
    render_stmt_into(&mut out, stmt, 0);
    out.trim_end().to_string()
}

fn render_stmt_into(out: &mut String, stmt: &Stmt, indent: usize) {
    let pad = "    ".repeat(indent);
    let _ = match &stmt.kind {
        StmtKind::Require(c) => writeln!(out, "{pad}require({c});"),
        StmtKind::Assign {
            lvalue,
            rvalue,
            compound,
        } => writeln!(
            out,
            "{pad}{lvalue} {} {rvalue};",
            if *compound { "+=" } else { "=" }
        ),
        StmtKind::Call(e) => writeln!(out, "{pad}{e};"),
        StmtKind::Revert => writeln!(out, "{pad}revert();"),
        StmtKind::Return(None) => writeln!(out, "{pad}return;"),
        StmtKind::Return(Some(e)) => writeln!(out, "{pad}return {e};"),
        StmtKind::Placeholder => writeln!(out, "{pad}_;"),
        StmtKind::Opaque(text) => writeln!(out, "{pad}{text}"),
        StmtKind::If {
            condition,
            then_body,
            else_body,
        } => {
            let _ = writeln!(out, "{pad}if ({condition}) {{");
            out.push_str(&render_stmts(then_body, indent + 1));
            if else_body.is_empty() {
                writeln!(out, "{pad}}}")
            } else {
                let _ = writeln!(out, "{pad}}} else {{");
                out.push_str(&render_stmts(else_body, indent + 1));
                writeln!(out, "{pad}}}")
            }
        }
    };
}
