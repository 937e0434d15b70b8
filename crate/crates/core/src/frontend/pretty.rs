// SPDX-License-Identifier: Apache-2.0

//! Pretty printer for the untyped tree. Output re-parses to an identical tree.

use std::fmt::Write;

use super::ast::*;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, f) in p.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_function(&mut out, f);
    }
    out
}

fn print_function(out: &mut String, f: &Function) {
    let ret = f.ret.map(|t| t.c_name()).unwrap_or("void");
    let params: Vec<String> = f
        .params
        .iter()
        .map(|p| {
            if p.is_array {
                format!("{}* {}", p.ty.c_name(), p.name)
            } else {
                format!("{} {}", p.ty.c_name(), p.name)
            }
        })
        .collect();
    let _ = writeln!(out, "{} {}({}) {{", ret, f.name, params.join(", "));
    for s in &f.body {
        print_stmt(out, s, 1);
    }
    out.push_str("}\n");
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn print_block(out: &mut String, body: &[Stmt], level: usize) {
    out.push_str("{\n");
    for s in body {
        print_stmt(out, s, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn print_stmt(out: &mut String, s: &Stmt, level: usize) {
    indent(out, level);
    match &s.kind {
        StmtKind::If { cond, then, els } => {
            let _ = write!(out, "if ({}) ", expr_str(cond));
            print_block(out, then, level);
            if let Some(e) = els {
                out.push_str(" else ");
                print_block(out, e, level);
            }
            out.push('\n');
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while ({}) ", expr_str(cond));
            print_block(out, body, level);
            out.push('\n');
        }
        StmtKind::For { init, cond, step, body } => {
            let i = init.as_ref().map(|s| simple_str(s)).unwrap_or_default();
            let c = cond.as_ref().map(expr_str).unwrap_or_default();
            let st = step.as_ref().map(|s| simple_str(s)).unwrap_or_default();
            let _ = write!(out, "for ({}; {}; {}) ", i, c, st);
            print_block(out, body, level);
            out.push('\n');
        }
        StmtKind::Block(b) => {
            print_block(out, b, level);
            out.push('\n');
        }
        StmtKind::Return(v) => {
            match v {
                Some(e) => {
                    let _ = write!(out, "return {};", expr_str(e));
                }
                None => out.push_str("return;"),
            }
            out.push('\n');
        }
        _ => {
            out.push_str(&simple_str(s));
            out.push_str(";\n");
        }
    }
}

/// Declarations, assignments, inc/dec, and call statements without the trailing `;`.
fn simple_str(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Decl { name, ty, array_len, init } => {
            let mut t = format!("{} {}", ty.c_name(), name);
            if let Some(n) = array_len {
                let _ = write!(t, "[{}]", expr_str(n));
            }
            match init {
                Some(Init::Scalar(e)) => {
                    let _ = write!(t, " = {}", expr_str(e));
                }
                Some(Init::List(items)) => {
                    let items: Vec<String> = items.iter().map(expr_str).collect();
                    let _ = write!(t, " = {{{}}}", items.join(", "));
                }
                None => {}
            }
            t
        }
        StmtKind::Assign { target, op, value } => {
            let sym = op.map(|o| format!("{}=", o.symbol())).unwrap_or("=".into());
            format!("{} {} {}", lvalue_str(target), sym, expr_str(value))
        }
        StmtKind::IncDec { target, inc } => {
            format!("{}{}", lvalue_str(target), if *inc { "++" } else { "--" })
        }
        StmtKind::Expr(e) => expr_str(e),
        other => panic!("not a simple statement: {other:?}"),
    }
}

fn lvalue_str(l: &LValue) -> String {
    match l {
        LValue::Var(n) => n.clone(),
        LValue::Index(n, i) => format!("{}[{}]", n, expr_str(i)),
    }
}

pub fn expr_str(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(lit) => {
            let mut s = if lit.hex {
                format!("0x{:x}", lit.value)
            } else {
                lit.value.to_string()
            };
            if lit.unsigned {
                s.push('u');
            }
            if lit.long {
                s.push('l');
            }
            s
        }
        ExprKind::Var(n) => n.clone(),
        ExprKind::Index(n, i) => format!("{}[{}]", n, expr_str(i)),
        ExprKind::Unary(op, x) => format!("({}{})", op.symbol(), expr_str(x)),
        ExprKind::Binary(op, l, r) => format!("({} {} {})", expr_str(l), op.symbol(), expr_str(r)),
        ExprKind::Ternary(c, a, b) => {
            format!("({} ? {} : {})", expr_str(c), expr_str(a), expr_str(b))
        }
        ExprKind::Call(n, args) => {
            let a: Vec<String> = args.iter().map(expr_str).collect();
            format!("{}({})", n, a.join(", "))
        }
        ExprKind::Cast(t, x) => format!("(({}){})", t.c_name(), expr_str(x)),
    }
}
