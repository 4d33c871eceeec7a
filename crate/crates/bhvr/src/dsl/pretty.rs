//! Canonical printing. `parse(print(ast))` reproduces the same tree.

use super::ast::{Def, Expr, ExprKind, Literal, Program};

// Precedence levels, loosest first; primaries are PRIMARY.
const FALLBACK: u8 = 1;
const PARALLEL: u8 = 2;
const CHAIN: u8 = 3;
const PRIMARY: u8 = 4;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for def in &p.defs {
        out.push_str(&print_def(def));
        out.push('\n');
    }
    out
}

pub fn print_def(def: &Def) -> String {
    if def.params.is_empty() {
        format!("{} = {}", def.name, print_expr(&def.body))
    } else {
        format!(
            "{}({}) = {}",
            def.name,
            def.params.join(", "),
            print_expr(&def.body)
        )
    }
}

pub fn print_expr(e: &Expr) -> String {
    show(e, FALLBACK)
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Fallback(..) => FALLBACK,
        ExprKind::Parallel(..) => PARALLEL,
        ExprKind::Seq(..) | ExprKind::Bind { .. } => CHAIN,
        _ => PRIMARY,
    }
}

fn show(e: &Expr, min: u8) -> String {
    let rendered = render(e);
    if level(e) < min {
        format!("({rendered})")
    } else {
        rendered
    }
}

fn render(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Var(name) => name.clone(),
        ExprKind::Call { name, args } => {
            let args: Vec<String> = args.iter().map(|a| show(a, FALLBACK)).collect();
            format!("{name}({})", args.join(", "))
        }
        ExprKind::Fallback(a, b) => {
            format!("{} ? {}", show(a, FALLBACK), show(b, PARALLEL))
        }
        ExprKind::Parallel(a, b) => {
            format!("{} ||| {}", show(a, PARALLEL), show(b, CHAIN))
        }
        ExprKind::Seq(a, b) => format!("{}; {}", show(a, PRIMARY), show(b, CHAIN)),
        ExprKind::Bind { var, value, body } => {
            format!("{var} <- {}; {}", show(value, PRIMARY), show(body, CHAIN))
        }
        ExprKind::If {
            cond,
            then_branch,
            else_branch,
        } => format!(
            "if {} then {} else {}",
            show(cond, FALLBACK),
            show(then_branch, PRIMARY),
            show(else_branch, PRIMARY)
        ),
        ExprKind::RSelect { test, left, right } => format!(
            "rSelect({}, {}, {})",
            show(test, FALLBACK),
            show(left, FALLBACK),
            show(right, FALLBACK)
        ),
        ExprKind::Monitor {
            test,
            recovery,
            task,
        } => format!(
            "monitor({}, {}, {})",
            show(test, FALLBACK),
            show(recovery, FALLBACK),
            show(task, FALLBACK)
        ),
        ExprKind::Both(a, b) => {
            format!("both({}, {})", show(a, FALLBACK), show(b, FALLBACK))
        }
        ExprKind::Attempt { n, body } => format!("attempt({n}, {})", show(body, FALLBACK)),
        ExprKind::FallbackOver { list, func } => {
            format!("fallbackOver({}, {func})", show(list, FALLBACK))
        }
        ExprKind::Pure(lit) => match lit {
            Literal::Unit => "pure()".to_string(),
            Literal::Bool(b) => format!("pure({b})"),
            Literal::Int(n) => format!("pure({n})"),
        },
        ExprKind::Cmp { op, constant, arg } => {
            format!("cmp({}, {constant}, {})", op.symbol(), show(arg, FALLBACK))
        }
        ExprKind::Value(v) => format!("<value {v}>"),
    }
}
