//! Canonical pretty-printer: `parse_program(print_program(p))` is `p`.

use std::fmt;

use crate::syntax::ast::*;

/// Precedence levels used to decide parenthesization.
fn level(expr: &Expr) -> u8 {
    match expr {
        Expr::Cmp(..) => 0,
        Expr::Arith(..) => 1,
        Expr::Proj(..) => 2,
        Expr::Var(_) | Expr::Const(_) | Expr::Tuple(_) | Expr::Builtin(..) => 3,
    }
}

fn fmt_expr(expr: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if level(expr) < min {
        write!(f, "(")?;
        fmt_expr(expr, 0, f)?;
        return write!(f, ")");
    }
    match expr {
        Expr::Var(name) => write!(f, "{name}"),
        Expr::Const(value) => {
            use crate::model::Value;
            match value {
                // single-constraint patterns print in brace form here: the
                // call form would read back as a builtin application
                Value::Pattern(p) if p.len() == 1 => {
                    let (field, v) = p.constraints().next().unwrap();
                    write!(f, "{{{}: {}}}", field.name(), v)
                }
                other => write!(f, "{other}"),
            }
        }
        Expr::Tuple(items) => {
            write!(f, "(")?;
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_expr(item, 0, f)?;
            }
            write!(f, ")")
        }
        Expr::Proj(index, base) => {
            // number-like literals must not merge with the `.N` suffix
            if matches!(**base, Expr::Const(_)) {
                write!(f, "(")?;
                fmt_expr(base, 0, f)?;
                write!(f, ")")?;
            } else {
                fmt_expr(base, 2, f)?;
            }
            write!(f, ".{index}")
        }
        Expr::Builtin(builtin, args) => {
            write!(f, "{}(", builtin.name())?;
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_expr(arg, 0, f)?;
            }
            write!(f, ")")
        }
        Expr::Cmp(op, lhs, rhs) => {
            fmt_expr(lhs, 1, f)?;
            write!(f, " {} ", op.symbol())?;
            fmt_expr(rhs, 1, f)
        }
        Expr::Arith(op, lhs, rhs) => {
            fmt_expr(lhs, 1, f)?;
            write!(f, " {} ", op.symbol())?;
            fmt_expr(rhs, 2, f)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, 0, f)
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\\{} -> {}", self.param, self.body)
    }
}

impl fmt::Display for EventTransformer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventTransformer::Lift(x, l) => write!(f, "Lift({x}, {l})"),
            EventTransformer::ApplyLft(x, l) => write!(f, "ApplyLft({x}, {l})"),
            EventTransformer::ApplyRit(x, l) => write!(f, "ApplyRit({x}, {l})"),
            EventTransformer::Merge(x1, x2) => write!(f, "Merge({x1}, {x2})"),
            EventTransformer::MixFst(set, x1, x2) => write!(f, "MixFst({set}, {x1}, {x2})"),
            EventTransformer::MixSnd(set, x1, x2) => write!(f, "MixSnd({set}, {x1}, {x2})"),
            EventTransformer::Filter(x, l) => write!(f, "Filter({x}, {l})"),
            EventTransformer::Once(x, n) => write!(f, "Once({x}, {n})"),
            EventTransformer::MakForwRule(x) => write!(f, "MakForwRule({x})"),
            EventTransformer::MakeRule(x) => write!(f, "MakeRule({x})"),
        }
    }
}

impl fmt::Display for Stmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stmt::Assign(x, et) => write!(f, "{x} := {et}"),
            Stmt::Seq(a, b) => write!(f, "{a}; {b}"),
            Stmt::AddRules(x) => write!(f, "AddRules({x})"),
            Stmt::Register => write!(f, "Register"),
            Stmt::Send(x) => write!(f, "Send({x})"),
        }
    }
}

impl fmt::Display for QueryName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Emits canonical source: one definition per line, the `>>` separator, then
/// one statement per line. No trailing newline.
pub fn print_program(program: &Program) -> String {
    let mut lines = Vec::new();
    for (var, query) in &program.defs {
        lines.push(format!("{var} := {query};"));
    }
    lines.push(">>".to_string());
    for stmt in program.body.atoms() {
        lines.push(format!("{stmt};"));
    }
    lines.join("\n")
}
