//! Call-by-value evaluation of lambda bodies. Pure with respect to the
//! variable state and the fabric view.

use crate::error::EvalError;
use crate::fabric::{builtin_port, builtin_switch, FabricView};
use crate::model::{lenient_type, unify, Binding, Value, VarState};
use crate::syntax::ast::{ArithOp, Builtin, CmpOp, Expr};

/// Evaluates `expr` with one bound variable (the lambda parameter) plus the
/// program variables in `gamma`. The bound variable shadows `gamma`.
pub fn eval_expr(
    expr: &Expr,
    bound: (&str, &Value),
    gamma: &VarState,
    view: &FabricView,
) -> Result<Value, EvalError> {
    match expr {
        Expr::Var(name) => {
            if name == bound.0 {
                return Ok(bound.1.clone());
            }
            match gamma.get(name) {
                Some(Binding::Rules(rl)) => Ok(Value::Rules(rl.clone())),
                Some(binding) => Err(EvalError::BindingKind {
                    var: name.clone(),
                    found: binding.kind(),
                    expected: "a value",
                }),
                None => Err(EvalError::UnboundVariable(name.clone())),
            }
        }
        Expr::Const(value) => Ok(value.clone()),
        Expr::Tuple(items) => {
            let values = items
                .iter()
                .map(|e| eval_expr(e, bound, gamma, view))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(form_tuple(values))
        }
        Expr::Proj(index, base) => match eval_expr(base, bound, gamma, view)? {
            Value::Tuple(items) => items
                .get(*index)
                .cloned()
                .ok_or(EvalError::TupleIndex { index: *index, arity: items.len() }),
            other => Err(EvalError::TypeMismatch {
                expected: "a tuple".to_string(),
                found: other.to_string(),
            }),
        },
        Expr::Builtin(builtin, args) => eval_builtin(*builtin, args, bound, gamma, view),
        Expr::Cmp(op, lhs, rhs) => {
            let l = eval_expr(lhs, bound, gamma, view)?;
            let r = eval_expr(rhs, bound, gamma, view)?;
            eval_cmp(*op, &l, &r)
        }
        Expr::Arith(op, lhs, rhs) => {
            let l = eval_expr(lhs, bound, gamma, view)?;
            let r = eval_expr(rhs, bound, gamma, view)?;
            match (l, r) {
                (Value::Nat(a), Value::Nat(b)) => match op {
                    ArithOp::Add => Ok(Value::Nat(a.wrapping_add(b))),
                    ArithOp::Sub => a.checked_sub(b).map(Value::Nat).ok_or(EvalError::NatUnderflow),
                },
                (l, r) => Err(EvalError::TypeMismatch {
                    expected: "numbers on both sides of arithmetic".to_string(),
                    found: format!("{l} {} {r}", op.symbol()),
                }),
            }
        }
    }
}

/// Tuple formation. A pair made of one tuple and one scalar flattens into an
/// (n+1)-tuple with the scalar first, so `(t, switch(t, z))` over pairs
/// yields flat triples led by the switch id.
fn form_tuple(values: Vec<Value>) -> Value {
    if values.len() == 2 {
        let mut iter = values.into_iter();
        let first = iter.next().unwrap();
        let second = iter.next().unwrap();
        return match (first, second) {
            (Value::Tuple(items), scalar @ Value::Tuple(_)) => {
                Value::Tuple(vec![Value::Tuple(items), scalar])
            }
            (Value::Tuple(items), scalar) | (scalar, Value::Tuple(items)) => {
                let mut flat = Vec::with_capacity(items.len() + 1);
                flat.push(scalar);
                flat.extend(items);
                Value::Tuple(flat)
            }
            (a, b) => Value::Tuple(vec![a, b]),
        };
    }
    Value::Tuple(values)
}

fn eval_builtin(
    builtin: Builtin,
    args: &[Expr],
    bound: (&str, &Value),
    gamma: &VarState,
    view: &FabricView,
) -> Result<Value, EvalError> {
    match builtin {
        Builtin::Port => {
            let arg = eval_expr(&args[0], bound, gamma, view)?;
            builtin_port(&arg, view).map(Value::Port)
        }
        Builtin::Switch => {
            let arg = eval_expr(&args[0], bound, gamma, view)?;
            let Expr::Var(ids_var) = &args[1] else {
                return Err(EvalError::TypeMismatch {
                    expected: "a variable naming an event of switch ids".to_string(),
                    found: args[1].to_string(),
                });
            };
            let ids = match gamma.get(ids_var) {
                Some(Binding::Event(ev)) => ev,
                Some(binding) => {
                    return Err(EvalError::BindingKind {
                        var: ids_var.clone(),
                        found: binding.kind(),
                        expected: "an event of switch ids",
                    })
                }
                None => return Err(EvalError::UnboundVariable(ids_var.clone())),
            };
            builtin_switch(&arg, ids, view).map(Value::SwitchId)
        }
        Builtin::SrcIp | Builtin::DstIp | Builtin::SrcPort | Builtin::DstPort | Builtin::InPort => {
            match eval_expr(&args[0], bound, gamma, view)? {
                Value::Packet(pk) => Ok(match builtin {
                    Builtin::SrcIp => Value::Ip(pk.headers.srcip),
                    Builtin::DstIp => Value::Ip(pk.headers.dstip),
                    Builtin::SrcPort => Value::Nat(pk.headers.srcport),
                    Builtin::DstPort => Value::Nat(pk.headers.dstport),
                    _ => Value::Nat(pk.headers.inport),
                }),
                other => Err(EvalError::TypeMismatch {
                    expected: format!("a packet for `{}`", builtin.name()),
                    found: other.to_string(),
                }),
            }
        }
    }
}

fn eval_cmp(op: CmpOp, l: &Value, r: &Value) -> Result<Value, EvalError> {
    match op {
        CmpOp::Eq | CmpOp::Ne => {
            if unify(&lenient_type(l), &lenient_type(r)).is_none() {
                return Err(EvalError::TypeMismatch {
                    expected: "operands of one type".to_string(),
                    found: format!("{l} {} {r}", op.symbol()),
                });
            }
            let eq = l == r;
            Ok(Value::Bool(if op == CmpOp::Eq { eq } else { !eq }))
        }
        CmpOp::Lt | CmpOp::Le => {
            let (a, b) = match (l, r) {
                (Value::Nat(a), Value::Nat(b)) | (Value::Port(a), Value::Port(b)) => (*a, *b),
                _ => {
                    return Err(EvalError::TypeMismatch {
                        expected: "numbers on both sides of an ordering".to_string(),
                        found: format!("{l} {} {r}", op.symbol()),
                    })
                }
            };
            Ok(Value::Bool(if op == CmpOp::Lt { a < b } else { a <= b }))
        }
    }
}
