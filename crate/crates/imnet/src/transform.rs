//! Event-transformer evaluation: pure functions from a variable state (plus a
//! fabric view for builtins) to a result. Evaluation is all-or-nothing; an
//! error leaves no partial event behind, and the variable state is never
//! mutated here. Every event result is re-checked for homogeneity.

use crate::error::EvalError;
use crate::fabric::FabricView;
use crate::model::{
    event_typecheck, Action, ActionCtor, Binding, Event, EthAddr, HeaderField, HeaderValue,
    Packet, Rule, RuleAssignment, RuleList, SwitchId, Value, ValueSet, VarState,
};
use crate::syntax::ast::{EventTransformer, Lambda};
use crate::syntax::eval::eval_expr;

/// What a transformer yields: most produce events; the rule makers produce
/// rule lists or staged assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformerResult {
    Event(Event),
    Rules(RuleList),
    Assignment(RuleAssignment),
}

impl TransformerResult {
    pub fn into_binding(self) -> Binding {
        match self {
            TransformerResult::Event(ev) => Binding::Event(ev),
            TransformerResult::Rules(rl) => Binding::Rules(rl),
            TransformerResult::Assignment(ir) => Binding::Assignment(ir),
        }
    }
}

/// Dispatches to the rule for the transformer's constructor.
pub fn eval_transformer(
    et: &EventTransformer,
    gamma: &VarState,
    view: &FabricView,
) -> Result<TransformerResult, EvalError> {
    use TransformerResult as R;
    match et {
        EventTransformer::Lift(x, f) => eval_lift(x, f, gamma, view).map(R::Event),
        EventTransformer::ApplyLft(x, f) => eval_apply_left(x, f, gamma, view).map(R::Event),
        EventTransformer::ApplyRit(x, f) => eval_apply_right(x, f, gamma, view).map(R::Event),
        EventTransformer::Merge(x1, x2) => eval_merge(x1, x2, gamma).map(R::Event),
        EventTransformer::MixFst(a, x1, x2) => eval_mix_fst(a, x1, x2, gamma).map(R::Event),
        EventTransformer::MixSnd(a, x1, x2) => eval_mix_snd(a, x1, x2, gamma).map(R::Event),
        EventTransformer::Filter(x, f) => eval_filter(x, f, gamma, view).map(R::Event),
        EventTransformer::Once(x, n) => eval_once(x, *n, gamma).map(R::Event),
        EventTransformer::MakForwRule(x) => eval_mak_forw_rule(x, gamma).map(R::Assignment),
        EventTransformer::MakeRule(x) => eval_make_rule(x, gamma).map(R::Rules),
    }
}

fn event_of<'a>(gamma: &'a VarState, x: &str) -> Result<&'a Event, EvalError> {
    match gamma.get(x) {
        Some(Binding::Event(ev)) => Ok(ev),
        Some(binding) => Err(EvalError::BindingKind {
            var: x.to_string(),
            found: binding.kind(),
            expected: "an event",
        }),
        None => Err(EvalError::UnboundVariable(x.to_string())),
    }
}

fn checked(values: Vec<Value>) -> Result<Event, EvalError> {
    let event = Event::new(values);
    event_typecheck(&event)?;
    Ok(event)
}

fn at_element(index: usize) -> impl FnOnce(EvalError) -> EvalError {
    move |source| EvalError::AtElement { index, source: Box::new(source) }
}

/// Element-wise map preserving length and order.
pub fn eval_lift(
    x: &str,
    f: &Lambda,
    gamma: &VarState,
    view: &FabricView,
) -> Result<Event, EvalError> {
    let input = event_of(gamma, x)?;
    let mut values = Vec::with_capacity(input.len());
    for (index, v) in input.iter().enumerate() {
        values.push(eval_expr(&f.body, (&f.param, v), gamma, view).map_err(at_element(index))?);
    }
    checked(values)
}

fn pair_of(value: &Value, index: usize) -> Result<(&Value, &Value), EvalError> {
    match value {
        Value::Tuple(items) if items.len() == 2 => Ok((&items[0], &items[1])),
        _ => Err(EvalError::Shape { index, expected: "a pair".to_string() }),
    }
}

/// Maps `f` over first components; second components pass through.
pub fn eval_apply_left(
    x: &str,
    f: &Lambda,
    gamma: &VarState,
    view: &FabricView,
) -> Result<Event, EvalError> {
    let input = event_of(gamma, x)?;
    let mut values = Vec::with_capacity(input.len());
    for (index, item) in input.iter().enumerate() {
        let (first, second) = pair_of(item, index)?;
        let mapped =
            eval_expr(&f.body, (&f.param, first), gamma, view).map_err(at_element(index))?;
        values.push(Value::Tuple(vec![mapped, second.clone()]));
    }
    checked(values)
}

/// Mirror image of [`eval_apply_left`]: maps over second components.
pub fn eval_apply_right(
    x: &str,
    f: &Lambda,
    gamma: &VarState,
    view: &FabricView,
) -> Result<Event, EvalError> {
    let input = event_of(gamma, x)?;
    let mut values = Vec::with_capacity(input.len());
    for (index, item) in input.iter().enumerate() {
        let (first, second) = pair_of(item, index)?;
        let mapped =
            eval_expr(&f.body, (&f.param, second), gamma, view).map_err(at_element(index))?;
        values.push(Value::Tuple(vec![first.clone(), mapped]));
    }
    checked(values)
}

/// Positional zip of two equal-length events into pairs.
pub fn eval_merge(x1: &str, x2: &str, gamma: &VarState) -> Result<Event, EvalError> {
    let left = event_of(gamma, x1)?;
    let right = event_of(gamma, x2)?;
    if left.len() != right.len() {
        return Err(EvalError::LengthMismatch { left: left.len(), right: right.len() });
    }
    let values = left
        .iter()
        .zip(right.iter())
        .map(|(v, w)| Value::Tuple(vec![v.clone(), w.clone()]))
        .collect();
    checked(values)
}

/// Keeps elements whose predicate is true, preserving order.
pub fn eval_filter(
    x: &str,
    f: &Lambda,
    gamma: &VarState,
    view: &FabricView,
) -> Result<Event, EvalError> {
    let input = event_of(gamma, x)?;
    let mut values = Vec::new();
    for (index, item) in input.iter().enumerate() {
        match eval_expr(&f.body, (&f.param, item), gamma, view).map_err(at_element(index))? {
            Value::Bool(true) => values.push(item.clone()),
            Value::Bool(false) => {}
            _ => return Err(EvalError::PredicateNotBool { index }),
        }
    }
    checked(values)
}

/// Replicates a single value n times. The operand must resolve to one value:
/// a singleton event or a rule list (which is itself a value).
pub fn eval_once(x: &str, n: u64, gamma: &VarState) -> Result<Event, EvalError> {
    let value = match gamma.get(x) {
        Some(Binding::Event(ev)) if ev.len() == 1 => ev.0[0].clone(),
        Some(Binding::Event(ev)) => {
            return Err(EvalError::OnceOperand {
                var: x.to_string(),
                found: format!("an event of length {}", ev.len()),
            })
        }
        Some(Binding::Rules(rl)) => Value::Rules(rl.clone()),
        Some(Binding::Assignment(_)) => {
            return Err(EvalError::OnceOperand {
                var: x.to_string(),
                found: "a rule assignment".to_string(),
            })
        }
        None => return Err(EvalError::UnboundVariable(x.to_string())),
    };
    let values = std::iter::repeat_n(value, n as usize).collect();
    checked(values)
}

/// Running prefix-union over the first event, paired with the second:
/// element i is `(A ∪ {x1[0..=i]}, x2[i])`.
pub fn eval_mix_fst(
    a: &ValueSet,
    x1: &str,
    x2: &str,
    gamma: &VarState,
) -> Result<Event, EvalError> {
    let first = event_of(gamma, x1)?;
    let second = event_of(gamma, x2)?;
    if first.len() != second.len() {
        return Err(EvalError::LengthMismatch { left: first.len(), right: second.len() });
    }
    let mut acc = a.clone();
    let mut values = Vec::with_capacity(first.len());
    for (v1, v2) in first.iter().zip(second.iter()) {
        acc.insert(v1.clone())?;
        values.push(Value::Tuple(vec![Value::Set(acc.clone()), v2.clone()]));
    }
    checked(values)
}

/// Mirror image of [`eval_mix_fst`]: accumulates over the second event and
/// places the set in second position.
pub fn eval_mix_snd(
    a: &ValueSet,
    x1: &str,
    x2: &str,
    gamma: &VarState,
) -> Result<Event, EvalError> {
    let first = event_of(gamma, x1)?;
    let second = event_of(gamma, x2)?;
    if first.len() != second.len() {
        return Err(EvalError::LengthMismatch { left: first.len(), right: second.len() });
    }
    let mut acc = a.clone();
    let mut values = Vec::with_capacity(first.len());
    for (v1, v2) in first.iter().zip(second.iter()) {
        acc.insert(v2.clone())?;
        values.push(Value::Tuple(vec![v1.clone(), Value::Set(acc.clone())]));
    }
    checked(values)
}

fn forw_triple(value: &Value, index: usize) -> Result<(SwitchId, u64, Packet), EvalError> {
    let err = || EvalError::Shape {
        index,
        expected: "a (switch-id, port, packet) triple".to_string(),
    };
    let Value::Tuple(items) = value else { return Err(err()) };
    let [Value::SwitchId(id), port, Value::Packet(pk)] = items.as_slice() else {
        return Err(err());
    };
    let port = match port {
        Value::Port(p) | Value::Nat(p) => *p,
        _ => return Err(err()),
    };
    Ok((id.clone(), port, pk.clone()))
}

/// Per (id, port, packet) triple, stages a forwarding rule for the switch:
/// an exact-match pattern over the packet's headers sending out the port.
pub fn eval_mak_forw_rule(x: &str, gamma: &VarState) -> Result<RuleAssignment, EvalError> {
    let input = event_of(gamma, x)?;
    let mut assignment = RuleAssignment::empty();
    for (index, item) in input.iter().enumerate() {
        let (id, port, packet) = forw_triple(item, index)?;
        let rule = Rule::new(packet.exact_pattern(), vec![Action::SendOut(port)])
            .expect("forwarding rules have one action");
        assignment.insert(id, RuleList::new(vec![rule]));
    }
    Ok(assignment)
}

fn make_rule_action(
    action: &Value,
    arg: &Value,
    index: usize,
) -> Result<Action, EvalError> {
    match action {
        Value::Action(a @ (Action::SendController | Action::SendAll)) => match arg {
            Value::Wildcard => Ok(a.clone()),
            other => Err(EvalError::ArityMismatch {
                index,
                detail: format!("nullary action `{a}` takes no argument, found `{other}`"),
            }),
        },
        Value::Action(a) => Err(EvalError::ArityMismatch {
            index,
            detail: format!("`{a}` is already applied; use the bare constructor"),
        }),
        Value::ActionCtor(ActionCtor::SendOut) => match arg {
            Value::Port(p) | Value::Nat(p) => Ok(Action::SendOut(*p)),
            Value::Wildcard => Err(EvalError::ArityMismatch {
                index,
                detail: "`sendout` needs a port argument".to_string(),
            }),
            other => Err(EvalError::ArityMismatch {
                index,
                detail: format!("`sendout` needs a port argument, found `{other}`"),
            }),
        },
        Value::ActionCtor(ActionCtor::Change(field)) => {
            let value = match (field, arg) {
                (_, Value::Wildcard) => {
                    return Err(EvalError::ArityMismatch {
                        index,
                        detail: "`change` needs a value argument".to_string(),
                    })
                }
                (HeaderField::SrcIp | HeaderField::DstIp, Value::Ip(ip)) => HeaderValue::Ip(*ip),
                (
                    HeaderField::SrcPort | HeaderField::DstPort | HeaderField::InPort,
                    Value::Nat(n) | Value::Port(n),
                ) => HeaderValue::Num(*n),
                (HeaderField::EthSrc | HeaderField::EthDst, Value::Nat(n)) => {
                    HeaderValue::Eth(EthAddr::new(*n))
                }
                _ => {
                    return Err(EvalError::Type(
                        crate::error::TypeError::IncompatibleHeaderValue { field: *field },
                    ))
                }
            };
            Ok(Action::Change(*field, value))
        }
        other => Err(EvalError::Shape {
            index,
            expected: format!("an action or action constructor, found `{other}`"),
        }),
    }
}

/// Per (pattern, action, argument) triple, builds the rule obtained by
/// applying the action constructor to the argument. Nullary actions take the
/// `_` placeholder.
pub fn eval_make_rule(x: &str, gamma: &VarState) -> Result<RuleList, EvalError> {
    let input = event_of(gamma, x)?;
    let mut rules = Vec::with_capacity(input.len());
    for (index, item) in input.iter().enumerate() {
        let Value::Tuple(items) = item else {
            return Err(EvalError::Shape {
                index,
                expected: "a (pattern, action, argument) triple".to_string(),
            });
        };
        let [Value::Pattern(pattern), action, arg] = items.as_slice() else {
            return Err(EvalError::Shape {
                index,
                expected: "a (pattern, action, argument) triple".to_string(),
            });
        };
        let action = make_rule_action(action, arg, index)?;
        rules.push(Rule::new(pattern.clone(), vec![action]).expect("one action"));
    }
    Ok(RuleList::new(rules))
}
