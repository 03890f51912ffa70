//! Big-step statement execution threading the (sigma, gamma, ir) triple.
//! Statements are strict left-to-right; a failing statement leaves the
//! machine state and the fabric untouched.

use std::fmt;

use thiserror::Error;

use crate::error::EvalError;
use crate::fabric::Fabric;
use crate::model::{
    Action, Binding, Event, MachineState, Packet, RuleAssignment, RuleList, SwitchId, Value,
    VarState,
};
use crate::syntax::ast::{EventTransformer, Program, QueryName, Stmt};
use crate::transform::eval_transformer;

/// One per-statement snapshot: the statement's printed form and the state it
/// produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub label: String,
    pub state: MachineState,
}

/// Result of a full program run: the final state plus one snapshot per
/// executed definition and atomic statement, headed by the initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecOutcome {
    pub final_state: MachineState,
    pub trace: Vec<TraceStep>,
}

/// A run that stopped at a failing statement. Carries the statement label,
/// the state it was attempted in, and the snapshots gathered so far.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ExecError {
    pub label: String,
    pub pre: Box<MachineState>,
    pub partial: Vec<TraceStep>,
    pub source: EvalError,
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error in `{}`: {}", self.label, self.source)
    }
}

/// `x := et`: only gamma changes.
pub fn exec_assign(
    x: &str,
    et: &EventTransformer,
    state: &MachineState,
    fabric: &Fabric,
) -> Result<MachineState, EvalError> {
    let result = eval_transformer(et, &state.gamma, &fabric.view())?;
    Ok(MachineState {
        sigma: state.sigma.clone(),
        gamma: state.gamma.with(x, result.into_binding()),
        ir: state.ir.clone(),
    })
}

/// `S1; S2`: strict left-to-right composition; the first error aborts.
pub fn exec_seq(
    s1: &Stmt,
    s2: &Stmt,
    state: &MachineState,
    fabric: &mut Fabric,
) -> Result<MachineState, EvalError> {
    let mid = exec_stmt(s1, state, fabric)?;
    exec_stmt(s2, &mid, fabric)
}

/// Coerces a variable's contents to a rule assignment: either one directly,
/// or an event of (switch-id, rule-list) pairs.
fn assignment_of(gamma: &VarState, x: &str) -> Result<RuleAssignment, EvalError> {
    match gamma.get(x) {
        Some(Binding::Assignment(ir)) => Ok(ir.clone()),
        Some(Binding::Event(ev)) => {
            let mut ir = RuleAssignment::empty();
            for (index, item) in ev.iter().enumerate() {
                let Value::Tuple(items) = item else {
                    return Err(EvalError::Shape {
                        index,
                        expected: "a (switch-id, rule-list) pair".to_string(),
                    });
                };
                let [Value::SwitchId(id), Value::Rules(rl)] = items.as_slice() else {
                    return Err(EvalError::Shape {
                        index,
                        expected: "a (switch-id, rule-list) pair".to_string(),
                    });
                };
                ir.insert(id.clone(), rl.clone());
            }
            Ok(ir)
        }
        Some(binding) => Err(EvalError::BindingKind {
            var: x.to_string(),
            found: binding.kind(),
            expected: "a rule assignment",
        }),
        None => Err(EvalError::UnboundVariable(x.to_string())),
    }
}

/// `AddRules(x)`: unions the staged bindings in `x` into ir.
pub fn exec_add_rules(x: &str, state: &MachineState) -> Result<MachineState, EvalError> {
    let staged = assignment_of(&state.gamma, x)?;
    Ok(MachineState {
        sigma: state.sigma.clone(),
        gamma: state.gamma.clone(),
        ir: state.ir.union(&staged),
    })
}

/// `Register`: appends every staged binding into the flow tables in
/// insertion order, empties ir, and synchronizes the fabric's live tables.
/// All-or-nothing: an unknown switch installs nothing.
pub fn exec_register(state: &MachineState, fabric: &mut Fabric) -> Result<MachineState, EvalError> {
    for (id, _) in state.ir.iter() {
        if !fabric.topology().has_switch(id) {
            return Err(EvalError::UnknownSwitch(id.clone()));
        }
    }
    let mut sigma = state.sigma.clone();
    for (id, rules) in state.ir.iter() {
        sigma.append(id.clone(), rules);
    }
    fabric.sync_tables(&sigma)?;
    Ok(MachineState { sigma, gamma: state.gamma.clone(), ir: RuleAssignment::empty() })
}

fn send_triple(value: &Value, index: usize) -> Result<(SwitchId, Packet, Action), EvalError> {
    let err = || EvalError::Shape {
        index,
        expected: "a (switch-id, packet, action) triple".to_string(),
    };
    let Value::Tuple(items) = value else { return Err(err()) };
    let [Value::SwitchId(id), Value::Packet(pk), Value::Action(action)] = items.as_slice() else {
        return Err(err());
    };
    Ok((id.clone(), pk.clone(), action.clone()))
}

/// `Send(x)`: executes each (switch, packet, action) triple at its switch and
/// records it in the history. The semantic triple is unchanged. Triples are
/// validated up front so an error leaves the fabric untouched.
pub fn exec_send(
    x: &str,
    state: &MachineState,
    fabric: &mut Fabric,
) -> Result<MachineState, EvalError> {
    let event = match state.gamma.get(x) {
        Some(Binding::Event(ev)) => ev.clone(),
        Some(binding) => {
            return Err(EvalError::BindingKind {
                var: x.to_string(),
                found: binding.kind(),
                expected: "an event",
            })
        }
        None => return Err(EvalError::UnboundVariable(x.to_string())),
    };
    let mut triples = Vec::with_capacity(event.len());
    for (index, item) in event.iter().enumerate() {
        let (id, pk, action) = send_triple(item, index)?;
        if !fabric.topology().has_switch(&id) {
            return Err(EvalError::UnknownSwitch(id));
        }
        match action {
            Action::SendOut(port) if !fabric.topology().has_port(&id, port) => {
                return Err(EvalError::UnknownPort { switch: id, port });
            }
            Action::Change(field, value) if !value.compatible_with(field) => {
                return Err(crate::error::TypeError::IncompatibleHeaderValue { field }.into());
            }
            _ => {}
        }
        triples.push((id, pk, action));
    }
    for (id, mut pk, action) in triples {
        fabric
            .apply_action(&action, &mut pk, &id)
            .expect("send triples are validated before applying");
    }
    Ok(state.clone())
}

/// Executes a statement tree (big-step).
pub fn exec_stmt(
    stmt: &Stmt,
    state: &MachineState,
    fabric: &mut Fabric,
) -> Result<MachineState, EvalError> {
    match stmt {
        Stmt::Assign(x, et) => exec_assign(x, et, state, fabric),
        Stmt::Seq(s1, s2) => exec_seq(s1, s2, state, fabric),
        Stmt::AddRules(x) => exec_add_rules(x, state),
        Stmt::Register => exec_register(state, fabric),
        Stmt::Send(x) => exec_send(x, state, fabric),
    }
}

/// Evaluates definitions left-to-right, binding each query result.
pub fn exec_defs(
    defs: &[(String, QueryName)],
    gamma: &VarState,
    fabric: &Fabric,
) -> Result<VarState, EvalError> {
    let mut gamma = gamma.clone();
    for (var, query) in defs {
        let event = crate::fabric::query_eval(query, &fabric.view())?;
        gamma.bind(var.clone(), Binding::Event(event));
    }
    Ok(gamma)
}

/// Runs a whole program from an initial state: definitions first (queries are
/// evaluated once, eagerly), then the statement body, snapshotting after
/// every definition and atomic statement.
pub fn run_program(
    program: &Program,
    fabric: &mut Fabric,
    initial: MachineState,
) -> Result<ExecOutcome, ExecError> {
    let mut trace = vec![TraceStep { label: "init".to_string(), state: initial.clone() }];
    let mut state = initial;

    for (var, query) in &program.defs {
        let label = format!("{var} := {query}");
        match crate::fabric::query_eval(query, &fabric.view()) {
            Ok(event) => {
                state = MachineState {
                    sigma: state.sigma.clone(),
                    gamma: state.gamma.with(var.clone(), Binding::Event(event)),
                    ir: state.ir.clone(),
                };
                trace.push(TraceStep { label, state: state.clone() });
            }
            Err(source) => {
                return Err(ExecError {
                    label,
                    pre: Box::new(state),
                    partial: trace,
                    source,
                })
            }
        }
    }

    for stmt in program.body.atoms() {
        let label = stmt.to_string();
        match exec_stmt(stmt, &state, fabric) {
            Ok(next) => {
                state = next;
                trace.push(TraceStep { label, state: state.clone() });
            }
            Err(source) => {
                return Err(ExecError {
                    label,
                    pre: Box::new(state),
                    partial: trace,
                    source,
                })
            }
        }
    }

    Ok(ExecOutcome { final_state: state, trace })
}

/// Convenience constructor for events used across tests and the CLI.
pub fn event_binding(values: Vec<Value>) -> Binding {
    Binding::Event(Event::new(values))
}

/// Convenience constructor for rule-list bindings.
pub fn rules_binding(rules: RuleList) -> Binding {
    Binding::Rules(rules)
}
