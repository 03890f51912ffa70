//! Error types shared across the model and the evaluator.

use std::net::Ipv4Addr;

use thiserror::Error;

use crate::model::{HeaderField, SwitchId};

/// Violations of the value/type universe.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("value has no type (wildcard outside a rule-construction triple)")]
    UntypeableValue,
    #[error("heterogeneous event: element {index} does not share the event type")]
    Heterogeneous { index: usize },
    #[error("value is incompatible with header field `{}`", field.name())]
    IncompatibleHeaderValue { field: HeaderField },
    #[error("a rule needs at least one action")]
    EmptyActions,
}

/// Runtime errors raised while evaluating expressions, transformers,
/// statements, queries, or fabric operations. Evaluation is all-or-nothing:
/// any of these aborts the enclosing transformer or statement with the
/// machine state untouched.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("variable `{var}` holds {found}, but {expected} is required")]
    BindingKind {
        var: String,
        found: &'static str,
        expected: &'static str,
    },
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("type mismatch: expected {expected}, found {found}")]
    TypeMismatch { expected: String, found: String },
    #[error("element {index} has the wrong shape: expected {expected}")]
    Shape { index: usize, expected: String },
    #[error("element {index}: {source}")]
    AtElement {
        index: usize,
        #[source]
        source: Box<EvalError>,
    },
    #[error("events differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("filter predicate returned a non-boolean at element {index}")]
    PredicateNotBool { index: usize },
    #[error("element {index}: {detail}")]
    ArityMismatch { index: usize, detail: String },
    #[error("Once needs a single value, but `{var}` holds {found}")]
    OnceOperand { var: String, found: String },
    #[error("natural subtraction underflow")]
    NatUnderflow,
    #[error("tuple index {index} out of range for arity {arity}")]
    TupleIndex { index: usize, arity: usize },
    #[error("no host with address {0} in the topology")]
    UnknownHost(Ipv4Addr),
    #[error("switch `{0}` does not occur in the given event")]
    SwitchNotInEvent(SwitchId),
    #[error("unknown switch `{0}`")]
    UnknownSwitch(SwitchId),
    #[error("switch `{switch}` has no port {port}")]
    UnknownPort { switch: SwitchId, port: u64 },
    #[error("unknown query `{0}`")]
    UnknownQuery(String),
    #[error("packet uid {0} was already injected in this run")]
    DuplicateUid(u64),
}
