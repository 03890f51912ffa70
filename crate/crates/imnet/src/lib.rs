//! Interpreter and simulated switch fabric for ImNet, an imperative
//! controller-programming language for software-defined networks.
//!
//! A program is a sequence of query definitions followed by statements that
//! build events with transformers, stage rules, and commit them to switch
//! flow tables. Execution threads a (sigma, gamma, ir) state triple and
//! records a per-statement trace; the fabric simulates the switches
//! themselves: packet injection, first-match rule processing, flooding,
//! per-switch history, and the controller inbox.

pub mod cli;
pub mod error;
pub mod exec;
pub mod fabric;
pub mod model;
pub mod syntax;
pub mod trace;
pub mod transform;

pub use error::{EvalError, TypeError};
pub use exec::{run_program, ExecOutcome, TraceStep};
pub use model::{
    Action, Binding, Event, MachineState, Packet, Pattern, Rule, RuleAssignment, RuleList,
    SwitchId, SwitchState, Value, VarState,
};
pub use syntax::ast::{EventTransformer, Program, QueryName, Stmt};
pub use syntax::parser::{parse_program, ParseError};
pub use syntax::printer::print_program;
