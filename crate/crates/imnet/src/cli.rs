//! Command implementations behind the `imnet` binary: `check`, `run`, and
//! `diff-trace`. Exit codes are a stable contract: 0 success, 1 user/program
//! error, 2 configuration/IO error.

use std::fs;
use std::path::{Path, PathBuf};

use crate::exec::{run_program, ExecOutcome};
use crate::fabric::files::{parse_injections, parse_topology};
use crate::fabric::{DefaultAction, Fabric, FabricConfig};
use crate::model::{Binding, MachineState, Packet, VarState};
use crate::syntax::parser::{parse_program, validate_program};
use crate::syntax::values::parse_bindings_file;
use crate::trace::{diff_traces, parse_trace, write_trace};

/// Failure modes mapped to exit codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Program-level problems: parse errors, validation, runtime errors.
    User(String),
    /// Environment problems: missing or malformed configuration files, IO.
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Config(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::User(msg) | CliError::Config(msg) => msg,
        }
    }
}

/// Everything `run` needs; mirrors the binary's flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub topology: PathBuf,
    pub program: PathBuf,
    pub injections: Option<PathBuf>,
    pub bindings: Option<PathBuf>,
    pub trace_out: PathBuf,
    pub default_action: DefaultAction,
    pub global_broadcast: bool,
    pub hop_budget: u64,
}

impl RunConfig {
    pub fn new(
        topology: impl Into<PathBuf>,
        program: impl Into<PathBuf>,
        trace_out: impl Into<PathBuf>,
    ) -> Self {
        RunConfig {
            topology: topology.into(),
            program: program.into(),
            injections: None,
            bindings: None,
            trace_out: trace_out.into(),
            default_action: DefaultAction::SendController,
            global_broadcast: false,
            hop_budget: FabricConfig::default().hop_budget,
        }
    }
}

/// What `run` reports on success.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub snapshots: usize,
    pub packets_buffered: usize,
    pub packets_processed_after: usize,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

/// Parses a program file and checks static well-formedness: distinct
/// definition variables and known query names.
pub fn cmd_check(program_path: &Path) -> Result<(), CliError> {
    let source = read(program_path)?;
    let program = parse_program(&source).map_err(|e| CliError::User(e.to_string()))?;
    validate_program(&program).map_err(|e| CliError::User(e.to_string()))?;
    for (_, query) in &program.defs {
        if !query.is_builtin() {
            return Err(CliError::User(format!("unknown query `{}`", query.name())));
        }
    }
    Ok(())
}

/// Loads the fabric, buffers any injected packets (a table-miss drain that
/// fills the controller inbox), seeds gamma from the bindings file, runs the
/// program, writes the trace, and drains packets the program itself sent.
pub fn cmd_run(config: &RunConfig) -> Result<RunReport, CliError> {
    let topology = parse_topology(&read(&config.topology)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", config.topology.display())))?;
    let fabric_config = FabricConfig {
        default_action: config.default_action,
        global_broadcast: config.global_broadcast,
        hop_budget: config.hop_budget,
    };
    let mut fabric = Fabric::new(topology, fabric_config);

    let mut buffered = 0;
    if let Some(path) = &config.injections {
        let injections = parse_injections(&read(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for (index, injection) in injections.into_iter().enumerate() {
            let packet = Packet {
                headers: injection.headers,
                payload: injection.payload,
                uid: index as u64 + 1,
            };
            fabric
                .inject_packet(&injection.at, packet)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        }
        buffered = fabric.process_pending().len();
    }

    let mut gamma = VarState::empty();
    if let Some(path) = &config.bindings {
        let entries = parse_bindings_file(&read(path)?)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        for (name, binding) in entries {
            if let Binding::Event(event) = &binding {
                crate::model::event_typecheck(event).map_err(|e| {
                    CliError::Config(format!("{}: binding `{name}`: {e}", path.display()))
                })?;
            }
            gamma.bind(name, binding);
        }
    }

    let source = read(&config.program)?;
    let program = parse_program(&source).map_err(|e| CliError::User(e.to_string()))?;
    validate_program(&program).map_err(|e| CliError::User(e.to_string()))?;

    let initial = MachineState { gamma, ..MachineState::empty() };
    let outcome: ExecOutcome = match run_program(&program, &mut fabric, initial) {
        Ok(outcome) => outcome,
        Err(err) => {
            let text = write_trace(&err.partial, Some((&err.label, &err.source.to_string())));
            fs::write(&config.trace_out, text).map_err(|e| {
                CliError::Config(format!("cannot write {}: {e}", config.trace_out.display()))
            })?;
            return Err(CliError::User(err.to_string()));
        }
    };

    let text = write_trace(&outcome.trace, None);
    fs::write(&config.trace_out, text).map_err(|e| {
        CliError::Config(format!("cannot write {}: {e}", config.trace_out.display()))
    })?;

    // packets the program's Send statements queued up
    let processed_after = fabric.process_pending().len();
    Ok(RunReport {
        snapshots: outcome.trace.len(),
        packets_buffered: buffered,
        packets_processed_after: processed_after,
    })
}

/// Structurally compares two trace files; prints nothing, reports the first
/// divergent record in the error message.
pub fn cmd_diff_trace(actual: &Path, golden: &Path) -> Result<(), CliError> {
    let left = parse_trace(&read(actual)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", actual.display())))?;
    let right = parse_trace(&read(golden)?)
        .map_err(|e| CliError::Config(format!("{}: {e}", golden.display())))?;
    match diff_traces(&left, &right) {
        None => Ok(()),
        Some(diff) => {
            let render = |r: &Option<crate::trace::TraceRecord>| match r {
                Some(record) => format!("{record:?}"),
                None => "<missing>".to_string(),
            };
            Err(CliError::User(format!(
                "traces diverge at record {}:\n  left:  {}\n  right: {}",
                diff.index,
                render(&diff.left),
                render(&diff.right)
            )))
        }
    }
}

/// Seeds a variable state from parsed bindings; used by tests.
pub fn gamma_from(entries: Vec<(String, Binding)>) -> VarState {
    let mut gamma = VarState::empty();
    for (name, binding) in entries {
        gamma.bind(name, binding);
    }
    gamma
}
