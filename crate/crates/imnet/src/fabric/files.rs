//! Line-oriented text formats for topologies and packet injections.
//!
//! Topology files (`.topo`):
//!
//! ```text
//! switch id1 ports 1 2
//! link id1:2 -- id2:2
//! host 10.0.0.1 at id1:1
//! ```
//!
//! Injection files (`.inj`), one packet per line; uids are assigned in file
//! order by the caller:
//!
//! ```text
//! packet at id1 {srcip: 10.0.0.1, ..., ethdst: 00:00:00:00:00:02}
//! ```

use std::net::Ipv4Addr;

use thiserror::Error;

use crate::fabric::{Topology, TopologyBuilder};
use crate::model::{Headers, SwitchId};
use crate::syntax::values::parse_headers_record;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FileError {
    pub line: usize,
    pub message: String,
}

impl FileError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        FileError { line, message: message.into() }
    }
}

/// A packet awaiting injection: target switch, headers, payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Injection {
    pub at: SwitchId,
    pub headers: Headers,
    pub payload: Vec<u8>,
}

fn meaningful_lines(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn endpoint(line: usize, text: &str) -> Result<(String, u64), FileError> {
    let (id, port) = text
        .split_once(':')
        .ok_or_else(|| FileError::new(line, format!("expected `switch:port`, found `{text}`")))?;
    let port = port
        .parse()
        .map_err(|_| FileError::new(line, format!("invalid port number `{port}`")))?;
    Ok((id.to_string(), port))
}

pub fn parse_topology(src: &str) -> Result<Topology, FileError> {
    let mut builder = TopologyBuilder::default();
    for (line, text) in meaningful_lines(src) {
        let words: Vec<&str> = text.split_whitespace().collect();
        match words.as_slice() {
            ["switch", id, "ports", rest @ ..] if !rest.is_empty() => {
                let ports = rest
                    .iter()
                    .map(|w| {
                        w.parse::<u64>().map_err(|_| {
                            FileError::new(line, format!("invalid port number `{w}`"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                builder = builder.switch(*id, ports);
            }
            ["link", a, "--", b] => {
                let (a_id, a_port) = endpoint(line, a)?;
                let (b_id, b_port) = endpoint(line, b)?;
                builder = builder.link(a_id, a_port, b_id, b_port);
            }
            ["host", ip, "at", point] => {
                let ip: Ipv4Addr = ip
                    .parse()
                    .map_err(|_| FileError::new(line, format!("invalid host address `{ip}`")))?;
                let (id, port) = endpoint(line, point)?;
                builder = builder.host(ip, id, port);
            }
            _ => {
                return Err(FileError::new(
                    line,
                    format!("expected `switch`, `link`, or `host` declaration, found `{text}`"),
                ))
            }
        }
    }
    builder.build().map_err(|e| FileError::new(0, e.to_string()))
}

pub fn parse_injections(src: &str) -> Result<Vec<Injection>, FileError> {
    let mut out = Vec::new();
    for (line, text) in meaningful_lines(src) {
        let rest = text
            .strip_prefix("packet at ")
            .ok_or_else(|| FileError::new(line, "expected `packet at <switch> {...}`"))?;
        let brace = rest
            .find('{')
            .ok_or_else(|| FileError::new(line, "expected a `{...}` header record"))?;
        let at = SwitchId::new(rest[..brace].trim());
        let (headers, payload) = parse_headers_record(rest[brace..].trim())
            .map_err(|e| FileError::new(line, e.to_string()))?;
        out.push(Injection { at, headers, payload });
    }
    Ok(out)
}
