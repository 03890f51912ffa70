//! Simulated controller-switch network: topology, live flow tables, packet
//! injection and processing, per-switch history, the controller inbox, and
//! the builtin query/function environment.

pub mod files;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::net::Ipv4Addr;

use thiserror::Error;

use crate::error::EvalError;
use crate::model::{
    rule_lookup, Action, Event, HeaderField, HeaderValue, Packet, Rule, RuleList, SwitchId,
    SwitchState, Value,
};
use crate::syntax::ast::QueryName;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("switch `{0}` declared twice")]
    DuplicateSwitch(SwitchId),
    #[error("link endpoint {switch}:{port} does not exist")]
    UnknownEndpoint { switch: SwitchId, port: u64 },
    #[error("port {switch}:{port} is already linked")]
    PortAlreadyLinked { switch: SwitchId, port: u64 },
    #[error("host {ip} attachment point {switch}:{port} does not exist")]
    UnknownAttachment { ip: Ipv4Addr, switch: SwitchId, port: u64 },
    #[error("host {0} declared twice")]
    DuplicateHost(Ipv4Addr),
    #[error("port {switch}:{port} cannot carry both a host and a link")]
    PortTaken { switch: SwitchId, port: u64 },
}

/// Static network layout: switches with ports, undirected point-to-point
/// links, and host attachment points. A port carries at most one link or one
/// host.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Topology {
    ports: BTreeMap<SwitchId, BTreeSet<u64>>,
    peer: BTreeMap<(SwitchId, u64), (SwitchId, u64)>,
    hosts: BTreeMap<Ipv4Addr, (SwitchId, u64)>,
    host_at: BTreeMap<(SwitchId, u64), Ipv4Addr>,
}

impl Topology {
    pub fn builder() -> TopologyBuilder {
        TopologyBuilder::default()
    }

    pub fn has_switch(&self, id: &SwitchId) -> bool {
        self.ports.contains_key(id)
    }

    pub fn has_port(&self, id: &SwitchId, port: u64) -> bool {
        self.ports.get(id).is_some_and(|ports| ports.contains(&port))
    }

    /// Switch ids in sorted order.
    pub fn switches(&self) -> impl Iterator<Item = &SwitchId> {
        self.ports.keys()
    }

    pub fn ports_of(&self, id: &SwitchId) -> impl Iterator<Item = u64> + '_ {
        self.ports.get(id).into_iter().flatten().copied()
    }

    /// The far end of the link on (switch, port), if the port is linked.
    pub fn peer_of(&self, id: &SwitchId, port: u64) -> Option<&(SwitchId, u64)> {
        self.peer.get(&(id.clone(), port))
    }

    /// Linked ports of a switch in sorted order.
    pub fn linked_ports<'a>(&'a self, id: &'a SwitchId) -> impl Iterator<Item = u64> + 'a {
        self.ports_of(id)
            .filter(move |port| self.peer.contains_key(&(id.clone(), *port)))
    }

    /// Attachment point of a host address.
    pub fn host_point(&self, ip: &Ipv4Addr) -> Option<&(SwitchId, u64)> {
        self.hosts.get(ip)
    }

    /// Host attached at (switch, port), if any.
    pub fn host_at(&self, id: &SwitchId, port: u64) -> Option<Ipv4Addr> {
        self.host_at.get(&(id.clone(), port)).copied()
    }

    pub fn hosts(&self) -> impl Iterator<Item = (&Ipv4Addr, &(SwitchId, u64))> {
        self.hosts.iter()
    }

    pub fn switch_count(&self) -> usize {
        self.ports.len()
    }
}

#[derive(Debug, Default)]
pub struct TopologyBuilder {
    switches: Vec<(SwitchId, Vec<u64>)>,
    links: Vec<((SwitchId, u64), (SwitchId, u64))>,
    hosts: Vec<(Ipv4Addr, SwitchId, u64)>,
}

impl TopologyBuilder {
    pub fn switch(mut self, id: impl Into<String>, ports: impl IntoIterator<Item = u64>) -> Self {
        self.switches.push((SwitchId::new(id), ports.into_iter().collect()));
        self
    }

    pub fn link(
        mut self,
        a: impl Into<String>,
        a_port: u64,
        b: impl Into<String>,
        b_port: u64,
    ) -> Self {
        self.links.push(((SwitchId::new(a), a_port), (SwitchId::new(b), b_port)));
        self
    }

    pub fn host(mut self, ip: Ipv4Addr, at: impl Into<String>, port: u64) -> Self {
        self.hosts.push((ip, SwitchId::new(at), port));
        self
    }

    pub fn build(self) -> Result<Topology, TopologyError> {
        let mut topo = Topology::default();
        for (id, ports) in self.switches {
            if topo.ports.contains_key(&id) {
                return Err(TopologyError::DuplicateSwitch(id));
            }
            topo.ports.insert(id, ports.into_iter().collect());
        }
        for (a, b) in self.links {
            for end in [&a, &b] {
                if !topo.has_port(&end.0, end.1) {
                    return Err(TopologyError::UnknownEndpoint {
                        switch: end.0.clone(),
                        port: end.1,
                    });
                }
                if topo.peer.contains_key(end) {
                    return Err(TopologyError::PortAlreadyLinked {
                        switch: end.0.clone(),
                        port: end.1,
                    });
                }
            }
            topo.peer.insert(a.clone(), b.clone());
            topo.peer.insert(b, a);
        }
        for (ip, id, port) in self.hosts {
            if !topo.has_port(&id, port) {
                return Err(TopologyError::UnknownAttachment { ip, switch: id, port });
            }
            if topo.hosts.contains_key(&ip) {
                return Err(TopologyError::DuplicateHost(ip));
            }
            let key = (id.clone(), port);
            if topo.peer.contains_key(&key) || topo.host_at.contains_key(&key) {
                return Err(TopologyError::PortTaken { switch: id, port });
            }
            topo.hosts.insert(ip, key.clone());
            topo.host_at.insert(key, ip);
        }
        Ok(topo)
    }
}

/// What a switch does with a packet that matches no rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DefaultAction {
    #[default]
    SendController,
    Drop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FabricConfig {
    pub default_action: DefaultAction,
    /// When set, `sendall` floods to every other switch instead of link
    /// neighbours only.
    pub global_broadcast: bool,
    /// Processing steps allowed per injected packet (counting all copies).
    pub hop_budget: u64,
}

impl Default for FabricConfig {
    fn default() -> Self {
        FabricConfig {
            default_action: DefaultAction::SendController,
            global_broadcast: false,
            hop_budget: 64,
        }
    }
}

/// One effect of processing a packet. `HeaderChanged` is the only
/// non-terminal outcome: a packet whose rule produces no terminal outcome is
/// dropped with a record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    ToController,
    ForwardedTo { switch: SwitchId, port: u64 },
    DeliveredToHost { ip: Ipv4Addr },
    Dropped(DropReason),
    HeaderChanged { field: HeaderField, value: HeaderValue },
}

impl Outcome {
    pub fn is_terminal(&self) -> bool {
        !matches!(self, Outcome::HeaderChanged { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    /// `sendout` to a port with neither a link nor a host.
    UnlinkedPort,
    /// `sendout` to a port the switch does not have.
    UnknownPort,
    HopBudgetExceeded,
    /// Table miss with the `Drop` default action.
    TableMiss,
    /// The matched rule produced no terminal outcome.
    NoTerminalAction,
}

/// Result of processing one pending packet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessingRecord {
    pub switch: SwitchId,
    pub packet: Packet,
    /// Index and rule that matched, or `None` on a table miss.
    pub matched: Option<(usize, Rule)>,
    pub outcomes: Vec<Outcome>,
}

/// Handler type for fabric-registered queries.
pub type QueryFn = fn(&FabricView) -> Result<Event, EvalError>;

#[derive(Debug, Clone, PartialEq, Eq)]
struct PendingEntry {
    at: SwitchId,
    packet: Packet,
    origin: u64,
}

/// The live fabric. Owned by a single run loop; reads go through
/// [`FabricView`] snapshots.
pub struct Fabric {
    topology: Topology,
    config: FabricConfig,
    tables: BTreeMap<SwitchId, RuleList>,
    history: BTreeMap<SwitchId, Vec<(Packet, Action)>>,
    inbox: Vec<(SwitchId, Packet)>,
    pending: VecDeque<PendingEntry>,
    used_uids: BTreeSet<u64>,
    steps: BTreeMap<u64, u64>,
    queries: BTreeMap<String, QueryFn>,
}

impl Fabric {
    pub fn new(topology: Topology, config: FabricConfig) -> Self {
        Fabric {
            topology,
            config,
            tables: BTreeMap::new(),
            history: BTreeMap::new(),
            inbox: Vec::new(),
            pending: VecDeque::new(),
            used_uids: BTreeSet::new(),
            steps: BTreeMap::new(),
            queries: BTreeMap::new(),
        }
    }

    pub fn view(&self) -> FabricView<'_> {
        FabricView { fabric: self }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn config(&self) -> &FabricConfig {
        &self.config
    }

    pub fn table(&self, id: &SwitchId) -> Option<&RuleList> {
        self.tables.get(id)
    }

    pub fn history(&self, id: &SwitchId) -> &[(Packet, Action)] {
        self.history.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn inbox(&self) -> &[(SwitchId, Packet)] {
        &self.inbox
    }

    pub fn pending_len(&self) -> usize {
        self.pending.len()
    }

    /// Registers a handler for a custom query name.
    pub fn register_query(&mut self, name: impl Into<String>, handler: QueryFn) {
        self.queries.insert(name.into(), handler);
    }

    /// Queues a packet for processing at a switch. The packet's inport must
    /// be a port of that switch and its uid must be fresh for this run.
    pub fn inject_packet(&mut self, at: &SwitchId, packet: Packet) -> Result<(), EvalError> {
        if !self.topology.has_switch(at) {
            return Err(EvalError::UnknownSwitch(at.clone()));
        }
        if !self.topology.has_port(at, packet.headers.inport) {
            return Err(EvalError::UnknownPort { switch: at.clone(), port: packet.headers.inport });
        }
        if !self.used_uids.insert(packet.uid) {
            return Err(EvalError::DuplicateUid(packet.uid));
        }
        let origin = packet.uid;
        self.pending.push_back(PendingEntry { at: at.clone(), packet, origin });
        Ok(())
    }

    /// Makes the live tables mirror `sigma` exactly.
    pub fn sync_tables(&mut self, sigma: &SwitchState) -> Result<(), EvalError> {
        for (id, _) in sigma.iter() {
            if !self.topology.has_switch(id) {
                return Err(EvalError::UnknownSwitch(id.clone()));
            }
        }
        self.tables = sigma.iter().map(|(id, rl)| (id.clone(), rl.clone())).collect();
        Ok(())
    }

    /// Applies one action to a working packet copy at a switch, recording it
    /// in the history. For `sendout` the port must exist.
    pub fn apply_action(
        &mut self,
        action: &Action,
        packet: &mut Packet,
        at: &SwitchId,
    ) -> Result<Vec<Outcome>, EvalError> {
        let origin = packet.uid;
        self.apply(action, packet, at, origin)
    }

    fn apply(
        &mut self,
        action: &Action,
        packet: &mut Packet,
        at: &SwitchId,
        origin: u64,
    ) -> Result<Vec<Outcome>, EvalError> {
        if !self.topology.has_switch(at) {
            return Err(EvalError::UnknownSwitch(at.clone()));
        }
        match action {
            Action::SendController => {
                self.push_history(at, packet.clone(), action.clone());
                self.inbox.push((at.clone(), packet.clone()));
                Ok(vec![Outcome::ToController])
            }
            Action::SendAll => {
                self.push_history(at, packet.clone(), action.clone());
                let mut outcomes = Vec::new();
                if self.config.global_broadcast {
                    let others: Vec<SwitchId> = self
                        .topology
                        .switches()
                        .filter(|id| *id != at)
                        .cloned()
                        .collect();
                    for other in others {
                        self.enqueue(other.clone(), packet.clone(), origin);
                        outcomes.push(Outcome::ForwardedTo {
                            switch: other,
                            port: packet.headers.inport,
                        });
                    }
                } else {
                    // flood every linked port except the one the packet came in on
                    let exits: Vec<u64> = self
                        .topology
                        .linked_ports(at)
                        .filter(|port| *port != packet.headers.inport)
                        .collect();
                    for port in exits {
                        let (peer, peer_port) = self.topology.peer_of(at, port).unwrap().clone();
                        let mut copy = packet.clone();
                        copy.headers.inport = peer_port;
                        self.enqueue(peer.clone(), copy, origin);
                        outcomes.push(Outcome::ForwardedTo { switch: peer, port: peer_port });
                    }
                }
                Ok(outcomes)
            }
            Action::SendOut(port) => {
                if !self.topology.has_port(at, *port) {
                    return Err(EvalError::UnknownPort { switch: at.clone(), port: *port });
                }
                self.push_history(at, packet.clone(), action.clone());
                if let Some((peer, peer_port)) = self.topology.peer_of(at, *port).cloned() {
                    let mut copy = packet.clone();
                    copy.headers.inport = peer_port;
                    self.enqueue(peer.clone(), copy, origin);
                    Ok(vec![Outcome::ForwardedTo { switch: peer, port: peer_port }])
                } else if let Some(ip) = self.topology.host_at(at, *port) {
                    Ok(vec![Outcome::DeliveredToHost { ip }])
                } else {
                    Ok(vec![Outcome::Dropped(DropReason::UnlinkedPort)])
                }
            }
            Action::Change(field, value) => {
                // history records the packet state the change applies to
                self.push_history(at, packet.clone(), action.clone());
                packet.headers.set(*field, *value)?;
                Ok(vec![Outcome::HeaderChanged { field: *field, value: *value }])
            }
        }
    }

    /// Drains the pending queue FIFO, matching each packet against the live
    /// table of its switch. A table miss takes the configured default action.
    /// Per-packet problems never abort the drain; the records carry outcomes.
    pub fn process_pending(&mut self) -> Vec<ProcessingRecord> {
        let mut records = Vec::new();
        while let Some(PendingEntry { at, packet, origin }) = self.pending.pop_front() {
            let steps = self.steps.entry(origin).or_insert(0);
            if *steps >= self.config.hop_budget {
                records.push(ProcessingRecord {
                    switch: at,
                    packet,
                    matched: None,
                    outcomes: vec![Outcome::Dropped(DropReason::HopBudgetExceeded)],
                });
                continue;
            }
            *steps += 1;

            let hit = self
                .tables
                .get(&at)
                .and_then(|table| rule_lookup(table, &packet))
                .map(|(index, rule)| (index, rule.clone()));
            match hit {
                None => {
                    let outcomes = match self.config.default_action {
                        DefaultAction::SendController => {
                            self.push_history(&at, packet.clone(), Action::SendController);
                            self.inbox.push((at.clone(), packet.clone()));
                            vec![Outcome::ToController]
                        }
                        DefaultAction::Drop => vec![Outcome::Dropped(DropReason::TableMiss)],
                    };
                    records.push(ProcessingRecord { switch: at, packet, matched: None, outcomes });
                }
                Some((index, rule)) => {
                    let mut copy = packet.clone();
                    let mut outcomes = Vec::new();
                    for action in rule.actions() {
                        match self.apply(action, &mut copy, &at, origin) {
                            Ok(out) => outcomes.extend(out),
                            Err(_) => outcomes.push(Outcome::Dropped(DropReason::UnknownPort)),
                        }
                    }
                    if !outcomes.iter().any(Outcome::is_terminal) {
                        outcomes.push(Outcome::Dropped(DropReason::NoTerminalAction));
                    }
                    records.push(ProcessingRecord {
                        switch: at,
                        packet,
                        matched: Some((index, rule)),
                        outcomes,
                    });
                }
            }
        }
        records
    }

    fn enqueue(&mut self, at: SwitchId, packet: Packet, origin: u64) {
        self.pending.push_back(PendingEntry { at, packet, origin });
    }

    fn push_history(&mut self, at: &SwitchId, packet: Packet, action: Action) {
        self.history.entry(at.clone()).or_default().push((packet, action));
    }
}

/// Read-only snapshot handle over a fabric.
#[derive(Clone, Copy)]
pub struct FabricView<'a> {
    fabric: &'a Fabric,
}

impl<'a> FabricView<'a> {
    pub fn topology(&self) -> &'a Topology {
        &self.fabric.topology
    }

    pub fn inbox(&self) -> &'a [(SwitchId, Packet)] {
        &self.fabric.inbox
    }

    fn query_fn(&self, name: &str) -> Option<QueryFn> {
        self.fabric.queries.get(name).copied()
    }
}

/// Evaluates a query against a fabric snapshot.
pub fn query_eval(query: &QueryName, view: &FabricView) -> Result<Event, EvalError> {
    match query {
        QueryName::SwitchIds => Ok(Event::new(
            view.topology().switches().map(|id| Value::SwitchId(id.clone())).collect(),
        )),
        QueryName::SourceIps => Ok(Event::new(
            view.inbox()
                .iter()
                .map(|(_, pk)| {
                    Value::tuple(vec![Value::Ip(pk.headers.srcip), Value::Packet(pk.clone())])
                })
                .collect(),
        )),
        QueryName::ArrivedPackets => Ok(Event::new(
            view.inbox().iter().map(|(_, pk)| Value::Packet(pk.clone())).collect(),
        )),
        QueryName::Custom(name) => match view.query_fn(name) {
            Some(handler) => handler(view),
            None => Err(EvalError::UnknownQuery(name.clone())),
        },
    }
}

/// Forwarding port of the host a value refers to. Accepts an address or a
/// tuple whose first address component is used.
pub fn builtin_port(value: &Value, view: &FabricView) -> Result<u64, EvalError> {
    let ip = match value {
        Value::Ip(ip) => *ip,
        Value::Tuple(items) => items
            .iter()
            .find_map(|v| match v {
                Value::Ip(ip) => Some(*ip),
                _ => None,
            })
            .ok_or_else(|| EvalError::TypeMismatch {
                expected: "a host address (or a tuple containing one)".to_string(),
                found: value.to_string(),
            })?,
        other => {
            return Err(EvalError::TypeMismatch {
                expected: "a host address (or a tuple containing one)".to_string(),
                found: other.to_string(),
            })
        }
    };
    match view.topology().host_point(&ip) {
        Some((_, port)) => Ok(*port),
        None => Err(EvalError::UnknownHost(ip)),
    }
}

/// Attachment switch of the host a value refers to (an address, a packet's
/// source, or a tuple containing either), required to occur in `ids`.
pub fn builtin_switch(value: &Value, ids: &Event, view: &FabricView) -> Result<SwitchId, EvalError> {
    let mut allowed = Vec::with_capacity(ids.len());
    for item in ids.iter() {
        match item {
            Value::SwitchId(id) => allowed.push(id),
            other => {
                return Err(EvalError::TypeMismatch {
                    expected: "an event of switch ids".to_string(),
                    found: other.to_string(),
                })
            }
        }
    }
    let ip = host_ref(value).ok_or_else(|| EvalError::TypeMismatch {
        expected: "a host reference (address or packet)".to_string(),
        found: value.to_string(),
    })?;
    let (switch, _) = view.topology().host_point(&ip).ok_or(EvalError::UnknownHost(ip))?;
    if allowed.contains(&switch) {
        Ok(switch.clone())
    } else {
        Err(EvalError::SwitchNotInEvent(switch.clone()))
    }
}

fn host_ref(value: &Value) -> Option<Ipv4Addr> {
    match value {
        Value::Ip(ip) => Some(*ip),
        Value::Packet(pk) => Some(pk.headers.srcip),
        Value::Tuple(items) => {
            if let Some(ip) = items.iter().find_map(|v| match v {
                Value::Ip(ip) => Some(*ip),
                _ => None,
            }) {
                return Some(ip);
            }
            items.iter().find_map(|v| match v {
                Value::Packet(pk) => Some(pk.headers.srcip),
                _ => None,
            })
        }
        _ => None,
    }
}
