//! Brute-force reference simulator used to cross-check the fabric. It shares
//! the model's data types but none of its decision logic: matching is a
//! direct field-by-field conjunction, first-match is an exhaustive scan
//! taking the minimal index, and the drain loop, flood set, and budget
//! accounting are reimplemented over plain vectors.

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use rand::rngs::StdRng;
use rand::Rng;

use imnet::fabric::{
    DefaultAction, DropReason, Fabric, FabricConfig, Outcome, ProcessingRecord, Topology,
};
use imnet::model::{
    Action, EthAddr, HeaderField, HeaderValue, Headers, Packet, Pattern, Rule, RuleList, SwitchId,
    SwitchState,
};

/// Raw scenario data both simulators are built from.
#[derive(Debug, Clone)]
pub struct RawScenario {
    pub switches: Vec<(String, Vec<u64>)>,
    pub links: Vec<((String, u64), (String, u64))>,
    pub hosts: Vec<(Ipv4Addr, String, u64)>,
    pub rules: Vec<(String, Vec<Rule>)>,
    pub injections: Vec<(String, Packet)>,
}

impl RawScenario {
    pub fn build_topology(&self) -> Topology {
        let mut builder = Topology::builder();
        for (id, ports) in &self.switches {
            builder = builder.switch(id.clone(), ports.iter().copied());
        }
        for ((a, ap), (b, bp)) in &self.links {
            builder = builder.link(a.clone(), *ap, b.clone(), *bp);
        }
        for (ip, id, port) in &self.hosts {
            builder = builder.host(*ip, id.clone(), *port);
        }
        builder.build().unwrap()
    }

    /// Builds the real fabric with tables installed and packets injected.
    pub fn build_fabric(&self) -> Fabric {
        let mut fabric = Fabric::new(self.build_topology(), FabricConfig::default());
        let mut sigma = SwitchState::empty();
        for (id, rules) in &self.rules {
            sigma.append(SwitchId::new(id.clone()), &RuleList::new(rules.clone()));
        }
        fabric.sync_tables(&sigma).unwrap();
        for (at, packet) in &self.injections {
            fabric.inject_packet(&SwitchId::new(at.clone()), packet.clone()).unwrap();
        }
        fabric
    }
}

/// Comparable record form shared by both simulators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonRecord {
    pub switch: String,
    pub uid: u64,
    pub headers: Headers,
    pub matched: Option<usize>,
    pub outcomes: Vec<Outcome>,
}

pub fn canon_fabric_records(records: &[ProcessingRecord]) -> Vec<CanonRecord> {
    records
        .iter()
        .map(|r| CanonRecord {
            switch: r.switch.as_str().to_string(),
            uid: r.packet.uid,
            headers: r.packet.headers.clone(),
            matched: r.matched.as_ref().map(|(index, _)| *index),
            outcomes: r.outcomes.clone(),
        })
        .collect()
}

/// The naive simulator.
pub struct NaiveSim {
    scenario: RawScenario,
    budget: u64,
    default_action: DefaultAction,
    queue: Vec<(String, Packet, u64)>,
    steps: BTreeMap<u64, u64>,
    pub inbox: Vec<(String, u64)>,
    pub records: Vec<CanonRecord>,
}

impl NaiveSim {
    pub fn new(scenario: RawScenario) -> Self {
        let queue = scenario
            .injections
            .iter()
            .map(|(at, pk)| (at.clone(), pk.clone(), pk.uid))
            .collect();
        NaiveSim {
            scenario,
            budget: FabricConfig::default().hop_budget,
            default_action: DefaultAction::SendController,
            queue,
            steps: BTreeMap::new(),
            inbox: Vec::new(),
            records: Vec::new(),
        }
    }

    fn ports_of(&self, switch: &str) -> &[u64] {
        self.scenario
            .switches
            .iter()
            .find(|(id, _)| id == switch)
            .map(|(_, ports)| ports.as_slice())
            .unwrap_or(&[])
    }

    fn peer_of(&self, switch: &str, port: u64) -> Option<(String, u64)> {
        for ((a, ap), (b, bp)) in &self.scenario.links {
            if a == switch && *ap == port {
                return Some((b.clone(), *bp));
            }
            if b == switch && *bp == port {
                return Some((a.clone(), *ap));
            }
        }
        None
    }

    fn host_at(&self, switch: &str, port: u64) -> Option<Ipv4Addr> {
        self.scenario
            .hosts
            .iter()
            .find(|(_, id, p)| id == switch && *p == port)
            .map(|(ip, _, _)| *ip)
    }

    fn rules_of(&self, switch: &str) -> &[Rule] {
        self.scenario
            .rules
            .iter()
            .find(|(id, _)| id == switch)
            .map(|(_, rules)| rules.as_slice())
            .unwrap_or(&[])
    }

    /// Direct conjunction over every header field.
    fn matches(pattern: &Pattern, headers: &Headers) -> bool {
        pattern.constraints().all(|(field, value)| match field {
            HeaderField::SrcIp => value == HeaderValue::Ip(headers.srcip),
            HeaderField::DstIp => value == HeaderValue::Ip(headers.dstip),
            HeaderField::SrcPort => value == HeaderValue::Num(headers.srcport),
            HeaderField::DstPort => value == HeaderValue::Num(headers.dstport),
            HeaderField::InPort => value == HeaderValue::Num(headers.inport),
            HeaderField::EthSrc => value == HeaderValue::Eth(headers.ethsrc),
            HeaderField::EthDst => value == HeaderValue::Eth(headers.ethdst),
        })
    }

    /// Exhaustive scan: all matching indexes, then the minimum.
    pub fn first_match(rules: &[Rule], headers: &Headers) -> Option<usize> {
        let all: Vec<usize> = rules
            .iter()
            .enumerate()
            .filter(|(_, rule)| Self::matches(&rule.pattern, headers))
            .map(|(index, _)| index)
            .collect();
        all.into_iter().min()
    }

    fn apply(&mut self, action: &Action, copy: &mut Packet, at: &str, origin: u64) -> Vec<Outcome> {
        match action {
            Action::SendController => {
                self.inbox.push((at.to_string(), copy.uid));
                vec![Outcome::ToController]
            }
            Action::SendAll => {
                let mut exits: Vec<u64> = self
                    .ports_of(at)
                    .iter()
                    .copied()
                    .filter(|port| self.peer_of(at, *port).is_some())
                    .filter(|port| *port != copy.headers.inport)
                    .collect();
                exits.sort_unstable();
                exits.dedup();
                let mut outcomes = Vec::new();
                for port in exits {
                    let (peer, peer_port) = self.peer_of(at, port).unwrap();
                    let mut fwd = copy.clone();
                    fwd.headers.inport = peer_port;
                    self.queue.push((peer.clone(), fwd, origin));
                    outcomes.push(Outcome::ForwardedTo {
                        switch: SwitchId::new(peer),
                        port: peer_port,
                    });
                }
                outcomes
            }
            Action::SendOut(port) => {
                if !self.ports_of(at).contains(port) {
                    return vec![Outcome::Dropped(DropReason::UnknownPort)];
                }
                if let Some((peer, peer_port)) = self.peer_of(at, *port) {
                    let mut fwd = copy.clone();
                    fwd.headers.inport = peer_port;
                    self.queue.push((peer.clone(), fwd, origin));
                    vec![Outcome::ForwardedTo { switch: SwitchId::new(peer), port: peer_port }]
                } else if let Some(ip) = self.host_at(at, *port) {
                    vec![Outcome::DeliveredToHost { ip }]
                } else {
                    vec![Outcome::Dropped(DropReason::UnlinkedPort)]
                }
            }
            Action::Change(field, value) => {
                match (field, value) {
                    (HeaderField::SrcIp, HeaderValue::Ip(ip)) => copy.headers.srcip = *ip,
                    (HeaderField::DstIp, HeaderValue::Ip(ip)) => copy.headers.dstip = *ip,
                    (HeaderField::SrcPort, HeaderValue::Num(n)) => copy.headers.srcport = *n,
                    (HeaderField::DstPort, HeaderValue::Num(n)) => copy.headers.dstport = *n,
                    (HeaderField::InPort, HeaderValue::Num(n)) => copy.headers.inport = *n,
                    (HeaderField::EthSrc, HeaderValue::Eth(e)) => copy.headers.ethsrc = *e,
                    (HeaderField::EthDst, HeaderValue::Eth(e)) => copy.headers.ethdst = *e,
                    _ => panic!("incompatible change action in scenario"),
                }
                vec![Outcome::HeaderChanged { field: *field, value: *value }]
            }
        }
    }

    pub fn drain(&mut self) {
        while !self.queue.is_empty() {
            let (at, packet, origin) = self.queue.remove(0);
            let used = self.steps.entry(origin).or_insert(0);
            if *used >= self.budget {
                self.records.push(CanonRecord {
                    switch: at,
                    uid: packet.uid,
                    headers: packet.headers,
                    matched: None,
                    outcomes: vec![Outcome::Dropped(DropReason::HopBudgetExceeded)],
                });
                continue;
            }
            *used += 1;
            let rules: Vec<Rule> = self.rules_of(&at).to_vec();
            match Self::first_match(&rules, &packet.headers) {
                None => {
                    let outcomes = match self.default_action {
                        DefaultAction::SendController => {
                            self.inbox.push((at.clone(), packet.uid));
                            vec![Outcome::ToController]
                        }
                        DefaultAction::Drop => vec![Outcome::Dropped(DropReason::TableMiss)],
                    };
                    self.records.push(CanonRecord {
                        switch: at,
                        uid: packet.uid,
                        headers: packet.headers,
                        matched: None,
                        outcomes,
                    });
                }
                Some(index) => {
                    let mut copy = packet.clone();
                    let mut outcomes = Vec::new();
                    for action in rules[index].actions() {
                        outcomes.extend(self.apply(action, &mut copy, &at, origin));
                    }
                    if !outcomes.iter().any(Outcome::is_terminal) {
                        outcomes.push(Outcome::Dropped(DropReason::NoTerminalAction));
                    }
                    self.records.push(CanonRecord {
                        switch: at,
                        uid: packet.uid,
                        headers: packet.headers,
                        matched: Some(index),
                        outcomes,
                    });
                }
            }
        }
    }
}

const SRC_PORTS: [u64; 3] = [80, 443, 8080];
const IPS: [[u8; 4]; 4] = [[10, 0, 0, 1], [10, 0, 0, 2], [10, 0, 0, 3], [10, 0, 0, 4]];

fn random_ip(rng: &mut StdRng) -> Ipv4Addr {
    let [a, b, c, d] = IPS[rng.random_range(0..IPS.len())];
    Ipv4Addr::new(a, b, c, d)
}

fn random_pattern(rng: &mut StdRng) -> Pattern {
    let mut pairs = Vec::new();
    if rng.random_bool(0.5) {
        pairs.push((
            HeaderField::SrcPort,
            HeaderValue::Num(SRC_PORTS[rng.random_range(0..SRC_PORTS.len())]),
        ));
    }
    if rng.random_bool(0.3) {
        pairs.push((HeaderField::InPort, HeaderValue::Num(rng.random_range(1..=4))));
    }
    if rng.random_bool(0.3) {
        pairs.push((HeaderField::SrcIp, HeaderValue::Ip(random_ip(rng))));
    }
    Pattern::new(pairs).unwrap()
}

fn random_action(rng: &mut StdRng, ports: &[u64]) -> Action {
    match rng.random_range(0..5) {
        0 => Action::SendController,
        1 => Action::SendAll,
        2 => Action::SendOut(ports[rng.random_range(0..ports.len())]),
        // sometimes a port the switch does not have
        3 => Action::SendOut(9),
        _ => Action::Change(HeaderField::DstPort, HeaderValue::Num(rng.random_range(1..9999))),
    }
}

fn random_packet(rng: &mut StdRng, uid: u64, inport: u64) -> Packet {
    Packet {
        headers: Headers {
            srcip: random_ip(rng),
            dstip: random_ip(rng),
            srcport: SRC_PORTS[rng.random_range(0..SRC_PORTS.len())],
            dstport: rng.random_range(1..9999),
            inport,
            ethsrc: EthAddr::new(rng.random_range(1..1000)),
            ethdst: EthAddr::new(rng.random_range(1..1000)),
        },
        payload: Vec::new(),
        uid,
    }
}

/// Random topology of 2..=4 switches with random links, rules (<= 6 per
/// switch), hosts, and `packets` injected packets.
pub fn random_scenario(rng: &mut StdRng, packets: usize) -> RawScenario {
    let switch_count = rng.random_range(2..=4);
    let mut switches = Vec::new();
    let mut free: Vec<(String, u64)> = Vec::new();
    for i in 0..switch_count {
        let id = format!("s{i}");
        let ports: Vec<u64> = (1..=rng.random_range(2..=4)).collect();
        for port in &ports {
            free.push((id.clone(), *port));
        }
        switches.push((id, ports));
    }

    // link random pairs of free ports on distinct switches
    let mut links = Vec::new();
    let link_attempts = rng.random_range(1..=switch_count + 1);
    for _ in 0..link_attempts {
        if free.len() < 2 {
            break;
        }
        let a = free.remove(rng.random_range(0..free.len()));
        let partners: Vec<usize> = free
            .iter()
            .enumerate()
            .filter(|(_, (id, _))| *id != a.0)
            .map(|(index, _)| index)
            .collect();
        if partners.is_empty() {
            continue;
        }
        let b = free.remove(partners[rng.random_range(0..partners.len())]);
        links.push((a, b));
    }

    // a couple of hosts on leftover ports
    let mut hosts = Vec::new();
    for [a, b, c, d] in IPS {
        if free.is_empty() || hosts.len() >= 2 {
            break;
        }
        let (id, port) = free.remove(rng.random_range(0..free.len()));
        hosts.push((Ipv4Addr::new(a, b, c, d), id, port));
    }

    let mut rules = Vec::new();
    for (id, ports) in &switches {
        let count = rng.random_range(0..=6);
        let list: Vec<Rule> = (0..count)
            .map(|_| {
                Rule::new(random_pattern(rng), vec![random_action(rng, ports)])
                    .unwrap()
            })
            .collect();
        rules.push((id.clone(), list));
    }

    let mut injections = Vec::new();
    for uid in 1..=packets as u64 {
        let (id, ports) = &switches[rng.random_range(0..switches.len())];
        let inport = ports[rng.random_range(0..ports.len())];
        injections.push((id.clone(), random_packet(rng, uid, inport)));
    }

    RawScenario { switches, links, hosts, rules, injections }
}

/// (switch, packet uid) pairs summarizing a controller inbox.
pub type InboxSummary = Vec<(String, u64)>;

/// Runs both simulators over a scenario; returns (fabric records, naive
/// records, fabric inbox summary, naive inbox summary).
pub fn run_both(
    scenario: &RawScenario,
) -> (Vec<CanonRecord>, Vec<CanonRecord>, InboxSummary, InboxSummary) {
    let mut fabric = scenario.build_fabric();
    let records = fabric.process_pending();
    let fabric_inbox: Vec<(String, u64)> = fabric
        .inbox()
        .iter()
        .map(|(id, pk)| (id.as_str().to_string(), pk.uid))
        .collect();

    let mut naive = NaiveSim::new(scenario.clone());
    naive.drain();
    (canon_fabric_records(&records), naive.records.clone(), fabric_inbox, naive.inbox.clone())
}

/// Conservation accounting over canonical records: every processed packet is
/// accounted for, and queue growth equals the forwarded copies.
pub fn check_conservation(records: &[CanonRecord], injected: usize) -> Result<(), String> {
    let forwarded: usize = records
        .iter()
        .map(|r| {
            r.outcomes
                .iter()
                .filter(|o| matches!(o, Outcome::ForwardedTo { .. }))
                .count()
        })
        .sum();
    if records.len() != injected + forwarded {
        return Err(format!(
            "processed {} != injected {} + forwarded {}",
            records.len(),
            injected,
            forwarded
        ));
    }
    for (index, record) in records.iter().enumerate() {
        if !record.outcomes.iter().any(Outcome::is_terminal) {
            return Err(format!("record {index} has no terminal outcome"));
        }
    }
    Ok(())
}
