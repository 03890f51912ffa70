//! Core value and state model: the typed value universe, events, patterns,
//! actions, rules, flow tables, and the semantic state triple threaded by the
//! statement executor.
//!
//! Everything here is immutable after construction; operations never mutate
//! their inputs.

mod display;

use std::collections::BTreeMap;
use std::net::Ipv4Addr;

use crate::error::TypeError;

/// Opaque switch identifier, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SwitchId(pub String);

impl SwitchId {
    pub fn new(name: impl Into<String>) -> Self {
        SwitchId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// 48-bit Ethernet address, stored in the low bits of a u64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EthAddr(pub u64);

impl EthAddr {
    pub const MASK: u64 = 0xffff_ffff_ffff;

    pub fn new(bits: u64) -> Self {
        EthAddr(bits & Self::MASK)
    }
}

/// Packet header fields, in canonical print order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeaderField {
    SrcIp,
    DstIp,
    SrcPort,
    DstPort,
    InPort,
    EthSrc,
    EthDst,
}

impl HeaderField {
    pub const ALL: [HeaderField; 7] = [
        HeaderField::SrcIp,
        HeaderField::DstIp,
        HeaderField::SrcPort,
        HeaderField::DstPort,
        HeaderField::InPort,
        HeaderField::EthSrc,
        HeaderField::EthDst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeaderField::SrcIp => "srcip",
            HeaderField::DstIp => "dstip",
            HeaderField::SrcPort => "srcport",
            HeaderField::DstPort => "dstport",
            HeaderField::InPort => "inport",
            HeaderField::EthSrc => "ethsrc",
            HeaderField::EthDst => "ethdst",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        HeaderField::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// A concrete header value; each field admits exactly one variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeaderValue {
    Ip(Ipv4Addr),
    Num(u64),
    Eth(EthAddr),
}

impl HeaderValue {
    /// True when this value may be stored in the given field.
    pub fn compatible_with(&self, field: HeaderField) -> bool {
        matches!(
            (field, self),
            (HeaderField::SrcIp | HeaderField::DstIp, HeaderValue::Ip(_))
                | (
                    HeaderField::SrcPort | HeaderField::DstPort | HeaderField::InPort,
                    HeaderValue::Num(_)
                )
                | (HeaderField::EthSrc | HeaderField::EthDst, HeaderValue::Eth(_))
        )
    }
}

/// Full header record; every field is always present.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Headers {
    pub srcip: Ipv4Addr,
    pub dstip: Ipv4Addr,
    pub srcport: u64,
    pub dstport: u64,
    pub inport: u64,
    pub ethsrc: EthAddr,
    pub ethdst: EthAddr,
}

impl Headers {
    pub fn get(&self, field: HeaderField) -> HeaderValue {
        match field {
            HeaderField::SrcIp => HeaderValue::Ip(self.srcip),
            HeaderField::DstIp => HeaderValue::Ip(self.dstip),
            HeaderField::SrcPort => HeaderValue::Num(self.srcport),
            HeaderField::DstPort => HeaderValue::Num(self.dstport),
            HeaderField::InPort => HeaderValue::Num(self.inport),
            HeaderField::EthSrc => HeaderValue::Eth(self.ethsrc),
            HeaderField::EthDst => HeaderValue::Eth(self.ethdst),
        }
    }

    pub fn set(&mut self, field: HeaderField, value: HeaderValue) -> Result<(), TypeError> {
        if !value.compatible_with(field) {
            return Err(TypeError::IncompatibleHeaderValue { field });
        }
        match (field, value) {
            (HeaderField::SrcIp, HeaderValue::Ip(ip)) => self.srcip = ip,
            (HeaderField::DstIp, HeaderValue::Ip(ip)) => self.dstip = ip,
            (HeaderField::SrcPort, HeaderValue::Num(n)) => self.srcport = n,
            (HeaderField::DstPort, HeaderValue::Num(n)) => self.dstport = n,
            (HeaderField::InPort, HeaderValue::Num(n)) => self.inport = n,
            (HeaderField::EthSrc, HeaderValue::Eth(e)) => self.ethsrc = e,
            (HeaderField::EthDst, HeaderValue::Eth(e)) => self.ethdst = e,
            _ => unreachable!("compatibility checked above"),
        }
        Ok(())
    }
}

/// A packet: headers plus payload, with a run-unique id for trace identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    pub headers: Headers,
    pub payload: Vec<u8>,
    pub uid: u64,
}

impl Packet {
    /// Exact-match pattern constraining all header fields to this packet's values.
    pub fn exact_pattern(&self) -> Pattern {
        let mut constraints = BTreeMap::new();
        for field in HeaderField::ALL {
            constraints.insert(field, self.headers.get(field));
        }
        Pattern { constraints }
    }
}

/// Conjunction of exact header constraints; the empty pattern matches all packets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Pattern {
    constraints: BTreeMap<HeaderField, HeaderValue>,
}

impl Pattern {
    /// The match-all pattern.
    pub fn any() -> Self {
        Pattern::default()
    }

    pub fn new(
        pairs: impl IntoIterator<Item = (HeaderField, HeaderValue)>,
    ) -> Result<Self, TypeError> {
        let mut constraints = BTreeMap::new();
        for (field, value) in pairs {
            if !value.compatible_with(field) {
                return Err(TypeError::IncompatibleHeaderValue { field });
            }
            constraints.insert(field, value);
        }
        Ok(Pattern { constraints })
    }

    /// Single-constraint pattern, e.g. `srcport(80)`.
    pub fn field(field: HeaderField, value: HeaderValue) -> Result<Self, TypeError> {
        Pattern::new([(field, value)])
    }

    pub fn constraints(&self) -> impl Iterator<Item = (HeaderField, HeaderValue)> + '_ {
        self.constraints.iter().map(|(f, v)| (*f, *v))
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Pattern with one constraint removed; used by the monotonicity tests.
    pub fn without(&self, field: HeaderField) -> Pattern {
        let mut constraints = self.constraints.clone();
        constraints.remove(&field);
        Pattern { constraints }
    }
}

/// Per-packet switch behaviour.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Action {
    SendController,
    SendAll,
    SendOut(u64),
    Change(HeaderField, HeaderValue),
}

impl Action {
    pub fn change(field: HeaderField, value: HeaderValue) -> Result<Self, TypeError> {
        if !value.compatible_with(field) {
            return Err(TypeError::IncompatibleHeaderValue { field });
        }
        Ok(Action::Change(field, value))
    }
}

/// An action constructor awaiting its parameter, as stored in rule-construction
/// triples. Nullary actions need no constructor form; `sendall` and
/// `sendcontroller` appear directly as [`Action`] values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActionCtor {
    SendOut,
    Change(HeaderField),
}

/// A flow-table rule: pattern plus a non-empty action list.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub pattern: Pattern,
    actions: Vec<Action>,
}

impl Rule {
    pub fn new(pattern: Pattern, actions: Vec<Action>) -> Result<Self, TypeError> {
        if actions.is_empty() {
            return Err(TypeError::EmptyActions);
        }
        for action in &actions {
            if let Action::Change(field, value) = action {
                if !value.compatible_with(*field) {
                    return Err(TypeError::IncompatibleHeaderValue { field: *field });
                }
            }
        }
        Ok(Rule { pattern, actions })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }
}

/// Priority-ordered rule list; earlier rules shadow later ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RuleList(pub Vec<Rule>);

impl RuleList {
    pub fn new(rules: Vec<Rule>) -> Self {
        RuleList(rules)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule> {
        self.0.iter()
    }
}

/// Deduplicated value set with stable insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ValueSet {
    items: Vec<Value>,
}

impl ValueSet {
    pub fn empty() -> Self {
        ValueSet::default()
    }

    /// Builds a set, rejecting wildcards and type-mixing elements.
    pub fn from_values(values: impl IntoIterator<Item = Value>) -> Result<Self, TypeError> {
        let mut set = ValueSet::empty();
        for v in values {
            set.insert(v)?;
        }
        Ok(set)
    }

    /// Inserts a value unless already present. Errors on wildcards and on
    /// elements whose type does not unify with the existing elements.
    pub fn insert(&mut self, value: Value) -> Result<(), TypeError> {
        if matches!(value, Value::Wildcard) {
            return Err(TypeError::UntypeableValue);
        }
        let vt = lenient_type(&value);
        if let Some(first) = self.items.first() {
            if unify(&lenient_type(first), &vt).is_none() {
                return Err(TypeError::Heterogeneous { index: self.items.len() });
            }
        }
        if !self.items.contains(&value) {
            self.items.push(value);
        }
        Ok(())
    }

    pub fn contains(&self, value: &Value) -> bool {
        self.items.contains(value)
    }

    /// True when every element of `self` is an element of `other`.
    pub fn subset_of(&self, other: &ValueSet) -> bool {
        self.items.iter().all(|v| other.contains(v))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.items.iter()
    }
}

/// The value universe. `Wildcard` is the `_` placeholder and is only legal as
/// the third component of a rule-construction triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Nat(u64),
    Bool(bool),
    SwitchId(SwitchId),
    Port(u64),
    Ip(Ipv4Addr),
    Packet(Packet),
    Pattern(Pattern),
    Action(Action),
    ActionCtor(ActionCtor),
    Rules(RuleList),
    Set(ValueSet),
    Tuple(Vec<Value>),
    Wildcard,
}

impl Value {
    /// Flat n-ary tuple; callers must supply at least two components.
    pub fn tuple(items: Vec<Value>) -> Value {
        debug_assert!(items.len() >= 2, "tuples have arity >= 2");
        Value::Tuple(items)
    }

    pub fn switch(name: impl Into<String>) -> Value {
        Value::SwitchId(SwitchId::new(name))
    }
}

/// Structural types of values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Type {
    Nat,
    Bool,
    SwitchId,
    Port,
    IpAddr,
    Packet,
    Pattern,
    Action,
    RuleList,
    Set(Box<Type>),
    Tuple(Vec<Type>),
    /// Type of the empty event and the empty set; unifies with everything.
    Any,
}

/// The unique structural type of a value. Wildcards (and values containing
/// them) have no type.
pub fn value_type(v: &Value) -> Result<Type, TypeError> {
    match v {
        Value::Nat(_) => Ok(Type::Nat),
        Value::Bool(_) => Ok(Type::Bool),
        Value::SwitchId(_) => Ok(Type::SwitchId),
        Value::Port(_) => Ok(Type::Port),
        Value::Ip(_) => Ok(Type::IpAddr),
        Value::Packet(_) => Ok(Type::Packet),
        Value::Pattern(_) => Ok(Type::Pattern),
        Value::Action(_) | Value::ActionCtor(_) => Ok(Type::Action),
        Value::Rules(_) => Ok(Type::RuleList),
        Value::Set(s) => {
            let mut elem = Type::Any;
            for item in s.iter() {
                let t = value_type(item)?;
                elem = unify(&elem, &t).ok_or(TypeError::UntypeableValue)?;
            }
            Ok(Type::Set(Box::new(elem)))
        }
        Value::Tuple(items) => {
            let types = items.iter().map(value_type).collect::<Result<Vec<_>, _>>()?;
            Ok(Type::Tuple(types))
        }
        Value::Wildcard => Err(TypeError::UntypeableValue),
    }
}

/// Like [`value_type`] but total: wildcards are typed `Any` so that events
/// carrying `_` in rule-construction triples still typecheck.
pub fn lenient_type(v: &Value) -> Type {
    match v {
        Value::Wildcard => Type::Any,
        Value::Tuple(items) => Type::Tuple(items.iter().map(lenient_type).collect()),
        Value::Set(s) => {
            let mut elem = Type::Any;
            for item in s.iter() {
                match unify(&elem, &lenient_type(item)) {
                    Some(t) => elem = t,
                    // set constructors reject mixed types; stay total anyway
                    None => return Type::Set(Box::new(Type::Any)),
                }
            }
            Type::Set(Box::new(elem))
        }
        other => value_type(other).expect("only wildcard-bearing values are untypeable"),
    }
}

/// Structural unification; `Any` absorbs into the other side.
pub fn unify(a: &Type, b: &Type) -> Option<Type> {
    match (a, b) {
        (Type::Any, t) | (t, Type::Any) => Some(t.clone()),
        (Type::Set(x), Type::Set(y)) => Some(Type::Set(Box::new(unify(x, y)?))),
        (Type::Tuple(xs), Type::Tuple(ys)) => {
            if xs.len() != ys.len() {
                return None;
            }
            let items = xs
                .iter()
                .zip(ys)
                .map(|(x, y)| unify(x, y))
                .collect::<Option<Vec<_>>>()?;
            Some(Type::Tuple(items))
        }
        _ if a == b => Some(a.clone()),
        _ => None,
    }
}

/// Finite homogeneous sequence of values; the payload of queries and transformers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Event(pub Vec<Value>);

impl Event {
    pub fn new(values: Vec<Value>) -> Self {
        Event(values)
    }

    pub fn empty() -> Self {
        Event(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Value> {
        self.0.iter()
    }
}

/// Shared type of an event's values. The empty event types as `Any`.
pub fn event_typecheck(ev: &Event) -> Result<Type, TypeError> {
    let mut shared = Type::Any;
    for (index, v) in ev.iter().enumerate() {
        let t = lenient_type(v);
        match unify(&shared, &t) {
            Some(u) => shared = u,
            None => return Err(TypeError::Heterogeneous { index }),
        }
    }
    Ok(shared)
}

/// True iff every constraint of `p` is satisfied by the packet's headers.
pub fn pattern_matches(p: &Pattern, pk: &Packet) -> bool {
    p.constraints().all(|(field, value)| pk.headers.get(field) == value)
}

/// First rule in priority order whose pattern matches, with its index.
pub fn rule_lookup<'a>(rl: &'a RuleList, pk: &Packet) -> Option<(usize, &'a Rule)> {
    rl.iter()
        .enumerate()
        .find(|(_, rule)| pattern_matches(&rule.pattern, pk))
}

/// Staged (switch, rule-list) bindings awaiting Register. Bindings keep
/// insertion order and deduplicate exact pairs, so the same switch may appear
/// several times with different rule lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RuleAssignment {
    bindings: Vec<(SwitchId, RuleList)>,
}

impl RuleAssignment {
    pub fn empty() -> Self {
        RuleAssignment::default()
    }

    pub fn new(bindings: Vec<(SwitchId, RuleList)>) -> Self {
        let mut out = RuleAssignment::empty();
        for (id, rl) in bindings {
            out.insert(id, rl);
        }
        out
    }

    /// Adds a binding unless an identical one is already present.
    pub fn insert(&mut self, id: SwitchId, rules: RuleList) {
        let pair = (id, rules);
        if !self.bindings.contains(&pair) {
            self.bindings.push(pair);
        }
    }

    /// Set union preserving left-to-right insertion order.
    pub fn union(&self, other: &RuleAssignment) -> RuleAssignment {
        let mut out = self.clone();
        for (id, rl) in &other.bindings {
            out.insert(id.clone(), rl.clone());
        }
        out
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(SwitchId, RuleList)> {
        self.bindings.iter()
    }
}

/// Per-switch flow tables (sigma).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SwitchState {
    tables: BTreeMap<SwitchId, RuleList>,
}

impl SwitchState {
    pub fn empty() -> Self {
        SwitchState::default()
    }

    pub fn table(&self, id: &SwitchId) -> Option<&RuleList> {
        self.tables.get(id)
    }

    /// Appends rules to a switch table, creating it when missing. Appending
    /// preserves the priority of earlier-installed rules.
    pub fn append(&mut self, id: SwitchId, rules: &RuleList) {
        self.tables.entry(id).or_default().0.extend(rules.0.iter().cloned());
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SwitchId, &RuleList)> {
        self.tables.iter()
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }
}

/// What a program variable may hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Event(Event),
    Rules(RuleList),
    Assignment(RuleAssignment),
}

impl Binding {
    pub fn kind(&self) -> &'static str {
        match self {
            Binding::Event(_) => "an event",
            Binding::Rules(_) => "a rule list",
            Binding::Assignment(_) => "a rule assignment",
        }
    }
}

/// Program variable state (gamma). Unbound lookups are errors.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VarState {
    bindings: BTreeMap<String, Binding>,
}

impl VarState {
    pub fn empty() -> Self {
        VarState::default()
    }

    pub fn get(&self, name: &str) -> Option<&Binding> {
        self.bindings.get(name)
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Binding) {
        self.bindings.insert(name.into(), value);
    }

    /// Copy with one extra/updated binding; the original is untouched.
    pub fn with(&self, name: impl Into<String>, value: Binding) -> VarState {
        let mut next = self.clone();
        next.bind(name, value);
        next
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Binding)> {
        self.bindings.iter()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

/// The semantic state triple (sigma, gamma, ir).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MachineState {
    pub sigma: SwitchState,
    pub gamma: VarState,
    pub ir: RuleAssignment,
}

impl MachineState {
    pub fn empty() -> Self {
        MachineState::default()
    }
}
