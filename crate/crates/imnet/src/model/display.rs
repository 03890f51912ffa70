//! Canonical text forms for every model type. This is the single stable
//! serialization used by trace emission, binding files, and the golden tests;
//! `syntax::values` parses it back.

use std::fmt;

use super::*;

impl fmt::Display for SwitchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EthAddr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = self.0.to_be_bytes();
        write!(
            f,
            "{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}",
            b[2], b[3], b[4], b[5], b[6], b[7]
        )
    }
}

impl fmt::Display for HeaderValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeaderValue::Ip(ip) => write!(f, "{ip}"),
            HeaderValue::Num(n) => write!(f, "{n}"),
            HeaderValue::Eth(e) => write!(f, "{e}"),
        }
    }
}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pk{{uid: {}", self.uid)?;
        for field in HeaderField::ALL {
            write!(f, ", {}: {}", field.name(), self.headers.get(field))?;
        }
        if !self.payload.is_empty() {
            write!(f, ", payload: 0x")?;
            for byte in &self.payload {
                write!(f, "{byte:02x}")?;
            }
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "any");
        }
        if self.len() == 1 {
            let (field, value) = self.constraints().next().unwrap();
            return write!(f, "{}({})", field.name(), value);
        }
        write!(f, "{{")?;
        for (i, (field, value)) in self.constraints().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}: {}", field.name(), value)?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::SendController => write!(f, "sendcontroller"),
            Action::SendAll => write!(f, "sendall"),
            Action::SendOut(p) => write!(f, "sendout({p})"),
            Action::Change(field, value) => write!(f, "change({}, {})", field.name(), value),
        }
    }
}

impl fmt::Display for ActionCtor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionCtor::SendOut => write!(f, "sendout"),
            ActionCtor::Change(field) => write!(f, "change({})", field.name()),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, [", self.pattern)?;
        for (i, a) in self.actions().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "])")
    }
}

impl fmt::Display for RuleList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::SwitchId(id) => write!(f, "{id}"),
            Value::Port(p) => write!(f, "port({p})"),
            Value::Ip(ip) => write!(f, "{ip}"),
            Value::Packet(pk) => write!(f, "{pk}"),
            Value::Pattern(p) => write!(f, "{p}"),
            Value::Action(a) => write!(f, "{a}"),
            Value::ActionCtor(c) => write!(f, "{c}"),
            Value::Rules(rl) => write!(f, "{rl}"),
            Value::Set(s) => write!(f, "{s}"),
            Value::Tuple(items) => {
                write!(f, "(")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ")")
            }
            Value::Wildcard => write!(f, "_"),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for RuleAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (id, rl)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({id}, {rl})")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for SwitchState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (id, rl)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({id}, {rl})")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Binding::Event(ev) => write!(f, "{ev}"),
            Binding::Rules(rl) => write!(f, "{rl}"),
            Binding::Assignment(ir) => write!(f, "{ir}"),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Nat => write!(f, "nat"),
            Type::Bool => write!(f, "bool"),
            Type::SwitchId => write!(f, "switch-id"),
            Type::Port => write!(f, "port"),
            Type::IpAddr => write!(f, "ip"),
            Type::Packet => write!(f, "packet"),
            Type::Pattern => write!(f, "pattern"),
            Type::Action => write!(f, "action"),
            Type::RuleList => write!(f, "rule-list"),
            Type::Set(t) => write!(f, "set<{t}>"),
            Type::Tuple(items) => {
                write!(f, "(")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Type::Any => write!(f, "any"),
        }
    }
}
