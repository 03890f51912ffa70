//! Parser for the canonical value text produced by the model's `Display`
//! impls: values, rules, events, bindings, and header records. Binding files
//! and trace files are read through this module.
//!
//! Brace forms disambiguate by context: at binding level `{...}` is an event;
//! nested inside a value it is a set, or a pattern when the braces hold
//! `field: value` pairs.

use crate::model::{
    Action, ActionCtor, Binding, Event, EthAddr, HeaderField, HeaderValue, Headers, Packet,
    Pattern, Rule, RuleList, Value, ValueSet,
};
use crate::syntax::lexer::{is_reserved, Token};
use crate::syntax::parser::{header_field, Cursor, ParseError};

/// Parses a standalone value (complete input).
pub fn parse_value(src: &str) -> Result<Value, ParseError> {
    let mut cur = Cursor::new(src)?;
    let v = value(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error(["end of input"]));
    }
    Ok(v)
}

/// Parses a variable binding: `{...}` is an event, `[...]` a rule list.
/// Rule assignments print in event-of-pairs form and read back as events;
/// `AddRules` coerces them.
pub fn parse_binding(src: &str) -> Result<Binding, ParseError> {
    let mut cur = Cursor::new(src)?;
    let b = binding(&mut cur)?;
    if !cur.at_eof() {
        return Err(cur.error(["end of input"]));
    }
    Ok(b)
}

/// Parses a bindings file: one `name = binding` entry per line, `#` comments.
pub fn parse_bindings_file(src: &str) -> Result<Vec<(String, Binding)>, ParseError> {
    let mut cur = Cursor::new(src)?;
    let mut out = Vec::new();
    while !cur.at_eof() {
        let name = cur.variable()?;
        cur.expect(Token::Equals)?;
        out.push((name, binding(&mut cur)?));
    }
    Ok(out)
}

/// Parses a full header record `{srcip: ..., ..., ethdst: ...[, payload: 0x..]}`
/// with all seven fields present; used by injection files.
pub fn parse_headers_record(src: &str) -> Result<(Headers, Vec<u8>), ParseError> {
    let mut cur = Cursor::new(src)?;
    let (uid, headers, payload) = record_fields(&mut cur, false)?;
    debug_assert!(uid.is_none());
    if !cur.at_eof() {
        return Err(cur.error(["end of input"]));
    }
    Ok((headers, payload))
}

pub(crate) fn binding(cur: &mut Cursor) -> Result<Binding, ParseError> {
    match cur.peek() {
        Token::LBrace => {
            cur.bump();
            let mut items = Vec::new();
            if *cur.peek() != Token::RBrace {
                items.push(value(cur)?);
                while *cur.peek() == Token::Comma {
                    cur.bump();
                    items.push(value(cur)?);
                }
            }
            cur.expect(Token::RBrace)?;
            Ok(Binding::Event(Event::new(items)))
        }
        Token::LBracket => Ok(Binding::Rules(rule_list(cur)?)),
        _ => Err(cur.error(["`{` (an event)", "`[` (a rule list)"])),
    }
}

pub(crate) fn value(cur: &mut Cursor) -> Result<Value, ParseError> {
    match cur.peek().clone() {
        Token::Nat(n) => {
            cur.bump();
            Ok(Value::Nat(n))
        }
        Token::Ip(ip) => {
            cur.bump();
            Ok(Value::Ip(ip))
        }
        Token::LBrace => parse_brace_value(cur),
        Token::LBracket => Ok(Value::Rules(rule_list(cur)?)),
        Token::LParen => tuple_value(cur),
        Token::Ident(word) => match word.as_str() {
            "true" => {
                cur.bump();
                Ok(Value::Bool(true))
            }
            "false" => {
                cur.bump();
                Ok(Value::Bool(false))
            }
            "any" => {
                cur.bump();
                Ok(Value::Pattern(Pattern::any()))
            }
            "port" => {
                cur.bump();
                cur.expect(Token::LParen)?;
                let n = cur.nat()?;
                cur.expect(Token::RParen)?;
                Ok(Value::Port(n))
            }
            "pk" => packet_value(cur),
            "sendall" | "sendcontroller" | "sendout" | "change" => parse_action_value(cur),
            "srcip" | "dstip" | "srcport" | "dstport" | "inport" | "ethsrc" | "ethdst" => {
                let field = header_field(cur)?;
                cur.expect(Token::LParen)?;
                let hv = header_value_for(cur, field)?;
                cur.expect(Token::RParen)?;
                Ok(Value::Pattern(
                    Pattern::field(field, hv)
                        .expect("field-parsed header values are compatible"),
                ))
            }
            _ if is_reserved(&word) => Err(cur.error(["a value"])),
            _ => {
                cur.bump();
                Ok(Value::switch(word))
            }
        },
        _ => Err(cur.error(["a value"])),
    }
}

/// `{...}`: empty braces are the empty set; `field:` pairs form a pattern;
/// anything else is a set of values.
pub(crate) fn parse_brace_value(cur: &mut Cursor) -> Result<Value, ParseError> {
    cur.expect(Token::LBrace)?;
    if *cur.peek() == Token::RBrace {
        cur.bump();
        return Ok(Value::Set(ValueSet::empty()));
    }
    let is_pattern = matches!(cur.peek(), Token::Ident(name) if HeaderField::from_name(name).is_some())
        && *cur.peek_at(1) == Token::Colon;
    if is_pattern {
        let mut pairs = Vec::new();
        loop {
            let field = header_field(cur)?;
            cur.expect(Token::Colon)?;
            let hv = header_value_for(cur, field)?;
            if pairs.iter().any(|(f, _)| *f == field) {
                return Err(cur.error([format!("at most one `{}` constraint", field.name())]));
            }
            pairs.push((field, hv));
            if *cur.peek() == Token::Comma {
                cur.bump();
            } else {
                break;
            }
        }
        cur.expect(Token::RBrace)?;
        let pattern = Pattern::new(pairs).expect("field-parsed header values are compatible");
        return Ok(Value::Pattern(pattern));
    }
    let mut items = vec![value(cur)?];
    while *cur.peek() == Token::Comma {
        cur.bump();
        items.push(value(cur)?);
    }
    cur.expect(Token::RBrace)?;
    let set = ValueSet::from_values(items).map_err(|e| cur.error([e.to_string()]))?;
    Ok(Value::Set(set))
}

/// Set literal for the Mix accumulator.
pub(crate) fn parse_set_literal(cur: &mut Cursor) -> Result<ValueSet, ParseError> {
    match parse_brace_value(cur)? {
        Value::Set(set) => Ok(set),
        _ => Err(cur.error(["a set literal"])),
    }
}

/// Actions and action constructors: bare `sendall`/`sendcontroller` are
/// complete actions, bare `sendout`/`change(field)` are constructors, and
/// `sendout(p)`/`change(field, v)` are complete.
pub(crate) fn parse_action_value(cur: &mut Cursor) -> Result<Value, ParseError> {
    let word = match cur.peek() {
        Token::Ident(w) => w.clone(),
        _ => return Err(cur.error(["an action"])),
    };
    match word.as_str() {
        "sendall" => {
            cur.bump();
            Ok(Value::Action(Action::SendAll))
        }
        "sendcontroller" => {
            cur.bump();
            Ok(Value::Action(Action::SendController))
        }
        "sendout" => {
            cur.bump();
            if *cur.peek() == Token::LParen {
                cur.bump();
                let port = cur.nat()?;
                cur.expect(Token::RParen)?;
                Ok(Value::Action(Action::SendOut(port)))
            } else {
                Ok(Value::ActionCtor(ActionCtor::SendOut))
            }
        }
        "change" => {
            cur.bump();
            cur.expect(Token::LParen)?;
            let field = header_field(cur)?;
            if *cur.peek() == Token::Comma {
                cur.bump();
                let hv = header_value_for(cur, field)?;
                cur.expect(Token::RParen)?;
                Ok(Value::Action(
                    Action::change(field, hv).expect("field-parsed header values are compatible"),
                ))
            } else {
                cur.expect(Token::RParen)?;
                Ok(Value::ActionCtor(ActionCtor::Change(field)))
            }
        }
        _ => Err(cur.error(["an action"])),
    }
}

fn tuple_value(cur: &mut Cursor) -> Result<Value, ParseError> {
    cur.expect(Token::LParen)?;
    let mut items = Vec::new();
    loop {
        if *cur.peek() == Token::Underscore {
            cur.bump();
            items.push(Value::Wildcard);
        } else {
            items.push(value(cur)?);
        }
        if *cur.peek() == Token::Comma {
            cur.bump();
        } else {
            break;
        }
    }
    cur.expect(Token::RParen)?;
    if items.len() < 2 {
        return Err(cur.error(["a tuple of at least two components"]));
    }
    for (i, item) in items.iter().enumerate() {
        if matches!(item, Value::Wildcard) && !(items.len() == 3 && i == 2) {
            return Err(cur.error(["`_` only as the third component of a rule-construction triple"]));
        }
    }
    Ok(Value::Tuple(items))
}

pub(crate) fn packet_value(cur: &mut Cursor) -> Result<Value, ParseError> {
    cur.bump(); // `pk`
    let (uid, headers, payload) = record_fields(cur, true)?;
    let uid = uid.ok_or_else(|| cur.error(["a `uid` field in the packet record"]))?;
    Ok(Value::Packet(Packet { headers, payload, uid }))
}

/// Parses `{key: value, ...}` records for packets (with uid) and injection
/// headers (without). All seven header fields are required; payload defaults
/// to empty.
fn record_fields(
    cur: &mut Cursor,
    allow_uid: bool,
) -> Result<(Option<u64>, Headers, Vec<u8>), ParseError> {
    cur.expect(Token::LBrace)?;
    let mut uid = None;
    let mut payload = Vec::new();
    let mut fields: Vec<(HeaderField, HeaderValue)> = Vec::new();
    loop {
        match cur.peek().clone() {
            Token::Ident(key) if key == "uid" && allow_uid => {
                cur.bump();
                cur.expect(Token::Colon)?;
                if uid.replace(cur.nat()?).is_some() {
                    return Err(cur.error(["a single `uid` field"]));
                }
            }
            Token::Ident(key) if key == "payload" => {
                cur.bump();
                cur.expect(Token::Colon)?;
                match cur.peek().clone() {
                    Token::Hex(bytes) => {
                        cur.bump();
                        payload = bytes;
                    }
                    _ => return Err(cur.error(["a `0x...` byte string"])),
                }
            }
            Token::Ident(_) => {
                let field = header_field(cur)?;
                cur.expect(Token::Colon)?;
                let hv = header_value_for(cur, field)?;
                if fields.iter().any(|(f, _)| *f == field) {
                    return Err(cur.error([format!("a single `{}` field", field.name())]));
                }
                fields.push((field, hv));
            }
            _ => return Err(cur.error(["a field name"])),
        }
        if *cur.peek() == Token::Comma {
            cur.bump();
        } else {
            break;
        }
    }
    cur.expect(Token::RBrace)?;
    for field in HeaderField::ALL {
        if !fields.iter().any(|(f, _)| *f == field) {
            return Err(cur.error([format!("a `{}` field (all header fields are required)", field.name())]));
        }
    }
    let get = |field: HeaderField| fields.iter().find(|(f, _)| *f == field).unwrap().1;
    let (HeaderValue::Ip(srcip), HeaderValue::Ip(dstip)) =
        (get(HeaderField::SrcIp), get(HeaderField::DstIp))
    else {
        unreachable!("ip fields parse as ip values")
    };
    let (HeaderValue::Num(srcport), HeaderValue::Num(dstport), HeaderValue::Num(inport)) = (
        get(HeaderField::SrcPort),
        get(HeaderField::DstPort),
        get(HeaderField::InPort),
    ) else {
        unreachable!("port fields parse as numbers")
    };
    let (HeaderValue::Eth(ethsrc), HeaderValue::Eth(ethdst)) =
        (get(HeaderField::EthSrc), get(HeaderField::EthDst))
    else {
        unreachable!("eth fields parse as macs")
    };
    let headers = Headers { srcip, dstip, srcport, dstport, inport, ethsrc, ethdst };
    Ok((uid, headers, payload))
}

fn rule_list(cur: &mut Cursor) -> Result<RuleList, ParseError> {
    cur.expect(Token::LBracket)?;
    let mut rules = Vec::new();
    if *cur.peek() != Token::RBracket {
        rules.push(rule(cur)?);
        while *cur.peek() == Token::Comma {
            cur.bump();
            rules.push(rule(cur)?);
        }
    }
    cur.expect(Token::RBracket)?;
    Ok(RuleList::new(rules))
}

fn rule(cur: &mut Cursor) -> Result<Rule, ParseError> {
    cur.expect(Token::LParen)?;
    let pattern = match value(cur)? {
        Value::Pattern(p) => p,
        _ => return Err(cur.error(["a pattern"])),
    };
    cur.expect(Token::Comma)?;
    cur.expect(Token::LBracket)?;
    let mut actions = Vec::new();
    loop {
        match parse_action_value(cur)? {
            Value::Action(a) => actions.push(a),
            Value::ActionCtor(_) => {
                return Err(cur.error(["a complete action (constructors need their argument)"]))
            }
            _ => unreachable!("parse_action_value yields actions"),
        }
        if *cur.peek() == Token::Comma {
            cur.bump();
        } else {
            break;
        }
    }
    cur.expect(Token::RBracket)?;
    cur.expect(Token::RParen)?;
    Rule::new(pattern, actions).map_err(|e| cur.error([e.to_string()]))
}

/// Parses the header value appropriate to a field: ip fields take dotted
/// quads, port fields numbers, eth fields MAC literals (or raw numbers).
fn header_value_for(cur: &mut Cursor, field: HeaderField) -> Result<HeaderValue, ParseError> {
    match field {
        HeaderField::SrcIp | HeaderField::DstIp => match cur.peek().clone() {
            Token::Ip(ip) => {
                cur.bump();
                Ok(HeaderValue::Ip(ip))
            }
            _ => Err(cur.error(["an IPv4 literal"])),
        },
        HeaderField::SrcPort | HeaderField::DstPort | HeaderField::InPort => {
            Ok(HeaderValue::Num(cur.nat()?))
        }
        HeaderField::EthSrc | HeaderField::EthDst => match cur.peek().clone() {
            Token::Mac(mac) => {
                cur.bump();
                Ok(HeaderValue::Eth(mac))
            }
            Token::Nat(n) => {
                cur.bump();
                Ok(HeaderValue::Eth(EthAddr::new(n)))
            }
            _ => Err(cur.error(["a MAC literal"])),
        },
    }
}
