//! Hand-rolled lexer shared by the program parser and the value parser.
//! Input is UTF-8 with `#` line comments.

use std::fmt;
use std::net::Ipv4Addr;

use crate::model::EthAddr;
use crate::syntax::parser::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Nat(u64),
    Ip(Ipv4Addr),
    Mac(EthAddr),
    /// `0x...` byte string (even number of hex digits).
    Hex(Vec<u8>),
    Assign,   // :=
    DefSep,   // >>
    Semi,     // ;
    Comma,    // ,
    LParen,   // (
    RParen,   // )
    LBrace,   // {
    RBrace,   // }
    LBracket, // [
    RBracket, // ]
    Colon,    // :
    Lambda,   // \
    Arrow,    // ->
    Dot,      // .
    Underscore,
    EqEq, // ==
    Ne,   // !=
    Le,   // <=
    Lt,   // <
    Plus,
    Minus,
    Equals, // =
    Eof,
}

impl Token {
    /// Human-readable form used in diagnostics.
    pub fn describe(&self) -> String {
        match self {
            Token::Ident(s) => format!("`{s}`"),
            Token::Nat(n) => format!("`{n}`"),
            Token::Ip(ip) => format!("`{ip}`"),
            Token::Mac(m) => format!("`{m}`"),
            Token::Hex(_) => "a hex byte string".to_string(),
            Token::Assign => "`:=`".to_string(),
            Token::DefSep => "`>>`".to_string(),
            Token::Semi => "`;`".to_string(),
            Token::Comma => "`,`".to_string(),
            Token::LParen => "`(`".to_string(),
            Token::RParen => "`)`".to_string(),
            Token::LBrace => "`{`".to_string(),
            Token::RBrace => "`}`".to_string(),
            Token::LBracket => "`[`".to_string(),
            Token::RBracket => "`]`".to_string(),
            Token::Colon => "`:`".to_string(),
            Token::Lambda => "`\\`".to_string(),
            Token::Arrow => "`->`".to_string(),
            Token::Dot => "`.`".to_string(),
            Token::Underscore => "`_`".to_string(),
            Token::EqEq => "`==`".to_string(),
            Token::Ne => "`!=`".to_string(),
            Token::Le => "`<=`".to_string(),
            Token::Lt => "`<`".to_string(),
            Token::Plus => "`+`".to_string(),
            Token::Minus => "`-`".to_string(),
            Token::Equals => "`=`".to_string(),
            Token::Eof => "end of input".to_string(),
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub token: Token,
    pub line: usize,
    pub col: usize,
}

/// Words with fixed meaning; none may be used as a variable name.
pub const RESERVED: &[&str] = &[
    "Lift",
    "ApplyLft",
    "ApplyRit",
    "Merge",
    "MixFst",
    "MixSnd",
    "Filter",
    "Once",
    "MakForwRule",
    "MakeRule",
    "AddRules",
    "Register",
    "Send",
    "SwitchIds",
    "SourceIps",
    "ArrivedPackets",
    "port",
    "switch",
    "srcip",
    "dstip",
    "srcport",
    "dstport",
    "inport",
    "ethsrc",
    "ethdst",
    "sendall",
    "sendcontroller",
    "sendout",
    "change",
    "true",
    "false",
    "any",
    "pk",
    "uid",
    "payload",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    /// True right after a `.` token; projection indexes like `t.0.1` must
    /// not be mistaken for the start of an IPv4 literal.
    after_dot: bool,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner { src: src.as_bytes(), pos: 0, line: 1, col: 1, after_dot: false }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.src.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            expected: vec![msg.into()],
            found: self
                .peek()
                .map(|c| format!("`{}`", c as char))
                .unwrap_or_else(|| "end of input".to_string()),
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => {
                    self.bump();
                }
                Some(b'#') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    /// True when the input at the current position is a full MAC literal
    /// (six colon-separated hex pairs not followed by more hex or `:`).
    fn at_mac(&self) -> bool {
        let is_hex = |c: u8| c.is_ascii_hexdigit();
        for group in 0..6 {
            let base = group * 3;
            if !(self.peek_at(base).is_some_and(is_hex) && self.peek_at(base + 1).is_some_and(is_hex)) {
                return false;
            }
            if group < 5 && self.peek_at(base + 2) != Some(b':') {
                return false;
            }
        }
        !matches!(self.peek_at(17), Some(c) if c.is_ascii_hexdigit() || c == b':')
    }

    fn lex_mac(&mut self) -> Result<Token, ParseError> {
        let mut bits: u64 = 0;
        for group in 0..6 {
            if group > 0 {
                self.bump(); // ':'
            }
            let hi = self.bump().unwrap();
            let lo = self.bump().unwrap();
            let byte = (hex_val(hi) << 4) | hex_val(lo);
            bits = (bits << 8) | u64::from(byte);
        }
        Ok(Token::Mac(EthAddr::new(bits)))
    }

    fn lex_number(&mut self) -> Result<Token, ParseError> {
        // 0x prefix starts a hex byte string
        if self.peek() == Some(b'0') && matches!(self.peek_at(1), Some(b'x') | Some(b'X')) {
            self.bump();
            self.bump();
            let mut digits = Vec::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_hexdigit() {
                    digits.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            if digits.is_empty() || digits.len() % 2 != 0 {
                return Err(self.error("an even number of hex digits after `0x`"));
            }
            let bytes = digits
                .chunks(2)
                .map(|pair| (hex_val(pair[0]) << 4) | hex_val(pair[1]))
                .collect();
            return Ok(Token::Hex(bytes));
        }

        let first = self.read_digits()?;
        // a digit right after `.` means an IPv4 literal
        if !self.after_dot
            && self.peek() == Some(b'.')
            && self.peek_at(1).is_some_and(|c| c.is_ascii_digit())
        {
            let mut octets = vec![first];
            while octets.len() < 4 {
                if self.peek() != Some(b'.') {
                    return Err(self.error("a dotted-quad IPv4 literal"));
                }
                self.bump();
                octets.push(self.read_digits()?);
            }
            let quad = octets
                .iter()
                .map(|&n| u8::try_from(n))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| self.error("IPv4 octets in 0..=255"))?;
            return Ok(Token::Ip(Ipv4Addr::new(quad[0], quad[1], quad[2], quad[3])));
        }
        Ok(Token::Nat(first))
    }

    fn read_digits(&mut self) -> Result<u64, ParseError> {
        let mut value: u64 = 0;
        let mut any = false;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() {
                value = value
                    .checked_mul(10)
                    .and_then(|v| v.checked_add(u64::from(c - b'0')))
                    .ok_or_else(|| self.error("a number that fits in 64 bits"))?;
                any = true;
                self.bump();
            } else {
                break;
            }
        }
        if !any {
            return Err(self.error("a digit"));
        }
        Ok(value)
    }

    fn lex_ident(&mut self) -> Token {
        let mut word = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                word.push(c as char);
                self.bump();
            } else {
                break;
            }
        }
        Token::Ident(word)
    }

    fn next_token(&mut self) -> Result<Spanned, ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let token = match self.peek() {
            None => Token::Eof,
            Some(c) if c.is_ascii_hexdigit() && self.at_mac() => self.lex_mac()?,
            Some(c) if c.is_ascii_digit() => self.lex_number()?,
            Some(c) if c.is_ascii_alphabetic() => self.lex_ident(),
            Some(b'_') => {
                // `_` followed by ident chars would be a malformed name
                if self.peek_at(1).is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_') {
                    return Err(self.error("identifiers must start with a letter"));
                }
                self.bump();
                Token::Underscore
            }
            Some(b':') => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Token::Assign
                } else {
                    Token::Colon
                }
            }
            Some(b'>') => {
                self.bump();
                if self.peek() == Some(b'>') {
                    self.bump();
                    Token::DefSep
                } else {
                    return Err(self.error("`>>`"));
                }
            }
            Some(b'=') => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Token::EqEq
                } else {
                    Token::Equals
                }
            }
            Some(b'!') => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Token::Ne
                } else {
                    return Err(self.error("`!=`"));
                }
            }
            Some(b'<') => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Token::Le
                } else {
                    Token::Lt
                }
            }
            Some(b'-') => {
                self.bump();
                if self.peek() == Some(b'>') {
                    self.bump();
                    Token::Arrow
                } else {
                    Token::Minus
                }
            }
            Some(b';') => {
                self.bump();
                Token::Semi
            }
            Some(b',') => {
                self.bump();
                Token::Comma
            }
            Some(b'(') => {
                self.bump();
                Token::LParen
            }
            Some(b')') => {
                self.bump();
                Token::RParen
            }
            Some(b'{') => {
                self.bump();
                Token::LBrace
            }
            Some(b'}') => {
                self.bump();
                Token::RBrace
            }
            Some(b'[') => {
                self.bump();
                Token::LBracket
            }
            Some(b']') => {
                self.bump();
                Token::RBracket
            }
            Some(b'\\') => {
                self.bump();
                Token::Lambda
            }
            Some(b'.') => {
                self.bump();
                Token::Dot
            }
            Some(b'+') => {
                self.bump();
                Token::Plus
            }
            _ => return Err(self.error("a token")),
        };
        self.after_dot = token == Token::Dot;
        Ok(Spanned { token, line, col })
    }
}

fn hex_val(c: u8) -> u8 {
    match c {
        b'0'..=b'9' => c - b'0',
        b'a'..=b'f' => c - b'a' + 10,
        b'A'..=b'F' => c - b'A' + 10,
        _ => unreachable!("caller checked hex digit"),
    }
}

/// Lexes the whole input; the final token is always `Eof`.
pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut scanner = Scanner::new(src);
    let mut out = Vec::new();
    loop {
        let spanned = scanner.next_token()?;
        let done = spanned.token == Token::Eof;
        out.push(spanned);
        if done {
            return Ok(out);
        }
    }
}
