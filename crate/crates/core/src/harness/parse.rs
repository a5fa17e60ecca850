//! Recursive-descent parser for harness text and outcome tuples.
//!
//! ```text
//! harness  := sequence ("," sequence)* ("," "{" [hb ("," hb)*] "}")?
//! sequence := "[" invoc (";" invoc)* "]"
//! invoc    := ident "(" [value ("," value)*] ")"
//! hb       := int "<" int
//! value    := int | "null" | "true" | "false" | "()" | "E" | "T" | "F" | "N"
//!           | ("{" | "[") [entry ("," entry)*] ("}" | "]")
//! entry    := value ["=" value]
//! ```

use thiserror::Error;

use crate::outcome::Outcome;
use crate::value::{Invocation, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at offset {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

pub(crate) struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

/// Raw parse result before well-formedness checks.
pub(crate) struct RawHarness {
    pub sequences: Vec<Vec<Invocation>>,
    pub hb: Vec<(usize, usize)>,
}

impl<'a> Parser<'a> {
    pub fn new(text: &'a str) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), SyntaxError> {
        if self.eat(c) {
            Ok(())
        } else {
            match self.peek() {
                Some(found) => self.err(format!(
                    "expected `{}`, found `{}`",
                    c as char, found as char
                )),
                None => self.err(format!("expected `{}`, found end of input", c as char)),
            }
        }
    }

    pub fn finish(&mut self) -> Result<(), SyntaxError> {
        match self.peek() {
            None => Ok(()),
            Some(c) => self.err(format!("unexpected trailing `{}`", c as char)),
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if start == self.pos || self.src[start].is_ascii_digit() {
            self.pos = start;
            return self.err("expected a method name");
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn uint(&mut self) -> Result<u64, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a non-negative integer");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .map_or_else(
                || {
                    self.pos = start;
                    self.err("integer out of range")
                },
                Ok,
            )
    }

    pub fn value(&mut self) -> Result<Value, SyntaxError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.uint()?;
                i64::try_from(n)
                    .map(Value::Int)
                    .or_else(|_| self.err("integer out of range"))
            }
            Some(b'(') => {
                self.pos += 1;
                self.expect(b')')?;
                Ok(Value::Unit)
            }
            Some(open @ (b'{' | b'[')) => {
                self.pos += 1;
                let close = if open == b'{' { b'}' } else { b']' };
                let mut items = Vec::new();
                let mut entries = Vec::new();
                if !self.eat(close) {
                    loop {
                        let v = self.value()?;
                        if self.eat(b'=') {
                            if !items.is_empty() {
                                return self.err("mixed list and map entries");
                            }
                            entries.push((v, self.value()?));
                        } else {
                            if !entries.is_empty() {
                                return self.err("mixed list and map entries");
                            }
                            items.push(v);
                        }
                        if self.eat(close) {
                            break;
                        }
                        self.expect(b',')?;
                    }
                }
                if entries.is_empty() {
                    Ok(Value::List(items))
                } else {
                    let n = entries.len();
                    let map = Value::map(entries);
                    match &map {
                        Value::Map(e) if e.len() != n => self.err("duplicate map key"),
                        _ => Ok(map),
                    }
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let word = self.ident()?;
                match word.as_str() {
                    "null" | "N" => Ok(Value::Null),
                    "true" | "T" => Ok(Value::Bool(true)),
                    "false" | "F" => Ok(Value::Bool(false)),
                    "E" => Ok(Value::Exception),
                    _ => {
                        self.pos = start;
                        self.err(format!("unknown value `{word}`"))
                    }
                }
            }
            Some(c) => self.err(format!("expected a value, found `{}`", c as char)),
            None => self.err("expected a value, found end of input"),
        }
    }

    fn invocation(&mut self) -> Result<Invocation, SyntaxError> {
        let method = self.ident()?;
        self.expect(b'(')?;
        let mut args = Vec::new();
        if !self.eat(b')') {
            loop {
                args.push(self.value()?);
                if self.eat(b')') {
                    break;
                }
                self.expect(b',')?;
            }
        }
        Ok(Invocation { method, args })
    }

    fn sequence(&mut self) -> Result<Vec<Invocation>, SyntaxError> {
        self.expect(b'[')?;
        let mut seq = vec![self.invocation()?];
        while self.eat(b';') {
            seq.push(self.invocation()?);
        }
        self.expect(b']')?;
        Ok(seq)
    }

    fn hb(&mut self) -> Result<Vec<(usize, usize)>, SyntaxError> {
        self.expect(b'{')?;
        let mut pairs = Vec::new();
        if !self.eat(b'}') {
            loop {
                let i = self.uint()? as usize;
                self.expect(b'<')?;
                let j = self.uint()? as usize;
                pairs.push((i, j));
                if self.eat(b'}') {
                    break;
                }
                self.expect(b',')?;
            }
        }
        Ok(pairs)
    }

    pub fn harness(&mut self) -> Result<RawHarness, SyntaxError> {
        let mut sequences = vec![self.sequence()?];
        let mut hb = Vec::new();
        while self.eat(b',') {
            match self.peek() {
                Some(b'[') => sequences.push(self.sequence()?),
                Some(b'{') => {
                    hb = self.hb()?;
                    break;
                }
                _ => return self.err("expected `[` or `{`"),
            }
        }
        self.finish()?;
        Ok(RawHarness { sequences, hb })
    }

    /// `(v, v, ...)` or a bare comma-separated list.
    pub fn outcome(&mut self) -> Result<Outcome, SyntaxError> {
        let mut vals = Vec::new();
        // `()` alone is a one-slot outcome holding Unit only when followed by nothing.
        let parenthesized = self.peek() == Some(b'(') && !self.src[self.pos..].starts_with(b"()");
        if parenthesized {
            self.pos += 1;
            if !self.eat(b')') {
                loop {
                    vals.push(self.value()?);
                    if self.eat(b')') {
                        break;
                    }
                    self.expect(b',')?;
                }
            }
        } else if self.peek().is_some() {
            loop {
                vals.push(self.value()?);
                if !self.eat(b',') {
                    break;
                }
            }
        }
        self.finish()?;
        Ok(Outcome(vals))
    }
}

/// Parses an outcome such as `(null,(),null,true)` or `null, (), null, true`.
pub fn parse_outcome(text: &str) -> Result<Outcome, SyntaxError> {
    Parser::new(text).outcome()
}
