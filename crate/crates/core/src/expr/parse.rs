//! Recursive-descent parser.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = atom [ "^" unary ] ;
//! atom    = number | constant | variable | func "(" expr ")" | "(" expr ")" ;
//! number  = digits [ "." digits ] [ ("e" | "E") [ "+" | "-" ] digits ] ;
//! ```

use std::fmt;

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Error, Clone, PartialEq)]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" | "),
            self.found
        )
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    allowed: &'a [Var],
    z_alias: Option<&'a str>,
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

impl<'a> Parser<'a> {
    fn bytes(&self) -> &'a [u8] {
        self.src.as_bytes()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.bytes()[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes().get(self.pos).copied()
    }

    fn found_here(&self) -> String {
        match self.src[self.pos..].chars().next() {
            Some(c) => format!("{c:?}"),
            None => "end of input".into(),
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.found_here(),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = add(lhs, self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = mul(lhs, self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            _ => Err(self.error(&["number", "identifier", "\"(\"", "\"-\""])),
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[&format!("\"{}\"", c as char)]))
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let b = self.bytes();
        let mut end = start;
        let digits = |mut i: usize| {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            i
        };
        end = digits(end);
        if end < b.len() && b[end] == b'.' {
            end = digits(end + 1);
        }
        if end < b.len() && (b[end] == b'e' || b[end] == b'E') {
            let mut k = end + 1;
            if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
                k += 1;
            }
            if k < b.len() && b[k].is_ascii_digit() {
                end = digits(k);
            }
        }
        let text = &self.src[start..end];
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = end;
                Ok(num(v))
            }
            Err(_) => Err(self.error(&["number"])),
        }
    }

    fn ident(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        let mut end = start;
        while end < self.src.len() && is_ident_char(self.bytes()[end]) {
            end += 1;
        }
        let name = &self.src[start..end];
        if let Some(f) = Func::from_name(name) {
            self.pos = end;
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(call(f, arg));
        }
        let c = match name {
            "pi" => Some(Const::Pi),
            "e" => Some(Const::E),
            "i" => Some(Const::I),
            _ => None,
        };
        if let Some(c) = c {
            self.pos = end;
            return Ok(constant(c));
        }
        let v = match self.z_alias {
            Some(alias) if alias == name => Some(Var::Z),
            Some(_) if name == "z" => None,
            _ => Var::from_name(name),
        };
        match v {
            Some(v) if self.allowed.contains(&v) => {
                self.pos = end;
                Ok(var(v))
            }
            _ => {
                let mut expected: Vec<String> = match self.z_alias {
                    Some(alias) => vec![alias.to_string()],
                    None => self.allowed.iter().map(|v| v.name()).collect(),
                };
                expected.extend(["pi", "e", "i"].map(String::from));
                expected.extend(Func::ALL.iter().map(|f| format!("{}(", f.name())));
                Err(ParseError {
                    offset: start,
                    expected,
                    found: format!("identifier {name:?}"),
                })
            }
        }
    }
}

/// Parses `text` allowing only the listed variables.
pub fn parse_with(text: &str, allowed: &[Var]) -> Result<Node, ParseError> {
    parse_inner(text, allowed, None)
}

/// Parses a one-argument function whose argument is written `name` instead of `z`.
pub fn parse_aliased(text: &str, name: &str) -> Result<Node, ParseError> {
    parse_inner(text, &[Var::Z], Some(name))
}

fn parse_inner(text: &str, allowed: &[Var], z_alias: Option<&str>) -> Result<Node, ParseError> {
    let mut p = Parser {
        src: text,
        pos: 0,
        allowed,
        z_alias,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}
