//! Recursive-descent parser for the ASCII LTL grammar.

use std::cell::RefCell;
use std::collections::BTreeMap;

use super::{Atom, AtomKind, Formula, LtlError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("syntax error at offset {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Resolves identifiers to declared atoms.
pub trait AtomTable {
    fn lookup(&self, name: &str) -> Option<Atom>;
}

/// Accepts every identifier, creating atoms of a fixed kind on first use.
/// Handy for tests and for formulas that are not tied to a world.
#[derive(Debug)]
pub struct FreeAtoms {
    kind: AtomKind,
    seen: RefCell<BTreeMap<String, Atom>>,
}

impl FreeAtoms {
    pub fn new(kind: AtomKind) -> Self {
        FreeAtoms { kind, seen: RefCell::new(BTreeMap::new()) }
    }
}

impl Default for FreeAtoms {
    fn default() -> Self {
        FreeAtoms::new(AtomKind::Internal)
    }
}

impl AtomTable for FreeAtoms {
    fn lookup(&self, name: &str) -> Option<Atom> {
        let mut seen = self.seen.borrow_mut();
        Some(
            seen.entry(name.to_string())
                .or_insert_with(|| Atom::new(name, self.kind))
                .clone(),
        )
    }
}

impl<T: AtomTable + ?Sized> AtomTable for &T {
    fn lookup(&self, name: &str) -> Option<Atom> {
        (**self).lookup(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    G,
    F,
    X,
    U,
    W,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '(' => out.push((start, Tok::LParen)),
            ')' => out.push((start, Tok::RParen)),
            '!' => out.push((start, Tok::Not)),
            '&' => out.push((start, Tok::And)),
            '|' => out.push((start, Tok::Or)),
            '-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 1;
                    out.push((start, Tok::Implies));
                } else {
                    return Err(ParseError { pos: start, msg: "expected `->`".into() });
                }
            }
            '<' => {
                if text[i..].starts_with("<->") {
                    i += 2;
                    out.push((start, Tok::Iff));
                } else {
                    return Err(ParseError { pos: start, msg: "expected `<->`".into() });
                }
            }
            'G' => out.push((start, Tok::G)),
            'F' => out.push((start, Tok::F)),
            'X' => out.push((start, Tok::X)),
            'U' => out.push((start, Tok::U)),
            'W' => out.push((start, Tok::W)),
            'a'..='z' => {
                let mut j = i + 1;
                while j < bytes.len()
                    && (bytes[j].is_ascii_lowercase() || bytes[j].is_ascii_digit() || bytes[j] == b'_')
                {
                    j += 1;
                }
                let word = &text[i..j];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
                i = j;
                continue;
            }
            _ => {
                return Err(ParseError { pos: start, msg: format!("unexpected character `{c}`") });
            }
        }
        i += 1;
    }
    Ok(out)
}

struct Parser<'a, T: AtomTable> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    table: &'a T,
}

impl<'a, T: AtomTable> Parser<'a, T> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn err(&self, msg: impl Into<String>) -> LtlError {
        LtlError::Parse(ParseError { pos: self.offset(), msg: msg.into() })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.binary_temporal()?;
        while self.eat(&Tok::And) {
            let rhs = self.binary_temporal()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        if self.eat(&Tok::U) {
            let rhs = self.binary_temporal()?;
            return Ok(Formula::until(lhs, rhs));
        }
        if self.eat(&Tok::W) {
            let rhs = self.binary_temporal()?;
            return Ok(Formula::weak_until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.err("unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Not => Ok(Formula::not(self.unary()?)),
            Tok::G => Ok(Formula::globally(self.unary()?)),
            Tok::F => Ok(Formula::eventually(self.unary()?)),
            Tok::X => Ok(Formula::next(self.unary()?)),
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::Ident(name) => match self.table.lookup(&name) {
                Some(a) => Ok(Formula::Atom(a)),
                None => Err(LtlError::UnknownAtom(name)),
            },
            Tok::LParen => {
                let inner = self.iff()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                Ok(inner)
            }
            _ => {
                self.pos -= 1;
                Err(self.err("expected a formula"))
            }
        }
    }
}

/// Parses `text`, resolving identifiers through `table`.
pub fn parse<T: AtomTable + ?Sized>(text: &str, table: &T) -> Result<Formula, LtlError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), table: &table };
    let f = p.iff()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(f)
}

/// Parses with every identifier accepted as an internal atom.
pub fn parse_free(text: &str) -> Result<Formula, LtlError> {
    parse(text, &FreeAtoms::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Formula {
        parse_free(s).unwrap()
    }

    #[test]
    fn parses_basic_shapes() {
        assert_eq!(p("G(s -> a)").to_string(), "G(s -> a)");
        assert_eq!(p("true"), Formula::True);
        assert_eq!(p("F(r1) & F(r2)").to_string(), "F r1 & F r2");
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(p("a | b & c"), p("a | (b & c)"));
        assert_eq!(p("a -> b -> c"), p("a -> (b -> c)"));
        assert_eq!(p("a U b U c"), p("a U (b U c)"));
        assert_eq!(p("a & b U c"), p("a & (b U c)"));
        assert_eq!(p("!a U b"), p("(!a) U b"));
        assert_eq!(p("a <-> b <-> c"), p("(a <-> b) <-> c"));
        assert_eq!(p("GFp"), p("G F p"));
    }

    #[test]
    fn errors_carry_position_or_name() {
        match parse_free("a & ") {
            Err(LtlError::Parse(e)) => assert_eq!(e.pos, 4),
            other => panic!("{other:?}"),
        }
        match parse_free("(a") {
            Err(LtlError::Parse(e)) => assert_eq!(e.pos, 2),
            other => panic!("{other:?}"),
        }
        struct Empty;
        impl AtomTable for Empty {
            fn lookup(&self, _: &str) -> Option<Atom> {
                None
            }
        }
        assert_eq!(parse("G ghost", &Empty), Err(LtlError::UnknownAtom("ghost".into())));
        assert!(matches!(parse_free("a $ b"), Err(LtlError::Parse(_))));
        assert!(matches!(parse_free("Y a"), Err(LtlError::Parse(_))));
    }
}
