//! The `.kad` text syntax for diagram terms.
//!
//! ```text
//! term  ::= par (';' par)*
//! par   ::= unit ('|' unit)*
//! unit  ::= '(' term ')' | generator | 'id:' objects | 'sym:' obj obj
//!         | 'scalar[' regex ']' | 'state[' regex ']'
//! ```
//!
//! Generators are `rcopy rdel star prod rone rsum rzero atom[x] act copy
//! del merge unit cap cup`; objects are `R` (red), `>` and `<`. Text after
//! `#` up to the end of the line is ignored.

use crate::error::{Error, Result};
use crate::regex::{parse_regex, Alphabet};

use super::{scalar, state, DiagramTerm, GeneratorLabel, Interface, ObjectType};

pub fn parse_kad(text: &str, sigma: &Alphabet) -> Result<DiagramTerm> {
    let chars: Vec<char> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n")
        .chars()
        .collect();
    let mut p = Parser {
        chars,
        pos: 0,
        sigma,
    };
    let t = p.term()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected '{}'", p.chars[p.pos])));
    }
    t.typecheck()?;
    Ok(t)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    sigma: &'a Alphabet,
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn term(&mut self) -> Result<DiagramTerm> {
        let mut parts = vec![self.par()?];
        while self.peek() == Some(';') {
            self.pos += 1;
            parts.push(self.par()?);
        }
        Ok(DiagramTerm::seq_all(parts))
    }

    fn par(&mut self) -> Result<DiagramTerm> {
        let mut parts = vec![self.unit()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            parts.push(self.unit()?);
        }
        Ok(DiagramTerm::par_all(parts))
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn bracketed(&mut self) -> Result<String> {
        if self.chars.get(self.pos) != Some(&'[') {
            return Err(self.error("expected '['"));
        }
        let start = self.pos + 1;
        let end = self.chars[start..]
            .iter()
            .position(|&c| c == ']')
            .map(|k| start + k)
            .ok_or_else(|| self.error("unclosed '['"))?;
        self.pos = end + 1;
        Ok(self.chars[start..end].iter().collect())
    }

    fn objects(&mut self) -> Vec<ObjectType> {
        let mut out = Vec::new();
        while let Some(o) = self
            .chars
            .get(self.pos)
            .and_then(|&c| ObjectType::from_symbol(c))
        {
            out.push(o);
            self.pos += 1;
        }
        out
    }

    fn unit(&mut self) -> Result<DiagramTerm> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let t = self.term()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(t)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                let w = self.word();
                match w.as_str() {
                    "id" | "sym" => {
                        if self.chars.get(self.pos) != Some(&':') {
                            return Err(self.error("expected ':'"));
                        }
                        self.pos += 1;
                        let objs = self.objects();
                        if w == "id" {
                            Ok(DiagramTerm::Id(Interface(objs)))
                        } else if objs.len() == 2 {
                            Ok(DiagramTerm::Sym(objs[0], objs[1]))
                        } else {
                            Err(self.error("sym takes exactly two objects"))
                        }
                    }
                    "scalar" | "state" => {
                        let inner = self.bracketed()?;
                        let e = parse_regex(&inner, self.sigma).map_err(|e| match e {
                            Error::Syntax { pos, msg } => Error::Syntax {
                                pos: start + w.len() + 1 + pos,
                                msg,
                            },
                            other => other,
                        })?;
                        Ok(if w == "scalar" { scalar(&e) } else { state(&e) })
                    }
                    "atom" => {
                        let inner = self.bracketed()?;
                        let mut it = inner.chars();
                        match (it.next(), it.next()) {
                            (Some(c), None) => {
                                self.sigma.check(c)?;
                                Ok(DiagramTerm::Gen(GeneratorLabel::Atom(c)))
                            }
                            _ => Err(self.error("atom takes one letter")),
                        }
                    }
                    name => GeneratorLabel::from_name(name, None)
                        .map(DiagramTerm::Gen)
                        .ok_or_else(|| Error::Syntax {
                            pos: start,
                            msg: format!("unknown generator '{name}'"),
                        }),
                }
            }
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }
}

/// Prints a term in `.kad` syntax; nested compositions are flattened, so
/// the text parses back to a term with the same port graph.
pub fn print_kad(t: &DiagramTerm) -> String {
    let mut out = String::new();
    print(t, 0, &mut out);
    out
}

fn flatten<'a>(t: &'a DiagramTerm, seq: bool, out: &mut Vec<&'a DiagramTerm>) {
    match (t, seq) {
        (DiagramTerm::Seq(f, g), true) | (DiagramTerm::Par(f, g), false) => {
            flatten(f, seq, out);
            flatten(g, seq, out);
        }
        _ => out.push(t),
    }
}

// prec: 0 = anywhere, 1 = operand of '|'
fn print(t: &DiagramTerm, prec: u8, out: &mut String) {
    match t {
        DiagramTerm::Gen(l) => out.push_str(&l.to_string()),
        DiagramTerm::Id(i) => {
            out.push_str("id:");
            out.push_str(&i.compact());
        }
        DiagramTerm::Sym(a, b) => {
            out.push_str("sym:");
            out.push(a.symbol());
            out.push(b.symbol());
        }
        DiagramTerm::Seq(..) => {
            let mut parts = Vec::new();
            flatten(t, true, &mut parts);
            if prec > 0 {
                out.push('(');
            }
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" ; ");
                }
                print(p, 1, out);
            }
            if prec > 0 {
                out.push(')');
            }
        }
        DiagramTerm::Par(..) => {
            let mut parts = Vec::new();
            flatten(t, false, &mut parts);
            for (i, p) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                print(p, 1, out);
            }
        }
    }
}
