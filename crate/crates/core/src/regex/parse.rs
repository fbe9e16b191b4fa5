use crate::error::{Error, Result};

use super::{Alphabet, RegExp};

/// Parses the concrete syntax `+` (sum), juxtaposition or `.` (product),
/// postfix `*`, `0`, `1` and parentheses. Sum and product associate to the
/// left; `*` binds tightest, then product, then sum.
pub fn parse_regex(text: &str, sigma: &Alphabet) -> Result<RegExp> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        sigma,
    };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected '{}'", p.chars[p.pos])));
    }
    Ok(e)
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

    fn sum(&mut self) -> Result<RegExp> {
        let mut acc = self.product()?;
        while self.peek() == Some('+') {
            self.pos += 1;
            let rhs = self.product()?;
            acc = RegExp::sum(acc, rhs);
        }
        Ok(acc)
    }

    fn starts_factor(&mut self) -> bool {
        match self.peek() {
            Some('(') | Some('0') | Some('1') => true,
            Some(c) => self.sigma.contains(c) || c.is_alphanumeric(),
            None => false,
        }
    }

    fn product(&mut self) -> Result<RegExp> {
        let mut acc = self.starred()?;
        loop {
            if self.peek() == Some('.') {
                self.pos += 1;
            } else if !self.starts_factor() {
                break;
            }
            let rhs = self.starred()?;
            acc = RegExp::prod(acc, rhs);
        }
        Ok(acc)
    }

    fn starred(&mut self) -> Result<RegExp> {
        let mut e = self.factor()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            e = RegExp::star(e);
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<RegExp> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.sum()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('0') => {
                self.pos += 1;
                Ok(RegExp::Zero)
            }
            Some('1') => {
                self.pos += 1;
                Ok(RegExp::One)
            }
            Some(c) if self.sigma.contains(c) => {
                self.pos += 1;
                Ok(RegExp::Atom(c))
            }
            Some(c) if c.is_alphanumeric() => Err(Error::UnknownLetter(c)),
            Some(c) => Err(self.error(format!("unexpected '{c}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::parse("ab").unwrap()
    }

    fn a() -> RegExp {
        RegExp::Atom('a')
    }

    fn b() -> RegExp {
        RegExp::Atom('b')
    }

    #[test]
    fn worked_example_shape() {
        let e = parse_regex("ab(a+ab)*", &ab()).unwrap();
        let expected = RegExp::prod(
            RegExp::prod(a(), b()),
            RegExp::star(RegExp::sum(a(), RegExp::prod(a(), b()))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn literals_and_postfix() {
        assert_eq!(parse_regex("1", &ab()).unwrap(), RegExp::One);
        assert_eq!(parse_regex("0", &ab()).unwrap(), RegExp::Zero);
        assert_eq!(
            parse_regex("a**", &ab()).unwrap(),
            RegExp::star(RegExp::star(a()))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse_regex("a+b+a", &ab()).unwrap(),
            RegExp::sum(RegExp::sum(a(), b()), a())
        );
        assert_eq!(
            parse_regex("a.b a", &ab()).unwrap(),
            RegExp::prod(RegExp::prod(a(), b()), a())
        );
        assert_eq!(
            parse_regex("ab*+b", &ab()).unwrap(),
            RegExp::sum(RegExp::prod(a(), RegExp::star(b())), b())
        );
    }

    #[test]
    fn errors_carry_positions() {
        match parse_regex("a+", &ab()) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("{other:?}"),
        }
        match parse_regex("(ab", &ab()) {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_regex("ac", &ab()),
            Err(Error::UnknownLetter('c'))
        ));
        assert!(matches!(
            parse_regex("a)", &ab()),
            Err(Error::Syntax { pos: 1, .. })
        ));
    }
}
