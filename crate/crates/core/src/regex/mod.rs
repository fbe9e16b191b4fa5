//! Regular expressions over an explicit alphabet, and the language oracle
//! every semantic check in the crate bottoms out in.
//!
//! A [`LanguageHandle`] is always the canonical minimal complete DFA of its
//! language: equal languages have structurally identical handles, so
//! [`lang_equal`] is a plain comparison.

mod language;
mod parse;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::nfa::{Label, Nfa};

pub use language::{denote_regex, lang_equal, lang_subset, member, LanguageHandle};
pub use parse::parse_regex;

/// Characters that have a meaning in the concrete syntaxes and therefore
/// cannot be letters.
const RESERVED: &[char] = &[
    '0', '1', '+', '*', '.', '(', ')', '[', ']', ';', '|', ':', '<', '>', ',', '"', '\\', 'ε',
];

/// An ordered, duplicate-free, nonempty set of letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Alphabet {
    letters: Vec<char>,
}

impl Alphabet {
    pub fn new(letters: impl IntoIterator<Item = char>) -> Result<Self> {
        let letters: Vec<char> = letters.into_iter().collect();
        if letters.is_empty() {
            return Err(Error::InvalidAlphabet("alphabet is empty".into()));
        }
        for (i, &c) in letters.iter().enumerate() {
            if RESERVED.contains(&c) || c.is_whitespace() || c.is_control() {
                return Err(Error::InvalidAlphabet(format!("'{c}' is reserved")));
            }
            if letters[..i].contains(&c) {
                return Err(Error::InvalidAlphabet(format!("duplicate letter '{c}'")));
            }
        }
        Ok(Self { letters })
    }

    /// Parses an alphabet written as a run of letters, e.g. `"ab"`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(text.chars())
    }

    pub fn letters(&self) -> &[char] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.letters.contains(&c)
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.letters.iter().position(|&l| l == c)
    }

    pub fn check(&self, c: char) -> Result<usize> {
        self.index_of(c).ok_or(Error::UnknownLetter(c))
    }

    pub fn as_string(&self) -> String {
        self.letters.iter().collect()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.letters.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Alphabet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.letters.iter().map(|c| c.to_string()).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        let mut letters = Vec::with_capacity(v.len());
        for s in v {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => letters.push(c),
                _ => {
                    return Err(serde::de::Error::custom(format!(
                        "letter {s:?} is not a single character"
                    )))
                }
            }
        }
        Alphabet::new(letters).map_err(serde::de::Error::custom)
    }
}

/// Abstract syntax of regular expressions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegExp {
    Zero,
    One,
    Atom(char),
    Sum(Box<RegExp>, Box<RegExp>),
    Prod(Box<RegExp>, Box<RegExp>),
    Star(Box<RegExp>),
}

impl RegExp {
    pub fn sum(l: RegExp, r: RegExp) -> Self {
        RegExp::Sum(Box::new(l), Box::new(r))
    }

    pub fn prod(l: RegExp, r: RegExp) -> Self {
        RegExp::Prod(Box::new(l), Box::new(r))
    }

    pub fn star(e: RegExp) -> Self {
        RegExp::Star(Box::new(e))
    }

    /// Sum with zero absorption (`e + 0 = e`).
    pub fn plus(l: RegExp, r: RegExp) -> Self {
        match (l, r) {
            (RegExp::Zero, e) | (e, RegExp::Zero) => e,
            (l, r) => RegExp::sum(l, r),
        }
    }

    /// Product with unit and zero absorption (`e1 = 1e = e`, `0e = e0 = 0`).
    pub fn times(l: RegExp, r: RegExp) -> Self {
        match (l, r) {
            (RegExp::Zero, _) | (_, RegExp::Zero) => RegExp::Zero,
            (RegExp::One, e) | (e, RegExp::One) => e,
            (l, r) => RegExp::prod(l, r),
        }
    }

    /// Star with `0* = 1* = 1`.
    pub fn kleene(e: RegExp) -> Self {
        match e {
            RegExp::Zero | RegExp::One => RegExp::One,
            e => RegExp::star(e),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RegExp::Zero | RegExp::One | RegExp::Atom(_) => 1,
            RegExp::Sum(l, r) | RegExp::Prod(l, r) => 1 + l.depth().max(r.depth()),
            RegExp::Star(e) => 1 + e.depth(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            RegExp::Zero | RegExp::One | RegExp::Atom(_) => 1,
            RegExp::Sum(l, r) | RegExp::Prod(l, r) => 1 + l.size() + r.size(),
            RegExp::Star(e) => 1 + e.size(),
        }
    }

    /// Fails with the first letter that is not in `sigma`.
    pub fn check_alphabet(&self, sigma: &Alphabet) -> Result<()> {
        match self {
            RegExp::Zero | RegExp::One => Ok(()),
            RegExp::Atom(c) => sigma.check(*c).map(|_| ()),
            RegExp::Sum(l, r) | RegExp::Prod(l, r) => {
                l.check_alphabet(sigma)?;
                r.check_alphabet(sigma)
            }
            RegExp::Star(e) => e.check_alphabet(sigma),
        }
    }

    /// Thompson construction. State 0 is the unique initial state and
    /// state 1 the unique accepting one.
    pub fn thompson(&self, sigma: &Alphabet) -> Result<Nfa> {
        self.check_alphabet(sigma)?;
        let mut nfa = Nfa::empty(sigma.clone());
        let start = nfa.add_state();
        let end = nfa.add_state();
        self.thompson_into(&mut nfa, start, end);
        nfa.initial.insert(start);
        nfa.finals.insert(end);
        Ok(nfa)
    }

    /// Adds a fragment recognising `self` between the existing states
    /// `from` and `to`.
    pub(crate) fn thompson_into(&self, nfa: &mut Nfa, from: usize, to: usize) {
        match self {
            RegExp::Zero => {}
            RegExp::One => {
                nfa.transitions.insert((from, Label::Eps, to));
            }
            RegExp::Atom(c) => {
                nfa.transitions.insert((from, Label::Letter(*c), to));
            }
            RegExp::Sum(l, r) => {
                l.thompson_into(nfa, from, to);
                r.thompson_into(nfa, from, to);
            }
            RegExp::Prod(l, r) => {
                let mid = nfa.add_state();
                l.thompson_into(nfa, from, mid);
                r.thompson_into(nfa, mid, to);
            }
            RegExp::Star(e) => {
                let hub = nfa.add_state();
                nfa.transitions.insert((from, Label::Eps, hub));
                nfa.transitions.insert((hub, Label::Eps, to));
                let back = nfa.add_state();
                e.thompson_into(nfa, hub, back);
                nfa.transitions.insert((back, Label::Eps, hub));
            }
        }
    }
}

impl fmt::Display for RegExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // precedence: 0 = sum, 1 = product, 2 = star operand
        fn go(e: &RegExp, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                RegExp::Zero => write!(f, "0"),
                RegExp::One => write!(f, "1"),
                RegExp::Atom(c) => write!(f, "{c}"),
                RegExp::Sum(l, r) => {
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    go(l, 0, f)?;
                    write!(f, "+")?;
                    // sums parse left-associatively
                    go(r, 1, f)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                RegExp::Prod(l, r) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(l, 1, f)?;
                    go(r, 2, f)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                RegExp::Star(e) => {
                    go(e, 3, f)?;
                    write!(f, "*")
                }
            }
        }
        go(self, 0, f)
    }
}

/// Deterministic random expression. Every node picks its case uniformly;
/// nodes at the depth bound pick uniformly among the leaves.
pub fn random_regex(seed: u64, max_depth: usize, sigma: &Alphabet) -> RegExp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_regex_with(&mut rng, max_depth.max(1), sigma)
}

pub fn random_regex_with<R: Rng>(rng: &mut R, max_depth: usize, sigma: &Alphabet) -> RegExp {
    let leaf = |rng: &mut R| match rng.gen_range(0..3) {
        0 => RegExp::Zero,
        1 => RegExp::One,
        _ => RegExp::Atom(sigma.letters()[rng.gen_range(0..sigma.len())]),
    };
    if max_depth <= 1 {
        return leaf(rng);
    }
    match rng.gen_range(0..6) {
        0 => RegExp::Zero,
        1 => RegExp::One,
        2 => RegExp::Atom(sigma.letters()[rng.gen_range(0..sigma.len())]),
        3 => {
            let l = random_regex_with(rng, max_depth - 1, sigma);
            let r = random_regex_with(rng, max_depth - 1, sigma);
            RegExp::sum(l, r)
        }
        4 => {
            let l = random_regex_with(rng, max_depth - 1, sigma);
            let r = random_regex_with(rng, max_depth - 1, sigma);
            RegExp::prod(l, r)
        }
        _ => RegExp::star(random_regex_with(rng, max_depth - 1, sigma)),
    }
}
