//! Nondeterministic finite automata with ε-transitions.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::regex::Alphabet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Eps,
    Letter(char),
}

impl Label {
    /// `"eps"` (or `"ε"`) or a single letter.
    pub fn parse(s: &str) -> Option<Label> {
        if s == "eps" || s == "ε" {
            return Some(Label::Eps);
        }
        let mut it = s.chars();
        match (it.next(), it.next()) {
            (Some(c), None) => Some(Label::Letter(c)),
            _ => None,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::Eps => write!(f, "eps"),
            Label::Letter(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    pub alphabet: Alphabet,
    pub states: usize,
    pub transitions: BTreeSet<(usize, Label, usize)>,
    pub initial: BTreeSet<usize>,
    pub finals: BTreeSet<usize>,
}

#[derive(Serialize, Deserialize)]
struct NfaJson {
    states: usize,
    alphabet: Alphabet,
    transitions: Vec<(usize, String, usize)>,
    initial: Vec<usize>,
    finals: Vec<usize>,
}

impl Nfa {
    pub fn empty(alphabet: Alphabet) -> Self {
        Nfa {
            alphabet,
            states: 0,
            transitions: BTreeSet::new(),
            initial: BTreeSet::new(),
            finals: BTreeSet::new(),
        }
    }

    pub fn add_state(&mut self) -> usize {
        self.states += 1;
        self.states - 1
    }

    /// Adds a transition; letters are checked against the alphabet.
    pub fn add(&mut self, src: usize, label: Label, dst: usize) -> Result<()> {
        if let Label::Letter(c) = label {
            self.alphabet.check(c)?;
        }
        if src >= self.states || dst >= self.states {
            return Err(Error::IndexOutOfRange(format!(
                "transition ({src}, {dst}) with {} states",
                self.states
            )));
        }
        self.transitions.insert((src, label, dst));
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.states;
        for &(s, l, t) in &self.transitions {
            if s >= n || t >= n {
                return Err(Error::IndexOutOfRange(format!("transition ({s}, {t})")));
            }
            if let Label::Letter(c) = l {
                self.alphabet.check(c)?;
            }
        }
        if let Some(q) = self.initial.iter().chain(&self.finals).find(|&&q| q >= n) {
            return Err(Error::IndexOutOfRange(format!("state {q}")));
        }
        Ok(())
    }

    pub fn has_eps(&self) -> bool {
        self.transitions.iter().any(|t| t.1 == Label::Eps)
    }

    /// Edge-reversed automaton with initial and accepting states swapped.
    pub fn reversed(&self) -> Nfa {
        Nfa {
            alphabet: self.alphabet.clone(),
            states: self.states,
            transitions: self
                .transitions
                .iter()
                .map(|&(s, l, t)| (t, l, s))
                .collect(),
            initial: self.finals.clone(),
            finals: self.initial.clone(),
        }
    }

    /// Equivalent automaton with exactly one initial state. If there is
    /// already one, the automaton is returned unchanged; otherwise a fresh
    /// initial state with ε-edges to the old initial states is appended.
    pub fn with_single_initial(&self) -> Nfa {
        if self.initial.len() == 1 {
            return self.clone();
        }
        let mut out = self.clone();
        let q = out.add_state();
        for &i in &self.initial {
            out.transitions.insert((q, Label::Eps, i));
        }
        out.initial = BTreeSet::from([q]);
        out
    }

    /// The unique initial state, or an error.
    pub fn single_initial(&self) -> Result<usize> {
        match self.initial.len() {
            1 => Ok(*self.initial.iter().next().unwrap()),
            k => Err(Error::MultipleInitial(k)),
        }
    }

    /// Brute-force membership by simulating the automaton with ε-closure.
    pub fn accepts(&self, word: &str) -> Result<bool> {
        let close = |set: &mut BTreeSet<usize>| {
            let mut stack: Vec<usize> = set.iter().copied().collect();
            while let Some(q) = stack.pop() {
                for &(_, _, t) in self
                    .transitions
                    .range((q, Label::Eps, 0)..=(q, Label::Eps, usize::MAX))
                {
                    if set.insert(t) {
                        stack.push(t);
                    }
                }
            }
        };
        let mut cur = self.initial.clone();
        close(&mut cur);
        for c in word.chars() {
            self.alphabet.check(c)?;
            let mut next = BTreeSet::new();
            for &q in &cur {
                for &(_, _, t) in self
                    .transitions
                    .range((q, Label::Letter(c), 0)..=(q, Label::Letter(c), usize::MAX))
                {
                    next.insert(t);
                }
            }
            close(&mut next);
            cur = next;
        }
        Ok(cur.iter().any(|q| self.finals.contains(q)))
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    pub fn to_value(&self) -> Value {
        let j = NfaJson {
            states: self.states,
            alphabet: self.alphabet.clone(),
            transitions: self
                .transitions
                .iter()
                .map(|&(s, l, t)| (s, l.to_string(), t))
                .collect(),
            initial: self.initial.iter().copied().collect(),
            finals: self.finals.iter().copied().collect(),
        };
        serde_json::to_value(j).expect("nfa always serialises")
    }

    pub fn from_json(text: &str) -> Result<Nfa> {
        let j: NfaJson = serde_json::from_str(text)?;
        let mut transitions = BTreeSet::new();
        for (s, l, t) in j.transitions {
            let label = Label::parse(&l)
                .ok_or_else(|| Error::Invariant(format!("bad transition label {l:?}")))?;
            transitions.insert((s, label, t));
        }
        let nfa = Nfa {
            alphabet: j.alphabet,
            states: j.states,
            transitions,
            initial: j.initial.into_iter().collect(),
            finals: j.finals.into_iter().collect(),
        };
        nfa.validate()?;
        Ok(nfa)
    }
}
