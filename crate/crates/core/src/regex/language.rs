use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle;

use super::{Alphabet, RegExp};

/// A regular language, stored as its canonical minimal complete DFA.
///
/// States are numbered breadth-first from the initial state (which is 0),
/// following letters in alphabet order. A rejecting sink is materialised
/// whenever the language needs one, so `delta` is total.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LanguageHandle {
    alphabet: Alphabet,
    states: usize,
    initial: usize,
    finals: Vec<usize>,
    delta: Vec<Vec<usize>>,
}

impl LanguageHandle {
    /// Builds a handle from a complete DFA that is already minimal. The
    /// states are renumbered canonically; unreachable states are dropped.
    pub(crate) fn from_minimal(
        alphabet: Alphabet,
        delta: &[Vec<usize>],
        initial: usize,
        accepting: &[bool],
    ) -> Self {
        let n = delta.len();
        let mut order = vec![usize::MAX; n];
        let mut queue = VecDeque::from([initial]);
        order[initial] = 0;
        let mut next = 1;
        let mut visit = Vec::new();
        while let Some(s) = queue.pop_front() {
            visit.push(s);
            for &t in &delta[s] {
                if order[t] == usize::MAX {
                    order[t] = next;
                    next += 1;
                    queue.push_back(t);
                }
            }
        }
        let new_delta = visit
            .iter()
            .map(|&s| delta[s].iter().map(|&t| order[t]).collect())
            .collect();
        let finals = visit
            .iter()
            .filter(|&&s| accepting[s])
            .map(|&s| order[s])
            .collect();
        LanguageHandle {
            alphabet,
            states: visit.len(),
            initial: 0,
            finals,
            delta: new_delta,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn finals(&self) -> &[usize] {
        &self.finals
    }

    pub fn is_final(&self, s: usize) -> bool {
        self.finals.binary_search(&s).is_ok()
    }

    pub fn step(&self, s: usize, letter_index: usize) -> usize {
        self.delta[s][letter_index]
    }

    pub fn delta(&self) -> &[Vec<usize>] {
        &self.delta
    }

    pub fn is_empty_language(&self) -> bool {
        self.finals.is_empty()
    }

    /// Number of states that can reach an accepting state: the size of the
    /// minimal partial DFA, which is 0 for the empty language.
    pub fn trimmed_state_count(&self) -> usize {
        let mut live = vec![false; self.states];
        for &f in &self.finals {
            live[f] = true;
        }
        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..self.states {
                if !live[s] && self.delta[s].iter().any(|&t| live[t]) {
                    live[s] = true;
                    changed = true;
                }
            }
        }
        live.iter().filter(|&&l| l).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("language handles always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let h: LanguageHandle = serde_json::from_str(text)?;
        let k = h.alphabet.len();
        if h.initial >= h.states
            || h.delta.len() != h.states
            || h.delta
                .iter()
                .any(|row| row.len() != k || row.iter().any(|&t| t >= h.states))
            || h.finals.iter().any(|&f| f >= h.states)
        {
            return Err(Error::Invariant("inconsistent DFA json".into()));
        }
        Ok(h)
    }
}

/// The canonical minimal DFA of `[[e]]` (Thompson, epsilon elimination,
/// subset construction, Hopcroft, canonical renumbering).
pub fn denote_regex(e: &RegExp, sigma: &Alphabet) -> Result<LanguageHandle> {
    let nfa = e.thompson(sigma)?;
    Ok(oracle::minimal_dfa(&nfa))
}

fn same_alphabet(x: &LanguageHandle, y: &LanguageHandle) -> Result<()> {
    if x.alphabet != y.alphabet {
        return Err(Error::AlphabetMismatch(
            x.alphabet.as_string(),
            y.alphabet.as_string(),
        ));
    }
    Ok(())
}

pub fn lang_equal(x: &LanguageHandle, y: &LanguageHandle) -> Result<bool> {
    same_alphabet(x, y)?;
    Ok(x == y)
}

/// Language inclusion, by searching the product automaton for a word that
/// `x` accepts and `y` rejects.
pub fn lang_subset(x: &LanguageHandle, y: &LanguageHandle) -> Result<bool> {
    same_alphabet(x, y)?;
    let k = x.alphabet.len();
    let mut seen = vec![false; x.states * y.states];
    let mut queue = VecDeque::from([(x.initial, y.initial)]);
    seen[x.initial * y.states + y.initial] = true;
    while let Some((p, q)) = queue.pop_front() {
        if x.is_final(p) && !y.is_final(q) {
            return Ok(false);
        }
        for a in 0..k {
            let (p2, q2) = (x.delta[p][a], y.delta[q][a]);
            let idx = p2 * y.states + q2;
            if !seen[idx] {
                seen[idx] = true;
                queue.push_back((p2, q2));
            }
        }
    }
    Ok(true)
}

pub fn member(x: &LanguageHandle, word: &str) -> Result<bool> {
    let mut s = x.initial;
    for c in word.chars() {
        s = x.delta[s][x.alphabet.check(c)?];
    }
    Ok(x.is_final(s))
}
