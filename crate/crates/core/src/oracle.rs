//! Classical automata algorithms used as the independent reference for
//! every diagrammatic result. Nothing here depends on the diagram
//! machinery; only [`Nfa`] and [`LanguageHandle`] cross the boundary.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::nfa::{Label, Nfa};
use crate::regex::{Alphabet, LanguageHandle};

/// A complete deterministic automaton. `subsets` records, for each state,
/// the NFA states it stands for when produced by the subset construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub alphabet: Alphabet,
    pub delta: Vec<Vec<usize>>,
    pub initial: usize,
    pub accepting: Vec<bool>,
    pub subsets: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn to_nfa(&self) -> Nfa {
        let mut nfa = Nfa::empty(self.alphabet.clone());
        nfa.states = self.delta.len();
        for (s, row) in self.delta.iter().enumerate() {
            for (a, &t) in row.iter().enumerate() {
                nfa.transitions
                    .insert((s, Label::Letter(self.alphabet.letters()[a]), t));
            }
        }
        nfa.initial.insert(self.initial);
        nfa.finals = (0..self.delta.len())
            .filter(|&s| self.accepting[s])
            .collect();
        nfa
    }
}

fn eps_closure(nfa: &Nfa, q: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::from([q]);
    let mut stack = vec![q];
    while let Some(p) = stack.pop() {
        for &(_, _, t) in nfa
            .transitions
            .range((p, Label::Eps, 0)..=(p, Label::Eps, usize::MAX))
        {
            if seen.insert(t) {
                stack.push(t);
            }
        }
    }
    seen
}

/// Removes ε-transitions: `q -a-> t` whenever some state in the ε-closure
/// of `q` has an `a`-edge to `t`; `q` accepts if its closure meets an
/// accepting state.
pub fn eps_close(nfa: &Nfa) -> Nfa {
    if !nfa.has_eps() {
        return nfa.clone();
    }
    let mut out = Nfa::empty(nfa.alphabet.clone());
    out.states = nfa.states;
    out.initial = nfa.initial.clone();
    for q in 0..nfa.states {
        let c = eps_closure(nfa, q);
        if c.iter().any(|p| nfa.finals.contains(p)) {
            out.finals.insert(q);
        }
        for &p in &c {
            for &(_, l, t) in nfa
                .transitions
                .range((p, Label::Eps, 0)..=(p, Label::Letter(char::MAX), usize::MAX))
            {
                if l != Label::Eps {
                    out.transitions.insert((q, l, t));
                }
            }
        }
    }
    out
}

/// Reachable-subset construction on an ε-free automaton. The result is
/// complete: the empty subset appears as a sink when it is reachable.
pub fn subset_construction(nfa: &Nfa) -> Dfa {
    debug_assert!(!nfa.has_eps());
    let letters = nfa.alphabet.letters();
    let mut succ: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); letters.len()]; nfa.states];
    for &(s, l, t) in &nfa.transitions {
        if let Label::Letter(c) = l {
            let a = nfa
                .alphabet
                .index_of(c)
                .expect("letters are checked on insertion");
            succ[s][a].push(t);
        }
    }
    let start: Vec<usize> = nfa.initial.iter().copied().collect();
    let mut index: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
    let mut subsets = vec![start];
    let mut delta: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < subsets.len() {
        let mut row = Vec::with_capacity(letters.len());
        for a in 0..letters.len() {
            let set: BTreeSet<usize> = subsets[i]
                .iter()
                .flat_map(|&q| succ[q][a].iter().copied())
                .collect();
            let set: Vec<usize> = set.into_iter().collect();
            let next = subsets.len();
            let t = *index.entry(set.clone()).or_insert_with(|| {
                subsets.push(set);
                next
            });
            row.push(t);
        }
        delta.push(row);
        i += 1;
    }
    let accepting = subsets
        .iter()
        .map(|s| s.iter().any(|q| nfa.finals.contains(q)))
        .collect();
    Dfa {
        alphabet: nfa.alphabet.clone(),
        delta,
        initial: 0,
        accepting,
        subsets,
    }
}

/// Hopcroft partition refinement followed by canonical renumbering.
pub fn hopcroft_minimise(dfa: &Dfa) -> LanguageHandle {
    let k = dfa.alphabet.len();
    // restrict to reachable states
    let mut reach = vec![false; dfa.state_count()];
    let mut order = vec![dfa.initial];
    reach[dfa.initial] = true;
    let mut i = 0;
    while i < order.len() {
        for &t in &dfa.delta[order[i]] {
            if !reach[t] {
                reach[t] = true;
                order.push(t);
            }
        }
        i += 1;
    }
    let n = order.len();
    let mut local = vec![usize::MAX; dfa.state_count()];
    for (j, &s) in order.iter().enumerate() {
        local[s] = j;
    }
    let delta: Vec<Vec<usize>> = order
        .iter()
        .map(|&s| dfa.delta[s].iter().map(|&t| local[t]).collect())
        .collect();
    let accepting: Vec<bool> = order.iter().map(|&s| dfa.accepting[s]).collect();

    let mut inverse = vec![vec![Vec::new(); k]; n];
    for (s, row) in delta.iter().enumerate() {
        for (a, &t) in row.iter().enumerate() {
            inverse[t][a].push(s);
        }
    }

    let finals: Vec<usize> = (0..n).filter(|&s| accepting[s]).collect();
    let others: Vec<usize> = (0..n).filter(|&s| !accepting[s]).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut block_of = vec![0; n];
    for b in [finals, others] {
        if !b.is_empty() {
            for &s in &b {
                block_of[s] = blocks.len();
            }
            blocks.push(b);
        }
    }
    let mut work: BTreeSet<(usize, usize)> = BTreeSet::new();
    if blocks.len() == 2 {
        let smaller = if blocks[0].len() <= blocks[1].len() {
            0
        } else {
            1
        };
        for a in 0..k {
            work.insert((smaller, a));
        }
    }
    while let Some((b, a)) = work.pop_first() {
        let mut pre = vec![false; n];
        for &t in &blocks[b] {
            for &s in &inverse[t][a] {
                pre[s] = true;
            }
        }
        let touched: BTreeSet<usize> = (0..n).filter(|&s| pre[s]).map(|s| block_of[s]).collect();
        for y in touched {
            let (inside, outside): (Vec<usize>, Vec<usize>) =
                blocks[y].iter().partition(|&&s| pre[s]);
            if outside.is_empty() {
                continue;
            }
            let fresh = blocks.len();
            for &s in &outside {
                block_of[s] = fresh;
            }
            let small_is_fresh = outside.len() <= inside.len();
            blocks[y] = inside;
            blocks.push(outside);
            for c in 0..k {
                if work.contains(&(y, c)) || small_is_fresh {
                    work.insert((fresh, c));
                } else {
                    work.insert((y, c));
                }
            }
        }
    }

    let q_delta: Vec<Vec<usize>> = blocks
        .iter()
        .map(|blk| delta[blk[0]].iter().map(|&t| block_of[t]).collect())
        .collect();
    let q_accepting: Vec<bool> = blocks.iter().map(|blk| accepting[blk[0]]).collect();
    LanguageHandle::from_minimal(dfa.alphabet.clone(), &q_delta, block_of[0], &q_accepting)
}

/// Reverse, determinise, reverse, determinise. The second determinisation
/// of a reachable DFA's reversal is already minimal.
pub fn brzozowski_minimise(nfa: &Nfa) -> LanguageHandle {
    let first = subset_construction(&eps_close(&nfa.reversed()));
    let second = subset_construction(&first.to_nfa().reversed());
    LanguageHandle::from_minimal(
        nfa.alphabet.clone(),
        &second.delta,
        second.initial,
        &second.accepting,
    )
}

/// The canonical minimal DFA of an automaton's language via ε-elimination,
/// subset construction and Hopcroft.
pub fn minimal_dfa(nfa: &Nfa) -> LanguageHandle {
    hopcroft_minimise(&subset_construction(&eps_close(nfa)))
}

pub fn nfa_lang_equal(a: &Nfa, b: &Nfa) -> Result<bool> {
    if a.alphabet != b.alphabet {
        return Err(Error::AlphabetMismatch(
            a.alphabet.as_string(),
            b.alphabet.as_string(),
        ));
    }
    Ok(minimal_dfa(a) == minimal_dfa(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::{denote_regex, member, parse_regex};

    fn ab() -> Alphabet {
        Alphabet::parse("ab").unwrap()
    }

    pub(crate) fn worked_example() -> Nfa {
        let mut a = Nfa::empty(ab());
        a.states = 3;
        for (s, c, t) in [(0, 'a', 1), (1, 'b', 2), (2, 'a', 1), (2, 'a', 2)] {
            a.add(s, Label::Letter(c), t).unwrap();
        }
        a.initial.insert(0);
        a.finals.insert(2);
        a
    }

    #[test]
    fn eps_close_moves_acceptance_back() {
        let mut a = Nfa::empty(ab());
        a.states = 2;
        a.add(0, Label::Eps, 1).unwrap();
        a.initial.insert(0);
        a.finals.insert(1);
        let c = eps_close(&a);
        assert!(c.finals.contains(&0));
        assert!(!c.has_eps());
        let e = worked_example();
        assert_eq!(eps_close(&e), e);
    }

    #[test]
    fn worked_example_subsets() {
        let d = subset_construction(&worked_example());
        let subsets: BTreeSet<Vec<usize>> = d.subsets.iter().cloned().collect();
        let expected: BTreeSet<Vec<usize>> = [vec![0], vec![1], vec![2], vec![1, 2], vec![]]
            .into_iter()
            .collect();
        assert_eq!(subsets, expected);
        let h = brzozowski_minimise(&worked_example());
        let want = denote_regex(&parse_regex("ab(a+ab)*", &ab()).unwrap(), &ab()).unwrap();
        assert_eq!(h, want);
        assert!(nfa_lang_equal(
            &worked_example(),
            &parse_regex("ab(a+ab)*", &ab())
                .unwrap()
                .thompson(&ab())
                .unwrap()
        )
        .unwrap());
    }

    #[test]
    fn full_language_minimises_to_one_state() {
        // a deliberately redundant DFA for (a+b)*
        let d = Dfa {
            alphabet: ab(),
            delta: vec![vec![1, 2], vec![2, 0], vec![0, 1]],
            initial: 0,
            accepting: vec![true; 3],
            subsets: vec![vec![]; 3],
        };
        let h = hopcroft_minimise(&d);
        assert_eq!(h.state_count(), 1);
        assert!(member(&h, "abba").unwrap());
    }

    #[test]
    fn minimal_input_is_preserved() {
        let h = denote_regex(&parse_regex("ab(a+ab)*", &ab()).unwrap(), &ab()).unwrap();
        let d = Dfa {
            alphabet: ab(),
            delta: h.delta().to_vec(),
            initial: h.initial(),
            accepting: (0..h.state_count()).map(|s| h.is_final(s)).collect(),
            subsets: vec![vec![]; h.state_count()],
        };
        assert_eq!(hopcroft_minimise(&d), h);
    }

    #[test]
    fn empty_language() {
        let mut a = Nfa::empty(ab());
        a.states = 1;
        a.initial.insert(0);
        assert_eq!(brzozowski_minimise(&a).state_count(), 1);
        assert_eq!(minimal_dfa(&a).state_count(), 1);
        assert_eq!(minimal_dfa(&a).trimmed_state_count(), 0);
    }
}
