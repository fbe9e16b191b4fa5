//! Seeded random automata, representations and diagrams for tests and
//! the command line.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::diagram::{scalar, DiagramTerm, GeneratorLabel as G, ObjectType};
use crate::encode::{nfa_to_representation, Representation};
use crate::nfa::{Label, Nfa};
use crate::regex::{random_regex_with, Alphabet};

/// An ε-free automaton with 1..=`max_states` states, initial state 0,
/// and about 1.5 transitions per state and letter.
pub fn random_nfa<R: Rng>(rng: &mut R, max_states: usize, sigma: &Alphabet) -> Nfa {
    let states = rng.gen_range(1..=max_states.max(1));
    let mut a = Nfa::empty(sigma.clone());
    a.states = states;
    a.initial.insert(0);
    let p = (1.5 / states as f64).min(1.0);
    for s in 0..states {
        if rng.gen_bool(0.4) {
            a.finals.insert(s);
        }
        for &c in sigma.letters() {
            for t in 0..states {
                if rng.gen_bool(p) {
                    a.transitions.insert((s, Label::Letter(c), t));
                }
            }
        }
    }
    a
}

/// The 1 → 1 representation of a random automaton.
pub fn random_representation<R: Rng>(
    rng: &mut R,
    max_loops: usize,
    sigma: &Alphabet,
) -> Representation {
    nfa_to_representation(&random_nfa(rng, max_loops, sigma)).expect("random automata are ε-free")
}

fn layer(before: &[ObjectType], g: DiagramTerm, after: &[ObjectType]) -> DiagramTerm {
    DiagramTerm::par_all(vec![DiagramTerm::id(before), g, DiagramTerm::id(after)])
}

/// A diagram with a random ▶/◀ boundary, built from `layers` layers that
/// each apply one black generator, scalar, symmetry, cup or cap.
pub fn random_mixed_term<R: Rng>(
    rng: &mut R,
    width: usize,
    layers: usize,
    sigma: &Alphabet,
) -> DiagramTerm {
    use ObjectType::{Left, Right};
    let width = width.max(1);
    let mut wires: Vec<ObjectType> = (0..rng.gen_range(1..=width))
        .map(|_| if rng.gen_bool(0.6) { Right } else { Left })
        .collect();
    let mut terms = vec![DiagramTerm::id(&wires)];
    for _ in 0..layers {
        let len = wires.len();
        let mut options: Vec<(usize, &str)> = Vec::new();
        for p in 0..len {
            if wires[p] == Right {
                options.extend([(p, "scalar"), (p, "copy"), (p, "delete")]);
            }
            if p + 1 < len {
                options.push((p, "sym"));
                match (wires[p], wires[p + 1]) {
                    (Right, Right) => options.push((p, "merge")),
                    (Left, Right) => options.push((p, "cap")),
                    _ => {}
                }
            }
        }
        if len < width + 2 {
            for p in 0..=len {
                options.extend([(p, "unit"), (p, "cup")]);
            }
        }
        let &(p, op) = options.choose(rng).expect("unit and cup always apply");
        let (g, consumed, produced): (DiagramTerm, usize, Vec<ObjectType>) = match op {
            "scalar" => (scalar(&random_regex_with(rng, 2, sigma)), 1, vec![Right]),
            "copy" => (DiagramTerm::gen(G::BlackCopy), 1, vec![Right, Right]),
            "delete" => (DiagramTerm::gen(G::BlackDelete), 1, vec![]),
            "merge" => (DiagramTerm::gen(G::BlackMerge), 2, vec![Right]),
            "cap" => (DiagramTerm::gen(G::Cap), 2, vec![]),
            "sym" => (
                DiagramTerm::Sym(wires[p], wires[p + 1]),
                2,
                vec![wires[p + 1], wires[p]],
            ),
            "unit" => (DiagramTerm::gen(G::BlackUnit), 0, vec![Right]),
            _ => (DiagramTerm::gen(G::Cup), 0, vec![Right, Left]),
        };
        let after = wires[p + consumed..].to_vec();
        terms.push(layer(&wires[..p], g, &after));
        wires.splice(p..p + consumed, produced);
    }
    DiagramTerm::seq_all(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_well_formed() {
        let sigma = Alphabet::parse("abc").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            random_nfa(&mut rng, 6, &sigma).validate().unwrap();
            random_representation(&mut rng, 5, &sigma)
                .validate()
                .unwrap();
            let t = random_mixed_term(&mut rng, 3, 8, &sigma);
            t.typecheck().unwrap();
            t.to_port_graph().unwrap();
        }
    }
}
