use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kaa::diagram::{scalar, DiagramTerm, GeneratorLabel as G};
use kaa::encode::{regex_to_diagram, representation_to_nfa, MatrixDiagram};
use kaa::nfa::Label;
use kaa::normalform::{denote, restrict, sem_equal, sem_leq, to_generalised_matrix};
use kaa::oracle::nfa_lang_equal;
use kaa::regex::{denote_regex, lang_equal, parse_regex, random_regex, Alphabet, RegExp};
use kaa::rewrite::{determinise, minimise, replay_trace, RewriteTrace};
use kaa::sample::random_representation;

fn ab() -> Alphabet {
    Alphabet::parse("ab").unwrap()
}

fn regex() -> impl Strategy<Value = RegExp> {
    (any::<u64>(), 0usize..5).prop_map(|(seed, depth)| random_regex(seed, depth, &ab()))
}

fn label_set() -> impl Strategy<Value = BTreeSet<Label>> {
    prop::collection::btree_set(
        prop::sample::select(vec![Label::Eps, Label::Letter('a'), Label::Letter('b')]),
        0..3,
    )
}

fn labels_regex(set: &BTreeSet<Label>) -> RegExp {
    set.iter()
        .map(|l| match l {
            Label::Eps => RegExp::One,
            Label::Letter(c) => RegExp::Atom(*c),
        })
        .reduce(|x, y| RegExp::Sum(Box::new(x), Box::new(y)))
        .unwrap_or(RegExp::Zero)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn printed_regexes_parse_back(e in regex()) {
        prop_assert_eq!(parse_regex(&e.to_string(), &ab()).unwrap(), e);
    }

    #[test]
    fn state_elimination_solves_the_diagram(e in regex()) {
        let gm = to_generalised_matrix(&regex_to_diagram(&e)).unwrap();
        let want = denote_regex(&e, &ab()).unwrap();
        prop_assert!(lang_equal(&denote_regex(&gm.entries[0][0], &ab()).unwrap(), &want).unwrap());
    }

    #[test]
    fn restriction_picks_one_entry(cells in prop::collection::vec(label_set(), 4), i in 1usize..3, j in 1usize..3) {
        let mut m = MatrixDiagram::zero(2, 2);
        for (k, c) in cells.iter().enumerate() {
            m.entries[k / 2][k % 2] = c.clone();
        }
        let d = m.to_diagram().unwrap();
        let got = denote(&restrict(&d, i, j).unwrap(), &ab()).unwrap();
        let want = denote_regex(&labels_regex(&cells[(i - 1) * 2 + (j - 1)]), &ab()).unwrap();
        prop_assert!(lang_equal(&got.entries[0][0], &want).unwrap());
    }

    #[test]
    fn a_branch_is_below_the_sum(e in regex(), f in regex()) {
        let sum = DiagramTerm::seq_all(vec![
            DiagramTerm::gen(G::BlackCopy),
            regex_to_diagram(&f).par(regex_to_diagram(&e)),
            DiagramTerm::gen(G::BlackMerge),
        ]);
        prop_assert!(sem_leq(&regex_to_diagram(&e), &sum, &ab()).unwrap());
        let both = sem_leq(&sum, &regex_to_diagram(&e), &ab()).unwrap();
        let oracle = kaa::regex::lang_subset(
            &denote_regex(&f, &ab()).unwrap(),
            &denote_regex(&e, &ab()).unwrap(),
        ).unwrap();
        prop_assert_eq!(both, oracle);
    }

    #[test]
    fn scalar_agrees_with_its_encoding(e in regex()) {
        prop_assert!(sem_equal(&scalar(&e), &regex_to_diagram(&e), &ab()).unwrap());
    }

    #[test]
    fn determinise_preserves_language(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_representation(&mut rng, 5, &ab());
        let (det, trace) = determinise(&r).unwrap();
        prop_assert!(det.is_deterministic());
        prop_assert!(nfa_lang_equal(&representation_to_nfa(&r).unwrap(), &representation_to_nfa(&det).unwrap()).unwrap());
        let back = RewriteTrace::from_json(&trace.to_json()).unwrap();
        prop_assert_eq!(&back, &trace);
        prop_assert!(replay_trace(&r.to_graph(), &back).is_ok());
    }

    #[test]
    fn minimisation_is_idempotent(e in regex()) {
        let (r, _) = minimise(&regex_to_diagram(&e), &ab()).unwrap();
        let (again, trace) = minimise(&r.to_diagram().unwrap(), &ab()).unwrap();
        prop_assert_eq!(&again, &r);
        prop_assert!(trace.steps.iter().all(|s| s.axiom.is_macro()));
    }
}

#[test]
fn arden_solves_the_star_loop() {
    // X = ε + X a has least solution a*
    let d = kaa::encode::star_feedback(scalar(&RegExp::Atom('a')));
    let gm = to_generalised_matrix(&d).unwrap();
    let want = denote_regex(&parse_regex("a*", &ab()).unwrap(), &ab()).unwrap();
    assert!(lang_equal(&denote_regex(&gm.entries[0][0], &ab()).unwrap(), &want).unwrap());
}

#[test]
fn two_loop_system_is_solved() {
    // X0 = ε + X1 b, X1 = X0 a: X0 = (ab)*
    let mut m = MatrixDiagram::zero(3, 3);
    m.entries[0][1].insert(Label::Letter('a'));
    m.entries[1][0].insert(Label::Letter('b'));
    m.entries[2][0].insert(Label::Eps);
    m.entries[0][2].insert(Label::Eps);
    let r = kaa::encode::Representation {
        alphabet: ab(),
        l: 2,
        n: 1,
        m: 1,
        core: m,
    };
    r.validate().unwrap();
    let gm = to_generalised_matrix(&r.to_diagram().unwrap()).unwrap();
    let want = denote_regex(&parse_regex("(ab)*", &ab()).unwrap(), &ab()).unwrap();
    assert!(lang_equal(&denote_regex(&gm.entries[0][0], &ab()).unwrap(), &want).unwrap());
    assert_eq!(gm.n_in, 1);
}
