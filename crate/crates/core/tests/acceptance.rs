//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always show up in `cargo test` output.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kaa::diagram::{
    bend_to_left_to_right, normalise_snakes, scalar, smc_equal, unbend, DiagramTerm,
};
use kaa::encode::{
    diagram_to_representation, nfa_to_diagram_graph, nfa_to_diagram_matrix, regex_to_diagram,
    representation_to_nfa, star_feedback,
};
use kaa::nfa::{Label, Nfa};
use kaa::normalform::{denote, to_generalised_matrix};
use kaa::oracle::{minimal_dfa, nfa_lang_equal};
use kaa::regex::{denote_regex, lang_equal, parse_regex, random_regex_with, Alphabet, RegExp};
use kaa::rewrite::{
    atomise, check_axiom, co_determinise, decide_equiv, determinise, minimise, replay_trace,
    totalise, trim_useless, AxiomId, RewriteTrace,
};
use kaa::sample::{random_mixed_term, random_nfa, random_representation};
use kaa::{Error, Result};

const AXIOM_SAMPLES: usize = 20;
const AXIOM_BUDGET: Duration = Duration::from_secs(60);
const ROUNDTRIP_REGEXES: usize = 200;
const REGEX_DEPTH: usize = 5;
const KLEENE_NFAS: usize = 100;
const KLEENE_REGEXES: usize = 100;
const NFA_MAX_STATES: usize = 6;
const CORPUS_REPRESENTATIONS: usize = 100;
const CORPUS_MAX_LOOPS: usize = 6;
const MINIMALITY_REGEXES: usize = 200;
const EQUIV_PAIRS: usize = 500;
const EQUIV_CONSTRUCTED_MIN: usize = 50;
const EQUIV_BUDGET: Duration = Duration::from_secs(300);
const BENDING_DIAGRAMS: usize = 100;

type Outcome = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Result<Outcome>);

fn ab() -> Alphabet {
    Alphabet::parse("ab").unwrap()
}

fn fail_if(failures: Vec<String>, ok: String) -> Outcome {
    match failures.first() {
        None => Ok(ok),
        Some(first) => Err(format!("{} failures, first: {first}", failures.len())),
    }
}

fn worked_example() -> Nfa {
    let mut a = Nfa::empty(ab());
    a.states = 3;
    for (s, c, t) in [(0, 'a', 1), (1, 'b', 2), (2, 'a', 1), (2, 'a', 2)] {
        a.add(s, Label::Letter(c), t).unwrap();
    }
    a.initial.insert(0);
    a.finals.insert(2);
    a
}

fn axiom_soundness() -> Result<Outcome> {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut count = 0;
    for (k, id) in AxiomId::primitive().enumerate() {
        let report = check_axiom(id, AXIOM_SAMPLES, 1000 + k as u64, &ab())?;
        count += 1;
        for f in report.failures {
            failures.push(format!("{id}: {f}"));
        }
    }
    let took = start.elapsed();
    if took > AXIOM_BUDGET {
        failures.push(format!("took {took:?}, budget {AXIOM_BUDGET:?}"));
    }
    Ok(fail_if(
        failures,
        format!("{count} axioms x {AXIOM_SAMPLES} substitutions in {took:.1?}"),
    ))
}

fn regex_roundtrip() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    for _ in 0..ROUNDTRIP_REGEXES {
        let e = random_regex_with(&mut rng, REGEX_DEPTH, &ab());
        let got = denote(&regex_to_diagram(&e), &ab())?;
        if !lang_equal(&got.entries[0][0], &denote_regex(&e, &ab())?)? {
            failures.push(e.to_string());
        }
    }
    Ok(fail_if(failures, format!("{ROUNDTRIP_REGEXES} regexes")))
}

fn worked_example_encodings() -> Result<Outcome> {
    let want = denote_regex(&parse_regex("ab(a+ab)*", &ab())?, &ab())?;
    let mut failures = Vec::new();
    for (style, d) in [
        ("matrix", nfa_to_diagram_matrix(&worked_example())?),
        ("graph", nfa_to_diagram_graph(&worked_example())?),
    ] {
        if !lang_equal(&denote(&d, &ab())?.entries[0][0], &want)? {
            failures.push(style.to_string());
        }
    }
    Ok(fail_if(failures, "both encodings denote ab(a+ab)*".into()))
}

fn kleene_both_ways() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let alphabets = ["a", "ab", "abc"];
    for k in 0..KLEENE_NFAS {
        let sigma = Alphabet::parse(alphabets[k % 3])?;
        let a = random_nfa(&mut rng, NFA_MAX_STATES, &sigma);
        let d = if k % 2 == 0 {
            nfa_to_diagram_matrix(&a)?
        } else {
            nfa_to_diagram_graph(&a)?
        };
        let back = representation_to_nfa(&diagram_to_representation(&d, &sigma)?)?;
        if !nfa_lang_equal(&a, &back)? {
            failures.push(format!("automaton {}", a.to_json()));
        }
    }
    for _ in 0..KLEENE_REGEXES {
        let e = random_regex_with(&mut rng, REGEX_DEPTH, &ab());
        let r = diagram_to_representation(&regex_to_diagram(&e), &ab())?;
        if !lang_equal(&r.denote()?.entries[0][0], &denote_regex(&e, &ab())?)? {
            failures.push(format!("regex {e}"));
        }
    }
    Ok(fail_if(
        failures,
        format!("{KLEENE_NFAS} automata and {KLEENE_REGEXES} regexes"),
    ))
}

fn corpus() -> Vec<kaa::encode::Representation> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..CORPUS_REPRESENTATIONS)
        .map(|_| random_representation(&mut rng, CORPUS_MAX_LOOPS, &ab()))
        .collect()
}

fn determinisation() -> Result<Outcome> {
    let mut failures = Vec::new();
    for r in corpus() {
        let (det, _) = determinise(&r)?;
        let before = representation_to_nfa(&r)?;
        if !det.is_deterministic() {
            failures.push(format!("not deterministic: {}", before.to_json()));
        } else if !nfa_lang_equal(&before, &representation_to_nfa(&det)?)? {
            failures.push(format!("language changed: {}", before.to_json()));
        } else if det.l > 1 << r.l {
            failures.push(format!("{} loops from {}", det.l, r.l));
        }
    }
    Ok(fail_if(
        failures,
        format!("{CORPUS_REPRESENTATIONS} representations"),
    ))
}

fn minimality() -> Result<Outcome> {
    let mut failures = Vec::new();
    for r in corpus() {
        let (min, _) = minimise(&r.to_diagram()?, &ab())?;
        let want = minimal_dfa(&representation_to_nfa(&r)?).trimmed_state_count();
        if min.l != want {
            failures.push(format!("{} loops, oracle {want}", min.l));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..MINIMALITY_REGEXES {
        let e = random_regex_with(&mut rng, REGEX_DEPTH, &ab());
        let (min, _) = minimise(&regex_to_diagram(&e), &ab())?;
        let want = denote_regex(&e, &ab())?.trimmed_state_count();
        if min.l != want {
            failures.push(format!("{e}: {} loops, oracle {want}", min.l));
        }
    }
    Ok(fail_if(
        failures,
        format!("{CORPUS_REPRESENTATIONS} representations and {MINIMALITY_REGEXES} regexes"),
    ))
}

/// A pair of expressions equal by a standard law, chosen by `k`.
fn equivalent_pair(e: RegExp, k: usize) -> (RegExp, RegExp) {
    let star = |x: RegExp| RegExp::Star(Box::new(x));
    let prod = |x: RegExp, y: RegExp| RegExp::Prod(Box::new(x), Box::new(y));
    let sum = |x: RegExp, y: RegExp| RegExp::Sum(Box::new(x), Box::new(y));
    match k % 6 {
        0 => (e.clone(), sum(e.clone(), e)),
        1 => (e.clone(), prod(e, RegExp::One)),
        2 => (e.clone(), prod(RegExp::One, e)),
        3 => (e.clone(), sum(e, RegExp::Zero)),
        4 => (star(e.clone()), star(star(e))),
        _ => (star(e.clone()), sum(RegExp::One, prod(e.clone(), star(e)))),
    }
}

fn equivalence_decision() -> Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut failures = Vec::new();
    let (mut constructed, mut equal) = (0, 0);
    for k in 0..EQUIV_PAIRS {
        let (e, f) = if k % 5 == 0 {
            constructed += 1;
            equivalent_pair(random_regex_with(&mut rng, REGEX_DEPTH, &ab()), k / 5)
        } else {
            (
                random_regex_with(&mut rng, REGEX_DEPTH, &ab()),
                random_regex_with(&mut rng, REGEX_DEPTH, &ab()),
            )
        };
        let (x, y) = (denote_regex(&e, &ab())?, denote_regex(&f, &ab())?);
        let want = lang_equal(&x, &y)?;
        let cert = decide_equiv(&regex_to_diagram(&e), &regex_to_diagram(&f), &ab())?;
        equal += usize::from(want);
        if k % 5 == 0 && !want {
            failures.push(format!("constructed pair {e} vs {f} differs"));
        }
        if cert.equal != want {
            failures.push(format!("{e} vs {f}: decided {}, oracle {want}", cert.equal));
        }
    }
    if constructed < EQUIV_CONSTRUCTED_MIN {
        failures.push(format!("only {constructed} constructed pairs"));
    }
    let took = start.elapsed();
    if took > EQUIV_BUDGET {
        failures.push(format!("took {took:?}, budget {EQUIV_BUDGET:?}"));
    }
    Ok(fail_if(
        failures,
        format!(
            "{EQUIV_PAIRS} pairs ({constructed} constructed, {equal} equivalent) in {took:.1?}"
        ),
    ))
}

fn star_decomposition() -> Result<Outcome> {
    let a = RegExp::Atom('a');
    let d = star_feedback(scalar(&a));
    let want = denote_regex(&RegExp::Star(Box::new(a)), &ab())?;
    let mut failures = Vec::new();
    if !lang_equal(&denote(&d, &ab())?.entries[0][0], &want)? {
        failures.push("denotation".to_string());
    }
    let gm = to_generalised_matrix(&d)?;
    let solved = &gm.entries[0][0];
    if !lang_equal(&denote_regex(solved, &ab())?, &want)? {
        failures.push(format!("state elimination gave {solved}"));
    }
    Ok(fail_if(
        failures,
        format!("state elimination gives {solved}"),
    ))
}

fn replays(g: &kaa::diagram::PortGraph, t: &RewriteTrace, what: &str, failures: &mut Vec<String>) {
    if let Err(e) = replay_trace(g, t) {
        failures.push(format!("{what}: {e}"));
    }
}

fn trace_certificates() -> Result<Outcome> {
    let mut failures = Vec::new();
    let mut traces = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let e = random_regex_with(&mut rng, 4, &ab());
        let d = scalar(&e);
        let (_, t) = atomise(&d, &ab())?;
        replays(&d.to_port_graph()?, &t, "atomise", &mut failures);
        let (_, t) = minimise(&d, &ab())?;
        replays(&d.to_port_graph()?, &t, "minimise", &mut failures);
        traces += 2;
    }
    for r in corpus().iter().take(10) {
        let g = r.to_graph();
        let (det, t) = determinise(r)?;
        replays(&g, &t, "determinise", &mut failures);
        let (_, t) = co_determinise(r)?;
        replays(&g, &t, "co_determinise", &mut failures);
        let (_, t) = trim_useless(r)?;
        replays(&g, &t, "trim_useless", &mut failures);
        let (_, t) = totalise(&det)?;
        replays(&det.to_graph(), &t, "totalise", &mut failures);
        traces += 4;
    }

    // mutations of one minimisation trace
    let d = scalar(&parse_regex("(a+b)*ab", &ab())?);
    let g = d.to_port_graph()?;
    let (_, good) = minimise(&d, &ab())?;
    let first_primitive = good
        .steps
        .iter()
        .position(|s| !s.axiom.is_macro())
        .expect("a compound regex needs red rewriting");

    let mut bad = good.clone();
    let step = &mut bad.steps[first_primitive];
    step.axiom = if step.axiom == AxiomId::B10 {
        AxiomId::B2
    } else {
        AxiomId::B10
    };
    step.subst.clear();
    match replay_trace(&g, &bad) {
        Err(Error::Step { index, .. }) if index == first_primitive => {}
        other => failures.push(format!("corrupted axiom id gave {other:?}")),
    }

    let mut bad = good.clone();
    bad.steps[first_primitive].anchor.nodes.reverse();
    bad.steps[first_primitive].anchor.nodes.pop();
    match replay_trace(&g, &bad) {
        Err(Error::Step { index, source }) if index == first_primitive => {
            if !matches!(*source, Error::Redex(_)) {
                failures.push(format!("corrupted anchor gave {source}"));
            }
        }
        other => failures.push(format!("corrupted anchor gave {other:?}")),
    }

    let mut bad = good.clone();
    bad.final_digest = "0".repeat(64);
    match replay_trace(&g, &bad) {
        Err(Error::DigestMismatch { which: "final", .. }) => {}
        other => failures.push(format!("corrupted digest gave {other:?}")),
    }
    Ok(fail_if(
        failures,
        format!("{traces} traces replayed, 3 mutations rejected"),
    ))
}

fn wire_bending() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut failures = Vec::new();
    let mut mixed = 0;
    for _ in 0..BENDING_DIAGRAMS {
        let t: DiagramTerm = random_mixed_term(&mut rng, 3, 8, &ab());
        let (dom, cod) = t.typecheck()?;
        mixed += usize::from(
            dom.0
                .iter()
                .chain(&cod.0)
                .any(|o| *o == kaa::diagram::ObjectType::Left),
        );
        let back = unbend(&bend_to_left_to_right(&t)?, &dom, &cod)?;
        let lhs = normalise_snakes(&back.to_port_graph()?);
        let rhs = normalise_snakes(&t.to_port_graph()?);
        if !smc_equal(&lhs, &rhs) {
            failures.push(kaa::diagram::print_kad(&t));
        }
    }
    Ok(fail_if(
        failures,
        format!("{BENDING_DIAGRAMS} diagrams, {mixed} with a ◀ boundary wire"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("axiom soundness", axiom_soundness),
        ("regex encoding round trip", regex_roundtrip),
        ("worked example encodings", worked_example_encodings),
        ("Kleene theorem both ways", kleene_both_ways),
        ("determinisation", determinisation),
        ("minimality", minimality),
        ("equivalence decision", equivalence_decision),
        ("star decomposition", star_decomposition),
        ("trace certificates", trace_certificates),
        ("wire bending", wire_bending),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    let mut results = BTreeMap::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let line = match run() {
            Ok(Ok(detail)) => format!("PASS {:>2} {name}: {detail}", k + 1),
            Ok(Err(detail)) => {
                failed += 1;
                format!("FAIL {:>2} {name}: {detail}", k + 1)
            }
            Err(e) => {
                failed += 1;
                format!("FAIL {:>2} {name}: error: {e}", k + 1)
            }
        };
        println!("{line}");
        results.insert(k, line);
    }
    println!("acceptance: {} run, {failed} failed", results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
