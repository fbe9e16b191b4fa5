use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde_json::{json, Value};

use super::{eval_wire, Anchor, AxiomId, Direction, RewriteStep, RewriteTrace, Tracer};
use crate::diagram::{
    bend_graph, digest, smc_equal, DiagramTerm, GeneratorLabel as G, ObjectType, PortGraph, Source,
};
use crate::encode::{graph_to_representation, MatrixDiagram, Representation};
use crate::error::{Error, Result};
use crate::nfa::Label;
use crate::regex::Alphabet;

/// Finds the next red redex: deletions first, then copies, then actions
/// of compound expressions, each at the lowest node id.
fn next_redex(g: &PortGraph) -> Option<RewriteStep> {
    let inc = g.incidence();
    let feeder = |n: usize, p: usize| match g.wires[&inc.in_wire(n, p)].from {
        Source::Port(f, fp) => Some((f, fp, g.nodes[&f])),
        Source::Input(_) => None,
    };
    let val = |n: usize, p: usize| {
        eval_wire(g, &inc, g.wires[&inc.in_wire(n, p)].from).map(|e| e.to_string())
    };
    let step =
        |axiom, nodes: Vec<usize>, boundary: Vec<usize>, vals: Vec<(&str, Option<String>)>| {
            let mut subst = BTreeMap::new();
            for (k, v) in vals {
                subst.insert(k.to_string(), v?);
            }
            Some(RewriteStep {
                axiom,
                dir: Direction::Ltr,
                anchor: Anchor { nodes, boundary },
                subst,
                replacement: None,
            })
        };
    let of = |l: G| {
        g.nodes
            .iter()
            .filter(move |(_, &x)| x == l)
            .map(|(&n, _)| n)
    };

    for d in of(G::RedDelete) {
        let Some((f, fp, lab)) = feeder(d, 0) else {
            continue;
        };
        let nodes = vec![f, d];
        let found = match lab {
            G::Star => step(
                AxiomId::E5,
                nodes,
                vec![inc.in_wire(f, 0)],
                vec![("x", val(f, 0))],
            ),
            G::Prod | G::Sum => step(
                if lab == G::Prod {
                    AxiomId::E9
                } else {
                    AxiomId::E13
                },
                nodes,
                vec![inc.in_wire(f, 0), inc.in_wire(f, 1)],
                vec![("x", val(f, 0)), ("y", val(f, 1))],
            ),
            G::One => step(AxiomId::E11, nodes, vec![], vec![]),
            G::Zero => step(AxiomId::E14b, nodes, vec![], vec![]),
            G::Atom(c) => step(AxiomId::E7, nodes, vec![], vec![("a", Some(c.to_string()))]),
            G::RedCopy => step(
                if fp == 0 { AxiomId::E2L } else { AxiomId::E2R },
                nodes,
                vec![inc.in_wire(f, 0), inc.out_wire(f, 1 - fp)],
                vec![("x", val(f, 0))],
            ),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    for c in of(G::RedCopy) {
        let Some((f, _, lab)) = feeder(c, 0) else {
            continue;
        };
        let nodes = vec![f, c];
        let outs = vec![inc.out_wire(c, 0), inc.out_wire(c, 1)];
        let found = match lab {
            G::Star => step(
                AxiomId::E4,
                nodes,
                [vec![inc.in_wire(f, 0)], outs].concat(),
                vec![("x", val(f, 0))],
            ),
            G::Prod | G::Sum => step(
                if lab == G::Prod {
                    AxiomId::E8
                } else {
                    AxiomId::E14a
                },
                nodes,
                [vec![inc.in_wire(f, 0), inc.in_wire(f, 1)], outs].concat(),
                vec![("x", val(f, 0)), ("y", val(f, 1))],
            ),
            G::One => step(AxiomId::E10, nodes, outs, vec![]),
            G::Zero => step(AxiomId::E15, nodes, outs, vec![]),
            G::Atom(a) => step(AxiomId::E6, nodes, outs, vec![("a", Some(a.to_string()))]),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    for a in of(G::Action) {
        let Some((f, _, lab)) = feeder(a, 0) else {
            continue;
        };
        let nodes = vec![f, a];
        let black = vec![inc.in_wire(a, 1), inc.out_wire(a, 0)];
        let found = match lab {
            G::Prod | G::Sum => step(
                if lab == G::Prod {
                    AxiomId::C1
                } else {
                    AxiomId::C4
                },
                nodes,
                [vec![inc.in_wire(f, 0), inc.in_wire(f, 1)], black].concat(),
                vec![("x", val(f, 0)), ("y", val(f, 1))],
            ),
            G::Star => step(
                AxiomId::C5,
                nodes,
                [vec![inc.in_wire(f, 0)], black].concat(),
                vec![("x", val(f, 0))],
            ),
            G::One => step(AxiomId::C2, nodes, black, vec![]),
            G::Zero => step(AxiomId::C3, nodes, black, vec![]),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

fn atomise_into(t: &mut Tracer) -> Result<()> {
    while let Some(step) = next_redex(&t.graph) {
        t.step(step)?;
    }
    Ok(())
}

/// Rewrites until every action is applied to a single letter, citing one
/// red-block or action axiom per step.
pub fn atomise_graph(g: &PortGraph, sigma: &Alphabet) -> Result<(PortGraph, RewriteTrace)> {
    g.validate()?;
    let mut t = Tracer::new(g.clone(), sigma);
    atomise_into(&mut t)?;
    Ok(t.finish())
}

pub fn atomise(d: &DiagramTerm, sigma: &Alphabet) -> Result<(DiagramTerm, RewriteTrace)> {
    let (g, trace) = atomise_graph(&d.to_port_graph()?, sigma)?;
    Ok((g.to_term()?, trace))
}

/// A representation as adjacency lists.
#[derive(Clone, Debug)]
struct Auto {
    alphabet: Alphabet,
    m: usize,
    init: Vec<BTreeSet<usize>>,
    moves: Vec<BTreeMap<char, BTreeSet<usize>>>,
    outs: Vec<BTreeSet<usize>>,
}

impl Auto {
    fn of(r: &Representation) -> Auto {
        let letters = r.alphabet.letters();
        Auto {
            alphabet: r.alphabet.clone(),
            m: r.m,
            init: (0..r.n).map(|i| r.initial_of(i)).collect(),
            moves: (0..r.l)
                .map(|k| {
                    letters
                        .iter()
                        .map(|&c| (c, r.successors(k, c)))
                        .filter(|(_, s)| !s.is_empty())
                        .collect()
                })
                .collect(),
            outs: (0..r.l)
                .map(|k| (0..r.m).filter(|&j| !r.d_lm(k, j).is_empty()).collect())
                .collect(),
        }
    }

    fn to_rep(&self) -> Representation {
        let (l, n, m) = (self.moves.len(), self.init.len(), self.m);
        let mut core = MatrixDiagram::zero(l + n, l + m);
        for (k, row) in self.moves.iter().enumerate() {
            for (&c, ts) in row {
                for &t in ts {
                    core.entries[k][t].insert(Label::Letter(c));
                }
            }
            for &j in &self.outs[k] {
                core.entries[k][l + j].insert(Label::Eps);
            }
        }
        for (i, ks) in self.init.iter().enumerate() {
            for &k in ks {
                core.entries[l + i][k].insert(Label::Eps);
            }
        }
        Representation {
            alphabet: self.alphabet.clone(),
            l,
            n,
            m,
            core,
        }
    }

    fn reachable(&self) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = self.init.iter().flatten().copied().collect();
        while let Some(k) = queue.pop_front() {
            if seen.insert(k) {
                queue.extend(self.moves[k].values().flatten());
            }
        }
        seen
    }

    fn coreachable(&self) -> BTreeSet<usize> {
        let mut good: BTreeSet<usize> = (0..self.moves.len())
            .filter(|&k| !self.outs[k].is_empty())
            .collect();
        loop {
            let more: Vec<usize> = (0..self.moves.len())
                .filter(|k| !good.contains(k))
                .filter(|&k| self.moves[k].values().flatten().any(|t| good.contains(t)))
                .collect();
            if more.is_empty() {
                return good;
            }
            good.extend(more);
        }
    }

    /// Keeps only the listed loops, preserving their order.
    fn restrict_to(&mut self, keep: &BTreeSet<usize>) {
        let new_id: BTreeMap<usize, usize> =
            keep.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        let map = |s: &BTreeSet<usize>| -> BTreeSet<usize> {
            s.iter().filter_map(|k| new_id.get(k).copied()).collect()
        };
        self.init = self.init.iter().map(map).collect();
        let moves = std::mem::take(&mut self.moves);
        let outs = std::mem::take(&mut self.outs);
        for (k, (row, out)) in moves.into_iter().zip(outs).enumerate() {
            if keep.contains(&k) {
                self.moves.push(
                    row.iter()
                        .map(|(&c, ts)| (c, map(ts)))
                        .filter(|(_, s)| !s.is_empty())
                        .collect(),
                );
                self.outs.push(out);
            }
        }
    }

    /// Renumbers loops in breadth-first order from the inputs, letters in
    /// alphabet order; unreached loops keep their relative order at the end.
    fn canonical(&self) -> Auto {
        let mut order = Vec::new();
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<usize> = self.init.iter().flatten().copied().collect();
        while let Some(k) = queue.pop_front() {
            if seen.insert(k) {
                order.push(k);
                for c in self.alphabet.letters() {
                    queue.extend(self.moves[k].get(c).into_iter().flatten());
                }
            }
        }
        order.extend((0..self.moves.len()).filter(|k| !seen.contains(k)));
        let mut new_id = vec![0; order.len()];
        for (i, &k) in order.iter().enumerate() {
            new_id[k] = i;
        }
        let map = |s: &BTreeSet<usize>| s.iter().map(|&k| new_id[k]).collect::<BTreeSet<_>>();
        Auto {
            alphabet: self.alphabet.clone(),
            m: self.m,
            init: self.init.iter().map(map).collect(),
            moves: order
                .iter()
                .map(|&k| self.moves[k].iter().map(|(&c, ts)| (c, map(ts))).collect())
                .collect(),
            outs: order.iter().map(|&k| self.outs[k].clone()).collect(),
        }
    }
}

/// Subset construction as a sequence of loop merges. Loops carry the set
/// of original loops they stand for; each merge either reuses the loop
/// with the merged set or adds one whose row is the union of the merged
/// rows. Unreachable loops are dropped at the end.
fn determinise_steps(r: &Representation) -> Result<Vec<(AxiomId, Representation)>> {
    r.validate()?;
    if r.is_deterministic() {
        return Ok(Vec::new());
    }
    let mut a = Auto::of(r);
    let mut labels: Vec<BTreeSet<usize>> = (0..r.l).map(|k| BTreeSet::from([k])).collect();
    let mut steps = Vec::new();
    let merged = |a: &mut Auto, labels: &mut Vec<BTreeSet<usize>>, set: &BTreeSet<usize>| {
        let label: BTreeSet<usize> = set.iter().flat_map(|&k| labels[k].clone()).collect();
        if let Some(k) = labels.iter().position(|x| *x == label) {
            return k;
        }
        let mut row: BTreeMap<char, BTreeSet<usize>> = BTreeMap::new();
        let mut out = BTreeSet::new();
        for &k in set {
            for (&c, ts) in &a.moves[k] {
                row.entry(c).or_default().extend(ts);
            }
            out.extend(&a.outs[k]);
        }
        a.moves.push(row);
        a.outs.push(out);
        labels.push(label);
        a.moves.len() - 1
    };
    for i in 0..a.init.len() {
        if a.init[i].len() != 1 {
            let set = a.init[i].clone();
            let k = merged(&mut a, &mut labels, &set);
            a.init[i] = BTreeSet::from([k]);
            steps.push((AxiomId::Cpy, a.to_rep()));
        }
    }
    loop {
        let next = (0..a.moves.len()).find_map(|k| {
            a.moves[k]
                .iter()
                .find(|(_, ts)| ts.len() >= 2)
                .map(|(&c, ts)| (k, c, ts.clone()))
        });
        let Some((k, c, set)) = next else {
            break;
        };
        let t = merged(&mut a, &mut labels, &set);
        a.moves[k].insert(c, BTreeSet::from([t]));
        steps.push((AxiomId::Cpy, a.to_rep()));
    }
    let live = a.reachable();
    if live.len() < a.moves.len() {
        a.restrict_to(&live);
        steps.push((AxiomId::CoDel, a.to_rep()));
    }
    Ok(steps)
}

fn replay_reps(
    r: &Representation,
    steps: Vec<(AxiomId, Direction, Representation)>,
) -> Result<(Representation, RewriteTrace)> {
    let mut t = Tracer::new(r.to_graph(), &r.alphabet);
    let mut last = r.clone();
    for (axiom, dir, rep) in steps {
        t.replace(axiom, dir, rep.to_graph())?;
        last = rep;
    }
    Ok((last, t.finish().1))
}

/// Deterministic representation with the same semantics, built by
/// merging loops; already deterministic input is returned unchanged.
pub fn determinise(r: &Representation) -> Result<(Representation, RewriteTrace)> {
    let steps = determinise_steps(r)?
        .into_iter()
        .map(|(a, rep)| (a, Direction::Ltr, rep))
        .collect();
    replay_reps(r, steps)
}

/// Swaps inputs with outputs and reverses every loop transition.
pub fn reverse(r: &Representation) -> Representation {
    Representation {
        alphabet: r.alphabet.clone(),
        l: r.l,
        n: r.m,
        m: r.n,
        core: r.core.transpose(),
    }
}

/// Determinisation of the reverse, read back in the original direction.
pub fn co_determinise(r: &Representation) -> Result<(Representation, RewriteTrace)> {
    let steps = determinise_steps(&reverse(r))?
        .into_iter()
        .map(|(a, rep)| {
            let a = if a == AxiomId::Cpy {
                AxiomId::CoCpy
            } else {
                AxiomId::Del
            };
            (a, Direction::Ltr, reverse(&rep))
        })
        .collect();
    replay_reps(r, steps)
}

/// Drops loops no input reaches, then loops that reach no output.
pub fn trim_useless(r: &Representation) -> Result<(Representation, RewriteTrace)> {
    r.validate()?;
    let mut a = Auto::of(r);
    let mut steps = Vec::new();
    let live = a.reachable();
    if live.len() < a.moves.len() {
        a.restrict_to(&live);
        steps.push((AxiomId::CoDel, Direction::Ltr, a.to_rep()));
    }
    let live = a.coreachable();
    if live.len() < a.moves.len() {
        a.restrict_to(&live);
        steps.push((AxiomId::Del, Direction::Ltr, a.to_rep()));
    }
    replay_reps(r, steps)
}

/// Adds a dead loop so every loop has exactly one move per letter.
pub fn totalise(r: &Representation) -> Result<(Representation, RewriteTrace)> {
    r.validate()?;
    if !r.is_deterministic() {
        return Err(Error::NotDeterministic);
    }
    let mut a = Auto::of(r);
    let letters = a.alphabet.letters().to_vec();
    if a.moves.iter().all(|row| row.len() == letters.len()) {
        return replay_reps(r, Vec::new());
    }
    let dead = a.moves.len();
    a.moves.push(BTreeMap::new());
    a.outs.push(BTreeSet::new());
    for row in &mut a.moves {
        for &c in &letters {
            row.entry(c).or_insert_with(|| BTreeSet::from([dead]));
        }
    }
    replay_reps(r, vec![(AxiomId::Del, Direction::Rtl, a.to_rep())])
}

fn is_left_to_right(g: &PortGraph) -> bool {
    g.dom
        .0
        .iter()
        .chain(&g.cod.0)
        .all(|&o| o == ObjectType::Right)
}

/// Bends `d` if needed, atomises it and reads it as a representation.
fn start(d: &DiagramTerm, sigma: &Alphabet) -> Result<(Representation, Tracer)> {
    let g = d.to_port_graph()?;
    let g = if is_left_to_right(&g) {
        g
    } else {
        bend_graph(&g)?
    };
    let mut t = Tracer::new(g, sigma);
    atomise_into(&mut t)?;
    let r = graph_to_representation(&t.graph, sigma)?;
    t.replace(AxiomId::Repr, Direction::Ltr, r.to_graph())?;
    Ok((r, t))
}

type Stage = fn(&Representation) -> Result<(Representation, RewriteTrace)>;

fn run_stages(t: &mut Tracer, mut r: Representation, stages: &[Stage]) -> Result<Representation> {
    for stage in stages {
        let (next, trace) = stage(&r)?;
        for step in trace.steps {
            let rep = step.replacement.expect("stage steps are macro-steps");
            t.replace(step.axiom, step.dir, rep)?;
        }
        r = next;
    }
    Ok(r)
}

/// Reads `d` as a representation and applies `stage` to it, with one
/// trace running from `d` (bent, if it has ◀ boundary wires) to the
/// result.
pub fn through_representation(
    d: &DiagramTerm,
    sigma: &Alphabet,
    stage: Stage,
) -> Result<(Representation, RewriteTrace)> {
    let (r, mut t) = start(d, sigma)?;
    let r = run_stages(&mut t, r, &[stage])?;
    Ok((r, t.finish().1))
}

/// Minimal deterministic representation, with loops numbered canonically,
/// and the trace that derives it. A diagram with left-pointing boundary
/// wires is bent first, so the trace starts from the bent diagram.
pub fn minimise(d: &DiagramTerm, sigma: &Alphabet) -> Result<(Representation, RewriteTrace)> {
    let (r, mut t) = start(d, sigma)?;
    let r = run_stages(
        &mut t,
        r,
        &[trim_useless, co_determinise, determinise, trim_useless],
    )?;
    let canon = Auto::of(&r).canonical().to_rep();
    if digest(&canon.to_graph()) != digest(&t.graph) {
        t.replace(AxiomId::Reorder, Direction::Ltr, canon.to_graph())?;
    }
    Ok((canon, t.finish().1))
}

/// Verdict of the diagrammatic equivalence check with both derivations.
#[derive(Clone, Debug)]
pub struct EquivCertificate {
    pub equal: bool,
    pub left: Representation,
    pub right: Representation,
    pub left_trace: RewriteTrace,
    pub right_trace: RewriteTrace,
}

impl EquivCertificate {
    pub fn to_value(&self) -> Value {
        json!({
            "equal": self.equal,
            "left": {"minimal": self.left.to_value(), "trace": self.left_trace.to_value()},
            "right": {"minimal": self.right.to_value(), "trace": self.right_trace.to_value()},
        })
    }
}

/// Minimises both diagrams and compares the results up to isomorphism.
pub fn decide_equiv(
    d: &DiagramTerm,
    e: &DiagramTerm,
    sigma: &Alphabet,
) -> Result<EquivCertificate> {
    let (dd, dc) = d.typecheck()?;
    let (ed, ec) = e.typecheck()?;
    if dd != ed || dc != ec {
        return Err(Error::InterfaceMismatch(
            format!("{dd} -> {dc}"),
            format!("{ed} -> {ec}"),
        ));
    }
    let (left, left_trace) = minimise(d, sigma)?;
    let (right, right_trace) = minimise(e, sigma)?;
    Ok(EquivCertificate {
        equal: smc_equal(&left.to_graph(), &right.to_graph()),
        left,
        right,
        left_trace,
        right_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{nfa_to_diagram_matrix, nfa_to_representation, regex_to_diagram};
    use crate::nfa::Nfa;
    use crate::normalform::sem_equal_graph;
    use crate::oracle::minimal_dfa;
    use crate::regex::{denote_regex, parse_regex};
    use crate::rewrite::replay_trace;

    fn ab() -> Alphabet {
        Alphabet::parse("ab").unwrap()
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

    #[test]
    fn atomise_leaves_only_letters() {
        for s in ["ab", "(a+b)*a", "(ab)*", "0+1", "a*b*"] {
            let e = parse_regex(s, &ab()).unwrap();
            let d = crate::diagram::scalar(&e);
            let (at, trace) = atomise(&d, &ab()).unwrap();
            assert!(crate::diagram::is_atomic(&at).unwrap(), "{s}");
            assert!(crate::normalform::sem_equal(&d, &at, &ab()).unwrap(), "{s}");
            let g = replay_trace(&d.to_port_graph().unwrap(), &trace).unwrap();
            assert_eq!(digest(&g), trace.final_digest);
        }
    }

    #[test]
    fn determinise_worked_example() {
        let r = nfa_to_representation(&worked_example()).unwrap();
        assert!(!r.is_deterministic());
        let (det, trace) = determinise(&r).unwrap();
        assert!(det.is_deterministic());
        assert!(!trace.steps.is_empty());
        assert!(sem_equal_graph(&r.to_graph(), &det.to_graph(), &ab()).unwrap());
        replay_trace(&r.to_graph(), &trace).unwrap();
        let (again, t2) = determinise(&det).unwrap();
        assert_eq!(again, det);
        assert!(t2.steps.is_empty());
    }

    #[test]
    fn co_determinise_and_totalise_preserve_semantics() {
        let r = nfa_to_representation(&worked_example()).unwrap();
        let (co, trace) = co_determinise(&r).unwrap();
        assert!(reverse(&co).is_deterministic());
        replay_trace(&r.to_graph(), &trace).unwrap();
        let (det, _) = determinise(&r).unwrap();
        let (tot, trace) = totalise(&det).unwrap();
        assert!(tot.is_deterministic());
        assert_eq!(tot.l, det.l + 1);
        replay_trace(&det.to_graph(), &trace).unwrap();
        assert!(matches!(totalise(&r), Err(Error::NotDeterministic)));
    }

    #[test]
    fn minimise_matches_oracle() {
        for s in [
            "ab(a+ab)*",
            "(a+b)*abb",
            "a*+b*",
            "0",
            "1",
            "(a*b*)*",
            "aa*+a",
        ] {
            let e = parse_regex(s, &ab()).unwrap();
            let d = regex_to_diagram(&e);
            let (r, trace) = minimise(&d, &ab()).unwrap();
            let want = denote_regex(&e, &ab()).unwrap();
            assert_eq!(r.l, want.trimmed_state_count(), "{s}");
            assert!(r.is_deterministic() || r.l == 0, "{s}");
            let g = replay_trace(&d.to_port_graph().unwrap(), &trace).unwrap();
            assert!(smc_equal(&g, &r.to_graph()), "{s}");
        }
        let d = nfa_to_diagram_matrix(&worked_example()).unwrap();
        let (r, _) = minimise(&d, &ab()).unwrap();
        assert_eq!(r.l, minimal_dfa(&worked_example()).trimmed_state_count());
    }

    #[test]
    fn equivalence_verdicts() {
        let cases = [
            ("(a+b)*", "(a*b*)*", true),
            ("a(ba)*", "(ab)*a", true),
            ("a*", "1+aa*", true),
            ("a*", "a*b", false),
            ("ab", "ba", false),
        ];
        for (x, y, want) in cases {
            let d = regex_to_diagram(&parse_regex(x, &ab()).unwrap());
            let e = regex_to_diagram(&parse_regex(y, &ab()).unwrap());
            let cert = decide_equiv(&d, &e, &ab()).unwrap();
            assert_eq!(cert.equal, want, "{x} vs {y}");
        }
    }
}
