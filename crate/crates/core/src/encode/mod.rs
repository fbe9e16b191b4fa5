//! Translations between regular expressions, automata, diagrams and
//! traced representations.

mod repr;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::diagram::{scalar, trace, DiagramTerm, GeneratorLabel as G, GraphBuilder, ObjectType};
use crate::error::Result;
use crate::nfa::{Label, Nfa};
use crate::normalform::flow_net;
use crate::regex::RegExp;

pub use repr::{
    diagram_to_representation, graph_to_representation, nfa_to_representation,
    representation_to_nfa, MatrixDiagram, Representation,
};
pub(crate) use repr::{fan_in, fan_out, traced_graph};

fn right() -> DiagramTerm {
    DiagramTerm::id(&[ObjectType::Right])
}

/// Atomic left-to-right diagram `▶ → ▶` appending `⟦e⟧` to the incoming
/// language.
pub fn regex_to_diagram(e: &RegExp) -> DiagramTerm {
    match e {
        RegExp::Zero => DiagramTerm::gen(G::BlackDelete).seq(DiagramTerm::gen(G::BlackUnit)),
        RegExp::One => right(),
        RegExp::Atom(_) => scalar(e),
        RegExp::Sum(l, r) => DiagramTerm::gen(G::BlackCopy)
            .seq(regex_to_diagram(l).par(regex_to_diagram(r)))
            .seq(DiagramTerm::gen(G::BlackMerge)),
        RegExp::Prod(l, r) => regex_to_diagram(l).seq(regex_to_diagram(r)),
        RegExp::Star(x) => star_feedback(regex_to_diagram(x)),
    }
}

/// `trace(merge ; copy ; (id ⊗ body))`: the input joins the loop, the
/// joined language leaves and is fed back through `body`.
pub fn star_feedback(body: DiagramTerm) -> DiagramTerm {
    let f = DiagramTerm::gen(G::BlackMerge)
        .seq(DiagramTerm::gen(G::BlackCopy))
        .seq(right().par(body));
    trace(f, 1).expect("feedback body is ▶ → ▶")
}

/// Matrix-style encoding: one loop wire per state closing the transition
/// matrix, the input injected at the initial state and accepting states
/// merged into the output.
pub fn nfa_to_diagram_matrix(a: &Nfa) -> Result<DiagramTerm> {
    a.validate()?;
    let q0 = a.single_initial()?;
    let l = a.states;
    let mut core = MatrixDiagram::zero(l + 1, l + 1);
    for &(s, lab, t) in &a.transitions {
        core.entries[s][t].insert(lab);
    }
    core.entries[l][q0].insert(Label::Eps);
    for &q in &a.finals {
        core.entries[q][l].insert(Label::Eps);
    }
    traced_graph(l, 1, &core).to_term()
}

/// Graph-style encoding: every state merges its incoming edges and copies
/// to its outgoing ones; every edge is its own loop wire.
pub fn nfa_to_diagram_graph(a: &Nfa) -> Result<DiagramTerm> {
    a.validate()?;
    let q0 = a.single_initial()?;
    let mut b = GraphBuilder::new();
    let input = b.input(ObjectType::Right);
    let edges: Vec<(usize, Label, usize)> = a.transitions.iter().copied().collect();
    let mut lefts = Vec::new();
    let mut incoming: Vec<Vec<_>> = vec![Vec::new(); a.states];
    incoming[q0].push(input);
    for &(_, _, t) in &edges {
        let cup = b.node(G::Cup, &[]);
        incoming[t].push(cup[0]);
        lefts.push(cup[1]);
    }
    let mut edge_out = vec![None; edges.len()];
    let mut accepting = Vec::new();
    for (q, ins) in incoming.into_iter().enumerate() {
        let joined = fan_in(&mut b, ins);
        let outgoing: Vec<usize> = (0..edges.len()).filter(|&k| edges[k].0 == q).collect();
        let fin = a.finals.contains(&q);
        let mut branches = fan_out(&mut b, joined, outgoing.len() + usize::from(fin));
        if fin {
            accepting.push(branches.pop().expect("accepting branch"));
        }
        for (k, s) in outgoing.into_iter().zip(branches) {
            edge_out[k] = Some(match edges[k].1 {
                Label::Eps => s,
                Label::Letter(c) => {
                    let atom = b.node(G::Atom(c), &[])[0];
                    b.node(G::Action, &[atom, s])[0]
                }
            });
        }
    }
    for (left, s) in lefts.into_iter().zip(edge_out) {
        b.node(G::Cap, &[left, s.expect("every edge leaves its source")]);
    }
    let out = fan_in(&mut b, accepting);
    b.output(out);
    b.finish().to_term()
}

/// The system of language inclusions whose least solution the diagram
/// computes, one variable per wire after collapsing wires joined by a
/// single ε-move. `X a <= Y` says that appending `a` to `X` lands in `Y`.
pub fn emit_inequalities(d: &DiagramTerm) -> Result<String> {
    let g = d.to_port_graph()?;
    let net = flow_net(&g)?;
    let mut edges: BTreeSet<(usize, RegExp, usize)> = net.edges.into_iter().collect();
    // current vertex of each boundary wire, renamed as wires collapse
    let mut inputs = net.inputs.clone();
    let mut outputs = net.outputs.clone();
    loop {
        let mut ins: BTreeMap<usize, Vec<(usize, &RegExp)>> = BTreeMap::new();
        let mut outs: BTreeMap<usize, Vec<(&RegExp, usize)>> = BTreeMap::new();
        for (u, e, v) in &edges {
            ins.entry(*v).or_default().push((*u, e));
            outs.entry(*u).or_default().push((e, *v));
        }
        let into_source = ins.iter().find_map(|(&v, es)| match es.as_slice() {
            [(u, RegExp::One)] if *u != v && !inputs.contains(&v) => Some((v, *u)),
            _ => None,
        });
        let into_target = || {
            outs.iter().find_map(|(&v, es)| match es.as_slice() {
                [(RegExp::One, w)] if *w != v && !outputs.contains(&v) => Some((v, *w)),
                _ => None,
            })
        };
        let Some((from, to)) = into_source.or_else(into_target) else {
            break;
        };
        let f = |x: usize| if x == from { to } else { x };
        edges = std::mem::take(&mut edges)
            .into_iter()
            .map(|(u, e, v)| (f(u), e, f(v)))
            .filter(|(u, e, v)| !(u == v && *e == RegExp::One))
            .collect();
        for x in inputs.iter_mut().chain(outputs.iter_mut()) {
            *x = f(*x);
        }
    }

    let mut succ: BTreeMap<usize, Vec<(String, usize)>> = BTreeMap::new();
    for (u, e, v) in &edges {
        succ.entry(*u).or_default().push((e.to_string(), *v));
    }
    for list in succ.values_mut() {
        list.sort();
    }
    let mut name: BTreeMap<usize, usize> = BTreeMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &i in &inputs {
        if !name.contains_key(&i) {
            name.insert(i, name.len());
            queue.push_back(i);
        }
    }
    while let Some(u) = queue.pop_front() {
        for (_, v) in succ.get(&u).into_iter().flatten() {
            if !name.contains_key(v) {
                name.insert(*v, name.len());
                queue.push_back(*v);
            }
        }
    }
    let mut rest: BTreeSet<usize> = edges.iter().flat_map(|(u, _, v)| [*u, *v]).collect();
    rest.extend(&inputs);
    for v in rest {
        if !name.contains_key(&v) {
            name.insert(v, name.len());
        }
    }

    let mut lines: BTreeSet<(usize, usize, usize, String)> = BTreeSet::new();
    for i in &inputs {
        let x = name[i];
        lines.insert((0, x, x, format!("eps <= X{x}")));
    }
    for (u, e, v) in &edges {
        let (x, y) = (name[u], name[v]);
        let text = match e {
            RegExp::One => format!("X{x} <= X{y}"),
            RegExp::Atom(c) => format!("X{x} {c} <= X{y}"),
            e => format!("X{x} ({e}) <= X{y}"),
        };
        lines.insert((1, x, y, text));
    }
    let mut out = String::new();
    for (.., text) in lines {
        out.push_str(&text);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalform::denote;
    use crate::regex::{denote_regex, parse_regex, Alphabet};

    fn ab() -> Alphabet {
        Alphabet::parse("ab").unwrap()
    }

    fn re(s: &str) -> RegExp {
        parse_regex(s, &ab()).unwrap()
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
    fn regex_encoding_denotes_the_regex() {
        for s in [
            "0",
            "1",
            "a",
            "ab",
            "a+b",
            "a*",
            "ab(a+ab)*",
            "(a*b)*",
            "0*",
            "(1+a)b",
        ] {
            let e = re(s);
            let d = regex_to_diagram(&e);
            assert!(crate::diagram::is_atomic(&d).unwrap(), "{s}");
            assert_eq!(
                denote(&d, &ab()).unwrap().entries[0][0],
                denote_regex(&e, &ab()).unwrap(),
                "{s}"
            );
        }
    }

    #[test]
    fn worked_example_both_styles() {
        let want = denote_regex(&re("ab(a+ab)*"), &ab()).unwrap();
        for d in [
            nfa_to_diagram_matrix(&worked_example()).unwrap(),
            nfa_to_diagram_graph(&worked_example()).unwrap(),
        ] {
            assert_eq!(denote(&d, &ab()).unwrap().entries[0][0], want);
        }
    }

    #[test]
    fn multiple_initial_states_are_rejected() {
        let mut a = worked_example();
        a.initial.insert(1);
        assert!(nfa_to_diagram_matrix(&a).is_err());
        assert!(nfa_to_diagram_graph(&a).is_err());
        let d = nfa_to_diagram_matrix(&a.with_single_initial()).unwrap();
        let mut ok = true;
        for w in ["ab", "b", "ba", "aba", "abaa"] {
            let h = denote(&d, &ab()).unwrap();
            ok &= crate::regex::member(&h.entries[0][0], w).unwrap() == a.accepts(w).unwrap();
        }
        assert!(ok);
    }

    #[test]
    fn trivial_automaton_denotes_eps() {
        let mut a = Nfa::empty(ab());
        a.states = 1;
        a.initial.insert(0);
        a.finals.insert(0);
        let d = nfa_to_diagram_matrix(&a).unwrap();
        assert_eq!(
            denote(&d, &ab()).unwrap().entries[0][0],
            denote_regex(&RegExp::One, &ab()).unwrap()
        );
    }

    #[test]
    fn worked_example_inequalities() {
        let d = nfa_to_diagram_matrix(&worked_example()).unwrap();
        assert_eq!(
            emit_inequalities(&d).unwrap(),
            "eps <= X0\nX0 a <= X1\nX1 b <= X2\nX2 a <= X1\nX2 a <= X2\n"
        );
    }

    #[test]
    fn small_inequalities() {
        assert_eq!(emit_inequalities(&right()).unwrap(), "eps <= X0\n");
        assert_eq!(
            emit_inequalities(&scalar(&re("a"))).unwrap(),
            "eps <= X0\nX0 a <= X1\n"
        );
        assert_eq!(
            emit_inequalities(&scalar(&re("a+b"))).unwrap(),
            "eps <= X0\nX0 (a+b) <= X1\n"
        );
    }
}
