use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde_json::{json, Value};

use crate::diagram::{
    bend_graph, DiagramTerm, GeneratorLabel as G, GraphBuilder, ObjectType, PortGraph, Source,
};
use crate::error::{Error, Result};
use crate::nfa::{Label, Nfa};
use crate::normalform::{denote_graph, flow_net, DenotationMatrix};
use crate::regex::Alphabet;

/// Entry `(i, j)` is the formal sum of letters and ε on the paths from
/// input `i` to output `j`; the empty set is 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MatrixDiagram {
    pub n_in: usize,
    pub m_out: usize,
    pub entries: Vec<Vec<BTreeSet<Label>>>,
}

impl MatrixDiagram {
    pub fn zero(n_in: usize, m_out: usize) -> Self {
        MatrixDiagram {
            n_in,
            m_out,
            entries: vec![vec![BTreeSet::new(); m_out]; n_in],
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> &BTreeSet<Label> {
        &self.entries[i][j]
    }

    pub fn eps_free(&self) -> bool {
        self.entries
            .iter()
            .flatten()
            .all(|e| !e.contains(&Label::Eps))
    }

    /// ε-free, and each row has at most one target per letter.
    pub fn deterministic(&self) -> bool {
        self.eps_free()
            && self.entries.iter().all(|row| {
                let mut seen = BTreeSet::new();
                row.iter().flatten().all(|l| seen.insert(*l))
            })
    }

    pub fn transpose(&self) -> MatrixDiagram {
        MatrixDiagram {
            n_in: self.m_out,
            m_out: self.n_in,
            entries: (0..self.m_out)
                .map(|j| (0..self.n_in).map(|i| self.entries[i][j].clone()).collect())
                .collect(),
        }
    }

    /// Copy layer, scalar layer, merge layer.
    pub fn to_graph(&self) -> PortGraph {
        let mut b = GraphBuilder::new();
        let rows: Vec<Source> = (0..self.n_in).map(|_| b.input(ObjectType::Right)).collect();
        let cols = wire_matrix(&mut b, &self.entries, rows, self.m_out);
        for c in cols {
            b.output(c);
        }
        b.finish()
    }

    pub fn to_diagram(&self) -> Result<DiagramTerm> {
        self.to_graph().to_term()
    }
}

/// Fans each row source out along its entries and collects every column;
/// returns the column sources.
fn wire_matrix(
    b: &mut GraphBuilder,
    entries: &[Vec<BTreeSet<Label>>],
    rows: Vec<Source>,
    m_out: usize,
) -> Vec<Source> {
    let mut incoming: Vec<Vec<Source>> = vec![Vec::new(); m_out];
    for (row, src) in entries.iter().zip(rows) {
        let branches: Vec<(usize, Label)> = row
            .iter()
            .enumerate()
            .flat_map(|(j, e)| e.iter().map(move |&l| (j, l)))
            .collect();
        let outs = fan_out(b, src, branches.len());
        for ((j, l), s) in branches.into_iter().zip(outs) {
            let s = match l {
                Label::Eps => s,
                Label::Letter(c) => {
                    let atom = b.node(G::Atom(c), &[])[0];
                    b.node(G::Action, &[atom, s])[0]
                }
            };
            incoming[j].push(s);
        }
    }
    incoming.into_iter().map(|srcs| fan_in(b, srcs)).collect()
}

pub(crate) fn fan_out(b: &mut GraphBuilder, src: Source, k: usize) -> Vec<Source> {
    match k {
        0 => {
            b.node(G::BlackDelete, &[src]);
            Vec::new()
        }
        1 => vec![src],
        _ => {
            let mut out = Vec::with_capacity(k);
            let mut rest = src;
            for _ in 1..k {
                let c = b.node(G::BlackCopy, &[rest]);
                out.push(c[0]);
                rest = c[1];
            }
            out.push(rest);
            out
        }
    }
}

pub(crate) fn fan_in(b: &mut GraphBuilder, srcs: Vec<Source>) -> Source {
    let mut it = srcs.into_iter();
    match it.next() {
        None => b.node(G::BlackUnit, &[])[0],
        Some(first) => it.fold(first, |acc, s| b.node(G::BlackMerge, &[acc, s])[0]),
    }
}

/// A traced matrix-diagram presenting a left-to-right diagram as an
/// automaton. Rows `0..l` of the core are loop wires and rows `l..l+n` the
/// inputs; columns `0..l` are loop wires and `l..l+m` the outputs.
///
/// The loop block is ε-free, input rows only point at loops with ε, loop
/// rows only point at outputs with ε, and inputs never reach outputs
/// directly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Representation {
    pub alphabet: Alphabet,
    pub l: usize,
    pub n: usize,
    pub m: usize,
    pub core: MatrixDiagram,
}

impl Representation {
    pub fn d_ll(&self, i: usize, j: usize) -> &BTreeSet<Label> {
        &self.core.entries[i][j]
    }

    pub fn d_nl(&self, i: usize, j: usize) -> &BTreeSet<Label> {
        &self.core.entries[self.l + i][j]
    }

    pub fn d_lm(&self, i: usize, j: usize) -> &BTreeSet<Label> {
        &self.core.entries[i][self.l + j]
    }

    pub fn d_nm(&self, i: usize, j: usize) -> &BTreeSet<Label> {
        &self.core.entries[self.l + i][self.l + j]
    }

    /// Loops that input `i` enters.
    pub fn initial_of(&self, i: usize) -> BTreeSet<usize> {
        (0..self.l)
            .filter(|&k| !self.d_nl(i, k).is_empty())
            .collect()
    }

    /// Loops that reach output `j`.
    pub fn final_of(&self, j: usize) -> BTreeSet<usize> {
        (0..self.l)
            .filter(|&k| !self.d_lm(k, j).is_empty())
            .collect()
    }

    /// Successors of loop `k` on letter `c`.
    pub fn successors(&self, k: usize, c: char) -> BTreeSet<usize> {
        (0..self.l)
            .filter(|&j| self.d_ll(k, j).contains(&Label::Letter(c)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Invariant(m));
        let (l, n, m) = (self.l, self.n, self.m);
        if self.core.n_in != l + n
            || self.core.m_out != l + m
            || self.core.entries.len() != l + n
            || self.core.entries.iter().any(|r| r.len() != l + m)
        {
            return bad(format!("core is not ({l}+{n}) x ({l}+{m})"));
        }
        for (i, row) in self.core.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                for lab in e {
                    if let Label::Letter(c) = lab {
                        if !self.alphabet.contains(*c) {
                            return Err(Error::UnknownLetter(*c));
                        }
                    }
                }
                let eps_only = e.iter().all(|x| *x == Label::Eps);
                match (i < l, j < l) {
                    (true, true) if e.contains(&Label::Eps) => {
                        return bad(format!("loop block entry ({i}, {j}) contains eps"))
                    }
                    (false, true) | (true, false) if !eps_only => {
                        return bad(format!("boundary entry ({i}, {j}) carries a letter"))
                    }
                    (false, false) if !e.is_empty() => {
                        return bad(format!("input {} reaches output {} directly", i - l, j - l))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Deterministic loop block and exactly one initial loop per input.
    pub fn is_deterministic(&self) -> bool {
        let loops_det = (0..self.l).all(|k| {
            let mut seen = BTreeSet::new();
            (0..self.l)
                .flat_map(|j| self.d_ll(k, j))
                .all(|x| seen.insert(*x))
        });
        loops_det && (0..self.n).all(|i| self.initial_of(i).len() == 1)
    }

    /// The traced diagram: every loop wire is closed by a cup and a cap.
    pub fn to_graph(&self) -> PortGraph {
        traced_graph(self.l, self.n, &self.core)
    }

    pub fn to_diagram(&self) -> Result<DiagramTerm> {
        self.to_graph().to_term()
    }

    pub fn denote(&self) -> Result<DenotationMatrix> {
        denote_graph(&self.to_graph(), &self.alphabet)
    }

    pub fn to_value(&self) -> Value {
        let entries: Vec<Vec<Vec<String>>> = self
            .core
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.iter().map(|l| l.to_string()).collect())
                    .collect()
            })
            .collect();
        json!({
            "alphabet": self.alphabet.letters().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "l": self.l,
            "n": self.n,
            "m": self.m,
            "entries": entries,
        })
    }

    pub fn from_value(v: &Value) -> Result<Representation> {
        let bad = |m: &str| Error::Invariant(format!("representation JSON: {m}"));
        let letters: String = v["alphabet"]
            .as_array()
            .ok_or_else(|| bad("missing alphabet"))?
            .iter()
            .filter_map(|x| x.as_str())
            .collect();
        let alphabet = Alphabet::parse(&letters)?;
        let num = |k: &str| v[k].as_u64().map(|x| x as usize).ok_or_else(|| bad(k));
        let (l, n, m) = (num("l")?, num("n")?, num("m")?);
        let mut core = MatrixDiagram::zero(l + n, l + m);
        let rows = v["entries"]
            .as_array()
            .ok_or_else(|| bad("missing entries"))?;
        if rows.len() != l + n {
            return Err(bad("row count"));
        }
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| bad("row"))?;
            if row.len() != l + m {
                return Err(bad("column count"));
            }
            for (j, e) in row.iter().enumerate() {
                for x in e.as_array().ok_or_else(|| bad("entry"))? {
                    let s = x.as_str().ok_or_else(|| bad("label"))?;
                    core.entries[i][j].insert(Label::parse(s).ok_or_else(|| bad("label"))?);
                }
            }
        }
        let r = Representation {
            alphabet,
            l,
            n,
            m,
            core,
        };
        r.validate()?;
        Ok(r)
    }
}

/// Closes the first `l` rows/columns of `core` into feedback loops; the
/// remaining `n` rows become inputs and the remaining columns outputs.
pub(crate) fn traced_graph(l: usize, n: usize, core: &MatrixDiagram) -> PortGraph {
    let mut b = GraphBuilder::new();
    let inputs: Vec<Source> = (0..n).map(|_| b.input(ObjectType::Right)).collect();
    let mut lefts = Vec::with_capacity(l);
    let mut rows = Vec::with_capacity(l + n);
    for _ in 0..l {
        let cup = b.node(G::Cup, &[]);
        rows.push(cup[0]);
        lefts.push(cup[1]);
    }
    rows.extend(inputs);
    let cols = wire_matrix(&mut b, &core.entries, rows, core.m_out);
    let mut cols = cols.into_iter();
    for left in lefts {
        let src = cols.next().expect("loop column");
        b.node(G::Cap, &[left, src]);
    }
    for c in cols {
        b.output(c);
    }
    b.finish()
}

/// Reads a diagram as an automaton: black wires are ε-moves, actions
/// are Thompson fragments of their (evaluated) red input, and a loop wire
/// is made for each input and each letter target, after forward
/// ε-closure. Wires with identical outgoing behaviour share a loop.
pub fn diagram_to_representation(d: &DiagramTerm, sigma: &Alphabet) -> Result<Representation> {
    graph_to_representation(&d.to_port_graph()?, sigma)
}

pub fn graph_to_representation(g: &PortGraph, sigma: &Alphabet) -> Result<Representation> {
    if g.dom.0.contains(&ObjectType::Red) || g.cod.0.contains(&ObjectType::Red) {
        return Err(Error::RedBoundary(g.dom.clone(), g.cod.clone()));
    }
    let g = bend_graph(g)?;
    let net = flow_net(&g)?;
    let nfa = net.to_nfa(sigma)?;
    Ok(nfa_states_to_representation(
        &nfa,
        &net.inputs,
        &net.outputs,
        sigma,
    ))
}

/// Forward ε-closure representation of an ε-NFA with designated input and
/// output states.
fn nfa_states_to_representation(
    nfa: &Nfa,
    inputs: &[usize],
    outputs: &[usize],
    sigma: &Alphabet,
) -> Representation {
    let mut eps: Vec<Vec<usize>> = vec![Vec::new(); nfa.states];
    let mut letters: Vec<Vec<(char, usize)>> = vec![Vec::new(); nfa.states];
    for &(s, l, t) in &nfa.transitions {
        match l {
            Label::Eps => eps[s].push(t),
            Label::Letter(c) => letters[s].push((c, t)),
        }
    }
    let out_index: HashMap<usize, Vec<usize>> =
        outputs
            .iter()
            .enumerate()
            .fold(HashMap::new(), |mut m, (j, &o)| {
                m.entry(o).or_default().push(j);
                m
            });
    // behaviour of a state: letter moves and outputs reached from its closure
    type Row = (BTreeSet<(char, usize)>, BTreeSet<usize>);
    let row_of = |q: usize| -> Row {
        let mut seen = BTreeSet::from([q]);
        let mut stack = vec![q];
        while let Some(p) = stack.pop() {
            for &t in &eps[p] {
                if seen.insert(t) {
                    stack.push(t);
                }
            }
        }
        let moves = seen
            .iter()
            .flat_map(|&p| letters[p].iter().copied())
            .collect();
        let outs = seen
            .iter()
            .flat_map(|p| out_index.get(p).into_iter().flatten().copied())
            .collect();
        (moves, outs)
    };
    // BFS from the inputs, one loop per distinct behaviour
    let mut loop_of_row: BTreeMap<Row, usize> = BTreeMap::new();
    let mut loop_rows: Vec<Row> = Vec::new();
    let mut loop_of_state: HashMap<usize, usize> = HashMap::new();
    let mut order: Vec<usize> = inputs.to_vec();
    let mut next = 0;
    while next < order.len() {
        let q = order[next];
        next += 1;
        if loop_of_state.contains_key(&q) {
            continue;
        }
        let row = row_of(q);
        let k = match loop_of_row.get(&row) {
            Some(&k) => k,
            None => {
                let mut moves: Vec<(char, usize)> = row.0.iter().copied().collect();
                moves.sort_by_key(|&(c, t)| (sigma.index_of(c), t));
                order.extend(moves.into_iter().map(|(_, t)| t));
                loop_of_row.insert(row.clone(), loop_rows.len());
                loop_rows.push(row);
                loop_rows.len() - 1
            }
        };
        loop_of_state.insert(q, k);
    }
    let input_loops: Vec<usize> = inputs.iter().map(|q| loop_of_state[q]).collect();
    let l = loop_rows.len();
    let (n, m) = (inputs.len(), outputs.len());
    let mut core = MatrixDiagram::zero(l + n, l + m);
    for (k, (moves, outs)) in loop_rows.iter().enumerate() {
        for &(c, t) in moves {
            core.entries[k][loop_of_state[&t]].insert(Label::Letter(c));
        }
        for &j in outs {
            core.entries[k][l + j].insert(Label::Eps);
        }
    }
    for (i, &k) in input_loops.iter().enumerate() {
        core.entries[l + i][k].insert(Label::Eps);
    }
    Representation {
        alphabet: sigma.clone(),
        l,
        n,
        m,
        core,
    }
}

/// States are loop wires, initial states the loops entered by the input
/// and accepting states the loops feeding the output.
pub fn representation_to_nfa(r: &Representation) -> Result<Nfa> {
    if r.n != 1 || r.m != 1 {
        return Err(Error::InterfaceMismatch(
            format!("{} inputs, {} outputs", r.n, r.m),
            "1 input, 1 output".into(),
        ));
    }
    let mut a = Nfa::empty(r.alphabet.clone());
    a.states = r.l;
    for i in 0..r.l {
        for j in 0..r.l {
            for &lab in r.d_ll(i, j) {
                a.add(i, lab, j)?;
            }
        }
    }
    a.initial = r.initial_of(0);
    a.finals = r.final_of(0);
    Ok(a)
}

/// The representation whose loops are the states of `a`. Requires an
/// ε-free automaton.
pub fn nfa_to_representation(a: &Nfa) -> Result<Representation> {
    a.validate()?;
    if a.has_eps() {
        return Err(Error::Invariant("automaton has eps-transitions".into()));
    }
    let l = a.states;
    let mut core = MatrixDiagram::zero(l + 1, l + 1);
    for &(s, lab, t) in &a.transitions {
        core.entries[s][t].insert(lab);
    }
    for &q in &a.initial {
        core.entries[l][q].insert(Label::Eps);
    }
    for &q in &a.finals {
        core.entries[q][l].insert(Label::Eps);
    }
    Ok(Representation {
        alphabet: a.alphabet.clone(),
        l,
        n: 1,
        m: 1,
        core,
    })
}
