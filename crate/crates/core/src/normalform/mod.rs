//! Language-matrix semantics of left-to-right diagrams: red-fragment
//! evaluation, the generalised matrix (state elimination), the denotation
//! matrix, restriction and semantic (in)equality.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde_json::{json, Value};

use crate::diagram::{bend_graph, DiagramTerm, GeneratorLabel, Interface, ObjectType, PortGraph};
use crate::error::{Error, Result};
use crate::nfa::Nfa;
use crate::oracle;
use crate::regex::{lang_subset, Alphabet, LanguageHandle, RegExp};

/// Regular-expression entries indexed `(input, output)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralisedMatrix {
    pub n_in: usize,
    pub m_out: usize,
    pub entries: Vec<Vec<RegExp>>,
}

impl fmt::Display for GeneralisedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{e}")?;
            }
        }
        write!(f, "]")
    }
}

/// Languages indexed `(input, output)`: entry `(i, j)` is the set of words
/// that travel from input wire `i` to output wire `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenotationMatrix {
    pub n_in: usize,
    pub m_out: usize,
    pub entries: Vec<Vec<LanguageHandle>>,
}

impl DenotationMatrix {
    pub fn to_value(&self) -> Value {
        let entries: Vec<Vec<Value>> = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|h| serde_json::to_value(h).expect("handles serialise"))
                    .collect()
            })
            .collect();
        json!({"n_in": self.n_in, "m_out": self.m_out, "entries": entries})
    }
}

/// The graph read as a labelled transition system on its black wires.
/// Right wires carry words forwards and left wires backwards, so a cup
/// passes words from its ◀ end to its ▶ end and a cap the other way.
#[derive(Clone, Debug)]
pub(crate) struct FlowNet {
    pub vertices: usize,
    pub edges: Vec<(usize, RegExp, usize)>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

pub(crate) fn require_left_to_right(g: &PortGraph) -> Result<()> {
    if g.dom
        .0
        .iter()
        .chain(&g.cod.0)
        .any(|&o| o != ObjectType::Right)
    {
        return Err(Error::NotLeftToRight(g.dom.clone(), g.cod.clone()));
    }
    Ok(())
}

/// Value of every red wire, evaluated from the red inputs `env`.
pub(crate) fn red_values(g: &PortGraph, env: &[RegExp]) -> Result<HashMap<usize, RegExp>> {
    use GeneratorLabel as G;
    let inc = g.incidence();
    let mut val: HashMap<usize, RegExp> = HashMap::new();
    let mut env_iter = env.iter();
    for (k, &o) in g.dom.0.iter().enumerate() {
        if o == ObjectType::Red {
            let e = env_iter
                .next()
                .ok_or_else(|| Error::RedBoundary(g.dom.clone(), g.cod.clone()))?;
            val.insert(inc.inputs[k], e.clone());
        }
    }
    for n in g.topo_order()? {
        let l = g.nodes[&n];
        if !l.is_red() {
            continue;
        }
        let arg = |p: usize| val[&inc.in_wire(n, p)].clone();
        let out = match l {
            G::Zero => RegExp::Zero,
            G::One => RegExp::One,
            G::Atom(c) => RegExp::Atom(c),
            G::Star => RegExp::star(arg(0)),
            G::Prod => RegExp::prod(arg(0), arg(1)),
            G::Sum => RegExp::sum(arg(0), arg(1)),
            G::RedCopy => {
                let x = arg(0);
                val.insert(inc.out_wire(n, 1), x.clone());
                x
            }
            G::RedDelete => continue,
            _ => unreachable!(),
        };
        val.insert(inc.out_wire(n, 0), out);
    }
    Ok(val)
}

pub(crate) fn flow_net(g: &PortGraph) -> Result<FlowNet> {
    use GeneratorLabel as G;
    require_left_to_right(g)?;
    let red = red_values(g, &[])?;
    let inc = g.incidence();
    let mut vertex_of = BTreeMap::new();
    for (&id, w) in &g.wires {
        if w.ty != ObjectType::Red {
            let v = vertex_of.len();
            vertex_of.insert(id, v);
        }
    }
    let v = |w: usize| vertex_of[&w];
    let mut edges = Vec::new();
    for (&n, &l) in &g.nodes {
        match l {
            G::Action => edges.push((
                v(inc.in_wire(n, 1)),
                red[&inc.in_wire(n, 0)].clone(),
                v(inc.out_wire(n, 0)),
            )),
            G::BlackCopy => {
                for p in 0..2 {
                    edges.push((v(inc.in_wire(n, 0)), RegExp::One, v(inc.out_wire(n, p))));
                }
            }
            G::BlackMerge => {
                for p in 0..2 {
                    edges.push((v(inc.in_wire(n, p)), RegExp::One, v(inc.out_wire(n, 0))));
                }
            }
            G::Cup => edges.push((v(inc.out_wire(n, 1)), RegExp::One, v(inc.out_wire(n, 0)))),
            G::Cap => edges.push((v(inc.in_wire(n, 1)), RegExp::One, v(inc.in_wire(n, 0)))),
            _ => {}
        }
    }
    Ok(FlowNet {
        vertices: vertex_of.len(),
        edges,
        inputs: inc.inputs.iter().map(|&w| v(w)).collect(),
        outputs: inc.outputs.iter().map(|&w| v(w)).collect(),
    })
}

impl FlowNet {
    /// ε-NFA on the vertices (plus Thompson fragment states for
    /// non-atomic edge labels), without initial or accepting states.
    pub(crate) fn to_nfa(&self, sigma: &Alphabet) -> Result<Nfa> {
        let mut nfa = Nfa::empty(sigma.clone());
        nfa.states = self.vertices;
        for (u, e, v) in &self.edges {
            e.check_alphabet(sigma)?;
            e.thompson_into(&mut nfa, *u, *v);
        }
        Ok(nfa)
    }
}

fn prepare(g: &PortGraph) -> Result<PortGraph> {
    if g.dom.0.contains(&ObjectType::Red) || g.cod.0.contains(&ObjectType::Red) {
        return Err(Error::RedBoundary(g.dom.clone(), g.cod.clone()));
    }
    bend_graph(g)
}

/// State elimination on the flow net of a left-to-right graph. Vertices
/// are eliminated last-index-first.
pub fn generalised_matrix_of(g: &PortGraph) -> Result<GeneralisedMatrix> {
    let net = flow_net(g)?;
    let (nv, n, m) = (net.vertices, net.inputs.len(), net.outputs.len());
    let mut out: Vec<BTreeMap<usize, RegExp>> = vec![BTreeMap::new(); nv + n + m];
    let mut inn: Vec<BTreeMap<usize, ()>> = vec![BTreeMap::new(); nv + n + m];
    let add = |out: &mut Vec<BTreeMap<usize, RegExp>>,
               inn: &mut Vec<BTreeMap<usize, ()>>,
               p: usize,
               e: RegExp,
               q: usize| {
        if e == RegExp::Zero {
            return;
        }
        let slot = out[p].remove(&q);
        let merged = match slot {
            Some(old) => RegExp::plus(old, e),
            None => e,
        };
        out[p].insert(q, merged);
        inn[q].insert(p, ());
    };
    for (u, e, v) in &net.edges {
        add(&mut out, &mut inn, *u, e.clone(), *v);
    }
    for (i, &v) in net.inputs.iter().enumerate() {
        add(&mut out, &mut inn, nv + i, RegExp::One, v);
    }
    for (j, &v) in net.outputs.iter().enumerate() {
        add(&mut out, &mut inn, v, RegExp::One, nv + n + j);
    }
    for k in (0..nv).rev() {
        let lp = out[k].remove(&k);
        inn[k].remove(&k);
        let star = lp.map_or(RegExp::One, RegExp::kleene);
        let preds: Vec<usize> = inn[k].keys().copied().collect();
        let succs: Vec<(usize, RegExp)> = std::mem::take(&mut out[k]).into_iter().collect();
        for &p in &preds {
            let a = out[p].remove(&k).expect("edge recorded in both directions");
            for (q, b) in &succs {
                let e = RegExp::times(RegExp::times(a.clone(), star.clone()), b.clone());
                add(&mut out, &mut inn, p, e, *q);
            }
        }
        for (q, _) in &succs {
            inn[*q].remove(&k);
        }
        inn[k].clear();
    }
    let entries = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    out[nv + i]
                        .get(&(nv + n + j))
                        .cloned()
                        .unwrap_or(RegExp::Zero)
                })
                .collect()
        })
        .collect();
    Ok(GeneralisedMatrix {
        n_in: n,
        m_out: m,
        entries,
    })
}

pub fn to_generalised_matrix(d: &DiagramTerm) -> Result<GeneralisedMatrix> {
    generalised_matrix_of(&d.to_port_graph()?)
}

/// Denotation of a diagram with ▶/◀ boundary, after bending.
pub fn denote_graph(g: &PortGraph, sigma: &Alphabet) -> Result<DenotationMatrix> {
    let g = prepare(g)?;
    let net = flow_net(&g)?;
    let mut nfa = net.to_nfa(sigma)?;
    let entries = net
        .inputs
        .iter()
        .map(|&i| {
            net.outputs
                .iter()
                .map(|&o| {
                    nfa.initial = [i].into();
                    nfa.finals = [o].into();
                    oracle::minimal_dfa(&nfa)
                })
                .collect()
        })
        .collect();
    Ok(DenotationMatrix {
        n_in: net.inputs.len(),
        m_out: net.outputs.len(),
        entries,
    })
}

pub fn denote(d: &DiagramTerm, sigma: &Alphabet) -> Result<DenotationMatrix> {
    denote_graph(&d.to_port_graph()?, sigma)
}

fn same_interfaces(g: &PortGraph, h: &PortGraph) -> Result<()> {
    if g.dom != h.dom || g.cod != h.cod {
        return Err(Error::InterfaceMismatch(
            format!("{} -> {}", g.dom, g.cod),
            format!("{} -> {}", h.dom, h.cod),
        ));
    }
    Ok(())
}

pub fn sem_equal_graph(g: &PortGraph, h: &PortGraph, sigma: &Alphabet) -> Result<bool> {
    same_interfaces(g, h)?;
    Ok(denote_graph(g, sigma)? == denote_graph(h, sigma)?)
}

pub fn sem_leq_graph(g: &PortGraph, h: &PortGraph, sigma: &Alphabet) -> Result<bool> {
    same_interfaces(g, h)?;
    let (x, y) = (denote_graph(g, sigma)?, denote_graph(h, sigma)?);
    for (rx, ry) in x.entries.iter().zip(&y.entries) {
        for (a, b) in rx.iter().zip(ry) {
            if !lang_subset(a, b)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub fn sem_equal(d: &DiagramTerm, e: &DiagramTerm, sigma: &Alphabet) -> Result<bool> {
    sem_equal_graph(&d.to_port_graph()?, &e.to_port_graph()?, sigma)
}

/// Entrywise language inclusion of the denotations.
pub fn sem_leq(d: &DiagramTerm, e: &DiagramTerm, sigma: &Alphabet) -> Result<bool> {
    sem_leq_graph(&d.to_port_graph()?, &e.to_port_graph()?, sigma)
}

/// Evaluates a purely red diagram as a term substitution.
pub fn eval_red_graph(g: &PortGraph, env: &[RegExp]) -> Result<Vec<RegExp>> {
    if let Some(l) = g.nodes.values().find(|l| !l.is_red()) {
        return Err(Error::ForeignGenerator(l.to_string()));
    }
    if g.dom
        .0
        .iter()
        .chain(&g.cod.0)
        .any(|&o| o != ObjectType::Red)
    {
        return Err(Error::ForeignGenerator(format!("{} -> {}", g.dom, g.cod)));
    }
    if env.len() != g.dom.len() {
        return Err(Error::Substitution(format!(
            "{} values for {} red inputs",
            env.len(),
            g.dom.len()
        )));
    }
    let val = red_values(g, env)?;
    let inc = g.incidence();
    Ok(inc.outputs.iter().map(|w| val[w].clone()).collect())
}

pub fn eval_red(d: &DiagramTerm, env: &[RegExp]) -> Result<Vec<RegExp>> {
    eval_red_graph(&d.to_port_graph()?, env)
}

/// Keeps only input `i` and output `j` (both 1-based): the other inputs are
/// fed by units and the other outputs deleted.
pub fn restrict(d: &DiagramTerm, i: usize, j: usize) -> Result<DiagramTerm> {
    use ObjectType::Right;
    let (dom, cod) = d.typecheck()?;
    let rights = |x: &Interface| x.0.iter().all(|&o| o == Right);
    if !rights(&dom) || !rights(&cod) {
        return Err(Error::NotLeftToRight(dom, cod));
    }
    if i == 0 || i > dom.len() || j == 0 || j > cod.len() {
        return Err(Error::IndexOutOfRange(format!(
            "({i}, {j}) for a {} x {} diagram",
            dom.len(),
            cod.len()
        )));
    }
    let unit = DiagramTerm::Gen(GeneratorLabel::BlackUnit);
    let del = DiagramTerm::Gen(GeneratorLabel::BlackDelete);
    let feed = DiagramTerm::par_all(
        (1..=dom.len())
            .map(|k| {
                if k == i {
                    DiagramTerm::id(&[Right])
                } else {
                    unit.clone()
                }
            })
            .collect(),
    );
    let drain = DiagramTerm::par_all(
        (1..=cod.len())
            .map(|k| {
                if k == j {
                    DiagramTerm::id(&[Right])
                } else {
                    del.clone()
                }
            })
            .collect(),
    );
    Ok(DiagramTerm::seq_all(vec![feed, d.clone(), drain]))
}

/// Connectivity relation of a diagram built from black copy, delete,
/// merge and unit only: entry `(i, j)` says whether input `i` reaches
/// output `j`.
pub fn relation_normal_form(d: &DiagramTerm) -> Result<Vec<Vec<bool>>> {
    use GeneratorLabel as G;
    let g = d.to_port_graph()?;
    if let Some(l) = g.nodes.values().find(|l| {
        !matches!(
            l,
            G::BlackCopy | G::BlackDelete | G::BlackMerge | G::BlackUnit
        )
    }) {
        return Err(Error::ForeignGenerator(l.to_string()));
    }
    let net = flow_net(&g)?;
    let mut succ = vec![Vec::new(); net.vertices];
    for (u, _, v) in &net.edges {
        succ[*u].push(*v);
    }
    Ok(net
        .inputs
        .iter()
        .map(|&i| {
            let mut seen = vec![false; net.vertices];
            seen[i] = true;
            let mut stack = vec![i];
            while let Some(u) = stack.pop() {
                for &v in &succ[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            net.outputs.iter().map(|&o| seen[o]).collect()
        })
        .collect())
}
