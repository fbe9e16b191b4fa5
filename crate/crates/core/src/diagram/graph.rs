use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde_json::{json, Value};

use crate::error::{Error, Result};

use super::{permutation, DiagramTerm, GeneratorLabel, Interface, ObjectType};

/// Where a wire starts: a boundary input or an out-port of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Input(usize),
    Port(usize, usize),
}

/// Where a wire ends: a boundary output or an in-port of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Output(usize),
    Port(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Wire {
    pub from: Source,
    pub to: Target,
    pub ty: ObjectType,
}

/// A diagram as a boundary-anchored port graph. Node and wire ids are
/// arbitrary; only labels, port order and boundary order matter for
/// equality (see [`super::smc_equal`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortGraph {
    pub nodes: BTreeMap<usize, GeneratorLabel>,
    pub wires: BTreeMap<usize, Wire>,
    pub dom: Interface,
    pub cod: Interface,
}

/// Wire lookup tables for a valid graph.
#[derive(Clone, Debug, Default)]
pub struct Incidence {
    pub into: HashMap<(usize, usize), usize>,
    pub out_of: HashMap<(usize, usize), usize>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

impl Incidence {
    pub fn in_wire(&self, node: usize, port: usize) -> usize {
        self.into[&(node, port)]
    }

    pub fn out_wire(&self, node: usize, port: usize) -> usize {
        self.out_of[&(node, port)]
    }
}

impl PortGraph {
    pub fn empty(dom: Interface, cod: Interface) -> Self {
        PortGraph {
            nodes: BTreeMap::new(),
            wires: BTreeMap::new(),
            dom,
            cod,
        }
    }

    pub fn from_term(t: &DiagramTerm) -> Result<PortGraph> {
        let (dom, _) = t.typecheck()?;
        let mut b = GraphBuilder::new();
        let inputs: Vec<Source> = dom.0.iter().map(|&o| b.input(o)).collect();
        let outs = build(t, &mut b, inputs);
        for s in outs {
            b.output(s);
        }
        Ok(b.finish())
    }

    pub fn source_type(&self, s: Source) -> ObjectType {
        match s {
            Source::Input(k) => self.dom.0[k],
            Source::Port(n, p) => self.nodes[&n].cod()[p],
        }
    }

    pub fn target_type(&self, t: Target) -> ObjectType {
        match t {
            Target::Output(k) => self.cod.0[k],
            Target::Port(n, p) => self.nodes[&n].dom()[p],
        }
    }

    pub fn incidence(&self) -> Incidence {
        let mut inc = Incidence {
            inputs: vec![usize::MAX; self.dom.len()],
            outputs: vec![usize::MAX; self.cod.len()],
            ..Default::default()
        };
        for (&id, w) in &self.wires {
            match w.from {
                Source::Input(k) => inc.inputs[k] = id,
                Source::Port(n, p) => {
                    inc.out_of.insert((n, p), id);
                }
            }
            match w.to {
                Target::Output(k) => inc.outputs[k] = id,
                Target::Port(n, p) => {
                    inc.into.insert((n, p), id);
                }
            }
        }
        inc
    }

    pub fn next_node_id(&self) -> usize {
        self.nodes.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn next_wire_id(&self) -> usize {
        self.wires.keys().next_back().map_or(0, |k| k + 1)
    }

    /// Checks that every port and boundary position carries exactly one
    /// wire, that wire types agree with both endpoints, and that the graph
    /// is acyclic.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedGraph(m));
        let mut seen_src = HashSet::new();
        let mut seen_tgt = HashSet::new();
        for (&id, w) in &self.wires {
            match w.from {
                Source::Input(k) if k >= self.dom.len() => {
                    return bad(format!("wire {id} starts at missing input {k}"))
                }
                Source::Port(n, p)
                    if !self.nodes.contains_key(&n) || p >= self.nodes[&n].cod().len() =>
                {
                    return bad(format!("wire {id} starts at missing port {n}.{p}"))
                }
                _ => {}
            }
            match w.to {
                Target::Output(k) if k >= self.cod.len() => {
                    return bad(format!("wire {id} ends at missing output {k}"))
                }
                Target::Port(n, p)
                    if !self.nodes.contains_key(&n) || p >= self.nodes[&n].dom().len() =>
                {
                    return bad(format!("wire {id} ends at missing port {n}.{p}"))
                }
                _ => {}
            }
            if self.source_type(w.from) != w.ty || self.target_type(w.to) != w.ty {
                return bad(format!("wire {id} has inconsistent type"));
            }
            if !seen_src.insert(w.from) {
                return bad(format!("source {:?} used twice", w.from));
            }
            if !seen_tgt.insert(w.to) {
                return bad(format!("target {:?} used twice", w.to));
            }
        }
        let ports_out: usize = self.nodes.values().map(|l| l.cod().len()).sum();
        let ports_in: usize = self.nodes.values().map(|l| l.dom().len()).sum();
        if seen_src.len() != ports_out + self.dom.len()
            || seen_tgt.len() != ports_in + self.cod.len()
        {
            return bad("unconnected port".into());
        }
        self.topo_order().map(|_| ())
    }

    /// Kahn's algorithm; ready nodes are taken in id order.
    pub fn topo_order(&self) -> Result<Vec<usize>> {
        let mut indeg: BTreeMap<usize, usize> = self
            .nodes
            .iter()
            .map(|(&n, l)| (n, l.dom().len()))
            .collect();
        let mut succ: HashMap<usize, Vec<usize>> = HashMap::new();
        for w in self.wires.values() {
            if let (Source::Port(a, _), Target::Port(b, _)) = (w.from, w.to) {
                succ.entry(a).or_default().push(b);
            } else if let Target::Port(b, _) = w.to {
                *indeg.get_mut(&b).unwrap() -= 1;
            }
        }
        let mut ready: BTreeSet<usize> = indeg
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&n, _)| n)
            .collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(n) = ready.pop_first() {
            order.push(n);
            for &m in succ.get(&n).map(|v| v.as_slice()).unwrap_or(&[]) {
                let d = indeg.get_mut(&m).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(m);
                }
            }
        }
        if order.len() != self.nodes.len() {
            return Err(Error::MalformedGraph("graph has a directed cycle".into()));
        }
        Ok(order)
    }

    /// Reads the graph back as a term: nodes are placed in topological
    /// order, each next to the first of its input wires, with symmetries
    /// gathering the remaining inputs.
    pub fn to_term(&self) -> Result<DiagramTerm> {
        let inc = self.incidence();
        let order = self.topo_order()?;
        let mut frontier: Vec<usize> = inc.inputs.clone();
        let mut layers = Vec::new();
        let ty = |w: usize| self.wires[&w].ty;
        for n in order {
            let label = self.nodes[&n];
            let ins: Vec<usize> = (0..label.dom().len()).map(|p| inc.in_wire(n, p)).collect();
            let outs: Vec<usize> = (0..label.cod().len()).map(|p| inc.out_wire(n, p)).collect();
            let pos = if ins.is_empty() {
                frontier.len()
            } else {
                ins.iter()
                    .map(|w| {
                        frontier
                            .iter()
                            .position(|x| x == w)
                            .expect("topological order")
                    })
                    .min()
                    .unwrap()
            };
            // gather the inputs contiguously at `pos`
            let rest: Vec<usize> = frontier
                .iter()
                .copied()
                .filter(|w| !ins.contains(w))
                .collect();
            let before = rest
                .iter()
                .filter(|w| frontier.iter().position(|x| x == *w).unwrap() < pos);
            let mut arranged: Vec<usize> = before.copied().collect();
            let k = arranged.len();
            arranged.extend(&ins);
            arranged.extend(rest[k..].iter().copied());
            if arranged != frontier {
                let objs: Vec<ObjectType> = frontier.iter().map(|&w| ty(w)).collect();
                let perm: Vec<usize> = arranged
                    .iter()
                    .map(|w| frontier.iter().position(|x| x == w).unwrap())
                    .collect();
                layers.push(permutation(&objs, &perm));
            }
            let mut parts = Vec::new();
            if k > 0 {
                parts.push(DiagramTerm::Id(Interface(
                    arranged[..k].iter().map(|&w| ty(w)).collect(),
                )));
            }
            parts.push(DiagramTerm::Gen(label));
            let after = &arranged[k + ins.len()..];
            if !after.is_empty() {
                parts.push(DiagramTerm::Id(Interface(
                    after.iter().map(|&w| ty(w)).collect(),
                )));
            }
            layers.push(DiagramTerm::par_all(parts));
            let mut next: Vec<usize> = arranged[..k].to_vec();
            next.extend(&outs);
            next.extend(after);
            frontier = next;
        }
        if frontier != inc.outputs {
            let objs: Vec<ObjectType> = frontier.iter().map(|&w| ty(w)).collect();
            let perm: Vec<usize> = inc
                .outputs
                .iter()
                .map(|w| frontier.iter().position(|x| x == w).unwrap())
                .collect();
            layers.push(permutation(&objs, &perm));
        }
        Ok(if layers.is_empty() {
            DiagramTerm::Id(self.dom.clone())
        } else {
            DiagramTerm::seq_all(layers)
        })
    }

    pub fn to_value(&self) -> Value {
        let nodes: Vec<Value> = self
            .nodes
            .iter()
            .map(|(&id, l)| match l.arg() {
                Some(c) => json!({"id": id, "label": l.name(), "arg": c.to_string()}),
                None => json!({"id": id, "label": l.name()}),
            })
            .collect();
        let wires: Vec<Value> = self
            .wires
            .iter()
            .map(|(&id, w)| {
                let from = match w.from {
                    Source::Input(k) => json!(["in", k]),
                    Source::Port(n, p) => json!([n, p]),
                };
                let to = match w.to {
                    Target::Output(k) => json!(["out", k]),
                    Target::Port(n, p) => json!([n, p]),
                };
                json!({"id": id, "from": from, "to": to, "type": w.ty.symbol().to_string()})
            })
            .collect();
        json!({"nodes": nodes, "wires": wires, "dom": self.dom, "cod": self.cod})
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    pub fn from_json(text: &str) -> Result<PortGraph> {
        let v: Value = serde_json::from_str(text)?;
        Self::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<PortGraph> {
        let bad = |m: &str| Error::MalformedGraph(m.to_string());
        let iface = |key: &str| -> Result<Interface> {
            let s = v[key].as_str().ok_or_else(|| bad("missing dom/cod"))?;
            Interface::parse(s).ok_or_else(|| bad("bad interface"))
        };
        let mut g = PortGraph::empty(iface("dom")?, iface("cod")?);
        for n in v["nodes"].as_array().ok_or_else(|| bad("missing nodes"))? {
            let id = n["id"].as_u64().ok_or_else(|| bad("node id"))? as usize;
            let name = n["label"].as_str().ok_or_else(|| bad("node label"))?;
            let arg = match n.get("arg") {
                Some(a) => {
                    let s = a.as_str().ok_or_else(|| bad("atom arg"))?;
                    let mut it = s.chars();
                    match (it.next(), it.next()) {
                        (Some(c), None) => Some(c),
                        _ => return Err(bad("atom arg must be one character")),
                    }
                }
                None => None,
            };
            let label =
                GeneratorLabel::from_name(name, arg).ok_or_else(|| bad("unknown node label"))?;
            if g.nodes.insert(id, label).is_some() {
                return Err(bad("duplicate node id"));
            }
        }
        fn endpoint(e: &Value) -> Result<(Option<&str>, usize, usize)> {
            let bad = |m: &str| Error::MalformedGraph(m.to_string());
            let a = e
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| bad("endpoint"))?;
            let second = a[1].as_u64().ok_or_else(|| bad("endpoint"))? as usize;
            match &a[0] {
                Value::String(s) => Ok((Some(s.as_str()), second, 0)),
                Value::Number(n) => Ok((
                    None,
                    n.as_u64().ok_or_else(|| bad("endpoint"))? as usize,
                    second,
                )),
                _ => Err(bad("endpoint")),
            }
        }
        let wires = v["wires"].as_array().ok_or_else(|| bad("missing wires"))?;
        for (i, w) in wires.iter().enumerate() {
            let id = w
                .get("id")
                .and_then(|x| x.as_u64())
                .map_or(i, |x| x as usize);
            let from = match endpoint(&w["from"])? {
                (Some("in"), k, _) => Source::Input(k),
                (None, n, p) => Source::Port(n, p),
                _ => return Err(bad("wire source")),
            };
            let to = match endpoint(&w["to"])? {
                (Some("out"), k, _) => Target::Output(k),
                (None, n, p) => Target::Port(n, p),
                _ => return Err(bad("wire target")),
            };
            let ty = w["type"]
                .as_str()
                .and_then(|s| s.chars().next())
                .and_then(ObjectType::from_symbol)
                .ok_or_else(|| bad("wire type"))?;
            if g.wires.insert(id, Wire { from, to, ty }).is_some() {
                return Err(bad("duplicate wire id"));
            }
        }
        g.validate()?;
        Ok(g)
    }
}

fn dom_len(t: &DiagramTerm) -> usize {
    match t {
        DiagramTerm::Gen(l) => l.dom().len(),
        DiagramTerm::Id(i) => i.len(),
        DiagramTerm::Sym(..) => 2,
        DiagramTerm::Seq(f, _) => dom_len(f),
        DiagramTerm::Par(f, g) => dom_len(f) + dom_len(g),
    }
}

fn build(t: &DiagramTerm, b: &mut GraphBuilder, mut inputs: Vec<Source>) -> Vec<Source> {
    match t {
        DiagramTerm::Gen(l) => b.node(*l, &inputs),
        DiagramTerm::Id(_) => inputs,
        DiagramTerm::Sym(..) => {
            inputs.swap(0, 1);
            inputs
        }
        DiagramTerm::Seq(f, g) => {
            let mid = build(f, b, inputs);
            build(g, b, mid)
        }
        DiagramTerm::Par(f, g) => {
            let rest = inputs.split_off(dom_len(f));
            let mut out = build(f, b, inputs);
            out.extend(build(g, b, rest));
            out
        }
    }
}

/// Incremental construction of a port graph. Sources are handed out by
/// [`GraphBuilder::input`] and [`GraphBuilder::node`] and must each be
/// consumed exactly once, by a node or by [`GraphBuilder::output`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    graph: PortGraph,
    pending: HashSet<Source>,
    next_node: usize,
    next_wire: usize,
}

impl Default for PortGraph {
    fn default() -> Self {
        PortGraph::empty(Interface::unit(), Interface::unit())
    }
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, ty: ObjectType) -> Source {
        let s = Source::Input(self.graph.dom.len());
        self.graph.dom.0.push(ty);
        self.pending.insert(s);
        s
    }

    pub fn source_type(&self, s: Source) -> ObjectType {
        self.graph.source_type(s)
    }

    fn connect(&mut self, s: Source, t: Target) {
        assert!(
            self.pending.remove(&s),
            "source {s:?} consumed twice or unknown"
        );
        let ty = self.graph.source_type(s);
        assert_eq!(ty, self.graph.target_type(t), "wire type mismatch at {t:?}");
        self.graph
            .wires
            .insert(self.next_wire, Wire { from: s, to: t, ty });
        self.next_wire += 1;
    }

    /// Adds a generator fed by `inputs`, returning its output sources.
    ///
    /// Panics if the inputs do not match the generator's domain.
    pub fn node(&mut self, label: GeneratorLabel, inputs: &[Source]) -> Vec<Source> {
        assert_eq!(
            inputs.len(),
            label.dom().len(),
            "arity mismatch for {label}"
        );
        let id = self.next_node;
        self.next_node += 1;
        self.graph.nodes.insert(id, label);
        for (p, &s) in inputs.iter().enumerate() {
            self.connect(s, Target::Port(id, p));
        }
        (0..label.cod().len())
            .map(|p| {
                let s = Source::Port(id, p);
                self.pending.insert(s);
                s
            })
            .collect()
    }

    pub fn output(&mut self, s: Source) {
        let k = self.graph.cod.len();
        let ty = self.graph.source_type(s);
        self.graph.cod.0.push(ty);
        self.connect(s, Target::Output(k));
    }

    /// Copies `g` into the graph under construction, feeding its inputs
    /// from `inputs`; returns the sources standing for its outputs.
    pub fn embed(&mut self, g: &PortGraph, inputs: &[Source]) -> Vec<Source> {
        assert_eq!(inputs.len(), g.dom.len(), "embedded graph arity mismatch");
        let inc = g.incidence();
        let order = g.topo_order().expect("embedded graph must be acyclic");
        let mut map: HashMap<Source, Source> = HashMap::new();
        for (k, &s) in inputs.iter().enumerate() {
            map.insert(Source::Input(k), s);
        }
        for n in order {
            let label = g.nodes[&n];
            let ins: Vec<Source> = (0..label.dom().len())
                .map(|p| map[&g.wires[&inc.in_wire(n, p)].from])
                .collect();
            let outs = self.node(label, &ins);
            for (p, s) in outs.into_iter().enumerate() {
                map.insert(Source::Port(n, p), s);
            }
        }
        inc.outputs.iter().map(|w| map[&g.wires[w].from]).collect()
    }

    /// Panics if a source was never consumed.
    pub fn finish(self) -> PortGraph {
        assert!(
            self.pending.is_empty(),
            "unconsumed sources: {:?}",
            self.pending
        );
        self.graph
    }
}
