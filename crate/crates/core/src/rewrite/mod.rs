//! The equational theory as a rewriting system: axiom schemas, single
//! rewrite steps on port graphs, replayable traces, and the minimisation
//! pipeline built from them.

mod axioms;
mod pipeline;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde_json::{json, Value};

use crate::diagram::{
    digest, GeneratorLabel, Incidence, PortGraph, Source, Target, Wire, DIGEST_ALG,
};
use crate::error::{Error, Result};
use crate::normalform::sem_equal_graph;
use crate::regex::{parse_regex, Alphabet, RegExp};

pub use axioms::{
    axiom_schema, axiom_sides, axiom_vars, check_axiom, close_red_outputs, random_subst, AxiomId,
    Schema, SoundnessReport,
};
pub use pipeline::{
    atomise, atomise_graph, co_determinise, decide_equiv, determinise, minimise, reverse,
    through_representation, totalise, trim_useless, EquivCertificate,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Ltr,
    Rtl,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Ltr => "ltr",
            Direction::Rtl => "rtl",
        }
    }
}

/// Node ids of a redex and its boundary wires: input wires first, then
/// output wires, in the order of the schema's interface. A wire passing
/// straight through the redex is listed on both sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchor {
    pub nodes: Vec<usize>,
    pub boundary: Vec<usize>,
}

impl Anchor {
    /// The whole graph as a redex.
    pub fn whole(g: &PortGraph) -> Anchor {
        let inc = g.incidence();
        Anchor {
            nodes: g.nodes.keys().copied().collect(),
            boundary: inc.inputs.iter().chain(&inc.outputs).copied().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewriteStep {
    pub axiom: AxiomId,
    pub dir: Direction,
    pub anchor: Anchor,
    /// Regex text per red variable of the schema.
    pub subst: BTreeMap<String, String>,
    /// The new subdiagram, for macro-steps only.
    pub replacement: Option<PortGraph>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewriteTrace {
    pub alphabet: Alphabet,
    pub initial: String,
    pub steps: Vec<RewriteStep>,
    pub final_digest: String,
}

impl RewriteStep {
    pub fn to_value(&self) -> Value {
        let mut v = json!({
            "axiom": self.axiom.name(),
            "dir": self.dir.name(),
            "anchor": {"nodes": self.anchor.nodes, "boundary": self.anchor.boundary},
            "subst": self.subst,
        });
        if let Some(r) = &self.replacement {
            v["replacement"] = r.to_value();
        }
        v
    }

    pub fn from_value(v: &Value) -> Result<RewriteStep> {
        let bad = |m: &str| Error::Invariant(format!("rewrite step JSON: {m}"));
        let axiom: AxiomId = v["axiom"].as_str().ok_or_else(|| bad("axiom"))?.parse()?;
        let dir = match v["dir"].as_str() {
            Some("ltr") => Direction::Ltr,
            Some("rtl") => Direction::Rtl,
            _ => return Err(bad("dir")),
        };
        let ids = |x: &Value| -> Result<Vec<usize>> {
            x.as_array()
                .ok_or_else(|| bad("anchor"))?
                .iter()
                .map(|i| {
                    i.as_u64()
                        .map(|i| i as usize)
                        .ok_or_else(|| bad("anchor id"))
                })
                .collect()
        };
        let anchor = Anchor {
            nodes: ids(&v["anchor"]["nodes"])?,
            boundary: ids(&v["anchor"]["boundary"])?,
        };
        let mut subst = BTreeMap::new();
        if let Some(m) = v["subst"].as_object() {
            for (k, e) in m {
                subst.insert(
                    k.clone(),
                    e.as_str().ok_or_else(|| bad("subst"))?.to_string(),
                );
            }
        }
        let replacement = match v.get("replacement") {
            Some(r) if !r.is_null() => Some(PortGraph::from_value(r)?),
            _ => None,
        };
        Ok(RewriteStep {
            axiom,
            dir,
            anchor,
            subst,
            replacement,
        })
    }
}

impl RewriteTrace {
    pub fn empty(g: &PortGraph, alphabet: &Alphabet) -> RewriteTrace {
        let d = digest(g);
        RewriteTrace {
            alphabet: alphabet.clone(),
            initial: d.clone(),
            steps: Vec::new(),
            final_digest: d,
        }
    }

    pub fn to_value(&self) -> Value {
        json!({
            "digest_alg": DIGEST_ALG,
            "alphabet": self.alphabet.as_string(),
            "initial": self.initial,
            "steps": self.steps.iter().map(RewriteStep::to_value).collect::<Vec<_>>(),
            "final": self.final_digest,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("traces serialise")
    }

    pub fn from_json(text: &str) -> Result<RewriteTrace> {
        let v: Value = serde_json::from_str(text)?;
        let bad = |m: &str| Error::Invariant(format!("trace JSON: {m}"));
        if let Some(alg) = v["digest_alg"].as_str() {
            if alg != DIGEST_ALG {
                return Err(bad("unsupported digest algorithm"));
            }
        }
        let alphabet = Alphabet::parse(v["alphabet"].as_str().unwrap_or("ab"))?;
        let steps = v["steps"]
            .as_array()
            .ok_or_else(|| bad("steps"))?
            .iter()
            .map(RewriteStep::from_value)
            .collect::<Result<_>>()?;
        Ok(RewriteTrace {
            alphabet,
            initial: v["initial"].as_str().ok_or_else(|| bad("initial"))?.into(),
            steps,
            final_digest: v["final"].as_str().ok_or_else(|| bad("final"))?.into(),
        })
    }

    /// Appends `other`, which must start where this trace ends.
    pub fn extend(&mut self, other: RewriteTrace) {
        debug_assert_eq!(self.final_digest, other.initial);
        self.steps.extend(other.steps);
        self.final_digest = other.final_digest;
    }
}

/// The subgraph induced by an anchor, with boundary wires renumbered as
/// its inputs and outputs; also returns the host endpoints of the
/// boundary.
struct Redex {
    graph: PortGraph,
    host_sources: Vec<Source>,
    host_targets: Vec<Target>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
}

fn extract(g: &PortGraph, anchor: &Anchor, n_in: usize) -> Result<Redex> {
    let bad = |m: String| Error::Redex(m);
    let nodes: BTreeSet<usize> = anchor.nodes.iter().copied().collect();
    if nodes.len() != anchor.nodes.len() {
        return Err(bad("anchor lists a node twice".into()));
    }
    if let Some(n) = nodes.iter().find(|n| !g.nodes.contains_key(n)) {
        return Err(bad(format!("node {n} does not exist")));
    }
    if anchor.boundary.len() < n_in {
        return Err(bad("anchor has too few boundary wires".into()));
    }
    let (inputs, outputs) = anchor.boundary.split_at(n_in);
    for w in &anchor.boundary {
        if !g.wires.contains_key(w) {
            return Err(bad(format!("wire {w} does not exist")));
        }
    }
    let dup = |ws: &[usize]| ws.iter().collect::<BTreeSet<_>>().len() != ws.len();
    if dup(inputs) || dup(outputs) {
        return Err(bad("anchor lists a boundary wire twice".into()));
    }
    let inside_from = |w: &Wire| matches!(w.from, Source::Port(n, _) if nodes.contains(&n));
    let inside_to = |w: &Wire| matches!(w.to, Target::Port(n, _) if nodes.contains(&n));
    let mut sub = PortGraph::empty(Default::default(), Default::default());
    for &n in &nodes {
        sub.nodes.insert(n, g.nodes[&n]);
    }
    let input_pos: HashMap<usize, usize> =
        inputs.iter().enumerate().map(|(k, &w)| (w, k)).collect();
    let output_pos: HashMap<usize, usize> =
        outputs.iter().enumerate().map(|(k, &w)| (w, k)).collect();
    for (&id, w) in &g.wires {
        let (fi, ti) = (inside_from(w), inside_to(w));
        let (is_in, is_out) = (input_pos.get(&id), output_pos.get(&id));
        let from = match (fi, is_in) {
            (true, None) => w.from,
            (false, Some(&k)) => Source::Input(k),
            (true, Some(_)) => return Err(bad(format!("input wire {id} starts inside the redex"))),
            (false, None) => {
                if ti || is_out.is_some() {
                    return Err(bad(format!("wire {id} enters the redex off the boundary")));
                }
                continue;
            }
        };
        let to = match (ti, is_out) {
            (true, None) => w.to,
            (false, Some(&k)) => Target::Output(k),
            (true, Some(_)) => return Err(bad(format!("output wire {id} ends inside the redex"))),
            (false, None) => {
                return Err(bad(format!("wire {id} leaves the redex off the boundary")))
            }
        };
        sub.wires.insert(id, Wire { from, to, ty: w.ty });
    }
    let mut dom = vec![None; inputs.len()];
    let mut cod = vec![None; outputs.len()];
    for w in sub.wires.values() {
        if let Source::Input(k) = w.from {
            dom[k] = Some(w.ty);
        }
        if let Target::Output(k) = w.to {
            cod[k] = Some(w.ty);
        }
    }
    sub.dom = crate::diagram::Interface(dom.into_iter().map(|t| t.expect("typed")).collect());
    sub.cod = crate::diagram::Interface(cod.into_iter().map(|t| t.expect("typed")).collect());
    sub.validate()?;
    Ok(Redex {
        host_sources: inputs.iter().map(|w| g.wires[w].from).collect(),
        host_targets: outputs.iter().map(|w| g.wires[w].to).collect(),
        graph: sub,
        inputs: inputs.to_vec(),
        outputs: outputs.to_vec(),
    })
}

/// Refuses redexes whose outputs feed back into their inputs outside the
/// redex, since splicing could then close a cycle.
fn check_convex(g: &PortGraph, rx: &Redex, nodes: &BTreeSet<usize>) -> Result<()> {
    let inc = g.incidence();
    let sources: BTreeSet<usize> = rx
        .host_sources
        .iter()
        .filter_map(|s| match s {
            Source::Port(n, _) => Some(*n),
            Source::Input(_) => None,
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<usize> = rx
        .host_targets
        .iter()
        .filter_map(|t| match t {
            Target::Port(n, _) if !nodes.contains(n) => Some(*n),
            _ => None,
        })
        .collect();
    while let Some(n) = queue.pop_front() {
        if !seen.insert(n) {
            continue;
        }
        if sources.contains(&n) {
            return Err(Error::Redex("anchored subgraph is not convex".into()));
        }
        for p in 0..g.nodes[&n].cod().len() {
            if let Target::Port(m, _) = g.wires[&inc.out_wire(n, p)].to {
                if !nodes.contains(&m) {
                    queue.push_back(m);
                }
            }
        }
    }
    Ok(())
}

/// Replaces the redex by `rep`, reusing the host's boundary wire ids.
fn splice(g: &PortGraph, rx: &Redex, rep: &PortGraph) -> Result<PortGraph> {
    let mut out = g.clone();
    let mut next_node = g.next_node_id();
    let mut next_wire = g.next_wire_id();
    for n in rx.graph.nodes.keys() {
        out.nodes.remove(n);
    }
    for w in rx.graph.wires.keys() {
        out.wires.remove(w);
    }
    let mut node_map = HashMap::new();
    for (&n, &l) in &rep.nodes {
        node_map.insert(n, next_node);
        out.nodes.insert(next_node, l);
        next_node += 1;
    }
    let mut placed: Vec<(usize, Wire)> = Vec::new();
    let mut internal = Vec::new();
    for w in rep.wires.values() {
        let from = match w.from {
            Source::Input(k) => rx.host_sources[k],
            Source::Port(n, p) => Source::Port(node_map[&n], p),
        };
        let to = match w.to {
            Target::Output(k) => rx.host_targets[k],
            Target::Port(n, p) => Target::Port(node_map[&n], p),
        };
        let wire = Wire { from, to, ty: w.ty };
        match (w.from, w.to) {
            (Source::Input(k), _) => placed.push((rx.inputs[k], wire)),
            (_, Target::Output(k)) => placed.push((rx.outputs[k], wire)),
            _ => internal.push(wire),
        }
    }
    for (id, wire) in &mut placed {
        // a pass-through wire is both an input and an output of the redex
        if out.wires.contains_key(id) {
            *id = next_wire;
            next_wire += 1;
        }
        out.wires.insert(*id, *wire);
    }
    for wire in internal {
        out.wires.insert(next_wire, wire);
        next_wire += 1;
    }
    out.validate()?;
    Ok(out)
}

/// Applies one step. Primitive axioms are matched structurally against
/// the open schema side; macro-steps splice their replacement after
/// checking that it has the same language semantics as the redex.
pub fn apply_step(g: &PortGraph, step: &RewriteStep, sigma: &Alphabet) -> Result<PortGraph> {
    apply(g, step, sigma, true)
}

pub(crate) fn apply(
    g: &PortGraph,
    step: &RewriteStep,
    sigma: &Alphabet,
    verify: bool,
) -> Result<PortGraph> {
    let nodes: BTreeSet<usize> = step.anchor.nodes.iter().copied().collect();
    if step.axiom.is_macro() {
        let rep = step
            .replacement
            .as_ref()
            .ok_or_else(|| Error::Redex(format!("{} step carries no replacement", step.axiom)))?;
        rep.validate()?;
        let rx = extract(g, &step.anchor, rep.dom.len())?;
        if rx.graph.dom != rep.dom || rx.graph.cod != rep.cod {
            return Err(Error::Redex(format!(
                "replacement {} -> {} does not fit redex {} -> {}",
                rep.dom, rep.cod, rx.graph.dom, rx.graph.cod
            )));
        }
        if verify && !sem_equal_graph(&rx.graph, rep, sigma)? {
            return Err(Error::Redex(format!(
                "{} replacement changes the language semantics",
                step.axiom
            )));
        }
        check_convex(g, &rx, &nodes)?;
        return splice(g, &rx, rep);
    }
    if step.replacement.is_some() {
        return Err(Error::Redex(format!("{} is not a macro-step", step.axiom)));
    }
    let mut subst = BTreeMap::new();
    for (k, v) in &step.subst {
        subst.insert(k.clone(), parse_regex(v, sigma)?);
    }
    let schema = axiom_schema(step.axiom, &subst)?;
    let (from, to) = match step.dir {
        Direction::Ltr => (&schema.lhs, &schema.rhs),
        Direction::Rtl => (&schema.rhs, &schema.lhs),
    };
    let pattern = from.to_port_graph()?;
    let rx = extract(g, &step.anchor, pattern.dom.len())?;
    if !crate::diagram::smc_equal(&rx.graph, &pattern) {
        return Err(Error::Redex(format!(
            "anchored subgraph is not the {} side of {}",
            if step.dir == Direction::Ltr {
                "left"
            } else {
                "right"
            },
            step.axiom
        )));
    }
    for (k, var) in schema.vars.iter().enumerate() {
        if *var == "a" {
            continue;
        }
        if let Some(found) = eval_wire(g, &g.incidence(), rx.host_sources[k]) {
            if found != subst[*var] {
                return Err(Error::Redex(format!(
                    "variable {var} is {found} in the diagram, not {}",
                    subst[*var]
                )));
            }
        }
    }
    check_convex(g, &rx, &nodes)?;
    splice(g, &rx, &to.to_port_graph()?)
}

/// Value carried by a red wire when everything upstream of it is a closed
/// red term.
pub(crate) fn eval_wire(g: &PortGraph, inc: &Incidence, src: Source) -> Option<RegExp> {
    use GeneratorLabel as G;
    let Source::Port(n, p) = src else {
        return None;
    };
    let arg = |q: usize| eval_wire(g, inc, g.wires[&inc.in_wire(n, q)].from);
    Some(match g.nodes[&n] {
        G::Zero => RegExp::Zero,
        G::One => RegExp::One,
        G::Atom(c) => RegExp::Atom(c),
        G::Star => RegExp::star(arg(0)?),
        G::Prod => RegExp::prod(arg(0)?, arg(1)?),
        G::Sum => RegExp::sum(arg(0)?, arg(1)?),
        G::RedCopy if p < 2 => arg(0)?,
        _ => return None,
    })
}

/// Re-applies every step to `g0`, checking the digests at both ends.
pub fn replay_trace(g0: &PortGraph, t: &RewriteTrace) -> Result<PortGraph> {
    let d0 = digest(g0);
    if d0 != t.initial {
        return Err(Error::DigestMismatch {
            which: "initial",
            expected: t.initial.clone(),
            found: d0,
        });
    }
    let mut g = g0.clone();
    for (index, step) in t.steps.iter().enumerate() {
        g = apply_step(&g, step, &t.alphabet).map_err(|e| Error::Step {
            index,
            source: Box::new(e),
        })?;
    }
    let d = digest(&g);
    if d != t.final_digest {
        return Err(Error::DigestMismatch {
            which: "final",
            expected: t.final_digest.clone(),
            found: d,
        });
    }
    Ok(g)
}

/// Builds a trace step by step, keeping the current graph.
pub(crate) struct Tracer {
    pub graph: PortGraph,
    pub trace: RewriteTrace,
}

impl Tracer {
    pub fn new(g: PortGraph, sigma: &Alphabet) -> Tracer {
        Tracer {
            trace: RewriteTrace::empty(&g, sigma),
            graph: g,
        }
    }

    /// Applies a step whose validity is known by construction.
    pub fn step(&mut self, step: RewriteStep) -> Result<()> {
        self.graph = apply(&self.graph, &step, &self.trace.alphabet, false)?;
        self.trace.steps.push(step);
        Ok(())
    }

    /// Replaces the whole graph, citing a macro law.
    pub fn replace(&mut self, axiom: AxiomId, dir: Direction, new: PortGraph) -> Result<()> {
        let step = RewriteStep {
            axiom,
            dir,
            anchor: Anchor::whole(&self.graph),
            subst: BTreeMap::new(),
            replacement: Some(new),
        };
        self.step(step)
    }

    pub fn finish(mut self) -> (PortGraph, RewriteTrace) {
        self.trace.final_digest = digest(&self.graph);
        (self.graph, self.trace)
    }
}
