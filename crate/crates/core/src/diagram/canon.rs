use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use sha2::{Digest, Sha256};

use super::graph::{Incidence, PortGraph, Source, Target};

pub const DIGEST_ALG: &str = "sha256";

/// Breadth-first numbering of the nodes reachable from `seeds` (wires),
/// visiting each node's in-ports and then its out-ports in order.
fn traverse(
    g: &PortGraph,
    inc: &Incidence,
    seeds: &[usize],
    num: &mut HashMap<usize, usize>,
    order: &mut Vec<usize>,
) {
    let mut queue = VecDeque::new();
    let visit = |w: usize,
                 num: &mut HashMap<usize, usize>,
                 order: &mut Vec<usize>,
                 queue: &mut VecDeque<usize>| {
        let wire = &g.wires[&w];
        let ends = [
            match wire.from {
                Source::Port(n, _) => Some(n),
                Source::Input(_) => None,
            },
            match wire.to {
                Target::Port(n, _) => Some(n),
                Target::Output(_) => None,
            },
        ];
        for n in ends.into_iter().flatten() {
            if !num.contains_key(&n) {
                num.insert(n, num.len());
                order.push(n);
                queue.push_back(n);
            }
        }
    };
    for &w in seeds {
        visit(w, num, order, &mut queue);
    }
    while let Some(n) = queue.pop_front() {
        let l = g.nodes[&n];
        for p in 0..l.dom().len() {
            visit(inc.in_wire(n, p), num, order, &mut queue);
        }
        for p in 0..l.cod().len() {
            visit(inc.out_wire(n, p), num, order, &mut queue);
        }
    }
}

fn encode(
    g: &PortGraph,
    inc: &Incidence,
    order: &[usize],
    num: &HashMap<usize, usize>,
    out: &mut String,
) {
    let src = |s: Source, out: &mut String| match s {
        Source::Input(k) => write!(out, "i{k}").unwrap(),
        Source::Port(n, p) => write!(out, "{}.{p}", num[&n]).unwrap(),
    };
    for &n in order {
        let l = g.nodes[&n];
        write!(out, "{l}(").unwrap();
        for p in 0..l.dom().len() {
            if p > 0 {
                out.push(',');
            }
            src(g.wires[&inc.in_wire(n, p)].from, out);
        }
        out.push(')');
    }
}

/// A string that is equal for two graphs exactly when they are isomorphic
/// by a label- and port-preserving map that fixes the boundary order.
///
/// Nodes connected to the boundary are numbered by a traversal anchored at
/// the inputs and then the outputs. Components with no boundary wire are
/// numbered from whichever root gives the least encoding, and sorted.
pub fn canonical_form(g: &PortGraph) -> String {
    let inc = g.incidence();
    let mut num = HashMap::new();
    let mut order = Vec::new();
    let seeds: Vec<usize> = inc.inputs.iter().chain(&inc.outputs).copied().collect();
    traverse(g, &inc, &seeds, &mut num, &mut order);

    if order.len() < g.nodes.len() {
        let mut floating: Vec<(String, Vec<usize>)> = Vec::new();
        let mut done: BTreeSet<usize> = order.iter().copied().collect();
        for &n in g.nodes.keys() {
            if done.contains(&n) {
                continue;
            }
            let mut comp_num = HashMap::from([(n, 0)]);
            let mut comp = vec![n];
            let seeds: Vec<usize> = node_wires(g, &inc, n);
            traverse(g, &inc, &seeds, &mut comp_num, &mut comp);
            let mut best: Option<(String, Vec<usize>)> = None;
            for &root in &comp {
                let mut rn = HashMap::from([(root, 0)]);
                let mut ro = vec![root];
                traverse(g, &inc, &node_wires(g, &inc, root), &mut rn, &mut ro);
                let mut s = String::new();
                encode(g, &inc, &ro, &rn, &mut s);
                if best.as_ref().is_none_or(|(b, _)| s < *b) {
                    best = Some((s, ro));
                }
            }
            done.extend(comp.iter().copied());
            floating.push(best.unwrap());
        }
        floating.sort();
        for (_, comp) in floating {
            for n in comp {
                num.insert(n, order.len());
                order.push(n);
            }
        }
    }

    let mut out = format!("{}->{}|", g.dom, g.cod);
    encode(g, &inc, &order, &num, &mut out);
    out.push('|');
    for (k, &w) in inc.outputs.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        match g.wires[&w].from {
            Source::Input(i) => write!(out, "i{i}").unwrap(),
            Source::Port(n, p) => write!(out, "{}.{p}", num[&n]).unwrap(),
        }
    }
    out
}

fn node_wires(g: &PortGraph, inc: &Incidence, n: usize) -> Vec<usize> {
    let l = g.nodes[&n];
    (0..l.dom().len())
        .map(|p| inc.in_wire(n, p))
        .chain((0..l.cod().len()).map(|p| inc.out_wire(n, p)))
        .collect()
}

pub fn smc_equal(g: &PortGraph, h: &PortGraph) -> bool {
    g.dom == h.dom
        && g.cod == h.cod
        && g.nodes.len() == h.nodes.len()
        && canonical_form(g) == canonical_form(h)
}

/// Lowercase hex SHA-256 of the canonical form.
pub fn digest(g: &PortGraph) -> String {
    hex::encode(Sha256::digest(canonical_form(g).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{DiagramTerm, GeneratorLabel as G, ObjectType::*};

    fn gen(l: G) -> DiagramTerm {
        DiagramTerm::Gen(l)
    }

    #[test]
    fn interchange_law() {
        let id1 = DiagramTerm::id(&[Right]);
        let id2 = DiagramTerm::id(&[Right, Right]);
        let (f, g) = (gen(G::BlackCopy), gen(G::BlackMerge));
        let a = f.clone().par(id2.clone()).seq(id2.par(g.clone()));
        let b = id1.clone().par(g.clone()).seq(f.clone().par(id1));
        let c = f.par(g);
        let ga = a.to_port_graph().unwrap();
        assert!(smc_equal(&ga, &b.to_port_graph().unwrap()));
        assert!(smc_equal(&ga, &c.to_port_graph().unwrap()));
        let x = gen(G::Atom('a')).par(gen(G::Atom('b')));
        let y = gen(G::Atom('a'))
            .par(DiagramTerm::empty())
            .par(gen(G::Atom('b')));
        assert!(smc_equal(
            &x.to_port_graph().unwrap(),
            &y.to_port_graph().unwrap()
        ));
    }

    #[test]
    fn copy_is_not_cocommutative_up_to_smc() {
        let c = gen(G::BlackCopy);
        let swapped = c.clone().seq(DiagramTerm::Sym(Right, Right));
        let g = c.to_port_graph().unwrap();
        assert!(smc_equal(&g, &g));
        assert!(!smc_equal(&g, &swapped.to_port_graph().unwrap()));
    }

    #[test]
    fn floating_components_are_order_independent() {
        let loop_ = gen(G::Cup)
            .seq(DiagramTerm::Sym(Right, Left))
            .seq(gen(G::Cap));
        let st = gen(G::Atom('a')).seq(gen(G::RedDelete));
        let x = loop_.clone().par(st.clone()).to_port_graph().unwrap();
        let y = st.par(loop_).to_port_graph().unwrap();
        assert!(smc_equal(&x, &y));
        assert_eq!(digest(&x), digest(&y));
        assert_eq!(digest(&x).len(), 64);
    }

    #[test]
    fn ids_do_not_matter() {
        let g = gen(G::BlackCopy)
            .seq(gen(G::BlackMerge))
            .to_port_graph()
            .unwrap();
        let mut h = PortGraph::empty(g.dom.clone(), g.cod.clone());
        let shift = |s: Source| match s {
            Source::Port(n, p) => Source::Port(n + 10, p),
            s => s,
        };
        for (&n, &l) in &g.nodes {
            h.nodes.insert(n + 10, l);
        }
        for (&id, w) in &g.wires {
            let to = match w.to {
                Target::Port(n, p) => Target::Port(n + 10, p),
                t => t,
            };
            h.wires.insert(
                id * 7 + 3,
                crate::diagram::Wire {
                    from: shift(w.from),
                    to,
                    ty: w.ty,
                },
            );
        }
        h.validate().unwrap();
        assert_eq!(canonical_form(&g), canonical_form(&h));
    }
}
