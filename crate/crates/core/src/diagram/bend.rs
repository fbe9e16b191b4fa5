use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

use super::graph::{GraphBuilder, PortGraph, Source, Target, Wire};
use super::{permutation, DiagramTerm, GeneratorLabel, Interface, ObjectType};

use DiagramTerm::{Gen, Id};
use ObjectType::{Left, Red, Right};

fn reject_red(dom: &Interface, cod: &Interface) -> Result<()> {
    if dom.0.contains(&Red) || cod.0.contains(&Red) {
        return Err(Error::RedBoundary(dom.clone(), cod.clone()));
    }
    Ok(())
}

fn rights(i: &Interface) -> Interface {
    Interface::repeat(Right, i.count(Right))
}

fn repeat(t: DiagramTerm, k: usize) -> DiagramTerm {
    DiagramTerm::par_all(vec![t; k])
}

/// Turns `t : A → B` over ▶/◀ into a left-to-right diagram
/// `A▶ · ▶^|B◀| → B▶ · ▶^|A◀|`: every ◀ input is fed by a cup whose ▶ end
/// becomes a new output, and every ◀ output is capped against a new input.
pub fn bend_to_left_to_right(t: &DiagramTerm) -> Result<DiagramTerm> {
    let (dom, cod) = t.typecheck()?;
    reject_red(&dom, &cod)?;
    let al = dom.count(Left);
    let bl = cod.count(Left);
    if al == 0 && bl == 0 {
        return Ok(t.clone());
    }
    let ar = dom.len() - al;
    let br = cod.len() - bl;

    // A▶·▶^bl·(▶◀)^al
    let mut objs: Vec<ObjectType> = vec![Right; ar + bl];
    for _ in 0..al {
        objs.push(Right);
        objs.push(Left);
    }
    // rearrange to A·▶^bl·▶^al
    let mut perm = Vec::new();
    let (mut next_r, mut next_l) = (0, 0);
    for &o in &dom.0 {
        if o == Right {
            perm.push(next_r);
            next_r += 1;
        } else {
            perm.push(ar + bl + 2 * next_l + 1);
            next_l += 1;
        }
    }
    perm.extend(ar..ar + bl);
    perm.extend((0..al).map(|k| ar + bl + 2 * k));
    let open = Id(Interface::repeat(Right, ar + bl)).par(repeat(Gen(GeneratorLabel::Cup), al));

    // B·▶^bl·▶^al → B▶·(◀▶)^bl·▶^al
    let mut objs2 = cod.0.clone();
    objs2.extend(std::iter::repeat_n(Right, bl + al));
    let mut perm2 = Vec::new();
    let lefts: Vec<usize> = (0..cod.len()).filter(|&k| cod.0[k] == Left).collect();
    perm2.extend((0..cod.len()).filter(|&k| cod.0[k] == Right));
    for (k, &pos) in lefts.iter().enumerate() {
        perm2.push(pos);
        perm2.push(cod.len() + k);
    }
    perm2.extend(cod.len() + bl..cod.len() + bl + al);
    let close = Id(Interface::repeat(Right, br))
        .par(repeat(Gen(GeneratorLabel::Cap), bl))
        .par(Id(Interface::repeat(Right, al)));

    Ok(DiagramTerm::seq_all(vec![
        open,
        permutation(&objs, &perm),
        t.clone().par(Id(Interface::repeat(Right, bl + al))),
        permutation(&objs2, &perm2),
        close,
    ]))
}

/// Inverse of [`bend_to_left_to_right`]: given the bent diagram `u` and
/// the original interfaces, caps the trailing ▶ outputs against ◀ inputs
/// and feeds the trailing ▶ inputs from cups.
pub fn unbend(u: &DiagramTerm, dom: &Interface, cod: &Interface) -> Result<DiagramTerm> {
    reject_red(dom, cod)?;
    let al = dom.count(Left);
    let bl = cod.count(Left);
    let (ar, br) = (dom.len() - al, cod.len() - bl);
    let (ud, uc) = u.typecheck()?;
    if ud != Interface::repeat(Right, ar + bl) || uc != Interface::repeat(Right, br + al) {
        return Err(Error::InterfaceMismatch(
            format!("{ud} -> {uc}"),
            format!("bent form of {dom} -> {cod}"),
        ));
    }
    if al == 0 && bl == 0 {
        return Ok(u.clone());
    }
    // A → A▶·◀^al
    let mut perm = Vec::new();
    perm.extend((0..dom.len()).filter(|&k| dom.0[k] == Right));
    perm.extend((0..dom.len()).filter(|&k| dom.0[k] == Left));
    let sort_in = permutation(&dom.0, &perm);
    // A▶·◀^al → A▶·(▶◀)^bl·◀^al
    let cups = Id(rights(dom))
        .par(repeat(Gen(GeneratorLabel::Cup), bl))
        .par(Id(Interface::repeat(Left, al)));
    // → A▶·▶^bl·◀^bl·◀^al
    let mut objs = vec![Right; ar];
    for _ in 0..bl {
        objs.push(Right);
        objs.push(Left);
    }
    objs.extend(std::iter::repeat_n(Left, al));
    let mut perm2: Vec<usize> = (0..ar).collect();
    perm2.extend((0..bl).map(|k| ar + 2 * k));
    perm2.extend((0..bl).map(|k| ar + 2 * k + 1));
    perm2.extend(ar + 2 * bl..ar + 2 * bl + al);
    // u ⊗ id: → B▶·▶^al·◀^bl·◀^al, then to B·(◀▶)^al
    let mut objs3 = vec![Right; br + al];
    objs3.extend(std::iter::repeat_n(Left, bl + al));
    let mut perm3 = Vec::new();
    let (mut r, mut l) = (0, 0);
    for &o in &cod.0 {
        if o == Right {
            perm3.push(r);
            r += 1;
        } else {
            perm3.push(br + al + l);
            l += 1;
        }
    }
    for k in 0..al {
        perm3.push(br + al + bl + k);
        perm3.push(br + k);
    }
    let caps = Id(cod.clone()).par(repeat(Gen(GeneratorLabel::Cap), al));
    Ok(DiagramTerm::seq_all(vec![
        sort_in,
        cups,
        permutation(&objs, &perm2),
        u.clone().par(Id(Interface::repeat(Left, bl + al))),
        permutation(&objs3, &perm3),
        caps,
    ]))
}

/// Graph-level bending with the same interface convention as
/// [`bend_to_left_to_right`].
pub fn bend_graph(g: &PortGraph) -> Result<PortGraph> {
    reject_red(&g.dom, &g.cod)?;
    if !g.dom.0.contains(&Left) && !g.cod.0.contains(&Left) {
        return Ok(g.clone());
    }
    let mut b = GraphBuilder::new();
    let mut feed: Vec<Option<Source>> = g
        .dom
        .0
        .iter()
        .map(|&o| (o == Right).then(|| b.input(Right)))
        .collect();
    let back: Vec<Source> = g
        .cod
        .0
        .iter()
        .filter(|&&o| o == Left)
        .map(|_| b.input(Right))
        .collect();
    let mut returned = Vec::new();
    for (k, &o) in g.dom.0.iter().enumerate() {
        if o == Left {
            let c = b.node(GeneratorLabel::Cup, &[]);
            feed[k] = Some(c[1]);
            returned.push(c[0]);
        }
    }
    let feed: Vec<Source> = feed.into_iter().map(Option::unwrap).collect();
    let outs = b.embed(g, &feed);
    let mut back = back.into_iter();
    let mut forward = Vec::new();
    for (k, &o) in g.cod.0.iter().enumerate() {
        if o == Right {
            forward.push(outs[k]);
        } else {
            b.node(GeneratorLabel::Cap, &[outs[k], back.next().unwrap()]);
        }
    }
    for s in forward.into_iter().chain(returned) {
        b.output(s);
    }
    Ok(b.finish())
}

fn reaches(g: &PortGraph, from: Target, to: Source) -> bool {
    let (Target::Port(start, _), Source::Port(goal, _)) = (from, to) else {
        return false;
    };
    let mut succ: HashMap<usize, Vec<usize>> = HashMap::new();
    for w in g.wires.values() {
        if let (Source::Port(a, _), Target::Port(b, _)) = (w.from, w.to) {
            succ.entry(a).or_default().push(b);
        }
    }
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        if n == goal {
            return true;
        }
        for &m in succ.get(&n).map(|v| v.as_slice()).unwrap_or(&[]) {
            if seen.insert(m) {
                stack.push(m);
            }
        }
    }
    false
}

/// Yanks every cup–cap pair joined by a single wire into a plain wire
/// (the snake equations), and deletes closed cup–cap loops, until none
/// remain. A pair is only yanked when the result stays acyclic.
pub fn normalise_snakes(g: &PortGraph) -> PortGraph {
    let mut g = g.clone();
    'outer: loop {
        let inc = g.incidence();
        let cups: Vec<usize> = g
            .nodes
            .iter()
            .filter(|(_, &l)| l == GeneratorLabel::Cup)
            .map(|(&n, _)| n)
            .collect();
        for c in cups {
            let (wr, wl) = (inc.out_wire(c, 0), inc.out_wire(c, 1));
            for (joined, other) in [(wr, wl), (wl, wr)] {
                let Target::Port(k, kp) = g.wires[&joined].to else {
                    continue;
                };
                if g.nodes[&k] != GeneratorLabel::Cap {
                    continue;
                }
                let into_cap = inc.in_wire(k, 1 - kp);
                if into_cap == other {
                    // closed loop
                    g.nodes.remove(&c);
                    g.nodes.remove(&k);
                    g.wires.remove(&wr);
                    g.wires.remove(&wl);
                    continue 'outer;
                }
                let s = g.wires[&into_cap].from;
                let t = g.wires[&other].to;
                if reaches(&g, t, s) {
                    continue;
                }
                let ty = g.wires[&other].ty;
                g.nodes.remove(&c);
                g.nodes.remove(&k);
                g.wires.remove(&joined);
                g.wires.remove(&other);
                g.wires.insert(into_cap, Wire { from: s, to: t, ty });
                continue 'outer;
            }
        }
        return g;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::smc_equal;

    fn roundtrip(t: &DiagramTerm) -> bool {
        let (d, c) = t.typecheck().unwrap();
        let bent = bend_to_left_to_right(t).unwrap();
        let back = unbend(&bent, &d, &c).unwrap();
        let g = normalise_snakes(&back.to_port_graph().unwrap());
        smc_equal(&g, &t.to_port_graph().unwrap())
    }

    #[test]
    fn left_to_right_is_unchanged() {
        let t = Gen(GeneratorLabel::BlackCopy);
        assert_eq!(bend_to_left_to_right(&t).unwrap(), t);
    }

    #[test]
    fn bending_a_left_identity() {
        let t = Id(Interface::of(&[Left]));
        let bent = bend_to_left_to_right(&t).unwrap();
        let (d, c) = bent.typecheck().unwrap();
        assert_eq!((d.compact(), c.compact()), (">".into(), ">".into()));
        let g = bent.to_port_graph().unwrap();
        let labels: Vec<_> = g.nodes.values().copied().collect();
        assert_eq!(labels, vec![GeneratorLabel::Cup, GeneratorLabel::Cap]);
        assert!(roundtrip(&t));
    }

    #[test]
    fn cap_and_cup_roundtrip() {
        assert!(roundtrip(&Gen(GeneratorLabel::Cap)));
        assert!(roundtrip(&Gen(GeneratorLabel::Cup)));
        let mixed = Gen(GeneratorLabel::Cap)
            .par(Gen(GeneratorLabel::BlackCopy))
            .par(Id(Interface::of(&[Left])))
            .seq(
                Id(Interface::of(&[Right]))
                    .par(Gen(GeneratorLabel::Cup))
                    .par(Id(Interface::of(&[Right, Left]))),
            );
        assert!(roundtrip(&mixed));
    }

    #[test]
    fn term_and_graph_bending_agree() {
        let t = Id(Interface::of(&[Right]))
            .par(Gen(GeneratorLabel::Cap))
            .par(Gen(GeneratorLabel::Cup));
        let a = bend_to_left_to_right(&t).unwrap().to_port_graph().unwrap();
        let b = bend_graph(&t.to_port_graph().unwrap()).unwrap();
        assert!(smc_equal(&a, &b));
    }

    #[test]
    fn red_boundary_is_rejected() {
        assert!(matches!(
            bend_to_left_to_right(&Gen(GeneratorLabel::Action)),
            Err(Error::RedBoundary(..))
        ));
    }
}
