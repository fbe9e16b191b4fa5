//! String diagrams over the three generating objects: typed composition
//! terms, their port-graph quotient by the symmetric monoidal laws, wire
//! bending and rendering.

mod bend;
mod canon;
mod dot;
mod graph;
mod kad;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regex::RegExp;

pub use bend::{bend_graph, bend_to_left_to_right, normalise_snakes, unbend};
pub use canon::{canonical_form, digest, smc_equal, DIGEST_ALG};
pub use dot::render_dot;
pub use graph::{GraphBuilder, Incidence, PortGraph, Source, Target, Wire};
pub use kad::{parse_kad, print_kad};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectType {
    Red,
    Right,
    Left,
}

impl ObjectType {
    pub fn symbol(self) -> char {
        match self {
            ObjectType::Red => 'R',
            ObjectType::Right => '>',
            ObjectType::Left => '<',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'R' => Some(ObjectType::Red),
            '>' => Some(ObjectType::Right),
            '<' => Some(ObjectType::Left),
            _ => None,
        }
    }
}

impl fmt::Display for ObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// A list of generating objects; the empty list is the monoidal unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interface(pub Vec<ObjectType>);

impl Interface {
    pub fn unit() -> Self {
        Interface(Vec::new())
    }

    pub fn of(objects: &[ObjectType]) -> Self {
        Interface(objects.to_vec())
    }

    pub fn repeat(o: ObjectType, k: usize) -> Self {
        Interface(vec![o; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Interface) -> Interface {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Interface(v)
    }

    pub fn count(&self, o: ObjectType) -> usize {
        self.0.iter().filter(|&&x| x == o).count()
    }

    /// Parses the compact notation used in `.kad` and JSON, e.g. `"R>"`;
    /// `""` or `"I"` is the unit.
    pub fn parse(text: &str) -> Option<Interface> {
        if text == "I" {
            return Some(Interface::unit());
        }
        text.chars()
            .map(ObjectType::from_symbol)
            .collect::<Option<Vec<_>>>()
            .map(Interface)
    }

    pub fn compact(&self) -> String {
        self.0.iter().map(|o| o.symbol()).collect()
    }
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "I")
        } else {
            write!(f, "{}", self.compact())
        }
    }
}

impl Serialize for Interface {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.compact().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interface {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Interface::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad interface {s:?}")))
    }
}

/// The generating morphisms. The derived order is the label rank used
/// to break ties during canonicalisation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeneratorLabel {
    RedCopy,
    RedDelete,
    Star,
    Prod,
    One,
    Sum,
    Zero,
    Atom(char),
    Action,
    BlackCopy,
    BlackDelete,
    BlackMerge,
    BlackUnit,
    Cap,
    Cup,
}

impl GeneratorLabel {
    pub fn dom(self) -> &'static [ObjectType] {
        use GeneratorLabel::*;
        use ObjectType::*;
        match self {
            RedCopy | RedDelete | Star => &[Red],
            Prod | Sum => &[Red, Red],
            One | Zero | Atom(_) | BlackUnit | Cup => &[],
            Action => &[Red, Right],
            BlackCopy | BlackDelete => &[Right],
            BlackMerge => &[Right, Right],
            Cap => &[Left, Right],
        }
    }

    pub fn cod(self) -> &'static [ObjectType] {
        use GeneratorLabel::*;
        use ObjectType::*;
        match self {
            RedCopy => &[Red, Red],
            RedDelete | BlackDelete | Cap => &[],
            Star | Prod | Sum | One | Zero | Atom(_) => &[Red],
            Action | BlackMerge | BlackUnit => &[Right],
            BlackCopy => &[Right, Right],
            Cup => &[Right, Left],
        }
    }

    pub fn is_red(self) -> bool {
        use GeneratorLabel::*;
        matches!(
            self,
            RedCopy | RedDelete | Star | Prod | One | Sum | Zero | Atom(_)
        )
    }

    /// The `.kad` keyword (without the `[x]` argument of atoms).
    pub fn name(self) -> &'static str {
        use GeneratorLabel::*;
        match self {
            RedCopy => "rcopy",
            RedDelete => "rdel",
            Star => "star",
            Prod => "prod",
            One => "rone",
            Sum => "rsum",
            Zero => "rzero",
            Atom(_) => "atom",
            Action => "act",
            BlackCopy => "copy",
            BlackDelete => "del",
            BlackMerge => "merge",
            BlackUnit => "unit",
            Cap => "cap",
            Cup => "cup",
        }
    }

    pub fn from_name(name: &str, arg: Option<char>) -> Option<Self> {
        use GeneratorLabel::*;
        let l = match name {
            "rcopy" => RedCopy,
            "rdel" => RedDelete,
            "star" => Star,
            "prod" => Prod,
            "rone" => One,
            "rsum" => Sum,
            "rzero" => Zero,
            "atom" => return arg.map(Atom),
            "act" => Action,
            "copy" => BlackCopy,
            "del" => BlackDelete,
            "merge" => BlackMerge,
            "unit" => BlackUnit,
            "cap" => Cap,
            "cup" => Cup,
            _ => return None,
        };
        if arg.is_some() {
            return None;
        }
        Some(l)
    }

    pub fn arg(self) -> Option<char> {
        match self {
            GeneratorLabel::Atom(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for GeneratorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorLabel::Atom(c) => write!(f, "atom[{c}]"),
            l => write!(f, "{}", l.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DiagramTerm {
    Gen(GeneratorLabel),
    Id(Interface),
    Sym(ObjectType, ObjectType),
    Seq(Box<DiagramTerm>, Box<DiagramTerm>),
    Par(Box<DiagramTerm>, Box<DiagramTerm>),
}

use DiagramTerm::{Gen, Id, Par, Seq, Sym};

impl DiagramTerm {
    pub fn gen(l: GeneratorLabel) -> Self {
        Gen(l)
    }

    pub fn id(objects: &[ObjectType]) -> Self {
        Id(Interface::of(objects))
    }

    pub fn empty() -> Self {
        Id(Interface::unit())
    }

    pub fn seq(self, g: DiagramTerm) -> Self {
        Seq(Box::new(self), Box::new(g))
    }

    pub fn par(self, g: DiagramTerm) -> Self {
        Par(Box::new(self), Box::new(g))
    }

    /// Sequential composite of a list, built as a balanced tree.
    pub fn seq_all(mut terms: Vec<DiagramTerm>) -> Self {
        match terms.len() {
            0 => panic!("seq_all needs at least one term"),
            1 => terms.pop().unwrap(),
            n => {
                let right = terms.split_off(n / 2);
                Self::seq_all(terms).seq(Self::seq_all(right))
            }
        }
    }

    /// Monoidal product of a list, built as a balanced tree; the empty
    /// list gives the empty diagram.
    pub fn par_all(mut terms: Vec<DiagramTerm>) -> Self {
        match terms.len() {
            0 => Self::empty(),
            1 => terms.pop().unwrap(),
            n => {
                let right = terms.split_off(n / 2);
                Self::par_all(terms).par(Self::par_all(right))
            }
        }
    }

    pub fn typecheck(&self) -> Result<(Interface, Interface)> {
        self.check_at(&mut String::from("root"))
    }

    fn check_at(&self, path: &mut String) -> Result<(Interface, Interface)> {
        match self {
            Gen(l) => Ok((Interface::of(l.dom()), Interface::of(l.cod()))),
            Id(i) => Ok((i.clone(), i.clone())),
            Sym(a, b) => Ok((Interface(vec![*a, *b]), Interface(vec![*b, *a]))),
            Seq(f, g) | Par(f, g) => {
                let seq = matches!(self, Seq(..));
                let tag = if seq { "seq" } else { "par" };
                let len = path.len();
                path.push_str(&format!(".{tag}.0"));
                let (fd, fc) = f.check_at(path)?;
                path.truncate(len);
                path.push_str(&format!(".{tag}.1"));
                let (gd, gc) = g.check_at(path)?;
                path.truncate(len);
                if seq {
                    if fc != gd {
                        return Err(Error::TypeMismatch {
                            path: path.clone(),
                            left: fc,
                            right: gd,
                        });
                    }
                    Ok((fd, gc))
                } else {
                    Ok((fd.concat(&gd), fc.concat(&gc)))
                }
            }
        }
    }

    pub fn dom(&self) -> Result<Interface> {
        Ok(self.typecheck()?.0)
    }

    pub fn cod(&self) -> Result<Interface> {
        Ok(self.typecheck()?.1)
    }

    /// Multiset of generator leaves, in left-to-right term order.
    pub fn generators(&self) -> Vec<GeneratorLabel> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                Gen(l) => out.push(*l),
                Id(_) | Sym(..) => {}
                Seq(f, g) | Par(f, g) => {
                    stack.push(g);
                    stack.push(f);
                }
            }
        }
        out
    }

    pub fn to_port_graph(&self) -> Result<PortGraph> {
        PortGraph::from_term(self)
    }
}

/// Term realising a permutation of wires: output position `j` carries the
/// input at position `perm[j]`. Built from adjacent symmetries.
pub fn permutation(objects: &[ObjectType], perm: &[usize]) -> DiagramTerm {
    assert_eq!(objects.len(), perm.len());
    let n = objects.len();
    // bubble sort the target positions, recording adjacent swaps
    let mut target = vec![0; n];
    for (j, &i) in perm.iter().enumerate() {
        target[i] = j;
    }
    let mut current: Vec<ObjectType> = objects.to_vec();
    let mut layers = Vec::new();
    loop {
        let mut swapped = false;
        let mut k = 0;
        while k + 1 < n {
            if target[k] > target[k + 1] {
                let mut parts = Vec::new();
                if k > 0 {
                    parts.push(Id(Interface::of(&current[..k])));
                }
                parts.push(Sym(current[k], current[k + 1]));
                if k + 2 < n {
                    parts.push(Id(Interface::of(&current[k + 2..])));
                }
                layers.push(DiagramTerm::par_all(parts));
                target.swap(k, k + 1);
                current.swap(k, k + 1);
                swapped = true;
            }
            k += 1;
        }
        if !swapped {
            break;
        }
    }
    if layers.is_empty() {
        Id(Interface::of(objects))
    } else {
        DiagramTerm::seq_all(layers)
    }
}

/// Feedback over `l` trailing Right wires: for `f : X·▶^l → Y·▶^l`,
/// the loop wires are closed with cups and caps.
pub fn trace(f: DiagramTerm, l: usize) -> Result<DiagramTerm> {
    use ObjectType::{Left, Right};
    let (dom, cod) = f.typecheck()?;
    let bad = |i: &Interface| i.len() < l || i.0[i.len() - l..].iter().any(|&o| o != Right);
    if bad(&dom) || bad(&cod) {
        return Err(Error::InterfaceMismatch(
            format!("{dom} -> {cod}"),
            format!("loop of {l} right wires"),
        ));
    }
    if l == 0 {
        return Ok(f);
    }
    let x = Interface::of(&dom.0[..dom.len() - l]);
    let y = Interface::of(&cod.0[..cod.len() - l]);
    let cups = DiagramTerm::par_all(vec![Gen(GeneratorLabel::Cup); l]);
    // X·(▶◀)^l → X·▶^l·◀^l
    let mut objs = x.0.clone();
    for _ in 0..l {
        objs.push(Right);
        objs.push(Left);
    }
    let xs = x.len();
    let mut perm: Vec<usize> = (0..xs).collect();
    perm.extend((0..l).map(|k| xs + 2 * k));
    perm.extend((0..l).map(|k| xs + 2 * k + 1));
    let split = permutation(&objs, &perm);
    // Y·▶^l·◀^l → Y·(◀▶)^l
    let ys = y.len();
    let mut objs2 = y.0.clone();
    objs2.extend(std::iter::repeat_n(Right, l));
    objs2.extend(std::iter::repeat_n(Left, l));
    let mut perm2: Vec<usize> = (0..ys).collect();
    for k in 0..l {
        perm2.push(ys + l + k);
        perm2.push(ys + k);
    }
    let join = permutation(&objs2, &perm2);
    let caps = DiagramTerm::par_all(vec![Gen(GeneratorLabel::Cap); l]);
    Ok(DiagramTerm::seq_all(vec![
        Id(x).par(cups),
        split,
        f.par(Id(Interface::repeat(Left, l))),
        join,
        Id(y).par(caps),
    ]))
}

/// The red state `⟨e⟩ : I → red` built from the red generators.
pub fn state(e: &RegExp) -> DiagramTerm {
    use GeneratorLabel as G;
    match e {
        RegExp::Zero => Gen(G::Zero),
        RegExp::One => Gen(G::One),
        RegExp::Atom(c) => Gen(G::Atom(*c)),
        RegExp::Sum(l, r) => state(l).par(state(r)).seq(Gen(G::Sum)),
        RegExp::Prod(l, r) => state(l).par(state(r)).seq(Gen(G::Prod)),
        RegExp::Star(x) => state(x).seq(Gen(G::Star)),
    }
}

/// The scalar `⟨e⟩ : ▶ → ▶`, the red state of `e` fed into the action.
pub fn scalar(e: &RegExp) -> DiagramTerm {
    state(e)
        .par(DiagramTerm::id(&[ObjectType::Right]))
        .seq(Gen(GeneratorLabel::Action))
}

fn boundary_of(t: &DiagramTerm) -> Result<(Interface, Interface)> {
    t.typecheck()
}

pub fn is_left_to_right(t: &DiagramTerm) -> Result<bool> {
    let (d, c) = boundary_of(t)?;
    Ok(d.0.iter().chain(&c.0).all(|&o| o == ObjectType::Right))
}

/// Left-to-right, and the only red generators are atoms.
pub fn is_atomic(t: &DiagramTerm) -> Result<bool> {
    Ok(is_left_to_right(t)?
        && t.generators()
            .iter()
            .all(|l| !l.is_red() || matches!(l, GeneratorLabel::Atom(_))))
}
