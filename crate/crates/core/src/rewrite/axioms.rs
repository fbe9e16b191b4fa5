use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{
    state, trace, DiagramTerm, GeneratorLabel as G, GraphBuilder, ObjectType, PortGraph, Source,
};
use crate::error::{Error, Result};
use crate::normalform::{eval_red, sem_equal_graph};
use crate::regex::{random_regex_with, Alphabet, RegExp};

/// Identifiers of the equational theory, plus the derived macro-steps
/// that cite a whole-diagram semantic law instead of a single redex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomId {
    A1,
    A2,
    A3,
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
    B8,
    B9,
    B10,
    B11,
    B12,
    C1,
    C2,
    C3,
    C4,
    C5,
    D1,
    D2,
    D3,
    D4,
    E1,
    E2L,
    E2R,
    E3,
    E4,
    E5,
    E6,
    E7,
    E8,
    E9,
    E10,
    E11,
    E13,
    E14a,
    E14b,
    E15,
    Cpy,
    Del,
    CoCpy,
    CoDel,
    Repr,
    Reorder,
}

use AxiomId::*;

const ALL: [AxiomId; 46] = [
    A1, A2, A3, B1, B2, B3, B4, B5, B6, B7, B8, B9, B10, B11, B12, C1, C2, C3, C4, C5, D1, D2, D3,
    D4, E1, E2L, E2R, E3, E4, E5, E6, E7, E8, E9, E10, E11, E13, E14a, E14b, E15, Cpy, Del, CoCpy,
    CoDel, Repr, Reorder,
];

impl AxiomId {
    pub fn all() -> &'static [AxiomId] {
        &ALL
    }

    /// The axioms with a redex schema, in catalog order.
    pub fn primitive() -> impl Iterator<Item = AxiomId> {
        ALL.iter().copied().filter(|a| !a.is_macro())
    }

    pub fn is_macro(self) -> bool {
        matches!(self, Cpy | Del | CoCpy | CoDel | Repr | Reorder)
    }

    pub fn is_red_block(self) -> bool {
        self.name().starts_with('E')
    }

    pub fn name(self) -> &'static str {
        match self {
            A1 => "A1",
            A2 => "A2",
            A3 => "A3",
            B1 => "B1",
            B2 => "B2",
            B3 => "B3",
            B4 => "B4",
            B5 => "B5",
            B6 => "B6",
            B7 => "B7",
            B8 => "B8",
            B9 => "B9",
            B10 => "B10",
            B11 => "B11",
            B12 => "B12",
            C1 => "C1",
            C2 => "C2",
            C3 => "C3",
            C4 => "C4",
            C5 => "C5",
            D1 => "D1",
            D2 => "D2",
            D3 => "D3",
            D4 => "D4",
            E1 => "E1",
            E2L => "E2L",
            E2R => "E2R",
            E3 => "E3",
            E4 => "E4",
            E5 => "E5",
            E6 => "E6",
            E7 => "E7",
            E8 => "E8",
            E9 => "E9",
            E10 => "E10",
            E11 => "E11",
            E13 => "E13",
            E14a => "E14a",
            E14b => "E14b",
            E15 => "E15",
            Cpy => "CPY",
            Del => "DEL",
            CoCpy => "COCPY",
            CoDel => "CODEL",
            Repr => "REPR",
            Reorder => "REORDER",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            A1 => "snake on a right wire",
            A2 => "snake on a left wire",
            A3 => "isolated loop vanishes",
            B1 => "copy coassociative",
            B2 => "copy counital",
            B3 => "copy cocommutative",
            B4 => "merge associative",
            B5 => "merge unital",
            B6 => "merge commutative",
            B7 => "merge then copy (bimonoid)",
            B8 => "unit copied",
            B9 => "merge deleted",
            B10 => "copy then merge is idempotent",
            B11 => "unit deleted (bone)",
            B12 => "trivial feedback loop",
            C1 => "action of a product",
            C2 => "action of 1",
            C3 => "action of 0",
            C4 => "action of a sum",
            C5 => "action of a star",
            D1 => "action commutes with copy",
            D2 => "action commutes with delete",
            D3 => "action commutes with merge",
            D4 => "action commutes with unit",
            E1 => "red copy coassociative",
            E2L => "red copy left counital",
            E2R => "red copy right counital",
            E3 => "red copy cocommutative",
            E4 => "star copied",
            E5 => "star deleted",
            E6 => "atom copied",
            E7 => "atom deleted",
            E8 => "product copied",
            E9 => "product deleted",
            E10 => "1 copied",
            E11 => "1 deleted",
            E13 => "sum deleted",
            E14a => "sum copied",
            E14b => "0 deleted",
            E15 => "0 copied",
            Cpy => "merge wires with equal behaviour (copy form)",
            Del => "remove wires that reach no output",
            CoCpy => "merge wires with equal behaviour (merge form)",
            CoDel => "remove wires no input reaches",
            Repr => "read the diagram as a representation",
            Reorder => "renumber loop wires canonically",
        }
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL.iter()
            .copied()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownAxiom(s.to_string()))
    }
}

/// Both sides of an axiom with its red inputs left open. `vars` names the
/// red boundary inputs in order; E6/E7 instead take the letter `a`.
#[derive(Clone, Debug)]
pub struct Schema {
    pub lhs: DiagramTerm,
    pub rhs: DiagramTerm,
    pub vars: Vec<&'static str>,
}

fn g(l: G) -> DiagramTerm {
    DiagramTerm::gen(l)
}

fn r() -> DiagramTerm {
    DiagramTerm::id(&[ObjectType::Right])
}

fn lw() -> DiagramTerm {
    DiagramTerm::id(&[ObjectType::Left])
}

fn red() -> DiagramTerm {
    DiagramTerm::id(&[ObjectType::Red])
}

fn sym(a: ObjectType, b: ObjectType) -> DiagramTerm {
    DiagramTerm::Sym(a, b)
}

fn seq(ts: Vec<DiagramTerm>) -> DiagramTerm {
    DiagramTerm::seq_all(ts)
}

fn par(ts: Vec<DiagramTerm>) -> DiagramTerm {
    DiagramTerm::par_all(ts)
}

/// `op ; copy = (copy ⊗ copy) ; (id ⊗ σ ⊗ id) ; (op ⊗ op)` for a binary
/// red constructor.
fn binary_copied(op: G) -> (DiagramTerm, DiagramTerm) {
    use ObjectType::Red as Rd;
    let lhs = g(op).seq(g(G::RedCopy));
    let rhs = seq(vec![
        par(vec![g(G::RedCopy), g(G::RedCopy)]),
        par(vec![red(), sym(Rd, Rd), red()]),
        par(vec![g(op), g(op)]),
    ]);
    (lhs, rhs)
}

pub fn axiom_schema(id: AxiomId, subst: &BTreeMap<String, RegExp>) -> Result<Schema> {
    use ObjectType::{Red as Rd, Right as Rt};
    let none: Vec<&'static str> = Vec::new();
    let x = vec!["x"];
    let xy = vec!["x", "y"];
    let (lhs, rhs, vars) = match id {
        A1 => (g(G::Cup).par(r()).seq(r().par(g(G::Cap))), r(), none),
        A2 => (lw().par(g(G::Cup)).seq(g(G::Cap).par(lw())), lw(), none),
        A3 => (
            seq(vec![g(G::Cup), sym(Rt, ObjectType::Left), g(G::Cap)]),
            DiagramTerm::empty(),
            none,
        ),
        B1 => (
            g(G::BlackCopy).seq(g(G::BlackCopy).par(r())),
            g(G::BlackCopy).seq(r().par(g(G::BlackCopy))),
            none,
        ),
        B2 => (g(G::BlackCopy).seq(g(G::BlackDelete).par(r())), r(), none),
        B3 => (g(G::BlackCopy).seq(sym(Rt, Rt)), g(G::BlackCopy), none),
        B4 => (
            g(G::BlackMerge).par(r()).seq(g(G::BlackMerge)),
            r().par(g(G::BlackMerge)).seq(g(G::BlackMerge)),
            none,
        ),
        B5 => (g(G::BlackUnit).par(r()).seq(g(G::BlackMerge)), r(), none),
        B6 => (sym(Rt, Rt).seq(g(G::BlackMerge)), g(G::BlackMerge), none),
        B7 => (
            g(G::BlackMerge).seq(g(G::BlackCopy)),
            seq(vec![
                par(vec![g(G::BlackCopy), g(G::BlackCopy)]),
                par(vec![r(), sym(Rt, Rt), r()]),
                par(vec![g(G::BlackMerge), g(G::BlackMerge)]),
            ]),
            none,
        ),
        B8 => (
            g(G::BlackUnit).seq(g(G::BlackCopy)),
            g(G::BlackUnit).par(g(G::BlackUnit)),
            none,
        ),
        B9 => (
            g(G::BlackMerge).seq(g(G::BlackDelete)),
            g(G::BlackDelete).par(g(G::BlackDelete)),
            none,
        ),
        B10 => (g(G::BlackCopy).seq(g(G::BlackMerge)), r(), none),
        B11 => (
            g(G::BlackUnit).seq(g(G::BlackDelete)),
            DiagramTerm::empty(),
            none,
        ),
        B12 => (trace(g(G::BlackMerge).seq(g(G::BlackCopy)), 1)?, r(), none),
        C1 => (
            g(G::Prod).par(r()).seq(g(G::Action)),
            seq(vec![
                sym(Rd, Rd).par(r()),
                red().par(g(G::Action)),
                g(G::Action),
            ]),
            xy,
        ),
        C2 => (g(G::One).par(r()).seq(g(G::Action)), r(), none),
        C3 => (
            g(G::Zero).par(r()).seq(g(G::Action)),
            g(G::BlackDelete).seq(g(G::BlackUnit)),
            none,
        ),
        C4 => (
            g(G::Sum).par(r()).seq(g(G::Action)),
            seq(vec![
                par(vec![red(), red(), g(G::BlackCopy)]),
                par(vec![red(), sym(Rd, Rt), r()]),
                par(vec![g(G::Action), g(G::Action)]),
                g(G::BlackMerge),
            ]),
            xy,
        ),
        C5 => {
            let body = seq(vec![
                red().par(g(G::BlackMerge)),
                red().par(g(G::BlackCopy)),
                sym(Rd, Rt).par(r()),
                r().par(g(G::Action)),
            ]);
            (g(G::Star).par(r()).seq(g(G::Action)), trace(body, 1)?, x)
        }
        D1 => (
            g(G::Action).seq(g(G::BlackCopy)),
            seq(vec![
                g(G::RedCopy).par(g(G::BlackCopy)),
                par(vec![red(), sym(Rd, Rt), r()]),
                par(vec![g(G::Action), g(G::Action)]),
            ]),
            x,
        ),
        D2 => (
            g(G::Action).seq(g(G::BlackDelete)),
            g(G::RedDelete).par(g(G::BlackDelete)),
            x,
        ),
        D3 => (
            red().par(g(G::BlackMerge)).seq(g(G::Action)),
            seq(vec![
                par(vec![g(G::RedCopy), r(), r()]),
                par(vec![red(), sym(Rd, Rt), r()]),
                par(vec![g(G::Action), g(G::Action)]),
                g(G::BlackMerge),
            ]),
            x,
        ),
        D4 => (
            red().par(g(G::BlackUnit)).seq(g(G::Action)),
            g(G::RedDelete).par(g(G::BlackUnit)),
            x,
        ),
        E1 => (
            g(G::RedCopy).seq(g(G::RedCopy).par(red())),
            g(G::RedCopy).seq(red().par(g(G::RedCopy))),
            x,
        ),
        E2L => (g(G::RedCopy).seq(g(G::RedDelete).par(red())), red(), x),
        E2R => (g(G::RedCopy).seq(red().par(g(G::RedDelete))), red(), x),
        E3 => (g(G::RedCopy).seq(sym(Rd, Rd)), g(G::RedCopy), x),
        E4 => (
            g(G::Star).seq(g(G::RedCopy)),
            g(G::RedCopy).seq(g(G::Star).par(g(G::Star))),
            x,
        ),
        E5 => (g(G::Star).seq(g(G::RedDelete)), g(G::RedDelete), x),
        E6 | E7 => {
            let c = match subst.get("a") {
                Some(RegExp::Atom(c)) => *c,
                Some(e) => {
                    return Err(Error::Substitution(format!(
                        "{id} needs a letter for a, got {e}"
                    )))
                }
                None => return Err(Error::Substitution(format!("{id} needs a letter a"))),
            };
            let atom = g(G::Atom(c));
            if id == E6 {
                (
                    atom.clone().seq(g(G::RedCopy)),
                    atom.clone().par(atom),
                    vec!["a"],
                )
            } else {
                (atom.seq(g(G::RedDelete)), DiagramTerm::empty(), vec!["a"])
            }
        }
        E8 => {
            let (l, r) = binary_copied(G::Prod);
            (l, r, xy)
        }
        E9 => (
            g(G::Prod).seq(g(G::RedDelete)),
            g(G::RedDelete).par(g(G::RedDelete)),
            xy,
        ),
        E10 => (g(G::One).seq(g(G::RedCopy)), g(G::One).par(g(G::One)), none),
        E11 => (g(G::One).seq(g(G::RedDelete)), DiagramTerm::empty(), none),
        E13 => (
            g(G::Sum).seq(g(G::RedDelete)),
            g(G::RedDelete).par(g(G::RedDelete)),
            xy,
        ),
        E14a => {
            let (l, r) = binary_copied(G::Sum);
            (l, r, xy)
        }
        E14b => (g(G::Zero).seq(g(G::RedDelete)), DiagramTerm::empty(), none),
        E15 => (
            g(G::Zero).seq(g(G::RedCopy)),
            g(G::Zero).par(g(G::Zero)),
            none,
        ),
        Cpy | Del | CoCpy | CoDel | Repr | Reorder => {
            return Err(Error::NoSchema(id.name().to_string()))
        }
    };
    check_vars(id, &vars, subst)?;
    Ok(Schema { lhs, rhs, vars })
}

fn check_vars(id: AxiomId, vars: &[&str], subst: &BTreeMap<String, RegExp>) -> Result<()> {
    let want: Vec<&str> = vars.to_vec();
    let got: Vec<&str> = subst.keys().map(String::as_str).collect();
    let mut sorted = want.clone();
    sorted.sort_unstable();
    if sorted != got {
        return Err(Error::Substitution(format!(
            "{id} expects variables {want:?}, got {got:?}"
        )));
    }
    Ok(())
}

/// Both sides closed by feeding each red input variable with its state.
pub fn axiom_sides(
    id: AxiomId,
    subst: &BTreeMap<String, RegExp>,
) -> Result<(DiagramTerm, DiagramTerm)> {
    let s = axiom_schema(id, subst)?;
    let (dom, _) = s.lhs.typecheck()?;
    let reds = dom.count(ObjectType::Red);
    if reds == 0 {
        return Ok((s.lhs, s.rhs));
    }
    let mut feed: Vec<DiagramTerm> = s.vars.iter().map(|v| state(&subst[*v])).collect();
    let rest = &dom.0[reds..];
    if !rest.is_empty() {
        feed.push(DiagramTerm::id(rest));
    }
    let feed = par(feed);
    Ok((feed.clone().seq(s.lhs), feed.seq(s.rhs)))
}

/// Turns each red output into an action on a fresh right input, so a
/// diagram with red outputs can be compared by its language semantics.
pub fn close_red_outputs(t: &DiagramTerm) -> Result<PortGraph> {
    let pg = t.to_port_graph()?;
    let mut b = GraphBuilder::new();
    let ins: Vec<Source> = pg.dom.0.iter().map(|&o| b.input(o)).collect();
    let extra: Vec<Source> = pg
        .cod
        .0
        .iter()
        .filter(|&&o| o == ObjectType::Red)
        .map(|_| b.input(ObjectType::Right))
        .collect();
    let outs = b.embed(&pg, &ins);
    let mut extra = extra.into_iter();
    for (s, &o) in outs.into_iter().zip(&pg.cod.0) {
        if o == ObjectType::Red {
            let k = extra.next().expect("one extra input per red output");
            let acted = b.node(G::Action, &[s, k])[0];
            b.output(acted);
        } else {
            b.output(s);
        }
    }
    Ok(b.finish())
}

/// A random substitution for the schema's variables: regexes of depth at
/// most 3, and a letter for `a`.
pub fn random_subst<R: Rng>(
    id: AxiomId,
    rng: &mut R,
    sigma: &Alphabet,
) -> BTreeMap<String, RegExp> {
    axiom_vars(id)
        .into_iter()
        .map(|v| {
            let e = if v == "a" {
                RegExp::Atom(sigma.letters()[rng.gen_range(0..sigma.len())])
            } else {
                random_regex_with(rng, 3, sigma)
            };
            (v.to_string(), e)
        })
        .collect()
}

/// Variable names of a primitive axiom.
pub fn axiom_vars(id: AxiomId) -> Vec<&'static str> {
    match id {
        C1 | C4 | E8 | E9 | E13 | E14a => vec!["x", "y"],
        C5 | D1 | D2 | D3 | D4 | E1 | E2L | E2R | E3 | E4 | E5 => vec!["x"],
        E6 | E7 => vec!["a"],
        _ => Vec::new(),
    }
}

/// Outcome of checking one axiom against sampled substitutions.
#[derive(Clone, Debug)]
pub struct SoundnessReport {
    pub axiom: AxiomId,
    pub samples: usize,
    pub failures: Vec<String>,
}

impl SoundnessReport {
    pub fn sound(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks `id` on `samples` substitutions drawn from `seed`: both closed
/// sides must have equal language semantics, and red-only sides must
/// evaluate to syntactically identical expression tuples.
pub fn check_axiom(
    id: AxiomId,
    samples: usize,
    seed: u64,
    sigma: &Alphabet,
) -> Result<SoundnessReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let runs = if axiom_vars(id).is_empty() {
        1
    } else {
        samples
    };
    for _ in 0..runs {
        let subst = random_subst(id, &mut rng, sigma);
        let (lhs, rhs) = axiom_sides(id, &subst)?;
        let show = || {
            subst
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let (gl, gr) = (close_red_outputs(&lhs)?, close_red_outputs(&rhs)?);
        if !sem_equal_graph(&gl, &gr, sigma)? {
            failures.push(format!("languages differ at {{{}}}", show()));
        }
        if id.is_red_block() && eval_red(&lhs, &[])? != eval_red(&rhs, &[])? {
            failures.push(format!("red evaluation differs at {{{}}}", show()));
        }
    }
    Ok(SoundnessReport {
        axiom: id,
        samples: runs,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::parse("ab").unwrap()
    }

    #[test]
    fn names_round_trip() {
        for &a in AxiomId::all() {
            assert_eq!(a.name().parse::<AxiomId>().unwrap(), a);
        }
        assert!("E12".parse::<AxiomId>().is_err());
    }

    #[test]
    fn schemas_typecheck_with_matching_sides() {
        for id in AxiomId::primitive() {
            let subst: BTreeMap<String, RegExp> = axiom_vars(id)
                .into_iter()
                .map(|v| (v.to_string(), RegExp::Atom('a')))
                .collect();
            let s = axiom_schema(id, &subst).unwrap();
            assert_eq!(
                s.lhs.typecheck().unwrap(),
                s.rhs.typecheck().unwrap(),
                "{id}"
            );
            assert_eq!(s.vars, axiom_vars(id), "{id}");
        }
    }

    #[test]
    fn macro_steps_have_no_schema() {
        assert!(matches!(
            axiom_schema(Cpy, &BTreeMap::new()),
            Err(Error::NoSchema(_))
        ));
    }

    #[test]
    fn substitution_must_cover_the_variables() {
        assert!(matches!(
            axiom_sides(C1, &BTreeMap::new()),
            Err(Error::Substitution(_))
        ));
        let extra = BTreeMap::from([("z".to_string(), RegExp::One)]);
        assert!(axiom_sides(B2, &extra).is_err());
        let word = BTreeMap::from([(
            "a".to_string(),
            RegExp::prod(RegExp::Atom('a'), RegExp::Atom('b')),
        )]);
        assert!(axiom_sides(E6, &word).is_err());
    }

    #[test]
    fn closed_sides() {
        let (l, r) = axiom_sides(B2, &BTreeMap::new()).unwrap();
        assert_eq!(l, g(G::BlackCopy).seq(g(G::BlackDelete).par(r_id())));
        assert_eq!(r, r_id());
        let (l, _) = axiom_sides(A3, &BTreeMap::new()).unwrap();
        assert_eq!(l.typecheck().unwrap().0.len(), 0);
    }

    fn r_id() -> DiagramTerm {
        r()
    }

    #[test]
    fn every_axiom_is_sound_on_a_few_samples() {
        for id in AxiomId::primitive() {
            let rep = check_axiom(id, 3, 11, &ab()).unwrap();
            assert!(rep.sound(), "{id}: {:?}", rep.failures);
        }
    }

    #[test]
    fn a_wrong_law_is_caught() {
        // copy ; merge = id is sound, but action by x twice is not action by x
        let sigma = ab();
        let x = RegExp::Atom('a');
        let once = crate::diagram::scalar(&x);
        let twice = once.clone().seq(once.clone());
        let (g1, g2) = (
            close_red_outputs(&once).unwrap(),
            close_red_outputs(&twice).unwrap(),
        );
        assert!(!sem_equal_graph(&g1, &g2, &sigma).unwrap());
    }
}
