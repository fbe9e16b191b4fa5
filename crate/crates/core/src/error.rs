use thiserror::Error;

use crate::diagram::Interface;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("letter '{0}' is not in the alphabet")]
    UnknownLetter(char),

    #[error("alphabet mismatch: {0:?} vs {1:?}")]
    AlphabetMismatch(String, String),

    #[error("type mismatch at {path}: codomain {left} does not match domain {right}")]
    TypeMismatch {
        path: String,
        left: Interface,
        right: Interface,
    },

    #[error("malformed port graph: {0}")]
    MalformedGraph(String),

    #[error("diagram is not left-to-right: {0} -> {1}")]
    NotLeftToRight(Interface, Interface),

    #[error("red object on the boundary: {0} -> {1}")]
    RedBoundary(Interface, Interface),

    #[error("interface mismatch: {0} vs {1}")]
    InterfaceMismatch(String, String),

    #[error("generator {0} is not allowed here")]
    ForeignGenerator(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("automaton has {0} initial states; exactly one is required")]
    MultipleInitial(usize),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("representation is not deterministic")]
    NotDeterministic,

    #[error("malformed substitution: {0}")]
    Substitution(String),

    #[error("{0} is a derived macro-step and has no primitive schema")]
    NoSchema(String),

    #[error("redex mismatch: {0}")]
    Redex(String),

    #[error("step {index}: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("digest mismatch ({which}): expected {expected}, found {found}")]
    DigestMismatch {
        which: &'static str,
        expected: String,
        found: String,
    },

    #[error("unknown axiom id {0:?}")]
    UnknownAxiom(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
