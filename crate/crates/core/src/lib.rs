//! String diagrams for finite-state automata.
//!
//! Diagrams over three generating objects (a red object of regular
//! expressions and two black objects carrying languages in either
//! direction) are equated by the finite theory of Kleene action algebra.
//! The crate builds and compares such diagrams, translates between
//! regular expressions, automata and diagrams, and decides equivalence by
//! diagrammatic determinisation and Brzozowski minimisation. Every
//! semantic answer can be cross-checked against the classical automata
//! algorithms in [`oracle`].

pub mod diagram;
pub mod encode;
pub mod error;
pub mod nfa;
pub mod normalform;
pub mod oracle;
pub mod regex;
pub mod rewrite;
pub mod sample;

pub use error::{Error, Result};
