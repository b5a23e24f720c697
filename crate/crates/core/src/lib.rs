//! Detectability analysis for labeled weighted automata over (Q^k,+).
//!
//! An automaton is validated and normalized, scaled to integer weights, and then analysed
//! through its self-composition and its state estimators.

pub mod corpus;
pub mod epl;
pub mod epset;
pub mod estimator;
pub mod format;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod prepared;
pub mod report;
pub mod selfcomp;
pub mod verdict;
pub mod verify;

pub use epset::EpSet;
pub use model::{validate, WeightVector, WeightedAutomaton};
pub use prepared::{Engine, Prepared, StateSet};
pub use verdict::{Property, Status, Verdict, Witness};
