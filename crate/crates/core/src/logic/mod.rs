//! Core syntax and semantics: signatures, formulas, finite structures, the
//! concrete grammar, and the brute-force semantic oracle.

mod formula;
mod naive;
mod parser;
mod printer;
mod signature;
mod structure;

pub use formula::{Formula, Quantifier, Variable};
pub use naive::naive_eval;
pub use parser::parse_formula;
pub use printer::print_formula;
pub use signature::Signature;
pub use structure::{Assignment, Structure};

/// Default sort used by one-sorted formulas and structures.
pub const DEFAULT_SORT: &str = "U";
