//! Analysis toolkit for relational first-order sentences on finite structures.
//!
//! The crate is organized around a pipeline: parse a formula ([`logic`]),
//! normalize it into a positive combination of layered formulas
//! ([`normalize`]), measure its thickness and rewrite it to use few variables
//! ([`thickness`]), and evaluate it on a finite structure either by the
//! brute-force semantic oracle ([`logic::naive_eval`]) or by the bounded
//! variable relational engine ([`engine`]). The [`gadgets`] module builds the
//! structure transformations used by the hardness constructions, and
//! [`hypergraph`] supplies exact treewidth and elimination orderings for the
//! small hypergraphs arising from formulas.

pub mod engine;
mod error;
pub mod fixtures;
pub mod gadgets;
pub mod gen;
pub mod hypergraph;
pub mod logic;
pub mod normalize;
pub mod thickness;

pub use error::{Error, Result};
