//! Synthesis of recursive heap predicates from concrete memory graphs.
//!
//! The pipeline: parse memory-graph tasks ([`graph`]), enumerate candidate
//! predicate definitions under domain-specific pruning ([`enumerate`]), test
//! them by resolution with a linearity check ([`evaluate`]), and drive the
//! positive-only learning loop ([`learn`]). A random graph generator
//! ([`generate`]) produces example corpora from structural oracles.

pub mod enumerate;
pub mod evaluate;
pub mod generate;
pub mod graph;
pub mod hypothesis;
pub(crate) mod lexer;
pub mod learn;
pub mod theory;
