//! Meaning-based solver for single-operation math word problems.

pub mod corpus;
pub mod inference;
pub mod learn;
pub mod lexicon;
pub mod linear;
pub mod logicform;
pub mod metrics;
pub mod number;
pub mod operands;
pub mod pipeline;
pub mod quantity;
pub mod sti;
