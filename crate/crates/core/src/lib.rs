//! Conversion of syntactic annotations between Penn-Treebank brackets,
//! predicate-style dependency facts and a canonical XML pivot, plus
//! cross-scheme evaluation over the pivot.

pub mod aml;
pub mod dep;
pub mod eval;
pub mod par;
pub mod pivot;
pub mod ptb;
pub mod registry;
pub mod transduce;
