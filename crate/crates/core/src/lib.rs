//! Epistemic state graphs, expansion/consolidation operators, and order-gap
//! termination for recursive reasoning loops.
//!
//! * [`graph`]: the typed claim/answer/question graph
//! * [`embedding`]: its fixed-dimension vector form
//! * [`operators`]: expansion and consolidation maps, evidence sources
//! * [`termination`]: order-gap, windowed stopping rule, loop driver
//! * [`spectral`]: linearised commutators, the commutator Gramian and its
//!   non-degeneracy tests
//! * [`harness`]: scenario files, runs and reports

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod graph;
pub mod harness;
pub mod operators;
pub mod spectral;
pub mod termination;
