//! Exact computations on monoidal Shannon extensions given by
//! eventually-periodic programs of monomial local monoidal transforms.
//!
//! Monomials are exponent vectors; each stage ring is described by a
//! unimodular frame whose columns are its regular parameters. Questions about
//! the union ring become questions about how coordinate vectors move under
//! the transform dynamics, answered with [`verdict::Verdict`]s that carry a
//! witness, a certificate or the cutoff that was hit.

pub mod chains;
pub mod classify;
pub mod fixtures;
pub mod lattice;
pub mod program;
pub mod program_file;
pub mod recurrence;
pub mod report;
pub mod syntax;
pub mod union;
pub mod verdict;

mod serde_big;

pub use lattice::{ExponentVector, Frame};
pub use program::{TransformProgram, TransformStep};
pub use verdict::{Limits, Verdict};
