//! Desk-scale construction of a satisfaction class over a finite model.
//!
//! Pipeline: enumerate one-variable formulas, build the Henkin witness grid
//! and its axioms, collect the axiom set `A_M`, search the binary tree of
//! truth assignments for a deep node, extract the truth set `T`, and verify
//! the Tarski conditions, reflection, and the consistency probes on `(M, T)`.

pub mod checker;
pub mod coding;
pub mod henkin;
pub mod error;
pub mod kernel;
pub mod model;
pub mod omega;
pub mod parse;
pub mod pipeline;
pub mod syntax;
pub mod tree;

pub use coding::{Coder, GodelCode};
pub use error::*;
pub use syntax::{Expr, Signature, Symbol};
