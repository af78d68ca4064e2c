//! Jet calculus on evolution PDE systems: total derivatives and restriction
//! to the prolonged equation, iterated differential forms, C-differential
//! operators with their adjoints and tensor extensions, a bounded-order
//! exact kernel solver, and reports on the first term of the
//! `Λ_{k-1}C`-spectral sequence.

pub mod cdiff;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod idf;
pub mod jet;
pub mod linalg;
pub mod sampling;
pub mod selftest;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
