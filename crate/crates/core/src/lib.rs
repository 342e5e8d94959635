//! Distributed QAOA for dense QUBOs, with the reference oracles, the
//! factorization-machine surrogate and the thin-film optics used by the
//! active-learning design loop.

pub mod al;
pub mod bench;
pub mod engine;
pub mod error;
pub mod fm;
pub mod optics;
pub mod optim;
pub mod oracle;
pub mod par;
pub mod qaoa;
pub mod qubo;
pub mod rng;

pub use error::{Error, Result};
pub use qubo::{BinaryVector, QuboMatrix, SubProblem};
