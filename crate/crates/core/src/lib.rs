//! Small cancellation statistics for random group presentations.
//!
//! The crate samples random presentations in the few-relator and density
//! models, computes their exact piece structure and subword coverage,
//! evaluates conformal-dimension bound formulas with explicit precondition
//! checks, verifies van Kampen diagram combinatorics, and runs deterministic
//! Monte Carlo sweeps over all of it.
//!
//! Modules follow the pipeline:
//! words -> counting -> sampler -> cancellation / coverage -> bounds,
//! with [`geometry`] for diagrams and Cayley-ball experiments and
//! [`experiment`] for the sweep runner.  Everything is a pure value-level
//! API; nothing holds global state, and all randomness is derived from
//! explicit seeds (see [`rng`]).

pub mod bounds;
pub mod cancellation;
pub mod counting;
pub mod coverage;
pub mod experiment;
pub mod expr;
pub mod geometry;
pub mod presfile;
pub mod ratio_json;
pub mod rng;
pub mod sampler;
mod suffix;
pub mod words;

pub use sampler::Presentation;
pub use words::{Letter, Word};
