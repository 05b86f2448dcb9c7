//! Solvers for Markov decision processes and turn-based stochastic games
//! with two parity objectives, one to be won surely and the other
//! almost-surely (SAS) or limit-surely (SLS), restricted to finite-memory
//! strategies.
//!
//! The stochastic problems are reduced to non-stochastic games: parity
//! games for MDPs and games with a conjunction of two parity conditions in
//! general. The [`oracle`] and [`analysis`] modules provide independent
//! brute-force references and certificate checkers.

pub mod analysis;
pub mod chain;
pub mod conj;
pub mod error;
pub mod format;
pub mod game;
pub mod gen;
pub mod graph;
pub mod oracle;
pub mod parity;
pub mod pullback;
pub mod ranking;
pub mod reduce;
pub mod sas_game;
pub mod sas_mdp;
pub mod sls;

pub use error::{Error, Result};
pub use game::*;
