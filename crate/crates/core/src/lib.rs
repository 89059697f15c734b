//! Exact simulation of online coalition formation in fractional hedonic games.

pub mod adversaries;
pub mod algorithms;
pub mod config;
pub mod engine;
pub mod error;
pub mod game;
pub mod io;
pub mod oracles;
pub mod rational;
pub mod sqrt2;
pub mod suites;

pub use error::{FhgError, Result};
pub use game::{AgentId, Coalition, Matching, Partition, SymmetricFhg};
pub use rational::Rational;
