//! Social network games in which every node must adopt exactly one product
//! from its own product set.

pub mod cli;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod game;
pub mod io;
pub mod network;
pub mod paradox;
pub mod rational;
pub mod reductions;
pub mod samples;

pub use error::AnalysisError;
pub use network::{JointStrategy, NodeId, ProductId, SocialNetwork};
pub use rational::Rational;
