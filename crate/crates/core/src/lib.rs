//! Relational planning and reinforcement learning with state abstractions
//! derived from first-order influence statements.
//!
//! The pipeline: a planner splits the goal into sub-tasks, each sub-task
//! gets an abstraction computed by backward influence closure over the
//! D-FOCI statements, and tabular option agents learn on the abstract
//! states. The verifier checks the abstractions exhaustively on small
//! instances.

pub mod abstraction;
pub mod dfoci;
pub mod env;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod logic;
pub mod planner;
pub mod rl;
pub mod symbol;
pub mod verifier;

mod lexer;

pub use error::{Error, Result};
pub use symbol::Sym;
