//! Exact reasoning about neural networks, sequence models and transformers.

pub mod error;
pub mod automata;
pub mod compilers;
pub mod exec;
pub mod exists;
pub mod linalg;
pub mod logic;
pub mod lra;
pub mod nn;
pub mod rational;
pub mod seq;
pub mod transformer;

pub use error::{Error, Result};
pub use rational::Rational;
