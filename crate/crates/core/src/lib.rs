//! Reason about the causes of sensor observations.
//!
//! A knowledge base describes who can be present, what they might do and
//! where, which signals those actions produce, how the signals travel
//! through a building, and which sensors and classifiers pick them up.
//! [`compiler::compile`] turns it into a Boolean Bayesian network, and the
//! [`inference`] module conditions that network on observations.

pub mod error;
pub mod kgmodel;
pub mod propagation;
pub mod compiler;
pub mod observations;
pub mod inference;
pub mod simulator;
pub mod service;
pub mod bundled;
#[cfg(feature = "cli")]
pub mod interface;

pub use error::{Error, Result};
