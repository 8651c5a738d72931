//! Command-line and HTTP front ends over [`crate::service`].

pub mod cli;
pub mod http;
