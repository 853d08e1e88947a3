//! Exact event-by-event simulation of nonlinear Hawkes processes, the Markov
//! chain on inter-arrival sequences, backward coupling for affine models, the
//! exponential-memory scalar chain, and the statistical checks used to
//! validate them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expmem;
pub mod history;
pub mod linear;
pub mod model;
pub mod quad;
pub mod replicas;
pub mod rng;
pub mod roots;
pub mod simulator;
pub mod stats;
pub mod validation;

pub use error::{HawkesError, Result};
