//! Read amplification, throughput modeling and discrete-event simulation for
//! graph traversal over external memory.
//!
//! A typical pipeline: build a [`graph::CsrGraph`], run [`traversal::bfs`] to
//! get an [`traversal::AccessTrace`], replay it with [`access::raf_sweep`] to
//! get fetched bytes per alignment, and feed those into
//! [`model::predict_runtime_curve`]. [`sim`] checks the throughput model
//! against a closed-loop event simulation.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod access;
pub mod cli;
pub mod error;
pub mod graph;
pub mod model;
pub mod sim;
pub mod traversal;
pub mod units;

pub use error::{Error, Result};
