//! Simulation and verification toolkit for repulsive Gibbs particle processes.
//!
//! Particles are balls or planar segments; models combine an activity, a
//! particle law and a finite-range pair potential. The crate provides exact
//! finite-window samplers, a dominated disagreement coupling, Boolean-model
//! percolation tools and estimators for correlation functions and U-statistics.

pub mod grid;
pub mod harness;
pub mod inference;
pub mod model;
pub mod particles;
pub mod percolation;
pub mod rng;
pub mod sampler;
pub mod stats;
