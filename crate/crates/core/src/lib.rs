//! Simulation of random graphs `G_{X,p}` whose edge variables are drawn
//! uniformly (or from a radial log-concave law) on a generalized Orlicz
//! ball intersected with the positive orthant.

// `!(x >= 0.0)` style guards are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod edges;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod graph;
pub mod model;
pub mod orlicz;
pub mod output;
pub mod rng;
pub mod samplers;
pub mod stats;
pub mod validation;

pub use edges::EdgeVector;
pub use error::{Error, Result};
pub use orlicz::{GobSpec, OrliczComponent, RadialDensity};
