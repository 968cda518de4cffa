//! Simulation of path-encoded GHZ state generation: a four-ring SFWM pair
//! source, a linear detector fan-out, and fourfold post-selection, checked
//! against an independent sum-over-histories oracle.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod circuit;
pub mod cli;
pub mod fock;
pub mod oracle;
pub mod pipeline;
pub mod source;
pub mod spectral;
