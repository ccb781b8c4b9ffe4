//! Carleman-linearized lattice Boltzmann in a local encoding, with a
//! classical D2Q9 reference and a statevector emulation of the circuit.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod carleman;
pub mod circuit;
pub mod compare;
pub mod cost;
pub mod encoding;
pub mod error;
pub mod lbm;
pub mod statevector;

pub use error::{Error, Result};
