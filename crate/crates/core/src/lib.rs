//! Second-quantized Dirac field on a periodic 1+1-D spectral lattice:
//! vacua, Schwinger terms, time evolution under external potentials,
//! energy extraction and first-order response.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod field;
pub mod fock;
pub mod lattice;
pub mod operators;
pub mod response;
pub mod schwinger;
pub mod vacua;

pub use error::{Error, Result};
pub use field::Field;
pub use lattice::{EnergySign, LatticeConfig, Mode, ModeBasis};
pub use vacua::{OccupationSet, VacuumSpec};
