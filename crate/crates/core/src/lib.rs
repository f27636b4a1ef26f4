//! Counterdiabatic Born-Oppenheimer dynamics (CBOD) for driven coupled
//! oscillators and hydrogenic fast subsystems.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cd;
pub mod coulomb;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod gaussian;
pub mod grid;
pub mod jet;
pub mod oracle;
pub mod oscillators;
pub mod params;
pub mod quadrature;

pub use error::{Error, Result};
