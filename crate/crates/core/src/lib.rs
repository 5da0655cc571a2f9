//! Exact computations with Koszul-type DG algebras, semifree resolutions,
//! perturbations, and the resulting Tor/Ext tables over graded complete
//! intersections.
#![no_std]

extern crate alloc;

pub mod dgcore;
pub mod error;
pub mod exactlin;
pub mod field;
pub mod graded;
pub mod homalg;
pub mod perturb;
pub mod resolve;

pub use error::{Error, Result};
pub use field::{Field, PrimeField, Rationals, DEFAULT_PRIME};
