#![cfg_attr(not(test), no_std)]
extern crate alloc;

pub mod decomp;
pub mod error;
pub mod experiments;
mod math;
pub mod measures;
mod optim;
pub mod ree;
pub mod qmat;
pub mod report;
pub mod states;
pub mod tol;

pub use error::{Error, Invariant, Result};
pub use math::{binary_entropy, shannon_entropy};
pub use tol::Tolerances;
