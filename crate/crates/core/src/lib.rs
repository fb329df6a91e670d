//! Exact few-qubit simulation for quantum extreme learning machines, quantum
//! circuit learning and quantum reservoir computing.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration
//! and the command-line driver live in the `qreservoir` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod capacity;
pub mod dynamics;
mod error;
pub mod qcl;
pub mod qelm;
pub mod quantum;
pub mod regression;
pub mod reservoir;
pub mod rng;

pub use error::{Error, Result};
