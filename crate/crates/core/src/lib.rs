//! Quantum machine-learning core for network intrusion detection.
//!
//! Everything here is `no_std` + `alloc`: the circuit IR, a dense
//! statevector simulator with parametric NISQ noise, the transpiler, feature
//! maps and ansatz factories, classical optimizers, the three quantum
//! classifiers (VQC, quantum-kernel SVM, QCNN) and the classical baselines.
//! File formats, data ingestion and the command line live in the `qmlids`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod circuit;
pub mod circuitlib;
mod error;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod optimizers;
pub mod rng;
pub mod sim;
pub mod testutil;
pub mod transpiler;

pub use error::{Error, Result};
