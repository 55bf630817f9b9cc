//! Dense statevector simulation with shot sampling, Pauli-trajectory noise,
//! readout error and readout mitigation.

mod executor;
mod mitigation;
mod noise;
mod sampling;
mod state;

pub use executor::{Executor, Mode, CALIBRATION_SHOTS};
pub use mitigation::{calibrate_readout, corrupt_dense, mitigate, mitigate_dense, QuasiDistribution};
pub use noise::{Confusion, NoiseModel};
pub use sampling::{bitstring, parse_bitstring, sample, sample_histogram, total_variation, Counts};
pub use state::{evolve, evolve_capped, evolve_from, StateVector, ZObservable, DEFAULT_MAX_QUBITS};
