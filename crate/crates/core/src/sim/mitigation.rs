//! Tensored readout calibration and matrix-free mitigation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::noise::{Confusion, NoiseModel};
use super::sampling::{bitstring, parse_bitstring, sample_histogram, Counts};
use super::state::StateVector;
use crate::circuit::{Circuit, GateKind, Instruction};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Mitigated distribution; entries may be negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiDistribution {
    num_bits: usize,
    values: BTreeMap<String, f64>,
}

impl QuasiDistribution {
    pub fn from_dense(dist: &[f64]) -> Self {
        let num_bits = dist.len().trailing_zeros() as usize;
        let values = dist
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (bitstring(i, num_bits), v))
            .collect();
        Self { num_bits, values }
    }

    pub fn get(&self, bits: &str) -> f64 {
        self.values.get(bits).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.values.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.values.iter()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = alloc::vec![0.0; 1 << self.num_bits];
        for (k, v) in &self.values {
            d[parse_bitstring(k).expect("well-formed key")] = *v;
        }
        d
    }
}

/// Estimates per-qubit confusion from the all-`I` and all-`X` preparation
/// circuits run through the full noisy sampler.
pub fn calibrate_readout(noise: &NoiseModel, num_qubits: usize, shots: u64, seed: u64) -> Result<Vec<Confusion>> {
    if shots < 100 {
        return Err(Error::InvalidArgument("calibration needs at least 100 shots".into()));
    }
    let mut rng = SimRng::new(seed);
    let zero_prep = Circuit::new(num_qubits)?;
    let mut one_prep = Circuit::new(num_qubits)?;
    for q in 0..num_qubits {
        one_prep.append(Instruction::gate(GateKind::X, &[q]))?;
    }
    let prep = StateVector::zero(num_qubits);
    let h0 = sample_histogram(&prep, &zero_prep, shots, shots, Some(noise), &mut rng)?;
    let h1 = sample_histogram(&prep, &one_prep, shots, shots, Some(noise), &mut rng)?;
    let marginal_ones = |hist: &[u64], q: usize| -> u64 {
        hist.iter().enumerate().filter(|(i, _)| i >> q & 1 == 1).map(|(_, &c)| c).sum()
    };
    Ok((0..num_qubits)
        .map(|q| Confusion {
            p10: marginal_ones(&h0, q) as f64 / shots as f64,
            p01: (shots - marginal_ones(&h1, q)) as f64 / shots as f64,
        })
        .collect())
}

/// Applies the inverse of each qubit's confusion matrix in place, one
/// tensor factor at a time.
pub fn mitigate_dense(dist: &mut [f64], calibration: &[Confusion]) -> Result<()> {
    let n = dist.len().trailing_zeros() as usize;
    if calibration.len() < n {
        return Err(Error::Shape(alloc::format!("{} calibrations for {n} bits", calibration.len())));
    }
    for (q, c) in calibration.iter().enumerate().take(n) {
        let det = c.determinant();
        if det.abs() <= 1e-6 {
            return Err(Error::SingularCalibration(q));
        }
        if c.is_ideal() {
            continue;
        }
        // measured = A·true with A = [[1-p10, p01], [p10, 1-p01]]
        let inv = [[(1.0 - c.p01) / det, -c.p01 / det], [-c.p10 / det, (1.0 - c.p10) / det]];
        let bit = 1usize << q;
        for base in (0..dist.len()).step_by(bit << 1) {
            for i in base..base + bit {
                let (m0, m1) = (dist[i], dist[i | bit]);
                dist[i] = inv[0][0] * m0 + inv[0][1] * m1;
                dist[i | bit] = inv[1][0] * m0 + inv[1][1] * m1;
            }
        }
    }
    Ok(())
}

pub fn mitigate(counts: &Counts, calibration: &[Confusion]) -> Result<QuasiDistribution> {
    let mut d = counts.to_distribution();
    mitigate_dense(&mut d, calibration)?;
    Ok(QuasiDistribution::from_dense(&d))
}

/// Exact readout corruption of a distribution: the forward model that
/// `mitigate_dense` inverts.
pub fn corrupt_dense(dist: &mut [f64], calibration: &[Confusion]) {
    let n = dist.len().trailing_zeros() as usize;
    for (q, c) in calibration.iter().enumerate().take(n) {
        let bit = 1usize << q;
        for base in (0..dist.len()).step_by(bit << 1) {
            for i in base..base + bit {
                let (t0, t1) = (dist[i], dist[i | bit]);
                dist[i] = (1.0 - c.p10) * t0 + c.p01 * t1;
                dist[i | bit] = c.p10 * t0 + (1.0 - c.p01) * t1;
            }
        }
    }
}
