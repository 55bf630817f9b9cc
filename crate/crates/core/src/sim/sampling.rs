use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::noise::NoiseModel;
use super::state::{evolve_from, StateVector};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Bitstring, highest qubit first.
pub fn bitstring(index: usize, num_bits: usize) -> String {
    (0..num_bits).rev().map(|q| if index >> q & 1 == 1 { '1' } else { '0' }).collect()
}

pub fn parse_bitstring(s: &str) -> Result<usize> {
    let mut idx = 0usize;
    for ch in s.chars() {
        idx <<= 1;
        match ch {
            '0' => {}
            '1' => idx |= 1,
            _ => return Err(Error::InvalidArgument(alloc::format!("bad bitstring `{s}`"))),
        }
    }
    Ok(idx)
}

/// Measurement histogram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    num_bits: usize,
    shots: u64,
    counts: BTreeMap<String, u64>,
}

impl Counts {
    pub fn from_histogram(hist: &[u64]) -> Self {
        let num_bits = hist.len().trailing_zeros() as usize;
        let counts = hist
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (bitstring(i, num_bits), c))
            .collect();
        Self { num_bits, shots: hist.iter().sum(), counts }
    }

    pub fn from_map(num_bits: usize, counts: BTreeMap<String, u64>) -> Result<Self> {
        for k in counts.keys() {
            if k.len() != num_bits {
                return Err(Error::Shape(alloc::format!("bitstring `{k}` is not {num_bits} bits")));
            }
            parse_bitstring(k)?;
        }
        let shots = counts.values().sum();
        Ok(Self { num_bits, shots, counts })
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &u64)> {
        self.counts.iter()
    }

    /// Empirical distribution indexed by basis state.
    pub fn to_distribution(&self) -> Vec<f64> {
        let mut d = vec![0.0; 1 << self.num_bits];
        for (k, &c) in &self.counts {
            d[parse_bitstring(k).expect("validated key")] = c as f64 / self.shots as f64;
        }
        d
    }
}

/// Draws `shots` basis indices from `probs` into `hist`, applying readout
/// confusion per qubit when `noise` is given.
pub(crate) fn draw(probs: &[f64], shots: u64, noise: Option<&NoiseModel>, rng: &mut SimRng, hist: &mut [u64]) {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in probs {
        acc += p;
        cdf.push(acc);
    }
    let n = probs.len().trailing_zeros() as usize;
    let readout = noise.filter(|m| m.has_readout_error(n));
    for _ in 0..shots {
        let u = rng.uniform() * acc;
        let mut idx = cdf.partition_point(|&c| c <= u).min(probs.len() - 1);
        if let Some(m) = readout {
            for q in 0..n {
                let bit = idx >> q & 1 == 1;
                if m.confusion(q).read(bit, rng) != bit {
                    idx ^= 1 << q;
                }
            }
        }
        hist[idx] += 1;
    }
}

/// Noisy or ideal shot histogram. Shots are spread evenly over `trajectories`
/// independent Pauli trajectories (at most one per shot).
pub fn sample_histogram(
    prep: &StateVector,
    circuit: &Circuit,
    shots: u64,
    trajectories: u64,
    noise: Option<&NoiseModel>,
    rng: &mut SimRng,
) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let mut hist = vec![0u64; 1 << circuit.num_qubits()];
    let gate_noise = noise.filter(|m| m.p1 > 0.0 || m.p2 > 0.0 || m.p_idle > 0.0);
    match gate_noise {
        None => {
            let state = evolve_from(prep.clone(), circuit)?;
            draw(&state.probabilities(), shots, noise, rng, &mut hist);
        }
        Some(m) => {
            m.validate()?;
            if let Some(s) = circuit.free_symbols().iter().next() {
                return Err(Error::UnboundSymbol(s.clone()));
            }
            let t = trajectories.clamp(1, shots);
            for k in 0..t {
                let batch = shots / t + u64::from(k < shots % t);
                let state = m.run_trajectory(prep.clone(), circuit, rng)?;
                draw(&state.probabilities(), batch, noise, rng, &mut hist);
            }
        }
    }
    Ok(hist)
}

/// Samples `shots` measurements of all qubits, one noise trajectory per shot.
pub fn sample(circuit: &Circuit, shots: u64, noise: Option<&NoiseModel>, seed: u64) -> Result<Counts> {
    let mut rng = SimRng::new(seed);
    let prep = StateVector::zero(circuit.num_qubits());
    Ok(Counts::from_histogram(&sample_histogram(&prep, circuit, shots, shots, noise, &mut rng)?))
}

/// Total variation distance between two distributions on the same support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
