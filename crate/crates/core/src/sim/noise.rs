#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use alloc::collections::BTreeMap;
use alloc::vec;


use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::circuit::schedule::{asap, Durations};
use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Readout confusion for one qubit: `p10 = p(read 1 | prepared 0)`,
/// `p01 = p(read 0 | prepared 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub p10: f64,
    pub p01: f64,
}

impl Confusion {
    pub const IDEAL: Confusion = Confusion { p10: 0.0, p01: 0.0 };

    pub fn symmetric(p: f64) -> Self {
        Self { p10: p, p01: p }
    }

    /// From a row-stochastic matrix `[[p(0|0), p(1|0)], [p(0|1), p(1|1)]]`.
    pub fn from_matrix(m: [[f64; 2]; 2]) -> Result<Self> {
        for row in m {
            for p in row {
                check_probability(p)?;
            }
            if (row[0] + row[1] - 1.0).abs() > 1e-12 {
                return Err(Error::ConfusionRow);
            }
        }
        Ok(Self { p10: m[0][1], p01: m[1][0] })
    }

    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.p10, self.p10], [self.p01, 1.0 - self.p01]]
    }

    pub fn is_ideal(&self) -> bool {
        self.p10 == 0.0 && self.p01 == 0.0
    }

    /// `p(0|0) + p(1|1) - 1`.
    pub fn determinant(&self) -> f64 {
        1.0 - self.p10 - self.p01
    }

    /// Reads out `bit`, flipping it with the matching error probability.
    pub fn read(&self, bit: bool, rng: &mut SimRng) -> bool {
        if bit {
            !rng.bernoulli(self.p01)
        } else {
            rng.bernoulli(self.p10)
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

fn default_dd_factor() -> f64 {
    0.5
}

/// Parametric NISQ noise: depolarizing gate errors, readout confusion and
/// idle dephasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability after each one-qubit gate.
    pub p1: f64,
    /// Depolarizing probability after each two-qubit gate.
    pub p2: f64,
    /// Readout confusion applied to every qubit without an override.
    pub readout: Confusion,
    #[serde(default)]
    pub readout_overrides: BTreeMap<usize, Confusion>,
    /// Z-flip probability per idle time unit.
    #[serde(default)]
    pub p_idle: f64,
    /// Idle rate multiplier inside decoupled delays.
    #[serde(default = "default_dd_factor")]
    pub dd_factor: f64,
    #[serde(default)]
    pub durations: Durations,
    #[serde(default)]
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            readout: Confusion::IDEAL,
            readout_overrides: BTreeMap::new(),
            p_idle: 0.0,
            dd_factor: default_dd_factor(),
            durations: Durations::default(),
            seed: 0,
        }
    }

    pub fn depolarizing(p1: f64, p2: f64) -> Self {
        Self { p1, p2, ..Self::ideal() }
    }

    pub fn with_readout(mut self, c: Confusion) -> Self {
        self.readout = c;
        self
    }

    pub fn with_idle(mut self, p_idle: f64) -> Self {
        self.p_idle = p_idle;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for p in [self.p1, self.p2, self.p_idle, self.dd_factor] {
            check_probability(p)?;
        }
        for c in core::iter::once(&self.readout).chain(self.readout_overrides.values()) {
            check_probability(c.p10)?;
            check_probability(c.p01)?;
        }
        Ok(())
    }

    pub fn confusion(&self, qubit: usize) -> Confusion {
        self.readout_overrides.get(&qubit).copied().unwrap_or(self.readout)
    }

    pub fn has_readout_error(&self, num_qubits: usize) -> bool {
        (0..num_qubits).any(|q| !self.confusion(q).is_ideal())
    }

    /// One stochastic Pauli trajectory of `circuit` applied to `state`.
    pub fn run_trajectory(&self, mut state: StateVector, circuit: &Circuit, rng: &mut SimRng) -> Result<StateVector> {
        let n = circuit.num_qubits();
        let idle = self.p_idle > 0.0;
        let sched = if idle { Some(asap(circuit, &self.durations)) } else { None };
        let mut last_end = vec![0u32; n];
        let mut touched = vec![!state.is_zero_state(); n];
        for (k, inst) in circuit.instructions().iter().enumerate() {
            if let Some(s) = &sched {
                for &q in &inst.qubits {
                    if touched[q] {
                        dephase(&mut state, q, self.p_idle, s.start[k] - last_end[q], rng);
                    }
                    last_end[q] = s.end[k];
                    touched[q] = true;
                }
            }
            if inst.kind == GateKind::Delay {
                if idle {
                    let rate = if inst.decoupled { self.p_idle * self.dd_factor } else { self.p_idle };
                    dephase(&mut state, inst.qubits[0], rate, inst.duration.unwrap_or(0), rng);
                }
                continue;
            }
            state.apply(inst)?;
            let p = if inst.qubits.len() == 2 { self.p2 } else { self.p1 };
            if rng.bernoulli(p) {
                // uniformly random non-identity Pauli on the touched qubits
                let choices = (1usize << (2 * inst.qubits.len())) - 1;
                let mut code = rng.below(choices) + 1;
                for &q in &inst.qubits {
                    state.apply_pauli(q, (code & 3) as u8);
                    code >>= 2;
                }
            }
        }
        if let Some(s) = &sched {
            for q in 0..n {
                if touched[q] {
                    dephase(&mut state, q, self.p_idle, s.makespan - last_end[q], rng);
                }
            }
        }
        Ok(state)
    }
}

/// Applies `Z` with the probability of an odd number of flips over `units`
/// independent units at per-unit probability `p`.
fn dephase(state: &mut StateVector, q: usize, p: f64, units: u32, rng: &mut SimRng) {
    if units == 0 || p <= 0.0 {
        return;
    }
    let odd = 0.5 * (1.0 - (1.0 - 2.0 * p).powi(units as i32));
    if rng.bernoulli(odd) {
        state.apply_z(q);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_validation() {
        assert!(Confusion::from_matrix([[0.9, 0.1], [0.2, 0.8]]).is_ok());
        assert_eq!(Confusion::from_matrix([[0.9, 0.2], [0.2, 0.8]]), Err(Error::ConfusionRow));
        assert!(NoiseModel::depolarizing(1.5, 0.0).validate().is_err());
    }

    #[test]
    fn ideal_trajectory_is_exact() {
        let mut rng = SimRng::new(1);
        let c = crate::testutil::random_circuit(&mut rng, 3, 20);
        let exact = super::super::state::evolve(&c).unwrap();
        let traj = NoiseModel::ideal().run_trajectory(StateVector::zero(3), &c, &mut rng).unwrap();
        assert_eq!(exact, traj);
    }
}
