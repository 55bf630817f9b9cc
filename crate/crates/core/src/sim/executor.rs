use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use serde::{Deserialize, Serialize};

use super::mitigation::{calibrate_readout, mitigate_dense};
use super::noise::{Confusion, NoiseModel};
use super::sampling::sample_histogram;
use super::state::{evolve_from, StateVector, ZObservable};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::rng::{mix, SimRng};
use crate::transpiler::{transpile, TranspileConfig};

/// How circuits are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Ideal statevector probabilities; noise and transpilation are ignored.
    Exact,
    /// Finite shots spread over `trajectories` noise trajectories
    /// (0 means one trajectory per shot).
    Shots { shots: u64, trajectories: u64 },
}

/// Calibration shots used at resilience level 1.
pub const CALIBRATION_SHOTS: u64 = 8192;

/// Backend stand-in: evaluation mode, optional noise, transpilation and
/// readout mitigation. Every call takes a `stream` id from which its random
/// seed is derived, so results do not depend on call order.
#[derive(Clone, Debug)]
pub struct Executor {
    pub mode: Mode,
    pub noise: Option<NoiseModel>,
    pub transpile: TranspileConfig,
    pub seed: u64,
    calibration: RefCell<BTreeMap<usize, Vec<Confusion>>>,
}

impl Executor {
    pub fn exact() -> Self {
        Self::new(Mode::Exact, None, TranspileConfig::default(), 0)
    }

    pub fn shots(shots: u64, noise: Option<NoiseModel>, seed: u64) -> Self {
        Self::new(Mode::Shots { shots, trajectories: 0 }, noise, TranspileConfig::default(), seed)
    }

    pub fn new(mode: Mode, noise: Option<NoiseModel>, transpile: TranspileConfig, seed: u64) -> Self {
        Self { mode, noise, transpile, seed, calibration: RefCell::new(BTreeMap::new()) }
    }

    pub fn with_trajectories(mut self, trajectories: u64) -> Self {
        if let Mode::Shots { trajectories: t, .. } = &mut self.mode {
            *t = trajectories;
        }
        self
    }

    pub fn is_exact(&self) -> bool {
        self.mode == Mode::Exact
    }

    pub fn validate(&self) -> Result<()> {
        self.transpile.validate()?;
        if let Some(n) = &self.noise {
            n.validate()?;
        }
        if let Mode::Shots { shots: 0, .. } = self.mode {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        Ok(())
    }

    fn calibration(&self, width: usize, noise: &NoiseModel) -> Result<Vec<Confusion>> {
        if let Some(c) = self.calibration.borrow().get(&width) {
            return Ok(c.clone());
        }
        let cal = calibrate_readout(noise, width, CALIBRATION_SHOTS, mix(self.seed ^ noise.seed, u64::MAX - width as u64))?;
        self.calibration.borrow_mut().insert(width, cal.clone());
        Ok(cal)
    }

    /// Outcome distribution over the circuit's own qubits. In shots mode with
    /// resilience level 1 this is a mitigated quasi-distribution.
    pub fn distribution(&self, prep: &StateVector, circuit: &Circuit, stream: u64) -> Result<Vec<f64>> {
        let (shots, trajectories) = match self.mode {
            Mode::Exact => return Ok(evolve_from(prep.clone(), circuit)?.probabilities()),
            Mode::Shots { shots, trajectories } => (shots, if trajectories == 0 { shots } else { trajectories }),
        };
        let n = circuit.num_qubits();
        // layouts only apply to circuits starting from |0…0⟩
        let cfg = if prep.is_zero_state() {
            self.transpile.clone()
        } else {
            TranspileConfig { coupling: None, qubit_error_rates: None, ..self.transpile.clone() }
        };
        let t = transpile(circuit, &cfg)?;
        let device = t.circuit.num_qubits();
        let device_prep = if device == n { prep.clone() } else { StateVector::zero(device) };
        let mut rng = SimRng::new(mix(self.seed ^ self.noise.as_ref().map_or(0, |m| m.seed), stream));
        let hist = sample_histogram(&device_prep, &t.circuit, shots, trajectories, self.noise.as_ref(), &mut rng)?;
        let mut dist: Vec<f64> = hist.iter().map(|&c| c as f64 / shots as f64).collect();
        if self.transpile.resilience_level == 1 {
            if let Some(noise) = self.noise.as_ref().filter(|m| m.has_readout_error(device)) {
                mitigate_dense(&mut dist, &self.calibration(device, noise)?)?;
            }
        }
        if t.layout.is_trivial() {
            return Ok(dist);
        }
        let mut logical = vec![0.0; 1 << n];
        for (i, p) in dist.into_iter().enumerate() {
            logical[t.layout.logical_index(i)] += p;
        }
        Ok(logical)
    }

    /// `⟨obs⟩`, clamped to `[-1, 1]`.
    pub fn expectation(&self, prep: &StateVector, circuit: &Circuit, obs: &ZObservable, stream: u64) -> Result<f64> {
        if obs.num_qubits() != circuit.num_qubits() {
            return Err(Error::ObservableLength { expected: circuit.num_qubits(), got: obs.num_qubits() });
        }
        Ok(obs.expectation_from(&self.distribution(prep, circuit, stream)?).clamp(-1.0, 1.0))
    }

    /// Probability of the all-zeros outcome, clamped to `[0, 1]`.
    pub fn zero_probability(&self, prep: &StateVector, circuit: &Circuit, stream: u64) -> Result<f64> {
        if self.is_exact() {
            let s = evolve_from(prep.clone(), circuit)?;
            return Ok(s.amplitudes()[0].norm_sqr());
        }
        Ok(self.distribution(prep, circuit, stream)?[0].clamp(0.0, 1.0))
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::exact()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{GateKind, Instruction};
    use crate::sim::sampling::total_variation;

    fn bell() -> Circuit {
        let mut c = Circuit::new(2).unwrap();
        c.append(Instruction::gate(GateKind::H, &[0])).unwrap();
        c.append(Instruction::gate(GateKind::CX, &[0, 1])).unwrap();
        c
    }

    #[test]
    fn mitigation_reduces_readout_bias() {
        let noise = NoiseModel::ideal().with_readout(Confusion::symmetric(0.05));
        let ideal = [0.5, 0.0, 0.0, 0.5];
        let (mut raw, mut fixed) = (0.0, 0.0);
        for seed in 0..10 {
            let mut ex = Executor::shots(10_000, Some(noise.clone()), seed);
            let zero = StateVector::zero(2);
            raw += total_variation(&ex.distribution(&zero, &bell(), 0).unwrap(), &ideal);
            ex.transpile.resilience_level = 1;
            fixed += total_variation(&ex.distribution(&zero, &bell(), 0).unwrap(), &ideal);
        }
        assert!(fixed < 0.5 * raw, "{fixed} vs {raw}");
    }

    #[test]
    fn layout_is_undone_in_distribution() {
        let mut c = Circuit::new(2).unwrap();
        c.append(Instruction::gate(GateKind::X, &[0])).unwrap();
        let cfg = TranspileConfig {
            optimization_level: 3,
            qubit_error_rates: Some(alloc::vec![0.1, 0.2, 0.0]),
            ..TranspileConfig::default()
        };
        let ex = Executor::new(Mode::Shots { shots: 100, trajectories: 0 }, None, cfg, 1);
        let d = ex.distribution(&StateVector::zero(2), &c, 0).unwrap();
        assert_eq!(d, [0.0, 1.0, 0.0, 0.0]);
    }
}
