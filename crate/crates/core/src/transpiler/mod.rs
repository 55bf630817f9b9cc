//! Optimization levels 0–3, noise-adaptive layout, routing and dynamic
//! decoupling.

mod dd;
mod optimize;
mod routing;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::circuit::schedule::Durations;
use crate::circuit::{Circuit, GateKind};
use crate::error::{Error, Result};

pub use dd::{apply_dd, MIN_WINDOW};
pub use routing::CouplingGraph;

/// Transpilation settings.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TranspileConfig {
    pub optimization_level: u8,
    /// Carried for the executor, which calibrates and mitigates at level 1.
    pub resilience_level: u8,
    pub dynamic_decoupling: u8,
    pub coupling: Option<CouplingGraph>,
    pub qubit_error_rates: Option<Vec<f64>>,
    pub durations: Durations,
}

impl TranspileConfig {
    pub fn level(optimization_level: u8) -> Self {
        Self { optimization_level, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.optimization_level > 3 {
            return Err(Error::OptimizationLevel(self.optimization_level));
        }
        if self.resilience_level > 1 {
            return Err(Error::ResilienceLevel(self.resilience_level));
        }
        if self.dynamic_decoupling > 1 {
            return Err(Error::InvalidArgument(alloc::format!(
                "dynamic_decoupling must be 0 or 1, got {}",
                self.dynamic_decoupling
            )));
        }
        if let Some(rates) = &self.qubit_error_rates {
            if rates.iter().any(|r| !r.is_finite()) {
                return Err(Error::NonFinite);
            }
            if let Some(g) = &self.coupling {
                if rates.len() != g.num_nodes() {
                    return Err(Error::Shape(alloc::format!(
                        "{} error rates for a {}-qubit device",
                        rates.len(),
                        g.num_nodes()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Logical → physical qubit assignment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    physical: Vec<usize>,
    device_qubits: usize,
}

impl Layout {
    pub fn trivial(n: usize) -> Self {
        Self { physical: (0..n).collect(), device_qubits: n }
    }

    pub fn new(physical: Vec<usize>, device_qubits: usize) -> Result<Self> {
        for (i, &p) in physical.iter().enumerate() {
            if p >= device_qubits {
                return Err(Error::QubitOutOfRange { index: p, width: device_qubits });
            }
            if physical[..i].contains(&p) {
                return Err(Error::DuplicateQubit(p));
            }
        }
        Ok(Self { physical, device_qubits })
    }

    pub fn physical(&self, logical: usize) -> usize {
        self.physical[logical]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.physical
    }

    pub fn device_qubits(&self) -> usize {
        self.device_qubits
    }

    pub fn is_trivial(&self) -> bool {
        self.device_qubits == self.physical.len() && self.physical.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn to_map(&self) -> BTreeMap<usize, usize> {
        self.physical.iter().copied().enumerate().collect()
    }

    /// Maps a device basis index to the logical index it encodes.
    pub fn logical_index(&self, device_index: usize) -> usize {
        self.physical.iter().enumerate().map(|(l, &p)| (device_index >> p & 1) << l).sum()
    }
}

/// Transpiled circuit on device qubits; its unitary equals the input's
/// conjugated by `layout`, up to global phase.
#[derive(Clone, Debug, PartialEq)]
pub struct Transpiled {
    pub circuit: Circuit,
    pub layout: Layout,
}

/// Logical qubits sorted by descending gate count matched to physical qubits
/// sorted by ascending error rate. Without error rates the layout is trivial.
fn noise_adaptive_layout(circuit: &Circuit, device: usize, rates: Option<&[f64]>) -> Layout {
    let n = circuit.num_qubits();
    let Some(r) = rates else {
        return Layout { physical: (0..n).collect(), device_qubits: device };
    };
    let mut usage = alloc::vec![0usize; n];
    for inst in circuit.instructions() {
        if inst.kind != GateKind::Delay {
            inst.qubits.iter().for_each(|&q| usage[q] += 1);
        }
    }
    let mut logical: Vec<usize> = (0..n).collect();
    logical.sort_by(|&a, &b| usage[b].cmp(&usage[a]).then(a.cmp(&b)));
    let mut physical: Vec<usize> = (0..device).collect();
    physical.sort_by(|&a, &b| r[a].total_cmp(&r[b]).then(a.cmp(&b)));
    let mut map = alloc::vec![0; n];
    for (l, p) in logical.into_iter().zip(physical) {
        map[l] = p;
    }
    Layout { physical: map, device_qubits: device }
}

pub fn transpile(circuit: &Circuit, config: &TranspileConfig) -> Result<Transpiled> {
    config.validate()?;
    let n = circuit.num_qubits();
    let mut insts = circuit.instructions().to_vec();
    if config.optimization_level >= 1 {
        insts = optimize::simplify(insts, config.optimization_level >= 2);
    }
    let mut out = circuit.with_instructions(insts)?;
    let mut layout = Layout::trivial(n);

    if config.optimization_level == 3 {
        let device = match (&config.coupling, &config.qubit_error_rates) {
            (Some(g), _) => g.num_nodes(),
            (None, Some(r)) => r.len(),
            (None, None) => n,
        };
        if device < n {
            return Err(Error::TooWide { width: n, limit: device });
        }
        layout = noise_adaptive_layout(&out, device, config.qubit_error_rates.as_deref());
        let routed = match &config.coupling {
            Some(g) => {
                // ancilla tokens n.. fill the unused physical qubits in order
                let mut placement = layout.physical.clone();
                placement.extend((0..device).filter(|p| !layout.physical.contains(p)));
                let on_tokens = out.widened(device)?;
                routing::route(on_tokens.instructions(), g, &placement)
            }
            None => out
                .instructions()
                .iter()
                .map(|i| {
                    let mut m = i.clone();
                    m.qubits = i.qubits.iter().map(|&q| layout.physical[q]).collect();
                    m
                })
                .collect(),
        };
        out = Circuit::from_instructions(device, optimize::simplify(routed, true))?;
    }

    if config.dynamic_decoupling == 1 {
        out = apply_dd(&out, &config.durations)?;
    }
    Ok(Transpiled { circuit: out, layout })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{unitary_of, Instruction};
    use crate::linalg::CMatrix;
    use crate::rng::SimRng;

    /// `P (U ⊗ I) P†` for the layout permutation, ancillas in the high bits.
    pub(crate) fn permuted_unitary(u: &CMatrix, layout: &Layout, n: usize) -> CMatrix {
        let device = layout.device_qubits();
        let mut perm: Vec<usize> = layout.as_slice().to_vec();
        perm.extend((0..device).filter(|p| !layout.as_slice().contains(p)));
        let dim = 1usize << device;
        let to_device = |idx: usize| -> usize { (0..device).map(|t| (idx >> t & 1) << perm[t]).sum() };
        let low = (1usize << n) - 1;
        let mut out = CMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                if i >> n != j >> n {
                    continue;
                }
                out[(to_device(i), to_device(j))] = u[(i & low, j & low)];
            }
        }
        out
    }

    #[test]
    fn hh_cancels_at_level_one() {
        let mut c = Circuit::new(1).unwrap();
        c.push(GateKind::H, &[0]);
        c.push(GateKind::H, &[0]);
        assert!(transpile(&c, &TranspileConfig::level(1)).unwrap().circuit.is_empty());
        assert_eq!(transpile(&c, &TranspileConfig::level(0)).unwrap().circuit.len(), 2);
    }

    #[test]
    fn rz_merge() {
        let mut c = Circuit::new(1).unwrap();
        c.push_rot(GateKind::RZ, &[0], 0.3);
        c.push_rot(GateKind::RZ, &[0], 0.4);
        let out = transpile(&c, &TranspileConfig::level(1)).unwrap().circuit;
        assert_eq!(out.len(), 1);
        assert!((out.instructions()[0].bound_angle().unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn routing_on_line_preserves_unitary() {
        let mut c = Circuit::new(4).unwrap();
        c.push(GateKind::H, &[0]);
        c.push(GateKind::CX, &[0, 3]);
        c.push_rot(GateKind::RY, &[3], 0.3);
        let cfg = TranspileConfig {
            optimization_level: 3,
            coupling: Some(CouplingGraph::line(4).unwrap()),
            ..TranspileConfig::default()
        };
        let t = transpile(&c, &cfg).unwrap();
        assert!(t.circuit.instructions().iter().any(|i| i.kind == GateKind::SWAP));
        let want = permuted_unitary(&unitary_of(&c).unwrap(), &t.layout, 4);
        assert!(unitary_of(&t.circuit).unwrap().phase_distance(&want) < 1e-8);
    }

    #[test]
    fn noise_adaptive_layout_prefers_quiet_qubits() {
        let mut c = Circuit::new(2).unwrap();
        c.push(GateKind::H, &[1]);
        c.push(GateKind::X, &[1]);
        c.push(GateKind::Y, &[1]);
        c.push(GateKind::Y, &[0]);
        let cfg = TranspileConfig {
            optimization_level: 3,
            qubit_error_rates: Some(alloc::vec![0.05, 0.01, 0.001]),
            ..TranspileConfig::default()
        };
        let t = transpile(&c, &cfg).unwrap();
        assert_eq!(t.layout.as_slice(), [1, 2]);
        assert_eq!(t.circuit.num_qubits(), 3);
        let want = permuted_unitary(&unitary_of(&c).unwrap(), &t.layout, 2);
        assert!(unitary_of(&t.circuit).unwrap().phase_distance(&want) < 1e-8);
    }

    #[test]
    fn levels_preserve_unitary_and_shrink() {
        let mut rng = SimRng::new(21);
        for _ in 0..20 {
            let n = 1 + rng.below(4);
            let c = crate::testutil::random_circuit(&mut rng, n, 30);
            let u = unitary_of(&c).unwrap();
            let mut prev = usize::MAX;
            for level in 0..=3 {
                let t = transpile(&c, &TranspileConfig::level(level)).unwrap();
                assert!(unitary_of(&t.circuit).unwrap().phase_distance(&u) < 1e-8);
                assert!(t.circuit.len() <= prev);
                prev = t.circuit.len();
                if (1..=2).contains(&level) {
                    let again = transpile(&t.circuit, &TranspileConfig::level(level)).unwrap();
                    assert_eq!(again.circuit, t.circuit);
                }
            }
        }
    }

    #[test]
    fn invalid_levels() {
        let c = Circuit::new(1).unwrap();
        assert_eq!(transpile(&c, &TranspileConfig::level(4)), Err(Error::OptimizationLevel(4)));
        let cfg = TranspileConfig { resilience_level: 2, ..TranspileConfig::default() };
        assert!(transpile(&c, &cfg).is_err());
    }

    #[test]
    fn dd_keeps_unitary() {
        let mut rng = SimRng::new(2);
        let c = crate::testutil::random_circuit(&mut rng, 3, 20);
        let out = apply_dd(&c, &Durations::default()).unwrap();
        assert!(unitary_of(&out).unwrap().max_abs_diff(&unitary_of(&c).unwrap()) < 1e-10);
        let _ = Instruction::delay(0, 1);
    }
}
