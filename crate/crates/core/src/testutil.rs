//! Random circuit generation for property checks and benchmarks.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::circuit::{Circuit, GateKind, Instruction};
use crate::rng::SimRng;

/// Bound random circuit over every non-delay gate kind.
pub fn random_circuit(rng: &mut SimRng, num_qubits: usize, depth: usize) -> Circuit {
    let kinds: Vec<GateKind> = GateKind::ALL
        .iter()
        .copied()
        .filter(|k| *k != GateKind::Delay && (num_qubits > 1 || k.arity() == 1))
        .collect();
    let mut c = Circuit::new(num_qubits).expect("positive width");
    for _ in 0..depth {
        let kind = kinds[rng.below(kinds.len())];
        let a = rng.below(num_qubits);
        let qubits = if kind.arity() == 2 {
            let mut b = rng.below(num_qubits - 1);
            if b >= a {
                b += 1;
            }
            alloc::vec![a, b]
        } else {
            alloc::vec![a]
        };
        let inst = if kind.takes_angle() {
            Instruction::rotation(kind, &qubits, rng.range(-PI, PI))
        } else {
            Instruction::gate(kind, &qubits)
        };
        c.append(inst).expect("valid random gate");
    }
    c
}
