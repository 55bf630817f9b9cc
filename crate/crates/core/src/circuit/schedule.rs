//! As-soon-as-possible scheduling in abstract time units.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Circuit, GateKind, Instruction};

/// Gate durations. Defaults: 1 unit for one-qubit gates, 2 for two-qubit gates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Durations {
    pub one_qubit: u32,
    pub two_qubit: u32,
    #[serde(default)]
    pub overrides: BTreeMap<GateKind, u32>,
}

impl Default for Durations {
    fn default() -> Self {
        Self { one_qubit: 1, two_qubit: 2, overrides: BTreeMap::new() }
    }
}

impl Durations {
    pub fn of(&self, inst: &Instruction) -> u32 {
        if let Some(d) = inst.duration {
            return d;
        }
        if let Some(&d) = self.overrides.get(&inst.kind) {
            return d;
        }
        if inst.kind.arity() == 2 {
            self.two_qubit
        } else {
            self.one_qubit
        }
    }
}

/// Start/end time of every instruction plus the overall makespan.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub start: Vec<u32>,
    pub end: Vec<u32>,
    pub makespan: u32,
}

pub fn asap(circuit: &Circuit, durations: &Durations) -> Schedule {
    let mut busy = vec![0u32; circuit.num_qubits()];
    let mut start = Vec::with_capacity(circuit.len());
    let mut end = Vec::with_capacity(circuit.len());
    for inst in circuit.instructions() {
        let s = inst.qubits.iter().map(|&q| busy[q]).max().unwrap_or(0);
        let e = s + durations.of(inst);
        for &q in &inst.qubits {
            busy[q] = e;
        }
        start.push(s);
        end.push(e);
    }
    let makespan = busy.into_iter().max().unwrap_or(0);
    Schedule { start, end, makespan }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_qubit_gate_waits_for_both_wires() {
        let mut c = Circuit::new(2).unwrap();
        c.push(GateKind::H, &[0]);
        c.push(GateKind::H, &[0]);
        c.push(GateKind::CX, &[0, 1]);
        let s = asap(&c, &Durations::default());
        assert_eq!(s.start, [0, 1, 2]);
        assert_eq!(s.makespan, 4);
    }
}
