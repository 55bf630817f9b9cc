//! Dynamic decoupling: X–X echo pairs in idle windows.

use alloc::vec;
use alloc::vec::Vec;

use crate::circuit::schedule::{asap, Durations};
use crate::circuit::{Circuit, GateKind, Instruction};
use crate::error::Result;

/// Shortest idle window that receives a decoupling sequence.
pub const MIN_WINDOW: u32 = 2;

fn pulse(q: usize) -> Instruction {
    let mut x = Instruction::gate(GateKind::X, &[q]);
    x.duration = Some(0);
    x.decoupled = true;
    x
}

fn decoupled_delay(q: usize, units: u32) -> Instruction {
    let mut d = Instruction::delay(q, units);
    d.decoupled = true;
    d
}

/// `Delay·X·Delay·X·Delay` splitting `window` as ¼, ½, remainder. Pulses are
/// instantaneous so the sequence fills the window exactly.
fn sequence(q: usize, window: u32) -> Vec<Instruction> {
    let (a, b) = (window / 4, window / 2);
    let c = window - a - b;
    let mut out = Vec::with_capacity(5);
    for (k, units) in [a, b, c].into_iter().enumerate() {
        if units > 0 {
            out.push(decoupled_delay(q, units));
        }
        if k < 2 {
            out.push(pulse(q));
        }
    }
    out
}

/// Fills every idle window of at least [`MIN_WINDOW`] units that follows a
/// qubit's first gate (including the tail up to the makespan). Leading idle
/// time is left alone; the qubit is still in `|0⟩` there.
pub fn apply_dd(circuit: &Circuit, durations: &Durations) -> Result<Circuit> {
    let sched = asap(circuit, durations);
    let n = circuit.num_qubits();
    let insts = circuit.instructions();
    // sequences to insert after instruction k
    let mut after: Vec<Vec<Instruction>> = vec![Vec::new(); insts.len()];
    let mut last: Vec<Option<usize>> = vec![None; n];
    for (k, inst) in insts.iter().enumerate() {
        for &q in &inst.qubits {
            if let Some(p) = last[q] {
                let gap = sched.start[k] - sched.end[p];
                if gap >= MIN_WINDOW {
                    after[p].extend(sequence(q, gap));
                }
            }
            last[q] = Some(k);
        }
    }
    for (q, p) in last.iter().enumerate() {
        if let Some(p) = *p {
            let gap = sched.makespan - sched.end[p];
            if gap >= MIN_WINDOW {
                after[p].extend(sequence(q, gap));
            }
        }
    }
    let mut out = Vec::with_capacity(insts.len());
    for (inst, extra) in insts.iter().zip(after) {
        out.push(inst.clone());
        out.extend(extra);
    }
    circuit.with_instructions(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn busy_circuit_unchanged() {
        let mut c = Circuit::new(1).unwrap();
        c.push(GateKind::H, &[0]);
        c.push(GateKind::X, &[0]);
        assert_eq!(apply_dd(&c, &Durations::default()).unwrap(), c);
    }

    #[test]
    fn four_unit_window_gets_1_2_1_delays() {
        let mut c = Circuit::new(2).unwrap();
        c.push(GateKind::H, &[1]);
        for _ in 0..5 {
            c.push(GateKind::H, &[0]);
        }
        c.push(GateKind::CX, &[0, 1]);
        let out = apply_dd(&c, &Durations::default()).unwrap();
        let on_q1: Vec<_> = out.instructions().iter().filter(|i| i.decoupled).collect();
        let kinds: Vec<_> = on_q1.iter().map(|i| (i.kind, i.duration)).collect();
        assert_eq!(
            kinds,
            [
                (GateKind::Delay, Some(1)),
                (GateKind::X, Some(0)),
                (GateKind::Delay, Some(2)),
                (GateKind::X, Some(0)),
                (GateKind::Delay, Some(1))
            ]
        );
        assert!(on_q1.iter().all(|i| i.qubits == [1]));
        let before = asap(&c, &Durations::default());
        let after = asap(&out, &Durations::default());
        assert_eq!(before.makespan, after.makespan);
    }
}
