//! Peephole cancellation and rotation merging.

use alloc::vec::Vec;

use crate::circuit::{GateKind, Instruction, ParamExpr};

/// Per-qubit basis in which a gate acts diagonally.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Basis {
    Z,
    X,
}

fn basis_on(inst: &Instruction, q: usize) -> Option<Basis> {
    if inst.decoupled {
        return None;
    }
    match inst.kind {
        GateKind::Z | GateKind::S | GateKind::T | GateKind::RZ | GateKind::Phase | GateKind::CZ | GateKind::RZZ => {
            Some(Basis::Z)
        }
        GateKind::X | GateKind::RX => Some(Basis::X),
        GateKind::CX => Some(if inst.qubits[0] == q { Basis::Z } else { Basis::X }),
        _ => None,
    }
}

/// Two gates commute when, on every shared qubit, both are diagonal in the
/// same single-qubit basis.
pub(crate) fn commutes(a: &Instruction, b: &Instruction) -> bool {
    a.qubits
        .iter()
        .filter(|q| b.qubits.contains(q))
        .all(|&q| matches!((basis_on(a, q), basis_on(b, q)), (Some(x), Some(y)) if x == y))
}

fn symmetric(kind: GateKind) -> bool {
    matches!(kind, GateKind::CZ | GateKind::SWAP | GateKind::RZZ | GateKind::XXplusYY)
}

fn same_wires(a: &Instruction, b: &Instruction) -> bool {
    if a.qubits == b.qubits {
        return true;
    }
    symmetric(a.kind) && a.qubits.len() == 2 && a.qubits[0] == b.qubits[1] && a.qubits[1] == b.qubits[0]
}

fn shares_qubit(a: &Instruction, b: &Instruction) -> bool {
    a.qubits.iter().any(|q| b.qubits.contains(q))
}

enum Reduction {
    Cancel,
    Merge(f64),
}

fn reduce(prev: &Instruction, next: &Instruction) -> Option<Reduction> {
    if prev.kind != next.kind || prev.decoupled || next.decoupled || !same_wires(prev, next) {
        return None;
    }
    if next.kind.is_self_inverse() {
        return Some(Reduction::Cancel);
    }
    if next.kind.takes_angle() {
        let (a, b) = (prev.angle.as_ref()?.as_const()?, next.angle.as_ref()?.as_const()?);
        return Some(Reduction::Merge(a + b));
    }
    None
}

fn is_null_rotation(inst: &Instruction) -> bool {
    inst.kind.takes_angle() && matches!(inst.angle, Some(ParamExpr::Const(v)) if v.abs() < 1e-12)
}

/// One streaming pass. With `commute`, a gate may slide back through gates
/// it commutes with to meet its partner.
fn pass(input: &[Instruction], commute: bool) -> Vec<Instruction> {
    let mut out: Vec<Option<Instruction>> = Vec::with_capacity(input.len());
    'next: for inst in input {
        if is_null_rotation(inst) {
            continue;
        }
        for p in (0..out.len()).rev() {
            let Some(prev) = &out[p] else { continue };
            if !shares_qubit(prev, inst) {
                continue;
            }
            match reduce(prev, inst) {
                Some(Reduction::Cancel) => {
                    out[p] = None;
                    continue 'next;
                }
                Some(Reduction::Merge(angle)) => {
                    let mut merged = prev.clone();
                    merged.angle = Some(ParamExpr::Const(angle));
                    out[p] = if is_null_rotation(&merged) { None } else { Some(merged) };
                    continue 'next;
                }
                None => {}
            }
            if !(commute && commutes(prev, inst)) {
                break;
            }
        }
        out.push(Some(inst.clone()));
    }
    out.into_iter().flatten().collect()
}

/// Runs the pass until the instruction count stops shrinking.
pub(crate) fn simplify(mut insts: Vec<Instruction>, commute: bool) -> Vec<Instruction> {
    loop {
        let next = pass(&insts, commute);
        if next.len() == insts.len() && next == insts {
            return next;
        }
        insts = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(kind: GateKind, q: &[usize]) -> Instruction {
        Instruction::gate(kind, q)
    }

    #[test]
    fn diagonal_commutation_rules() {
        let rz = Instruction::rotation(GateKind::RZ, &[0], 0.2);
        let cx = g(GateKind::CX, &[0, 1]);
        let cx_rev = g(GateKind::CX, &[1, 0]);
        assert!(commutes(&rz, &cx));
        assert!(!commutes(&rz, &cx_rev));
        assert!(commutes(&g(GateKind::X, &[1]), &cx));
        assert!(!commutes(&g(GateKind::H, &[0]), &rz));
        assert!(commutes(&g(GateKind::H, &[2]), &rz));
    }

    #[test]
    fn cancellation_through_commuting_gate() {
        let seq = [
            g(GateKind::CX, &[0, 1]),
            Instruction::rotation(GateKind::RZ, &[0], 0.3),
            g(GateKind::CX, &[0, 1]),
        ];
        assert_eq!(simplify(seq.to_vec(), false).len(), 3);
        let out = simplify(seq.to_vec(), true);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].kind, GateKind::RZ);
    }

    #[test]
    fn symbolic_angles_block_merging() {
        let seq = [
            Instruction::rotation(GateKind::RZ, &[0], "a"),
            Instruction::rotation(GateKind::RZ, &[0], 0.4),
        ];
        assert_eq!(simplify(seq.to_vec(), true).len(), 2);
    }

    #[test]
    fn delays_are_barriers() {
        let seq = [g(GateKind::X, &[0]), Instruction::delay(0, 3), g(GateKind::X, &[0])];
        assert_eq!(simplify(seq.to_vec(), true).len(), 3);
    }
}
