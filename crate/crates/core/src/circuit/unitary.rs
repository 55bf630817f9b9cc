use super::gates::{gate_matrix, GateMatrix};
use super::Circuit;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};

pub const UNITARY_MAX_QUBITS: usize = 10;

/// Dense unitary of a bound circuit, built as the product of each gate's
/// full-width embedding. Independent of the statevector kernels; used as a
/// test oracle.
pub fn unitary_of(circuit: &Circuit) -> Result<CMatrix> {
    let n = circuit.num_qubits();
    if n > UNITARY_MAX_QUBITS {
        return Err(Error::TooWide { width: n, limit: UNITARY_MAX_QUBITS });
    }
    if let Some(s) = circuit.free_symbols().iter().next() {
        return Err(Error::UnboundSymbol(s.clone()));
    }
    let dim = 1usize << n;
    let mut u = CMatrix::identity(dim);
    for inst in circuit.instructions() {
        let g = gate_matrix(inst)?;
        if g == GateMatrix::Identity {
            continue;
        }
        u = embed(&g, &inst.qubits, dim).mul(&u);
    }
    Ok(u)
}

fn embed(g: &GateMatrix, qubits: &[usize], dim: usize) -> CMatrix {
    let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
    let local = |idx: usize| -> usize {
        qubits.iter().enumerate().map(|(k, &q)| ((idx >> q) & 1) << k).sum()
    };
    let mut e = CMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            if i & !mask != j & !mask {
                continue;
            }
            let (li, lj) = (local(i), local(j));
            e[(i, j)] = match g {
                GateMatrix::One(m) => m[li][lj],
                GateMatrix::Two(m) => m[li][lj],
                GateMatrix::Identity => {
                    if li == lj {
                        crate::linalg::ONE
                    } else {
                        ZERO
                    }
                }
            };
        }
    }
    e
}
