#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use super::{GateKind, Instruction};
use crate::error::Result;
use crate::linalg::{C64, I, ONE, ZERO};

/// Local gate matrix. For two-qubit gates, local index bit k belongs to
/// `qubits[k]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateMatrix {
    Identity,
    One([[C64; 2]; 2]),
    Two([[C64; 4]; 4]),
}

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn diag2(a: C64, b: C64) -> [[C64; 2]; 2] {
    [[a, ZERO], [ZERO, b]]
}

fn diag4(d: [C64; 4]) -> [[C64; 4]; 4] {
    let mut m = [[ZERO; 4]; 4];
    for (i, v) in d.into_iter().enumerate() {
        m[i][i] = v;
    }
    m
}

/// Matrix for a bound instruction.
pub fn gate_matrix(inst: &Instruction) -> Result<GateMatrix> {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let angle = if inst.kind.takes_angle() { inst.bound_angle()? } else { 0.0 };
    let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
    Ok(match inst.kind {
        GateKind::Delay => GateMatrix::Identity,
        GateKind::H => GateMatrix::One([[r(h), r(h)], [r(h), r(-h)]]),
        GateKind::X => GateMatrix::One([[ZERO, ONE], [ONE, ZERO]]),
        GateKind::Y => GateMatrix::One([[ZERO, -I], [I, ZERO]]),
        GateKind::Z => GateMatrix::One(diag2(ONE, r(-1.0))),
        GateKind::S => GateMatrix::One(diag2(ONE, I)),
        GateKind::T => GateMatrix::One(diag2(ONE, C64::from_polar(1.0, core::f64::consts::FRAC_PI_4))),
        GateKind::RX => GateMatrix::One([[r(c), -I * s], [-I * s, r(c)]]),
        GateKind::RY => GateMatrix::One([[r(c), r(-s)], [r(s), r(c)]]),
        GateKind::RZ => GateMatrix::One(diag2(C64::from_polar(1.0, -angle / 2.0), C64::from_polar(1.0, angle / 2.0))),
        GateKind::Phase => GateMatrix::One(diag2(ONE, C64::from_polar(1.0, angle))),
        GateKind::CX => {
            let mut m = diag4([ONE, ZERO, ONE, ZERO]);
            m[1][3] = ONE;
            m[3][1] = ONE;
            GateMatrix::Two(m)
        }
        GateKind::CZ => GateMatrix::Two(diag4([ONE, ONE, ONE, r(-1.0)])),
        GateKind::RZZ => {
            let even = C64::from_polar(1.0, -angle / 2.0);
            let odd = C64::from_polar(1.0, angle / 2.0);
            GateMatrix::Two(diag4([even, odd, odd, even]))
        }
        GateKind::SWAP => {
            let mut m = diag4([ONE, ZERO, ZERO, ONE]);
            m[1][2] = ONE;
            m[2][1] = ONE;
            GateMatrix::Two(m)
        }
        GateKind::XXplusYY => {
            let mut m = diag4([ONE, r(c), r(c), ONE]);
            m[1][2] = -I * s;
            m[2][1] = -I * s;
            GateMatrix::Two(m)
        }
    })
}
