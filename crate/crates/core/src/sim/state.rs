use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circuit::{gate_matrix, Circuit, GateKind, GateMatrix, Instruction};
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

/// Widest register `evolve` accepts.
pub const DEFAULT_MAX_QUBITS: usize = 24;

/// Dense pure state over `num_qubits` qubits; amplitude index bit q is qubit q.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Self { num_qubits, amps }
    }

    /// Takes ownership of unit-norm amplitudes.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(alloc::format!("{len} amplitudes is not a power of two")));
        }
        let s = Self { num_qubits: len.trailing_zeros() as usize, amps };
        if (s.norm_sqr() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("state is not normalized".into()));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn is_zero_state(&self) -> bool {
        self.amps[0] == ONE && self.amps[1..].iter().all(|a| *a == ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn apply(&mut self, inst: &Instruction) -> Result<()> {
        match inst.kind {
            GateKind::Delay => Ok(()),
            GateKind::CX => {
                self.apply_cx(inst.qubits[0], inst.qubits[1]);
                Ok(())
            }
            GateKind::SWAP => {
                self.apply_swap(inst.qubits[0], inst.qubits[1]);
                Ok(())
            }
            GateKind::X => {
                self.apply_x(inst.qubits[0]);
                Ok(())
            }
            _ => {
                match gate_matrix(inst)? {
                    GateMatrix::Identity => {}
                    GateMatrix::One(m) => self.apply_1q(inst.qubits[0], &m),
                    GateMatrix::Two(m) => self.apply_2q(inst.qubits[0], inst.qubits[1], &m),
                }
                Ok(())
            }
        }
    }

    pub fn apply_1q(&mut self, q: usize, m: &[[C64; 2]; 2]) {
        let bit = 1usize << q;
        if m[0][1] == ZERO && m[1][0] == ZERO {
            let (d0, d1) = (m[0][0], m[1][1]);
            for (i, a) in self.amps.iter_mut().enumerate() {
                *a *= if i & bit == 0 { d0 } else { d1 };
            }
            return;
        }
        for base in (0..self.amps.len()).step_by(bit << 1) {
            for i in base..base + bit {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_2q(&mut self, q0: usize, q1: usize, m: &[[C64; 4]; 4]) {
        let (b0, b1) = (1usize << q0, 1usize << q1);
        for i in 0..self.amps.len() {
            if i & (b0 | b1) != 0 {
                continue;
            }
            let idx = [i, i | b0, i | b1, i | b0 | b1];
            let v = idx.map(|k| self.amps[k]);
            for (r, &k) in idx.iter().enumerate() {
                self.amps[k] = m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] + m[r][3] * v[3];
            }
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        let bit = 1usize << q;
        for base in (0..self.amps.len()).step_by(bit << 1) {
            for i in base..base + bit {
                self.amps.swap(i, i | bit);
            }
        }
    }

    pub fn apply_z(&mut self, q: usize) {
        let bit = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a = -*a;
            }
        }
    }

    /// `Y = i·X·Z`.
    pub fn apply_y(&mut self, q: usize) {
        self.apply_z(q);
        self.apply_x(q);
        for a in &mut self.amps {
            *a *= crate::linalg::I;
        }
    }

    /// Pauli by code: 0 = I, 1 = X, 2 = Y, 3 = Z.
    pub fn apply_pauli(&mut self, q: usize, code: u8) {
        match code {
            1 => self.apply_x(q),
            2 => self.apply_y(q),
            3 => self.apply_z(q),
            _ => {}
        }
    }

    fn apply_cx(&mut self, c: usize, t: usize) {
        let (bc, bt) = (1usize << c, 1usize << t);
        for i in 0..self.amps.len() {
            if i & bc != 0 && i & bt == 0 {
                self.amps.swap(i, i | bt);
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ba != 0 && i & bb == 0 {
                self.amps.swap(i, (i ^ ba) | bb);
            }
        }
    }

    /// `⟨Z…⟩` for the qubits selected by `obs`.
    pub fn expectation(&self, obs: &ZObservable) -> Result<f64> {
        if obs.num_qubits != self.num_qubits {
            return Err(Error::ObservableLength { expected: self.num_qubits, got: obs.num_qubits });
        }
        Ok(obs.expectation_from(&self.probabilities()))
    }
}

/// Runs a bound circuit from `|0…0⟩`.
pub fn evolve(circuit: &Circuit) -> Result<StateVector> {
    evolve_capped(circuit, DEFAULT_MAX_QUBITS)
}

pub fn evolve_capped(circuit: &Circuit, max_qubits: usize) -> Result<StateVector> {
    if circuit.num_qubits() > max_qubits {
        return Err(Error::TooWide { width: circuit.num_qubits(), limit: max_qubits });
    }
    evolve_from(StateVector::zero(circuit.num_qubits()), circuit)
}

/// Runs a bound circuit from an arbitrary initial state.
pub fn evolve_from(mut state: StateVector, circuit: &Circuit) -> Result<StateVector> {
    if state.num_qubits() != circuit.num_qubits() {
        return Err(Error::WidthMismatch { left: state.num_qubits(), right: circuit.num_qubits() });
    }
    if let Some(s) = circuit.free_symbols().iter().next() {
        return Err(Error::UnboundSymbol(s.clone()));
    }
    for inst in circuit.instructions() {
        state.apply(inst)?;
    }
    Ok(state)
}

/// Tensor product of `Z` and `I`. Written highest qubit first, e.g. `"IZ"`
/// measures qubit 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ZObservable {
    num_qubits: usize,
    mask: usize,
}

impl ZObservable {
    pub fn on(num_qubits: usize, qubits: &[usize]) -> Result<Self> {
        let mut mask = 0;
        for &q in qubits {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { index: q, width: num_qubits });
            }
            mask |= 1 << q;
        }
        Ok(Self { num_qubits, mask })
    }

    /// Parity of all qubits.
    pub fn parity(num_qubits: usize) -> Self {
        Self { num_qubits, mask: (1 << num_qubits) - 1 }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn mask(&self) -> usize {
        self.mask
    }

    pub fn sign(&self, index: usize) -> f64 {
        if (index & self.mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Expectation over a (possibly quasi-) distribution indexed by basis state.
    pub fn expectation_from(&self, dist: &[f64]) -> f64 {
        dist.iter().enumerate().map(|(i, p)| p * self.sign(i)).sum()
    }
}

impl fmt::Display for ZObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.num_qubits).rev() {
            f.write_str(if self.mask >> q & 1 == 1 { "Z" } else { "I" })?;
        }
        Ok(())
    }
}

impl FromStr for ZObservable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count();
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        let mut mask = 0;
        for (pos, ch) in s.chars().enumerate() {
            match ch {
                'Z' | 'z' => mask |= 1 << (n - 1 - pos),
                'I' | 'i' => {}
                other => {
                    return Err(Error::InvalidArgument(alloc::format!("observable may only contain Z and I, found `{other}`")))
                }
            }
        }
        Ok(Self { num_qubits: n, mask })
    }
}

impl TryFrom<String> for ZObservable {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ZObservable> for String {
    fn from(o: ZObservable) -> String {
        alloc::format!("{o}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::unitary_of;
    use crate::rng::SimRng;
    use core::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn hadamard_on_zero() {
        let mut c = Circuit::new(1).unwrap();
        c.append(Instruction::gate(GateKind::H, &[0])).unwrap();
        let s = evolve(&c).unwrap();
        for a in s.amplitudes() {
            assert!((a - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn bell_state() {
        let mut c = Circuit::new(2).unwrap();
        c.append(Instruction::gate(GateKind::H, &[0])).unwrap();
        c.append(Instruction::gate(GateKind::CX, &[0, 1])).unwrap();
        let s = evolve(&c).unwrap();
        let p = s.probabilities();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[3] - 0.5).abs() < 1e-15);
        assert_eq!(p[1] + p[2], 0.0);
        assert!((s.expectation(&"ZZ".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_expectation_of_ry() {
        assert_eq!(StateVector::zero(1).expectation(&"Z".parse().unwrap()).unwrap(), 1.0);
        for theta in [0.0, PI / 2.0, PI] {
            let mut c = Circuit::new(1).unwrap();
            c.append(Instruction::rotation(GateKind::RY, &[0], theta)).unwrap();
            let e = evolve(&c).unwrap().expectation(&ZObservable::parity(1)).unwrap();
            assert!((e - libm::cos(theta)).abs() < 1e-12);
        }
        assert!(StateVector::zero(2).expectation(&"Z".parse().unwrap()).is_err());
    }

    #[test]
    fn matches_unitary_oracle_on_six_qubits() {
        let mut rng = SimRng::new(5);
        for _ in 0..5 {
            let c = crate::testutil::random_circuit(&mut rng, 6, 60);
            let u = unitary_of(&c).unwrap();
            let s = evolve(&c).unwrap();
            let col = u.column(0);
            let err = col.iter().zip(s.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-9, "{err}");
            assert!((s.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn pauli_y_matches_gate() {
        let mut rng = SimRng::new(9);
        let c = crate::testutil::random_circuit(&mut rng, 2, 10);
        let base = evolve(&c).unwrap();
        let mut a = base.clone();
        a.apply_pauli(1, 2);
        let mut b = base;
        b.apply(&Instruction::gate(GateKind::Y, &[1])).unwrap();
        assert!(a.amplitudes().iter().zip(b.amplitudes()).all(|(x, y)| (x - y).norm() < 1e-14));
    }

    #[test]
    fn observable_text() {
        let o: ZObservable = "IZ".parse().unwrap();
        assert_eq!(o.mask(), 1);
        assert_eq!(alloc::format!("{o}"), "IZ");
        assert!("XZ".parse::<ZObservable>().is_err());
    }
}
