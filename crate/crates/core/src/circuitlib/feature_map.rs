#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{data_symbol, Entanglement};
use crate::circuit::{Binding, Circuit, GateKind, Instruction, ParamExpr};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::sim::StateVector;

/// Pauli strings accepted by [`FeatureMapKind::PauliFeatureMap`].
pub const PAULI_STRINGS: [&str; 7] = ["Z", "ZZ", "X", "Y", "XX", "YY", "ZZZ"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMapKind {
    RawFeatureVector,
    ZFeatureMap,
    #[serde(rename = "zz_feature_map")]
    ZZFeatureMap,
    PauliFeatureMap,
}

impl core::str::FromStr for FeatureMapKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "").as_str() {
            "rawfeaturevector" | "raw" => Ok(Self::RawFeatureVector),
            "zfeaturemap" | "z" => Ok(Self::ZFeatureMap),
            "zzfeaturemap" | "zz" => Ok(Self::ZZFeatureMap),
            "paulifeaturemap" | "pauli" => Ok(Self::PauliFeatureMap),
            _ => Err(Error::InvalidArgument(format!("unknown feature map `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub kind: FeatureMapKind,
    pub num_qubits: usize,
    #[serde(default = "one")]
    pub reps: usize,
    #[serde(default)]
    pub entanglement: Entanglement,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pauli_strings: Vec<String>,
}

fn one() -> usize {
    1
}

impl FeatureMapSpec {
    pub fn new(kind: FeatureMapKind, num_qubits: usize) -> Self {
        let pauli_strings = if kind == FeatureMapKind::PauliFeatureMap {
            vec!["Z".into(), "ZZ".into()]
        } else {
            Vec::new()
        };
        Self { kind, num_qubits, reps: 1, entanglement: Entanglement::Linear, pauli_strings }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_entanglement(mut self, e: Entanglement) -> Self {
        self.entanglement = e;
        self
    }

    pub fn with_pauli_strings(mut self, strings: &[&str]) -> Self {
        self.pauli_strings = strings.iter().map(|s| String::from(*s)).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::EmptyRegister);
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("feature map reps must be at least 1".into()));
        }
        if self.kind == FeatureMapKind::PauliFeatureMap {
            if self.pauli_strings.is_empty() {
                return Err(Error::InvalidArgument("PauliFeatureMap needs at least one Pauli string".into()));
            }
            if let Some(bad) = self.pauli_strings.iter().find(|s| !PAULI_STRINGS.contains(&s.as_str())) {
                return Err(Error::InvalidArgument(format!("unsupported Pauli string `{bad}`")));
            }
        }
        Ok(())
    }

    /// Input features consumed: `2^n` amplitudes for the raw map, one angle
    /// per qubit otherwise.
    pub fn num_features(&self) -> usize {
        match self.kind {
            FeatureMapKind::RawFeatureVector => 1 << self.num_qubits,
            _ => self.num_qubits,
        }
    }

    pub fn build(&self) -> Result<FeatureMap> {
        self.validate()?;
        let n = self.num_qubits;
        let mut c = Circuit::new(n)?;
        let strings: Vec<&str> = match self.kind {
            FeatureMapKind::RawFeatureVector => Vec::new(),
            FeatureMapKind::ZFeatureMap => vec!["Z"],
            FeatureMapKind::ZZFeatureMap => vec!["Z", "ZZ"],
            FeatureMapKind::PauliFeatureMap => self.pauli_strings.iter().map(String::as_str).collect(),
        };
        if !strings.is_empty() {
            for _ in 0..self.reps {
                for q in 0..n {
                    c.append(Instruction::gate(GateKind::H, &[q]))?;
                }
                for s in &strings {
                    for qubits in self.supports(s.len()) {
                        pauli_evolution(&mut c, s, &qubits)?;
                    }
                }
            }
        }
        Ok(FeatureMap { spec: self.clone(), circuit: c })
    }

    fn supports(&self, order: usize) -> Vec<Vec<usize>> {
        let n = self.num_qubits;
        match order {
            1 => (0..n).map(|q| vec![q]).collect(),
            2 => self.entanglement.pairs(n).into_iter().map(|(a, b)| vec![a, b]).collect(),
            _ => self.entanglement.triples(n).into_iter().map(|t| t.to_vec()).collect(),
        }
    }
}

/// `exp`-style term for one Pauli string on `qubits`: basis change, CX
/// ladder, `Phase(2φ)` on the last qubit, then uncompute.
fn pauli_evolution(c: &mut Circuit, paulis: &str, qubits: &[usize]) -> Result<()> {
    let letters: Vec<char> = paulis.chars().collect();
    let basis = |c: &mut Circuit, inverse: bool| -> Result<()> {
        for (&q, &p) in qubits.iter().zip(&letters) {
            match p {
                'X' => c.append(Instruction::gate(GateKind::H, &[q]))?,
                'Y' => c.append(Instruction::rotation(GateKind::RX, &[q], if inverse { -PI / 2.0 } else { PI / 2.0 }))?,
                _ => {}
            }
        }
        Ok(())
    };
    basis(c, false)?;
    for w in qubits.windows(2) {
        c.append(Instruction::gate(GateKind::CX, w))?;
    }
    let phi = if qubits.len() == 1 {
        ParamExpr::symbol(data_symbol(qubits[0]))
    } else {
        ParamExpr::Product(qubits.iter().map(|&q| ParamExpr::minus_from(PI, ParamExpr::symbol(data_symbol(q)))).collect())
    };
    c.append(Instruction::rotation(GateKind::Phase, &[qubits[qubits.len() - 1]], ParamExpr::scaled(2.0, phi)))?;
    for w in qubits.windows(2).rev() {
        c.append(Instruction::gate(GateKind::CX, w))?;
    }
    basis(c, true)
}

/// A built feature map. For the raw map the circuit is empty and encoding
/// happens through amplitude initialization.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    spec: FeatureMapSpec,
    circuit: Circuit,
}

/// Encoded sample: initial state and the bound encoding circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct Encoded {
    pub prep: StateVector,
    pub circuit: Circuit,
}

impl FeatureMap {
    pub fn spec(&self) -> &FeatureMapSpec {
        &self.spec
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn num_qubits(&self) -> usize {
        self.spec.num_qubits
    }

    pub fn is_raw(&self) -> bool {
        self.spec.kind == FeatureMapKind::RawFeatureVector
    }

    pub fn binding(&self, x: &[f64]) -> Result<Binding> {
        if x.len() != self.spec.num_features() {
            return Err(Error::Shape(format!("{} features for a map expecting {}", x.len(), self.spec.num_features())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(x.iter().enumerate().map(|(i, &v)| (data_symbol(i), v)).collect())
    }

    /// Encodes one sample. The raw map zero-pads `x` to `2^n` and normalizes.
    pub fn encode(&self, x: &[f64]) -> Result<Encoded> {
        let n = self.spec.num_qubits;
        if self.is_raw() {
            let dim = 1usize << n;
            if x.len() > dim {
                return Err(Error::Shape(format!("{} amplitudes exceed 2^{n}", x.len())));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidArgument("cannot encode the zero vector as a state".into()));
            }
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            for (a, &v) in amps.iter_mut().zip(x) {
                *a = C64::new(v / norm, 0.0);
            }
            return Ok(Encoded { prep: StateVector::from_amplitudes(amps)?, circuit: self.circuit.clone() });
        }
        Ok(Encoded { prep: StateVector::zero(n), circuit: self.circuit.bind(&self.binding(x)?) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::unitary_of;
    use crate::linalg::CMatrix;
    use crate::rng::SimRng;
    use crate::sim::evolve_from;

    #[test]
    fn z_map_at_zero_is_hadamards() {
        let fm = FeatureMapSpec::new(FeatureMapKind::ZFeatureMap, 2).build().unwrap();
        assert_eq!(fm.circuit().free_symbols().len(), 2);
        let u = unitary_of(&fm.encode(&[0.0, 0.0]).unwrap().circuit).unwrap();
        let h = 0.5;
        let want = CMatrix::from_rows(&[
            &[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0)],
            &[C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)],
            &[C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(-h, 0.0)],
            &[C64::new(h, 0.0), C64::new(-h, 0.0), C64::new(-h, 0.0), C64::new(h, 0.0)],
        ]);
        assert!(u.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn zz_pair_term_vanishes_at_pi() {
        let x = [PI, PI];
        let zz = FeatureMapSpec::new(FeatureMapKind::ZZFeatureMap, 2).build().unwrap();
        let z = FeatureMapSpec::new(FeatureMapKind::ZFeatureMap, 2).build().unwrap();
        let a = unitary_of(&zz.encode(&x).unwrap().circuit).unwrap();
        let b = unitary_of(&z.encode(&x).unwrap().circuit).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn zz_without_pairs_is_z_map() {
        for reps in 1..3 {
            let zz = FeatureMapSpec::new(FeatureMapKind::ZZFeatureMap, 1).with_reps(reps).build().unwrap();
            let z = FeatureMapSpec::new(FeatureMapKind::ZFeatureMap, 1).with_reps(reps).build().unwrap();
            assert_eq!(zz.circuit(), z.circuit());
        }
    }

    #[test]
    fn pauli_z_zz_matches_zz_map() {
        for e in [Entanglement::Linear, Entanglement::Circular, Entanglement::Full] {
            let zz = FeatureMapSpec::new(FeatureMapKind::ZZFeatureMap, 3).with_entanglement(e).with_reps(2);
            let pauli = FeatureMapSpec { kind: FeatureMapKind::PauliFeatureMap, ..zz.clone() }.with_pauli_strings(&["Z", "ZZ"]);
            assert_eq!(zz.build().unwrap().circuit(), pauli.build().unwrap().circuit());
        }
    }

    /// Every Pauli term must equal `diag(1, e^{2iφ})` in the eigenbasis of the
    /// string: checked against `exp`-free matrix construction.
    #[test]
    fn pauli_terms_match_matrix_oracle() {
        let mut rng = SimRng::new(5);
        for s in PAULI_STRINGS {
            let k = s.len();
            let spec = FeatureMapSpec::new(FeatureMapKind::PauliFeatureMap, k).with_pauli_strings(&[s]);
            let fm = spec.build().unwrap();
            let x: Vec<f64> = (0..k).map(|_| rng.range(0.0, PI)).collect();
            // drop the leading Hadamard layer
            let body = fm.circuit().instructions()[k..].to_vec();
            let term = Circuit::from_instructions(k, body).unwrap().bind(&fm.binding(&x).unwrap());
            let got = unitary_of(&term).unwrap();
            let phi = if k == 1 { x[0] } else { x.iter().map(|v| PI - v).product() };
            // P = ⊗ paulis; term = (I + P)/2 + e^{2iφ}(I − P)/2 on the string's support
            let pauli = pauli_matrix(s);
            let dim = 1 << k;
            let mut want = CMatrix::zeros(dim);
            let e = C64::new(0.0, 2.0 * phi).exp();
            for i in 0..dim {
                for j in 0..dim {
                    let id = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                    want[(i, j)] = (id + pauli[(i, j)]) * 0.5 + e * (id - pauli[(i, j)]) * 0.5;
                }
            }
            assert!(got.max_abs_diff(&want) < 1e-10, "{s}");
        }
    }

    fn pauli_matrix(s: &str) -> CMatrix {
        let one = C64::new(1.0, 0.0);
        let z = C64::new(0.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let single = |p: char| -> [[C64; 2]; 2] {
            match p {
                'X' => [[z, one], [one, z]],
                'Y' => [[z, -i], [i, z]],
                _ => [[one, z], [z, -one]],
            }
        };
        let letters: Vec<char> = s.chars().collect();
        let dim = 1 << letters.len();
        let mut m = CMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut v = one;
                // letter k acts on qubit k (bit k)
                for (k, &p) in letters.iter().enumerate() {
                    v *= single(p)[r >> k & 1][c >> k & 1];
                }
                m[(r, c)] = v;
            }
        }
        m
    }

    #[test]
    fn raw_vector_normalizes_and_pads() {
        let fm = FeatureMapSpec::new(FeatureMapKind::RawFeatureVector, 2).build().unwrap();
        let e = fm.encode(&[1.0, 1.0]).unwrap();
        let s = evolve_from(e.prep, &e.circuit).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let want = [r, r, 0.0, 0.0];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15 && a.im == 0.0);
        }
        assert!(fm.encode(&[0.0, 0.0]).is_err());
        assert!(fm.encode(&[1.0; 5]).is_err());
    }

    #[test]
    fn invalid_specs() {
        let mut s = FeatureMapSpec::new(FeatureMapKind::PauliFeatureMap, 2);
        s.pauli_strings.clear();
        assert!(s.build().is_err());
        assert!(FeatureMapSpec::new(FeatureMapKind::PauliFeatureMap, 2).with_pauli_strings(&["XYZ"]).build().is_err());
        assert!(FeatureMapSpec::new(FeatureMapKind::ZFeatureMap, 2).with_reps(0).build().is_err());
        let fm = FeatureMapSpec::new(FeatureMapKind::ZFeatureMap, 2).build().unwrap();
        assert!(matches!(fm.encode(&[0.1]), Err(Error::Shape(_))));
    }

    #[test]
    fn deterministic_structure() {
        let s = FeatureMapSpec::new(FeatureMapKind::ZZFeatureMap, 4).with_entanglement(Entanglement::Full).with_reps(2);
        assert_eq!(s.build().unwrap(), s.build().unwrap());
    }
}
