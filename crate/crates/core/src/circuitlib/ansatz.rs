use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{param_symbol, Entanglement};
use crate::circuit::{Binding, Circuit, GateKind, Instruction, ParamExpr};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    RealAmplitudes,
    #[serde(rename = "efficient_su2")]
    EfficientSU2,
    TwoLocal,
    ExcitationPreserving,
}

impl core::str::FromStr for AnsatzKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "").as_str() {
            "realamplitudes" => Ok(Self::RealAmplitudes),
            "efficientsu2" => Ok(Self::EfficientSU2),
            "twolocal" => Ok(Self::TwoLocal),
            "excitationpreserving" => Ok(Self::ExcitationPreserving),
            _ => Err(Error::InvalidArgument(format!("unknown ansatz `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub num_qubits: usize,
    #[serde(default = "one")]
    pub reps: usize,
    #[serde(default)]
    pub entanglement: Entanglement,
    /// Single-qubit rotation kinds per layer; TwoLocal only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rotation_blocks: Vec<GateKind>,
}

fn one() -> usize {
    1
}

impl AnsatzSpec {
    pub fn new(kind: AnsatzKind, num_qubits: usize) -> Self {
        let rotation_blocks = if kind == AnsatzKind::TwoLocal { vec![GateKind::RX, GateKind::RZ] } else { Vec::new() };
        Self { kind, num_qubits, reps: 1, entanglement: Entanglement::Linear, rotation_blocks }
    }

    pub fn with_reps(mut self, reps: usize) -> Self {
        self.reps = reps;
        self
    }

    pub fn with_entanglement(mut self, e: Entanglement) -> Self {
        self.entanglement = e;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::EmptyRegister);
        }
        if self.kind == AnsatzKind::TwoLocal {
            if self.rotation_blocks.is_empty() {
                return Err(Error::InvalidArgument("TwoLocal needs at least one rotation block".into()));
            }
            let allowed = [GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::Phase];
            if let Some(bad) = self.rotation_blocks.iter().find(|k| !allowed.contains(k)) {
                return Err(Error::InvalidArgument(format!("unsupported rotation block {bad}")));
            }
        }
        Ok(())
    }

    fn rotation_layer(&self) -> Vec<GateKind> {
        match self.kind {
            AnsatzKind::RealAmplitudes => vec![GateKind::RY],
            AnsatzKind::EfficientSU2 => vec![GateKind::RY, GateKind::RZ],
            AnsatzKind::TwoLocal => self.rotation_blocks.clone(),
            AnsatzKind::ExcitationPreserving => vec![GateKind::RZ],
        }
    }

    /// Trainable parameter count.
    pub fn num_parameters(&self) -> usize {
        let n = self.num_qubits;
        let rot = self.rotation_layer().len() * n * (self.reps + 1);
        match self.kind {
            AnsatzKind::ExcitationPreserving => rot + self.reps * self.entanglement.pairs(n).len(),
            _ => rot,
        }
    }

    pub fn build(&self) -> Result<Ansatz> {
        self.validate()?;
        let n = self.num_qubits;
        let layer = self.rotation_layer();
        let pairs = self.entanglement.pairs(n);
        let mut c = Circuit::new(n)?;
        let mut k = 0;
        let mut next = || {
            let s = ParamExpr::symbol(param_symbol(k));
            k += 1;
            s
        };
        for r in 0..=self.reps {
            for &kind in &layer {
                for q in 0..n {
                    c.append(Instruction::rotation(kind, &[q], next()))?;
                }
            }
            if r == self.reps {
                break;
            }
            for &(a, b) in &pairs {
                let inst = match self.kind {
                    AnsatzKind::ExcitationPreserving => Instruction::rotation(GateKind::XXplusYY, &[a, b], next()),
                    _ => Instruction::gate(GateKind::CX, &[a, b]),
                };
                c.append(inst)?;
            }
        }
        let num_parameters = self.num_parameters();
        debug_assert_eq!(c.free_symbols().len(), num_parameters);
        Ok(Ansatz { spec: self.clone(), circuit: c, num_parameters })
    }
}

/// A built ansatz with symbols `θ0 … θ(m−1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ansatz {
    spec: AnsatzSpec,
    circuit: Circuit,
    num_parameters: usize,
}

impl Ansatz {
    pub fn spec(&self) -> &AnsatzSpec {
        &self.spec
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn num_parameters(&self) -> usize {
        self.num_parameters
    }

    pub fn binding(&self, theta: &[f64]) -> Result<Binding> {
        if theta.len() != self.num_parameters {
            return Err(Error::Shape(format!("{} parameters for an ansatz with {}", theta.len(), self.num_parameters)));
        }
        Ok(theta.iter().enumerate().map(|(k, &v)| (param_symbol(k), v)).collect())
    }

    pub fn bound(&self, theta: &[f64]) -> Result<Circuit> {
        Ok(self.circuit.bind(&self.binding(theta)?))
    }
}
