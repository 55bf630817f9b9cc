//! Circuit intermediate representation.
//!
//! Qubit 0 is the least-significant bit of a basis-state index. Bitstrings are
//! printed with the highest qubit first.

mod gates;
mod param;
pub mod schedule;
mod unitary;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gates::{gate_matrix, GateMatrix};
pub use param::{Binding, ParamExpr};
pub use unitary::{unitary_of, UNITARY_MAX_QUBITS};

/// Fixed gate alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    RX,
    RY,
    RZ,
    Phase,
    CX,
    CZ,
    RZZ,
    SWAP,
    XXplusYY,
    Delay,
}

impl GateKind {
    pub const ALL: [GateKind; 16] = [
        Self::H,
        Self::X,
        Self::Y,
        Self::Z,
        Self::S,
        Self::T,
        Self::RX,
        Self::RY,
        Self::RZ,
        Self::Phase,
        Self::CX,
        Self::CZ,
        Self::RZZ,
        Self::SWAP,
        Self::XXplusYY,
        Self::Delay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::H => "H",
            Self::X => "X",
            Self::Y => "Y",
            Self::Z => "Z",
            Self::S => "S",
            Self::T => "T",
            Self::RX => "RX",
            Self::RY => "RY",
            Self::RZ => "RZ",
            Self::Phase => "Phase",
            Self::CX => "CX",
            Self::CZ => "CZ",
            Self::RZZ => "RZZ",
            Self::SWAP => "SWAP",
            Self::XXplusYY => "XXplusYY",
            Self::Delay => "Delay",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Self::CX | Self::CZ | Self::RZZ | Self::SWAP | Self::XXplusYY => 2,
            _ => 1,
        }
    }

    /// Rotation and phase families carry an angle.
    pub fn takes_angle(self) -> bool {
        matches!(self, Self::RX | Self::RY | Self::RZ | Self::Phase | Self::RZZ | Self::XXplusYY)
    }

    pub fn is_self_inverse(self) -> bool {
        matches!(self, Self::H | Self::X | Self::Y | Self::Z | Self::CX | Self::CZ | Self::SWAP)
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(self) -> bool {
        matches!(self, Self::Z | Self::S | Self::T | Self::RZ | Self::Phase | Self::CZ | Self::RZZ)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("unknown gate `{s}`")))
    }
}

/// One gate application.
///
/// `duration` overrides the scheduler's per-kind duration; a `Delay` always
/// carries one. `decoupled` marks instructions inserted by the
/// dynamic-decoupling pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instruction {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Option<ParamExpr>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<u32>,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub decoupled: bool,
}

impl Instruction {
    pub fn gate(kind: GateKind, qubits: &[usize]) -> Self {
        Self { kind, qubits: qubits.to_vec(), angle: None, duration: None, decoupled: false }
    }

    pub fn rotation(kind: GateKind, qubits: &[usize], angle: impl Into<ParamExpr>) -> Self {
        Self { kind, qubits: qubits.to_vec(), angle: Some(angle.into()), duration: None, decoupled: false }
    }

    pub fn delay(qubit: usize, units: u32) -> Self {
        Self { kind: GateKind::Delay, qubits: alloc::vec![qubit], angle: None, duration: Some(units), decoupled: false }
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::Arity { gate: self.kind.name(), expected: self.kind.arity(), got: self.qubits.len() });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= width {
                return Err(Error::QubitOutOfRange { index: q, width });
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        match (self.kind.takes_angle(), &self.angle) {
            (true, None) => return Err(Error::MissingAngle(self.kind.name())),
            (false, Some(_)) => return Err(Error::UnexpectedAngle(self.kind.name())),
            _ => {}
        }
        if self.kind == GateKind::Delay && self.duration.is_none() {
            return Err(Error::MissingDuration);
        }
        Ok(())
    }

    /// Constant angle, or an error naming the first free symbol.
    pub fn bound_angle(&self) -> Result<f64> {
        match &self.angle {
            Some(ParamExpr::Const(v)) => Ok(*v),
            Some(e) => Err(Error::UnboundSymbol(e.symbols().into_iter().next().unwrap_or_default())),
            None => Err(Error::MissingAngle(self.kind.name())),
        }
    }

    /// Adjoint instruction. The angle, if any, must already be bound.
    pub fn adjoint(&self) -> Result<Self> {
        let mut out = self.clone();
        match self.kind {
            GateKind::S => {
                out.kind = GateKind::Phase;
                out.angle = Some(ParamExpr::Const(-PI / 2.0));
            }
            GateKind::T => {
                out.kind = GateKind::Phase;
                out.angle = Some(ParamExpr::Const(-PI / 4.0));
            }
            k if k.takes_angle() => out.angle = Some(ParamExpr::Const(-self.bound_angle()?)),
            _ => {}
        }
        Ok(out)
    }

    fn symbols_into(&self, out: &mut BTreeSet<String>) {
        if let Some(a) = &self.angle {
            a.collect_symbols(out);
        }
    }
}

/// Ordered gate list over `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    instructions: Vec<Instruction>,
    free_symbols: BTreeSet<String>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::EmptyRegister);
        }
        Ok(Self { num_qubits, instructions: Vec::new(), free_symbols: BTreeSet::new() })
    }

    /// Builds a circuit from instructions, validating each.
    pub fn from_instructions(num_qubits: usize, instructions: Vec<Instruction>) -> Result<Self> {
        let mut c = Self::new(num_qubits)?;
        for inst in instructions {
            c.append(inst)?;
        }
        Ok(c)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn free_symbols(&self) -> &BTreeSet<String> {
        &self.free_symbols
    }

    pub fn is_bound(&self) -> bool {
        self.free_symbols.is_empty()
    }

    pub fn append(&mut self, inst: Instruction) -> Result<()> {
        inst.validate(self.num_qubits)?;
        inst.symbols_into(&mut self.free_symbols);
        self.instructions.push(inst);
        Ok(())
    }

    /// Shorthand for fixed gates; panics on invalid qubits.
    #[cfg(test)]
    pub(crate) fn push(&mut self, kind: GateKind, qubits: &[usize]) {
        self.append(Instruction::gate(kind, qubits)).expect("valid gate placement");
    }

    /// Shorthand for rotations; panics on invalid qubits.
    #[cfg(test)]
    pub(crate) fn push_rot(&mut self, kind: GateKind, qubits: &[usize], angle: impl Into<ParamExpr>) {
        self.append(Instruction::rotation(kind, qubits, angle)).expect("valid gate placement");
    }

    /// Substitutes bound symbols; a partial binding leaves the rest free.
    pub fn bind(&self, binding: &Binding) -> Circuit {
        let instructions: Vec<Instruction> = self
            .instructions
            .iter()
            .map(|inst| {
                let mut out = inst.clone();
                if let Some(a) = &inst.angle {
                    out.angle = Some(a.bind(binding));
                }
                out
            })
            .collect();
        let mut free_symbols = BTreeSet::new();
        instructions.iter().for_each(|i| i.symbols_into(&mut free_symbols));
        Circuit { num_qubits: self.num_qubits, instructions, free_symbols }
    }

    /// `self` followed by `other`.
    pub fn compose(&self, other: &Circuit) -> Result<Circuit> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::WidthMismatch { left: self.num_qubits, right: other.num_qubits });
        }
        let mut out = self.clone();
        out.instructions.extend(other.instructions.iter().cloned());
        out.free_symbols.extend(other.free_symbols.iter().cloned());
        Ok(out)
    }

    /// Reversed adjoint sequence. Requires a fully bound circuit.
    pub fn inverse(&self) -> Result<Circuit> {
        if let Some(s) = self.free_symbols.iter().next() {
            return Err(Error::UnboundSymbol(s.clone()));
        }
        let instructions = self.instructions.iter().rev().map(Instruction::adjoint).collect::<Result<Vec<_>>>()?;
        Ok(Circuit { num_qubits: self.num_qubits, instructions, free_symbols: BTreeSet::new() })
    }

    /// Same instructions on a wider register.
    pub fn widened(&self, num_qubits: usize) -> Result<Circuit> {
        if num_qubits < self.num_qubits {
            return Err(Error::WidthMismatch { left: self.num_qubits, right: num_qubits });
        }
        let mut out = self.clone();
        out.num_qubits = num_qubits;
        Ok(out)
    }

    /// Replaces the instruction list wholesale, revalidating it.
    pub fn with_instructions(&self, instructions: Vec<Instruction>) -> Result<Circuit> {
        Self::from_instructions(self.num_qubits, instructions)
    }

    /// Instruction count per gate kind.
    pub fn count_ops(&self) -> alloc::collections::BTreeMap<GateKind, usize> {
        let mut m = alloc::collections::BTreeMap::new();
        for i in &self.instructions {
            *m.entry(i.kind).or_insert(0) += 1;
        }
        m
    }
}
