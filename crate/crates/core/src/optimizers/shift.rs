#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;


use crate::circuit::{Binding, Circuit, GateKind, ParamExpr};
use crate::circuitlib::param_symbol;
use crate::error::{Error, Result};

/// Shift rule for one gate kind, as `(shift, coefficient)` pairs:
/// `∂f/∂angle = Σ c · f(angle + s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftRule {
    /// Generator eigenvalues ±½ (or 0, 1): `[f(+π/2) − f(−π/2)] / 2`.
    TwoTerm,
    /// Generator eigenvalues {0, ±½}: frequencies ½ and 1 need four
    /// equidistant shifts.
    FourTerm,
}

impl ShiftRule {
    pub fn for_gate(kind: GateKind) -> Option<Self> {
        match kind {
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::RZZ | GateKind::Phase => Some(Self::TwoTerm),
            GateKind::XXplusYY => Some(Self::FourTerm),
            _ => None,
        }
    }

    pub fn terms(self) -> Vec<(f64, f64)> {
        match self {
            Self::TwoTerm => vec![(PI / 2.0, 0.5), (-PI / 2.0, -0.5)],
            Self::FourTerm => {
                // rescaled angle φ = θ/2 has integer frequencies {1, 2}
                (1..=4)
                    .map(|mu| {
                        let x = (2 * mu - 1) as f64 * PI / 4.0;
                        let sign = if mu % 2 == 1 { 1.0 } else { -1.0 };
                        (2.0 * x, 0.5 * sign / (8.0 * (x / 2.0).sin().powi(2)))
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug)]
struct Occurrence {
    instruction: usize,
    rule: ShiftRule,
    /// `∂ angle / ∂ parameter`.
    chain: ParamExpr,
}

/// Parameter-shift gradient plan over a template circuit whose free symbols
/// are the trainable parameters.
#[derive(Clone, Debug)]
pub struct ParamShift {
    template: Circuit,
    params: Vec<String>,
    occurrences: Vec<Vec<Occurrence>>,
}

impl ParamShift {
    /// With `shared = false` every parameter must drive exactly one gate;
    /// otherwise per-instance terms are summed.
    pub fn new(template: &Circuit, params: &[String], shared: bool) -> Result<Self> {
        let mut occurrences = vec![Vec::new(); params.len()];
        for (idx, inst) in template.instructions().iter().enumerate() {
            let Some(angle) = &inst.angle else { continue };
            for (k, name) in params.iter().enumerate() {
                if !angle.contains(name) {
                    continue;
                }
                let rule = ShiftRule::for_gate(inst.kind).ok_or_else(|| Error::NoShiftRule(format!("{} driven by {name}", inst.kind)))?;
                if !shared && !occurrences[k].is_empty() {
                    return Err(Error::ParameterReuse(name.clone()));
                }
                occurrences[k].push(Occurrence { instruction: idx, rule, chain: angle.derivative(name) });
            }
        }
        Ok(Self { template: template.clone(), params: params.to_vec(), occurrences })
    }

    /// Plan for parameters `θ0 … θ(m−1)`.
    pub fn for_params(template: &Circuit, m: usize, shared: bool) -> Result<Self> {
        let names: Vec<String> = (0..m).map(param_symbol).collect();
        Self::new(template, &names, shared)
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Circuit evaluations per gradient.
    pub fn num_evaluations(&self) -> usize {
        self.occurrences.iter().flatten().map(|o| o.rule.terms().len()).sum()
    }

    pub fn binding(&self, theta: &[f64]) -> Result<Binding> {
        if theta.len() != self.params.len() {
            return Err(Error::Shape(format!("{} values for {} parameters", theta.len(), self.params.len())));
        }
        Ok(self.params.iter().cloned().zip(theta.iter().copied()).collect())
    }

    pub fn bound(&self, theta: &[f64]) -> Result<Circuit> {
        Ok(self.template.bind(&self.binding(theta)?))
    }

    /// Gradient of `eval(bound circuit)` at `theta`.
    pub fn gradient(&self, theta: &[f64], mut eval: impl FnMut(&Circuit) -> Result<f64>) -> Result<Vec<f64>> {
        let binding = self.binding(theta)?;
        let base = self.template.bind(&binding);
        let mut grad = vec![0.0; theta.len()];
        for (k, occ) in self.occurrences.iter().enumerate() {
            for o in occ {
                let chain = o.chain.eval(&binding)?;
                if chain == 0.0 {
                    continue;
                }
                let angle = base.instructions()[o.instruction].bound_angle()?;
                let mut d = 0.0;
                for (s, c) in o.rule.terms() {
                    let mut insts = base.instructions().to_vec();
                    insts[o.instruction].angle = Some(ParamExpr::Const(angle + s));
                    d += c * eval(&base.with_instructions(insts)?)?;
                }
                grad[k] += chain * d;
            }
        }
        Ok(grad)
    }
}

/// Strict two-point gradient for a template in `θ0 … θ(m−1)`: each parameter
/// may drive only one gate.
pub fn param_shift_grad(template: &Circuit, theta: &[f64], eval: impl FnMut(&Circuit) -> Result<f64>) -> Result<Vec<f64>> {
    ParamShift::for_params(template, theta.len(), false)?.gradient(theta, eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Instruction;
    use crate::circuitlib::{AnsatzKind, AnsatzSpec, Entanglement};
    use crate::rng::SimRng;
    use crate::sim::{evolve, ZObservable};

    fn z_expect(c: &Circuit) -> Result<f64> {
        evolve(c)?.expectation(&ZObservable::parity(c.num_qubits()))
    }

    fn finite_diff(template: &Circuit, theta: &[f64], params: &[String]) -> Vec<f64> {
        let h = 1e-5;
        let f = |th: &[f64]| {
            let b: Binding = params.iter().cloned().zip(th.iter().copied()).collect();
            z_expect(&template.bind(&b)).unwrap()
        };
        (0..theta.len())
            .map(|k| {
                let (mut p, mut m) = (theta.to_vec(), theta.to_vec());
                p[k] += h;
                m[k] -= h;
                (f(&p) - f(&m)) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn ry_cosine() {
        let mut c = Circuit::new(1).unwrap();
        c.append(Instruction::rotation(GateKind::RY, &[0], ParamExpr::symbol(param_symbol(0)))).unwrap();
        assert!(param_shift_grad(&c, &[0.0], z_expect).unwrap()[0].abs() < 1e-12);
        assert!((param_shift_grad(&c, &[PI / 2.0], z_expect).unwrap()[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn matches_finite_differences_on_all_ansatz() {
        let mut rng = SimRng::new(17);
        for kind in [AnsatzKind::RealAmplitudes, AnsatzKind::EfficientSU2, AnsatzKind::TwoLocal, AnsatzKind::ExcitationPreserving] {
            let a = AnsatzSpec::new(kind, 3).with_reps(2).with_entanglement(Entanglement::Circular).build().unwrap();
            // a Hadamard layer in front so the excitation-preserving case is not trivial
            let mut c = Circuit::new(3).unwrap();
            for q in 0..3 {
                c.append(Instruction::gate(GateKind::H, &[q])).unwrap();
                c.append(Instruction::rotation(GateKind::RY, &[q], 0.3 * q as f64)).unwrap();
            }
            let template = c.compose(a.circuit()).unwrap();
            let names: Vec<String> = (0..a.num_parameters()).map(param_symbol).collect();
            for _ in 0..20 {
                let theta: Vec<f64> = (0..a.num_parameters()).map(|_| rng.range(-PI, PI)).collect();
                let ps = param_shift_grad(&template, &theta, z_expect).unwrap();
                let fd = finite_diff(&template, &theta, &names);
                for (p, f) in ps.iter().zip(&fd) {
                    assert!((p - f).abs() <= 1e-4 * f.abs().max(1e-2), "{kind:?}: {p} vs {f}");
                }
            }
        }
    }

    #[test]
    fn reuse_is_rejected_unless_shared() {
        let mut c = Circuit::new(2).unwrap();
        let t = ParamExpr::symbol(param_symbol(0));
        c.append(Instruction::rotation(GateKind::RY, &[0], t.clone())).unwrap();
        c.append(Instruction::gate(GateKind::CX, &[0, 1])).unwrap();
        c.append(Instruction::rotation(GateKind::RY, &[1], ParamExpr::scaled(2.0, t))).unwrap();
        assert!(matches!(param_shift_grad(&c, &[0.4], z_expect), Err(Error::ParameterReuse(_))));
        let plan = ParamShift::for_params(&c, 1, true).unwrap();
        let g = plan.gradient(&[0.4], z_expect).unwrap();
        let fd = finite_diff(&c, &[0.4], &[param_symbol(0)]);
        assert!((g[0] - fd[0]).abs() < 1e-6);
    }

    #[test]
    fn non_rotation_parameter_has_no_rule() {
        let mut c = Circuit::new(2).unwrap();
        c.append(Instruction::rotation(GateKind::XXplusYY, &[0, 1], ParamExpr::symbol(param_symbol(0)))).unwrap();
        assert!(ParamShift::for_params(&c, 1, false).is_ok());
        let rule = ShiftRule::FourTerm.terms();
        // f(θ) = cos(θ/2) + sin(θ) has derivative −½·sin(θ/2) + cos(θ)
        let f = |x: f64| (x / 2.0).cos() + x.sin();
        for x in [0.0, 0.7, -2.1] {
            let d: f64 = rule.iter().map(|(s, c)| c * f(x + s)).sum();
            assert!((d - (-0.5 * (x / 2.0).sin() + x.cos())).abs() < 1e-12);
        }
    }
}
