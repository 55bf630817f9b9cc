//! Classical optimizers for the hybrid training loop and the parameter-shift
//! gradient.

mod shift;

#[allow(unused_imports)] // inherent float methods shadow it when std is linked
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub use shift::{param_shift_grad, ParamShift, ShiftRule};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    Spsa,
    Adam,
    GradientDescent,
    /// Nelder–Mead; stands in for COBYLA.
    DerivativeFreeSimplex,
}

impl core::str::FromStr for OptimizerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "spsa" => Ok(Self::Spsa),
            "adam" => Ok(Self::Adam),
            "gradientdescent" | "gd" => Ok(Self::GradientDescent),
            "derivativefreesimplex" | "neldermead" | "simplex" | "cobyla" => Ok(Self::DerivativeFreeSimplex),
            _ => Err(Error::InvalidArgument(alloc::format!("unknown optimizer `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub max_iters: usize,
    /// Objective-evaluation budget, checked between iterations.
    pub max_evals: Option<usize>,
    /// Step size for ADAM and gradient descent.
    pub learning_rate: f64,
    pub seed: u64,
    /// Stop as soon as the recorded loss is at or below this value.
    pub tolerance: Option<f64>,
    pub spsa_a: f64,
    pub spsa_c: f64,
    pub spsa_alpha: f64,
    pub spsa_gamma: f64,
    /// Stability constant `A`; defaults to `max_iters / 10`.
    pub spsa_stability: Option<f64>,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Initial simplex edge length.
    pub simplex_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            kind: OptimizerKind::Spsa,
            max_iters: 100,
            max_evals: None,
            learning_rate: 0.1,
            seed: 0,
            tolerance: None,
            spsa_a: 0.2,
            spsa_c: 0.1,
            spsa_alpha: 0.602,
            spsa_gamma: 0.101,
            spsa_stability: None,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            simplex_step: 0.5,
        }
    }
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind, max_iters: usize) -> Self {
        Self { kind, max_iters, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning_rate", self.learning_rate),
            ("spsa_a", self.spsa_a),
            ("spsa_c", self.spsa_c),
            ("adam_epsilon", self.adam_epsilon),
            ("simplex_step", self.simplex_step),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(alloc::format!("{name} must be positive")));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return Err(Error::InvalidArgument("ADAM betas must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One loss-trace row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub loss: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Optimized {
    pub theta: Vec<f64>,
    /// Last recorded loss (for SPSA, the mean of the final ± pair).
    pub loss: f64,
    /// Iteration 0 is the starting point.
    pub trace: Vec<TraceEntry>,
    pub evaluations: usize,
}

/// Gradient callback.
pub type GradFn<'a> = dyn FnMut(&[f64]) -> Result<Vec<f64>> + 'a;

struct Tracker<'f, F> {
    f: F,
    evaluations: usize,
    trace: Vec<TraceEntry>,
    _p: core::marker::PhantomData<&'f ()>,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Tracker<'_, F> {
    fn eval(&mut self, theta: &[f64], iteration: usize) -> Result<f64> {
        self.evaluations += 1;
        let v = (self.f)(theta)?;
        if v.is_nan() {
            return Err(Error::NanLoss { iteration, trace: self.trace.iter().map(|t| t.loss).collect() });
        }
        Ok(v)
    }

    fn record(&mut self, iteration: usize, loss: f64) {
        self.trace.push(TraceEntry { iteration, loss, evaluations: self.evaluations });
    }
}

/// Minimizes `f` from `theta0`. `grad` is used by ADAM and gradient descent;
/// without it they fall back to central finite differences.
pub fn minimize<F>(config: &OptimizerConfig, f: F, theta0: &[f64], grad: Option<&mut GradFn<'_>>) -> Result<Optimized>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    config.validate()?;
    if theta0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut t = Tracker { f, evaluations: 0, trace: Vec::new(), _p: core::marker::PhantomData };
    let mut theta = theta0.to_vec();
    let mut loss = t.eval(&theta, 0)?;
    t.record(0, loss);
    let done = |loss: f64, evals: usize| {
        config.tolerance.is_some_and(|tol| loss <= tol) || config.max_evals.is_some_and(|m| evals >= m)
    };
    if !done(loss, t.evaluations) && !theta.is_empty() {
        loss = match config.kind {
            OptimizerKind::Spsa => spsa(config, &mut t, &mut theta, done)?,
            OptimizerKind::Adam | OptimizerKind::GradientDescent => gradient_based(config, &mut t, &mut theta, grad, done)?,
            OptimizerKind::DerivativeFreeSimplex => nelder_mead(config, &mut t, &mut theta, loss, done)?,
        };
    }
    Ok(Optimized { theta, loss, trace: t.trace, evaluations: t.evaluations })
}

fn spsa<F: FnMut(&[f64]) -> Result<f64>>(
    cfg: &OptimizerConfig,
    t: &mut Tracker<'_, F>,
    theta: &mut [f64],
    done: impl Fn(f64, usize) -> bool,
) -> Result<f64> {
    let mut rng = SimRng::new(cfg.seed);
    let big_a = cfg.spsa_stability.unwrap_or(cfg.max_iters as f64 / 10.0);
    let mut plus = theta.to_vec();
    let mut minus = theta.to_vec();
    let mut loss = f64::NAN;
    for k in 0..cfg.max_iters {
        let ak = cfg.spsa_a / (k as f64 + 1.0 + big_a).powf(cfg.spsa_alpha);
        let ck = cfg.spsa_c / (k as f64 + 1.0).powf(cfg.spsa_gamma);
        let delta: Vec<f64> = (0..theta.len()).map(|_| rng.sign()).collect();
        for i in 0..theta.len() {
            plus[i] = theta[i] + ck * delta[i];
            minus[i] = theta[i] - ck * delta[i];
        }
        let fp = t.eval(&plus, k + 1)?;
        let fm = t.eval(&minus, k + 1)?;
        let g = (fp - fm) / (2.0 * ck);
        for i in 0..theta.len() {
            // Δ_i = ±1, so 1/Δ_i = Δ_i
            theta[i] -= ak * g * delta[i];
        }
        loss = 0.5 * (fp + fm);
        t.record(k + 1, loss);
        if done(loss, t.evaluations) {
            break;
        }
    }
    Ok(loss)
}

fn finite_difference<F: FnMut(&[f64]) -> Result<f64>>(t: &mut Tracker<'_, F>, theta: &[f64], it: usize) -> Result<Vec<f64>> {
    let h = 1e-5;
    let mut x = theta.to_vec();
    let mut g = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        x[i] = theta[i] + h;
        let fp = t.eval(&x, it)?;
        x[i] = theta[i] - h;
        let fm = t.eval(&x, it)?;
        x[i] = theta[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    Ok(g)
}

fn gradient_based<F: FnMut(&[f64]) -> Result<f64>>(
    cfg: &OptimizerConfig,
    t: &mut Tracker<'_, F>,
    theta: &mut [f64],
    mut grad: Option<&mut GradFn<'_>>,
    done: impl Fn(f64, usize) -> bool,
) -> Result<f64> {
    let n = theta.len();
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut loss = f64::NAN;
    for k in 0..cfg.max_iters {
        let g = match grad.as_mut() {
            Some(gf) => gf(theta)?,
            None => finite_difference(t, theta, k + 1)?,
        };
        if g.len() != n {
            return Err(Error::Shape(alloc::format!("gradient of length {} for {n} parameters", g.len())));
        }
        if g.iter().any(|x| x.is_nan()) {
            return Err(Error::NanLoss { iteration: k + 1, trace: t.trace.iter().map(|e| e.loss).collect() });
        }
        match cfg.kind {
            OptimizerKind::Adam => {
                let step = (k + 1) as i32;
                let c1 = 1.0 - cfg.adam_beta1.powi(step);
                let c2 = 1.0 - cfg.adam_beta2.powi(step);
                for i in 0..n {
                    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
                    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
                    theta[i] -= cfg.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.adam_epsilon);
                }
            }
            _ => theta.iter_mut().zip(&g).for_each(|(x, gi)| *x -= cfg.learning_rate * gi),
        }
        loss = t.eval(theta, k + 1)?;
        t.record(k + 1, loss);
        if done(loss, t.evaluations) {
            break;
        }
    }
    Ok(loss)
}

fn nelder_mead<F: FnMut(&[f64]) -> Result<f64>>(
    cfg: &OptimizerConfig,
    t: &mut Tracker<'_, F>,
    theta: &mut [f64],
    f0: f64,
    done: impl Fn(f64, usize) -> bool,
) -> Result<f64> {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;
    let n = theta.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(theta.to_vec(), f0)];
    for i in 0..n {
        let mut p = theta.to_vec();
        p[i] += cfg.simplex_step;
        let v = t.eval(&p, 0)?;
        simplex.push((p, v));
    }
    let along = |from: &[f64], to: &[f64], s: f64| -> Vec<f64> { from.iter().zip(to).map(|(a, b)| a + s * (b - a)).collect() };
    for k in 0..cfg.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = &simplex[n];
        let spread = simplex[n].1 - best;
        let size = simplex[1..].iter().flat_map(|(p, _)| p.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max);
        if spread.abs() < 1e-15 && size < 1e-12 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (p, _) in &simplex[..n] {
            centroid.iter_mut().zip(p).for_each(|(c, x)| *c += x / n as f64);
        }
        let xr = along(&centroid, &worst.0, -REFLECT);
        let fr = t.eval(&xr, k + 1)?;
        if fr < best {
            let xe = along(&centroid, &worst.0, -EXPAND);
            let fe = t.eval(&xe, k + 1)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let xc = along(&centroid, &xr, CONTRACT);
                let fc = t.eval(&xc, k + 1)?;
                (xc, fc)
            } else {
                let xc = along(&centroid, &worst.0, CONTRACT);
                let fc = t.eval(&xc, k + 1)?;
                (xc, fc)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for (p, v) in simplex.iter_mut().skip(1) {
                    *p = along(&x0, p, SHRINK);
                    *v = t.eval(p, k + 1)?;
                }
            }
        }
        let current = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        t.record(k + 1, current);
        if done(current, t.evaluations) {
            break;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    theta.copy_from_slice(&simplex[0].0);
    Ok(simplex[0].1)
}
