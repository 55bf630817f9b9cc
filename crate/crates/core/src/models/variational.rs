//! Shared training and scoring for circuit classifiers of the form
//! `⟨obs⟩` after `feature_map(x)` followed by a trainable template.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

use crate::circuit::Circuit;
use crate::circuitlib::{Encoded, FeatureMap};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::optimizers::{minimize, Optimized, OptimizerConfig, ParamShift};
use crate::rng::SimRng;
use crate::sim::{evolve_from, Executor, StateVector, ZObservable};

enum Prepared {
    /// Encoded state, cached for exact evaluation.
    State(StateVector),
    Circuit(Encoded),
}

pub(crate) struct Variational<'a> {
    pub feature_map: &'a FeatureMap,
    pub template: &'a Circuit,
    pub num_params: usize,
    pub observable: &'a ZObservable,
    /// Parameters may drive several gates (weight sharing).
    pub shared: bool,
}

impl Variational<'_> {
    fn prepare(&self, x: &Matrix, ex: &Executor) -> Result<Vec<Prepared>> {
        x.iter_rows()
            .map(|row| {
                let enc = self.feature_map.encode(row)?;
                Ok(if ex.is_exact() {
                    Prepared::State(evolve_from(enc.prep, &enc.circuit)?)
                } else {
                    Prepared::Circuit(enc)
                })
            })
            .collect()
    }

    fn score(&self, p: &Prepared, bound: &Circuit, ex: &Executor, stream: u64) -> Result<f64> {
        let v = match p {
            Prepared::State(s) => evolve_from(s.clone(), bound)?.expectation(self.observable)?,
            Prepared::Circuit(enc) => ex.expectation(&enc.prep, &enc.circuit.compose(bound)?, self.observable, stream)?,
        };
        Ok(v.clamp(-1.0, 1.0))
    }

    pub fn scores(&self, x: &Matrix, theta: &[f64], ex: &Executor, stream_base: u64) -> Result<Vec<f64>> {
        let plan = ParamShift::for_params(self.template, self.num_params, true)?;
        let bound = plan.bound(theta)?;
        let prepared = self.prepare(x, ex)?;
        prepared.iter().enumerate().map(|(i, p)| self.score(p, &bound, ex, stream_base + i as u64)).collect()
    }

    /// Seeded uniform start in `[-scale, scale]`.
    pub fn initial_theta(&self, seed: u64, scale: f64) -> Vec<f64> {
        let mut rng = SimRng::new(seed ^ 0x5eed_0001);
        (0..self.num_params).map(|_| rng.range(-scale, scale)).collect()
    }

    fn mse_gradient(
        &self,
        plan: &ParamShift,
        prepared: &[Prepared],
        y: &[f64],
        theta: &[f64],
        ex: &Executor,
        next: &dyn Fn() -> u64,
    ) -> Result<Vec<f64>> {
        let bound = plan.bound(theta)?;
        let n = y.len() as f64;
        let mut g = vec![0.0; theta.len()];
        for (p, &yi) in prepared.iter().zip(y) {
            let f = self.score(p, &bound, ex, next())?;
            let gi = plan.gradient(theta, |c| self.score(p, c, ex, next()))?;
            let w = 2.0 * (f - yi) / n;
            g.iter_mut().zip(gi).for_each(|(a, b)| *a += w * b);
        }
        Ok(g)
    }

    /// Parameter-shift gradient of the mean squared error at `theta`.
    pub fn loss_gradient(&self, x: &Matrix, y: &[f64], theta: &[f64], ex: &Executor) -> Result<Vec<f64>> {
        let plan = ParamShift::for_params(self.template, self.num_params, self.shared)?;
        let prepared = self.prepare(x, ex)?;
        let stream = Cell::new(1u64 << 45);
        let next = || {
            let s = stream.get();
            stream.set(s + 1);
            s
        };
        self.mse_gradient(&plan, &prepared, y, theta, ex, &next)
    }

    /// Minimizes the mean squared error `mean (f(x_i) − y_i)²`.
    pub fn train(&self, x: &Matrix, y: &[f64], theta0: &[f64], cfg: &OptimizerConfig, ex: &Executor) -> Result<Optimized> {
        let plan = ParamShift::for_params(self.template, self.num_params, self.shared)?;
        let prepared = self.prepare(x, ex)?;
        let n = y.len() as f64;
        // shot-mode calls draw fresh streams in a fixed order
        let stream = Cell::new(1u64 << 40);
        let next = || {
            let s = stream.get();
            stream.set(s + 1);
            s
        };
        let loss = |theta: &[f64]| -> Result<f64> {
            let bound = plan.bound(theta)?;
            let mut total = 0.0;
            for (p, &yi) in prepared.iter().zip(y) {
                let f = self.score(p, &bound, ex, next())?;
                total += (f - yi) * (f - yi);
            }
            Ok(total / n)
        };
        let mut grad = |theta: &[f64]| self.mse_gradient(&plan, &prepared, y, theta, ex, &next);
        minimize(cfg, loss, theta0, Some(&mut grad))
    }
}
