use alloc::vec::Vec;

use crate::circuitlib::FeatureMap;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{mix, SimRng};
use crate::sim::{evolve_from, Executor, Mode, StateVector};

/// Fidelity kernel `k(a, b) = |⟨φ(b)|φ(a)⟩|²` of a feature map.
#[derive(Clone, Debug)]
pub struct QuantumKernel {
    pub feature_map: FeatureMap,
}

impl QuantumKernel {
    pub fn new(feature_map: FeatureMap) -> Self {
        Self { feature_map }
    }

    fn states(&self, x: &Matrix) -> Result<Vec<StateVector>> {
        x.iter_rows()
            .map(|r| {
                let e = self.feature_map.encode(r)?;
                evolve_from(e.prep, &e.circuit)
            })
            .collect()
    }

    fn entry(&self, a: &[f64], b: &[f64], sa: Option<&StateVector>, sb: Option<&StateVector>, ex: &Executor, stream: u64) -> Result<f64> {
        let Mode::Shots { shots, .. } = ex.mode else {
            let (sa, sb) = (sa.expect("cached"), sb.expect("cached"));
            return Ok(sa.fidelity(sb).clamp(0.0, 1.0));
        };
        if self.feature_map.is_raw() {
            // amplitude encoding has no gate form here: binomial estimate of
            // the exact overlap
            let p = sa.expect("cached").fidelity(sb.expect("cached")).clamp(0.0, 1.0);
            let mut rng = SimRng::new(mix(ex.seed, stream));
            let hits = (0..shots).filter(|_| rng.bernoulli(p)).count();
            return Ok(hits as f64 / shots as f64);
        }
        let ea = self.feature_map.encode(a)?;
        let eb = self.feature_map.encode(b)?;
        let c = ea.circuit.compose(&eb.circuit.inverse()?)?;
        ex.zero_probability(&ea.prep, &c, stream)
    }

    /// Gram matrix between the rows of `xa` and `xb`; `xb = None` means the
    /// symmetric training case, where only the upper triangle is evaluated.
    pub fn matrix(&self, xa: &Matrix, xb: Option<&Matrix>, ex: &Executor, stream_base: u64) -> Result<Matrix> {
        let width = self.feature_map.spec().num_features();
        for m in core::iter::once(xa).chain(xb) {
            if m.cols() != width {
                return Err(Error::Shape(alloc::format!("{} columns for a kernel on {width} features", m.cols())));
            }
        }
        let cache = ex.is_exact() || self.feature_map.is_raw();
        let sa = if cache { Some(self.states(xa)?) } else { None };
        let sb = match (cache, xb) {
            (true, Some(b)) => Some(self.states(b)?),
            _ => None,
        };
        let (rows, cols) = (xa.rows(), xb.map_or(xa.rows(), Matrix::rows));
        let mut k = Matrix::zeros(rows, cols);
        for i in 0..rows {
            let j0 = if xb.is_none() { i } else { 0 };
            for j in j0..cols {
                let (rb, st_b) = match xb {
                    Some(b) => (b.row(j), sb.as_ref().map(|s| &s[j])),
                    None => (xa.row(j), sa.as_ref().map(|s| &s[j])),
                };
                let stream = stream_base + (i * cols + j) as u64;
                let v = self.entry(xa.row(i), rb, sa.as_ref().map(|s| &s[i]), st_b, ex, stream)?;
                k.row_mut(i)[j] = v;
                if xb.is_none() {
                    k.row_mut(j)[i] = v;
                }
            }
        }
        Ok(k)
    }
}

/// Gram matrix of `feature_map` between `xa` and `xb` (or `xa` with itself).
pub fn quantum_kernel(feature_map: &FeatureMap, xa: &Matrix, xb: Option<&Matrix>, ex: &Executor) -> Result<Matrix> {
    QuantumKernel::new(feature_map.clone()).matrix(xa, xb, ex, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::unitary_of;
    use crate::circuitlib::{FeatureMapKind, FeatureMapSpec};
    use core::f64::consts::PI;
    use std::vec::Vec;

    fn maps(n: usize) -> Vec<FeatureMap> {
        [FeatureMapKind::RawFeatureVector, FeatureMapKind::ZFeatureMap, FeatureMapKind::ZZFeatureMap, FeatureMapKind::PauliFeatureMap]
            .into_iter()
            .map(|k| FeatureMapSpec::new(k, n).with_reps(2).build().unwrap())
            .collect()
    }

    fn random_rows(rng: &mut SimRng, n: usize, d: usize) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.range(0.05, PI)).collect()).collect();
        Matrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn diagonal_is_one() {
        let mut rng = SimRng::new(1);
        for fm in maps(3) {
            let x = random_rows(&mut rng, 5, fm.spec().num_features());
            let k = quantum_kernel(&fm, &x, None, &Executor::exact()).unwrap();
            for i in 0..5 {
                assert!((k[(i, i)] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_qubit_z_map_matches_unitary_oracle() {
        let fm = FeatureMapSpec::new(FeatureMapKind::ZFeatureMap, 1).build().unwrap();
        let x = Matrix::from_rows(&[[0.0], [PI], [0.7]]).unwrap();
        let k = quantum_kernel(&fm, &x, None, &Executor::exact()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let ua = unitary_of(&fm.encode(x.row(i)).unwrap().circuit).unwrap();
                let ub = unitary_of(&fm.encode(x.row(j)).unwrap().circuit).unwrap();
                let amp = ub.adjoint().mul(&ua)[(0, 0)];
                assert!((k[(i, j)] - amp.norm_sqr()).abs() < 1e-12);
            }
        }
        // Phase(2π) is the identity, so 0 and π encode the same state
        assert!((k[(0, 1)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shots_estimate_is_close() {
        let mut rng = SimRng::new(2);
        let fm = FeatureMapSpec::new(FeatureMapKind::ZZFeatureMap, 2).build().unwrap();
        let xa = random_rows(&mut rng, 10, 2);
        let xb = random_rows(&mut rng, 10, 2);
        let exact = quantum_kernel(&fm, &xa, Some(&xb), &Executor::exact()).unwrap();
        let shots = quantum_kernel(&fm, &xa, Some(&xb), &Executor::shots(8192, None, 3)).unwrap();
        for i in 0..10 {
            assert!((exact[(i, i)] - shots[(i, i)]).abs() < 0.03);
        }
    }

    #[test]
    fn width_mismatch() {
        let fm = FeatureMapSpec::new(FeatureMapKind::ZFeatureMap, 2).build().unwrap();
        let x = Matrix::from_rows(&[[0.1, 0.2, 0.3]]).unwrap();
        assert!(matches!(quantum_kernel(&fm, &x, None, &Executor::exact()), Err(Error::Shape(_))));
    }
}
