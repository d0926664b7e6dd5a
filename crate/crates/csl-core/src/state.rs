//! Complex state vectors over finite labeled bases and the diagonal
//! observables the collapse noise couples to.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fp;
use crate::{Error, Result};

/// Tolerance on `|sum |c_i|^2 - 1|` below which a state counts as unit norm.
pub const UNIT_NORM_TOL: f64 = 1e-9;

/// Norms below this are treated as identically zero.
pub const ZERO_NORM_TOL: f64 = 1e-300;

/// Complex amplitude vector over a finite labeled basis.
///
/// Labels are opaque identifiers; all physics lives in the amplitudes and
/// in the eigenvalues of the observables applied to the state.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StateVector {
    labels: Vec<String>,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(labels: Vec<String>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidInput {
                what: "state vector needs at least one basis state",
            });
        }
        if labels.len() != amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: amplitudes.len(),
                found: labels.len(),
            });
        }
        if !amplitudes.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidInput {
                what: "amplitudes must be finite",
            });
        }
        Ok(Self { labels, amplitudes })
    }

    /// Builds a state with default labels `"0"`, `"1"`, ...
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let labels = (0..amplitudes.len()).map(|i| format!("{i}")).collect();
        Self::new(labels, amplitudes)
    }

    /// Two-level state `(sqrt(1-p1), sqrt(p1))` with Born weight `p1` on
    /// the second basis state.
    pub fn two_level(p1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p1) {
            return Err(Error::InvalidInput {
                what: "p1 must lie in [0, 1]",
            });
        }
        Self::from_amplitudes(alloc::vec![
            Complex64::new(fp::sqrt(1.0 - p1), 0.0),
            Complex64::new(fp::sqrt(p1), 0.0),
        ])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Rescales to unit norm by a positive real factor; the global phase
    /// is untouched. Idempotent on already normalized states.
    pub fn normalize(&self) -> Result<Self> {
        let ns = self.norm_sqr();
        if ns <= ZERO_NORM_TOL {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / fp::sqrt(ns);
        let amplitudes = self.amplitudes.iter().map(|c| c * scale).collect();
        Ok(Self {
            labels: self.labels.clone(),
            amplitudes,
        })
    }

    /// Born weights `p_i = |c_i|^2`. Requires a normalized state.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        let ns = self.norm_sqr();
        if fp::abs(ns - 1.0) > UNIT_NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr: ns });
        }
        Ok(self.amplitudes.iter().map(|c| c.norm_sqr()).collect())
    }
}

/// Diagonal observable: one real eigenvalue per basis index, plus a unit
/// tag naming what the eigenvalues count (for the CSL coupling this is the
/// effective nucleon number per correlation cell).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagonalObservable {
    eigenvalues: Vec<f64>,
    unit: String,
}

impl DiagonalObservable {
    pub fn new(eigenvalues: Vec<f64>, unit: impl Into<String>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::InvalidInput {
                what: "observable needs at least one eigenvalue",
            });
        }
        if !eigenvalues.iter().all(|m| m.is_finite()) {
            return Err(Error::InvalidInput {
                what: "eigenvalues must be finite",
            });
        }
        Ok(Self {
            eigenvalues,
            unit: unit.into(),
        })
    }

    /// Two-level observable `(0, delta_m)` in dimensionless counts.
    pub fn two_level(delta_m: f64) -> Self {
        Self {
            eigenvalues: alloc::vec![0.0, delta_m],
            unit: String::from("count"),
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn check_dim(&self, state: &StateVector) -> Result<()> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: state.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// `<M> = sum_i p_i M_i`.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        self.check_dim(state)?;
        let probs = state.probabilities()?;
        Ok(probs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(p, m)| p * m)
            .sum())
    }

    /// `<M^2> - <M>^2`, clamped at zero against rounding.
    pub fn variance(&self, state: &StateVector) -> Result<f64> {
        self.check_dim(state)?;
        let probs = state.probabilities()?;
        let mut mean = 0.0;
        let mut mean_sq = 0.0;
        for (p, m) in probs.iter().zip(&self.eigenvalues) {
            mean += p * m;
            mean_sq += p * m * m;
        }
        let v = mean_sq - mean * mean;
        Ok(if v > 0.0 { v } else { 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn state(amps: &[Complex64]) -> StateVector {
        StateVector::from_amplitudes(amps.to_vec()).unwrap()
    }

    #[test]
    fn normalize_rescales_positively() {
        let s = state(&[c(2.0, 0.0), c(0.0, 0.0)]).normalize().unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert_eq!(s.amplitudes()[1], c(0.0, 0.0));
    }

    #[test]
    fn normalize_is_identity_on_unit_states() {
        let r = 1.0 / 2.0_f64.sqrt();
        let s = state(&[c(r, 0.0), c(r, 0.0)]);
        let n = s.normalize().unwrap();
        assert!((n.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((n.amplitudes()[0] - s.amplitudes()[0]).norm() < 1e-15);
    }

    #[test]
    fn normalize_three_four_five() {
        // (3, 4i) -> (0.6, 0.8i)
        let s = state(&[c(3.0, 0.0), c(0.0, 4.0)]).normalize().unwrap();
        assert!((s.amplitudes()[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[1] - c(0.0, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn normalize_zero_norm_errors() {
        let s = state(&[c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(s.normalize().unwrap_err(), Error::ZeroNorm);
    }

    #[test]
    fn probabilities_modulus_squared() {
        let s = state(&[c(0.3_f64.sqrt(), 0.0), c(0.0, 0.7_f64.sqrt())]);
        let p = s.probabilities().unwrap();
        assert!((p[0] - 0.3).abs() < 1e-12);
        assert!((p[1] - 0.7).abs() < 1e-12);
        assert!(((p[0] + p[1]) - 1.0).abs() < 1e-12);

        let basis = state(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(basis.probabilities().unwrap(), alloc::vec![1.0, 0.0]);

        let s = state(&[c(0.6, 0.0), c(0.0, 0.8)]);
        let p = s.probabilities().unwrap();
        assert!((p[0] - 0.36).abs() < 1e-12);
        assert!((p[1] - 0.64).abs() < 1e-12);
    }

    #[test]
    fn probabilities_reject_unnormalized() {
        let s = state(&[c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(
            s.probabilities().unwrap_err(),
            Error::NotNormalized { .. }
        ));
    }

    #[test]
    fn expectation_examples() {
        let m01 = DiagonalObservable::new(alloc::vec![0.0, 1.0], "count").unwrap();
        let eigen = state(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(m01.expectation(&eigen).unwrap(), 0.0);

        let r = 1.0 / 2.0_f64.sqrt();
        let even = state(&[c(r, 0.0), c(r, 0.0)]);
        assert!((m01.expectation(&even).unwrap() - 0.5).abs() < 1e-12);

        let m25 = DiagonalObservable::new(alloc::vec![2.0, 5.0], "count").unwrap();
        let s = state(&[c(0.3_f64.sqrt(), 0.0), c(0.7_f64.sqrt(), 0.0)]);
        assert!((m25.expectation(&s).unwrap() - 4.1).abs() < 1e-12);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let m = DiagonalObservable::new(alloc::vec![0.0, 1.0, 2.0], "count").unwrap();
        let s = state(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(
            m.expectation(&s).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn variance_examples() {
        let m01 = DiagonalObservable::two_level(1.0);
        let eigen = state(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(m01.variance(&eigen).unwrap(), 0.0);

        let r = 1.0 / 2.0_f64.sqrt();
        let even = state(&[c(r, 0.0), c(r, 0.0)]);
        assert!((m01.variance(&even).unwrap() - 0.25).abs() < 1e-12);

        let s = state(&[c(0.3_f64.sqrt(), 0.0), c(0.7_f64.sqrt(), 0.0)]);
        assert!((m01.variance(&s).unwrap() - 0.21).abs() < 1e-12);
    }

    #[test]
    fn variance_zero_exactly_on_eigenstates() {
        let m = DiagonalObservable::new(alloc::vec![3.5, -2.0, 3.5], "count").unwrap();
        let s = state(&[c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]);
        assert_eq!(m.variance(&s).unwrap(), 0.0);
    }

    proptest! {
        // Born weights do not see a global phase.
        #[test]
        fn probabilities_phase_invariant(phi in 0.0..core::f64::consts::TAU, p1 in 0.0..=1.0f64) {
            let s = StateVector::two_level(p1).unwrap();
            let phase = Complex64::new(phi.cos(), phi.sin());
            let rotated = StateVector::from_amplitudes(
                s.amplitudes().iter().map(|c| c * phase).collect(),
            ).unwrap();
            let p = s.probabilities().unwrap();
            let q = rotated.probabilities().unwrap();
            prop_assert!((p[0] - q[0]).abs() < 1e-12);
            prop_assert!((p[1] - q[1]).abs() < 1e-12);
        }

        // normalize . normalize = normalize
        #[test]
        fn normalize_idempotent(re0 in -5.0..5.0f64, im0 in -5.0..5.0f64,
                                re1 in -5.0..5.0f64, im1 in -5.0..5.0f64) {
            prop_assume!(re0 * re0 + im0 * im0 + re1 * re1 + im1 * im1 > 1e-6);
            let s = state(&[c(re0, im0), c(re1, im1)]);
            let once = s.normalize().unwrap();
            let twice = once.normalize().unwrap();
            for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-14);
            }
        }
    }
}
