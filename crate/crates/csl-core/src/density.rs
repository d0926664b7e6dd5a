//! Noise-averaged density matrix and its linear evolution equation
//!
//! ```text
//! drho/dt = -i [H, rho] - (lambda/2) [M, [M, rho]]
//! ```
//!
//! With `M` diagonal the double commutator acts entrywise:
//! `[M, [M, rho]]_ij = (M_i - M_j)^2 rho_ij`, so populations are
//! untouched when `H = 0` and off-diagonal entries decay at
//! `(lambda/2) (M_i - M_j)^2`. The equation is an ordinary linear ODE and
//! is integrated with a fixed-step classic Runge-Kutta scheme.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dynamics::{steps_for, CslParams, HERMITIAN_TOL};
use crate::matrix::ComplexMatrix;
use crate::state::{DiagonalObservable, StateVector};
use crate::{Error, Result};

/// Input density matrices must satisfy their invariants this tightly.
pub const DENSITY_TOL: f64 = 1e-12;

/// Hermitian, unit-trace complex matrix over the basis.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (within 1e-12), unit trace (within 1e-12)
    /// and non-negative diagonal (within -1e-12).
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if mat.hermitian_residual() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix {
                reason: "not Hermitian within 1e-12",
            });
        }
        let trace = trace_of(&mat);
        if crate::fp::abs(trace.re - 1.0) > DENSITY_TOL || crate::fp::abs(trace.im) > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix {
                reason: "trace differs from 1 by more than 1e-12",
            });
        }
        for i in 0..mat.dim() {
            if mat.get(i, i).re < -DENSITY_TOL {
                return Err(Error::InvalidDensityMatrix {
                    reason: "negative diagonal entry",
                });
            }
        }
        if !mat
            .data()
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
        {
            return Err(Error::InvalidDensityMatrix {
                reason: "non-finite entry",
            });
        }
        Ok(Self { mat })
    }

    /// Pure-state projector `|psi><psi|` of a normalized state.
    pub fn from_state(state: &StateVector) -> Result<Self> {
        state.probabilities()?;
        let n = state.dim();
        let mut mat = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                mat.set(i, j, state.amplitudes()[i] * state.amplitudes()[j].conj());
            }
        }
        Ok(Self { mat })
    }

    /// Convex combination `a rho1 + (1 - a) rho2`.
    pub fn convex_mix(a: f64, rho1: &Self, rho2: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::InvalidInput {
                what: "mixing weight must lie in [0, 1]",
            });
        }
        rho1.mat.require_dim(rho2.dim())?;
        let mut mat = ComplexMatrix::zeros(rho1.dim());
        for i in 0..rho1.dim() {
            for j in 0..rho1.dim() {
                mat.set(i, j, a * rho1.get(i, j) + (1.0 - a) * rho2.get(i, j));
            }
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.mat.get(i, j)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn trace(&self) -> Complex64 {
        trace_of(&self.mat)
    }

    /// Largest entrywise difference to another density matrix.
    pub fn max_entry_distance(&self, other: &Self) -> f64 {
        let mut max = 0.0f64;
        for (a, b) in self.mat.data().iter().zip(other.mat.data()) {
            let d = (a - b).norm_sqr();
            if d > max {
                max = d;
            }
        }
        crate::fp::sqrt(max)
    }
}

fn trace_of(mat: &ComplexMatrix) -> Complex64 {
    (0..mat.dim()).map(|i| mat.get(i, i)).sum()
}

/// Evolves the averaged density matrix to `t_final` under the
/// double-commutator master equation, with the step size from `params`.
pub fn evolve_density(
    rho: &DensityMatrix,
    hamiltonian: &ComplexMatrix,
    observable: &DiagonalObservable,
    params: &CslParams,
    t_final: f64,
) -> Result<DensityMatrix> {
    params.validate()?;
    crate::error::require_at_least("t_final", t_final, 0.0)?;
    let n = rho.dim();
    hamiltonian.require_dim(n)?;
    hamiltonian.require_hermitian(HERMITIAN_TOL)?;
    if observable.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: observable.dim(),
        });
    }
    if t_final == 0.0 {
        return Ok(rho.clone());
    }
    if params.dt > t_final {
        return Err(Error::InvalidInput {
            what: "dt must not exceed t_final",
        });
    }

    let eigen = observable.eigenvalues();
    let lambda = params.lambda;
    let dt = params.dt;
    let n_steps = steps_for(t_final, dt);

    let generator = |state: &[Complex64], out: &mut [Complex64]| {
        // out = -i (H rho - rho H) - (lambda/2) (M_i - M_j)^2 rho_ij
        for i in 0..n {
            for j in 0..n {
                let mut h_rho = Complex64::new(0.0, 0.0);
                let mut rho_h = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    h_rho += hamiltonian.get(i, k) * state[k * n + j];
                    rho_h += state[i * n + k] * hamiltonian.get(k, j);
                }
                let gap = eigen[i] - eigen[j];
                out[i * n + j] = Complex64::new(0.0, -1.0) * (h_rho - rho_h)
                    - 0.5 * lambda * gap * gap * state[i * n + j];
            }
        }
    };

    let len = n * n;
    let mut state: Vec<Complex64> = rho.mat.data().to_vec();
    let mut k1 = alloc::vec![Complex64::new(0.0, 0.0); len];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut scratch = k1.clone();

    for _ in 0..n_steps {
        generator(&state, &mut k1);
        for i in 0..len {
            scratch[i] = state[i] + 0.5 * dt * k1[i];
        }
        generator(&scratch, &mut k2);
        for i in 0..len {
            scratch[i] = state[i] + 0.5 * dt * k2[i];
        }
        generator(&scratch, &mut k3);
        for i in 0..len {
            scratch[i] = state[i] + dt * k3[i];
        }
        generator(&scratch, &mut k4);
        for i in 0..len {
            state[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    let mut mat = ComplexMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            mat.set(i, j, state[i * n + j]);
        }
    }
    // Invariants hold up to integration tolerance, which over long runs
    // can exceed the strict input gates; construct directly.
    Ok(DensityMatrix { mat })
}
