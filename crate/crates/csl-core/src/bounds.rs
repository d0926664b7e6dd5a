//! Collapse-rate phenomenology: the pointer lower bound on lambda, the
//! latent-image enhancement, molecule-diffraction and heating upper
//! bounds, the cosmological consistency check, and the reference table of
//! laboratory/cosmological upper bounds.
//!
//! The amplification law used throughout is `Gamma = lambda * n * N` for
//! a rigid body of `N` nucleons displaced by more than the noise
//! correlation length, with `n` the nucleons inside one correlation cell
//! (`~1e9` for ordinary solid density and `r_C = 1e-5 cm`). The diffraction
//! bound takes the form `lambda < 1 / (N^2 t)` with `N` the molecular
//! weight in Daltons and `t` the coherence time, fixed here at 10 ms.
//! All table comparisons are order-of-magnitude.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::fp;
use crate::{Error, Result};

/// Conventional collapse rate, s^-1.
pub const CONVENTIONAL_LAMBDA: f64 = 1e-17;

/// Latent-image enhancement factor over the conventional rate.
pub const ENHANCEMENT_FACTOR: f64 = 1e8;

/// Hubble rate, s^-1.
pub const HUBBLE_RATE: f64 = 2e-18;

/// Reduced Planck constant, J s.
pub const HBAR_JS: f64 = 1.0546e-34;

/// Nucleon mass, kg.
pub const NUCLEON_MASS_KG: f64 = 1.6726e-27;

/// Coherence time calibrating the diffraction bound, s. A single 10 ms
/// constant reproduces the confrontation masses (~1e9 Da conventional,
/// ~1e5 Da enhanced) at order of magnitude.
pub const DIFFRACTION_COHERENCE_TIME_S: f64 = 1e-2;

/// Nucleons per noise correlation cell in an ordinary solid
/// (1e24 nucleons/cm^3 * r_C^3 with r_C = 1e-5 cm).
pub const SOLID_NUCLEONS_PER_CELL: f64 = 1e9;

/// The closed set of dimensions the phenomenology handles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Dimension {
    /// s^-1
    Rate,
    /// s
    Time,
    /// cm
    LengthCm,
    /// Da
    MassDa,
    /// dimensionless count
    NucleonCount,
    /// W
    EnergyRate,
    Dimensionless,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Rate => "rate (s^-1)",
            Dimension::Time => "time (s)",
            Dimension::LengthCm => "length (cm)",
            Dimension::MassDa => "mass (Da)",
            Dimension::NucleonCount => "nucleon count",
            Dimension::EnergyRate => "energy rate (W)",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(name)
    }
}

/// A value tagged with its dimension; arithmetic is rejected unless the
/// dimensions combine within the closed set above.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysicalQuantity {
    pub value: f64,
    pub dimension: Dimension,
}

impl PhysicalQuantity {
    pub fn new(value: f64, dimension: Dimension) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::InvalidInput {
                what: "physical quantities must be finite",
            });
        }
        Ok(Self { value, dimension })
    }

    pub fn rate(value: f64) -> Result<Self> {
        Self::new(value, Dimension::Rate)
    }

    pub fn time(value: f64) -> Result<Self> {
        Self::new(value, Dimension::Time)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dimension != other.dimension {
            return Err(Error::UnitMismatch {
                left: self.dimension,
                right: other.dimension,
                op: "add",
            });
        }
        Self::new(self.value + other.value, self.dimension)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.dimension != other.dimension {
            return Err(Error::UnitMismatch {
                left: self.dimension,
                right: other.dimension,
                op: "subtract",
            });
        }
        Self::new(self.value - other.value, self.dimension)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        use Dimension::*;
        let dimension = match (self.dimension, other.dimension) {
            (Dimensionless, d) | (d, Dimensionless) => d,
            (Rate, Time) | (Time, Rate) => Dimensionless,
            (l, r) => {
                return Err(Error::UnitMismatch {
                    left: l,
                    right: r,
                    op: "multiply",
                })
            }
        };
        Self::new(self.value * other.value, dimension)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        use Dimension::*;
        let dimension = match (self.dimension, other.dimension) {
            (l, r) if l == r => Dimensionless,
            (d, Dimensionless) => d,
            (Dimensionless, Time) => Rate,
            (Dimensionless, Rate) => Time,
            (l, r) => {
                return Err(Error::UnitMismatch {
                    left: l,
                    right: r,
                    op: "divide",
                })
            }
        };
        Self::new(self.value / other.value, dimension)
    }
}

/// A measuring pointer: total nucleon count, nucleons per correlation
/// cell, and the time within which it must settle.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointerSpec {
    pub n_total: f64,
    pub n_per_cell: f64,
    pub t_required_s: f64,
}

impl PointerSpec {
    /// The reference pointer: 1e15 nucleons, solid density, 1e-7 s.
    pub fn reference() -> Self {
        Self {
            n_total: 1e15,
            n_per_cell: SOLID_NUCLEONS_PER_CELL,
            t_required_s: 1e-7,
        }
    }

    fn validate(&self) -> Result<()> {
        crate::error::require_positive("n_total", self.n_total)?;
        crate::error::require_positive("n_per_cell", self.n_per_cell)?;
        crate::error::require_positive("t_required_s", self.t_required_s)?;
        Ok(())
    }
}

/// Effective squared mass-difference amplification `n * N` of a rigid
/// displaced pointer. Linear in both factors.
pub fn amplification_factor(spec: &PointerSpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.n_per_cell * spec.n_total)
}

/// Lower bound on lambda so the pointer settles within its required
/// time: `1 / (n * N * t)`.
pub fn lambda_lower_bound_pointer(spec: &PointerSpec) -> Result<f64> {
    Ok(1.0 / (amplification_factor(spec)? * spec.t_required_s))
}

/// The latent-image enhanced rate: `base * 1e8`.
pub fn enhanced_lambda(base: f64) -> Result<f64> {
    crate::error::require_positive("base", base)?;
    Ok(base * ENHANCEMENT_FACTOR)
}

/// Upper bound on lambda from interference of a molecule of `mass_da`
/// Daltons held coherent for `coherence_time_s`: `1 / (N^2 t)`. Valid
/// for molecules smaller than the correlation length; falls off as the
/// inverse square of the molecular weight.
pub fn diffraction_lambda_bound(mass_da: f64, coherence_time_s: f64) -> Result<f64> {
    crate::error::require_at_least("mass_da", mass_da, 1.0)?;
    crate::error::require_positive("coherence_time_s", coherence_time_s)?;
    Ok(1.0 / (mass_da * mass_da * coherence_time_s))
}

/// Molecular weight whose diffraction bound reaches `lambda_target`:
/// `1 / sqrt(lambda t)`. Inverse of [`diffraction_lambda_bound`] in the
/// mass.
pub fn mass_to_confront(lambda_target: f64, coherence_time_s: f64) -> Result<f64> {
    crate::error::require_positive("lambda_target", lambda_target)?;
    crate::error::require_positive("coherence_time_s", coherence_time_s)?;
    Ok(1.0 / fp::sqrt(lambda_target * coherence_time_s))
}

/// Spontaneous heating power per particle,
/// `dE/dt = 3 lambda hbar^2 / (4 m r_C^2)`, the standard collapse-model
/// heating formula. SI units: mass in kg, correlation length in m.
pub fn heating_rate_per_particle(lambda: f64, mass_kg: f64, r_c_m: f64) -> Result<f64> {
    crate::error::require_positive("lambda", lambda)?;
    crate::error::require_positive("mass_kg", mass_kg)?;
    crate::error::require_positive("r_c_m", r_c_m)?;
    Ok(3.0 * lambda * HBAR_JS * HBAR_JS / (4.0 * mass_kg * r_c_m * r_c_m))
}

/// Kind of evidence behind an upper bound on lambda.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundKind {
    Laboratory,
    Cosmological,
}

/// One named upper bound on lambda, stored as its order-of-magnitude
/// distance above the conventional rate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentBound {
    pub name: String,
    pub kind: BoundKind,
    pub orders_above_conventional: i32,
    /// `10^(-17 + orders_above_conventional)` s^-1, by construction.
    pub lambda_max: f64,
}

impl ExperimentBound {
    pub fn new(name: &str, kind: BoundKind, orders_above_conventional: i32) -> Self {
        Self {
            name: String::from(name),
            kind,
            orders_above_conventional,
            lambda_max: fp::pow10(-17 + orders_above_conventional),
        }
    }

    /// Distance in orders of magnitude from the enhanced rate 1e-9 s^-1;
    /// negative means the bound excludes the enhanced rate.
    pub fn orders_above_enhanced(&self) -> i32 {
        self.orders_above_conventional - 8
    }
}

/// The reference table of upper bounds on lambda (for the conventional
/// correlation length), laboratory rows first.
pub fn bounds_table() -> Vec<ExperimentBound> {
    use BoundKind::*;
    alloc::vec![
        ExperimentBound::new("Fullerene diffraction experiments", Laboratory, 13),
        ExperimentBound::new("Decay of supercurrents (SQUIDs)", Laboratory, 14),
        ExperimentBound::new("Spontaneous X-ray emission from Ge", Laboratory, 6),
        ExperimentBound::new("Proton decay", Laboratory, 18),
        ExperimentBound::new("Mirror cantilever interferometric experiment", Laboratory, 9),
        ExperimentBound::new("Dissociation of cosmic hydrogen", Cosmological, 17),
        ExperimentBound::new("Heating of intergalactic medium (IGM)", Cosmological, 8),
        ExperimentBound::new("Heating of interstellar dust grains", Cosmological, 15),
    ]
}

/// Whether a collapse rate sits close enough to the Hubble rate for a
/// cosmological origin of the noise to be plausible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CosmologyFlag {
    Compatible,
    Strained,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CosmologyReport {
    pub lambda: f64,
    pub hubble_rate: f64,
    /// `lambda / H0`, dimensionless.
    pub ratio: f64,
    pub flag: CosmologyFlag,
}

/// Compares a collapse rate against the Hubble rate; within two orders
/// of magnitude counts as compatible with a cosmological origin.
pub fn cosmology_consistency(lambda: f64) -> Result<CosmologyReport> {
    crate::error::require_positive("lambda", lambda)?;
    let ratio = PhysicalQuantity::rate(lambda)?
        .div(&PhysicalQuantity::rate(HUBBLE_RATE)?)?
        .value;
    let flag = if (0.1..=100.0).contains(&ratio) {
        CosmologyFlag::Compatible
    } else {
        CosmologyFlag::Strained
    };
    Ok(CosmologyReport {
        lambda,
        hubble_rate: HUBBLE_RATE,
        ratio,
        flag,
    })
}
