//! Seeded noise generation: white Wiener increments and a colored
//! alternative whose spectrum is flat below a cutoff frequency and
//! suppressed as 1/omega^2 above it.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::fp;
use crate::{Error, Result};

/// Power spectrum of the noise driving the collapse term.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NoiseSpectrum {
    /// Flat spectrum: increments over `dt` are `N(0, dt)`.
    White,
    /// Ornstein-Uhlenbeck driven process with correlation time
    /// `1/omega_max`: spectrum `omega_max^2 / (omega_max^2 + omega^2)`,
    /// flat below the cutoff and `~ omega^-2` above it. Recovers white
    /// statistics when `omega_max * dt >> 1`.
    Cutoff { omega_max: f64 },
}

/// Derives an independent stream seed from a master seed and an index
/// (trajectory number, game number, ...). SplitMix64 finalizer; the same
/// `(master, index)` pair always yields the same stream.
pub fn derive_stream_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone)]
struct Channel {
    rng: ChaCha12Rng,
    /// Current OU value; unused for the white spectrum.
    ou: f64,
}

/// A bank of independent seeded noise channels, one Wiener (or
/// OU-filtered) process per channel. Identical seed and parameters give a
/// bit-identical increment stream on every channel.
#[derive(Debug, Clone)]
pub struct NoiseProcess {
    seed: u64,
    spectrum: NoiseSpectrum,
    channels: Vec<Channel>,
}

impl NoiseProcess {
    pub fn new(seed: u64, n_channels: usize, spectrum: NoiseSpectrum) -> Result<Self> {
        if n_channels == 0 {
            return Err(Error::InvalidInput {
                what: "noise process needs at least one channel",
            });
        }
        if let NoiseSpectrum::Cutoff { omega_max } = spectrum {
            crate::error::require_positive("omega_max", omega_max)?;
        }
        let channels = (0..n_channels)
            .map(|ch| {
                let mut rng = rng_for(seed, ch as u64);
                // Stationary initial OU value, variance omega_max / 2.
                let ou = match spectrum {
                    NoiseSpectrum::White => 0.0,
                    NoiseSpectrum::Cutoff { omega_max } => {
                        let z: f64 = rng.sample(StandardNormal);
                        z * fp::sqrt(omega_max / 2.0)
                    }
                };
                Channel { rng, ou }
            })
            .collect();
        Ok(Self {
            seed,
            spectrum,
            channels,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spectrum(&self) -> NoiseSpectrum {
        self.spectrum
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Draws the next noise increment on `channel` over a step `dt`.
    ///
    /// White: `N(0, dt)`. Cutoff: the time integral of the OU process over
    /// the step, sampled from the exact joint law of the OU value and its
    /// integral, so the statistics are right at any `omega_max * dt`.
    pub fn increment(&mut self, channel: usize, dt: f64) -> f64 {
        assert!(dt > 0.0, "noise increment needs dt > 0, got {dt}");
        assert!(
            channel < self.channels.len(),
            "channel {channel} out of range for {} channels",
            self.channels.len()
        );
        let ch = &mut self.channels[channel];
        match self.spectrum {
            NoiseSpectrum::White => {
                let z: f64 = ch.rng.sample(StandardNormal);
                z * fp::sqrt(dt)
            }
            NoiseSpectrum::Cutoff { omega_max } => {
                let g = omega_max;
                let e = fp::exp(-g * dt);
                // OU with sigma^2 = g^2 so the stationary variance is g/2
                // and the low-frequency spectral density is 1.
                let v1 = g * (1.0 - e * e) / 2.0;
                let v2 = dt - 2.0 * (1.0 - e) / g + (1.0 - e * e) / (2.0 * g);
                let c12 = (1.0 - e) * (1.0 - e) / 2.0;
                let z1: f64 = ch.rng.sample(StandardNormal);
                let z2: f64 = ch.rng.sample(StandardNormal);
                let (eta1, eta2) = if v1 > 0.0 {
                    let s1 = fp::sqrt(v1);
                    let cross = c12 / s1;
                    let resid = v2 - c12 * c12 / v1;
                    (s1 * z1, cross * z1 + fp::sqrt(resid.max(0.0)) * z2)
                } else {
                    (0.0, fp::sqrt(v2.max(0.0)) * z2)
                };
                let integral = ch.ou * (1.0 - e) / g + eta2;
                ch.ou = e * ch.ou + eta1;
                integral
            }
        }
    }
}
