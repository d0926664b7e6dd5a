//! Float math shim: inherent `f64` methods live in `std`, so `no_std`
//! builds route through `libm` instead.

#[cfg(feature = "std")]
mod imp {
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }
    pub fn round(x: f64) -> f64 {
        x.round()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }
    pub fn round(x: f64) -> f64 {
        libm::round(x)
    }
}

pub(crate) use imp::*;

/// Integer power of ten; exact reciprocal of the exact positive power.
pub(crate) fn pow10(exp: i32) -> f64 {
    let mut out = 1.0_f64;
    for _ in 0..exp.unsigned_abs() {
        out *= 10.0;
    }
    if exp < 0 {
        1.0 / out
    } else {
        out
    }
}
