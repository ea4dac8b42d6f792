//! Float helpers backed by `libm` so the crate builds without `std`.

use crate::qmat::C64;

pub(crate) const LN2: f64 = core::f64::consts::LN_2;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub(crate) fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn cis(theta: f64) -> C64 {
    C64::new(libm::cos(theta), libm::sin(theta))
}

#[inline]
pub(crate) fn cabs(z: C64) -> f64 {
    libm::hypot(z.re, z.im)
}

/// `-x log2 x` with the `0 log 0 = 0` convention below `cutoff`.
#[inline]
pub(crate) fn eta(x: f64, cutoff: f64) -> f64 {
    if x <= cutoff {
        0.0
    } else {
        -x * log2(x)
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    eta(p, 0.0) + eta(1.0 - p, 0.0)
}

/// Shannon entropy of a probability vector, in bits.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| eta(p, 0.0)).sum()
}
