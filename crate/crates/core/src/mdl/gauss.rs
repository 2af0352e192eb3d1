//! Code length of a residual under a discretized Gaussian.
//!
//! A residual `r` observed at precision `ε` occupies the interval
//! `[r − ε/2, r + ε/2]`; its probability under `N(0, σ²)` is
//! `Φ((r+ε/2)/σ) − Φ((r−ε/2)/σ)`. Far tails are handled through the log of
//! the upper tail `Q(z) = 1 − Φ(z)` so that no intermediate underflows.

use std::f64::consts::{LN_2, PI, SQRT_2};

/// Upper bound on the cost of any single point, in bits.
pub const POINT_CAP_BITS: f64 = 1024.0;

/// Above this `z`, `erfc` is replaced by its asymptotic series.
const ASYMPTOTIC_Z: f64 = 30.0;

/// `ln Q(z)` for `z ≥ 0`.
fn ln_upper_tail(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < ASYMPTOTIC_Z {
        return libm::log(0.5 * libm::erfc(z / SQRT_2));
    }
    let z2 = z * z;
    let series =
        1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2) + 105.0 / (z2 * z2 * z2 * z2);
    -0.5 * z2 - libm::log(z) - 0.5 * libm::log(2.0 * PI) + libm::log(series)
}

/// `ln(Φ(b) − Φ(a))` for `a < b`.
fn ln_interval(a: f64, b: f64) -> f64 {
    // the Gaussian is symmetric; move the interval to the right half-line
    let (a, b) = if a + b < 0.0 { (-b, -a) } else { (a, b) };
    if a >= 0.0 {
        let (qa, qb) = (ln_upper_tail(a), ln_upper_tail(b));
        qa + libm::log(-libm::expm1(qb - qa))
    } else {
        libm::log(0.5 * (libm::erf(b / SQRT_2) - libm::erf(a / SQRT_2)))
    }
}

/// Bits to transmit residual `r` at precision `epsilon` with noise `sigma`,
/// capped at [`POINT_CAP_BITS`].
pub fn residual_bits(r: f64, sigma: f64, epsilon: f64) -> f64 {
    debug_assert!(sigma > 0.0 && epsilon > 0.0);
    let half = 0.5 * epsilon;
    let bits = -ln_interval((r - half) / sigma, (r + half) / sigma) / LN_2;
    if bits.is_nan() || bits > POINT_CAP_BITS {
        POINT_CAP_BITS
    } else {
        bits.max(0.0)
    }
}
