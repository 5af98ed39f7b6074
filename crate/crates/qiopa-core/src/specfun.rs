//! Numerically stable special-function kernels: Laguerre recurrences,
//! terminating Gauss hypergeometric sums, and log-scaled combinatorics.
//!
//! Factorial-scale coefficients are carried as sign + log-magnitude and
//! exponentiated only when combined, so indices in the hundreds stay finite.

use crate::{Error, Result};

/// A real number stored as a sign and the natural log of its magnitude.
///
/// `sign == 0` encodes an exact zero; `log_magnitude` is meaningless then.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaledReal {
    /// −1, 0, or +1.
    pub sign: i8,
    /// ln|value| when `sign != 0`.
    pub log_magnitude: f64,
}

impl LogScaledReal {
    /// The exact zero.
    pub const ZERO: Self = LogScaledReal {
        sign: 0,
        log_magnitude: f64::NEG_INFINITY,
    };

    /// The exact one.
    pub const ONE: Self = LogScaledReal {
        sign: 1,
        log_magnitude: 0.0,
    };

    /// Wraps a finite `f64`.
    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogScaledReal {
                sign: if v > 0.0 { 1 } else { -1 },
                log_magnitude: libm::log(v.abs()),
            }
        }
    }

    /// Builds from parts; `sign` is clamped to {−1, 0, +1}.
    pub fn from_parts(sign: i8, log_magnitude: f64) -> Self {
        if sign == 0 {
            Self::ZERO
        } else {
            LogScaledReal {
                sign: sign.signum(),
                log_magnitude,
            }
        }
    }

    /// Exponentiates back to `f64` (may overflow to ±inf for huge magnitudes).
    pub fn value(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * libm::exp(self.log_magnitude)
        }
    }

    /// True for the exact zero.
    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Product of two log-scaled reals.
    pub fn mul(&self, rhs: &Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            Self::ZERO
        } else {
            LogScaledReal {
                sign: self.sign * rhs.sign,
                log_magnitude: self.log_magnitude + rhs.log_magnitude,
            }
        }
    }

    /// Square root; requires a non-negative value.
    pub fn sqrt(&self) -> Self {
        debug_assert!(self.sign >= 0, "sqrt of a negative log-scaled value");
        if self.sign == 0 {
            Self::ZERO
        } else {
            LogScaledReal {
                sign: 1,
                log_magnitude: 0.5 * self.log_magnitude,
            }
        }
    }
}

/// ln(n!) via the log-gamma function.
pub fn ln_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0)
}

/// Binomial coefficient `binom(n, k)` in log-scaled form.
///
/// Out-of-range `k` (negative or above `n`) yields the exact zero, which lets
/// summations run over unrestricted index ranges.
pub fn log_binomial(n: u64, k: i64) -> LogScaledReal {
    if k < 0 || k as u64 > n {
        return LogScaledReal::ZERO;
    }
    let k = k as u64;
    LogScaledReal::from_parts(1, ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k))
}

/// Laguerre polynomial `L_n(x)` by the three-term recurrence.
pub fn laguerre(n: u32, x: f64) -> Result<f64> {
    assoc_laguerre(n, 0, x)
}

/// Associated Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence
/// `(m+1)·L_{m+1}^{(k)} = (2m+1+k−x)·L_m^{(k)} − (m+k)·L_{m−1}^{(k)}`.
pub fn assoc_laguerre(n: u32, k: u32, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain("laguerre argument must be finite"));
    }
    let kf = f64::from(k);
    let mut prev = 1.0; // L_0
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 1.0 + kf - x; // L_1
    for m in 1..n {
        let mf = f64::from(m);
        let next = ((2.0 * mf + 1.0 + kf - x) * cur - (mf + kf) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Associated Laguerre polynomial in log-scaled form. The recurrence runs
/// in plain `f64` but renormalizes on the fly, so large-index large-argument
/// evaluations whose intermediate values overflow stay usable whenever the
/// quantity they end up in is finite.
pub fn assoc_laguerre_scaled(n: u32, k: u32, x: f64) -> Result<LogScaledReal> {
    if !x.is_finite() {
        return Err(Error::Domain("laguerre argument must be finite"));
    }
    let kf = f64::from(k);
    let mut offset = 0.0_f64;
    let mut prev = 1.0_f64;
    if n == 0 {
        return Ok(LogScaledReal::ONE);
    }
    let mut cur = 1.0 + kf - x;
    for m in 1..n {
        let mf = f64::from(m);
        let next = ((2.0 * mf + 1.0 + kf - x) * cur - (mf + kf) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
        let scale = prev.abs().max(cur.abs());
        if scale > 1e250 {
            prev *= 1e-250;
            cur *= 1e-250;
            offset += 250.0 * core::f64::consts::LN_10;
        }
    }
    Ok(if cur == 0.0 {
        LogScaledReal::ZERO
    } else {
        LogScaledReal::from_parts(
            if cur > 0.0 { 1 } else { -1 },
            libm::log(cur.abs()) + offset,
        )
    })
}

/// True when `a` is a non-positive integer (within a tight tolerance), i.e. a
/// Pochhammer factor `(a)_m` that terminates a hypergeometric series.
fn non_positive_int_order(a: f64) -> Option<u64> {
    if a > 0.5 {
        return None;
    }
    let r = libm::round(a);
    if (a - r).abs() < 1e-9 {
        Some((-r) as u64)
    } else {
        None
    }
}

/// Terminating Gauss hypergeometric sum `₂F₁(a, b; c; z)`.
///
/// At least one of `a`, `b` must be a non-positive integer so the series is a
/// finite polynomial; the partial sums are rescaled on the fly when they grow
/// near the `f64` ceiling.
pub fn hyp2f1_terminating(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::Domain("hypergeometric arguments must be finite"));
    }
    let order = match (non_positive_int_order(a), non_positive_int_order(b)) {
        (Some(na), Some(nb)) => na.min(nb),
        (Some(na), None) => na,
        (None, Some(nb)) => nb,
        (None, None) => {
            return Err(Error::Unsupported(
                "series does not terminate: neither a nor b is a non-positive integer",
            ))
        }
    };
    // A non-positive integer c truncates denominators before the series ends.
    if let Some(nc) = non_positive_int_order(c) {
        if nc < order {
            return Err(Error::Domain(
                "c is a non-positive integer reached before termination",
            ));
        }
    }

    let mut acc = 1.0_f64;
    let mut term = 1.0_f64;
    let mut rescale = 0.0_f64; // log offset pulled out of acc and term
    for m in 0..order {
        let mf = m as f64;
        term *= (a + mf) * (b + mf) / ((c + mf) * (mf + 1.0)) * z;
        acc += term;
        if acc.abs() > 1e280 || term.abs() > 1e280 {
            acc *= libm::exp(-120.0);
            term *= libm::exp(-120.0);
            rescale += 120.0;
        }
    }
    Ok(if rescale == 0.0 {
        acc
    } else {
        acc * libm::exp(rescale)
    })
}
