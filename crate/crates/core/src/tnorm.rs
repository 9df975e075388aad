//! Dombi t-norm kernel.
//!
//! The Dombi t-norm with parameter `λ > 0` is
//!
//! ```text
//! φ(x, y) = 0                                   if x = 0 or y = 0
//!         = (1 + [g(x) + g(y)]^(1/λ))^(-1)      otherwise
//! ```
//!
//! with generator `g(x) = ((1 - x) / x)^λ`. All evaluation happens in the log
//! domain, so large `λ` or arguments close to zero never overflow.
//!
//! The checked entry points take [`UnitValue`] and [`Lambda`]; the `*_raw`
//! helpers are the unchecked hot-path versions used by the solver loops.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{FreError, Result};

/// Values at or below this threshold take the zero branch of the t-norm.
pub const ZERO_THRESHOLD: f64 = 1e-15;

/// Generator values are clamped to `exp(GENERATOR_LOG_CLAMP)`.
pub const GENERATOR_LOG_CLAMP: f64 = 700.0;

/// Largest negative `g(b) - g(a)` accepted as rounding noise by [`residual_v`].
pub const RESIDUAL_NOISE: f64 = 1e-12;

/// The Dombi parameter. Always finite and strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Lambda(f64);

impl Lambda {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Lambda(value))
        } else {
            Err(FreError::Domain(format!("lambda must be finite and > 0, got {value}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Lambda {
    type Error = FreError;
    fn try_from(v: f64) -> Result<Self> {
        Lambda::new(v)
    }
}

impl From<Lambda> for f64 {
    fn from(l: Lambda) -> f64 {
        l.0
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A real number in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UnitValue(f64);

impl UnitValue {
    pub const ZERO: UnitValue = UnitValue(0.0);
    pub const ONE: UnitValue = UnitValue(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if is_unit(value) {
            Ok(UnitValue(value))
        } else {
            Err(FreError::Domain(format!("{value} is not in [0,1]")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for UnitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `true` for a non-NaN value in `[0, 1]`.
#[inline]
pub fn is_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

/// `ln((1 - x) / x)` for `x` in `(0, 1]`; `-inf` at `x = 1`.
#[inline]
fn log_odds_complement(x: f64) -> f64 {
    if x >= 1.0 {
        f64::NEG_INFINITY
    } else {
        (-x).ln_1p() - x.ln()
    }
}

/// `1 / (1 + e^t)`, exact at the infinities.
#[inline]
fn logistic_complement(t: f64) -> f64 {
    if t == f64::NEG_INFINITY {
        1.0
    } else if t == f64::INFINITY {
        0.0
    } else {
        1.0 / (1.0 + t.exp())
    }
}

/// The Dombi generator `((1 - x) / x)^λ`.
///
/// Returns 0 at `x = 1` and saturates at `exp(700)` instead of overflowing.
pub fn dombi_generator(x: UnitValue, lambda: Lambda) -> Result<f64> {
    if x.0 <= 0.0 {
        return Err(FreError::Domain("generator is undefined at x = 0".into()));
    }
    Ok(generator_raw(x.0, lambda.0))
}

#[inline]
pub(crate) fn generator_raw(x: f64, lambda: f64) -> f64 {
    let t = lambda * log_odds_complement(x);
    t.min(GENERATOR_LOG_CLAMP).exp()
}

/// The Dombi t-norm `φ(x, y)`.
pub fn dombi_tnorm(x: UnitValue, y: UnitValue, lambda: Lambda) -> UnitValue {
    UnitValue(tnorm_raw(x.0, y.0, lambda.0))
}

#[inline]
pub(crate) fn tnorm_raw(x: f64, y: f64, lambda: f64) -> f64 {
    if x <= ZERO_THRESHOLD || y <= ZERO_THRESHOLD {
        return 0.0;
    }
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    if hi >= 1.0 {
        return lo;
    }
    // φ = lo / (1 + (1 - lo)(e^δ - 1)), δ = ln(1 + (g(hi)/g(lo))) / λ
    let gap = log_odds_complement(lo) - log_odds_complement(hi);
    let delta = (-lambda * gap).exp().ln_1p() / lambda;
    lo / (1.0 + (1.0 - lo) * delta.exp_m1())
}

/// `max_j φ(a_j, x_j)` for one constraint row.
pub fn dombi_row_composition(a_row: &[UnitValue], x: &[UnitValue], lambda: Lambda) -> Result<UnitValue> {
    if a_row.len() != x.len() {
        return Err(FreError::Dimension { expected: a_row.len(), found: x.len() });
    }
    if a_row.is_empty() {
        return Err(FreError::Dimension { expected: 1, found: 0 });
    }
    Ok(UnitValue(a_row.iter().zip(x).map(|(a, xj)| tnorm_raw(a.0, xj.0, lambda.0)).fold(0.0, f64::max)))
}

#[inline]
pub(crate) fn row_composition_raw(a_row: &[f64], x: &[f64], lambda: f64) -> f64 {
    a_row.iter().zip(x).map(|(&a, &xj)| tnorm_raw(a, xj, lambda)).fold(0.0, f64::max)
}

/// The residual `V(b, a)`: the unique `x` with `φ(a, x) = b`, for `0 < b ≤ a ≤ 1`.
pub fn residual_v(b: UnitValue, a: UnitValue, lambda: Lambda) -> Result<UnitValue> {
    if b.0 <= 0.0 {
        return Err(FreError::Domain("residual requires b > 0".into()));
    }
    if a.0 < b.0 {
        return Err(FreError::Domain(format!("residual requires a >= b, got a = {}, b = {}", a.0, b.0)));
    }
    residual_raw(b.0, a.0, lambda.0).map(UnitValue)
}

pub(crate) fn residual_raw(b: f64, a: f64, lambda: f64) -> Result<f64> {
    if a == b {
        return Ok(1.0);
    }
    let lb = lambda * log_odds_complement(b);
    let la = lambda * log_odds_complement(a);
    // g(b) - g(a) = g(b) * (1 - exp(la - lb)), kept in logs
    let shrink = -(la - lb).exp_m1();
    if shrink <= 0.0 {
        let diff = lb.min(GENERATOR_LOG_CLAMP).exp() * shrink;
        if diff >= -RESIDUAL_NOISE {
            return Ok(1.0);
        }
        return Err(FreError::Domain(format!("g(b) - g(a) = {diff} is negative")));
    }
    let log_diff = lb + shrink.ln();
    Ok(logistic_complement(log_diff / lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn u(v: f64) -> UnitValue {
        UnitValue::new(v).unwrap()
    }

    fn l(v: f64) -> Lambda {
        Lambda::new(v).unwrap()
    }

    #[test]
    fn generator_values() {
        assert_eq!(dombi_generator(u(1.0), l(2.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(dombi_generator(u(0.5), l(1.0)).unwrap(), 1.0, epsilon = 1e-15);
        // ((1 - 0.9452) / 0.9452)^2 evaluated with 50-digit arithmetic
        assert_abs_diff_eq!(dombi_generator(u(0.9452), l(2.0)).unwrap(), 0.0033613497, epsilon = 1e-6);
        assert!(dombi_generator(u(0.0), l(1.0)).is_err());
    }

    #[test]
    fn generator_saturates() {
        let g = dombi_generator(u(1e-300), l(8.0)).unwrap();
        assert!(g.is_finite());
        assert_eq!(g, GENERATOR_LOG_CLAMP.exp());
    }

    #[test]
    fn tnorm_values() {
        assert_eq!(dombi_tnorm(u(0.0), u(0.7), l(2.0)).get(), 0.0);
        assert_abs_diff_eq!(dombi_tnorm(u(0.5), u(0.5), l(1.0)).get(), 1.0 / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(dombi_tnorm(u(0.9452), u(0.7266), l(2.0)).get(), 0.7243, epsilon = 5e-4);
        for y in [0.0, 1e-9, 0.3, 0.77, 1.0] {
            assert_abs_diff_eq!(dombi_tnorm(u(1.0), u(y), l(3.5)).get(), y, epsilon = 1e-12);
        }
    }

    #[test]
    fn tnorm_below_zero_threshold_is_zero() {
        assert_eq!(dombi_tnorm(u(1e-16), u(0.9), l(0.5)).get(), 0.0);
        assert!(dombi_tnorm(u(1e-14), u(0.9), l(0.5)).get() > 0.0);
    }

    #[test]
    fn tnorm_no_overflow_for_tiny_args() {
        let v = dombi_tnorm(u(1e-12), u(0.5), l(8.0)).get();
        assert!(v.is_finite() && (0.0..=1e-12).contains(&v));
    }

    #[test]
    fn row_composition() {
        let zeros = [u(0.0); 3];
        let x = [u(0.3), u(0.9), u(1.0)];
        assert_eq!(dombi_row_composition(&zeros, &x, l(2.0)).unwrap().get(), 0.0);
        assert_abs_diff_eq!(dombi_row_composition(&[u(1.0)], &[u(0.42)], l(2.0)).unwrap().get(), 0.42, epsilon = 1e-15);
        assert!(matches!(
            dombi_row_composition(&zeros, &x[..2], l(2.0)),
            Err(FreError::Dimension { expected: 3, found: 2 })
        ));
    }

    #[test]
    fn residual_values() {
        assert_eq!(residual_v(u(0.5271), u(0.5271), l(2.0)).unwrap().get(), 1.0);
        assert_abs_diff_eq!(residual_v(u(0.7243), u(0.9452), l(2.0)).unwrap().get(), 0.7266, epsilon = 5e-4);
        for b in [1e-6, 0.2, 0.6, 0.99, 1.0] {
            for lam in [0.3, 1.0, 4.0] {
                assert_abs_diff_eq!(residual_v(u(b), u(1.0), l(lam)).unwrap().get(), b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn residual_domain_errors() {
        assert!(residual_v(u(0.0), u(0.5), l(1.0)).is_err());
        assert!(residual_v(u(0.6), u(0.5), l(1.0)).is_err());
    }

    #[test]
    fn residual_noise_at_equal_arguments() {
        // a one ulp above b must still land on (or next to) 1
        let b = 0.8327_f64;
        let a = f64::from_bits(b.to_bits() + 1);
        let v = residual_v(u(b), u(a), l(2.0)).unwrap().get();
        assert!(v > 0.999);
    }

    #[test]
    fn lambda_rejects_bad_values() {
        for v in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(Lambda::new(v).is_err());
        }
        assert!(UnitValue::new(f64::NAN).is_err());
        assert!(UnitValue::new(1.0000001).is_err());
    }
}
