//! Positive reals that remember an exact form when one is known.
//!
//! Scaling ratios arrive as rationals (`1/3`), power forms (`2^-1.618…`) or
//! plain floats. Zeta-function scales arising from packing breakpoints are
//! reciprocals of half-distances and are often square roots of rationals
//! (`√17/8`). Keeping those forms lets lattice tests and coefficient
//! comparisons be decided exactly instead of up to rounding.

use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Exact representation of a scaling ratio, when available.
#[derive(Debug, Clone, PartialEq)]
pub enum RatioForm {
    Rational(Rational64),
    /// `base^exponent`; the exponent is taken as given.
    Power { base: f64, exponent: f64 },
    Float,
}

/// A scaling ratio in the open interval (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Ratio {
    value: f64,
    form: RatioForm,
}

impl Ratio {
    fn checked(value: f64, form: RatioForm) -> Result<Self> {
        if !(value > 0.0 && value < 1.0) || !value.is_finite() {
            return Err(Error::InvalidInput(format!(
                "scaling ratio {value} is not in (0, 1)"
            )));
        }
        Ok(Self { value, form })
    }

    pub fn rational(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let r = Rational64::new(num, den);
        Self::checked(*r.numer() as f64 / *r.denom() as f64, RatioForm::Rational(r))
    }

    pub fn power(base: f64, exponent: f64) -> Result<Self> {
        if !(base > 0.0) {
            return Err(Error::InvalidInput(format!("power base {base} must be positive")));
        }
        Self::checked(base.powf(exponent), RatioForm::Power { base, exponent })
    }

    pub fn float(value: f64) -> Result<Self> {
        Self::checked(value, RatioForm::Float)
    }

    /// Parses `p/q`, `b^e` or a decimal literal.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let bad = || Error::InvalidInput(format!("cannot parse ratio {t:?}"));
        if let Some((b, e)) = t.split_once('^') {
            let base = parse_real(b).ok_or_else(bad)?;
            let exponent: f64 = e.trim().parse().map_err(|_| bad())?;
            return Self::power(base, exponent);
        }
        if let Some((p, q)) = t.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad())?;
            let q: i64 = q.trim().parse().map_err(|_| bad())?;
            return Self::rational(p, q);
        }
        let v: f64 = t.parse().map_err(|_| bad())?;
        Self::float(v)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn form(&self) -> &RatioForm {
        &self.form
    }

    /// Natural logarithm, computed from the exact form where possible.
    pub fn ln(&self) -> f64 {
        match &self.form {
            RatioForm::Rational(r) => (*r.numer() as f64).ln() - (*r.denom() as f64).ln(),
            RatioForm::Power { base, exponent } => exponent * base.ln(),
            RatioForm::Float => self.value.ln(),
        }
    }

    /// `r^s` for complex `s`.
    pub fn powc(&self, s: Complex64) -> Complex64 {
        (s * self.ln()).exp()
    }

    pub fn as_scale(&self) -> Scale {
        match &self.form {
            RatioForm::Rational(r) => Scale::rational(*r),
            _ => Scale::float(self.value),
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            RatioForm::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            RatioForm::Power { base, exponent } => write!(f, "{base}^{exponent}"),
            RatioForm::Float => write!(f, "{}", self.value),
        }
    }
}

fn parse_real(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: f64 = p.trim().parse().ok()?;
        let q: f64 = q.trim().parse().ok()?;
        return Some(p / q);
    }
    t.parse().ok()
}

/// A positive real, optionally known exactly as the square root of a rational.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    value: f64,
    square: Option<Rational64>,
}

impl Scale {
    pub fn float(value: f64) -> Self {
        debug_assert!(value > 0.0);
        Self { value, square: None }
    }

    pub fn rational(r: Rational64) -> Self {
        let value = *r.numer() as f64 / *r.denom() as f64;
        let square = r
            .numer()
            .checked_mul(*r.numer())
            .zip(r.denom().checked_mul(*r.denom()))
            .map(|(n, d)| Rational64::new(n, d));
        Self { value, square }
    }

    /// `sqrt(r)`.
    pub fn sqrt_rational(r: Rational64) -> Self {
        let value = (*r.numer() as f64 / *r.denom() as f64).sqrt();
        Self {
            value,
            square: Some(r),
        }
    }

    /// A float scale whose square is recognised as a small-denominator rational
    /// within `rel_tol`, falling back to a bare float.
    pub fn recognise(value: f64, max_den: i64, rel_tol: f64) -> Self {
        match recognise_rational(value * value, max_den, rel_tol) {
            Some(sq) => Self::sqrt_rational(sq),
            None => Self::float(value),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Exact square, when known.
    pub fn square(&self) -> Option<Rational64> {
        self.square
    }

    pub fn ln(&self) -> f64 {
        match self.square {
            Some(sq) => 0.5 * ((*sq.numer() as f64).ln() - (*sq.denom() as f64).ln()),
            None => self.value.ln(),
        }
    }

    pub fn powc(&self, s: Complex64) -> Complex64 {
        (s * self.ln()).exp()
    }

    /// Equality: exact when both sides carry a form, otherwise relative 1e-12.
    pub fn same_as(&self, other: &Scale) -> bool {
        match (self.square, other.square) {
            (Some(a), Some(b)) => a == b,
            _ => (self.value - other.value).abs() <= 1e-12 * self.value.max(other.value),
        }
    }

    /// Human-readable exact form, e.g. `1/2` or `sqrt(17/64)`.
    pub fn exact_string(&self) -> Option<String> {
        let sq = self.square?;
        let (n, d) = (*sq.numer(), *sq.denom());
        match (isqrt_exact(n), isqrt_exact(d)) {
            (Some(a), Some(1)) => Some(format!("{a}")),
            (Some(a), Some(b)) => Some(format!("{a}/{b}")),
            _ => Some(format!("sqrt({n}/{d})")),
        }
    }
}

impl PartialEq for Scale {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact_string() {
            Some(s) => f.write_str(&s),
            None => write!(f, "{}", self.value),
        }
    }
}

fn isqrt_exact(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = (n as f64).sqrt().round() as i64;
    (r.checked_mul(r) == Some(n)).then_some(r)
}

/// Best rational approximation with denominator ≤ `max_den`, accepted only
/// when it reproduces `x` to relative tolerance `rel_tol`.
pub fn recognise_rational(x: f64, max_den: i64, rel_tol: f64) -> Option<Rational64> {
    if !x.is_finite() || x <= 0.0 {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > i64::MAX as f64 / 4.0 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            return None;
        }
        let approx = h2 as f64 / k2 as f64;
        if (approx - x).abs() <= rel_tol * x {
            let g = h2.gcd(&k2);
            return Some(Rational64::new_raw(h2 / g, k2 / g));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a as f64;
        if frac <= 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

/// Formats a float to 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        let r = Ratio::parse("1/3").unwrap();
        assert!(matches!(r.form(), RatioForm::Rational(_)));
        assert!((r.value() - 1.0 / 3.0).abs() < 1e-16);
        let p = Ratio::parse("2^-1.6180339887498949").unwrap();
        assert!((p.value() - 2f64.powf(-1.6180339887498949)).abs() < 1e-16);
        assert!((p.ln() + 1.6180339887498949 * 2f64.ln()).abs() < 1e-15);
        assert!(Ratio::parse("0.25").is_ok());
        assert!(Ratio::parse("1.0").is_err());
        assert!(Ratio::parse("3/2").is_err());
        assert!(Ratio::parse("abc").is_err());
    }

    #[test]
    fn recognises_surds() {
        let s = Scale::recognise(17f64.sqrt() / 8.0, 1 << 20, 1e-12);
        assert_eq!(s.square(), Some(Rational64::new(17, 64)));
        assert_eq!(s.exact_string().unwrap(), "sqrt(17/64)");
        let h = Scale::recognise(0.5, 1 << 20, 1e-12);
        assert_eq!(h.exact_string().unwrap(), "1/2");
        assert!(Scale::recognise(std::f64::consts::PI / 7.0, 1000, 1e-13).square().is_none());
    }

    #[test]
    fn exact_equality_beats_rounding() {
        let a = Scale::sqrt_rational(Rational64::new(1, 2));
        let b = Scale::float(2f64.sqrt() / 2.0);
        assert!(a.same_as(&b));
        assert!(a == Scale::recognise(1.0 / 2f64.sqrt(), 1 << 20, 1e-12));
    }
}
