//! Geometric and box-counting zeta functions of rational type
//!
//!   ζ(s) = Σ aᵢ cᵢˢ + (Σ b_p d_pˢ + H(s)) / (1 − Σ r_jˢ),
//!
//! where H collects periodic error-term tails as Hurwitz zeta differences.

mod hurwitz;

pub use hurwitz::hurwitz_diff;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::roots::{moran_root, polish, ScalingVector};
use crate::scale::{fmt17, Ratio, Scale};
use crate::step::{StepFunction, Tail};
use crate::strings::{FractalString, StringGaps, StringGenerator};

/// Largest denominator tried when recognising scales as surds.
const SCALE_DEN: i64 = 65536;
const SCALE_TOL: f64 = 1e-13;

/// Pole-proximity threshold on |1 − Σ r_jˢ|.
pub const POLE_TOL: f64 = 1e-12;

/// `coefficient · scaleˢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub scale: Scale,
}

impl PowerTerm {
    pub fn new(coefficient: f64, scale: Scale) -> Self {
        Self { coefficient, scale }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.scale.powc(s) * self.coefficient
    }
}

fn eval_terms(terms: &[PowerTerm], s: Complex64) -> Complex64 {
    terms.iter().map(|t| t.eval(s)).sum()
}

/// Sums coefficients of equal scales and drops zero terms; keeps first-seen order.
fn merge_terms(terms: Vec<PowerTerm>) -> Vec<PowerTerm> {
    let mut out: Vec<PowerTerm> = Vec::new();
    for t in terms {
        match out.iter_mut().find(|u| u.scale.same_as(&t.scale)) {
            Some(u) => u.coefficient += t.coefficient,
            None => out.push(t),
        }
    }
    out.retain(|t| t.coefficient != 0.0);
    out
}

/// Anything with a Moran denominator: ζ(s) = entire(s) + numerator(s)/(1 − Σ r_jˢ).
pub trait ZetaFunction {
    fn ratios(&self) -> &[Ratio];
    fn entire(&self, s: Complex64) -> Result<Complex64>;
    fn numerator(&self, s: Complex64) -> Result<Complex64>;

    fn denominator(&self, s: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0) - self.ratios().iter().map(|r| r.powc(s)).sum::<Complex64>()
    }

    /// d/ds of the denominator, Σ r_jˢ log(1/r_j).
    fn denominator_deriv(&self, s: Complex64) -> Complex64 {
        self.ratios().iter().map(|r| r.powc(s) * -r.ln()).sum()
    }

    /// Rough magnitude of the numerator's terms at `s`, for relative tests.
    fn numerator_scale(&self, s: Complex64) -> f64;
}

/// A zeta function with a finite power-sum numerator.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalZeta {
    pub entire: Vec<PowerTerm>,
    pub numerator: Vec<PowerTerm>,
    pub ratios: Vec<Ratio>,
}

impl RationalZeta {
    pub fn new(entire: Vec<PowerTerm>, numerator: Vec<PowerTerm>, ratios: Vec<Ratio>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::InvalidInput("denominator needs at least one ratio".into()));
        }
        if entire.iter().chain(&numerator).any(|t| !(t.scale.value() > 0.0) || !t.coefficient.is_finite()) {
            return Err(Error::InvalidInput("power terms need positive scales and finite coefficients".into()));
        }
        Ok(Self {
            entire: merge_terms(entire),
            numerator: merge_terms(numerator),
            ratios,
        })
    }

    pub fn scaling_vector(&self) -> Result<ScalingVector> {
        ScalingVector::new(self.ratios.clone())
    }

    /// JSON {entire, numerator, ratios} with 17-digit decimal strings.
    pub fn to_json(&self) -> Value {
        json!({
            "entire": terms_json(&self.entire),
            "numerator": terms_json(&self.numerator),
            "ratios": self.ratios.iter().map(ratio_json).collect::<Vec<_>>(),
        })
    }
}

fn terms_json(terms: &[PowerTerm]) -> Vec<Value> {
    terms
        .iter()
        .map(|t| {
            let mut v = json!({
                "coefficient": fmt17(t.coefficient),
                "scale": fmt17(t.scale.value()),
            });
            if let Some(e) = t.scale.exact_string() {
                v["exact"] = json!(e);
            }
            v
        })
        .collect()
}

fn ratio_json(r: &Ratio) -> Value {
    json!({"value": fmt17(r.value()), "form": r.to_string()})
}

impl ZetaFunction for RationalZeta {
    fn ratios(&self) -> &[Ratio] {
        &self.ratios
    }

    fn entire(&self, s: Complex64) -> Result<Complex64> {
        Ok(eval_terms(&self.entire, s))
    }

    fn numerator(&self, s: Complex64) -> Result<Complex64> {
        Ok(eval_terms(&self.numerator, s))
    }

    fn numerator_scale(&self, s: Complex64) -> f64 {
        self.numerator.iter().map(|t| t.eval(s).norm()).sum()
    }
}

/// c · Σ_{k≥1} ((a + kP)^{−s} − (b + kP)^{−s}): one piece of a periodic tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurwitzPiece {
    pub coefficient: f64,
    pub period: f64,
    pub a: f64,
    pub b: f64,
}

impl HurwitzPiece {
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let p = self.period;
        (-s * p.ln()).exp() * hurwitz_diff(s, 1.0 + self.a / p, 1.0 + self.b / p) * self.coefficient
    }
}

/// Box-counting zeta with an error transform E(s) = s∫ L(x) x^{−s−1} dx over (x₁, ∞):
/// finite pieces of L are folded into the closed part, periodic tails are
/// summed as Hurwitz differences and trusted for Re(s) > σ₀.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaEvaluator {
    pub closed: RationalZeta,
    pub periodic: Vec<HurwitzPiece>,
    pub sigma0: f64,
}

impl ZetaEvaluator {
    fn check(&self, s: Complex64) -> Result<()> {
        if !self.periodic.is_empty() && s.re <= self.sigma0 {
            return Err(Error::Domain { s, sigma0: self.sigma0 });
        }
        Ok(())
    }

    /// E(s) alone.
    pub fn error_transform(&self, s: Complex64, n: usize, x1: f64) -> Result<Complex64> {
        // the closed numerator is (N−1)x₁^{−s} + finite part of E
        let lead = (-s * x1.ln()).exp() * (n as f64 - 1.0);
        Ok(self.numerator(s)? - lead)
    }

    pub fn to_json(&self) -> Value {
        let mut v = self.closed.to_json();
        v["periodic"] = json!(self
            .periodic
            .iter()
            .map(|p| json!({
                "coefficient": fmt17(p.coefficient),
                "period": fmt17(p.period),
                "a": fmt17(p.a),
                "b": fmt17(p.b),
            }))
            .collect::<Vec<_>>());
        v["sigma0"] = json!(fmt17(self.sigma0));
        v
    }
}

impl ZetaFunction for ZetaEvaluator {
    fn ratios(&self) -> &[Ratio] {
        &self.closed.ratios
    }

    fn entire(&self, s: Complex64) -> Result<Complex64> {
        self.closed.entire(s)
    }

    fn numerator(&self, s: Complex64) -> Result<Complex64> {
        self.check(s)?;
        Ok(self.closed.numerator(s)? + self.periodic.iter().map(|p| p.eval(s)).sum::<Complex64>())
    }

    fn numerator_scale(&self, s: Complex64) -> f64 {
        self.closed.numerator_scale(s) + self.periodic.iter().map(|p| p.eval(s).norm()).sum::<f64>()
    }
}

/// entire(s) + numerator(s)/denominator(s), refusing points within 1e−12 of a pole.
pub fn zeta_eval<Z: ZetaFunction + ?Sized>(z: &Z, s: Complex64) -> Result<Complex64> {
    let d = z.denominator(s);
    if d.norm() < POLE_TOL {
        let pole = polish(z.ratios(), s, 50);
        return Err(Error::PoleProximity {
            s,
            pole,
            distance: (s - pole).norm(),
        });
    }
    Ok(z.entire(s)? + z.numerator(s)? / d)
}

/// Residue at a simple zero ω of the denominator: numerator(ω) / Σ r_j^ω log(1/r_j).
pub fn residue_simple<Z: ZetaFunction + ?Sized>(z: &Z, omega: Complex64) -> Result<Complex64> {
    let d = z.denominator(omega);
    let weight: f64 = z.ratios().iter().map(|r| r.powc(omega).norm()).sum::<f64>().max(1.0);
    if d.norm() > 1e-8 * weight {
        return Err(Error::InvalidInput(format!(
            "{omega} is not a zero of the denominator (|1 − Σ r^s| = {:e})",
            d.norm()
        )));
    }
    let deriv = z.denominator_deriv(omega);
    let deriv_scale: f64 = z.ratios().iter().map(|r| r.powc(omega).norm() * r.ln().abs()).sum();
    if deriv.norm() <= 1e-8 * deriv_scale {
        return Err(Error::NotSimple(omega));
    }
    let h = z.numerator(omega)?;
    if h.norm() <= 1e-10 * z.numerator_scale(omega).max(f64::MIN_POSITIVE) {
        return Err(Error::Removable(omega));
    }
    Ok(h / deriv)
}

/// ζ_L(s) = Σ_k (L g_k)ˢ / (1 − Σ r_jˢ).
pub fn self_similar_zeta(g: &StringGaps) -> RationalZeta {
    generator_zeta(&g.generator())
}

/// Closed form of a lazily generated self-similar string.
pub fn generator_zeta(gen: &StringGenerator) -> RationalZeta {
    let numerator = gen
        .gaps
        .iter()
        .map(|g| PowerTerm::new(1.0, Scale::recognise(*g, SCALE_DEN, SCALE_TOL)))
        .collect();
    RationalZeta::new(Vec::new(), numerator, gen.ratios.clone()).expect("generator data is validated")
}

/// Σ m_n l_nˢ over the first `terms` lengths, with a bound on the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    /// Bound on the omitted tail; None when the string has no generator or
    /// Re(s) does not exceed its dimension.
    pub tail_bound: Option<f64>,
    /// False when Re(s) ≤ the string's dimension: the partial sum need not converge.
    pub convergent: bool,
}

pub fn truncated_series(string: &FractalString, s: Complex64, terms: usize) -> Result<SeriesValue> {
    let head = string.terms(terms)?;
    let value = head
        .iter()
        .map(|(l, m)| (s * l.ln()).exp() * *m as f64)
        .sum();
    let dimension = match string.generator() {
        Some(g) if g.ratios.len() >= 2 => ScalingVector::new(g.ratios.clone()).map(|r| moran_root(&r)).ok(),
        Some(g) => {
            // one ratio r: Σ rˢ < 1 for every s > 0
            let _ = g;
            Some(0.0)
        }
        None => None,
    };
    let convergent = dimension.is_none_or(|d| s.re > d);
    let tail_bound = if string.is_finite() && head.len() < terms {
        Some(0.0)
    } else if convergent {
        string.tail_bound(s.re, terms)
    } else {
        None
    };
    Ok(SeriesValue {
        value,
        tail_bound,
        convergent,
    })
}

/// Constant pieces (a, b, c) of L restricted to (x₁, ∞), with the periodic
/// tail (if any) split off as pieces of one period window.
fn error_pieces(l: &StepFunction, x1: f64) -> (Vec<(f64, f64, i64)>, Option<(f64, Vec<(f64, f64, i64)>)>) {
    let clip = |(a, b, c): (f64, f64, i64), lo: f64, hi: f64| {
        let (a, b) = (a.max(lo), b.min(hi));
        (a < b && c != 0).then_some((a, b, c))
    };
    match l.tail() {
        Tail::Constant => (l.pieces().into_iter().filter_map(|p| clip(p, x1, f64::INFINITY)).collect(), None),
        Tail::Periodic { period } => {
            let top = l.valid_to();
            let finite = l.pieces().into_iter().filter_map(|p| clip(p, x1, top)).collect();
            // the window (top − P, top] repeats at (· + kP) for k ≥ 1, all beyond x₁
            let window = l.pieces().into_iter().filter_map(|p| clip(p, top - period, top)).collect();
            (finite, Some((period, window)))
        }
    }
}

fn scale_of(x: f64) -> Scale {
    Scale::recognise(x, SCALE_DEN, SCALE_TOL)
}

/// Numerator (N−1)x₁^{−s} + E(s) with E built from the finite pieces of L.
fn box_numerator(n: usize, x1: f64, pieces: &[(f64, f64, i64)]) -> Vec<PowerTerm> {
    let mut terms = vec![PowerTerm::new(n as f64 - 1.0, scale_of(1.0 / x1))];
    for &(a, b, c) in pieces {
        terms.push(PowerTerm::new(c as f64, scale_of(1.0 / a)));
        if b.is_finite() {
            terms.push(PowerTerm::new(-(c as f64), scale_of(1.0 / b)));
        }
    }
    terms
}

/// Closed-form box-counting zeta of a δ-disjoint system whose error term L
/// vanishes beyond δ⁻¹.
pub fn delta_disjoint_box_zeta(ratios: &[Ratio], x1: f64, delta: f64, l: &StepFunction) -> Result<RationalZeta> {
    if !(x1 > 0.0) || !(delta > 0.0) {
        return Err(Error::InvalidInput("x1 and delta must be positive".into()));
    }
    let cutoff = 1.0 / delta;
    if let Tail::Periodic { .. } = l.tail() {
        return Err(Error::NotDeltaDisjoint("L has a periodic tail; use osc_box_zeta".into()));
    }
    if let Some((a, _, c)) = l
        .pieces()
        .into_iter()
        .find(|(a, b, c)| *c != 0 && *b > cutoff * (1.0 + 1e-12) && *a >= 0.0)
    {
        return Err(Error::NotDeltaDisjoint(format!(
            "L = {c} past 1/delta = {cutoff} (from x = {a}); use osc_box_zeta"
        )));
    }
    let (pieces, _) = error_pieces(l, x1);
    RationalZeta::new(
        vec![PowerTerm::new(1.0, scale_of(1.0 / x1))],
        box_numerator(ratios.len(), x1, &pieces),
        ratios.to_vec(),
    )
}

/// Box-counting zeta under the open set condition, for any bounded step L.
pub fn osc_box_zeta(ratios: &[Ratio], x1: f64, l: &StepFunction) -> Result<ZetaEvaluator> {
    if !(x1 > 0.0) {
        return Err(Error::InvalidInput("x1 must be positive".into()));
    }
    let (pieces, tail) = error_pieces(l, x1);
    let closed = RationalZeta::new(
        vec![PowerTerm::new(1.0, scale_of(1.0 / x1))],
        box_numerator(ratios.len(), x1, &pieces),
        ratios.to_vec(),
    )?;
    let periodic: Vec<HurwitzPiece> = match tail {
        Some((period, window)) => window
            .into_iter()
            .map(|(a, b, c)| HurwitzPiece {
                coefficient: c as f64,
                period,
                a,
                b,
            })
            .collect(),
        None => Vec::new(),
    };
    // a bounded L makes s∫ L x^{−s−1} converge for Re(s) > 0
    Ok(ZetaEvaluator {
        closed,
        periodic,
        sigma0: 0.0,
    })
}
