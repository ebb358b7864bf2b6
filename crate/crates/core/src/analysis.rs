//! Measurability verdicts, contents from residues, explicit counting
//! formulas and steadiness of sampled growth functions.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::SelfSimilarSystem;
use crate::packing::{certified_profile, detect_periodic_tail, lalley_l, CertifiedProfile, ProfileOptions};
use crate::par;
use crate::roots::{classify_lattice, RootSet};
use crate::scale::fmt17;
use crate::step::StepFunction;
use crate::strings::{content_bounds, dimension_regress, Regression};
use crate::zeta::{delta_disjoint_box_zeta, osc_box_zeta, residue_simple, ZetaEvaluator, ZetaFunction};

/// Repeats of a period required before L is treated as periodic.
const PERIOD_REPEATS: usize = 3;

/// Box-counting zeta of a system, built from its certified profile.
#[derive(Debug, Clone)]
pub struct BoxZeta {
    /// First jump of N_B.
    pub x1: f64,
    pub l: StepFunction,
    /// Set when L vanishes past 1/δ and the closed form applies.
    pub delta: Option<f64>,
    pub zeta: ZetaEvaluator,
    pub profile: CertifiedProfile,
}

/// Certifies N_B up to `x_max`, extracts L and picks the closed form when L
/// dies out, the periodic form when L repeats.
///
/// L counts as dying out when it is zero over at least one full scaling
/// generation (y, y / r_min] before `x_max`.
pub fn box_zeta(system: &SelfSimilarSystem, x_max: f64, opts: &ProfileOptions) -> Result<BoxZeta> {
    let profile = certified_profile(system, x_max, opts)?;
    let x1 = *profile.step.breakpoints().first().ok_or_else(|| {
        Error::Indeterminate(format!("N_B has no jump below x = {x_max}; raise x_max"))
    })?;
    let ratios = system.ratios();
    let l = lalley_l(system, &profile.step, None)?;
    let r_min = ratios.iter().map(|r| r.value()).fold(1.0, f64::min);
    let (start, _, last) = *l.pieces().last().expect("a step function has a piece");
    if last == 0 && start / r_min <= x_max {
        let delta = 1.0 / start.max(x1);
        let closed = delta_disjoint_box_zeta(&ratios, x1, delta, &l)?;
        return Ok(BoxZeta {
            x1,
            l,
            delta: Some(delta),
            zeta: ZetaEvaluator {
                closed,
                periodic: Vec::new(),
                sigma0: 0.0,
            },
            profile,
        });
    }
    if let Some(periodic) = detect_periodic_tail(&l, PERIOD_REPEATS) {
        let zeta = osc_box_zeta(&ratios, x1, &periodic)?;
        return Ok(BoxZeta {
            x1,
            l: periodic,
            delta: None,
            zeta,
            profile,
        });
    }
    Err(Error::Indeterminate(format!(
        "error term L shows neither a zero nor a periodic tail up to x = {x_max}; raise x_max"
    )))
}

/// Tolerance on |Re ω − D| for principal complex dimensions.
pub const PRINCIPAL_TOL: f64 = 1e-8;

/// Below this gap between D and the next real part the screen cannot be placed.
pub const SCREEN_GAP_MIN: f64 = 1e-6;

/// Roots with |Re ω − D| ≤ 1e−8, sorted by imaginary part.
pub fn principal_dims(roots: &RootSet, d: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = roots
        .roots
        .iter()
        .map(|r| r.location)
        .filter(|w| (w.re - d).abs() <= PRINCIPAL_TOL)
        .collect();
    out.sort_by(|a, b| a.im.total_cmp(&b.im));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Measurable,
    NotMeasurable,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurabilityReport {
    pub dimension: f64,
    /// Poles on Re s = D that survive the numerator (cancelled ones are dropped).
    pub principal_dims: Vec<Complex64>,
    pub verdict: Verdict,
    pub content: Option<f64>,
    pub oscillation_period: Option<f64>,
    /// Why the verdict is indeterminate, when it is.
    pub note: Option<String>,
}

impl MeasurabilityReport {
    fn indeterminate(d: f64, principal: Vec<Complex64>, note: String) -> Self {
        Self {
            dimension: d,
            principal_dims: principal,
            verdict: Verdict::Indeterminate,
            content: None,
            oscillation_period: None,
            note: Some(note),
        }
    }

    /// JSON {dimension, verdict, content, principal_dims, period}.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "dimension": fmt17(self.dimension),
            "verdict": self.verdict,
            "content": self.content.map(fmt17),
            "principal_dims": self
                .principal_dims
                .iter()
                .map(|w| json!({"re": fmt17(w.re), "im": fmt17(w.im)}))
                .collect::<Vec<_>>(),
            "period": self.oscillation_period.map(fmt17),
        });
        if let Some(n) = &self.note {
            v["note"] = json!(n);
        }
        v
    }
}

/// Decides box-counting (or Minkowski) measurability from the poles on Re s = D.
///
/// `roots` must come from a window reaching left of D so that a vertical
/// screen fits between D and every other root.
pub fn measurability_report<Z: ZetaFunction + ?Sized>(zeta: &Z, roots: &RootSet, d: f64) -> Result<MeasurabilityReport> {
    let on_line = principal_dims(roots, d);
    match residue_simple(zeta, Complex64::new(d, 0.0)) {
        Err(Error::Removable(_)) => {
            return Err(Error::Inconsistent {
                x: d,
                reason: "D is not a pole of the zeta function".into(),
            })
        }
        Err(Error::NotSimple(_)) => {
            return Ok(MeasurabilityReport::indeterminate(d, on_line, "pole at D is not simple".into()))
        }
        Err(e) => return Err(e),
        Ok(_) => {}
    }
    if !(roots.window.sigma_min < d) {
        return Ok(MeasurabilityReport::indeterminate(
            d,
            on_line,
            "root window does not reach left of D".into(),
        ));
    }
    let next = roots
        .roots
        .iter()
        .map(|r| r.location.re)
        .filter(|re| (re - d).abs() > PRINCIPAL_TOL)
        .fold(roots.window.sigma_min, f64::max);
    if d - next <= SCREEN_GAP_MIN {
        return Ok(MeasurabilityReport::indeterminate(
            d,
            on_line,
            format!("no screen fits between D and the root at Re = {next}"),
        ));
    }
    let mut candidates = on_line;
    if let Some(g) = roots.generator.as_ref().filter(|g| g.period > roots.window.t_max + PRINCIPAL_TOL) {
        // D ± ip are poles of the denominator even when the window is lower than p
        candidates.push(Complex64::new(d, -g.period));
        candidates.push(Complex64::new(d, g.period));
        candidates.sort_by(|a, b| a.im.total_cmp(&b.im));
    }
    let mut principal = Vec::new();
    let mut residues = Vec::new();
    for w in candidates {
        match residue_simple(zeta, w) {
            Ok(r) => {
                principal.push(w);
                residues.push(r);
            }
            Err(Error::Removable(_)) => {}
            Err(Error::NotSimple(_)) => {
                return Ok(MeasurabilityReport::indeterminate(d, principal, format!("pole at {w} is not simple")))
            }
            Err(e) => return Err(e),
        }
    }
    let real_only = principal.iter().all(|w| w.im.abs() <= PRINCIPAL_TOL);
    if real_only {
        let res = residues[principal.iter().position(|w| w.im.abs() <= PRINCIPAL_TOL).unwrap()];
        let content = res.re / d;
        if !(content > 0.0) {
            return Ok(MeasurabilityReport::indeterminate(
                d,
                principal,
                format!("residue {res} at D does not give a positive content"),
            ));
        }
        return Ok(MeasurabilityReport {
            dimension: d,
            principal_dims: principal,
            verdict: Verdict::Measurable,
            content: Some(content),
            oscillation_period: None,
            note: None,
        });
    }
    let period = roots.generator.as_ref().map(|g| g.period).or_else(|| {
        principal
            .iter()
            .map(|w| w.im.abs())
            .filter(|t| *t > PRINCIPAL_TOL)
            .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.min(t))))
    });
    Ok(MeasurabilityReport {
        dimension: d,
        principal_dims: principal,
        verdict: Verdict::NotMeasurable,
        content: None,
        oscillation_period: period,
        note: None,
    })
}

/// Minkowski content 2^{1−D} res(ζ; D) / (D(1 − D)) of a fractal string.
pub fn minkowski_content_string<Z: ZetaFunction + ?Sized>(zeta: &Z, d: f64) -> Result<f64> {
    if !(d > 0.0 && d < 1.0) {
        return Err(Error::InvalidInput(format!("dimension {d} is not in (0, 1)")));
    }
    let r = crate::roots::ScalingVector::new(zeta.ratios().to_vec())?;
    if let Some(form) = classify_lattice(&r).form() {
        let shifted = Complex64::new(d, form.period());
        match residue_simple(zeta, shifted) {
            Err(Error::Removable(_)) => {}
            Err(e) => return Err(e),
            Ok(_) => {
                return Err(Error::NotMeasurable(format!(
                    "poles at D + i·{}·k, k ∈ Z, are principal",
                    form.period()
                )))
            }
        }
    }
    let res = residue_simple(zeta, Complex64::new(d, 0.0))?;
    Ok(2f64.powf(1.0 - d) * res.re / (d * (1.0 - d)))
}

/// Simple poles with their residues, for the explicit formula.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueSet {
    pub terms: Vec<(Complex64, Complex64)>,
    /// Vertical period of the lattice family, when there is one.
    pub period: Option<f64>,
}

/// Residues of `zeta` at every root; cancelled poles are skipped, a
/// multiple pole is unsupported.
pub fn residues_at<Z: ZetaFunction + Sync + ?Sized>(zeta: &Z, roots: &RootSet) -> Result<ResidueSet> {
    let found = par::map(&roots.roots, |r| {
        if r.multiplicity > 1 {
            return Err(Error::Unsupported(format!("pole at {} has multiplicity {}", r.location, r.multiplicity)));
        }
        match residue_simple(zeta, r.location) {
            Ok(res) => Ok(Some((r.location, res))),
            Err(Error::Removable(_)) => Ok(None),
            Err(Error::NotSimple(w)) => Err(Error::Unsupported(format!("pole at {w} is not simple"))),
            Err(e) => Err(e),
        }
    });
    let mut terms = Vec::new();
    for f in found {
        if let Some(t) = f? {
            terms.push(t);
        }
    }
    Ok(ResidueSet {
        terms,
        period: roots.generator.as_ref().map(|g| g.period),
    })
}

/// Value of the explicit formula; `imaginary` is what conjugate pairing left over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplicitValue {
    pub value: f64,
    pub imaginary: f64,
    pub terms: usize,
}

/// Σ res(ω) x^ω / ω over poles with |Im ω| ≤ k_max·p (or the 2·k_max + 1
/// poles nearest the real axis when there is no period), plus ζ(0).
pub fn explicit_counting(
    residues: &ResidueSet,
    zeta_at_zero: Option<f64>,
    x: f64,
    k_max: usize,
) -> Result<ExplicitValue> {
    if !(x > 0.0) {
        return Err(Error::InvalidInput("x must be positive".into()));
    }
    let mut chosen: Vec<(Complex64, Complex64)> = residues.terms.clone();
    chosen.sort_by(|a, b| a.0.im.abs().total_cmp(&b.0.im.abs()).then(a.0.im.total_cmp(&b.0.im)));
    match residues.period {
        Some(p) => {
            let t = (k_max as f64 + 0.5) * p;
            chosen.retain(|(w, _)| w.im.abs() <= t);
        }
        None => chosen.truncate(2 * k_max + 1),
    }
    if chosen.iter().any(|(w, _)| w.norm() == 0.0) {
        return Err(Error::Unsupported("pole at s = 0".into()));
    }
    let lx = x.ln();
    let parts = par::map(&chosen, |(w, r)| r * (w * lx).exp() / w);
    let mut sum = pairwise_sum(&parts);
    if let Some(z0) = zeta_at_zero {
        sum += z0;
    }
    Ok(ExplicitValue {
        value: sum.re,
        imaginary: sum.im,
        terms: chosen.len(),
    })
}

fn pairwise_sum(v: &[Complex64]) -> Complex64 {
    match v.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => v[0],
        n => pairwise_sum(&v[..n / 2]) + pairwise_sum(&v[n / 2..]),
    }
}

/// Growth exponent of a nondecreasing sampled function, by log-log regression.
pub fn generalized_dimension(samples: &[(f64, f64)]) -> Result<Regression> {
    if samples.windows(2).any(|w| w[1].0 < w[0].0 || w[1].1 < w[0].1) {
        return Err(Error::InvalidInput("samples must be nondecreasing in x and f".into()));
    }
    dimension_regress(samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steadiness {
    pub steady: bool,
    /// Tail minimum of f(x)/x^D.
    pub lower: f64,
    /// Tail maximum of f(x)/x^D.
    pub upper: f64,
}

/// Relative spread of f(x)/x^D below which a function counts as steady.
pub const STEADY_TOL: f64 = 1e-2;

/// Tail extremes of f(x)/x^D over the last decade.
pub fn steadiness(samples: &[(f64, f64)], d: f64) -> Steadiness {
    let (lower, upper) = content_bounds(samples, d);
    Steadiness {
        steady: lower > 0.0 && upper.is_finite() && (upper - lower) <= STEADY_TOL * upper,
        lower,
        upper,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::roots::{lattice_roots, moran_root, LatticeVerdict, ScalingVector, Window};
    use crate::step::StepFunction;
    use crate::strings::gaps_of;
    use crate::zeta::{generator_zeta, osc_box_zeta, self_similar_zeta};

    fn lattice_set(r: &ScalingVector, window: &Window) -> RootSet {
        match classify_lattice(r) {
            LatticeVerdict::Lattice { form, .. } => lattice_roots(r, &form, window).unwrap(),
            LatticeVerdict::Nonlattice(_) => panic!("expected lattice"),
        }
    }

    #[test]
    fn cantor_string_not_measurable() {
        let z = self_similar_zeta(&gaps_of(&builtin::cantor()).unwrap());
        let r = z.scaling_vector().unwrap();
        let d = moran_root(&r);
        let roots = lattice_set(&r, &Window::new(-1.0, 2.0, 20.0).unwrap());
        let rep = measurability_report(&z, &roots, d).unwrap();
        assert_eq!(rep.verdict, Verdict::NotMeasurable);
        let p = 2.0 * std::f64::consts::PI / 3f64.ln();
        assert!((rep.oscillation_period.unwrap() - p).abs() < 1e-12);
        assert_eq!(rep.principal_dims.len(), 7);
        assert!(matches!(minkowski_content_string(&z, d), Err(Error::NotMeasurable(_))));

        // a window lower than the period still sees the lattice shifts
        let short = lattice_set(&r, &Window::new(-1.0, 2.0, 5.0).unwrap());
        let rep = measurability_report(&z, &short, d).unwrap();
        assert_eq!(rep.verdict, Verdict::NotMeasurable);
        assert!(rep.principal_dims.iter().any(|w| (w.im - p).abs() < 1e-12));
    }

    #[test]
    fn interval_measurable_through_cancellation() {
        let l = StepFunction::new(vec![2.0, 4.0, 6.0, 8.0], vec![-1, 0, -1, 0, -1])
            .unwrap()
            .with_valid_to(8.0)
            .with_periodic_tail(4.0)
            .unwrap();
        let z = osc_box_zeta(&builtin::interval().ratios(), 2.0, &l).unwrap();
        let r = ScalingVector::new(builtin::interval().ratios()).unwrap();
        let roots = lattice_set(&r, &Window::new(0.5, 2.0, 40.0).unwrap());
        assert!(roots.roots.len() > 1);
        let rep = measurability_report(&z, &roots, 1.0).unwrap();
        assert_eq!(rep.verdict, Verdict::Measurable, "{rep:?}");
        assert!((rep.content.unwrap() - 0.5).abs() < 1e-10);
        assert_eq!(rep.principal_dims, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn window_must_reach_left_of_d() {
        let z = self_similar_zeta(&gaps_of(&builtin::cantor()).unwrap());
        let r = z.scaling_vector().unwrap();
        let d = moran_root(&r);
        let roots = lattice_set(&r, &Window::new(d, 2.0, 5.0).unwrap());
        let rep = measurability_report(&z, &roots, d).unwrap();
        assert_eq!(rep.verdict, Verdict::Indeterminate);
    }

    #[test]
    fn golden_string_content_formula() {
        let gaps = gaps_of(&builtin::golden()).unwrap();
        let z = self_similar_zeta(&gaps);
        let d = moran_root(&gaps.ratios);
        let g = gaps.gaps[0];
        let phi = builtin::phi();
        let res = g.powf(d) / (0.5f64.powf(d) * 2f64.ln() + phi * 2f64.powf(-phi * d) * 2f64.ln());
        let expected = 2f64.powf(1.0 - d) * res / (d * (1.0 - d));
        let m = minkowski_content_string(&z, d).unwrap();
        assert!((m - expected).abs() < 1e-12 * expected, "{m} vs {expected}");
    }

    #[test]
    fn box_zeta_pipeline() {
        let opts = ProfileOptions::default();
        let c = box_zeta(&builtin::cantor(), 20.0, &opts).unwrap();
        assert_eq!(c.x1, 2.0);
        assert!(c.delta.is_some());
        let h = c.zeta.numerator(Complex64::new(0.7, 0.0)).unwrap();
        assert!((h.re - 2f64.powf(-0.7)).abs() < 1e-14);

        let i = box_zeta(&builtin::interval(), 16.5, &opts).unwrap();
        assert!(i.delta.is_none());
        assert!(!i.zeta.periodic.is_empty());
        let res = residue_simple(&i.zeta, Complex64::new(1.0, 0.0)).unwrap();
        assert!((res.re - 0.5).abs() < 1e-10, "{res}");
    }

    #[test]
    fn single_root_formula() {
        let set = ResidueSet {
            terms: vec![(Complex64::new(0.5, 0.0), Complex64::new(0.3, 0.0))],
            period: None,
        };
        let v = explicit_counting(&set, None, 9.0, 10).unwrap();
        assert!((v.value - 0.3 * 3.0 / 0.5).abs() < 1e-14);
    }

    #[test]
    fn cantor_explicit_formula() {
        let gen = gaps_of(&builtin::cantor()).unwrap().generator();
        let z = generator_zeta(&gen);
        let r = z.scaling_vector().unwrap();
        let roots = lattice_set(&r, &Window::new(-1.0, 2.0, 200.5 * 2.0 * std::f64::consts::PI / 3f64.ln()).unwrap());
        let res = residues_at(&z, &roots).unwrap();
        let d = moran_root(&r);
        for n in 2..=6 {
            let x = 3f64.powf(n as f64 + 0.5);
            let v = explicit_counting(&res, Some(-1.0), x, 200).unwrap();
            let exact = (1u64 << n) as f64 - 1.0;
            assert!((v.value - exact).abs() / x.powf(d) < 1e-2, "{n}: {} vs {exact}", v.value);
            assert!(v.imaginary.abs() < 1e-9);
        }
    }

    #[test]
    fn steadiness_examples() {
        let lin: Vec<(f64, f64)> = (1..4000).map(|k| (k as f64 * 0.5, (k as f64 * 0.5).floor())).collect();
        let s = steadiness(&lin, 1.0);
        assert!(s.steady, "{s:?}");
        // Sierpinski endpoint samples: (3^n+3)/2 just above 2^n and at 2^{n+1}
        let d = 3f64.ln() / 2f64.ln();
        let mut samples = Vec::new();
        for n in 1..=12 {
            let v = (3f64.powi(n) + 3.0) / 2.0;
            samples.push((2f64.powi(n) * (1.0 + 1e-12), v));
            samples.push((2f64.powi(n + 1), v));
        }
        let s = steadiness(&samples, d);
        assert!(!s.steady);
        assert!((s.lower - 1.0 / 6.0).abs() < 1e-3 && (s.upper - 0.5).abs() < 1e-3, "{s:?}");
        let g = generalized_dimension(&lin[1..].to_vec()).unwrap();
        assert!((g.slope - 1.0).abs() < 0.01, "{g:?}");
        assert!(generalized_dimension(&[(1.0, 2.0), (2.0, 1.0)]).is_err());
    }
}
