//! Fractal strings: nonincreasing length sequences with multiplicities.
//!
//! Self-similar strings are generated lazily, largest lengths first, from
//! their first-generation lengths and scaling ratios; the generated prefix
//! is shared between threads behind a mutex.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::geometry::SelfSimilarSystem;
use crate::roots::ScalingVector;
use crate::scale::{fmt17, Ratio};
use crate::step::StepFunction;

/// Hard cap on materialized distinct lengths.
pub const DEFAULT_TERM_CAP: usize = 10_000_000;

/// Relative tolerance under which generated lengths are merged.
const MERGE_TOL: f64 = 1e-12;

/// Lengths `g_k · r_{w₁} ⋯ r_{w_n}` over all gaps k and words w.
#[derive(Debug, Clone, PartialEq)]
pub struct StringGenerator {
    /// First-generation lengths (already multiplied by the total length).
    pub gaps: Vec<f64>,
    pub ratios: Vec<Ratio>,
}

impl StringGenerator {
    pub fn new(gaps: Vec<f64>, ratios: Vec<Ratio>) -> Result<Self> {
        if gaps.is_empty() || gaps.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::NotAString("gaps must be positive".into()));
        }
        if ratios.is_empty() {
            return Err(Error::NotAString("no scaling ratios".into()));
        }
        let total: f64 = ratios.iter().map(|r| r.value()).sum();
        if total >= 1.0 {
            return Err(Error::NotAString(format!("ratios sum to {total} >= 1")));
        }
        Ok(Self { gaps, ratios })
    }

    /// Σ_k g_k^σ / (1 − Σ_j r_j^σ) − (sum of the first terms); used as a tail bound.
    fn total_power(&self, sigma: f64) -> Option<f64> {
        let denom = 1.0 - self.ratios.iter().map(|r| r.value().powf(sigma)).sum::<f64>();
        (denom > 0.0).then(|| self.gaps.iter().map(|g| g.powf(sigma)).sum::<f64>() / denom)
    }
}

#[derive(Debug, Clone)]
struct Node {
    value: f64,
    counts: Vec<u32>,
    last: usize,
    multiplicity: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.value.total_cmp(&other.value) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value)
    }
}

#[derive(Debug, Clone)]
struct State {
    lengths: Vec<f64>,
    multiplicities: Vec<u64>,
    heap: BinaryHeap<Node>,
    pending: Option<(f64, u64)>,
    overflow: bool,
}

impl State {
    fn exhausted(&self) -> bool {
        self.heap.is_empty() && self.pending.is_none()
    }

    /// Commits the next distinct length; false when nothing is left.
    fn advance(&mut self, ratios: &[f64]) -> bool {
        loop {
            let top = self.heap.peek().map(|n| n.value);
            match (self.pending, top) {
                (None, None) => return false,
                (Some((len, m)), next) if next.is_none_or(|v| v < len * (1.0 - MERGE_TOL)) => {
                    self.lengths.push(len);
                    self.multiplicities.push(m);
                    self.pending = None;
                    return true;
                }
                _ => {
                    let node = self.heap.pop().unwrap();
                    self.pending = match self.pending {
                        Some((len, m)) => match m.checked_add(node.multiplicity) {
                            Some(sum) => Some((len, sum)),
                            None => {
                                self.overflow = true;
                                return false;
                            }
                        },
                        None => Some((node.value, node.multiplicity)),
                    };
                    if !self.expand(&node, ratios) {
                        self.overflow = true;
                        return false;
                    }
                }
            }
        }
    }

    fn expand(&mut self, node: &Node, ratios: &[f64]) -> bool {
        let n: u64 = node.counts.iter().map(|c| *c as u64).sum();
        for (j, r) in ratios.iter().enumerate().skip(node.last) {
            let mut counts = node.counts.clone();
            counts[j] += 1;
            // multinomial(n+1; counts) = multinomial(n; old) · (n+1) / counts[j]
            let m = node.multiplicity as u128 * (n as u128 + 1) / counts[j] as u128;
            let Ok(multiplicity) = u64::try_from(m) else {
                return false;
            };
            self.heap.push(Node {
                value: node.value * r,
                counts,
                last: j,
                multiplicity,
            });
        }
        true
    }
}

/// A fractal string l₁ > l₂ > … with multiplicities m_n.
#[derive(Debug)]
pub struct FractalString {
    state: Mutex<State>,
    generator: Option<StringGenerator>,
    ratio_values: Vec<f64>,
    cap: usize,
}

impl Clone for FractalString {
    fn clone(&self) -> Self {
        Self {
            state: Mutex::new(self.state.lock().unwrap().clone()),
            generator: self.generator.clone(),
            ratio_values: self.ratio_values.clone(),
            cap: self.cap,
        }
    }
}

impl FractalString {
    /// A finite string from strictly decreasing lengths.
    pub fn finite(lengths: Vec<f64>, multiplicities: Vec<u64>) -> Result<Self> {
        if lengths.len() != multiplicities.len() {
            return Err(Error::NotAString("lengths and multiplicities differ in count".into()));
        }
        if lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::NotAString("lengths must be positive and finite".into()));
        }
        if lengths.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::NotAString("lengths must be strictly decreasing".into()));
        }
        if multiplicities.contains(&0) {
            return Err(Error::NotAString("multiplicities must be positive".into()));
        }
        Ok(Self {
            state: Mutex::new(State {
                lengths,
                multiplicities,
                heap: BinaryHeap::new(),
                pending: None,
                overflow: false,
            }),
            generator: None,
            ratio_values: Vec::new(),
            cap: usize::MAX,
        })
    }

    /// The lazily generated self-similar string of `generator`.
    pub fn self_similar(generator: StringGenerator) -> Self {
        let ratio_values: Vec<f64> = generator.ratios.iter().map(|r| r.value()).collect();
        let heap = generator
            .gaps
            .iter()
            .map(|g| Node {
                value: *g,
                counts: vec![0; ratio_values.len()],
                last: 0,
                multiplicity: 1,
            })
            .collect();
        Self {
            state: Mutex::new(State {
                lengths: Vec::new(),
                multiplicities: Vec::new(),
                heap,
                pending: None,
                overflow: false,
            }),
            generator: Some(generator),
            ratio_values,
            cap: DEFAULT_TERM_CAP,
        }
    }

    pub fn from_gaps(gaps: &StringGaps) -> Self {
        Self::self_similar(gaps.generator())
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn generator(&self) -> Option<&StringGenerator> {
        self.generator.as_ref()
    }

    /// True when the whole string has been materialized.
    pub fn is_finite(&self) -> bool {
        self.state.lock().unwrap().exhausted()
    }

    /// The first `n` terms (fewer if the string is finite).
    pub fn terms(&self, n: usize) -> Result<Vec<(f64, u64)>> {
        let mut st = self.state.lock().unwrap();
        while st.lengths.len() < n {
            if st.lengths.len() >= self.cap {
                return Err(Error::Capacity {
                    what: "fractal string terms",
                    needed: n,
                    limit: self.cap,
                });
            }
            if !st.advance(&self.ratio_values) {
                if st.overflow {
                    return Err(Error::Numerical("multiplicity overflows u64".into()));
                }
                break;
            }
        }
        let k = n.min(st.lengths.len());
        Ok(st.lengths[..k].iter().copied().zip(st.multiplicities[..k].iter().copied()).collect())
    }

    /// All terms with length ≥ `min_length`.
    pub fn terms_down_to(&self, min_length: f64) -> Result<Vec<(f64, u64)>> {
        let mut st = self.state.lock().unwrap();
        loop {
            if st.lengths.last().is_some_and(|l| *l < min_length) || st.exhausted() {
                break;
            }
            if st.lengths.len() >= self.cap {
                let partial = st
                    .lengths
                    .iter()
                    .zip(&st.multiplicities)
                    .map(|(_, m)| *m)
                    .fold(0u64, u64::saturating_add);
                return Err(Error::Truncated {
                    count: st.lengths.len(),
                    partial,
                });
            }
            if !st.advance(&self.ratio_values) {
                if st.overflow {
                    return Err(Error::Numerical("multiplicity overflows u64".into()));
                }
                break;
            }
        }
        let k = st.lengths.partition_point(|l| *l >= min_length);
        Ok(st.lengths[..k].iter().copied().zip(st.multiplicities[..k].iter().copied()).collect())
    }

    /// Bound on Σ m_n l_n^σ over the terms after the first `skip`, when the
    /// string has a generator and σ exceeds its dimension.
    pub fn tail_bound(&self, sigma: f64, skip: usize) -> Option<f64> {
        let total = self.generator.as_ref()?.total_power(sigma)?;
        let head: f64 = self.terms(skip).ok()?.iter().map(|(l, m)| *m as f64 * l.powf(sigma)).sum();
        Some((total - head).max(0.0))
    }

    /// CSV of the materialized prefix of `n` terms.
    pub fn to_csv(&self, n: usize) -> Result<String> {
        let mut out = String::from("length,multiplicity\n");
        for (l, m) in self.terms(n)? {
            out.push_str(&format!("{},{}\n", fmt17(l), m));
        }
        Ok(out)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lengths = Vec::new();
        let mut mults = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("length")) {
                continue;
            }
            let bad = || Error::InvalidInput(format!("line {}: expected `length,multiplicity`", i + 1));
            let (l, m) = line.split_once(',').ok_or_else(bad)?;
            lengths.push(l.trim().parse::<f64>().map_err(|_| bad())?);
            mults.push(m.trim().parse::<u64>().map_err(|_| bad())?);
        }
        Self::finite(lengths, mults)
    }
}

/// N_L(x) = Σ m_n over l_n⁻¹ ≤ x.
pub fn string_counting(string: &FractalString, x: f64) -> Result<u64> {
    if !(x > 0.0) {
        return Ok(0);
    }
    let terms = string.terms_down_to(1.0 / x)?;
    Ok(terms
        .iter()
        .filter(|(l, _)| 1.0 / l <= x)
        .map(|(_, m)| *m)
        .sum())
}

/// The box-counting fractal string of a profile: one length per jump, with
/// the jump size as multiplicity (the first takes the whole value after it).
pub fn box_string(profile: &StepFunction) -> Result<FractalString> {
    if !profile.is_nondecreasing() {
        return Err(Error::InvalidInput("profile is not nondecreasing".into()));
    }
    if profile.first_value() < 1 {
        return Err(Error::InvalidInput("profile must start at 1 or more".into()));
    }
    let p = profile.compress();
    let values = p.values();
    let lengths: Vec<f64> = p.breakpoints().iter().map(|x| 1.0 / x).collect();
    let mults: Vec<u64> = (0..lengths.len())
        .map(|i| {
            if i == 0 {
                values[1] as u64
            } else {
                (values[i + 1] - values[i]) as u64
            }
        })
        .collect();
    FractalString::finite(lengths, mults)
}

/// [`box_string`] of a bracketed profile, refusing jumps whose location is
/// not pinned down by collapsed brackets on both sides.
pub fn box_string_checked(profile: &crate::packing::BoxProfile) -> Result<FractalString> {
    for w in profile.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.lo != b.lo && !(a.collapsed() && b.collapsed()) {
            return Err(Error::Indeterminate(format!(
                "jump in ({}, {}] is not resolved by the brackets",
                a.x, b.x
            )));
        }
    }
    box_string(&profile.lower)
}

/// Gap data of a self-similar string on R: total length and gaps normalized
/// so that Σ g_k + Σ r_j = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StringGaps {
    pub total_length: f64,
    pub gaps: Vec<f64>,
    pub ratios: ScalingVector,
}

impl StringGaps {
    pub fn new(total_length: f64, mut gaps: Vec<f64>, ratios: ScalingVector) -> Result<Self> {
        gaps.sort_by(f64::total_cmp);
        let sum: f64 = gaps.iter().sum::<f64>() + ratios.values().iter().sum::<f64>();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotAString(format!("gaps and ratios sum to {sum}, not 1")));
        }
        if gaps.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            return Err(Error::NotAString("gaps must lie in (0, 1)".into()));
        }
        Ok(Self {
            total_length,
            gaps,
            ratios,
        })
    }

    pub fn generator(&self) -> StringGenerator {
        StringGenerator {
            gaps: self.gaps.iter().map(|g| g * self.total_length).collect(),
            ratios: self.ratios.ratios().to_vec(),
        }
    }
}

/// Gaps of the convex hull I of the attractor left uncovered by the first-level images.
pub fn gaps_of(system: &SelfSimilarSystem) -> Result<StringGaps> {
    if system.dim() != 1 {
        return Err(Error::InvalidInput(format!(
            "gaps need a system on the line, got dimension {}",
            system.dim()
        )));
    }
    let ratios = ScalingVector::new(system.ratios())?;
    let sum: f64 = ratios.values().iter().sum();
    if sum >= 1.0 {
        return Err(Error::NotAString(format!("ratios sum to {sum} >= 1")));
    }
    let image = |m: &crate::geometry::Similarity, (a, b): (f64, f64)| {
        let (p, q) = (m.apply(&[a])[0], m.apply(&[b])[0]);
        (p.min(q), p.max(q))
    };
    // the hull is the fixed point of I ↦ hull(∪ φ_j(I))
    let fixed: Vec<f64> = system.maps().iter().map(|m| m.fixed_point()[0]).collect();
    let mut hull = (
        fixed.iter().copied().fold(f64::INFINITY, f64::min),
        fixed.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    );
    for _ in 0..10_000 {
        let next = system.maps().iter().map(|m| image(m, hull)).fold(hull, |h, (a, b)| (h.0.min(a), h.1.max(b)));
        if next == hull {
            break;
        }
        hull = next;
    }
    let length = hull.1 - hull.0;
    if !(length > 0.0) {
        return Err(Error::InvalidSystem("attractor is a single point".into()));
    }
    let mut images: Vec<(f64, f64)> = system.maps().iter().map(|m| image(m, hull)).collect();
    images.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = 1e-12 * length;
    let mut gaps = Vec::new();
    for w in images.windows(2) {
        let g = w[1].0 - w[0].1;
        if g < -tol {
            return Err(Error::InvalidSystem("first-level images overlap".into()));
        }
        if g > tol {
            gaps.push(g / length);
        }
    }
    // absorb rounding so the defining identity holds to the last bits
    let defect = 1.0 - sum - gaps.iter().sum::<f64>();
    if let Some(last) = gaps.last_mut() {
        if defect.abs() <= 1e-12 {
            *last += defect;
        }
    }
    StringGaps::new(length, gaps, ratios)
}

/// Fat Cantor string: lengths 4⁻ⁿ with multiplicity 2ⁿ⁻¹.
pub fn fat_cantor_string() -> FractalString {
    let quarter = Ratio::rational(1, 4).expect("1/4");
    FractalString::self_similar(StringGenerator {
        gaps: vec![0.25],
        ratios: vec![quarter.clone(), quarter],
    })
}

/// Least-squares fit of log N against log x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the band around the slope: twice its standard error,
    /// or the largest residual spread over the span, whichever is larger.
    pub band: f64,
    pub samples: usize,
}

/// Box-dimension estimate from `(x, N)` samples (N ≥ 1) spanning 3 decades.
pub fn dimension_regress(samples: &[(f64, f64)]) -> Result<Regression> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(x, n)| *x > 0.0 && *n >= 1.0)
        .map(|(x, n)| (x.ln(), n.ln()))
        .collect();
    if pts.len() < 8 {
        return Err(Error::InvalidInput(format!("need 8 samples with N >= 1, got {}", pts.len())));
    }
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (u, _)| (a.min(*u), b.max(*u)));
    if (hi - lo) / std::f64::consts::LN_10 < 3.0 - 1e-9 {
        return Err(Error::InvalidInput(format!(
            "samples span {:.3} decades, need 3",
            (hi - lo) / std::f64::consts::LN_10
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = pts.iter().map(|p| p.1 - intercept - slope * p.0).collect();
    let rss: f64 = residuals.iter().map(|r| r * r).sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    let spread = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs())) / (hi - lo);
    Ok(Regression {
        slope,
        intercept,
        band: (2.0 * se).max(spread),
        samples: pts.len(),
    })
}

/// (min, max) of N/x^D over the last decade of samples.
pub fn content_bounds(samples: &[(f64, f64)], d: f64) -> (f64, f64) {
    content_bounds_over(samples, d, 1.0)
}

/// (min, max) of N/x^D over samples with x within `decades` of the largest.
pub fn content_bounds_over(samples: &[(f64, f64)], d: f64, decades: f64) -> (f64, f64) {
    let x_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let cut = x_max / 10f64.powf(decades);
    samples
        .iter()
        .filter(|(x, _)| *x >= cut)
        .map(|(x, n)| n / x.powf(d))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}
