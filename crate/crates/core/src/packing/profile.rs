//! Bracketed box-counting profiles and certified jump tables.

use std::collections::HashMap;
use std::sync::Mutex;

use super::{for_each_close_pair, max_packing_with, Slack};
use crate::error::{Error, Result};
use crate::geometry::{attractor_cloud_with, PointCloud, Seed, SelfSimilarSystem};
use crate::par;
use crate::scale::{fmt17, Scale};
use crate::step::StepFunction;

/// Relative resolution of jump bisection.
const JUMP_RESOLUTION: f64 = 1e-13;
/// Extra relative width applied to each jump bracket.
const BRACKET_FUDGE: f64 = 1e-11;
/// Points closer than this (relative to the cloud extent) are merged.
const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub seed: Seed,
    pub cloud_cap: usize,
    pub min_depth: usize,
    pub max_depth: usize,
    /// Accepted chance of snapping a jump to a wrong small-denominator surd.
    pub snap_confidence: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            seed: Seed::AllFixedPoints,
            cloud_cap: 200_000,
            min_depth: 1,
            max_depth: 24,
            snap_confidence: 1e-2,
        }
    }
}

/// One grid sample: lo ≤ N_B(F, x) ≤ hi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketSample {
    pub x: f64,
    pub lo: usize,
    /// None when 1/x does not exceed the cloud's dirt.
    pub hi: Option<usize>,
}

impl BracketSample {
    pub fn resolved(&self) -> bool {
        self.hi.is_some()
    }

    pub fn collapsed(&self) -> bool {
        self.hi == Some(self.lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxProfile {
    pub samples: Vec<BracketSample>,
    /// Packing count of the cloud itself (a lower bound for N_B), with exact cloud jumps.
    pub lower: StepFunction,
    pub depth: usize,
    pub dirt: f64,
}

impl BoxProfile {
    /// CSV with columns x, lo, hi, resolved; unresolved rows leave hi empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,lo,hi,resolved\n");
        for s in &self.samples {
            let hi = s.hi.map(|h| h.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{},{}\n", fmt17(s.x), s.lo, hi, s.resolved() as u8));
        }
        out
    }
}

/// Cloud used for packing: near-duplicates merged, dirt widened accordingly.
pub(crate) fn packing_cloud(system: &SelfSimilarSystem, depth: usize, seed: Seed, cap: usize) -> Result<PointCloud> {
    let cloud = attractor_cloud_with(system, depth, seed, cap)?.dedup();
    let extent = cloud.coords().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let tol = MERGE_TOL * extent;
    let n = cloud.len();
    let mut drop = vec![false; n];
    let mut any = false;
    for_each_close_pair(&cloud, tol, |i, j, _| {
        if !drop[i] {
            drop[j] = true;
            any = true;
        }
    });
    if !any {
        return Ok(cloud);
    }
    let kept: Vec<Vec<f64>> = cloud
        .points()
        .zip(&drop)
        .filter(|(_, d)| !**d)
        .map(|(p, _)| p.to_vec())
        .collect();
    Ok(PointCloud::from_points(cloud.dim(), &kept)?.with_meta(cloud.depth(), cloud.dirt() + tol))
}

/// Memoized lower/upper packing counts on a fixed cloud.
struct Counter<'a> {
    cloud: &'a PointCloud,
    /// Sorted coordinates of a 1D cloud.
    sorted: Option<Vec<f64>>,
    lo: Mutex<HashMap<u64, usize>>,
}

impl<'a> Counter<'a> {
    fn new(cloud: &'a PointCloud) -> Self {
        let sorted = (cloud.dim() == 1).then(|| {
            let mut xs = cloud.coords().to_vec();
            xs.sort_by(f64::total_cmp);
            xs
        });
        Self {
            cloud,
            sorted,
            lo: Mutex::new(HashMap::new()),
        }
    }

    fn lo(&self, x: f64) -> Result<usize> {
        if let Some(v) = self.lo.lock().unwrap().get(&x.to_bits()) {
            return Ok(*v);
        }
        let v = self.pack(1.0 / x, Slack::Under)?;
        self.lo.lock().unwrap().insert(x.to_bits(), v);
        Ok(v)
    }

    fn hi(&self, x: f64) -> Result<Option<usize>> {
        let r = 1.0 / x - self.cloud.dirt() * (1.0 + 1e-9);
        if r <= 0.0 {
            return Ok(None);
        }
        self.pack(r, Slack::Over).map(Some)
    }

    fn pack(&self, radius: f64, slack: Slack) -> Result<usize> {
        match &self.sorted {
            Some(xs) => Ok(super::line_greedy(xs, slack.threshold(radius))),
            None => max_packing_with(self.cloud, radius, slack),
        }
    }

    /// Jumps of x ↦ lo(x) in (a, b] as (location 2/d, value after).
    fn jumps(&self, a: f64, b: f64, va: usize, vb: usize) -> Result<Vec<(f64, usize)>> {
        if va == vb {
            return Ok(Vec::new());
        }
        if b / a - 1.0 <= JUMP_RESOLUTION {
            return Ok(vec![(self.nominal(a, b), vb)]);
        }
        let m = (a * b).sqrt();
        let vm = self.lo(m)?;
        let mut left = self.jumps(a, m, va, vm)?;
        left.extend(self.jumps(m, b, vm, vb)?);
        Ok(left)
    }

    /// The exact cloud threshold 2/d for the pair distance d that switches inside (a, b].
    fn nominal(&self, a: f64, b: f64) -> f64 {
        let s = 1.0 + super::FLOAT_SLACK;
        let (d_lo, d_hi) = (2.0 * s / b, 2.0 * s / a);
        let mut best: Option<f64> = None;
        let mut consider = |d: f64| {
            if d >= d_lo * (1.0 - 1e-15) && d <= d_hi {
                let y = 2.0 / d;
                if best.map_or(true, |c| (y - b).abs() < (c - b).abs()) {
                    best = Some(y);
                }
            }
        };
        if let Some(xs) = &self.sorted {
            for (i, &x) in xs.iter().enumerate() {
                let from = i + xs[i..].partition_point(|&y| y - x < d_lo * (1.0 - 1e-15));
                for &y in xs[from..].iter().take_while(|&&y| y - x <= d_hi) {
                    consider(y - x);
                }
            }
        } else {
            for_each_close_pair(self.cloud, d_hi, |_, _, d| consider(d));
        }
        best.unwrap_or(b)
    }
}

/// Bracketed samples of N_B(F, ·) on a grid from a depth-`depth` cloud.
pub fn box_profile(system: &SelfSimilarSystem, depth: usize, x_grid: &[f64]) -> Result<BoxProfile> {
    box_profile_with(system, depth, x_grid, &ProfileOptions::default())
}

pub fn box_profile_with(
    system: &SelfSimilarSystem,
    depth: usize,
    x_grid: &[f64],
    opts: &ProfileOptions,
) -> Result<BoxProfile> {
    if depth == 0 {
        return Err(Error::InvalidInput("box_profile needs depth ≥ 1".into()));
    }
    if x_grid.is_empty() || x_grid.windows(2).any(|w| !(w[0] < w[1])) || !(x_grid[0] > 0.0) {
        return Err(Error::InvalidInput("x grid must be positive and strictly increasing".into()));
    }
    let cloud = packing_cloud(system, depth, opts.seed, opts.cloud_cap)?;
    let counter = Counter::new(&cloud);
    let samples = par::map(x_grid, |&x| -> Result<BracketSample> {
        Ok(BracketSample {
            x,
            lo: counter.lo(x)?,
            hi: counter.hi(x)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let x_start = start_point(system).min(x_grid[0]);
    let mut knots = vec![(x_start, counter.lo(x_start)?)];
    knots.extend(samples.iter().map(|s| (s.x, s.lo)));
    let segments: Vec<(f64, f64, usize, usize)> =
        knots.windows(2).map(|w| (w[0].0, w[1].0, w[0].1, w[1].1)).collect();
    let jumps = par::map(&segments, |&(a, b, va, vb)| counter.jumps(a, b, va, vb))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .concat();
    let lower = step_from_jumps(knots[0].1, &jumps, *x_grid.last().unwrap())?;
    Ok(BoxProfile {
        samples,
        lower,
        depth,
        dirt: cloud.dirt(),
    })
}

/// An x below which N_B(F, x) = 1.
fn start_point(system: &SelfSimilarSystem) -> f64 {
    let p0 = system.maps()[0].fixed_point();
    // diam F ≤ 2R, and N_B = 1 once 2/x ≥ diam F
    1.0 / (2.0 * system.radius_bound_from(&p0))
}

fn step_from_jumps(first: usize, jumps: &[(f64, usize)], valid_to: f64) -> Result<StepFunction> {
    let mut bps = Vec::with_capacity(jumps.len());
    let mut vals = vec![first as i64];
    for &(y, v) in jumps {
        if bps.last().map_or(false, |l: &f64| y <= *l) {
            // coincident thresholds: keep the later value
            *vals.last_mut().unwrap() = v as i64;
            continue;
        }
        bps.push(y);
        vals.push(v as i64);
    }
    Ok(StepFunction::new(bps, vals)?.with_valid_to(valid_to))
}

/// A located jump of N_B(F, ·).
#[derive(Debug, Clone, PartialEq)]
pub struct JumpBracket {
    /// The true jump lies in [lo, hi].
    pub lo: f64,
    pub hi: f64,
    /// Reported location: an exact surd when recognised, else the cloud threshold.
    pub location: f64,
    pub exact: Option<Scale>,
    pub before: usize,
    pub after: usize,
}

/// N_B(F, ·) on (0, x_max], exact between certified jump brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedProfile {
    pub step: StepFunction,
    pub jumps: Vec<JumpBracket>,
    pub depth: usize,
    pub dirt: f64,
}

/// Deepens the cloud until every jump of N_B(F, ·) up to x_max is isolated.
///
/// A cloud jump at y bounds the true jump to [1/(1/y + η), y] with η the cloud
/// dirt; between disjoint brackets the lower and upper packing counts agree.
/// Jump locations are then recognised as square roots of rationals: directly
/// when the cloud threshold already is one, otherwise as the simplest rational
/// or surd inside the bracket when the bracket is narrow enough for the
/// `snap_confidence` level. Planar systems stop at the first certified depth;
/// on the line packing is cheap and the deepest cloud under the cap is used.
pub fn certified_profile(system: &SelfSimilarSystem, x_max: f64, opts: &ProfileOptions) -> Result<CertifiedProfile> {
    if !(x_max > 0.0) {
        return Err(Error::InvalidInput(format!("x_max {x_max} must be positive")));
    }
    let n = system.len() as f64;
    let mut last_problem = String::from("cloud cap reached before any attempt");
    let mut best = None;
    for depth in opts.min_depth..=opts.max_depth {
        let seeds = if opts.seed == Seed::AllFixedPoints { n } else { 1.0 };
        if n.powi(depth as i32) * seeds > opts.cloud_cap as f64 {
            break;
        }
        let cloud = packing_cloud(system, depth, opts.seed, opts.cloud_cap)?;
        let eta = cloud.dirt() * (1.0 + 1e-9);
        if 1.0 / x_max <= 4.0 * eta {
            continue;
        }
        if system.dim() > 1 && cloud.len() > super::EXACT_CAP {
            break;
        }
        let counter = Counter::new(&cloud);
        let x_start = start_point(system);
        let x_top = 1.0 / (1.0 / x_max - eta);
        let (v0, vt) = (counter.lo(x_start)?, counter.lo(x_top)?);
        let raw = counter.jumps(x_start, x_top, v0, vt)?;
        match bracket_jumps(&raw, v0, eta, x_max, opts.snap_confidence) {
            Ok(jumps) => {
                let kept: Vec<(f64, usize)> =
                    jumps.iter().filter(|j| j.location < x_max).map(|j| (j.location, j.after)).collect();
                let step = step_from_jumps(v0, &kept, x_max)?;
                let found = CertifiedProfile {
                    step,
                    jumps,
                    depth,
                    dirt: cloud.dirt(),
                };
                // 1D clouds are cheap, so use the deepest one the cap allows
                if system.dim() > 1 {
                    return Ok(found);
                }
                best = Some(found);
            }
            Err(problem) => last_problem = problem,
        }
    }
    if let Some(found) = best {
        return Ok(found);
    }
    Err(Error::Indeterminate(format!(
        "box-counting profile up to x = {x_max} not certified: {last_problem}"
    )))
}

fn bracket_jumps(
    raw: &[(f64, usize)],
    first: usize,
    eta: f64,
    x_max: f64,
    confidence: f64,
) -> std::result::Result<Vec<JumpBracket>, String> {
    let mut out: Vec<JumpBracket> = Vec::new();
    let mut before = first;
    for &(y, after) in raw {
        let lo = (1.0 / (1.0 / y + eta)) * (1.0 - BRACKET_FUDGE);
        let hi = y * (1.0 + BRACKET_FUDGE);
        if lo > x_max {
            break;
        }
        if let Some(prev) = out.last() {
            if lo <= prev.hi {
                return Err(format!("jump brackets overlap on [{}, {}]", prev.lo, hi));
            }
        }
        let (location, exact) = snap(y, lo, hi, confidence);
        if exact.is_none() && lo <= x_max && x_max < hi {
            return Err(format!("jump bracket [{lo}, {hi}] straddles x_max"));
        }
        out.push(JumpBracket {
            lo,
            hi,
            location,
            exact,
            before,
            after,
        });
        before = after;
    }
    Ok(out)
}

fn snap(y: f64, lo: f64, hi: f64, confidence: f64) -> (f64, Option<Scale>) {
    let direct = Scale::recognise(1.0 / y, 1 << 16, 1e-13);
    if direct.square().is_some() {
        return (1.0 / direct.value(), Some(direct));
    }
    let q_direct = (confidence / (0.3 * (hi - lo))).sqrt().floor();
    if q_direct >= 1.0 {
        if let Some((p, q)) = simplest_rational(lo, hi, q_direct as i64) {
            let scale = Scale::rational(num_rational::Rational64::new(q, p));
            return (1.0 / scale.value(), Some(scale));
        }
    }
    let width = hi * hi - lo * lo;
    let q_max = (confidence / (0.3 * width)).sqrt().floor();
    if q_max >= 1.0 {
        if let Some((p, q)) = simplest_rational(lo * lo, hi * hi, q_max as i64) {
            let scale = Scale::sqrt_rational(num_rational::Rational64::new(q, p));
            return (1.0 / scale.value(), Some(scale));
        }
    }
    (y, None)
}

/// The rational p/q in [lo, hi] with the smallest q ≤ q_max, if any.
pub(crate) fn simplest_rational(lo: f64, hi: f64, q_max: i64) -> Option<(i64, i64)> {
    fn go(lo: f64, hi: f64, depth: usize) -> Option<(i64, i64)> {
        if depth > 40 || !(lo <= hi) {
            return None;
        }
        let c = lo.ceil();
        if c <= hi {
            return Some((c as i64, 1));
        }
        let f = lo.floor();
        let (p, q) = go(1.0 / (hi - f), 1.0 / (lo - f), depth + 1)?;
        Some(((f as i64).checked_mul(p)?.checked_add(q)?, p))
    }
    let (p, q) = go(lo, hi, 0)?;
    (q <= q_max && p > 0).then_some((p, q))
}
