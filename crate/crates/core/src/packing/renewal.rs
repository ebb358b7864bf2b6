//! Renewal-equation evaluation of N_B and the error term L.

use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::geometry::SelfSimilarSystem;
use crate::step::StepFunction;

/// Memoized N(x) = Σ_j N(r_j x) + L(x) above a base table.
///
/// With no L this is the δ-disjoint renewal equation, exact for x > 1/δ.
pub struct RenewalTable {
    ratios: Vec<f64>,
    threshold: f64,
    base: StepFunction,
    l: Option<StepFunction>,
    memo: Mutex<HashMap<u64, i64>>,
}

impl RenewalTable {
    /// δ-disjoint table: the base must cover (0, 1/δ].
    pub fn delta_disjoint(system: &SelfSimilarSystem, delta: f64, base: StepFunction) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::InvalidInput(format!("δ = {delta} must be positive")));
        }
        let needed = 1.0 / delta;
        if base.valid_to() < needed * (1.0 - 1e-12) {
            return Err(Error::IncompleteBase {
                needed,
                covered: base.valid_to(),
            });
        }
        Ok(Self {
            ratios: system.ratios().iter().map(|r| r.value()).collect(),
            threshold: needed,
            base,
            l: None,
            memo: Mutex::new(HashMap::new()),
        })
    }

    /// General table: the base covers (0, X] and L is extended past its data by its tail.
    pub fn with_error_term(system: &SelfSimilarSystem, base: StepFunction, l: StepFunction) -> Result<Self> {
        let threshold = base.valid_to();
        if !threshold.is_finite() {
            return Err(Error::InvalidInput("base table needs a finite extent".into()));
        }
        Ok(Self {
            ratios: system.ratios().iter().map(|r| r.value()).collect(),
            threshold,
            base,
            l: Some(l),
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn count(&self, x: f64) -> i64 {
        if x <= self.threshold {
            return self.base.eval(x);
        }
        if let Some(v) = self.memo.lock().unwrap().get(&x.to_bits()) {
            return *v;
        }
        let mut v: i64 = self.ratios.iter().map(|r| self.count(r * x)).sum();
        if let Some(l) = &self.l {
            v += l.eval(x);
        }
        self.memo.lock().unwrap().insert(x.to_bits(), v);
        v
    }
}

/// N_B(F, x) for a δ-disjoint system from its base table on (0, 1/δ].
pub fn renewal_box_count(system: &SelfSimilarSystem, delta: f64, base: &StepFunction, x: f64) -> Result<i64> {
    Ok(RenewalTable::delta_disjoint(system, delta, base.clone())?.count(x))
}

/// N(x) = Σ N(r_j x) + L(x) past the base table, for systems that are not δ-disjoint.
pub fn extended_box_count(system: &SelfSimilarSystem, base: &StepFunction, l: &StepFunction, x: f64) -> Result<i64> {
    Ok(RenewalTable::with_error_term(system, base.clone(), l.clone())?.count(x))
}

/// L(x) = N(x) − Σ_j N(r_j x) on the profile's range.
///
/// With `delta` given, the δ-disjoint shape is enforced: L is nonpositive,
/// nondecreasing, at least 1 − N, and zero past 1/δ.
pub fn lalley_l(system: &SelfSimilarSystem, profile: &StepFunction, delta: Option<f64>) -> Result<StepFunction> {
    let x_max = profile.valid_to();
    if !x_max.is_finite() {
        return Err(Error::InvalidInput("profile needs a finite extent".into()));
    }
    let ratios: Vec<f64> = system.ratios().iter().map(|r| r.value()).collect();
    let mut cuts: Vec<f64> = Vec::new();
    for &y in profile.breakpoints() {
        cuts.push(y);
        for r in &ratios {
            cuts.push(y / r);
        }
    }
    cuts.retain(|c| *c < x_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());

    let l_at = |x: f64| profile.eval(x) - ratios.iter().map(|r| profile.eval(r * x)).sum::<i64>();
    let mut values = Vec::with_capacity(cuts.len() + 1);
    let mut prev = 0.0;
    for &c in cuts.iter().chain(std::iter::once(&x_max)) {
        let mid = if prev == 0.0 { 0.5 * c } else { (prev * c).sqrt() };
        values.push(l_at(mid));
        prev = c;
    }
    let l = StepFunction::new(cuts, values)?.with_valid_to(x_max).compress();

    if let Some(delta) = delta {
        let n = ratios.len() as i64;
        let limit = 1.0 / delta;
        let mut last = i64::MIN;
        for (a, b, v) in l.pieces() {
            let at = if b.is_finite() { b } else { a.max(limit) };
            if v > 0 {
                return Err(inconsistent(at, format!("L = {v} is positive")));
            }
            if v < 1 - n {
                return Err(inconsistent(at, format!("L = {v} is below 1 − N = {}", 1 - n)));
            }
            if v < last {
                return Err(inconsistent(at, "L decreases".into()));
            }
            if a >= limit * (1.0 - 1e-12) && v != 0 && a < x_max {
                return Err(Error::NotDeltaDisjoint(format!(
                    "L = {v} on ({a}, {b}] past 1/δ = {limit}; use the open-set-condition form"
                )));
            }
            last = v;
        }
    }
    Ok(l)
}

fn inconsistent(x: f64, reason: String) -> Error {
    Error::Inconsistent { x, reason }
}

/// Recognises an additively periodic tail of L repeated at least `repeats` times.
pub fn detect_periodic_tail(l: &StepFunction, repeats: usize) -> Option<StepFunction> {
    let x_max = l.valid_to();
    let bps = l.breakpoints();
    if !x_max.is_finite() || bps.len() < 2 * repeats {
        return None;
    }
    let n = bps.len();
    let mut candidates: Vec<f64> = (1..=8.min(n - 1)).map(|k| bps[n - 1] - bps[n - 1 - k]).collect();
    candidates.sort_by(f64::total_cmp);
    for p in candidates {
        let start = x_max - repeats as f64 * p;
        if start <= 0.0 {
            continue;
        }
        let mut cuts: Vec<f64> = bps
            .iter()
            .filter(|b| **b > start && **b <= x_max)
            .flat_map(|b| [*b, *b - p])
            .filter(|c| *c > start && *c <= x_max - p)
            .collect();
        cuts.push(start);
        cuts.push(x_max - p);
        cuts.sort_by(f64::total_cmp);
        let periodic = cuts.windows(2).all(|w| {
            if w[1] - w[0] <= 1e-9 * p {
                return true;
            }
            let m = 0.5 * (w[0] + w[1]);
            l.eval(m) == l.eval(m + p)
        }) && bps.iter().filter(|b| **b > start + p && **b <= x_max).all(|b| {
            bps.iter().any(|c| (c - (b - p)).abs() <= 1e-9 * p)
        });
        if periodic {
            return l.clone().with_periodic_tail(p).ok();
        }
    }
    None
}
