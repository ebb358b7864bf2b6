//! Complex dimensions of scaling vectors: zeros of 1 − Σ r_jˢ.

mod diophantine;
mod lattice;
mod matching;
mod moran;
mod poly;
mod winding;

pub use diophantine::{approximate_system, diophantine_sequence, fibonacci, DiophantineApprox};
pub use lattice::{classify_lattice, lattice_roots, LatticeForm, LatticeVerdict, Nonlattice};
pub use matching::{root_match, MatchReport};
pub use moran::moran_root;
pub use poly::{aberth, PolyRoot};
pub use winding::{nonlattice_roots, strip_left_bound, winding_number, WindingOptions};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scale::Ratio;

/// Scaling vector r = (r₁, …, r_N), N ≥ 2, each rᵢ ∈ (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVector(Vec<Ratio>);

impl ScalingVector {
    pub fn new(ratios: Vec<Ratio>) -> Result<Self> {
        if ratios.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "scaling vector needs N ≥ 2 ratios, got {}",
                ratios.len()
            )));
        }
        Ok(Self(ratios))
    }

    /// Convenience constructor from floats.
    pub fn from_floats(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|v| Ratio::float(*v)).collect::<Result<_>>()?)
    }

    pub fn ratios(&self) -> &[Ratio] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(Ratio::value).collect()
    }

    /// f(s) = 1 − Σ r_jˢ.
    pub fn moran_fn(&self, s: Complex64) -> Complex64 {
        dirichlet(&self.0, s)
    }

    /// f′(s) = −Σ log(r_j) r_jˢ.
    pub fn moran_deriv(&self, s: Complex64) -> Complex64 {
        dirichlet_deriv(&self.0, s)
    }
}

pub(crate) fn dirichlet(ratios: &[Ratio], s: Complex64) -> Complex64 {
    Complex64::new(1.0, 0.0) - ratios.iter().map(|r| r.powc(s)).sum::<Complex64>()
}

pub(crate) fn dirichlet_deriv(ratios: &[Ratio], s: Complex64) -> Complex64 {
    -ratios.iter().map(|r| r.powc(s) * r.ln()).sum::<Complex64>()
}

/// Rectangle {σ_min ≤ Re s ≤ σ_max, |Im s| ≤ t_max}; σ_min may be −∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub t_max: f64,
}

impl Window {
    pub fn new(sigma_min: f64, sigma_max: f64, t_max: f64) -> Result<Self> {
        if !(sigma_min < sigma_max) || !(t_max > 0.0) || sigma_max.is_nan() {
            return Err(Error::InvalidInput(format!(
                "bad window σ ∈ [{sigma_min}, {sigma_max}], |t| ≤ {t_max}"
            )));
        }
        Ok(Self {
            sigma_min,
            sigma_max,
            t_max,
        })
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re >= self.sigma_min && s.re <= self.sigma_max && s.im.abs() <= self.t_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub location: Complex64,
    pub multiplicity: u32,
    /// |1 − Σ r_j^ω|.
    pub residual: f64,
}

/// Lattice replication data: principal-strip roots and their vertical period.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeGenerator {
    pub principal: Vec<Complex64>,
    pub period: f64,
}

/// Roots of a Dirichlet polynomial inside a window.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub window: Window,
    pub generator: Option<LatticeGenerator>,
}

impl RootSet {
    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn locations(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.location).collect()
    }

    /// Sorted by imaginary part, then real part.
    pub(crate) fn sort(&mut self) {
        self.roots.sort_by(|a, b| {
            a.location
                .im
                .total_cmp(&b.location.im)
                .then(a.location.re.total_cmp(&b.location.re))
        });
    }

    /// CSV with columns re, im, multiplicity, residual.
    pub fn to_csv(&self) -> String {
        use crate::scale::fmt17;
        let mut out = String::from("re,im,multiplicity,residual\n");
        for r in &self.roots {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt17(r.location.re),
                fmt17(r.location.im),
                r.multiplicity,
                fmt17(r.residual)
            ));
        }
        out
    }
}

/// Newton polish of a zero of 1 − Σ r_jˢ; secant fallback on derivative underflow.
pub(crate) fn polish(ratios: &[Ratio], mut s: Complex64, max_iter: usize) -> Complex64 {
    let mut prev: Option<(Complex64, Complex64)> = None;
    for _ in 0..max_iter {
        let f = dirichlet(ratios, s);
        if f.norm() == 0.0 {
            break;
        }
        let d = dirichlet_deriv(ratios, s);
        let step = if d.norm() > 1e-300 {
            f / d
        } else if let Some((ps, pf)) = prev {
            let slope = (f - pf) / (s - ps);
            if slope.norm() == 0.0 {
                break;
            }
            f / slope
        } else {
            break;
        };
        prev = Some((s, f));
        s -= step;
        if step.norm() <= 1e-16 * s.norm().max(1.0) {
            break;
        }
    }
    s
}
