//! Root finding by the argument principle with recursive rectangle subdivision.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::lattice::classify_lattice;
use super::{dirichlet, moran_root, polish, Root, RootSet, ScalingVector, Window};
use crate::error::{Error, Result};
use crate::par;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Split positions tried, as offsets from the midpoint in units of the side.
const SPLIT_OFFSETS: [f64; 8] = [0.0123, -0.0217, 0.0311, -0.0405, 0.0079, -0.0533, 0.0617, -0.0091];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindingOptions {
    /// Winding numbers must lie this close to an integer.
    pub integer_tol: f64,
    /// Cells smaller than this holding k > 1 zeros report a multiple root.
    pub min_cell: f64,
    /// Per-edge absolute quadrature tolerance.
    pub quad_tol: f64,
    /// |f| below this (relative to 1 + Σ|r_jˢ|) on a contour forces a perturbation.
    pub near_zero: f64,
}

impl Default for WindingOptions {
    fn default() -> Self {
        Self {
            integer_tol: 1e-3,
            min_cell: 1e-9,
            quad_tol: 1e-9,
            near_zero: 1e-9,
        }
    }
}

#[derive(Debug)]
enum EdgeFail {
    NearZero,
    Budget,
}

struct Integrand<'a> {
    ratios: &'a [crate::scale::Ratio],
    near_zero: f64,
}

impl Integrand<'_> {
    /// (f′/f, s·f′/f) at s.
    fn at(&self, s: Complex64) -> std::result::Result<(Complex64, Complex64), EdgeFail> {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut dsum = Complex64::new(0.0, 0.0);
        let mut mag = 1.0;
        for r in self.ratios {
            let t = r.powc(s);
            sum += t;
            dsum += t * r.ln();
            mag += t.norm();
        }
        let f = Complex64::new(1.0, 0.0) - sum;
        if f.norm() < self.near_zero * mag {
            return Err(EdgeFail::NearZero);
        }
        let q = -dsum / f;
        Ok((q, q * s))
    }
}

type Pair = (Complex64, Complex64);

fn gk15(g: &Integrand, z0: Complex64, dz: Complex64, a: f64, b: f64) -> std::result::Result<(Pair, f64), EdgeFail> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let eval = |t: f64| g.at(z0 + dz * t);
    let center = eval(c)?;
    let mut k = (center.0 * WGK[7], center.1 * WGK[7]);
    let mut gs = (center.0 * WG[3], center.1 * WG[3]);
    for i in 0..7 {
        let x = h * XGK[i];
        let (p, m) = (eval(c + x)?, eval(c - x)?);
        k.0 += (p.0 + m.0) * WGK[i];
        k.1 += (p.1 + m.1) * WGK[i];
        if i % 2 == 1 {
            gs.0 += (p.0 + m.0) * WG[i / 2];
            gs.1 += (p.1 + m.1) * WG[i / 2];
        }
    }
    let scale = dz * h;
    let k = (k.0 * scale, k.1 * scale);
    let gs = (gs.0 * scale, gs.1 * scale);
    let err = (k.0 - gs.0).norm().max((k.1 - gs.1).norm() / z0.norm().max(1.0));
    Ok((k, err))
}

/// ∫ along the segment z0 → z1 of (f′/f, s·f′/f), adaptively.
fn edge(g: &Integrand, z0: Complex64, z1: Complex64, tol: f64) -> std::result::Result<Pair, EdgeFail> {
    let dz = z1 - z0;
    let mut total = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    let mut stack = vec![(0.0f64, 1.0f64)];
    let mut budget = 200_000usize;
    while let Some((a, b)) = stack.pop() {
        if budget == 0 {
            return Err(EdgeFail::Budget);
        }
        budget -= 1;
        let (v, err) = gk15(g, z0, dz, a, b)?;
        if err <= tol * (b - a) || b - a < 1e-12 {
            total.0 += v.0;
            total.1 += v.1;
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b));
            stack.push((a, m));
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    re: (f64, f64),
    im: (f64, f64),
}

impl Cell {
    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }

    fn diameter(&self) -> f64 {
        (self.re.1 - self.re.0).hypot(self.im.1 - self.im.0)
    }

    fn contains(&self, s: Complex64, slack: f64) -> bool {
        s.re >= self.re.0 - slack && s.re <= self.re.1 + slack && s.im >= self.im.0 - slack && s.im <= self.im.1 + slack
    }
}

/// (1/2πi)∮ f′/f and (1/2πi)∮ s f′/f around a cell.
fn contour(g: &Integrand, cell: &Cell, tol: f64) -> std::result::Result<Pair, EdgeFail> {
    let c = cell.corners();
    let mut acc = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for i in 0..4 {
        let e = edge(g, c[i], c[(i + 1) % 4], tol)?;
        acc.0 += e.0;
        acc.1 += e.1;
    }
    let k = Complex64::new(0.0, TAU);
    Ok((acc.0 / k, acc.1 / k))
}

fn rounded(raw: Complex64, tol: f64) -> Option<u32> {
    let n = raw.re.round();
    ((raw.re - n).abs() <= tol && raw.im.abs() <= tol && n >= 0.0).then_some(n as u32)
}

/// Raw winding number of 1 − Σ r_jˢ around the rectangle [re.0, re.1] × [im.0, im.1].
pub fn winding_number(r: &ScalingVector, re: (f64, f64), im: (f64, f64)) -> Result<Complex64> {
    let opts = WindingOptions::default();
    let g = Integrand {
        ratios: r.ratios(),
        near_zero: opts.near_zero,
    };
    contour(&g, &Cell { re, im }, opts.quad_tol)
        .map(|p| p.0)
        .map_err(|e| Error::Numerical(format!("contour integration failed: {e:?}")))
}

/// A real σ_L with every zero satisfying Re s ≥ σ_L.
///
/// With ρ the smallest ratio (multiplicity c), zeros need
/// c·ρ^σ ≤ 1 + Σ_{r_j > ρ} r_j^σ, which fails for all σ below σ_L.
pub fn strip_left_bound(r: &ScalingVector) -> f64 {
    let values = r.values();
    let rho = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let c = values.iter().filter(|v| (**v - rho).abs() <= 1e-15 * rho).count() as f64;
    let others: Vec<f64> = values.iter().filter(|v| (**v - rho).abs() > 1e-15 * rho).map(|v| rho / v).collect();
    let holds = |t: f64| c > rho.powf(t) + others.iter().map(|q| q.powf(t)).sum::<f64>();
    if holds(0.0) {
        return 0.0;
    }
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    -hi
}

enum Outcome {
    Done(Vec<Root>),
    Split(Vec<(Cell, u32)>),
}

/// Complex dimensions inside `window` via winding numbers.
///
/// Cells holding several zeros are bisected along their longer side (split
/// lines are nudged off the midpoint and retried when they pass too close to
/// a zero); single-zero cells are located from the first moment and polished
/// by Newton. σ_min = −∞ is clamped to a provable left bound. For nonlattice
/// vectors, exactly one root is required on Re s = D.
pub fn nonlattice_roots(r: &ScalingVector, window: &Window) -> Result<RootSet> {
    nonlattice_roots_with(r, window, &WindingOptions::default())
}

pub fn nonlattice_roots_with(r: &ScalingVector, window: &Window, opts: &WindingOptions) -> Result<RootSet> {
    let left = strip_left_bound(r) - 0.25;
    let sigma_min = if window.sigma_min.is_finite() { window.sigma_min } else { left };
    let g = Integrand {
        ratios: r.ratios(),
        near_zero: opts.near_zero,
    };

    // outer contour, pushed outward when it grazes a zero
    let mut outer = None;
    for k in 0..8 {
        let eps = if k == 0 { 0.0 } else { 1e-7 * (1 << k) as f64 };
        let cell = Cell {
            re: (sigma_min - eps, window.sigma_max + eps),
            im: (-window.t_max - eps, window.t_max + eps),
        };
        if let Ok(p) = contour(&g, &cell, opts.quad_tol) {
            if let Some(n) = rounded(p.0, opts.integer_tol) {
                outer = Some((cell, n));
                break;
            }
        }
    }
    let (cell, n) = outer.ok_or_else(|| Error::Numerical("window contour could not be integrated".into()))?;

    let mut roots = Vec::new();
    let mut queue = if n > 0 { vec![(cell, n)] } else { Vec::new() };
    let mut rounds = 0;
    while !queue.is_empty() {
        rounds += 1;
        if rounds > 200 {
            return Err(Error::Numerical("root subdivision did not terminate".into()));
        }
        let outcomes = par::map(&queue, |(cell, count)| process(r, &g, cell, *count, opts));
        queue.clear();
        for o in outcomes {
            match o? {
                Outcome::Done(found) => roots.extend(found),
                Outcome::Split(children) => queue.extend(children),
            }
        }
    }

    let mut set = RootSet {
        roots,
        window: Window {
            sigma_min,
            sigma_max: window.sigma_max,
            t_max: window.t_max,
        },
        generator: None,
    };
    set.sort();

    if !classify_lattice(r).is_lattice() {
        let d = moran_root(r);
        if d >= sigma_min && d <= window.sigma_max {
            let on_line: Vec<&Root> = set.roots.iter().filter(|x| x.location.re >= d - 1e-8).collect();
            if on_line.len() != 1 || on_line[0].location.im.abs() > 1e-8 || on_line[0].multiplicity != 1 {
                return Err(Error::Numerical(format!(
                    "nonlattice structure violated: {} roots with Re ≥ D − 1e−8",
                    on_line.len()
                )));
            }
        }
    }
    Ok(set)
}

fn process(r: &ScalingVector, g: &Integrand, cell: &Cell, count: u32, opts: &WindingOptions) -> Result<Outcome> {
    if count == 1 {
        let p = contour(g, cell, opts.quad_tol)
            .map_err(|e| Error::Numerical(format!("contour integration failed: {e:?}")))?;
        let s = polish(r.ratios(), p.1, 50);
        let residual = dirichlet(r.ratios(), s).norm();
        let slack = 1e-9 * cell.diameter().max(1.0);
        if cell.contains(s, slack) && residual <= 1e-10 {
            return Ok(Outcome::Done(vec![Root {
                location: s,
                multiplicity: 1,
                residual,
            }]));
        }
        if cell.diameter() < opts.min_cell {
            return Err(Error::Numerical(format!("could not polish root near {}", p.1)));
        }
    } else if cell.diameter() < opts.min_cell {
        let p = contour(g, cell, opts.quad_tol)
            .map_err(|e| Error::Numerical(format!("contour integration failed: {e:?}")))?;
        let s = p.1 / count as f64;
        return Ok(Outcome::Done(vec![Root {
            location: s,
            multiplicity: count,
            residual: dirichlet(r.ratios(), s).norm(),
        }]));
    }
    let width = cell.re.1 - cell.re.0;
    let height = cell.im.1 - cell.im.0;
    for off in SPLIT_OFFSETS {
        let (a, b) = if width >= height {
            let m = cell.re.0 + width * (0.5 + off);
            (Cell { re: (cell.re.0, m), im: cell.im }, Cell { re: (m, cell.re.1), im: cell.im })
        } else {
            let m = cell.im.0 + height * (0.5 + off);
            (Cell { re: cell.re, im: (cell.im.0, m) }, Cell { re: cell.re, im: (m, cell.im.1) })
        };
        let (Ok(pa), Ok(pb)) = (contour(g, &a, opts.quad_tol), contour(g, &b, opts.quad_tol)) else {
            continue;
        };
        let (Some(na), Some(nb)) = (rounded(pa.0, opts.integer_tol), rounded(pb.0, opts.integer_tol)) else {
            continue;
        };
        if na + nb != count {
            continue;
        }
        let mut children = Vec::new();
        if na > 0 {
            children.push((a, na));
        }
        if nb > 0 {
            children.push((b, nb));
        }
        return Ok(Outcome::Split(children));
    }
    Err(Error::Numerical(format!(
        "no admissible split for cell Re∈[{}, {}], Im∈[{}, {}]",
        cell.re.0, cell.re.1, cell.im.0, cell.im.1
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::{classify_lattice, lattice_roots};
    use crate::scale::Ratio;

    #[test]
    fn counts_match_lattice_structure() {
        let r = ScalingVector::new(vec![Ratio::rational(1, 3).unwrap(), Ratio::rational(1, 3).unwrap()]).unwrap();
        let w = Window::new(0.0, 1.0, 20.0).unwrap();
        let by_winding = nonlattice_roots(&r, &w).unwrap();
        let form = classify_lattice(&r).form().unwrap().clone();
        let exact = lattice_roots(&r, &form, &w).unwrap();
        assert_eq!(by_winding.roots.len(), exact.roots.len());
        for (a, b) in by_winding.roots.iter().zip(&exact.roots) {
            assert!((a.location - b.location).norm() < 1e-8);
        }
    }

    #[test]
    fn left_bound_is_sound() {
        let r = ScalingVector::from_floats(&[0.5, 0.3, 0.1]).unwrap();
        let s = strip_left_bound(&r);
        assert!(s < 0.0);
        // no zeros left of the bound
        let n = winding_number(&r, (s - 5.0, s - 1e-3), (-30.0, 30.0)).unwrap();
        assert!(n.norm() < 1e-3);
    }
}
