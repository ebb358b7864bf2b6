//! Lattice/nonlattice classification and exact-structure root finding.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;

use super::{aberth, dirichlet, polish, LatticeGenerator, Root, RootSet, ScalingVector, Window};
use crate::error::{Error, Result};
use crate::scale::{Ratio, RatioForm};

/// Largest denominator q tried when searching for a common base.
pub const LATTICE_Q_CAP: u64 = 100_000;
/// Allowed distance of q·log r_j / log r₁ from an integer.
pub const LATTICE_TOL: f64 = 1e-9;
/// Polynomial degrees above this are refused.
pub const MAX_LATTICE_DEGREE: u32 = 4096;

/// r_j = r^{k_j} with gcd(k) = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeForm {
    pub base: Ratio,
    pub exponents: Vec<u32>,
}

impl LatticeForm {
    /// Oscillatory period p = 2π / log(1/r).
    pub fn period(&self) -> f64 {
        TAU / -self.base.ln()
    }

    /// Distinct exponents with their multiplicities, ascending.
    pub fn distinct(&self) -> Vec<(u32, u64)> {
        let mut m: BTreeMap<u32, u64> = BTreeMap::new();
        for k in &self.exponents {
            *m.entry(*k).or_default() += 1;
        }
        m.into_iter().collect()
    }

    /// Coefficients (low-to-high) of Σ m_u z^{k_u} − 1.
    pub fn polynomial(&self) -> Vec<f64> {
        let degree = *self.exponents.iter().max().unwrap_or(&0) as usize;
        let mut c = vec![0.0; degree + 1];
        c[0] = -1.0;
        for (k, m) in self.distinct() {
            c[k as usize] += m as f64;
        }
        c
    }
}

/// Evidence that no common base was found.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlattice {
    /// Decided from prime factorizations rather than a bounded search.
    pub exact: bool,
    /// Search cap Q (0 for exact decisions).
    pub q_cap: u64,
    /// Best q ≤ Q and its defect max_j dist(q·w_j, ℤ).
    pub best_q: u64,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LatticeVerdict {
    Lattice { form: LatticeForm, exact: bool },
    Nonlattice(Nonlattice),
}

impl LatticeVerdict {
    pub fn is_lattice(&self) -> bool {
        matches!(self, LatticeVerdict::Lattice { .. })
    }

    pub fn form(&self) -> Option<&LatticeForm> {
        match self {
            LatticeVerdict::Lattice { form, .. } => Some(form),
            LatticeVerdict::Nonlattice(_) => None,
        }
    }
}

/// Decides whether all ratios are integer powers of a common base.
///
/// All-rational inputs are decided exactly through prime exponent vectors.
/// Otherwise the exponent ratios w_j = log r_j / log r₁ are searched for a
/// common denominator q ≤ [`LATTICE_Q_CAP`] within [`LATTICE_TOL`].
pub fn classify_lattice(r: &ScalingVector) -> LatticeVerdict {
    if let Some(v) = classify_rational(r.ratios()) {
        return v;
    }
    let w = exponent_ratios(r.ratios());
    let (q, defect) = best_denominator(&w, LATTICE_Q_CAP);
    if defect <= LATTICE_TOL {
        let first = &r.ratios()[0];
        let mut k: Vec<u64> = vec![q];
        k.extend(w.iter().map(|x| (q as f64 * x).round() as u64));
        if k.iter().all(|&x| x >= 1) {
            let g = k.iter().fold(0u64, |a, b| a.gcd(b));
            let form = LatticeForm {
                base: power_of(first, g as f64 / q as f64),
                exponents: k.iter().map(|x| (x / g) as u32).collect(),
            };
            return LatticeVerdict::Lattice { form, exact: false };
        }
    }
    LatticeVerdict::Nonlattice(Nonlattice {
        exact: false,
        q_cap: LATTICE_Q_CAP,
        best_q: q,
        defect,
    })
}

/// w_j = log r_j / log r₁ for j ≥ 2, using exponent ratios for shared power bases.
pub(crate) fn exponent_ratios(ratios: &[Ratio]) -> Vec<f64> {
    let first = &ratios[0];
    ratios[1..]
        .iter()
        .map(|rj| match (first.form(), rj.form()) {
            (
                RatioForm::Power { base: b1, exponent: e1 },
                RatioForm::Power { base: bj, exponent: ej },
            ) if b1 == bj => ej / e1,
            (RatioForm::Rational(a), RatioForm::Power { base, exponent })
                if (*a.numer() as f64 / *a.denom() as f64) == *base =>
            {
                *exponent
            }
            _ => rj.ln() / first.ln(),
        })
        .collect()
}

/// The q ∈ [1, cap] minimizing max_j dist(q·w_j, ℤ); the smallest such q wins ties.
pub(crate) fn best_denominator(w: &[f64], cap: u64) -> (u64, f64) {
    let mut best = (1u64, f64::INFINITY);
    for q in 1..=cap.max(1) {
        let qf = q as f64;
        let d = w
            .iter()
            .map(|x| {
                let y = qf * x;
                (y - y.round()).abs()
            })
            .fold(0.0f64, f64::max);
        if d < best.1 {
            best = (q, d);
            if d <= LATTICE_TOL {
                break;
            }
        }
    }
    best
}

/// r^t as a ratio that keeps a power form.
pub(crate) fn power_of(r: &Ratio, t: f64) -> Ratio {
    let built = match r.form() {
        RatioForm::Power { base, exponent } => Ratio::power(*base, exponent * t),
        RatioForm::Rational(q) => Ratio::power(*q.numer() as f64 / *q.denom() as f64, t),
        RatioForm::Float => Ratio::power(r.value(), t),
    };
    built.expect("power of a ratio in (0,1) with positive exponent stays in (0,1)")
}

fn factor(mut n: i64) -> Option<BTreeMap<i64, i64>> {
    let mut out = BTreeMap::new();
    let mut p = 2i64;
    while p * p <= n {
        if p > 1_000_000 {
            return None;
        }
        while n % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        *out.entry(n).or_insert(0) += 1;
    }
    Some(out)
}

/// Exponent vector of 1/r over primes.
fn prime_vector(r: &Rational64) -> Option<BTreeMap<i64, i64>> {
    let mut v = factor(*r.denom())?;
    for (p, e) in factor(*r.numer())? {
        *v.entry(p).or_insert(0) -= e;
    }
    Some(v)
}

fn classify_rational(ratios: &[Ratio]) -> Option<LatticeVerdict> {
    let rats: Vec<Rational64> = ratios
        .iter()
        .map(|r| match r.form() {
            RatioForm::Rational(q) => Some(*q),
            _ => None,
        })
        .collect::<Option<_>>()?;
    let vecs: Vec<BTreeMap<i64, i64>> = rats.iter().map(prime_vector).collect::<Option<_>>()?;
    let g1 = vecs[0].values().fold(0i64, |a, b| a.gcd(b));
    let w: BTreeMap<i64, i64> = vecs[0].iter().map(|(p, e)| (*p, e / g1)).collect();
    let nonlattice = LatticeVerdict::Nonlattice(Nonlattice {
        exact: true,
        q_cap: 0,
        best_q: 0,
        defect: f64::NAN,
    });
    let mut c = Vec::with_capacity(vecs.len());
    for v in &vecs {
        if v.keys().any(|p| !w.contains_key(p)) {
            return Some(nonlattice);
        }
        let (p0, w0) = w.iter().next()?;
        let e0 = v.get(p0).copied().unwrap_or(0);
        if e0 % w0 != 0 {
            return Some(nonlattice);
        }
        let cj = e0 / w0;
        if cj <= 0 || w.iter().any(|(p, wp)| v.get(p).copied().unwrap_or(0) != cj * wp) {
            return Some(nonlattice);
        }
        c.push(cj);
    }
    let g = c.iter().fold(0i64, |a, b| a.gcd(b));
    // base = Π p^{−w_p·g}
    let base = (|| {
        let (mut num, mut den) = (1i64, 1i64);
        for (p, wp) in &w {
            let e = u32::try_from((wp * g).abs()).ok()?;
            let f = p.checked_pow(e)?;
            if wp * g > 0 {
                den = den.checked_mul(f)?;
            } else {
                num = num.checked_mul(f)?;
            }
        }
        Ratio::rational(num, den).ok()
    })()
    .unwrap_or_else(|| power_of(&ratios[0], g as f64 / c[0] as f64));
    Some(LatticeVerdict::Lattice {
        form: LatticeForm {
            base,
            exponents: c.iter().map(|x| (x / g) as u32).collect(),
        },
        exact: true,
    })
}

/// All complex dimensions of a lattice vector inside `window`.
///
/// The polynomial Σ m_u z^{k_u} − 1 is solved once; each root z gives the
/// principal-strip dimension ω = log z / log r with 0 ≤ Im ω < p, which is then
/// replicated along ω + i·n·p.
pub fn lattice_roots(r: &ScalingVector, form: &LatticeForm, window: &Window) -> Result<RootSet> {
    let degree = *form.exponents.iter().max().unwrap_or(&0);
    if degree > MAX_LATTICE_DEGREE {
        return Err(Error::Capacity {
            what: "lattice polynomial degree",
            needed: degree as usize,
            limit: MAX_LATTICE_DEGREE as usize,
        });
    }
    let poly = aberth(&form.polynomial())?;
    let ln_r = form.base.ln();
    let period = form.period();

    // cluster coincident polynomial roots into multiple roots
    let mut clusters: Vec<(Complex64, u32)> = Vec::new();
    for pr in &poly {
        let tol = 1e-5 * pr.z.norm().max(1e-300);
        match clusters.iter_mut().find(|(c, _)| (c - pr.z).norm() < tol) {
            Some((c, m)) => {
                *c = (*c * *m as f64 + pr.z) / (*m as f64 + 1.0);
                *m += 1;
            }
            None => clusters.push((pr.z, 1)),
        }
    }

    let mut principal = Vec::with_capacity(clusters.len());
    let mut roots = Vec::new();
    for (z, m) in clusters {
        let mut theta = z.arg();
        if theta > 0.0 {
            theta -= TAU;
        }
        let mut omega = Complex64::new(z.norm().ln(), theta) / ln_r;
        if m == 1 {
            omega = polish(r.ratios(), omega, 8);
        }
        principal.push(omega);
        if omega.re < window.sigma_min || omega.re > window.sigma_max {
            continue;
        }
        let n_lo = ((-window.t_max - omega.im) / period).ceil() as i64;
        let n_hi = ((window.t_max - omega.im) / period).floor() as i64;
        for n in n_lo..=n_hi {
            let mut s = omega + Complex64::new(0.0, n as f64 * period);
            if m == 1 {
                s = polish(r.ratios(), s, 4);
            }
            if !window.contains(s) {
                continue;
            }
            roots.push(Root {
                location: s,
                multiplicity: m,
                residual: dirichlet(r.ratios(), s).norm(),
            });
        }
    }
    principal.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
    let mut set = RootSet {
        roots,
        window: *window,
        generator: Some(LatticeGenerator { principal, period }),
    };
    set.sort();
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(p: i64, q: i64) -> Ratio {
        Ratio::rational(p, q).unwrap()
    }

    #[test]
    fn exact_classification() {
        let v = classify_lattice(&ScalingVector::new(vec![rat(1, 2), rat(1, 4)]).unwrap());
        let LatticeVerdict::Lattice { form, exact } = v else { panic!() };
        assert!(exact);
        assert_eq!(form.base.to_string(), "1/2");
        assert_eq!(form.exponents, vec![1, 2]);

        let v = classify_lattice(&ScalingVector::new(vec![rat(1, 8), rat(1, 4)]).unwrap());
        let LatticeVerdict::Lattice { form, .. } = v else { panic!() };
        assert_eq!(form.base.to_string(), "1/2");
        assert_eq!(form.exponents, vec![3, 2]);

        let v = classify_lattice(&ScalingVector::new(vec![rat(4, 9), rat(8, 27)]).unwrap());
        let LatticeVerdict::Lattice { form, .. } = v else { panic!() };
        assert_eq!(form.base.to_string(), "2/3");
        assert_eq!(form.exponents, vec![2, 3]);

        let v = classify_lattice(&ScalingVector::new(vec![rat(1, 2), rat(1, 3)]).unwrap());
        assert!(matches!(v, LatticeVerdict::Nonlattice(Nonlattice { exact: true, .. })));
    }

    #[test]
    fn float_and_power_classification() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let golden = ScalingVector::new(vec![rat(1, 2), Ratio::power(2.0, -phi).unwrap()]).unwrap();
        let v = classify_lattice(&golden);
        let LatticeVerdict::Nonlattice(n) = v else { panic!() };
        assert!(!n.exact);
        assert!(n.defect > LATTICE_TOL);

        let v = classify_lattice(&ScalingVector::from_floats(&[0.1, 0.01]).unwrap());
        let LatticeVerdict::Lattice { form, exact } = v else { panic!() };
        assert!(!exact);
        assert_eq!(form.exponents, vec![1, 2]);
        assert!((form.base.value() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn cantor_roots_lie_on_a_line() {
        let r = ScalingVector::new(vec![rat(1, 3), rat(1, 3)]).unwrap();
        let form = classify_lattice(&r).form().unwrap().clone();
        let w = Window::new(-1.0, 2.0, 30.0).unwrap();
        let set = lattice_roots(&r, &form, &w).unwrap();
        let d = 2f64.ln() / 3f64.ln();
        let p = TAU / 3f64.ln();
        assert_eq!(set.roots.len(), 2 * (30.0 / p).floor() as usize + 1);
        for root in &set.roots {
            assert!((root.location.re - d).abs() < 1e-12);
            let n = root.location.im / p;
            assert!((n - n.round()).abs() < 1e-12);
            assert!(root.residual < 1e-12);
        }
    }

    #[test]
    fn mixed_exponents_give_simple_roots() {
        let r = ScalingVector::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
        let form = classify_lattice(&r).form().unwrap().clone();
        let set = lattice_roots(&r, &form, &Window::new(-3.0, 3.0, 10.0).unwrap()).unwrap();
        assert!(!set.roots.is_empty());
        assert!(set.roots.iter().all(|x| x.multiplicity == 1 && x.residual < 1e-12));
    }
}
