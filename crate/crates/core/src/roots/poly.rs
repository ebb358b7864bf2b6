//! Simultaneous polynomial root finding (Aberth–Ehrlich).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A polynomial root with an inclusion radius n·|p(z)/p′(z)|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyRoot {
    pub z: Complex64,
    pub radius: f64,
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut d = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        d = d * z + p;
        p = p * z + c;
    }
    (p, d)
}

/// All complex roots of Σ coeffs[i]·zⁱ (low-to-high), counted with multiplicity.
pub fn aberth(coeffs: &[f64]) -> Result<Vec<PolyRoot>> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last() == Some(&0.0) {
        c.pop();
    }
    if c.len() < 2 {
        return Ok(Vec::new());
    }
    if c[0] == 0.0 {
        return Err(Error::InvalidInput("polynomial has a root at zero".into()));
    }
    let n = c.len() - 1;
    let lead = c[n];
    // moduli start on the circle of the geometric-mean root modulus
    let rho = (c[0] / lead).abs().powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|j| Complex64::from_polar(rho, std::f64::consts::TAU * j as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];
    for _ in 0..2000 {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, d) = horner(&c, z[i]);
            if p.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            let ratio = p / d;
            let sum: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if !w.is_finite() {
                all = false;
                continue;
            }
            z[i] -= w;
            if w.norm() <= 4.0 * f64::EPSILON * z[i].norm() {
                done[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
    if !done.iter().all(|d| *d) {
        // slow convergence is expected at multiple roots; judge by residual instead
        let scale: f64 = c.iter().map(|x| x.abs()).sum();
        for zi in &z {
            let (p, _) = horner(&c, *zi);
            if p.norm() > 1e-6 * scale * zi.norm().max(1.0).powi(n as i32) {
                return Err(Error::Numerical(format!(
                    "Aberth iteration did not converge for degree {n}"
                )));
            }
        }
    }
    Ok(z
        .into_iter()
        .map(|z| {
            let (p, d) = horner(&c, z);
            let radius = if d.norm() > 0.0 {
                n as f64 * (p / d).norm()
            } else {
                f64::INFINITY
            };
            PolyRoot { z, radius }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_roots() {
        // z⁵ − 1
        let roots = aberth(&[-1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(roots.len(), 5);
        for r in roots {
            assert!((r.z.norm() - 1.0).abs() < 1e-14);
            assert!(r.radius < 1e-12);
        }
    }

    #[test]
    fn double_root_is_found_twice() {
        // (z − 2)²(z + 1) = z³ − 3z² + 4
        let mut roots = aberth(&[4.0, 0.0, -3.0, 1.0]).unwrap();
        roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re));
        assert!((roots[0].z - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((roots[1].z - Complex64::new(2.0, 0.0)).norm() < 1e-6);
        assert!((roots[2].z - Complex64::new(2.0, 0.0)).norm() < 1e-6);
    }
}
