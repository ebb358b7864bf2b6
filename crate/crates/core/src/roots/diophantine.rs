//! Lattice approximants of nonlattice vectors by simultaneous Diophantine approximation.

use num_integer::Integer;

use super::lattice::{best_denominator, classify_lattice, exponent_ratios, power_of, LatticeVerdict};
use super::{LatticeForm, ScalingVector};
use crate::error::{Error, Result};
use crate::geometry::SelfSimilarSystem;

/// Fibonacci numbers with f₁ = f₂ = 1.
pub fn fibonacci(m: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..m {
        let c = a.saturating_add(b);
        a = b;
        b = c;
    }
    a
}

/// One lattice approximant r_{M,j} = r₁^{k_j/q}.
#[derive(Debug, Clone, PartialEq)]
pub struct DiophantineApprox {
    pub m: usize,
    /// Denominator cap Q_M.
    pub q_cap: u64,
    pub q: u64,
    /// max_j dist(q·w_j, ℤ).
    pub defect: f64,
    pub vector: ScalingVector,
    pub form: LatticeForm,
    /// The input was already lattice and is returned unchanged.
    pub unchanged: bool,
}

/// Approximants for M = 1..=m_max.
///
/// With w_j = log r_j / log r₁, step M uses the q ≤ Q_M = f_M minimizing the
/// largest distance of q·w_j to an integer; the exponents round(q·w_j) share
/// the base r₁^{1/q}.
pub fn diophantine_sequence(r: &ScalingVector, m_max: usize) -> Result<Vec<DiophantineApprox>> {
    if m_max == 0 {
        return Err(Error::InvalidInput("M must be at least 1".into()));
    }
    if let LatticeVerdict::Lattice { form, .. } = classify_lattice(r) {
        return Ok((1..=m_max)
            .map(|m| DiophantineApprox {
                m,
                q_cap: fibonacci(m),
                q: form.exponents[0] as u64,
                defect: 0.0,
                vector: r.clone(),
                form: form.clone(),
                unchanged: true,
            })
            .collect());
    }
    let w = exponent_ratios(r.ratios());
    let first = &r.ratios()[0];
    (1..=m_max)
        .map(|m| {
            let q_cap = fibonacci(m).max(1);
            let (q, defect) = best_denominator(&w, q_cap);
            let mut k = vec![q];
            for x in &w {
                let kj = (q as f64 * x).round();
                if kj < 1.0 {
                    return Err(Error::Numerical(format!("approximant {m} has a non-positive exponent")));
                }
                k.push(kj as u64);
            }
            let g = k.iter().fold(0u64, |a, b| a.gcd(b));
            let base = power_of(first, g as f64 / q as f64);
            let exponents: Vec<u32> = k.iter().map(|x| (x / g) as u32).collect();
            let ratios = exponents
                .iter()
                .map(|e| power_of(first, (*e as u64 * g) as f64 / q as f64))
                .collect();
            Ok(DiophantineApprox {
                m,
                q_cap,
                q,
                defect,
                vector: ScalingVector::new(ratios)?,
                form: LatticeForm { base, exponents },
                unchanged: false,
            })
        })
        .collect()
}

/// The system with its ratios replaced by those of the M-th approximant.
pub fn approximate_system(system: &SelfSimilarSystem, m: usize) -> Result<SelfSimilarSystem> {
    let r = ScalingVector::new(system.ratios())?;
    let approx = diophantine_sequence(&r, m)?.pop().expect("m ≥ 1 yields one entry");
    system.with_ratios(approx.vector.ratios())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::Ratio;

    fn golden() -> ScalingVector {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        ScalingVector::new(vec![Ratio::rational(1, 2).unwrap(), Ratio::power(2.0, -phi).unwrap()]).unwrap()
    }

    #[test]
    fn fibonacci_values() {
        let f: Vec<u64> = (1..=8).map(fibonacci).collect();
        assert_eq!(f, vec![1, 1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn golden_approximants_follow_fibonacci_ratios() {
        let seq = diophantine_sequence(&golden(), 6).unwrap();
        let expect = [(1, 2), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)];
        for (a, (q, k)) in seq.iter().zip(expect) {
            assert_eq!(a.q, q, "M = {}", a.m);
            let r2 = a.vector.ratios()[1].value();
            assert!((r2 - 0.5f64.powf(k as f64 / q as f64)).abs() < 1e-15);
            assert!(classify_lattice(&a.vector).is_lattice());
        }
        assert!((seq[2].vector.ratios()[1].value() - 2f64.powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn lattice_input_is_unchanged() {
        let r = ScalingVector::new(vec![Ratio::rational(1, 3).unwrap(), Ratio::rational(1, 3).unwrap()]).unwrap();
        let seq = diophantine_sequence(&r, 3).unwrap();
        assert!(seq.iter().all(|a| a.unchanged && a.vector == r));
    }
}
