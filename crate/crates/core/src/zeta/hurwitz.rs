//! Differences of Hurwitz zeta values by Euler–Maclaurin summation.

use num_complex::Complex64;

/// B_{2j}/(2j)! for j = 1..
const BERNOULLI_OVER_FACTORIAL: [f64; 12] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
    43867.0 / 5109094217170944000.0,
    -174611.0 / 802857662698291200000.0,
    77683.0 / 14101100039391805440000.0,
    -236364091.0 / 1693824136731743669452800000.0,
];

/// (e^z − 1)/z, continuous at 0.
pub(crate) fn exprel(z: Complex64) -> Complex64 {
    if z.norm() < 1e-3 {
        // 1 + z/2 + z²/6 + z³/24 + z⁴/120
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for k in 2..=6 {
            term = term * z / k as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

/// ζ(s, α) − ζ(s, β) for α, β > 0, analytic in s (the poles at s = 1 cancel).
pub fn hurwitz_diff(s: Complex64, alpha: f64, beta: f64) -> Complex64 {
    let cutoff = (20.0 + 1.5 * s.norm()).ceil() as usize;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..cutoff {
        sum += (-s * (k as f64 + alpha).ln()).exp() - (-s * (k as f64 + beta).ln()).exp();
    }
    let a = cutoff as f64 + alpha;
    let b = cutoff as f64 + beta;
    // ∫ terms: (a^{1−s} − b^{1−s})/(s − 1) = a^{1−s}·ln(b/a)·exprel((1−s) ln(b/a))
    let u = Complex64::new(1.0, 0.0) - s;
    let lr = (b / a).ln();
    sum += (u * a.ln()).exp() * lr * exprel(u * lr);
    let pa = (-s * a.ln()).exp();
    let pb = (-s * b.ln()).exp();
    sum += (pa - pb) * 0.5;
    // Σ B_{2j}/(2j)! · s(s+1)…(s+2j−2) · (a^{−s−2j+1} − b^{−s−2j+1})
    let mut rising = s;
    let mut fa = pa / a;
    let mut fb = pb / b;
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let k = 2.0 * j as f64;
            rising = rising * (s + (k - 1.0)) * (s + k);
            fa /= a * a;
            fb /= b * b;
        }
        sum += rising * (fa - fb) * *c;
    }
    sum
}
