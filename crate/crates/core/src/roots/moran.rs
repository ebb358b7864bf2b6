use super::ScalingVector;

/// The unique σ ≥ 0 with Σ r_j^σ = 1 (bisection, then Newton).
pub fn moran_root(r: &ScalingVector) -> f64 {
    let logs: Vec<f64> = r.ratios().iter().map(|x| x.ln()).collect();
    let g = |s: f64| logs.iter().map(|l| (s * l).exp()).sum::<f64>() - 1.0;
    let dg = |s: f64| logs.iter().map(|l| l * (s * l).exp()).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while g(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = g(s) / dg(s);
        s -= step;
        if step.abs() <= 1e-17 * s.abs().max(1.0) {
            break;
        }
    }
    // g is strictly decreasing; settle the last ulp on the side with the smaller residual
    let best = [s, f64::from_bits(s.to_bits() + 1), f64::from_bits(s.to_bits() - 1)]
        .into_iter()
        .min_by(|a, b| g(*a).abs().total_cmp(&g(*b).abs()))
        .unwrap();
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::Ratio;

    fn sv(rs: &[(i64, i64)]) -> ScalingVector {
        ScalingVector::new(rs.iter().map(|(p, q)| Ratio::rational(*p, *q).unwrap()).collect()).unwrap()
    }

    #[test]
    fn classic_dimensions() {
        let d = moran_root(&sv(&[(1, 3), (1, 3)]));
        assert!((d - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert!((moran_root(&sv(&[(1, 2), (1, 2)])) - 1.0).abs() < 1e-15);
        assert!((moran_root(&sv(&[(1, 2), (1, 3), (1, 6)])) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn golden_dimension_matches_printed_value() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let r = ScalingVector::new(vec![Ratio::rational(1, 2).unwrap(), Ratio::power(2.0, -phi).unwrap()])
            .unwrap();
        let d = moran_root(&r);
        assert!((d - 0.77921).abs() < 1e-5, "{d}");
    }
}
