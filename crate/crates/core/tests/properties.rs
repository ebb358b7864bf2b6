//! Property tests for the structural invariants of each module.

use std::collections::HashSet;
use std::f64::consts::TAU;

use complexdim::analysis::{box_zeta, explicit_counting, measurability_report, steadiness, ResidueSet, Verdict};
use complexdim::builtin;
use complexdim::geometry::{apply_word, attractor_cloud, hausdorff_distance, PointCloud, SelfSimilarSystem, Similarity};
use complexdim::packing::{box_profile, greedy_packing, max_packing, ProfileOptions, RenewalTable};
use complexdim::roots::{
    classify_lattice, lattice_roots, moran_root, nonlattice_roots, root_match, strip_left_bound, winding_number,
    LatticeVerdict, ScalingVector, Window,
};
use complexdim::scale::Ratio;
use complexdim::step::StepFunction;
use complexdim::strings::{box_string, gaps_of, string_counting, FractalString, StringGenerator};
use complexdim::zeta::{generator_zeta, residue_simple, truncated_series, zeta_eval};
use num_complex::Complex64;
use num_integer::Integer;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn floats(values: &[f64]) -> Vec<Ratio> {
    values.iter().map(|v| Ratio::float(*v).unwrap()).collect()
}

fn line_system(ratios: &[f64], shifts: &[f64]) -> SelfSimilarSystem {
    let maps = ratios
        .iter()
        .zip(shifts)
        .map(|(r, t)| Similarity::scaled_shift(Ratio::float(*r).unwrap(), vec![*t]).unwrap())
        .collect();
    SelfSimilarSystem::new(maps).unwrap()
}

fn plane_system(ratios: &[f64], shifts: &[(f64, f64)]) -> SelfSimilarSystem {
    let maps = ratios
        .iter()
        .zip(shifts)
        .map(|(r, (a, b))| Similarity::scaled_shift(Ratio::float(*r).unwrap(), vec![*a, *b]).unwrap())
        .collect();
    SelfSimilarSystem::new(maps).unwrap()
}

/// An open-set-condition system on [0, 1]: images laid out left to right with
/// the leftover length split into positive gaps.
fn osc_line(ratios: &[f64], weights: &[f64]) -> SelfSimilarSystem {
    let free = 1.0 - ratios.iter().sum::<f64>();
    let w: f64 = weights.iter().sum();
    let mut shifts = vec![0.0];
    let mut at = 0.0;
    for j in 1..ratios.len() {
        at += ratios[j - 1] + free * weights[j - 1] / w;
        shifts.push(at);
    }
    // the last image ends exactly at 1
    *shifts.last_mut().unwrap() = 1.0 - ratios[ratios.len() - 1];
    line_system(ratios, &shifts)
}

fn cloud_2d(points: &[(f64, f64)]) -> PointCloud {
    let v: Vec<Vec<f64>> = points.iter().map(|(a, b)| vec![*a, *b]).collect();
    PointCloud::from_points(2, &v).unwrap()
}

fn bits(p: &[f64]) -> Vec<u64> {
    p.iter().map(|x| x.to_bits()).collect()
}

fn ratios_strategy(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..0.6, n)
}

/// r^{k_j} with a random base and small exponents.
fn lattice_strategy() -> impl Strategy<Value = (f64, Vec<u32>)> {
    (0.2f64..0.7, prop::collection::vec(1u32..5, 2..4)).prop_filter("ratios must sum below 1", |(b, k)| {
        k.iter().map(|e| b.powi(*e as i32)).sum::<f64>() < 0.95
    })
}

fn lattice_vector(base: f64, k: &[u32]) -> ScalingVector {
    ScalingVector::new(k.iter().map(|e| Ratio::power(base, *e as f64).unwrap()).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn clouds_are_exactly_nested(
        ratios in ratios_strategy(2..4),
        shifts in prop::collection::vec(-1.0f64..1.0, 3),
        depth in 0usize..5,
    ) {
        let s = line_system(&ratios, &shifts[..ratios.len()]);
        let coarse = attractor_cloud(&s, depth).unwrap();
        let fine = attractor_cloud(&s, depth + 1).unwrap();
        let set: HashSet<Vec<u64>> = fine.points().map(bits).collect();
        prop_assert!(coarse.points().all(|p| set.contains(&bits(p))));
    }

    #[test]
    fn clouds_contract_towards_the_attractor(
        ratios in ratios_strategy(2..4),
        shifts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        depth in 0usize..4,
        k in 1usize..3,
    ) {
        let s = plane_system(&ratios, &shifts[..ratios.len()]);
        let p0 = s.maps()[0].fixed_point();
        let diam0 = s.radius_bound_from(&p0);
        let a = attractor_cloud(&s, depth).unwrap();
        let b = attractor_cloud(&s, depth + k).unwrap();
        let h = hausdorff_distance(&a, &b).unwrap();
        prop_assert!(h <= s.r_max().powi(depth as i32) * diam0 * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn words_compose(
        ratios in ratios_strategy(3..4),
        shifts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        w in prop::collection::vec(1usize..=3, 0..6),
        v in prop::collection::vec(1usize..=3, 0..6),
        p in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let s = plane_system(&ratios, &shifts);
        let p = [p.0, p.1];
        let inner = apply_word(&s, &v, &p).unwrap();
        let stepwise = apply_word(&s, &w, &inner).unwrap();
        let joined: Vec<usize> = w.iter().chain(&v).copied().collect();
        prop_assert_eq!(stepwise, apply_word(&s, &joined, &p).unwrap());
    }

    #[test]
    fn hausdorff_is_a_metric(
        a in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..12),
        b in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..12),
        c3 in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..12),
    ) {
        let (a, b, c3) = (cloud_2d(&a), cloud_2d(&b), cloud_2d(&c3));
        let ab = hausdorff_distance(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
        if ab == 0.0 {
            let sa: HashSet<Vec<u64>> = a.points().map(bits).collect();
            let sb: HashSet<Vec<u64>> = b.points().map(bits).collect();
            prop_assert_eq!(sa, sb);
        }
        let via = hausdorff_distance(&a, &c3).unwrap() + hausdorff_distance(&c3, &b).unwrap();
        prop_assert!(ab <= via * (1.0 + 1e-12));
    }

    #[test]
    fn packing_shrinks_with_radius_and_grows_with_the_set(
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 2..30),
        r1 in 0.01f64..0.3,
        r2 in 0.01f64..0.3,
        keep in 1usize..30,
    ) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let all = cloud_2d(&pts);
        prop_assert!(max_packing(&all, lo).unwrap() >= max_packing(&all, hi).unwrap());
        let part = cloud_2d(&pts[..keep.min(pts.len())]);
        prop_assert!(max_packing(&part, lo).unwrap() <= max_packing(&all, lo).unwrap());
        prop_assert!(greedy_packing(&all, lo) <= max_packing(&all, lo).unwrap());
    }

    #[test]
    fn brackets_are_ordered(
        ratios in ratios_strategy(2..4),
        weights in prop::collection::vec(0.1f64..1.0, 3),
        depth in 3usize..8,
    ) {
        prop_assume!(ratios.iter().sum::<f64>() < 0.95);
        let s = osc_line(&ratios, &weights);
        let grid: Vec<f64> = (0..12).map(|i| 1.5 * 1.4f64.powi(i)).collect();
        let p = box_profile(&s, depth, &grid).unwrap();
        for b in &p.samples {
            if let Some(hi) = b.hi {
                prop_assert!(b.lo <= hi, "{:?}", b);
            }
        }
    }

    #[test]
    fn gap_identity_and_monotone_lengths(
        ratios in ratios_strategy(2..5),
        weights in prop::collection::vec(0.1f64..1.0, 4),
    ) {
        prop_assume!(ratios.iter().sum::<f64>() < 0.95);
        let g = gaps_of(&osc_line(&ratios, &weights)).unwrap();
        let total = g.gaps.iter().sum::<f64>() + g.ratios.values().iter().sum::<f64>();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        let terms = FractalString::from_gaps(&g).terms(200).unwrap();
        prop_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        prop_assert!(terms.iter().all(|t| t.1 >= 1));
    }

    #[test]
    fn box_string_counts_the_profile(
        steps in prop::collection::vec((0.05f64..2.0, 1i64..5), 1..8),
        probe in 0.0f64..1.0,
    ) {
        let mut y = 1.0;
        let mut v = 1;
        let mut breaks = Vec::new();
        let mut values = vec![1];
        for (dy, dv) in &steps {
            y += dy;
            v += dv;
            breaks.push(y);
            values.push(v);
        }
        let profile = StepFunction::new(breaks.clone(), values).unwrap();
        let string = box_string(&profile).unwrap();
        let x1 = breaks[0];
        let x = 0.5 + probe * (y + 1.0);
        prop_assume!(breaks.iter().all(|b| (x - b).abs() > 1e-9));
        let n = string_counting(&string, x).unwrap() as i64;
        if x <= x1 {
            prop_assert_eq!(n, 0);
        } else {
            prop_assert_eq!(n, profile.eval(x));
        }
    }

    #[test]
    fn zeta_matches_its_series(
        ratios in ratios_strategy(2..4),
        gaps in prop::collection::vec(0.05f64..0.4, 1..3),
        lift in 0.3f64..1.5,
    ) {
        prop_assume!(ratios.iter().sum::<f64>() < 0.9);
        let gen = StringGenerator::new(gaps, floats(&ratios)).unwrap();
        let z = generator_zeta(&gen);
        let d = moran_root(&ScalingVector::from_floats(&ratios).unwrap());
        let s = c(d + lift, 0.0);
        let series = truncated_series(&FractalString::self_similar(gen), s, 40).unwrap();
        let tail = series.tail_bound.expect("a generated string has a tail bound");
        let closed = zeta_eval(&z, s).unwrap();
        prop_assert!((closed - series.value).norm() <= tail + 1e-9 * closed.norm(), "{closed} {:?}", series);
    }

    #[test]
    fn zeta_is_conjugate_symmetric(
        ratios in ratios_strategy(2..4),
        gaps in prop::collection::vec(0.05f64..0.4, 1..3),
        re in -1.0f64..2.0,
        im in -60.0f64..60.0,
    ) {
        prop_assume!(ratios.iter().sum::<f64>() < 0.9);
        let z = generator_zeta(&StringGenerator::new(gaps, floats(&ratios)).unwrap());
        let s = c(re, im);
        if let (Ok(a), Ok(b)) = (zeta_eval(&z, s), zeta_eval(&z, s.conj())) {
            prop_assert!((a.conj() - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn moran_root_solves_and_decreases(
        ratios in ratios_strategy(2..5),
        which in 0usize..4,
        shrink in 0.5f64..0.99,
    ) {
        let r = ScalingVector::from_floats(&ratios).unwrap();
        let d = moran_root(&r);
        let sum: f64 = ratios.iter().map(|x| x.powf(d)).sum();
        prop_assert!((sum - 1.0).abs() <= 1e-14);
        let mut smaller = ratios.clone();
        let j = which % ratios.len();
        smaller[j] *= shrink;
        prop_assert!(moran_root(&ScalingVector::from_floats(&smaller).unwrap()) < d);
    }

    #[test]
    fn lattice_form_is_canonical((base, k) in lattice_strategy(), rot in 0usize..4) {
        let r = lattice_vector(base, &k);
        let mut turned = r.ratios().to_vec();
        let n = turned.len();
        turned.rotate_left(rot % n);
        let a = classify_lattice(&r);
        let b = classify_lattice(&ScalingVector::new(turned).unwrap());
        match (a, b) {
            (LatticeVerdict::Lattice { form: fa, .. }, LatticeVerdict::Lattice { form: fb, .. }) => {
                prop_assert!((fa.base.value() - fb.base.value()).abs() <= 1e-12);
                let mut ea = fa.exponents.clone();
                let mut eb = fb.exponents.clone();
                ea.sort_unstable();
                eb.sort_unstable();
                prop_assert_eq!(ea, eb);
                prop_assert_eq!(fa.exponents.iter().fold(0, |g, e| g.gcd(e)), 1);
            }
            other => prop_assert!(false, "expected lattice verdicts, got {:?}", other),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lattice_roots_are_closed_under_symmetries((base, k) in lattice_strategy(), t in 8.0f64..20.0) {
        let r = lattice_vector(base, &k);
        let LatticeVerdict::Lattice { form, .. } = classify_lattice(&r) else {
            return Err(TestCaseError::fail("not lattice"));
        };
        let p = form.period();
        let window = Window::new(strip_left_bound(&r) - 0.5, moran_root(&r) + 0.5, t).unwrap();
        let roots = lattice_roots(&r, &form, &window).unwrap();
        let locs = roots.locations();
        let near = |w: Complex64| locs.iter().any(|z| (z - w).norm() <= 1e-8);
        for root in &roots.roots {
            let w = root.location;
            prop_assert!(root.residual <= 1e-10);
            prop_assert!(near(w.conj()));
            for shifted in [w + c(0.0, p), w - c(0.0, p)] {
                if shifted.im.abs() <= t - 1e-6 {
                    prop_assert!(near(shifted), "{w} shifted by {p}");
                }
            }
        }
    }

    #[test]
    fn residues_match_a_contour_average(
        (base, k) in lattice_strategy(),
        gaps in prop::collection::vec(0.05f64..0.4, 1..3),
    ) {
        let gen = StringGenerator::new(gaps, lattice_vector(base, &k).ratios().to_vec()).unwrap();
        let z = generator_zeta(&gen);
        let r = z.scaling_vector().unwrap();
        let LatticeVerdict::Lattice { form, .. } = classify_lattice(&r) else {
            return Err(TestCaseError::fail("not lattice"));
        };
        let roots = lattice_roots(&r, &form, &Window::new(-2.0, 2.0, 12.0).unwrap()).unwrap();
        for root in roots.roots.iter().filter(|w| w.multiplicity == 1) {
            let Ok(res) = residue_simple(&z, root.location) else { continue };
            // (1/2πi)∮ζ over a small circle, as a mean of ζ·(s − ω)
            let n = 512;
            let rho = 1e-4;
            let avg: Complex64 = (0..n)
                .map(|j| {
                    let e = Complex64::from_polar(rho, TAU * j as f64 / n as f64);
                    zeta_eval(&z, root.location + e).unwrap() * e
                })
                .sum::<Complex64>()
                / n as f64;
            prop_assert!((avg - res).norm() <= 1e-6 * res.norm().max(1.0), "{} {res} {avg}", root.location);
        }
    }

    #[test]
    fn lattice_and_winding_roots_agree((base, k) in lattice_strategy(), t in 6.0f64..12.0) {
        let r = lattice_vector(base, &k);
        let LatticeVerdict::Lattice { form, .. } = classify_lattice(&r) else {
            return Err(TestCaseError::fail("not lattice"));
        };
        let window = Window::new(strip_left_bound(&r) - 0.5, moran_root(&r) + 0.5, t).unwrap();
        let a = lattice_roots(&r, &form, &window).unwrap();
        let b = nonlattice_roots(&r, &window).unwrap();
        let m = root_match(&a, &b, t);
        prop_assert!(m.max_distance <= 1e-8 && m.unmatched_a == 0 && m.unmatched_b == 0, "{:?}", m);
    }

    #[test]
    fn explicit_sums_are_real_on_conjugate_pairs(
        pairs in prop::collection::vec((-1.0f64..1.0, 0.5f64..40.0, -2.0f64..2.0, -2.0f64..2.0), 1..20),
        real in prop::collection::vec((0.1f64..1.0, -2.0f64..2.0), 0..3),
        x in 1.5f64..1e4,
    ) {
        let mut terms = Vec::new();
        for (re, im, a, b) in &pairs {
            terms.push((c(*re, *im), c(*a, *b)));
            terms.push((c(*re, -*im), c(*a, -*b)));
        }
        for (re, a) in &real {
            terms.push((c(*re, 0.0), c(*a, 0.0)));
        }
        let n = terms.len();
        let v = explicit_counting(&ResidueSet { terms, period: None }, None, x, n).unwrap();
        prop_assert!(v.imaginary.abs() <= 1e-9 * v.value.abs().max(1.0), "{:?}", v);
    }

    #[test]
    fn lattice_strings_oscillate_with_their_period(
        (base, k) in lattice_strategy(),
        gap in 0.05f64..0.4,
    ) {
        let gen = StringGenerator::new(vec![gap], lattice_vector(base, &k).ratios().to_vec()).unwrap();
        let z = generator_zeta(&gen);
        let r = z.scaling_vector().unwrap();
        let LatticeVerdict::Lattice { form, .. } = classify_lattice(&r) else {
            return Err(TestCaseError::fail("not lattice"));
        };
        let d = moran_root(&r);
        let t = 2.5 * form.period();
        let roots = lattice_roots(&r, &form, &Window::new(strip_left_bound(&r) - 0.5, d + 0.5, t).unwrap()).unwrap();
        let rep = measurability_report(&z, &roots, d).unwrap();
        prop_assert_eq!(rep.verdict, Verdict::NotMeasurable);
        let period = rep.oscillation_period.unwrap();
        prop_assert!((period - form.period()).abs() <= 1e-9 * period);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn winding_count_equals_polished_roots(ratios in ratios_strategy(2..4), t in 5.0f64..15.0) {
        let r = ScalingVector::from_floats(&ratios).unwrap();
        prop_assume!(!classify_lattice(&r).is_lattice());
        let d = moran_root(&r);
        let lo = strip_left_bound(&r) - 0.5;
        let roots = nonlattice_roots(&r, &Window::new(lo, d + 0.5, t).unwrap()).unwrap();
        let wound = winding_number(&r, (lo, d + 0.5), (-t, t)).unwrap();
        prop_assert!((wound.re - roots.total_multiplicity() as f64).abs() < 1e-6 && wound.im.abs() < 1e-6);
        let on_line = roots.roots.iter().filter(|w| (w.location.re - d).abs() <= 1e-8).count();
        prop_assert_eq!(on_line, 1);
    }
}

/// The root-structure verdict agrees with direct sampling on the line examples
/// and F1.
#[test]
fn verdicts_agree_with_steadiness() {
    for (name, x_max) in [("cantor", 8.5), ("interval", 16.5), ("f1", 8.5)] {
        let system = builtin::by_name(name).unwrap();
        let b = box_zeta(&system, x_max, &ProfileOptions::default()).unwrap();
        let r = ScalingVector::new(system.ratios()).unwrap();
        let d = moran_root(&r);
        let LatticeVerdict::Lattice { form, .. } = classify_lattice(&r) else {
            panic!("{name} is lattice")
        };
        let roots = lattice_roots(&r, &form, &Window::new(strip_left_bound(&r) - 0.5, d + 0.5, 30.0).unwrap()).unwrap();
        let verdict = measurability_report(&b.zeta, &roots, d).unwrap().verdict;

        let table = match b.delta {
            Some(delta) => RenewalTable::delta_disjoint(&system, delta, b.profile.step.clone()).unwrap(),
            None => RenewalTable::with_error_term(&system, b.profile.step.clone(), b.l.clone()).unwrap(),
        };
        let jumps: Vec<f64> = b.profile.step.breakpoints().to_vec();
        let scale = 1.0 / r.values().iter().copied().fold(0.0, f64::max);
        let mut samples = Vec::new();
        for n in 0..14 {
            for y in &jumps {
                let x = y * scale.powi(n);
                samples.push((x, table.count(x) as f64));
                samples.push((x * (1.0 + 1e-12), table.count(x * (1.0 + 1e-12)) as f64));
            }
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let st = steadiness(&samples, d);
        assert_eq!(st.steady, verdict == Verdict::Measurable, "{name}: {verdict:?} vs {st:?}");
    }
}
