//! Box-counting function N_B via exact disjoint-ball packing on attractor clouds.

mod mis;
mod profile;
mod renewal;

pub use profile::{box_profile, box_profile_with, certified_profile, BoxProfile, BracketSample, CertifiedProfile, JumpBracket, ProfileOptions};
pub use renewal::{detect_periodic_tail, extended_box_count, lalley_l, renewal_box_count, RenewalTable};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{dist, PointCloud};

/// Largest instance handed to the exact solver in dimension ≥ 2.
pub const EXACT_CAP: usize = 5000;
/// Relative slack applied to the disjointness test on floats.
pub const FLOAT_SLACK: f64 = 1e-12;

/// Which way ties in the test "distance > 2ρ" are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slack {
    /// Near-ties count as overlapping: the result never exceeds the true count.
    Under,
    /// Near-ties count as disjoint: the result is never below the true count.
    Over,
}

impl Slack {
    fn threshold(self, radius: f64) -> f64 {
        match self {
            Slack::Under => 2.0 * radius * (1.0 + FLOAT_SLACK),
            Slack::Over => 2.0 * radius * (1.0 - FLOAT_SLACK),
        }
    }
}

/// Maximum number of pairwise-disjoint closed balls of `radius` centred at cloud points.
pub fn max_packing(cloud: &PointCloud, radius: f64) -> Result<usize> {
    max_packing_with(cloud, radius, Slack::Under)
}

pub fn max_packing_with(cloud: &PointCloud, radius: f64, slack: Slack) -> Result<usize> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("packing radius {radius} must be positive")));
    }
    let t = slack.threshold(radius);
    if cloud.dim() == 1 {
        // on a line the leftmost-first greedy is optimal
        let mut xs: Vec<f64> = cloud.coords().to_vec();
        xs.sort_by(f64::total_cmp);
        return Ok(line_greedy(&xs, t));
    }
    if cloud.len() > EXACT_CAP {
        return Err(Error::Capacity {
            what: "exact packing (use greedy_packing for a lower bound)",
            needed: cloud.len(),
            limit: EXACT_CAP,
        });
    }
    Ok(mis::mis_size(&proximity_graph(cloud, t)))
}

fn line_greedy(sorted: &[f64], t: f64) -> usize {
    let mut count = 0;
    let mut last = f64::NEG_INFINITY;
    for &x in sorted {
        if count == 0 || x - last > t {
            count += 1;
            last = x;
        }
    }
    count
}

/// Packing count from a single greedy scan in input order.
pub fn greedy_packing(cloud: &PointCloud, radius: f64) -> usize {
    let t = Slack::Under.threshold(radius);
    let mut chosen: Vec<&[f64]> = Vec::new();
    for p in cloud.points() {
        if chosen.iter().all(|q| dist(p, q) > t) {
            chosen.push(p);
        }
    }
    chosen.len()
}

/// Graph joining points at distance ≤ t, built through a uniform grid of cell side t.
pub(crate) fn proximity_graph(cloud: &PointCloud, t: f64) -> mis::Graph {
    let mut g = mis::Graph::empty(cloud.len());
    for_each_close_pair(cloud, t, |i, j, _| g.add_edge(i, j));
    g
}

/// Calls `f(i, j, d)` for every pair i < j with d = dist ≤ t.
pub(crate) fn for_each_close_pair(cloud: &PointCloud, t: f64, mut f: impl FnMut(usize, usize, f64)) {
    let dim = cloud.dim();
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / t).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
    for (i, p) in cloud.points().enumerate() {
        grid.entry(cell(p)).or_default().push(i as u32);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(dim as u32))
        .map(|mut k| {
            (0..dim)
                .map(|_| {
                    let d = (k % 3) as i64 - 1;
                    k /= 3;
                    d
                })
                .collect()
        })
        .collect();
    let mut key = vec![0i64; dim];
    for (i, p) in cloud.points().enumerate() {
        let c = cell(p);
        for off in &offsets {
            for (k, (a, b)) in key.iter_mut().zip(c.iter().zip(off)) {
                *k = a + b;
            }
            if let Some(list) = grid.get(&key) {
                for &j in list {
                    let j = j as usize;
                    if j > i {
                        let d = dist(p, cloud.point(j));
                        if d <= t {
                            f(i, j, d);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_points(1, &xs.iter().map(|x| vec![*x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn small_line_examples() {
        let c = line(&[0.0, 1.0, 2.0]);
        assert_eq!(max_packing(&c, 0.4).unwrap(), 3);
        assert_eq!(max_packing(&c, 0.6).unwrap(), 2);
        assert_eq!(greedy_packing(&c, 0.6), 2);
        assert_eq!(greedy_packing(&line(&[0.0]), 5.0), 1);
    }

    #[test]
    fn touching_balls_are_not_disjoint() {
        let c = line(&[0.0, 1.0]);
        assert_eq!(max_packing(&c, 0.5).unwrap(), 1);
        assert_eq!(max_packing_with(&c, 0.5, Slack::Over).unwrap(), 2);
    }

    #[test]
    fn dense_interval_grid() {
        let pts: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        let c = line(&pts);
        for x in [2.0f64, 5.0, 10.0] {
            let n = max_packing(&c, 1.0 / (x * (1.0 + 1e-6))).unwrap();
            assert_eq!(n, (x / 2.0).floor() as usize + 1, "x = {x}");
        }
    }

    #[test]
    fn plane_graph_agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.gen_range(1..12);
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            let radius = rng.gen_range(0.02..0.4);
            let brute = (0u32..1 << n)
                .filter(|m| {
                    (0..n).all(|i| {
                        (i + 1..n).all(|j| m >> i & 1 == 0 || m >> j & 1 == 0 || dist(&pts[i], &pts[j]) > 2.0 * radius)
                    })
                })
                .map(|m| m.count_ones() as usize)
                .max()
                .unwrap();
            let c = PointCloud::from_points(2, &pts).unwrap();
            assert_eq!(max_packing(&c, radius).unwrap(), brute);
            assert!(greedy_packing(&c, radius) <= brute);
        }
    }
}
