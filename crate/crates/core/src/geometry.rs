//! Contracting similarities, self-similar systems and finite attractor clouds.

use crate::error::{Error, Result};
use crate::par;
use crate::scale::Ratio;

/// Orthonormality tolerance for rotation matrices.
pub const ORTHONORMAL_TOL: f64 = 1e-12;
/// Default cap on the number of points in a generated cloud.
pub const DEFAULT_CLOUD_CAP: usize = 1_000_000;

/// `x ↦ ratio · rotation · x + translation` on Rᵐ.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    ratio: Ratio,
    /// Row-major m×m.
    rotation: Vec<f64>,
    translation: Vec<f64>,
}

impl Similarity {
    pub fn new(ratio: Ratio, rotation: Vec<f64>, translation: Vec<f64>) -> Result<Self> {
        let m = translation.len();
        if m == 0 {
            return Err(Error::InvalidSystem("empty translation vector".into()));
        }
        if rotation.len() != m * m {
            return Err(Error::InvalidSystem(format!(
                "rotation has {} entries, expected {}",
                rotation.len(),
                m * m
            )));
        }
        for i in 0..m {
            for j in 0..m {
                let dot: f64 = (0..m).map(|k| rotation[k * m + i] * rotation[k * m + j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > ORTHONORMAL_TOL {
                    return Err(Error::InvalidSystem(format!(
                        "rotation is not orthonormal (entry ({i},{j}) of QᵀQ is {dot})"
                    )));
                }
            }
        }
        Ok(Self {
            ratio,
            rotation,
            translation,
        })
    }

    /// Similarity with identity rotation.
    pub fn scaled_shift(ratio: Ratio, translation: Vec<f64>) -> Result<Self> {
        let m = translation.len();
        let mut rotation = vec![0.0; m * m];
        for i in 0..m {
            rotation[i * m + i] = 1.0;
        }
        Self::new(ratio, rotation, translation)
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn ratio(&self) -> &Ratio {
        &self.ratio
    }

    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub fn translation(&self) -> &[f64] {
        &self.translation
    }

    /// Same rotation and translation, new ratio.
    pub fn with_ratio(&self, ratio: Ratio) -> Self {
        Self {
            ratio,
            ..self.clone()
        }
    }

    pub fn apply_into(&self, p: &[f64], out: &mut [f64]) {
        let m = self.dim();
        let r = self.ratio.value();
        for i in 0..m {
            let row = &self.rotation[i * m..(i + 1) * m];
            let qx: f64 = row.iter().zip(p).map(|(a, b)| a * b).sum();
            out[i] = r * qx + self.translation[i];
        }
    }

    pub fn apply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(p, &mut out);
        out
    }

    /// Solves (I − rQ)p = t.
    pub fn fixed_point(&self) -> Vec<f64> {
        let m = self.dim();
        let r = self.ratio.value();
        let mut a: Vec<f64> = (0..m * m)
            .map(|k| {
                let (i, j) = (k / m, k % m);
                (if i == j { 1.0 } else { 0.0 }) - r * self.rotation[k]
            })
            .collect();
        let mut b = self.translation.clone();
        // Gaussian elimination with partial pivoting; I − rQ is well conditioned.
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
                .unwrap();
            if piv != col {
                for k in 0..m {
                    a.swap(col * m + k, piv * m + k);
                }
                b.swap(col, piv);
            }
            let d = a[col * m + col];
            for row in col + 1..m {
                let f = a[row * m + col] / d;
                for k in col..m {
                    a[row * m + k] -= f * a[col * m + k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; m];
        for row in (0..m).rev() {
            let s: f64 = (row + 1..m).map(|k| a[row * m + k] * x[k]).sum();
            x[row] = (b[row] - s) / a[row * m + row];
        }
        // settle on a float fixed point when one is reachable, so clouds nest exactly
        for _ in 0..64 {
            let y = self.apply(&x);
            if y == x {
                break;
            }
            x = y;
        }
        x
    }
}

/// A finite family of N ≥ 2 contracting similarities on a common Rᵐ.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarSystem {
    dim: usize,
    maps: Vec<Similarity>,
}

impl SelfSimilarSystem {
    pub fn new(maps: Vec<Similarity>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::InvalidSystem(format!(
                "a self-similar system needs at least 2 maps, got {}",
                maps.len()
            )));
        }
        let dim = maps[0].dim();
        if let Some(bad) = maps.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        Ok(Self { dim, maps })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn maps(&self) -> &[Similarity] {
        &self.maps
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn ratios(&self) -> Vec<Ratio> {
        self.maps.iter().map(|m| m.ratio().clone()).collect()
    }

    pub fn r_max(&self) -> f64 {
        self.maps.iter().map(|m| m.ratio().value()).fold(0.0, f64::max)
    }

    /// Same rotations and translations with new ratios.
    pub fn with_ratios(&self, ratios: &[Ratio]) -> Result<Self> {
        if ratios.len() != self.maps.len() {
            return Err(Error::InvalidInput("ratio count differs from map count".into()));
        }
        Self::new(
            self.maps
                .iter()
                .zip(ratios)
                .map(|(m, r)| m.with_ratio(r.clone()))
                .collect(),
        )
    }

    /// Bound on sup_{y∈F} ‖y − p‖ for a point `p` of the attractor.
    pub fn radius_bound_from(&self, p: &[f64]) -> f64 {
        let step = self
            .maps
            .iter()
            .map(|m| dist(&m.apply(p), p))
            .fold(0.0, f64::max);
        step / (1.0 - self.r_max())
    }
}

/// Applies φ_{w₁}∘…∘φ_{w_k} (1-based indices) to `point`.
pub fn apply_word(system: &SelfSimilarSystem, word: &[usize], point: &[f64]) -> Result<Vec<f64>> {
    if point.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            left: system.dim(),
            right: point.len(),
        });
    }
    for &w in word {
        if w == 0 || w > system.len() {
            return Err(Error::InvalidWord {
                index: w,
                len: system.len(),
            });
        }
    }
    let mut p = point.to_vec();
    for &w in word.iter().rev() {
        p = system.maps()[w - 1].apply(&p);
    }
    Ok(p)
}

/// Finite point set in Rᵐ with a bound on its Hausdorff distance to the attractor.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    depth: usize,
    dirt: f64,
}

impl PointCloud {
    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("point cloud must be nonempty".into()));
        }
        let mut coords = Vec::with_capacity(dim * points.len());
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Ok(Self {
            dim,
            coords,
            depth: 0,
            dirt: 0.0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Upper bound on the Hausdorff distance to the attractor.
    pub fn dirt(&self) -> f64 {
        self.dirt
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(|p| p.to_vec()).collect()
    }

    pub(crate) fn with_meta(mut self, depth: usize, dirt: f64) -> Self {
        self.depth = depth;
        self.dirt = dirt;
        self
    }

    /// Removes exact duplicates, keeping first occurrences in order.
    pub fn dedup(mut self) -> Self {
        let mut seen = std::collections::HashSet::new();
        let dim = self.dim;
        let mut out = Vec::with_capacity(self.coords.len());
        for p in self.coords.chunks_exact(dim) {
            let key: Vec<u64> = p.iter().map(|v| (v + 0.0).to_bits()).collect();
            if seen.insert(key) {
                out.extend_from_slice(p);
            }
        }
        self.coords = out;
        self
    }
}

/// Seeding policy for attractor iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seed {
    /// The fixed point p₀ of φ₁.
    FirstFixedPoint,
    /// Fixed points of every map; denser clouds with tighter dirt bounds.
    AllFixedPoints,
}

/// Φ^depth({p₀}) with p₀ the fixed point of φ₁, in lexicographic word order.
pub fn attractor_cloud(system: &SelfSimilarSystem, depth: usize) -> Result<PointCloud> {
    attractor_cloud_with(system, depth, Seed::FirstFixedPoint, DEFAULT_CLOUD_CAP)
}

pub fn attractor_cloud_with(
    system: &SelfSimilarSystem,
    depth: usize,
    seed: Seed,
    cap: usize,
) -> Result<PointCloud> {
    let p0 = system.maps()[0].fixed_point();
    let seeds: Vec<Vec<f64>> = match seed {
        Seed::FirstFixedPoint => vec![p0.clone()],
        Seed::AllFixedPoints => {
            let mut s: Vec<Vec<f64>> = Vec::new();
            for m in system.maps() {
                let q = m.fixed_point();
                if !s.contains(&q) {
                    s.push(q);
                }
            }
            s
        }
    };
    let n = system.len();
    let needed = (n as f64).powi(depth as i32) * seeds.len() as f64;
    if needed > cap as f64 {
        return Err(Error::Capacity {
            what: "attractor cloud",
            needed: needed.min(usize::MAX as f64) as usize,
            limit: cap,
        });
    }
    let dim = system.dim();
    let mut coords: Vec<f64> = seeds.concat();
    for _ in 0..depth {
        let count = coords.len() / dim;
        let blocks = par::map(system.maps(), |map| {
            let mut out = vec![0.0; coords.len()];
            for i in 0..count {
                map.apply_into(&coords[i * dim..(i + 1) * dim], &mut out[i * dim..(i + 1) * dim]);
            }
            out
        });
        coords = blocks.concat();
    }
    let radius = match seed {
        Seed::FirstFixedPoint => system.radius_bound_from(&p0),
        Seed::AllFixedPoints => seed_radius_bound(system, &seeds),
    };
    let dirt = system.r_max().powi(depth as i32) * radius;
    Ok(PointCloud {
        dim,
        coords,
        depth,
        dirt,
    })
}

/// Certified bound on sup_{y∈F} dist(y, seeds): the farthest probe-cloud point
/// from the seeds plus the probe cloud's own contraction error.
fn seed_radius_bound(system: &SelfSimilarSystem, seeds: &[Vec<f64>]) -> f64 {
    let p0 = &seeds[0];
    let a_priori = system.radius_bound_from(p0);
    let n = system.len() as f64;
    let mut k = 0usize;
    while n.powi(k as i32 + 1) * (seeds.len() as f64) <= 20_000.0 {
        k += 1;
    }
    let dim = system.dim();
    let mut coords: Vec<f64> = seeds.concat();
    for _ in 0..k {
        let count = coords.len() / dim;
        let mut next = Vec::with_capacity(coords.len() * system.len());
        for map in system.maps() {
            let mut out = vec![0.0; coords.len()];
            for i in 0..count {
                map.apply_into(&coords[i * dim..(i + 1) * dim], &mut out[i * dim..(i + 1) * dim]);
            }
            next.extend(out);
        }
        coords = next;
    }
    let far = coords
        .chunks_exact(dim)
        .map(|c| seeds.iter().map(|s| dist(c, s)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let bound = far + system.r_max().powi(k as i32) * a_priori;
    // a hair of slack for rounding in the probe images
    (bound * (1.0 + 1e-12)).min(a_priori)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn directed(a: &PointCloud, b: &PointCloud) -> f64 {
    let d = par::map_range(a.len(), |i| {
        let p = a.point(i);
        b.points().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min)
    });
    d.into_iter().fold(0.0, f64::max)
}

/// max(max_a min_b ‖a−b‖, max_b min_a ‖a−b‖).
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let (ab, ba) = par::join(|| directed(a, b), || directed(b, a));
    Ok(ab.max(ba))
}

/// Bracket [lo, hi] on the separation δ between first-level images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationInterval {
    pub lo: f64,
    pub hi: f64,
}

impl SeparationInterval {
    /// True when the bracket proves the images are strongly separated.
    pub fn certified(&self) -> bool {
        self.lo > 0.0
    }

    pub fn contains(&self, delta: f64) -> bool {
        self.lo <= delta && delta <= self.hi
    }
}

fn min_cross_distance(dim: usize, a: &[f64], b: &[f64]) -> f64 {
    // sweep on the first coordinate
    let mut bs: Vec<&[f64]> = b.chunks_exact(dim).collect();
    bs.sort_by(|x, y| x[0].total_cmp(&y[0]));
    let keys: Vec<f64> = bs.iter().map(|p| p[0]).collect();
    let mins = par::map(&a.chunks_exact(dim).collect::<Vec<_>>(), |p| {
        let mut best = f64::INFINITY;
        let start = keys.partition_point(|k| *k < p[0]);
        for q in bs[start..].iter() {
            if q[0] - p[0] >= best {
                break;
            }
            best = best.min(dist(p, q));
        }
        for q in bs[..start].iter().rev() {
            if p[0] - q[0] >= best {
                break;
            }
            best = best.min(dist(p, q));
        }
        best
    });
    mins.into_iter().fold(f64::INFINITY, f64::min)
}

/// Brackets δ = min_{j≠k} dist(φ_j(F), φ_k(F)) from a depth-`depth` cloud.
pub fn separation_delta(system: &SelfSimilarSystem, depth: usize) -> Result<SeparationInterval> {
    if depth == 0 {
        return Err(Error::InvalidInput("separation_delta needs depth ≥ 1".into()));
    }
    let cloud = attractor_cloud(system, depth)?;
    let dim = system.dim();
    let images: Vec<Vec<f64>> = system
        .maps()
        .iter()
        .map(|m| {
            let mut out = vec![0.0; cloud.coords().len()];
            for (i, p) in cloud.points().enumerate() {
                m.apply_into(p, &mut out[i * dim..(i + 1) * dim]);
            }
            out
        })
        .collect();
    let mut hi = f64::INFINITY;
    for j in 0..images.len() {
        for k in j + 1..images.len() {
            hi = hi.min(min_cross_distance(dim, &images[j], &images[k]));
        }
    }
    let lo = (hi - 2.0 * cloud.dirt()).max(0.0);
    Ok(SeparationInterval { lo, hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    #[test]
    fn cantor_words() {
        let c = builtin::cantor();
        let p = apply_word(&c, &[2], &[0.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        let q = apply_word(&c, &[1, 2], &[0.0]).unwrap();
        assert!((q[0] - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(apply_word(&c, &[], &[0.3]).unwrap(), vec![0.3]);
        assert!(matches!(
            apply_word(&c, &[3], &[0.0]),
            Err(Error::InvalidWord { index: 3, .. })
        ));
        assert!(apply_word(&c, &[0], &[0.0]).is_err());
    }

    #[test]
    fn cantor_clouds() {
        let c = builtin::cantor();
        let d0 = attractor_cloud(&c, 0).unwrap();
        assert_eq!(d0.to_vecs(), vec![vec![0.0]]);
        let d1 = attractor_cloud(&c, 1).unwrap();
        let v1: Vec<f64> = d1.points().map(|p| p[0]).collect();
        assert_eq!(v1.len(), 2);
        assert!((v1[0] - 0.0).abs() < 1e-15 && (v1[1] - 2.0 / 3.0).abs() < 1e-15);
        let d2 = attractor_cloud(&c, 2).unwrap();
        let v2: Vec<f64> = d2.points().map(|p| p[0]).collect();
        let expect = [0.0, 2.0 / 9.0, 2.0 / 3.0, 8.0 / 9.0];
        for (a, b) in v2.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((d2.dirt() - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn hausdorff_examples() {
        let z = PointCloud::from_points(1, &[vec![0.0]]).unwrap();
        let o = PointCloud::from_points(1, &[vec![1.0]]).unwrap();
        assert_eq!(hausdorff_distance(&z, &z).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&z, &o).unwrap(), 1.0);
        let c = builtin::cantor();
        let h = hausdorff_distance(&attractor_cloud(&c, 1).unwrap(), &attractor_cloud(&c, 2).unwrap())
            .unwrap();
        assert!((h - 2.0 / 9.0).abs() < 1e-15);
        let p2 = PointCloud::from_points(2, &[vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            hausdorff_distance(&z, &p2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_systems() {
        let r = Ratio::rational(1, 2).unwrap();
        let single = SelfSimilarSystem::new(vec![Similarity::scaled_shift(r.clone(), vec![0.0]).unwrap()]);
        assert!(single.is_err());
        let skew = Similarity::new(r.clone(), vec![1.0, 0.1, 0.0, 1.0], vec![0.0, 0.0]);
        assert!(skew.is_err());
        let mixed = SelfSimilarSystem::new(vec![
            Similarity::scaled_shift(r.clone(), vec![0.0]).unwrap(),
            Similarity::scaled_shift(r, vec![0.0, 1.0]).unwrap(),
        ]);
        assert!(matches!(mixed, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn rotations_are_accepted() {
        let r = Ratio::rational(1, 2).unwrap();
        let (c, s) = (0.6, 0.8);
        let m = Similarity::new(r, vec![c, -s, s, c], vec![1.0, 0.0]).unwrap();
        let p = m.fixed_point();
        let q = m.apply(&p);
        assert!(dist(&p, &q) < 1e-14);
    }

    #[test]
    fn cloud_cap_is_loud() {
        let c = builtin::sierpinski();
        let err = attractor_cloud_with(&c, 14, Seed::FirstFixedPoint, 1000).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn separation_examples() {
        let c = builtin::cantor();
        for depth in 4..7 {
            let s = separation_delta(&c, depth).unwrap();
            assert!(s.contains(1.0 / 3.0), "{s:?}");
            assert!(s.hi - s.lo <= 2.0 * (1.0f64 / 3.0).powi(4) + 1e-15);
            assert!(s.certified());
        }
        let f1 = separation_delta(&builtin::f1(), 5).unwrap();
        assert!(f1.contains(0.5), "{f1:?}");
        let mut last = f64::INFINITY;
        for depth in 2..8 {
            let s = separation_delta(&builtin::sierpinski(), depth).unwrap();
            assert!(!s.certified());
            assert!(s.hi < last);
            last = s.hi;
        }
        assert!(last < 0.01);
    }

    #[test]
    fn all_seed_cloud_has_tighter_dirt() {
        let s = builtin::sierpinski();
        let a = attractor_cloud_with(&s, 4, Seed::FirstFixedPoint, DEFAULT_CLOUD_CAP).unwrap();
        let b = attractor_cloud_with(&s, 4, Seed::AllFixedPoints, DEFAULT_CLOUD_CAP).unwrap();
        assert!((a.dirt() - 1.0 / 16.0).abs() < 1e-12);
        assert!(b.dirt() < 0.55 / 16.0 && b.dirt() >= 0.5 / 16.0, "{}", b.dirt());
    }
}
