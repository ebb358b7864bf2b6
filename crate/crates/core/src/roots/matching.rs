use super::RootSet;

/// Greedy nearest-neighbour pairing of two root sets.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchReport {
    pub max_distance: f64,
    pub mean_distance: f64,
    pub matched: usize,
    /// Roots of the first set with |Im| ≤ t_max left without a partner.
    pub unmatched_a: usize,
    /// Roots of the second set with |Im| ≤ t_max left without a partner.
    pub unmatched_b: usize,
}

/// Pairs every root of `a` with |Im| ≤ t_max to its nearest free root of `b`,
/// closest pairs first. Roots of `b` slightly beyond t_max may serve as partners.
pub fn root_match(a: &RootSet, b: &RootSet, t_max: f64) -> MatchReport {
    let left: Vec<_> = a.roots.iter().filter(|r| r.location.im.abs() <= t_max).collect();
    let right: Vec<_> = b.roots.iter().collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(left.len() * right.len());
    for (i, x) in left.iter().enumerate() {
        for (j, y) in right.iter().enumerate() {
            pairs.push(((x.location - y.location).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
    let mut used_a = vec![false; left.len()];
    let mut used_b = vec![false; right.len()];
    let mut dists = Vec::new();
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            dists.push(d);
        }
    }
    let unmatched_b = right
        .iter()
        .zip(&used_b)
        .filter(|(r, u)| !**u && r.location.im.abs() <= t_max)
        .count();
    MatchReport {
        max_distance: dists.iter().cloned().fold(0.0, f64::max),
        mean_distance: if dists.is_empty() { 0.0 } else { dists.iter().sum::<f64>() / dists.len() as f64 },
        matched: dists.len(),
        unmatched_a: used_a.iter().filter(|u| !**u).count(),
        unmatched_b,
    }
}
