//! Exact maximum independent set by branch and bound on bitsets.
//!
//! Every search node first applies two safe reductions (isolated vertices
//! are taken; a vertex u with N[v] ⊆ N[u] for a neighbour v is dropped),
//! then splits into connected components and branches on the vertices of
//! a small BFS level, so that components split off quickly. Component
//! results are memoized; a greedy clique cover bounds each node.

use std::collections::HashMap;

use crate::par;

#[derive(Clone, PartialEq, Eq, Hash)]
pub(crate) struct Bits(Vec<u64>);

impl Bits {
    pub(crate) fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    pub(crate) fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for i in 0..n {
            b.set(i);
        }
        b
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub(crate) fn clear(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }

    fn first(&self) -> Option<usize> {
        self.0
            .iter()
            .position(|w| *w != 0)
            .map(|k| k * 64 + self.0[k].trailing_zeros() as usize)
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    fn and_count(&self, other: &Bits) -> usize {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }

    fn and_not_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= !b;
        }
    }

    fn and_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a &= b;
        }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + t)
            })
        })
    }

    /// (self ∩ mask) ⊆ other, allowing the listed exceptions.
    fn subset_within(&self, mask: &Bits, other: &Bits) -> bool {
        self.0
            .iter()
            .zip(&mask.0)
            .zip(&other.0)
            .all(|((a, m), b)| a & m & !b == 0)
    }
}

/// Undirected graph as adjacency bitsets.
pub(crate) struct Graph {
    n: usize,
    adj: Vec<Bits>,
}

impl Graph {
    pub(crate) fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![Bits::empty(n); n],
        }
    }

    pub(crate) fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].set(b);
            self.adj[b].set(a);
        }
    }

    #[cfg(test)]
    pub(crate) fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut adj = vec![Bits::empty(n); n];
        for &(a, b) in edges {
            if a != b {
                adj[a as usize].set(b as usize);
                adj[b as usize].set(a as usize);
            }
        }
        Self { n, adj }
    }

    fn induced(&self, vertices: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.n];
        for (i, v) in vertices.iter().enumerate() {
            index[*v] = i;
        }
        let m = vertices.len();
        let adj = vertices
            .iter()
            .map(|v| {
                let mut b = Bits::empty(m);
                for u in self.adj[*v].iter() {
                    if index[u] != usize::MAX {
                        b.set(index[u]);
                    }
                }
                b
            })
            .collect();
        Graph { n: m, adj }
    }

    fn components(&self, p: &Bits) -> Vec<Vec<usize>> {
        let mut left = p.clone();
        let mut out = Vec::new();
        while let Some(start) = left.first() {
            let mut comp = Bits::empty(self.n);
            comp.set(start);
            left.clear(start);
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                let mut nb = self.adj[v].clone();
                nb.and_assign(&left);
                for u in nb.iter() {
                    left.clear(u);
                    comp.set(u);
                    stack.push(u);
                }
            }
            out.push(comp.iter().collect());
        }
        out
    }
}

/// Size of a maximum independent set.
pub(crate) fn mis_size(g: &Graph) -> usize {
    let comps = g.components(&Bits::full(g.n));
    let sizes = par::map(&comps, |c| {
        if c.len() <= 2 {
            return 1;
        }
        let sub = g.induced(c);
        let mut s = Search {
            g: &sub,
            exact: HashMap::new(),
            upper: HashMap::new(),
        };
        s.solve(Bits::full(sub.n), None, NO_FLOOR) as usize
    });
    sizes.into_iter().sum()
}

/// Components at least this large are memoized.
const MEMO_MIN: usize = 12;

const NO_FLOOR: i64 = -1;

/// Branch and bound with a floor: `solve(p, .., f)` returns r with
/// max(r, f) = max(α(G[p]), f). A result above the floor is therefore exact,
/// and one at or below it only says α ≤ f.
struct Search<'a> {
    g: &'a Graph,
    exact: HashMap<Bits, i64>,
    upper: HashMap<Bits, i64>,
}

impl Search<'_> {
    fn solve(&mut self, mut p: Bits, cut: Option<&Bits>, floor: i64) -> i64 {
        let taken = self.reduce(&mut p) as i64;
        if p.is_empty() {
            return taken;
        }
        let mut comps: Vec<Bits> = self
            .g
            .components(&p)
            .into_iter()
            .map(|c| {
                let mut b = Bits::empty(self.g.n);
                for v in c {
                    b.set(v);
                }
                b
            })
            .collect();
        comps.sort_by_key(|c| c.count());
        let mut bounds: Vec<i64> = comps.iter().map(|c| self.bound(c)).collect();
        let mut total: i64 = taken + bounds.iter().sum::<i64>();
        if total <= floor {
            return total;
        }
        for (i, c) in comps.into_iter().enumerate() {
            let others = total - bounds[i];
            let sub_floor = (floor - others).max(NO_FLOOR);
            let v = self.connected(c, cut, sub_floor);
            total = others + v;
            bounds[i] = v;
            if v <= sub_floor {
                return total;
            }
        }
        total
    }

    /// Upper bound for a connected component, exact when memoized.
    fn bound(&self, p: &Bits) -> i64 {
        if let Some(&v) = self.exact.get(p) {
            return v;
        }
        let cover = self.clique_cover(p) as i64;
        match self.upper.get(p) {
            Some(&u) => u.min(cover),
            None => cover,
        }
    }

    /// Connected and reduced G[p]. `cut` holds the separator chosen higher up.
    fn connected(&mut self, p: Bits, cut: Option<&Bits>, floor: i64) -> i64 {
        let size = p.count();
        let memo = size >= MEMO_MIN;
        if memo {
            if let Some(&v) = self.exact.get(&p) {
                return v;
            }
            if let Some(&u) = self.upper.get(&p) {
                if u <= floor {
                    return u;
                }
            }
        }
        let upper = self.clique_cover(&p) as i64;
        if upper <= floor {
            return upper;
        }
        let lower = self.greedy(&p) as i64;
        let r = if upper <= lower {
            lower
        } else {
            let cut = match cut {
                Some(c) if c.and_count(&p) > 0 => c.clone(),
                _ => self.separator(&p),
            };
            let mut pending = cut.clone();
            pending.and_assign(&p);
            let v = pending
                .iter()
                .max_by_key(|&v| (self.g.adj[v].and_count(&p), std::cmp::Reverse(v)))
                .unwrap();
            let base = floor.max(lower);
            let mut with = p.clone();
            with.clear(v);
            with.and_not_assign(&self.g.adj[v]);
            let a = 1 + self.solve(with, Some(&cut), base - 1);
            let mut without = p.clone();
            without.clear(v);
            let b = self.solve(without, Some(&cut), base.max(a));
            lower.max(a).max(b)
        };
        if memo {
            if r > floor {
                self.exact.insert(p, r);
            } else {
                self.upper.insert(p, floor);
            }
        }
        r
    }

    /// A small BFS level near the middle of G[p]; removing it disconnects
    /// the levels before it from those after it.
    fn separator(&self, p: &Bits) -> Bits {
        let start = p.first().unwrap();
        let far = self.levels(p, start).pop().unwrap().first().unwrap();
        let levels = self.levels(p, far);
        let total = p.count();
        let mut before = 0;
        let mut scored = Vec::with_capacity(levels.len());
        for (k, level) in levels.iter().enumerate() {
            let here = level.count();
            let balance = before.min(total - before - here);
            scored.push((balance * 5 < total, here, usize::MAX - balance, k));
            before += here;
        }
        let k = scored.into_iter().min().unwrap().3;
        levels[k].clone()
    }

    fn levels(&self, p: &Bits, start: usize) -> Vec<Bits> {
        let mut seen = Bits::empty(self.g.n);
        seen.set(start);
        let mut frontier = Bits::empty(self.g.n);
        frontier.set(start);
        let mut out = Vec::new();
        loop {
            let mut next = Bits::empty(self.g.n);
            for v in frontier.iter() {
                next.or_assign(&self.g.adj[v]);
            }
            next.and_assign(p);
            next.and_not_assign(&seen);
            out.push(frontier);
            if next.is_empty() {
                return out;
            }
            seen.or_assign(&next);
            frontier = next;
        }
    }

    fn reduce(&self, p: &mut Bits) -> usize {
        let mut taken = 0;
        loop {
            let mut changed = false;
            let verts: Vec<usize> = p.iter().collect();
            for v in verts {
                if !p.get(v) {
                    continue;
                }
                let mut nv = self.g.adj[v].clone();
                nv.and_assign(p);
                if nv.is_empty() {
                    p.clear(v);
                    taken += 1;
                    changed = true;
                    continue;
                }
                // drop every neighbour u whose closed neighbourhood contains N[v]
                let mut closed_v = nv.clone();
                closed_v.set(v);
                for u in nv.iter() {
                    let mut closed_u = self.g.adj[u].clone();
                    closed_u.set(u);
                    if closed_v.subset_within(p, &closed_u) {
                        p.clear(u);
                        changed = true;
                    }
                }
            }
            if !changed {
                return taken;
            }
        }
    }

    fn clique_cover(&self, p: &Bits) -> usize {
        // candidates[c] = vertices adjacent to every member of clique c
        let mut candidates: Vec<Bits> = Vec::new();
        let mut order: Vec<(usize, usize)> = p.iter().map(|v| (self.g.adj[v].and_count(p), v)).collect();
        order.sort_unstable_by(|a, b| b.cmp(a));
        for (_, v) in order {
            match candidates.iter_mut().find(|c| c.get(v)) {
                Some(c) => c.and_assign(&self.g.adj[v]),
                None => {
                    let mut c = self.g.adj[v].clone();
                    c.and_assign(p);
                    candidates.push(c);
                }
            }
        }
        candidates.len()
    }

    fn greedy(&self, p: &Bits) -> usize {
        let mut left = p.clone();
        let mut size = 0;
        while !left.is_empty() {
            let v = left
                .iter()
                .min_by_key(|&v| (self.g.adj[v].and_count(&left), v))
                .unwrap();
            left.clear(v);
            left.and_not_assign(&self.g.adj[v]);
            size += 1;
        }
        size
    }
}
