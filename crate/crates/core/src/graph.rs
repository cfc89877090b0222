//! The threshold graph `G_{X,p}` and its component structure.

use std::collections::BTreeMap;

use crate::edges::{edge_pairs, EdgeVector};
use crate::error::{Error, Result};

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(len: usize) -> Self {
        Self {
            parent: (0..len as u32).collect(),
            size: vec![1; len],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Returns `true` when two different sets were merged.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    /// Orders of all sets, one entry per root.
    pub fn set_sizes(&mut self) -> Vec<usize> {
        (0..self.parent.len())
            .filter(|&x| self.parent[x] as usize == x)
            .map(|x| self.size[x] as usize)
            .collect()
    }
}

/// `G_{X,p}`: the pair `{i, j}` is an edge iff `X_ij <= p`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdGraph {
    n: usize,
    p: f64,
    edges: Vec<(u32, u32)>,
}

impl ThresholdGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }
}

pub fn build_graph(x: &EdgeVector, p: f64) -> Result<ThresholdGraph> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("threshold p must lie in (0, 1), got {p}")));
    }
    let edges = edge_pairs(x.n())
        .zip(x.values())
        .filter(|(_, &v)| v <= p)
        .map(|((i, j), _)| (i as u32, j as u32))
        .collect();
    Ok(ThresholdGraph {
        n: x.n(),
        p,
        edges,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentStats {
    pub n: usize,
    /// Component orders, largest first.
    pub sizes: Vec<usize>,
    pub isolated_count: usize,
    pub max_component: usize,
    /// `k -> Z_k`, the number of components of order `k`.
    pub z_histogram: BTreeMap<usize, usize>,
    pub connected: bool,
}

impl ComponentStats {
    pub fn from_sizes(n: usize, mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        let mut z_histogram = BTreeMap::new();
        for &s in &sizes {
            *z_histogram.entry(s).or_insert(0) += 1;
        }
        let max_component = sizes.first().copied().unwrap_or(0);
        Self {
            n,
            isolated_count: z_histogram.get(&1).copied().unwrap_or(0),
            max_component,
            connected: max_component == n,
            z_histogram,
            sizes,
        }
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    /// Components whose order lies in `[lo, hi]`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.sizes
            .iter()
            .filter(|&&s| (s as f64) >= lo && (s as f64) <= hi)
            .count()
    }

    /// Components of order strictly greater than `bound`.
    pub fn count_above(&self, bound: f64) -> usize {
        self.sizes.iter().take_while(|&&s| s as f64 > bound).count()
    }
}

pub fn components(g: &ThresholdGraph) -> ComponentStats {
    let mut uf = UnionFind::new(g.n);
    for &(a, b) in &g.edges {
        uf.union(a as usize, b as usize);
    }
    ComponentStats::from_sizes(g.n, uf.set_sizes())
}

/// `sum_{k <= cutoff} k Z_k`: vertices on components of order at most `cutoff`.
pub fn small_component_mass(stats: &ComponentStats, cutoff: usize) -> Result<usize> {
    if cutoff == 0 {
        return Err(Error::Domain("cutoff must be at least 1".into()));
    }
    Ok(stats
        .z_histogram
        .range(..=cutoff)
        .map(|(k, z)| k * z)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edges::edge_count;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::VecDeque;

    fn graph(n: usize, edges: &[(u32, u32)]) -> ThresholdGraph {
        ThresholdGraph {
            n,
            p: 0.5,
            edges: edges.to_vec(),
        }
    }

    fn bfs_sizes(g: &ThresholdGraph) -> Vec<usize> {
        let mut adj = vec![vec![]; g.n];
        for &(a, b) in &g.edges {
            adj[a as usize].push(b as usize);
            adj[b as usize].push(a as usize);
        }
        let mut seen = vec![false; g.n];
        let mut sizes = vec![];
        for s in 0..g.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut queue = VecDeque::from([s]);
            let mut size = 0;
            while let Some(v) = queue.pop_front() {
                size += 1;
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            sizes.push(size);
        }
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }

    #[test]
    fn build_graph_examples() {
        let x = EdgeVector::new(3, vec![0.1, 0.5, 0.9]).unwrap();
        assert_eq!(build_graph(&x, 0.5).unwrap().edges(), &[(0, 1), (0, 2)]);
        assert!(build_graph(&x, 0.05).unwrap().edges().is_empty());
        assert_eq!(build_graph(&x, 0.95).unwrap().edges().len(), 3);
        assert!(build_graph(&x, 0.0).is_err());
        assert!(build_graph(&x, 1.0).is_err());
    }

    #[test]
    fn components_examples() {
        let s = components(&graph(5, &[(0, 1), (1, 2)]));
        assert_eq!(s.sizes, vec![3, 1, 1]);
        assert_eq!(s.isolated_count, 2);
        assert_eq!(s.z_histogram.get(&1), Some(&2));
        assert_eq!(s.z_histogram.get(&3), Some(&1));
        assert!(!s.connected);

        let complete: Vec<_> = edge_pairs(4).map(|(a, b)| (a as u32, b as u32)).collect();
        let s = components(&graph(4, &complete));
        assert!(s.connected);
        assert_eq!(s.z_histogram.get(&4), Some(&1));

        let s = components(&graph(4, &[]));
        assert_eq!(s.isolated_count, 4);
        assert_eq!(s.z_histogram.get(&1), Some(&4));
    }

    #[test]
    fn small_mass_examples() {
        let s = components(&graph(5, &[(0, 1), (1, 2)]));
        assert_eq!(small_component_mass(&s, 2).unwrap(), 2);
        assert_eq!(small_component_mass(&s, 3).unwrap(), 5);
        let path: Vec<_> = (0..5).map(|i| (i, i + 1)).collect();
        let s = components(&graph(6, &path));
        assert_eq!(small_component_mass(&s, 5).unwrap(), 0);
        assert!(small_component_mass(&s, 0).is_err());
    }

    #[test]
    fn union_find_matches_bfs_on_small_graphs() {
        let mut rng = crate::rng::ReplicateStream::new(31, 0).rng();
        for _ in 0..1000 {
            let n = rng.random_range(2..=8);
            let x = EdgeVector::new(n, (0..edge_count(n)).map(|_| rng.random()).collect()).unwrap();
            let g = build_graph(&x, rng.random_range(0.05..0.95)).unwrap();
            assert_eq!(components(&g).sizes, bfs_sizes(&g));
        }
    }

    proptest! {
        #[test]
        fn monotone_in_threshold(values in proptest::collection::vec(0.0f64..1.0, edge_count(9)), p in 0.01f64..0.98, dp in 0.0f64..0.5) {
            let x = EdgeVector::new(9, values).unwrap();
            let q = (p + dp).min(0.99);
            let (g1, g2) = (build_graph(&x, p).unwrap(), build_graph(&x, q).unwrap());
            prop_assert!(g1.edges().iter().all(|e| g2.edges().contains(e)));
            let (s1, s2) = (components(&g1), components(&g2));
            prop_assert!(s1.max_component <= s2.max_component);
            prop_assert!(s1.component_count() >= s2.component_count());
            for s in [&s1, &s2] {
                prop_assert_eq!(s.z_histogram.iter().map(|(k, z)| k * z).sum::<usize>(), 9);
                prop_assert_eq!(s.connected, s.max_component == 9);
                prop_assert_eq!(s.connected, s.z_histogram.get(&9) == Some(&1));
            }
        }
    }
}
