//! DAG representation and the structured / random generators.
//!
//! Vertices are `0..p` and the identity is a topological order: every edge
//! `(i, j)` has `i < j`. Text formats use 1-based labels; everything in the
//! library API is 0-based.

mod dsep;
mod triples;

pub use dsep::{d_connected_from, d_separated, d_separated_moral};
pub use triples::{enumerate_triples, triple_count, ClassFlags, Triple, TripleIter, TripleMode};

use crate::error::{Error, Result};
use crate::vset::VertexSet;
use rand::seq::index;
use rand::Rng;

pub const MAX_VERTICES: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    p: usize,
    edges: Vec<(usize, usize)>,
    parents: Vec<VertexSet>,
    children: Vec<VertexSet>,
}

impl Dag {
    /// Builds a DAG on `p` vertices. Edges are sorted; they must satisfy
    /// `i < j < p` and may not repeat.
    pub fn new(p: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if p == 0 || p > MAX_VERTICES {
            return Err(Error::InvalidSize(format!(
                "vertex count {p} must lie in 1..={MAX_VERTICES}"
            )));
        }
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        edges.sort_unstable();
        let mut parents = vec![VertexSet::EMPTY; p];
        let mut children = vec![VertexSet::EMPTY; p];
        for (k, &(i, j)) in edges.iter().enumerate() {
            if i >= j || j >= p {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) violates 1 <= i < j <= p = {p}",
                    i + 1,
                    j + 1
                )));
            }
            if k > 0 && edges[k - 1] == (i, j) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            parents[j] = parents[j].with(i);
            children[i] = children[i].with(j);
        }
        Ok(Dag {
            p,
            edges,
            parents,
            children,
        })
    }

    pub fn empty(p: usize) -> Result<Self> {
        Self::new(p, [])
    }

    /// The complete DAG: every pair `i < j` is an edge.
    pub fn complete(p: usize) -> Result<Self> {
        Self::new(p, (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))))
    }

    /// Directed line `0 -> 1 -> .. -> p-1`.
    pub fn line(p: usize) -> Result<Self> {
        Self::new(p, (1..p).map(|j| (j - 1, j)))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.p)
    }

    /// Edges in lexicographic order. The position of an edge in this slice is
    /// its variable index in symbolic computations.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i, j)).ok()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.children[i].contains(j)
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.has_edge(i, j) || self.has_edge(j, i)
    }

    pub fn parents(&self, v: usize) -> VertexSet {
        self.parents[v]
    }

    pub fn children(&self, v: usize) -> VertexSet {
        self.children[v]
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        self.parents[v].union(self.children[v])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    /// Maximum over vertices of in-degree plus out-degree.
    pub fn max_degree(&self) -> usize {
        (0..self.p).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Ancestors of `set`, including `set` itself.
    pub fn ancestors_of(&self, set: VertexSet) -> VertexSet {
        let mut anc = set;
        // topological order: a single reverse sweep closes the set
        for v in (0..self.p).rev() {
            if anc.contains(v) {
                anc = anc.union(self.parents[v]);
            }
        }
        anc
    }

    /// Pairs `i < j` that are non-adjacent but share a neighbour, i.e. the
    /// endpoints of some unshielded triple.
    pub fn unshielded_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in i + 1..self.p {
                if !self.adjacent(i, j) && !self.neighbors(i).intersection(self.neighbors(j)).is_empty()
                {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Colliders `k` of unshielded triples `i -> k <- j`, as `(i, k, j)` with `i < j`.
    pub fn v_structures(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.p {
            let pa = self.parents[k].to_vec();
            for (a, &i) in pa.iter().enumerate() {
                for &j in &pa[a + 1..] {
                    if !self.adjacent(i, j) {
                        out.push((i, k, j));
                    }
                }
            }
        }
        out
    }

    fn is_connected(&self) -> bool {
        let mut seen = VertexSet::singleton(0);
        let mut frontier = seen;
        while !frontier.is_empty() {
            let mut next = VertexSet::EMPTY;
            for v in frontier.iter() {
                next = next.union(self.neighbors(v));
            }
            frontier = next.difference(seen);
            seen = seen.union(next);
        }
        seen == self.vertices()
    }

    /// A rooted out-tree: connected, `p - 1` edges, every vertex but one has
    /// exactly one parent.
    pub fn is_rooted_tree(&self) -> bool {
        self.p >= 2
            && self.num_edges() == self.p - 1
            && self.is_connected()
            && (0..self.p).filter(|&v| self.parents[v].is_empty()).count() == 1
            && (0..self.p).all(|v| self.parents[v].len() <= 1)
    }
}

/// Rooted tree with all edges directed away from the root. The number of
/// levels is drawn uniformly from `{2, .., p}`.
pub fn make_tree<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<Dag> {
    if p < 2 {
        return Err(Error::InvalidSize(format!("tree needs p >= 2, got {p}")));
    }
    let levels = rng.gen_range(2..=p);
    make_tree_with_levels(p, levels, rng)
}

/// Rooted tree with a prescribed number of levels. The root is alone on the
/// first level; the other `p - 1` vertices are spread over the remaining
/// levels as a uniformly random composition, and every vertex picks a uniform
/// parent on the previous level. Vertices are numbered level by level.
pub fn make_tree_with_levels<R: Rng + ?Sized>(p: usize, levels: usize, rng: &mut R) -> Result<Dag> {
    if p < 2 {
        return Err(Error::InvalidSize(format!("tree needs p >= 2, got {p}")));
    }
    if levels < 2 || levels > p {
        return Err(Error::InvalidSize(format!(
            "level count {levels} must lie in 2..={p}"
        )));
    }
    // composition of p-1 into levels-1 positive parts via sorted cut points
    let mut cuts: Vec<usize> = index::sample(rng, p - 2, levels - 2)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(levels);
    sizes.push(1);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(p - 1)) {
        sizes.push(c - prev);
        prev = c;
    }

    let mut edges = Vec::with_capacity(p - 1);
    let mut start_prev = 0;
    let mut start = 1;
    for w in sizes.windows(2) {
        let (prev_size, size) = (w[0], w[1]);
        for v in start..start + size {
            edges.push((start_prev + rng.gen_range(0..prev_size), v));
        }
        start_prev = start;
        start += size;
    }
    Dag::new(p, edges)
}

/// Edges `i -> i+1` along the line plus the chord `0 -> p-1`; vertex `p-1`
/// is the single collider.
pub fn make_cycle(p: usize) -> Result<Dag> {
    if p < 3 {
        return Err(Error::InvalidSize(format!("cycle needs p >= 3, got {p}")));
    }
    Dag::new(p, (1..p).map(|j| (j - 1, j)).chain(std::iter::once((0, p - 1))))
}

/// `K_{2,p-2}` with source `0`, sink `p-1` and middle layer `1..p-1`.
pub fn make_bipartite(p: usize) -> Result<Dag> {
    if p < 4 {
        return Err(Error::InvalidSize(format!("bipartite needs p >= 4, got {p}")));
    }
    Dag::new(p, (1..p - 1).flat_map(|j| [(0, j), (j, p - 1)]))
}

/// Independent edges `i -> j`, `i < j`, each present with probability
/// `expected_neighborhood / (p - 1)`.
pub fn make_random<R: Rng + ?Sized>(p: usize, expected_neighborhood: f64, rng: &mut R) -> Result<Dag> {
    if p < 2 {
        return Err(Error::InvalidSize(format!("random DAG needs p >= 2, got {p}")));
    }
    let prob = expected_neighborhood / (p - 1) as f64;
    if !(prob > 0.0 && prob <= 1.0) {
        return Err(Error::InvalidDensity(prob));
    }
    let mut edges = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if rng.gen::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    Dag::new(p, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation() {
        assert!(Dag::new(0, []).is_err());
        assert!(Dag::new(3, [(1, 0)]).is_err());
        assert!(Dag::new(3, [(0, 3)]).is_err());
        assert!(Dag::new(3, [(0, 1), (0, 1)]).is_err());
        assert!(Dag::new(65, []).is_err());
        let g = Dag::new(3, [(1, 2), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn tree_two_vertices_is_single_edge() {
        for seed in 0..5 {
            let g = make_tree(2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(g.edges(), &[(0, 1)]);
        }
    }

    #[test]
    fn tree_with_all_levels_is_line() {
        let g = make_tree_with_levels(5, 5, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(g, Dag::line(5).unwrap());
    }

    #[test]
    fn tree_with_two_levels_is_star() {
        let g = make_tree_with_levels(6, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(g.children(0), VertexSet::from_slice(&[1, 2, 3, 4, 5]));
        assert_eq!(g.max_degree(), 5);
    }

    #[test]
    fn trees_are_rooted_out_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = make_tree(10, &mut rng).unwrap();
            assert_eq!(g.num_edges(), 9);
            assert!(g.is_rooted_tree());
            for v in 1..10 {
                assert_eq!(g.parents(v).len(), 1);
            }
        }
        assert!(make_tree(1, &mut rng).is_err());
    }

    #[test]
    fn cycle_construction() {
        assert_eq!(make_cycle(3).unwrap(), Dag::complete(3).unwrap());
        let g = make_cycle(4).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        let g5 = make_cycle(5).unwrap();
        assert_eq!(g5.v_structures(), vec![(0, 4, 3)]);
        assert!(make_cycle(2).is_err());
    }

    #[test]
    fn bipartite_construction() {
        let g = make_bipartite(4).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(make_bipartite(6).unwrap().num_edges(), 8);
        let g5 = make_bipartite(5).unwrap();
        assert_eq!(g5.parents(4).len(), 3);
        assert_eq!(g5.children(0).len(), 3);
        assert!(make_bipartite(3).is_err());
    }

    #[test]
    fn max_degree_examples() {
        assert_eq!(Dag::line(3).unwrap().max_degree(), 2);
        assert_eq!(make_bipartite(6).unwrap().max_degree(), 4);
        let star = Dag::new(7, (1..7).map(|j| (0, j))).unwrap();
        assert_eq!(star.max_degree(), 6);
    }

    #[test]
    fn random_dag_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(make_random(6, 5.0, &mut rng).unwrap(), Dag::complete(6).unwrap());
        for _ in 0..20 {
            assert_eq!(make_random(2, 1.0, &mut rng).unwrap().edges(), &[(0, 1)]);
        }
        assert_eq!(make_random(5, 0.0, &mut rng), Err(Error::InvalidDensity(0.0)));
        assert!(make_random(5, 4.5, &mut rng).is_err());
    }

    #[test]
    fn random_dag_edge_count_matches_binomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 10_000;
        let total: usize = (0..draws)
            .map(|_| make_random(10, 2.0, &mut rng).unwrap().num_edges())
            .sum();
        let mean = total as f64 / draws as f64;
        // binomial(45, 2/9): mean 10, variance 45 * 2/9 * 7/9
        let sd_of_mean = (45.0 * 2.0 / 9.0 * 7.0 / 9.0 / draws as f64).sqrt();
        assert!((mean - 10.0).abs() < 3.0 * sd_of_mean, "mean edge count {mean}");
    }
}
