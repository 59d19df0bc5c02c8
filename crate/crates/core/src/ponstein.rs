//! Determinants and cofactors of principal submatrices of `K` by enumerating
//! disjoint self-avoiding cycles (and one self-avoiding path for cofactors) in
//! the symmetrized, reweighted graph with adjacency `A + A^T - A A^T`.
//!
//! Since that adjacency equals `I - K`, `det(K_CC)` is the signed sum over
//! collections of vertex-disjoint directed cycles in the graph restricted to
//! `C`, each collection weighted by `(-1)^{#cycles}` times the product of its
//! cycle weights. Loops carry the diagonal weight `-sum_t a_ut^2`.

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::poly::SparsePoly;
use crate::vset::VertexSet;
use std::collections::HashMap;

/// Largest `|C|` accepted by the expansions; cycle enumeration is exponential.
pub const MAX_PONSTEIN_SIZE: usize = 6;

/// Adjacency of the reweighted graph, built directly from the edge variables.
struct Reweighted {
    p: usize,
    w: Vec<SparsePoly>,
}

impl Reweighted {
    fn new(g: &Dag) -> Self {
        let p = g.p();
        let nv = g.num_edges();
        let x = |i: usize, j: usize| g.edge_index(i, j).map(|v| SparsePoly::var(nv, v));
        let mut w = vec![SparsePoly::zero(nv); p * p];
        for u in 0..p {
            for v in 0..p {
                let mut e = SparsePoly::zero(nv);
                if let Some(a) = x(u, v).or_else(|| x(v, u)) {
                    e = &e + &a;
                }
                // -(A A^T)_uv = -sum_t a_ut a_vt
                for t in g.children(u).intersection(g.children(v)).iter() {
                    e = &e - &(&x(u, t).unwrap() * &x(v, t).unwrap());
                }
                w[u * p + v] = e;
            }
        }
        Reweighted { p, w }
    }

    fn weight(&self, u: usize, v: usize) -> &SparsePoly {
        &self.w[u * self.p + v]
    }
}

struct Cycle {
    vertices: VertexSet,
    weight: SparsePoly,
}

/// Simple directed cycles (loops included) inside `c`, grouped by their
/// smallest vertex.
fn cycles_by_min(gw: &Reweighted, c: VertexSet) -> HashMap<usize, Vec<Cycle>> {
    let mut out: HashMap<usize, Vec<Cycle>> = HashMap::new();
    for start in c.iter() {
        let mut found = Vec::new();
        let mut path = vec![start];
        extend_cycles(gw, c, start, &mut path, &mut found);
        out.insert(start, found);
    }
    out
}

fn path_weight(gw: &Reweighted, path: &[usize]) -> SparsePoly {
    let nv = gw.w[0].nvars();
    path.windows(2)
        .fold(SparsePoly::one(nv), |acc, e| &acc * gw.weight(e[0], e[1]))
}

fn extend_cycles(gw: &Reweighted, c: VertexSet, start: usize, path: &mut Vec<usize>, out: &mut Vec<Cycle>) {
    let last = *path.last().unwrap();
    // close the cycle
    if !gw.weight(last, start).is_zero() {
        let mut closed = path.clone();
        closed.push(start);
        out.push(Cycle {
            vertices: VertexSet::from_slice(path),
            weight: path_weight(gw, &closed),
        });
    }
    let candidates: Vec<usize> = c.iter().filter(|&v| v > start && !path.contains(&v)).collect();
    for next in candidates {
        if gw.weight(last, next).is_zero() {
            continue;
        }
        path.push(next);
        extend_cycles(gw, c, start, path, out);
        path.pop();
    }
}

/// Signed sum over disjoint cycle covers of subsets of `rest`, memoized.
fn cover_sum(
    rest: VertexSet,
    cycles: &HashMap<usize, Vec<Cycle>>,
    nv: usize,
    memo: &mut HashMap<VertexSet, SparsePoly>,
) -> SparsePoly {
    if rest.is_empty() {
        return SparsePoly::one(nv);
    }
    if let Some(v) = memo.get(&rest) {
        return v.clone();
    }
    let v = rest.iter().next().unwrap();
    // v uncovered
    let mut acc = cover_sum(rest.without(v), cycles, nv, memo);
    // v on a cycle; its smallest vertex is v because v is the minimum of `rest`
    for cyc in cycles.get(&v).into_iter().flatten() {
        if cyc.vertices.difference(rest).is_empty() {
            let sub = cover_sum(rest.difference(cyc.vertices), cycles, nv, memo);
            acc = &acc - &(&cyc.weight * &sub);
        }
    }
    memo.insert(rest, acc.clone());
    acc
}

fn check(g: &Dag, qc: VertexSet) -> Result<()> {
    if qc.difference(g.vertices()) != VertexSet::EMPTY {
        return Err(Error::InvalidQuery("vertex set out of range".into()));
    }
    if qc.len() > MAX_PONSTEIN_SIZE {
        return Err(Error::SymbolicTooLarge(format!(
            "path expansion over {} vertices exceeds the bound {MAX_PONSTEIN_SIZE}",
            qc.len()
        )));
    }
    Ok(())
}

/// `det(K_{qc,qc})` from the cycle expansion.
pub fn ponstein_det(g: &Dag, qc: VertexSet) -> Result<SparsePoly> {
    check(g, qc)?;
    let gw = Reweighted::new(g);
    let cycles = cycles_by_min(&gw, qc);
    Ok(cover_sum(qc, &cycles, g.num_edges(), &mut HashMap::new()))
}

/// Cofactor of `K_{qc,qc}` at the entry indexed by vertices `(i, j)` of `qc`:
/// sum over self-avoiding paths `i -> .. -> j` of the path weight times the
/// cycle expansion on the remaining vertices. For `i == j` the path is the
/// single vertex `i`.
pub fn ponstein_cofactor(g: &Dag, qc: VertexSet, i: usize, j: usize) -> Result<SparsePoly> {
    check(g, qc)?;
    if !qc.contains(i) || !qc.contains(j) {
        return Err(Error::InvalidQuery("cofactor indices must lie in the vertex set".into()));
    }
    let gw = Reweighted::new(g);
    let nv = g.num_edges();
    let cycles = cycles_by_min(&gw, qc);
    let mut memo = HashMap::new();
    if i == j {
        return Ok(cover_sum(qc.without(i), &cycles, nv, &mut memo));
    }
    let mut acc = SparsePoly::zero(nv);
    let mut path = vec![i];
    let mut paths = Vec::new();
    simple_paths(&gw, qc, j, &mut path, &mut paths);
    for path in paths {
        let rest = qc.difference(VertexSet::from_slice(&path));
        let sub = cover_sum(rest, &cycles, nv, &mut memo);
        acc = &acc + &(&path_weight(&gw, &path) * &sub);
    }
    Ok(acc)
}

fn simple_paths(gw: &Reweighted, c: VertexSet, target: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let last = *path.last().unwrap();
    let candidates: Vec<usize> = c.iter().filter(|v| !path.contains(v)).collect();
    for next in candidates {
        if gw.weight(last, next).is_zero() {
            continue;
        }
        path.push(next);
        if next == target {
            out.push(path.clone());
        } else {
            simple_paths(gw, c, target, path, out);
        }
        path.pop();
    }
}
