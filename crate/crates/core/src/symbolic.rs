//! Exact symbolic model: `K` and `Sigma` as polynomial matrices in the edge
//! variables, exact determinants and cofactors, and the partial covariance
//! polynomials `P_{ij|S} = det(K_{CC}) K_ij - K_{iC} adj(K_{CC}) K_{Cj}`,
//! `C = V \ (S ∪ {i, j})`.
//!
//! Variable `k` is the weight of `dag.edges()[k]`.

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::poly::{Monomial, SparsePoly};
use crate::vset::VertexSet;
use std::collections::HashMap;

/// Largest `p` accepted by [`symbolic_sigma_trek`].
pub const MAX_SIGMA_P: usize = 10;
/// Largest `|V \ Q|` accepted by [`partial_cov_poly`] and [`determinant`].
pub const MAX_DET_SIZE: usize = 12;

/// Printable name of variable `v`: `a_i_j` with 1-based endpoints.
pub fn var_name(g: &Dag, v: usize) -> String {
    let (i, j) = g.edges()[v];
    format!("a_{}_{}", i + 1, j + 1)
}

pub fn display_poly(g: &Dag, p: &SparsePoly) -> String {
    p.display_with(|v| var_name(g, v))
}

/// Square matrix of polynomials, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix {
    n: usize,
    nvars: usize,
    entries: Vec<SparsePoly>,
}

impl PolyMatrix {
    pub fn zeros(n: usize, nvars: usize) -> Self {
        PolyMatrix {
            n,
            nvars,
            entries: vec![SparsePoly::zero(nvars); n * n],
        }
    }

    pub fn identity(n: usize, nvars: usize) -> Self {
        let mut m = Self::zeros(n, nvars);
        for i in 0..n {
            m.entries[i * n + i] = SparsePoly::one(nvars);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &SparsePoly {
        &self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: SparsePoly) {
        self.entries[i * self.n + j] = v;
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        assert_eq!(rows.len(), cols.len());
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for &r in rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        PolyMatrix {
            n,
            nvars: self.nvars,
            entries,
        }
    }

    pub fn mul(&self, o: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut out = Self::zeros(n, self.nvars);
        for i in 0..n {
            for j in 0..n {
                let mut acc = SparsePoly::zero(self.nvars);
                for k in 0..n {
                    let a = self.get(i, k);
                    let b = o.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.entries[i * n + j] = acc;
            }
        }
        out
    }

    pub fn transpose(&self) -> PolyMatrix {
        let n = self.n;
        let mut out = Self::zeros(n, self.nvars);
        for i in 0..n {
            for j in 0..n {
                out.entries[j * n + i] = self.get(i, j).clone();
            }
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        let one = SparsePoly::one(self.nvars);
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let e = self.get(i, j);
                if i == j {
                    *e == one
                } else {
                    e.is_zero()
                }
            })
        })
    }

    /// Numeric evaluation of every entry at `x`, row-major.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|e| e.eval(x)).collect()
    }
}

/// The weighted adjacency matrix `A` as polynomials.
pub fn symbolic_a(g: &Dag) -> PolyMatrix {
    let nv = g.num_edges();
    let mut a = PolyMatrix::zeros(g.p(), nv);
    for (v, &(i, j)) in g.edges().iter().enumerate() {
        a.set(i, j, SparsePoly::var(nv, v));
    }
    a
}

/// `K` by its path description: `K_ii = 1 + sum_{i->k} a_ik^2` and, off the
/// diagonal, the sum over common children minus the direct edge.
pub fn symbolic_k(g: &Dag) -> PolyMatrix {
    let p = g.p();
    let nv = g.num_edges();
    let var = |i: usize, j: usize| g.edge_index(i, j).map(|v| SparsePoly::var(nv, v));
    let mut k = PolyMatrix::zeros(p, nv);
    for i in 0..p {
        let mut d = SparsePoly::one(nv);
        for c in g.children(i).iter() {
            let x = var(i, c).unwrap();
            d = &d + &(&x * &x);
        }
        k.set(i, i, d);
        for j in i + 1..p {
            let mut e = SparsePoly::zero(nv);
            for c in g.children(i).intersection(g.children(j)).iter() {
                e = &e + &(&var(i, c).unwrap() * &var(j, c).unwrap());
            }
            if let Some(x) = var(i, j) {
                e = &e - &x;
            }
            k.set(i, j, e.clone());
            k.set(j, i, e);
        }
    }
    k
}

/// `B = (I - A)^{-1} = sum_s A^s`: entry `(i, j)` sums the weights of the
/// directed paths from `i` to `j`.
pub fn symbolic_path_matrix(g: &Dag) -> PolyMatrix {
    let p = g.p();
    let nv = g.num_edges();
    let mut b = PolyMatrix::identity(p, nv);
    for j in 0..p {
        for i in 0..j {
            let mut acc = SparsePoly::zero(nv);
            for k in g.parents(j).iter().filter(|&k| k >= i) {
                let x = SparsePoly::var(nv, g.edge_index(k, j).unwrap());
                acc = &acc + &(b.get(i, k) * &x);
            }
            b.set(i, j, acc);
        }
    }
    b
}

/// `Sigma` by trek expansion: `Sigma_ij = sum_t B_ti B_tj`, one term per trek
/// with top `t`.
pub fn symbolic_sigma_trek(g: &Dag) -> Result<PolyMatrix> {
    symbolic_sigma_trek_bounded(g, MAX_SIGMA_P)
}

pub fn symbolic_sigma_trek_bounded(g: &Dag, max_p: usize) -> Result<PolyMatrix> {
    if g.p() > max_p {
        return Err(Error::SymbolicTooLarge(format!(
            "trek expansion for p = {} exceeds the bound {max_p}",
            g.p()
        )));
    }
    let b = symbolic_path_matrix(g);
    Ok(b.transpose().mul(&b))
}

/// Exact determinant by Laplace expansion along rows, memoized on the set of
/// columns already used.
pub fn determinant(m: &PolyMatrix) -> Result<SparsePoly> {
    let n = m.size();
    if n > MAX_DET_SIZE + 1 {
        return Err(Error::SymbolicTooLarge(format!(
            "{n} x {n} determinant exceeds the bound"
        )));
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut memo: HashMap<u32, SparsePoly> = HashMap::new();
    memo.insert(full, SparsePoly::one(m.nvars()));
    // masks with more used columns are computed first
    let mut masks: Vec<u32> = (0..=full).collect();
    masks.sort_by_key(|x| std::cmp::Reverse(x.count_ones()));
    for mask in masks {
        if mask == full {
            continue;
        }
        let row = mask.count_ones() as usize;
        let mut acc = SparsePoly::zero(m.nvars());
        let mut free_before = 0;
        for c in 0..n {
            if mask >> c & 1 == 1 {
                continue;
            }
            let e = m.get(row, c);
            if !e.is_zero() {
                let sub = &memo[&(mask | 1 << c)];
                if !sub.is_zero() {
                    let t = e * sub;
                    acc = if free_before % 2 == 0 { &acc + &t } else { &acc - &t };
                }
            }
            free_before += 1;
        }
        memo.insert(mask, acc);
    }
    Ok(memo.remove(&0).unwrap())
}

/// Cofactor `C(M)_ij = (-1)^{i+j} det(M without row i and column j)`.
pub fn cofactor(m: &PolyMatrix, i: usize, j: usize) -> Result<SparsePoly> {
    let n = m.size();
    let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
    let cols: Vec<usize> = (0..n).filter(|&c| c != j).collect();
    let d = determinant(&m.submatrix(&rows, &cols))?;
    Ok(if (i + j).is_multiple_of(2) { d } else { -&d })
}

fn complement(g: &Dag, q: VertexSet) -> Vec<usize> {
    g.vertices().difference(q).to_vec()
}

fn check_det_size(n: usize) -> Result<()> {
    if n > MAX_DET_SIZE {
        return Err(Error::SymbolicTooLarge(format!(
            "|V \\ Q| = {n} exceeds the determinant bound {MAX_DET_SIZE}"
        )));
    }
    Ok(())
}

/// `det(K_{CC}) K_uv - K_{uC} adj(K_{CC}) K_{Cv}` for `u, v ∈ q`, `C = V \ q`,
/// computed as the bordered determinant `det K[{u} ∪ C, {v} ∪ C]`. Equals
/// `det(K_{CC})` times the `(u, v)` entry of the marginal concentration `K_q`.
pub fn conditional_poly(k: &PolyMatrix, g: &Dag, q: VertexSet, u: usize, v: usize) -> Result<SparsePoly> {
    if !q.contains(u) || !q.contains(v) {
        return Err(Error::InvalidQuery("u and v must lie in Q".into()));
    }
    let c = complement(g, q);
    check_det_size(c.len())?;
    let mut rows = vec![u];
    rows.extend(&c);
    let mut cols = vec![v];
    cols.extend(&c);
    determinant(&k.submatrix(&rows, &cols))
}

/// `P_{ij|S}`. For `i == j` this is the analogue with `Q = S ∪ {i}`.
pub fn partial_cov_poly(g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<SparsePoly> {
    check_query(g, i, j, s)?;
    conditional_poly(&symbolic_k(g), g, s.with(i).with(j), i, j)
}

/// `(P_ii, P_jj)` for the triple `(i, j, S)`, both taken with `Q = S ∪ {i, j}`
/// so that `|corr(X_i, X_j | X_S)| = |P_ij| / sqrt(P_ii P_jj)`.
pub fn normalizer_polys(g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<(SparsePoly, SparsePoly)> {
    check_query(g, i, j, s)?;
    if i == j {
        return Err(Error::InvalidQuery("normalizers need i != j".into()));
    }
    let k = symbolic_k(g);
    let q = s.with(i).with(j);
    Ok((conditional_poly(&k, g, q, i, i)?, conditional_poly(&k, g, q, j, j)?))
}

/// `P_{ij|S}` assembled term by term from `det(K_{CC})` and the cofactor
/// matrix of `K_{CC}`.
pub fn partial_cov_poly_by_cofactors(k: &PolyMatrix, g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<SparsePoly> {
    check_query(g, i, j, s)?;
    let c = complement(g, s.with(i).with(j));
    check_det_size(c.len())?;
    let kcc = k.submatrix(&c, &c);
    let mut out = &determinant(&kcc)? * k.get(i, j);
    for (a, &pa) in c.iter().enumerate() {
        let kip = k.get(i, pa);
        if kip.is_zero() {
            continue;
        }
        for (b, &qb) in c.iter().enumerate() {
            let kqj = k.get(qb, j);
            if kqj.is_zero() {
                continue;
            }
            out = &out - &(&(kip * &cofactor(&kcc, a, b)?) * kqj);
        }
    }
    Ok(out)
}

fn check_query(g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<()> {
    let p = g.p();
    if i >= p || j >= p || s.difference(g.vertices()) != VertexSet::EMPTY {
        return Err(Error::InvalidQuery(format!("vertex out of range for p = {p}")));
    }
    if s.contains(i) || s.contains(j) {
        return Err(Error::InvalidQuery("S must exclude i and j".into()));
    }
    Ok(())
}

/// Monomial of the edge variables along `path` (consecutive vertices must be adjacent).
pub fn path_monomial(g: &Dag, path: &[usize]) -> Option<Monomial> {
    let mut e = vec![0u16; g.num_edges()];
    for w in path.windows(2) {
        let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
        e[g.edge_index(a, b)?] += 1;
    }
    Some(Monomial::from_exponents(e))
}
