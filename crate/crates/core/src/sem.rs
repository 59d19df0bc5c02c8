//! Floating-point linear Gaussian structural equation model with unit error
//! variances: `K = (I - A)(I - A)^T`, `Sigma = K^{-1}`, and partial
//! correlations for arbitrary `(i, j, S)`.

use crate::error::{Error, Result};
use crate::graph::{Dag, Triple};
use crate::linalg::{cholesky_in_place, forward_solve};
use crate::vset::VertexSet;

/// Values below this are treated as exact zeroes when scanning partial correlations.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-12;

/// One point of the parameter cube: a weight for every edge of `dag`,
/// stored in the order of [`Dag::edges`].
#[derive(Clone, Debug, PartialEq)]
pub struct Weights {
    dag: Dag,
    values: Vec<f64>,
}

impl Weights {
    /// Weights on the unit cube `[-1, 1]^|E|`.
    pub fn new(dag: Dag, values: Vec<f64>) -> Result<Self> {
        Self::with_radius(dag, values, 1.0)
    }

    /// Weights on the cube `[-r, r]^|E|`.
    pub fn with_radius(dag: Dag, values: Vec<f64>, r: f64) -> Result<Self> {
        if values.len() != dag.num_edges() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} edges",
                values.len(),
                dag.num_edges()
            )));
        }
        if let Some((k, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || v.abs() > r)
        {
            let (i, j) = dag.edges()[k];
            return Err(Error::InvalidWeights(format!(
                "weight {v} on edge ({}, {}) lies outside [-{r}, {r}]",
                i + 1,
                j + 1
            )));
        }
        Ok(Weights { dag, values })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.dag.edge_index(i, j).map(|k| self.values[k])
    }

    /// Dense strictly upper-triangular `A`, row-major.
    pub fn matrix(&self) -> Vec<f64> {
        let p = self.dag.p();
        let mut a = vec![0.0; p * p];
        for (&(i, j), &w) in self.dag.edges().iter().zip(&self.values) {
            a[i * p + j] = w;
        }
        a
    }
}

/// Covariance and concentration matrices of the model, row-major `p x p`.
#[derive(Clone, Debug)]
pub struct GaussianModel {
    p: usize,
    sigma: Vec<f64>,
    k: Vec<f64>,
}

impl GaussianModel {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn concentration(&self) -> &[f64] {
        &self.k
    }

    pub fn sigma_at(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.p + j]
    }

    pub fn k_at(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.p + j]
    }
}

/// Builds `K = (I - A)(I - A)^T` and inverts it through that same factorization:
/// with `B = (I - A)^{-1}` (unit upper triangular, so the inverse is exact
/// back substitution), `Sigma = B^T B`.
pub fn build_model(w: &Weights) -> Result<GaussianModel> {
    let p = w.dag().p();
    let a = w.matrix();
    let mut k = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            // (I - A)_{ik} is nonzero only for k >= i; same for row j
            let mut v = 0.0;
            for c in j..p {
                let x = if c == i { 1.0 } else { -a[i * p + c] };
                let y = if c == j { 1.0 } else { -a[j * p + c] };
                v += x * y;
            }
            k[i * p + j] = v;
            k[j * p + i] = v;
        }
    }
    // column-wise back substitution for B = (I - A)^{-1}
    let mut b = vec![0.0; p * p];
    for col in 0..p {
        b[col * p + col] = 1.0;
        for row in (0..col).rev() {
            let mut v = 0.0;
            for m in row + 1..=col {
                v += a[row * p + m] * b[m * p + col];
            }
            b[row * p + col] = v;
        }
    }
    let mut sigma = vec![0.0; p * p];
    for i in 0..p {
        for j in i..p {
            let v: f64 = (0..=i).map(|t| b[t * p + i] * b[t * p + j]).sum();
            sigma[i * p + j] = v;
            sigma[j * p + i] = v;
        }
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalDegeneracy("non-finite covariance entry".into()));
    }
    Ok(GaussianModel { p, sigma, k })
}

fn check_triple(p: usize, i: usize, j: usize, s: VertexSet) -> Result<()> {
    if i >= p || j >= p || s.difference(VertexSet::full(p)) != VertexSet::EMPTY {
        return Err(Error::InvalidQuery(format!("vertex out of range for p = {p}")));
    }
    if i == j || s.contains(i) || s.contains(j) {
        return Err(Error::InvalidQuery(format!(
            "ill-formed triple ({}, {}) | {:?}",
            i + 1,
            j + 1,
            s
        )));
    }
    Ok(())
}

/// Scratch buffers for conditional covariance computations. One per thread.
#[derive(Default, Debug)]
pub struct Workspace {
    chol: Vec<f64>,
    rhs: Vec<f64>,
    out: Vec<f64>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Schur complement `M_TT - M_TC (M_CC)^{-1} M_CT` of a symmetric positive
/// definite `m` (row-major `p x p`), written into `ws.out` as a `|T| x |T|`
/// row-major block.
fn schur_block<'w>(
    m: &[f64],
    p: usize,
    cond: &[usize],
    targets: &[usize],
    ws: &'w mut Workspace,
) -> Result<&'w [f64]> {
    let nc = cond.len();
    let nt = targets.len();
    ws.out.clear();
    for &a in targets {
        for &b in targets {
            ws.out.push(m[a * p + b]);
        }
    }
    if nc == 0 {
        return Ok(&ws.out);
    }
    ws.chol.clear();
    for &a in cond {
        for &b in cond {
            ws.chol.push(m[a * p + b]);
        }
    }
    cholesky_in_place(&mut ws.chol, nc)?;
    ws.rhs.clear();
    for &a in cond {
        for &b in targets {
            ws.rhs.push(m[a * p + b]);
        }
    }
    forward_solve(&ws.chol, nc, &mut ws.rhs, nt);
    for x in 0..nt {
        for y in x..nt {
            let dot: f64 = (0..nc).map(|r| ws.rhs[r * nt + x] * ws.rhs[r * nt + y]).sum();
            ws.out[x * nt + y] -= dot;
            if y != x {
                ws.out[y * nt + x] -= dot;
            }
        }
    }
    Ok(&ws.out)
}

/// Conditional covariance of `X_T` given `X_S`, as a row-major `|T| x |T|` block.
pub fn conditional_covariance<'w>(
    model: &GaussianModel,
    s: &[usize],
    targets: &[usize],
    ws: &'w mut Workspace,
) -> Result<&'w [f64]> {
    schur_block(&model.sigma, model.p, s, targets, ws)
}

fn correlation(cov_ij: f64, var_i: f64, var_j: f64) -> Result<f64> {
    if !(var_i > 0.0 && var_j > 0.0) {
        return Err(Error::NumericalDegeneracy(format!(
            "non-positive conditional variance ({var_i:e}, {var_j:e})"
        )));
    }
    Ok((cov_ij / (var_i * var_j).sqrt()).clamp(-1.0, 1.0))
}

/// Partial correlation through the covariance route: invert `Sigma_SS` and
/// read the conditional covariance of `(X_i, X_j)`.
pub fn partial_correlation_sigma(model: &GaussianModel, i: usize, j: usize, s: VertexSet) -> Result<f64> {
    check_triple(model.p, i, j, s)?;
    let mut ws = Workspace::new();
    let c = conditional_covariance(model, &s.to_vec(), &[i, j], &mut ws)?;
    correlation(c[1], c[0], c[3])
}

/// Partial correlation through the concentration route: marginal
/// concentration `K_Q` of `Q = S ∪ {i, j}` as a Schur complement of `K`,
/// then `-(K_Q)_ij / sqrt((K_Q)_ii (K_Q)_jj)`.
pub fn partial_correlation_precision(
    model: &GaussianModel,
    i: usize,
    j: usize,
    s: VertexSet,
) -> Result<f64> {
    check_triple(model.p, i, j, s)?;
    let q = s.with(i).with(j);
    let qc = VertexSet::full(model.p).difference(q).to_vec();
    let mut ws = Workspace::new();
    let kq = schur_block(&model.k, model.p, &qc, &[i, j], &mut ws)?;
    correlation(-kq[1], kq[0], kq[3])
}

/// `corr(X_i, X_j | X_S)`. Uses the covariance route when `|S ∪ {i, j}|` is
/// at most half of `p` and the concentration route otherwise.
pub fn partial_correlation(model: &GaussianModel, i: usize, j: usize, s: VertexSet) -> Result<f64> {
    if 2 * (s.len() + 2) <= model.p {
        partial_correlation_sigma(model, i, j, s)
    } else {
        partial_correlation_precision(model, i, j, s)
    }
}

/// Smallest `|corr|` over `triples`, ignoring values below `zero_threshold`.
/// Returns `(f64::INFINITY, None)` when every value was discarded.
pub fn min_abs_parcorr<I>(
    model: &GaussianModel,
    triples: I,
    zero_threshold: f64,
) -> Result<(f64, Option<Triple>)>
where
    I: IntoIterator<Item = Triple>,
{
    let mut best = (f64::INFINITY, None);
    let mut seen = false;
    for t in triples {
        seen = true;
        let r = partial_correlation(model, t.i, t.j, t.s)?.abs();
        if r >= zero_threshold && r < best.0 {
            best = (r, Some(t));
        }
    }
    if !seen {
        return Err(Error::InvalidQuery("empty triple stream".into()));
    }
    Ok(best)
}
