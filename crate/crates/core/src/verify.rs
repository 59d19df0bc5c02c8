//! Cross-check suite: symbolic, numeric and graphical computations are
//! compared against each other on a corpus of small DAGs.

use crate::error::Result;
use crate::format::write_dag;
use crate::graph::{
    d_separated, d_separated_moral, enumerate_triples, make_bipartite, make_cycle, make_random,
    make_tree_with_levels, Dag, Triple, TripleMode,
};
use crate::ponstein::{ponstein_cofactor, ponstein_det};
use crate::sem::{build_model, partial_correlation_precision, partial_correlation_sigma, Weights};
use crate::symbolic::{
    cofactor, conditional_poly, determinant, symbolic_k, symbolic_sigma_trek, PolyMatrix,
};
use crate::vset::subsets_by_size;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;

pub const ID_DSEP: &str = "d-separation: Bayes ball = moral ancestral graph";
pub const ID_SIGMA_K: &str = "Σ·K = I";
pub const ID_ZERO: &str = "P_ij|S ≡ 0 ⇔ d-separated";
pub const ID_PONSTEIN: &str = "cycle/path expansion = direct determinant";
pub const ID_NUMERIC: &str = "|corr| = |P_ij| / sqrt(P_ii P_jj)";
pub const ID_ROUTES: &str = "covariance route = concentration route";

/// Largest `|V \ Q|` for the expansion comparison.
pub const PONSTEIN_CHECK_SIZE: usize = 4;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub p_max: usize,
    pub random_dags: usize,
    pub seed: u64,
    /// Random weight vectors per triple for the numeric checks.
    pub points: usize,
    pub tolerance: f64,
    /// Builds the symbolic concentration matrix; replaceable for negative tests.
    pub k_builder: fn(&Dag) -> PolyMatrix,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            p_max: 5,
            random_dags: 200,
            seed: 0,
            points: 100,
            tolerance: 1e-9,
            k_builder: symbolic_k,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyFailure {
    pub identity: &'static str,
    pub dag: Dag,
    pub triple: Option<Triple>,
    pub detail: String,
}

impl fmt::Display for VerifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "FAILED: {}", self.identity)?;
        if let Some(t) = &self.triple {
            writeln!(f, "triple: {t}")?;
        }
        writeln!(f, "detail: {}", self.detail)?;
        write!(f, "dag:\n{}", write_dag(&self.dag))
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub dags: usize,
    pub triples: usize,
    pub checks: u64,
    pub failure: Option<VerifyFailure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Every generator's output up to `p_max` vertices, then `random_dags`
/// random DAGs of varying size and density.
pub fn corpus(opts: &VerifyOptions) -> Result<Vec<Dag>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = Vec::new();
    for p in 1..=opts.p_max {
        out.push(Dag::empty(p)?);
        out.push(Dag::line(p)?);
        out.push(Dag::complete(p)?);
        if p >= 2 {
            for levels in 2..=p {
                out.push(make_tree_with_levels(p, levels, &mut rng)?);
            }
            for en in [0.5, 1.0, 2.0] {
                if en <= (p - 1) as f64 {
                    out.push(make_random(p, en, &mut rng)?);
                }
            }
        }
        if p >= 3 {
            out.push(make_cycle(p)?);
        }
        if p >= 4 {
            out.push(make_bipartite(p)?);
        }
    }
    if opts.p_max >= 2 {
        for _ in 0..opts.random_dags {
            let p = rng.gen_range(2..=opts.p_max);
            let en = rng.gen_range(0.2..=1.0) * (p - 1) as f64;
            out.push(make_random(p, en, &mut rng)?);
        }
    }
    Ok(out)
}

pub fn run_verification(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    for g in corpus(opts)? {
        report.dags += 1;
        if let Some(f) = check_dag(&g, opts, &mut rng, &mut report)? {
            report.failure = Some(f);
            break;
        }
    }
    Ok(report)
}

fn fail(identity: &'static str, g: &Dag, triple: Option<Triple>, detail: String) -> Option<VerifyFailure> {
    Some(VerifyFailure {
        identity,
        dag: g.clone(),
        triple,
        detail,
    })
}

/// Runs every identity on one DAG; returns the first failure.
pub fn check_dag(
    g: &Dag,
    opts: &VerifyOptions,
    rng: &mut ChaCha8Rng,
    report: &mut VerifyReport,
) -> Result<Option<VerifyFailure>> {
    let triples: Vec<Triple> = enumerate_triples(g, TripleMode::Full, u128::MAX)?.collect();
    report.triples += triples.len();

    for t in &triples {
        report.checks += 1;
        let moral = d_separated_moral(g, t.i, t.j, t.s)?;
        if t.dsep != moral || d_separated(g, t.i, t.j, t.s)? != moral {
            return Ok(fail(ID_DSEP, g, Some(*t), format!("moral criterion says {moral}")));
        }
    }

    let k = (opts.k_builder)(g);
    let sigma = symbolic_sigma_trek(g)?;
    report.checks += 1;
    if !sigma.mul(&k).is_identity() {
        return Ok(fail(ID_SIGMA_K, g, None, "symbolic product differs from the identity".into()));
    }

    let mut polys = Vec::with_capacity(triples.len());
    for t in &triples {
        report.checks += 1;
        let q = t.s.with(t.i).with(t.j);
        let pij = conditional_poly(&k, g, q, t.i, t.j)?;
        if pij.is_zero() != t.dsep {
            return Ok(fail(
                ID_ZERO,
                g,
                Some(*t),
                format!("P is {}zero, d-separated = {}", if pij.is_zero() { "" } else { "non" }, t.dsep),
            ));
        }
        let pii = conditional_poly(&k, g, q, t.i, t.i)?;
        let pjj = conditional_poly(&k, g, q, t.j, t.j)?;
        polys.push((pij, pii, pjj));
    }

    for qc in subsets_by_size(g.vertices(), PONSTEIN_CHECK_SIZE) {
        let idx = qc.to_vec();
        let kcc = k.submatrix(&idx, &idx);
        report.checks += 1;
        if ponstein_det(g, qc)? != determinant(&kcc)? {
            return Ok(fail(ID_PONSTEIN, g, None, format!("determinant on {:?}", one_based(&idx))));
        }
        for (a, &u) in idx.iter().enumerate() {
            for (b, &v) in idx.iter().enumerate() {
                report.checks += 1;
                if ponstein_cofactor(g, qc, u, v)? != cofactor(&kcc, a, b)? {
                    return Ok(fail(
                        ID_PONSTEIN,
                        g,
                        None,
                        format!("cofactor ({}, {}) on {:?}", u + 1, v + 1, one_based(&idx)),
                    ));
                }
            }
        }
    }

    for _ in 0..opts.points {
        let x: Vec<f64> = (0..g.num_edges()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let model = build_model(&Weights::new(g.clone(), x.clone())?)?;
        for (t, (pij, pii, pjj)) in triples.iter().zip(&polys) {
            report.checks += 2;
            let sym = pij.eval(&x).abs() / (pii.eval(&x) * pjj.eval(&x)).sqrt();
            let by_sigma = partial_correlation_sigma(&model, t.i, t.j, t.s)?;
            let by_k = partial_correlation_precision(&model, t.i, t.j, t.s)?;
            if (sym - by_k.abs()).abs().is_nan() || (sym - by_k.abs()).abs() > opts.tolerance {
                return Ok(fail(
                    ID_NUMERIC,
                    g,
                    Some(*t),
                    format!("symbolic {sym:e} vs numeric {:e} at {x:?}", by_k.abs()),
                ));
            }
            if (by_sigma - by_k).abs().is_nan() || (by_sigma - by_k).abs() > opts.tolerance {
                return Ok(fail(
                    ID_ROUTES,
                    g,
                    Some(*t),
                    format!("{by_sigma:e} vs {by_k:e} at {x:?}"),
                ));
            }
        }
    }
    Ok(None)
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|x| x + 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::SparsePoly;

    fn corrupted_k(g: &Dag) -> PolyMatrix {
        let mut k = symbolic_k(g);
        let nv = k.nvars();
        let bumped = k.get(0, 0) + &SparsePoly::one(nv);
        k.set(0, 0, bumped);
        k
    }

    #[test]
    fn clean_build_passes_small() {
        let opts = VerifyOptions {
            p_max: 4,
            random_dags: 20,
            points: 10,
            ..Default::default()
        };
        let report = run_verification(&opts).unwrap();
        assert!(report.passed(), "{}", report.failure.unwrap());
        assert!(report.dags > 20 && report.triples > 0);
    }

    #[test]
    fn corrupted_k_is_caught() {
        let opts = VerifyOptions {
            p_max: 3,
            random_dags: 0,
            points: 2,
            k_builder: corrupted_k,
            ..Default::default()
        };
        let f = run_verification(&opts).unwrap().failure.expect("must fail");
        assert_eq!(f.identity, ID_SIGMA_K);
        assert!(f.to_string().contains("Σ·K = I"));
    }

    #[test]
    fn corpus_is_deterministic() {
        let opts = VerifyOptions::default();
        assert_eq!(corpus(&opts).unwrap(), corpus(&opts).unwrap());
    }
}
