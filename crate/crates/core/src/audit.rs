//! Point-level faithfulness verdicts for one weight vector.
//!
//! A class is violated at `λ` when some triple in its index set has
//! `zero_threshold <= |corr| <= λ`; values below the threshold are structural
//! zeroes and never count.

use crate::error::{Error, Result};
use crate::graph::{d_connected_from, enumerate_triples, triple_count, Dag, Triple, TripleMode};
use crate::sem::{build_model, conditional_covariance, min_abs_parcorr, partial_correlation, GaussianModel, Weights, Workspace};
use crate::vset::{subsets_by_size, VertexSet};
use serde::Serialize;

/// Default cap on candidate triples for one enumeration; admits the full class up to `p = 15`.
pub const DEFAULT_TRIPLE_BUDGET: u128 = 1_000_000;

pub fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLambda(lambda))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassMinimum {
    pub class: TripleMode,
    /// `f64::INFINITY` when the class has no surviving triple.
    pub min_parcorr: f64,
    pub argmin: Option<Triple>,
}

impl ClassMinimum {
    pub fn unfaithful(&self, lambda: f64) -> bool {
        self.min_parcorr <= lambda
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub lambdas: Vec<f64>,
    pub zero_threshold: f64,
    /// Present classes in the order M, N1, N2.
    pub classes: Vec<ClassMinimum>,
    /// Set when the full class exceeded the budget and was skipped.
    pub full_class_skipped: bool,
}

impl AuditReport {
    pub fn class(&self, class: TripleMode) -> Option<&ClassMinimum> {
        self.classes.iter().find(|c| c.class == class)
    }

    /// `true` when the class is faithful at `lambda`; `None` if the class was skipped.
    pub fn verdict(&self, class: TripleMode, lambda: f64) -> Option<bool> {
        self.class(class).map(|c| !c.unfaithful(lambda))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<AuditRow> = self
            .lambdas
            .iter()
            .flat_map(|&lambda| {
                self.classes.iter().map(move |c| AuditRow {
                    lambda,
                    class: c.class.label(),
                    min_parcorr: c.min_parcorr.is_finite().then_some(c.min_parcorr),
                    verdict: if c.unfaithful(lambda) { "unfaithful" } else { "faithful" },
                    argmin: c.argmin.map(|t| ArgminJson {
                        i: t.i + 1,
                        j: t.j + 1,
                        s: t.s.iter().map(|v| v + 1).collect(),
                    }),
                })
            })
            .collect();
        serde_json::to_value(AuditJson {
            zero_threshold: self.zero_threshold,
            full_class_skipped: self.full_class_skipped,
            rows,
        })
        .expect("serializable")
    }
}

#[derive(Serialize)]
struct AuditJson {
    zero_threshold: f64,
    full_class_skipped: bool,
    rows: Vec<AuditRow>,
}

/// One `(λ, class)` row. `min_parcorr` is `null` when nothing survived the
/// zero threshold.
#[derive(Serialize)]
struct AuditRow {
    lambda: f64,
    class: &'static str,
    min_parcorr: Option<f64>,
    verdict: &'static str,
    argmin: Option<ArgminJson>,
}

#[derive(Serialize)]
struct ArgminJson {
    i: usize,
    j: usize,
    #[serde(rename = "S")]
    s: Vec<usize>,
}

fn class_minimum(model: &GaussianModel, g: &Dag, class: TripleMode, zero_threshold: f64, budget: u128) -> Result<ClassMinimum> {
    let mut triples = enumerate_triples(g, class, budget)?.peekable();
    let (min_parcorr, argmin) = if triples.peek().is_none() {
        (f64::INFINITY, None)
    } else {
        min_abs_parcorr(model, triples, zero_threshold)?
    };
    Ok(ClassMinimum {
        class,
        min_parcorr,
        argmin,
    })
}

pub fn audit(w: &Weights, lambdas: &[f64], zero_threshold: f64) -> Result<AuditReport> {
    audit_with_budget(w, lambdas, zero_threshold, DEFAULT_TRIPLE_BUDGET)
}

/// Minima and verdicts for all three classes. If the full class exceeds
/// `budget`, it is skipped and `full_class_skipped` is set.
pub fn audit_with_budget(w: &Weights, lambdas: &[f64], zero_threshold: f64, budget: u128) -> Result<AuditReport> {
    for &l in lambdas {
        check_lambda(l)?;
    }
    let model = build_model(w)?;
    let g = w.dag();
    let mut classes = Vec::with_capacity(3);
    let mut full_class_skipped = false;
    for class in TripleMode::ALL {
        match class_minimum(&model, g, class, zero_threshold, budget) {
            Ok(c) => classes.push(c),
            Err(Error::EnumerationTooLarge { .. }) if class == TripleMode::Full => full_class_skipped = true,
            Err(e) => return Err(e),
        }
    }
    Ok(AuditReport {
        lambdas: lambdas.to_vec(),
        zero_threshold,
        classes,
        full_class_skipped,
    })
}

/// `true` iff some triple of `class` has `zero_threshold <= |corr| <= lambda`.
/// Stops at the first witness.
pub fn early_exit_membership(w: &Weights, lambda: f64, class: TripleMode, zero_threshold: f64) -> Result<bool> {
    check_lambda(lambda)?;
    let model = build_model(w)?;
    for t in enumerate_triples(w.dag(), class, DEFAULT_TRIPLE_BUDGET)? {
        let r = partial_correlation(&model, t.i, t.j, t.s)?.abs();
        if r >= zero_threshold && r <= lambda {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A triple index set grouped by conditioning set, so that one factorization
/// of `Sigma_SS` serves every pair conditioned on `S`.
#[derive(Clone, Debug)]
pub struct TriplePlan {
    groups: Vec<Group>,
    len: usize,
}

#[derive(Clone, Debug)]
struct Group {
    s: Vec<usize>,
    targets: Vec<usize>,
    /// Index pairs into `targets`.
    pairs: Vec<(u8, u8)>,
}

impl TriplePlan {
    pub fn build(g: &Dag, class: TripleMode, budget: u128) -> Result<Self> {
        let count = triple_count(g, class);
        if count > budget {
            return Err(Error::EnumerationTooLarge { count, budget });
        }
        let cap = match class {
            TripleMode::Full => g.p(),
            _ => g.max_degree(),
        };
        let unshielded = if class == TripleMode::Restricted {
            g.unshielded_pairs()
        } else {
            Vec::new()
        };
        let mut groups = Vec::new();
        let mut len = 0;
        for s in subsets_by_size(g.vertices(), cap) {
            let mut pairs: Vec<(usize, usize)> = Vec::new();
            let outside = |&(i, j): &(usize, usize)| !s.contains(i) && !s.contains(j);
            match class {
                TripleMode::Full => {
                    for i in g.vertices().difference(s).iter() {
                        let reach = d_connected_from(g, i, s);
                        pairs.extend(reach.iter().filter(|&j| j > i).map(|j| (i, j)));
                    }
                }
                TripleMode::Restricted => {
                    pairs.extend(g.edges().iter().copied().filter(outside));
                    for &(i, j) in unshielded.iter().filter(|e| outside(e)) {
                        if d_connected_from(g, i, s).contains(j) {
                            pairs.push((i, j));
                        }
                    }
                }
                TripleMode::Adjacency => pairs.extend(g.edges().iter().copied().filter(outside)),
            }
            if pairs.is_empty() {
                continue;
            }
            let mut targets: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
            targets.sort_unstable();
            targets.dedup();
            let pos = |v: usize| targets.binary_search(&v).unwrap() as u8;
            let pairs: Vec<(u8, u8)> = pairs.iter().map(|&(i, j)| (pos(i), pos(j))).collect();
            len += pairs.len();
            groups.push(Group {
                s: s.to_vec(),
                targets,
                pairs,
            });
        }
        Ok(TriplePlan { groups, len })
    }

    /// Number of triples in the plan.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Smallest `|corr|` at or above `zero_threshold`, or `INFINITY`. Returns
    /// as soon as a value `<= stop_at` is seen, so the result is exact only
    /// when it exceeds `stop_at`.
    pub fn min_abs(&self, model: &GaussianModel, zero_threshold: f64, stop_at: f64, ws: &mut Workspace) -> Result<f64> {
        let mut best = f64::INFINITY;
        for grp in &self.groups {
            let c = conditional_covariance(model, &grp.s, &grp.targets, ws)?;
            let n = grp.targets.len();
            for &(a, b) in &grp.pairs {
                let (a, b) = (a as usize, b as usize);
                let (vi, vj) = (c[a * n + a], c[b * n + b]);
                if !(vi > 0.0 && vj > 0.0) {
                    return Err(Error::NumericalDegeneracy("non-positive conditional variance".into()));
                }
                let r = (c[a * n + b] / (vi * vj).sqrt()).abs().min(1.0);
                if r >= zero_threshold && r < best {
                    best = r;
                    if best <= stop_at {
                        return Ok(best);
                    }
                }
            }
        }
        Ok(best)
    }
}

/// Per-class minima in one pass over conditioning sets, for graphs that are
/// used once (no precomputed plan). Every pair outside `S` is evaluated from a
/// single conditional covariance block; d-connection is checked only when a
/// value would lower a class minimum. Entry `k` of the result belongs to
/// `classes[k]`. Returns once every class minimum is `<= stop_at`, so values
/// are exact only above `stop_at`.
pub fn class_minima_scan(
    g: &Dag,
    model: &GaussianModel,
    classes: &[TripleMode],
    zero_threshold: f64,
    stop_at: f64,
    ws: &mut Workspace,
) -> Result<Vec<f64>> {
    let p = g.p();
    let mut best = vec![f64::INFINITY; classes.len()];
    if p < 2 || classes.is_empty() {
        return Ok(best);
    }
    let deg = g.max_degree();
    let cap = if classes.contains(&TripleMode::Full) { p - 2 } else { deg.min(p - 2) };
    let unshielded = |i: usize, j: usize| !g.adjacent(i, j) && !g.neighbors(i).intersection(g.neighbors(j)).is_empty();
    let mut reach: Vec<Option<VertexSet>> = vec![None; p];
    let mut targets = Vec::with_capacity(p);

    for s in subsets_by_size(g.vertices(), cap) {
        targets.clear();
        targets.extend(g.vertices().difference(s).iter());
        reach.iter_mut().for_each(|r| *r = None);
        let small = s.len() <= deg;
        let s_vec = s.to_vec();
        let c = conditional_covariance(model, &s_vec, &targets, ws)?;
        let n = targets.len();
        for a in 0..n {
            for b in a + 1..n {
                let (vi, vj) = (c[a * n + a], c[b * n + b]);
                if !(vi > 0.0 && vj > 0.0) {
                    return Err(Error::NumericalDegeneracy("non-positive conditional variance".into()));
                }
                let r = (c[a * n + b] / (vi * vj).sqrt()).abs().min(1.0);
                if r < zero_threshold {
                    continue;
                }
                let (i, j) = (targets[a], targets[b]);
                let adjacent = g.adjacent(i, j);
                let connected = |reach: &mut Vec<Option<VertexSet>>| {
                    adjacent || reach[i].get_or_insert_with(|| d_connected_from(g, i, s)).contains(j)
                };
                for (k, &class) in classes.iter().enumerate() {
                    if r >= best[k] {
                        continue;
                    }
                    let member = match class {
                        TripleMode::Full => connected(&mut reach),
                        TripleMode::Restricted => small && (adjacent || (unshielded(i, j) && connected(&mut reach))),
                        TripleMode::Adjacency => small && adjacent,
                    };
                    if member {
                        best[k] = r;
                    }
                }
            }
        }
        if best.iter().all(|&b| b <= stop_at) {
            break;
        }
    }
    Ok(best)
}
