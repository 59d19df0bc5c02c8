//! Monte Carlo estimates of the relative volume of the unfaithful sets.
//!
//! Sample `k` draws everything (graph, when the source is random, then the
//! weights) from its own ChaCha stream keyed by `(seed, k)`, so estimates do
//! not depend on the number of worker threads. The same stream is reused for
//! every `λ`, class and `c`, which makes those cells directly comparable.

use crate::audit::{check_lambda, class_minima_scan, TriplePlan, DEFAULT_TRIPLE_BUDGET};
use crate::error::{Error, Result};
use crate::graph::{make_random, make_tree, triple_count, Dag, TripleMode};
use crate::sem::{build_model, Weights, Workspace, DEFAULT_ZERO_THRESHOLD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

/// Full-class estimation is refused above this many vertices by default.
pub const DEFAULT_FULL_CLASS_MAX_P: usize = 15;

/// Independent stream for sample `k`.
pub fn sample_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Independent uniform weights on `[-r, -c] ∪ [c, r]`, one uniform draw per edge.
pub fn sample_weights<R: Rng + ?Sized>(g: &Dag, c: f64, r: f64, rng: &mut R) -> Result<Weights> {
    check_range(c, r)?;
    let values = (0..g.num_edges())
        .map(|_| {
            let v = 2.0 * rng.gen::<f64>() - 1.0;
            let mag = c + (r - c) * v.abs();
            if v < 0.0 {
                -mag
            } else {
                mag
            }
        })
        .collect();
    Weights::with_radius(g.clone(), values, r)
}

fn check_range(c: f64, r: f64) -> Result<()> {
    if !(r > 0.0 && c >= 0.0 && c < r) {
        return Err(Error::InvalidRange(format!("need 0 <= c < r, got c = {c}, r = {r}")));
    }
    Ok(())
}

/// Where the graph of each sample comes from.
#[derive(Clone, Debug)]
pub enum GraphSource {
    /// The same DAG for every sample.
    Fixed { dag: Dag, family: String },
    /// A fresh random rooted tree per sample.
    Tree { p: usize },
    /// A fresh random DAG per sample with the given expected neighbourhood size.
    Random { p: usize, expected_neighborhood: f64 },
}

impl GraphSource {
    pub fn family(&self) -> &str {
        match self {
            GraphSource::Fixed { family, .. } => family,
            GraphSource::Tree { .. } => "tree",
            GraphSource::Random { .. } => "random",
        }
    }

    pub fn p(&self) -> usize {
        match self {
            GraphSource::Fixed { dag, .. } => dag.p(),
            GraphSource::Tree { p } | GraphSource::Random { p, .. } => *p,
        }
    }

    /// Expected neighbourhood size for random sources, `2|E|/p` otherwise.
    pub fn density(&self) -> f64 {
        match self {
            GraphSource::Fixed { dag, .. } => 2.0 * dag.num_edges() as f64 / dag.p() as f64,
            GraphSource::Tree { p } => 2.0 * (*p as f64 - 1.0) / *p as f64,
            GraphSource::Random { expected_neighborhood, .. } => *expected_neighborhood,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    /// Lower cut-offs of the restricted parameter space; `0` is the full cube.
    pub cs: Vec<f64>,
    /// Cube radius.
    pub r: f64,
    pub samples: u64,
    pub seed: u64,
    pub classes: Vec<TripleMode>,
    pub zero_threshold: f64,
    pub budget: u128,
    pub full_class_max_p: usize,
    /// Worker threads; `0` lets rayon decide.
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            lambdas: vec![0.1, 0.01, 0.001],
            cs: vec![0.0],
            r: 1.0,
            samples: 10_000,
            seed: 0,
            classes: TripleMode::ALL.to_vec(),
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            budget: DEFAULT_TRIPLE_BUDGET,
            full_class_max_p: DEFAULT_FULL_CLASS_MAX_P,
            threads: 0,
        }
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.cs.is_empty() || self.classes.is_empty() {
            return Err(Error::InvalidQuery("empty lambda, c or class list".into()));
        }
        for &l in &self.lambdas {
            check_lambda(l)?;
        }
        for &c in &self.cs {
            check_range(c, self.r)?;
        }
        if self.samples == 0 {
            return Err(Error::InvalidQuery("samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// One estimated cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub family: String,
    pub p: usize,
    pub density: f64,
    pub lambda: f64,
    pub c: f64,
    pub class: TripleMode,
    /// Samples counted; `0` for unavailable cells.
    pub samples: u64,
    pub hits: u64,
    /// `None` when the cell was not computed; see `note`.
    pub proportion: Option<f64>,
    pub ci95: Option<f64>,
    pub seed: u64,
    pub note: Option<String>,
    pub wall_time_secs: f64,
}

/// Normal-approximation 95% radius `1.96 sqrt(p(1-p)/n)`.
pub fn ci95(proportion: f64, n: u64) -> f64 {
    1.96 * (proportion * (1.0 - proportion) / n as f64).sqrt()
}

#[derive(Clone, Debug, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn get(&self, lambda: f64, c: f64, class: TripleMode) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.lambda == lambda && r.c == c && r.class == class)
    }
}

/// Per-sample verdicts: `hits[class][lambda]`, or `None` for a class whose
/// enumeration exceeded the budget.
type SampleHits = Vec<Option<Vec<bool>>>;

#[derive(Clone)]
struct Tally {
    hits: Vec<Vec<u64>>,
    unavailable: Vec<Option<String>>,
}

impl Tally {
    fn new(classes: usize, lambdas: usize) -> Self {
        Tally {
            hits: vec![vec![0; lambdas]; classes],
            unavailable: vec![None; classes],
        }
    }

    fn add(mut self, sample: SampleHits) -> Self {
        for (k, s) in sample.into_iter().enumerate() {
            match s {
                Some(v) => {
                    for (h, hit) in self.hits[k].iter_mut().zip(v) {
                        *h += hit as u64;
                    }
                }
                None => {
                    self.unavailable[k].get_or_insert_with(|| "enumeration budget exceeded".to_string());
                }
            }
        }
        self
    }

    fn merge(mut self, o: Tally) -> Self {
        for (a, b) in self.hits.iter_mut().zip(o.hits) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.unavailable.iter_mut().zip(o.unavailable) {
            if a.is_none() {
                *a = b;
            }
        }
        self
    }
}

fn plans_for(g: &Dag, cfg: &SweepConfig) -> Result<Vec<Option<TriplePlan>>> {
    cfg.classes
        .iter()
        .map(|&class| {
            if class == TripleMode::Full && g.p() > cfg.full_class_max_p {
                return Ok(None);
            }
            match TriplePlan::build(g, class, cfg.budget) {
                Ok(plan) => Ok(Some(plan)),
                Err(Error::EnumerationTooLarge { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect()
}

fn verdicts(minima: impl Iterator<Item = Option<f64>>, cfg: &SweepConfig) -> SampleHits {
    minima
        .map(|m| m.map(|m| cfg.lambdas.iter().map(|&l| m <= l).collect()))
        .collect()
}

fn stop_level(cfg: &SweepConfig) -> f64 {
    cfg.lambdas.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Fixed graph: precomputed plans.
fn evaluate_planned(
    g: &Dag,
    plans: &[Option<TriplePlan>],
    c: f64,
    cfg: &SweepConfig,
    rng: &mut ChaCha8Rng,
    ws: &mut Workspace,
) -> Result<SampleHits> {
    let w = sample_weights(g, c, cfg.r, rng)?;
    let model = build_model(&w)?;
    let minima = plans
        .iter()
        .map(|plan| {
            plan.as_ref()
                .map(|plan| plan.min_abs(&model, cfg.zero_threshold, stop_level(cfg), ws))
                .transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(verdicts(minima.into_iter(), cfg))
}

/// Fresh graph per sample: one scan over conditioning sets for all classes.
fn evaluate_scanned(g: &Dag, c: f64, cfg: &SweepConfig, rng: &mut ChaCha8Rng, ws: &mut Workspace) -> Result<SampleHits> {
    let available: Vec<bool> = cfg
        .classes
        .iter()
        .map(|&class| {
            let capped = class == TripleMode::Full && g.p() > cfg.full_class_max_p;
            !capped && triple_count(g, class) <= cfg.budget
        })
        .collect();
    let scanned: Vec<TripleMode> = cfg
        .classes
        .iter()
        .zip(&available)
        .filter(|(_, &a)| a)
        .map(|(&c, _)| c)
        .collect();
    let w = sample_weights(g, c, cfg.r, rng)?;
    let model = build_model(&w)?;
    let mut minima = class_minima_scan(g, &model, &scanned, cfg.zero_threshold, stop_level(cfg), ws)?.into_iter();
    Ok(verdicts(available.iter().map(|&a| if a { minima.next() } else { None }), cfg))
}

fn run<F: Fn() -> Result<SweepResult> + Send>(threads: usize, f: F) -> Result<SweepResult> {
    if threads == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidQuery(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Estimates every `(c, λ, class)` cell for one graph source.
pub fn estimate(source: &GraphSource, cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if let GraphSource::Random { p, expected_neighborhood } = source {
        let prob = expected_neighborhood / (*p as f64 - 1.0);
        if *p < 2 || !(prob > 0.0 && prob <= 1.0) {
            return Err(Error::InvalidDensity(prob));
        }
    }
    if let GraphSource::Tree { p } = source {
        if *p < 2 {
            return Err(Error::InvalidSize(format!("tree needs p >= 2, got {p}")));
        }
    }
    run(cfg.threads, || estimate_inner(source, cfg))
}

fn estimate_inner(source: &GraphSource, cfg: &SweepConfig) -> Result<SweepResult> {
    let nclass = cfg.classes.len();
    let nl = cfg.lambdas.len();
    let fixed_plans = match source {
        GraphSource::Fixed { dag, .. } => Some(plans_for(dag, cfg)?),
        _ => None,
    };
    // cells that can never be computed at this size
    let static_unavailable: Vec<Option<String>> = cfg
        .classes
        .iter()
        .map(|&class| {
            let p = source.p();
            if class == TripleMode::Full && p > cfg.full_class_max_p {
                Some(format!("full class capped at p <= {}", cfg.full_class_max_p))
            } else if class == TripleMode::Full {
                let count = triple_count(&Dag::empty(p).expect("p >= 1"), class);
                (count > cfg.budget).then(|| format!("{count} triples exceed budget {}", cfg.budget))
            } else {
                None
            }
        })
        .collect();

    let mut rows = Vec::new();
    for &c in &cfg.cs {
        let start = Instant::now();
        let tally = (0..cfg.samples)
            .into_par_iter()
            .map_init(Workspace::new, |ws, k| -> Result<SampleHits> {
                let mut rng = sample_rng(cfg.seed, k);
                match (source, &fixed_plans) {
                    (GraphSource::Fixed { dag, .. }, Some(plans)) => {
                        evaluate_planned(dag, plans, c, cfg, &mut rng, ws)
                    }
                    (GraphSource::Tree { p }, _) => {
                        let g = make_tree(*p, &mut rng)?;
                        evaluate_scanned(&g, c, cfg, &mut rng, ws)
                    }
                    (GraphSource::Random { p, expected_neighborhood }, _) => {
                        let g = make_random(*p, *expected_neighborhood, &mut rng)?;
                        evaluate_scanned(&g, c, cfg, &mut rng, ws)
                    }
                    _ => unreachable!("fixed source always has plans"),
                }
            })
            .try_fold(|| Tally::new(nclass, nl), |t, s| s.map(|s| t.add(s)))
            .try_reduce(|| Tally::new(nclass, nl), |a, b| Ok(a.merge(b)))?;
        let elapsed = start.elapsed().as_secs_f64();

        for (li, &lambda) in cfg.lambdas.iter().enumerate() {
            for (ci, &class) in cfg.classes.iter().enumerate() {
                let note = static_unavailable[ci].clone().or_else(|| tally.unavailable[ci].clone());
                let (samples, hits, proportion, ci) = if note.is_some() {
                    (0, 0, None, None)
                } else {
                    let h = tally.hits[ci][li];
                    let prop = h as f64 / cfg.samples as f64;
                    (cfg.samples, h, Some(prop), Some(ci95(prop, cfg.samples)))
                };
                rows.push(SweepRow {
                    family: source.family().to_string(),
                    p: source.p(),
                    density: source.density(),
                    lambda,
                    c,
                    class,
                    samples,
                    hits,
                    proportion,
                    ci95: ci,
                    seed: cfg.seed,
                    note,
                    wall_time_secs: elapsed,
                });
            }
        }
    }
    Ok(SweepResult { rows })
}

/// Fixed DAG: every sample shares the skeleton, only the weights vary.
pub fn estimate_fixed_dag(g: &Dag, family: &str, cfg: &SweepConfig) -> Result<SweepResult> {
    estimate(
        &GraphSource::Fixed {
            dag: g.clone(),
            family: family.to_string(),
        },
        cfg,
    )
}

/// Random ensemble: a fresh DAG and weight vector per sample, for each
/// expected neighbourhood size. Edgeless draws count as faithful.
pub fn estimate_random_ensemble(p: usize, en_list: &[f64], cfg: &SweepConfig) -> Result<SweepResult> {
    let mut out = SweepResult::default();
    for &en in en_list {
        let res = estimate(
            &GraphSource::Random {
                p,
                expected_neighborhood: en,
            },
            cfg,
        )?;
        out.rows.extend(res.rows);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_respect_the_restricted_range() {
        let g = Dag::complete(5).unwrap();
        let mut rng = sample_rng(1, 0);
        let mut abs_sum = 0.0;
        let mut n = 0;
        for _ in 0..2000 {
            let w = sample_weights(&g, 0.5, 1.0, &mut rng).unwrap();
            for &v in w.values() {
                assert!(v.abs() >= 0.5 && v.abs() <= 1.0);
                abs_sum += v.abs();
                n += 1;
            }
        }
        let mean = abs_sum / n as f64;
        // uniform on [0.5, 1]: mean 0.75, sd 0.144
        assert!((mean - 0.75).abs() < 3.0 * 0.1443 / (n as f64).sqrt(), "{mean}");
        assert!(sample_weights(&g, 1.0, 1.0, &mut rng).is_err());
    }

    #[test]
    fn full_cube_weights_are_centred() {
        let g = Dag::new(2, [(0, 1)]).unwrap();
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|k| sample_weights(&g, 0.0, 1.0, &mut sample_rng(9, k)).unwrap().values()[0])
            .sum::<f64>()
            / n as f64;
        // sd of uniform[-1,1] is 1/sqrt(3)
        assert!(mean.abs() < 3.0 / (3.0 * n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = sample_rng(3, 5).gen();
        let b: f64 = sample_rng(3, 5).gen();
        let c: f64 = sample_rng(3, 6).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn config_validation() {
        let g = Dag::line(3).unwrap();
        let mut cfg = SweepConfig {
            samples: 10,
            ..Default::default()
        };
        cfg.lambdas = vec![1.5];
        assert!(estimate_fixed_dag(&g, "line", &cfg).is_err());
        cfg.lambdas = vec![0.1];
        cfg.cs = vec![1.0];
        assert!(estimate_fixed_dag(&g, "line", &cfg).is_err());
        cfg.cs = vec![0.0];
        cfg.samples = 0;
        assert!(estimate_fixed_dag(&g, "line", &cfg).is_err());
    }

    #[test]
    fn single_sample_edge_case() {
        let g = Dag::line(4).unwrap();
        let cfg = SweepConfig {
            samples: 1,
            ..Default::default()
        };
        let res = estimate_fixed_dag(&g, "line", &cfg).unwrap();
        for row in &res.rows {
            let p = row.proportion.unwrap();
            assert!(p == 0.0 || p == 1.0);
            assert_eq!(row.ci95, Some(0.0));
        }
    }

    #[test]
    fn full_class_cap_marks_cells_unavailable() {
        let cfg = SweepConfig {
            samples: 5,
            full_class_max_p: 4,
            ..Default::default()
        };
        let res = estimate(&GraphSource::Tree { p: 6 }, &cfg).unwrap();
        let row = res.get(0.1, 0.0, TripleMode::Full).unwrap();
        assert!(row.proportion.is_none());
        assert!(row.note.is_some());
        assert!(res.get(0.1, 0.0, TripleMode::Adjacency).unwrap().proportion.is_some());
    }
}
