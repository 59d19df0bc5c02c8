use sfaith::bounds::lower_bound;
use sfaith::format::sweep_csv;
use sfaith::graph::{make_cycle, Dag, TripleMode};
use sfaith::structure::Family;
use sfaith::volume::{estimate, estimate_fixed_dag, estimate_random_ensemble, sample_rng, sample_weights, GraphSource, SweepConfig};

fn config(samples: u64, seed: u64) -> SweepConfig {
    SweepConfig {
        samples,
        seed,
        cs: vec![0.0, 0.25],
        ..Default::default()
    }
}

#[test]
fn restricted_weights_avoid_the_gap() {
    let g = make_cycle(6).unwrap();
    for k in 0..2000 {
        let w = sample_weights(&g, 0.75, 1.0, &mut sample_rng(5, k)).unwrap();
        assert!(w.values().iter().all(|v| v.abs() >= 0.75 && v.abs() <= 1.0));
    }
    let w = sample_weights(&g, 0.5, 2.0, &mut sample_rng(5, 0)).unwrap();
    assert!(w.values().iter().all(|v| v.abs() >= 0.5 && v.abs() <= 2.0));
}

#[test]
fn monotone_in_lambda_and_class_on_shared_streams() {
    let res = estimate_random_ensemble(8, &[1.0, 3.0], &config(1500, 12)).unwrap();
    for row in &res.rows {
        let p = row.proportion.unwrap();
        assert!((0.0..=1.0).contains(&p));
        let ci = 1.96 * (p * (1.0 - p) / row.samples as f64).sqrt();
        assert_eq!(row.ci95, Some(ci));
    }
    for en_rows in res.rows.chunks(res.rows.len() / 2) {
        let find = |l: f64, c: f64, k: TripleMode| {
            en_rows
                .iter()
                .find(|r| r.lambda == l && r.c == c && r.class == k)
                .unwrap()
                .hits
        };
        for c in [0.0, 0.25] {
            for k in TripleMode::ALL {
                assert!(find(0.001, c, k) <= find(0.01, c, k));
                assert!(find(0.01, c, k) <= find(0.1, c, k));
            }
            for l in [0.1, 0.01, 0.001] {
                assert!(find(l, c, TripleMode::Adjacency) <= find(l, c, TripleMode::Restricted));
                assert!(find(l, c, TripleMode::Restricted) <= find(l, c, TripleMode::Full));
            }
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let src = GraphSource::Tree { p: 7 };
    let mut a = config(800, 77);
    a.threads = 1;
    let mut b = a.clone();
    b.threads = 3;
    let ra = estimate(&src, &a).unwrap();
    let rb = estimate(&src, &b).unwrap();
    assert_eq!(sweep_csv(&ra.rows, None), sweep_csv(&rb.rows, None));
    let mut c = a.clone();
    c.seed = 78;
    assert_ne!(sweep_csv(&estimate(&src, &c).unwrap().rows, None), sweep_csv(&ra.rows, None));
}

#[test]
fn single_edge_slab_volume() {
    let g = Dag::new(2, [(0, 1)]).unwrap();
    let cfg = SweepConfig {
        lambdas: vec![0.1],
        cs: vec![0.0],
        samples: 10_000,
        seed: 3,
        classes: vec![TripleMode::Full],
        ..Default::default()
    };
    let row = &estimate_fixed_dag(&g, "edge", &cfg).unwrap().rows[0];
    let exact = 0.1 / (1.0f64 - 0.01).sqrt();
    let sigma = (exact * (1.0 - exact) / 10_000.0).sqrt();
    assert!((row.proportion.unwrap() - exact).abs() < 4.0 * sigma);
}

#[test]
fn tree_proportion_exceeds_closed_form() {
    let cfg = SweepConfig {
        lambdas: vec![0.1],
        cs: vec![0.0],
        samples: 4000,
        seed: 9,
        ..Default::default()
    };
    let res = estimate(&GraphSource::Tree { p: 10 }, &cfg).unwrap();
    let bound = lower_bound(Family::Tree, 10, 0.1, TripleMode::Full, 1.0).unwrap();
    for row in &res.rows {
        let p = row.proportion.unwrap();
        assert!(p >= bound - 3.0 * row.ci95.unwrap(), "{:?}: {p} < {bound}", row.class);
    }
}

#[test]
fn edgeless_draws_are_faithful() {
    let cfg = SweepConfig {
        samples: 500,
        seed: 1,
        cs: vec![0.0],
        ..Default::default()
    };
    // expected neighbourhood 0.05 on 3 vertices: most draws are edgeless
    let res = estimate_random_ensemble(3, &[0.05], &cfg).unwrap();
    for row in &res.rows {
        assert!(row.proportion.unwrap() < 0.2);
    }
}

#[test]
fn invalid_configurations() {
    let g = Dag::line(3).unwrap();
    let bad_c = SweepConfig {
        cs: vec![1.0],
        samples: 1,
        ..Default::default()
    };
    assert!(estimate_fixed_dag(&g, "line", &bad_c).is_err());
    assert!(estimate_random_ensemble(5, &[10.0], &config(1, 1)).is_err());
    assert!(estimate(&GraphSource::Tree { p: 1 }, &config(1, 1)).is_err());
}
