//! Closed-form lower bounds on the volume of the unfaithful sets for the
//! structured families, and the degree-sum factor of the general upper bound.

use crate::error::{Error, Result};
use crate::graph::{Dag, TripleMode};
use crate::structure::{degree_sum, Family};

fn min_p(family: Family) -> usize {
    match family {
        Family::Tree => 2,
        Family::Cycle => 3,
        Family::Bipartite => 4,
    }
}

/// Number of independent slabs used by the bound: `1 - (1 - x)^E`.
pub fn exponent(family: Family, p: usize, class: TripleMode) -> Result<u64> {
    if p < min_p(family) {
        return Err(Error::InvalidSize(format!(
            "{family} needs p >= {}, got {p}",
            min_p(family)
        )));
    }
    if p > 64 {
        return Err(Error::InvalidSize(format!("p = {p} exceeds 64")));
    }
    let p = p as u64;
    Ok(match (family, class) {
        (Family::Tree, _) => p - 1,
        (Family::Cycle, TripleMode::Full) => p + (p - 1) * (p - 2) / 2,
        (Family::Cycle, TripleMode::Restricted) => 3 * p - 2,
        (Family::Cycle, TripleMode::Adjacency) => 2 * p - 1,
        // (p-2) edge slabs plus (p-2)(2^{p-3} - 1) conditioning sets through the middle
        (Family::Bipartite, _) => (p - 2) * ((1u64 << (p - 3)) + 1),
    })
}

/// `1 - (1 - λ/r)^E`, evaluated without cancellation for small `λ/r`.
pub fn lower_bound(family: Family, p: usize, lambda: f64, class: TripleMode, r: f64) -> Result<f64> {
    let x = lambda / r;
    if !(r > 0.0 && x > 0.0 && x < 1.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    let e = exponent(family, p, class)? as f64;
    Ok(-(e * (-x).ln_1p()).exp_m1())
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundRow {
    pub family: Family,
    pub p: usize,
    pub lambda: f64,
    pub class: TripleMode,
    pub r: f64,
    pub exponent: u64,
    pub bound: f64,
}

/// Every combination of the given sizes, λ values and classes.
pub fn bound_table(
    family: Family,
    ps: &[usize],
    lambdas: &[f64],
    classes: &[TripleMode],
    r: f64,
) -> Result<Vec<BoundRow>> {
    let mut rows = Vec::new();
    for &p in ps {
        for &lambda in lambdas {
            for &class in classes {
                rows.push(BoundRow {
                    family,
                    p,
                    lambda,
                    class,
                    r,
                    exponent: exponent(family, p, class)?,
                    bound: lower_bound(family, p, lambda, class, r)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Degree factor of the upper bound. The remaining constants are not known,
/// so only this factor is computed and the rest is reported as a formula.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperBoundTerm {
    pub degree_sum: u64,
    pub num_edges: usize,
    pub formula: String,
}

pub fn upper_bound_degree_term(g: &Dag, mode: TripleMode) -> Result<UpperBoundTerm> {
    let d = degree_sum(g, mode)?;
    let e = g.num_edges();
    Ok(UpperBoundTerm {
        degree_sum: d,
        num_edges: e,
        formula: format!("C({e}) * c * kappa^k * lambda^k / 2^({e}/2) * {d}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::make_cycle;

    #[test]
    fn tree_value() {
        let b = lower_bound(Family::Tree, 10, 0.1, TripleMode::Full, 1.0).unwrap();
        assert!((b - (1.0 - 0.9f64.powi(9))).abs() < 1e-15);
        assert_eq!(format!("{b:.6}"), "0.612580");
        for class in TripleMode::ALL {
            assert_eq!(lower_bound(Family::Tree, 10, 0.1, class, 1.0).unwrap(), b);
        }
    }

    #[test]
    fn exponents() {
        assert_eq!(exponent(Family::Cycle, 5, TripleMode::Full).unwrap(), 11);
        assert_eq!(exponent(Family::Cycle, 5, TripleMode::Restricted).unwrap(), 13);
        assert_eq!(exponent(Family::Cycle, 5, TripleMode::Adjacency).unwrap(), 9);
        // displayed form equals the proof form 2(p-2) + (p-2)(2^{p-3} - 1)
        for p in 4..=20u64 {
            let proof = 2 * (p - 2) + (p - 2) * ((1u64 << (p - 3)) - 1);
            assert_eq!(exponent(Family::Bipartite, p as usize, TripleMode::Full).unwrap(), proof);
        }
        assert!(exponent(Family::Bipartite, 3, TripleMode::Full).is_err());
        assert!(exponent(Family::Tree, 1, TripleMode::Full).is_err());
    }

    #[test]
    fn limits_and_monotonicity() {
        let small = lower_bound(Family::Cycle, 6, 1e-300, TripleMode::Full, 1.0).unwrap();
        assert!(small > 0.0 && small < 1e-297);
        let near_one = lower_bound(Family::Tree, 3, 1.0 - 1e-12, TripleMode::Full, 1.0).unwrap();
        assert!(near_one > 1.0 - 1e-15 && near_one <= 1.0);
        let mut prev = 0.0;
        for k in 1..100 {
            let b = lower_bound(Family::Bipartite, 4, k as f64 / 100.0, TripleMode::Full, 1.0).unwrap();
            assert!(b > prev && b <= 1.0);
            prev = b;
        }
        for fam in [Family::Tree, Family::Cycle, Family::Bipartite] {
            let a = lower_bound(fam, 5, 0.01, TripleMode::Full, 1.0).unwrap();
            let b = lower_bound(fam, 6, 0.01, TripleMode::Full, 1.0).unwrap();
            assert!(b > a);
        }
    }

    #[test]
    fn rescaled_cube() {
        let a = lower_bound(Family::Tree, 5, 0.2, TripleMode::Full, 2.0).unwrap();
        let b = lower_bound(Family::Tree, 5, 0.1, TripleMode::Full, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(lower_bound(Family::Tree, 5, 2.0, TripleMode::Full, 2.0).is_err());
        assert!(lower_bound(Family::Tree, 5, 0.0, TripleMode::Full, 1.0).is_err());
    }

    #[test]
    fn degree_term() {
        let t = upper_bound_degree_term(&make_cycle(3).unwrap(), TripleMode::Full).unwrap();
        assert_eq!(t.degree_sum, 10);
        assert!(t.formula.ends_with("* 10"));
        let e = upper_bound_degree_term(&Dag::empty(4).unwrap(), TripleMode::Full).unwrap();
        assert_eq!(e.degree_sum, 0);
    }
}
