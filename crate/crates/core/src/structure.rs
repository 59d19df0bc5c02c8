//! Structural queries on the partial covariance polynomials: total-degree
//! census and the factored forms that hold on trees, cycles and `K_{2,p-2}`.

use crate::error::{Error, Result};
use crate::graph::{enumerate_triples, make_bipartite, make_cycle, Dag, TripleMode};
use crate::poly::{Monomial, SparsePoly};
use crate::symbolic::{conditional_poly, path_monomial, symbolic_k};
use crate::vset::VertexSet;
use num_traits::{One, Signed};
use serde::Serialize;
use std::fmt;

/// Default candidate budget for symbolic triple enumeration.
pub const SYMBOLIC_TRIPLE_BUDGET: u128 = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Tree,
    Cycle,
    Bipartite,
}

impl Family {
    /// Recognizes the structured families produced by the generators.
    pub fn of(g: &Dag) -> Option<Family> {
        let p = g.p();
        if g.is_rooted_tree() {
            Some(Family::Tree)
        } else if p >= 3 && *g == make_cycle(p).ok()? {
            Some(Family::Cycle)
        } else if p >= 4 && *g == make_bipartite(p).ok()? {
            Some(Family::Bipartite)
        } else {
            None
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Tree => "tree",
            Family::Cycle => "cycle",
            Family::Bipartite => "bipartite",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PolyStructure {
    /// `±m (1 + q)` with `m` a monomial and `q` a sum of even monomials with
    /// nonnegative coefficients.
    MonomialTimesOnePlusSos { monomial: Monomial },
    /// `f x - g y` with neither `f` nor `g` involving the two edge variables `x`, `y`.
    AffineInTwoEdges { x: usize, y: usize },
    Other,
}

/// Total degree sum of `P_{ij|S}` over the triples of `mode`.
pub fn degree_sum(g: &Dag, mode: TripleMode) -> Result<u64> {
    let k = symbolic_k(g);
    let mut total = 0u64;
    for t in enumerate_triples(g, mode, SYMBOLIC_TRIPLE_BUDGET)? {
        let p = conditional_poly(&k, g, t.s.with(t.i).with(t.j), t.i, t.j)?;
        total += p.degree().unwrap_or(0) as u64;
    }
    Ok(total)
}

/// `P = ±m (1 + q)` certificate: the monomial content `m` is factored out and
/// the quotient must be `±(1 + q)` with every term of `q` having even
/// exponents and the same sign as the constant.
pub fn monomial_sos_factor(p: &SparsePoly) -> Option<Monomial> {
    let m = p.monomial_content()?;
    let q = p.div_monomial(&m)?;
    let c = q.constant_term();
    if !c.abs().is_one() {
        return None;
    }
    let ok = q
        .terms()
        .all(|(mon, coef)| mon.is_one() || (mon.all_even() && coef.signum() == c.signum()));
    ok.then_some(m)
}

/// `P` is a combination `f x - g y` of the two variables.
pub fn is_affine_in(p: &SparsePoly, x: usize, y: usize) -> bool {
    !p.is_zero()
        && p.terms().all(|(m, _)| {
            let e = m.exponents();
            (e[x] == 1 && e[y] == 0) || (e[x] == 0 && e[y] == 1)
        })
}

/// The two edges singled out by the cycle/bipartite factorization, when the
/// triple falls in that case.
fn designated_edges(g: &Dag, family: Family, i: usize, j: usize, s: VertexSet) -> Option<(usize, usize)> {
    let p = g.p();
    let last = p - 1;
    match family {
        Family::Tree => None,
        Family::Cycle if s == VertexSet::singleton(last) => {
            Some((g.edge_index(i, i + 1)?, g.edge_index(j, j + 1)?))
        }
        Family::Bipartite if i == 0 && s.contains(last) && j != last => {
            Some((g.edge_index(0, j)?, g.edge_index(j, last)?))
        }
        _ => None,
    }
}

/// Unique skeleton path between two vertices of a tree.
pub fn tree_path(g: &Dag, i: usize, j: usize) -> Vec<usize> {
    let up = |mut v: usize| {
        let mut chain = vec![v];
        while let Some(pa) = g.parents(v).iter().next() {
            chain.push(pa);
            v = pa;
        }
        chain
    };
    let ci = up(i);
    let cj = up(j);
    let top = *ci.iter().find(|v| cj.contains(v)).expect("tree is connected");
    let mut path: Vec<usize> = ci.iter().copied().take_while(|&v| v != top).collect();
    path.push(top);
    let down: Vec<usize> = cj.iter().copied().take_while(|&v| v != top).collect();
    path.extend(down.into_iter().rev());
    path
}

/// Classifies `P_{ij|S}` on a tree, cycle or bipartite DAG.
pub fn sos_structure_check(g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<PolyStructure> {
    let family = Family::of(g)
        .ok_or_else(|| Error::InvalidFamily("graph is not a tree, cycle or K_{2,p-2}".into()))?;
    if i == j {
        return Err(Error::InvalidQuery("i = j".into()));
    }
    let (i, j) = (i.min(j), i.max(j));
    let p = conditional_poly(&symbolic_k(g), g, s.with(i).with(j), i, j)?;

    if let Some((x, y)) = designated_edges(g, family, i, j, s) {
        if is_affine_in(&p, x, y) {
            return Ok(PolyStructure::AffineInTwoEdges { x, y });
        }
    }
    if let Some(m) = monomial_sos_factor(&p) {
        let matches_path = match family {
            Family::Tree => path_monomial(g, &tree_path(g, i, j)).as_ref() == Some(&m),
            _ => true,
        };
        if matches_path {
            return Ok(PolyStructure::MonomialTimesOnePlusSos { monomial: m });
        }
    }
    Ok(PolyStructure::Other)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_tree, Triple};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn three_node_degree_census() {
        assert_eq!(degree_sum(&Dag::complete(3).unwrap(), TripleMode::Full).unwrap(), 10);
        assert_eq!(degree_sum(&Dag::empty(4).unwrap(), TripleMode::Full).unwrap(), 0);
    }

    #[test]
    fn line_degree_sum_matches_path_expansion() {
        // independent route: P from the cycle/path expansion of det and cofactors
        use crate::ponstein::{ponstein_cofactor, ponstein_det};
        let g = Dag::line(4).unwrap();
        let k = symbolic_k(&g);
        let mut expected = 0;
        for t in enumerate_triples(&g, TripleMode::Full, 1 << 20).unwrap() {
            let c = g.vertices().difference(t.s.with(t.i).with(t.j));
            let mut p = &ponstein_det(&g, c).unwrap() * k.get(t.i, t.j);
            for u in c.iter() {
                for v in c.iter() {
                    let term = &(k.get(t.i, u) * &ponstein_cofactor(&g, c, u, v).unwrap()) * k.get(v, t.j);
                    p = &p - &term;
                }
            }
            expected += p.degree().unwrap_or(0) as u64;
        }
        assert_eq!(degree_sum(&g, TripleMode::Full).unwrap(), expected);
        assert!(expected > 0);
    }

    #[test]
    fn family_detection() {
        assert_eq!(Family::of(&Dag::line(4).unwrap()), Some(Family::Tree));
        assert_eq!(Family::of(&make_cycle(5).unwrap()), Some(Family::Cycle));
        assert_eq!(Family::of(&make_bipartite(5).unwrap()), Some(Family::Bipartite));
        assert_eq!(Family::of(&Dag::complete(4).unwrap()), None);
        assert!(matches!(
            sos_structure_check(&Dag::complete(4).unwrap(), 0, 1, VertexSet::EMPTY),
            Err(Error::InvalidFamily(_))
        ));
    }

    #[test]
    fn tree_paths() {
        let g = Dag::new(5, [(0, 1), (0, 2), (1, 3), (2, 4)]).unwrap();
        assert_eq!(tree_path(&g, 3, 4), vec![3, 1, 0, 2, 4]);
        assert_eq!(tree_path(&g, 0, 3), vec![0, 1, 3]);
    }

    #[test]
    fn trees_factor_as_path_times_one_plus_sos() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for p in 2..=6 {
            for _ in 0..4 {
                let g = make_tree(p, &mut rng).unwrap();
                for t in enumerate_triples(&g, TripleMode::Full, 1 << 20).unwrap() {
                    let c = sos_structure_check(&g, t.i, t.j, t.s).unwrap();
                    assert!(
                        matches!(c, PolyStructure::MonomialTimesOnePlusSos { .. }),
                        "{g:?} {t}: {c:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn cycle_designated_triples_are_affine() {
        for p in 4..=6 {
            let g = make_cycle(p).unwrap();
            let s = VertexSet::singleton(p - 1);
            for i in 0..p - 1 {
                for j in i + 1..p - 1 {
                    let t = Triple::classify(&g, i, j, s).unwrap();
                    if t.dsep {
                        continue;
                    }
                    let c = sos_structure_check(&g, i, j, s).unwrap();
                    assert!(matches!(c, PolyStructure::AffineInTwoEdges { .. }), "p={p} ({i},{j}): {c:?}");
                }
            }
        }
    }

    #[test]
    fn bipartite_designated_triples_are_affine() {
        for p in 4..=6 {
            let g = make_bipartite(p).unwrap();
            for t in enumerate_triples(&g, TripleMode::Full, 1 << 20).unwrap() {
                if t.i == 0 && t.s.contains(p - 1) {
                    let c = sos_structure_check(&g, t.i, t.j, t.s).unwrap();
                    assert!(matches!(c, PolyStructure::AffineInTwoEdges { .. }), "p={p} {t}: {c:?}");
                }
            }
        }
    }
}
