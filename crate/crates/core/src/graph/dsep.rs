//! d-separation, two ways: a Bayes-ball style reachability search and the
//! moralized ancestral graph criterion. The two are kept independent so each
//! can check the other.

use super::Dag;
use crate::error::{Error, Result};
use crate::vset::VertexSet;

fn check_query(g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<()> {
    let p = g.p();
    if i >= p || j >= p || s.difference(g.vertices()) != VertexSet::EMPTY {
        return Err(Error::InvalidQuery(format!("vertex out of range for p = {p}")));
    }
    if i == j {
        return Err(Error::InvalidQuery(format!("i = j = {}", i + 1)));
    }
    if s.contains(i) || s.contains(j) {
        return Err(Error::InvalidQuery(format!(
            "conditioning set contains an endpoint of ({}, {})",
            i + 1,
            j + 1
        )));
    }
    Ok(())
}

/// Vertices outside `s` that are d-connected to `x` given `s`.
pub fn d_connected_from(g: &Dag, x: usize, s: VertexSet) -> VertexSet {
    let anc_s = g.ancestors_of(s);
    // visited flags per direction: `up` = arrived from a child
    let mut seen_up = VertexSet::EMPTY;
    let mut seen_down = VertexSet::EMPTY;
    let mut reach = VertexSet::EMPTY;
    let mut stack: Vec<(usize, bool)> = vec![(x, true)];
    while let Some((y, up)) = stack.pop() {
        if up {
            if seen_up.contains(y) {
                continue;
            }
            seen_up = seen_up.with(y);
        } else {
            if seen_down.contains(y) {
                continue;
            }
            seen_down = seen_down.with(y);
        }
        let observed = s.contains(y);
        if !observed {
            reach = reach.with(y);
        }
        if up {
            if !observed {
                stack.extend(g.parents(y).iter().map(|v| (v, true)));
                stack.extend(g.children(y).iter().map(|v| (v, false)));
            }
        } else {
            if !observed {
                stack.extend(g.children(y).iter().map(|v| (v, false)));
            }
            if anc_s.contains(y) {
                stack.extend(g.parents(y).iter().map(|v| (v, true)));
            }
        }
    }
    reach.without(x)
}

/// `true` iff every path between `i` and `j` is blocked by `s`.
pub fn d_separated(g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<bool> {
    check_query(g, i, j, s)?;
    Ok(!d_connected_from(g, i, s).contains(j))
}

/// d-separation via the moral graph of the ancestral set of `{i, j} ∪ s`.
pub fn d_separated_moral(g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<bool> {
    check_query(g, i, j, s)?;
    let anc = g.ancestors_of(s.with(i).with(j));
    let p = g.p();
    let mut moral = vec![VertexSet::EMPTY; p];
    for v in anc.iter() {
        let pa = g.parents(v);
        for u in pa.iter() {
            moral[u] = moral[u].with(v).union(pa.without(u));
            moral[v] = moral[v].with(u);
        }
    }
    let allowed = anc.difference(s);
    let mut seen = VertexSet::singleton(i);
    let mut frontier = seen;
    while !frontier.is_empty() {
        let mut next = VertexSet::EMPTY;
        for v in frontier.iter() {
            next = next.union(moral[v]);
        }
        next = next.intersection(allowed).difference(seen);
        if next.contains(j) {
            return Ok(false);
        }
        seen = seen.union(next);
        frontier = next;
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{make_bipartite, make_cycle, make_random, make_tree};
    use crate::vset::subsets_by_size;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn set(v: &[usize]) -> VertexSet {
        VertexSet::from_slice(v)
    }

    #[test]
    fn chain_and_collider() {
        let chain = Dag::line(3).unwrap();
        assert!(d_separated(&chain, 0, 2, set(&[1])).unwrap());
        assert!(!d_separated(&chain, 0, 2, set(&[])).unwrap());

        let collider = Dag::new(3, [(0, 2), (1, 2)]).unwrap();
        assert!(d_separated(&collider, 0, 1, set(&[])).unwrap());
        assert!(!d_separated(&collider, 0, 1, set(&[2])).unwrap());
    }

    #[test]
    fn descendant_of_collider_opens_path() {
        let g = Dag::new(4, [(0, 2), (1, 2), (2, 3)]).unwrap();
        assert!(!d_separated(&g, 0, 1, set(&[3])).unwrap());
        assert!(!d_separated_moral(&g, 0, 1, set(&[3])).unwrap());
    }

    #[test]
    fn complete_graph_has_no_separations() {
        let g = Dag::complete(3).unwrap();
        for (i, j, k) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            assert!(!d_separated(&g, i, j, set(&[])).unwrap());
            assert!(!d_separated(&g, i, j, set(&[k])).unwrap());
        }
    }

    #[test]
    fn invalid_queries() {
        let g = Dag::line(3).unwrap();
        assert!(d_separated(&g, 1, 1, set(&[])).is_err());
        assert!(d_separated(&g, 0, 2, set(&[0])).is_err());
        assert!(d_separated_moral(&g, 0, 3, set(&[])).is_err());
    }

    fn assert_agree(g: &Dag) {
        let p = g.p();
        for i in 0..p {
            for j in i + 1..p {
                let rest = g.vertices().without(i).without(j);
                for s in subsets_by_size(rest, p) {
                    let a = d_separated(g, i, j, s).unwrap();
                    let b = d_separated_moral(g, i, j, s).unwrap();
                    assert_eq!(a, b, "{g:?} ({i},{j}) | {s:?}");
                    assert_eq!(a, d_separated(g, j, i, s).unwrap());
                    if g.adjacent(i, j) {
                        assert!(!a);
                    }
                }
            }
        }
    }

    #[test]
    fn implementations_agree_on_families_and_random_dags() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for p in 2..=6 {
            assert_agree(&Dag::complete(p).unwrap());
            assert_agree(&Dag::line(p).unwrap());
            for _ in 0..5 {
                assert_agree(&make_tree(p, &mut rng).unwrap());
            }
            if p >= 3 {
                assert_agree(&make_cycle(p).unwrap());
            }
            if p >= 4 {
                assert_agree(&make_bipartite(p).unwrap());
            }
        }
        for k in 0..1000 {
            let p = 2 + k % 5;
            let en = 0.5 + (k % 7) as f64 * 0.5;
            let en = en.min((p - 1) as f64);
            assert_agree(&make_random(p, en, &mut rng).unwrap());
        }
    }
}
