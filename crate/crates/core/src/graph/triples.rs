//! Triple index sets `(i, j, S)` for the three faithfulness classes.
//!
//! * `Full`: every pair and every `S` with `i`, `j` not d-separated given `S`.
//! * `Restricted`: `|S| <= deg(G)` and either `(i, j)` is an edge or `i`, `j`
//!   are the endpoints of an unshielded triple and not d-separated given `S`.
//! * `Adjacency`: `|S| <= deg(G)` and `(i, j)` is an edge.
//!
//! Enumeration order is lexicographic in `(i, j)` and then by subset size and
//! lexicographic within a size.

use super::{d_separated, Dag};
use crate::error::{Error, Result};
use crate::vset::{binomial, subsets_by_size, SubsetIter, VertexSet};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TripleMode {
    #[serde(rename = "M")]
    Full,
    #[serde(rename = "N1")]
    Restricted,
    #[serde(rename = "N2")]
    Adjacency,
}

impl TripleMode {
    pub const ALL: [TripleMode; 3] = [TripleMode::Full, TripleMode::Restricted, TripleMode::Adjacency];

    /// Short class label used in reports: `M`, `N1` or `N2`.
    pub fn label(self) -> &'static str {
        match self {
            TripleMode::Full => "M",
            TripleMode::Restricted => "N1",
            TripleMode::Adjacency => "N2",
        }
    }
}

impl fmt::Display for TripleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TripleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "M" | "full" => Ok(TripleMode::Full),
            "N1" | "restricted" => Ok(TripleMode::Restricted),
            "N2" | "adjacency" => Ok(TripleMode::Adjacency),
            other => Err(Error::InvalidQuery(format!("unknown class `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct ClassFlags {
    pub m: bool,
    pub n1: bool,
    pub n2: bool,
}

impl ClassFlags {
    pub fn contains(self, mode: TripleMode) -> bool {
        match mode {
            TripleMode::Full => self.m,
            TripleMode::Restricted => self.n1,
            TripleMode::Adjacency => self.n2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triple {
    pub i: usize,
    pub j: usize,
    pub s: VertexSet,
    pub dsep: bool,
    pub class: ClassFlags,
}

impl Triple {
    /// Classifies `(i, j, s)` against `g`. `i` and `j` are canonicalized so that `i < j`.
    pub fn classify(g: &Dag, i: usize, j: usize, s: VertexSet) -> Result<Triple> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let dsep = d_separated(g, i, j, s)?;
        let small = s.len() <= g.max_degree();
        let adj = g.adjacent(i, j);
        let unshielded = !adj && !g.neighbors(i).intersection(g.neighbors(j)).is_empty();
        Ok(Triple {
            i,
            j,
            s,
            dsep,
            class: ClassFlags {
                m: !dsep,
                n1: small && (adj || (unshielded && !dsep)),
                n2: small && adj,
            },
        })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.s.iter().map(|v| (v + 1).to_string()).collect();
        write!(f, "({}, {} | {{{}}})", self.i + 1, self.j + 1, s.join(","))
    }
}

fn candidate_pairs(g: &Dag, mode: TripleMode) -> Vec<(usize, usize)> {
    let p = g.p();
    match mode {
        TripleMode::Full => (0..p).flat_map(|i| (i + 1..p).map(move |j| (i, j))).collect(),
        TripleMode::Restricted => {
            let mut pairs = g.edges().to_vec();
            pairs.extend(g.unshielded_pairs());
            pairs.sort_unstable();
            pairs
        }
        TripleMode::Adjacency => g.edges().to_vec(),
    }
}

fn subset_cap(g: &Dag, mode: TripleMode) -> usize {
    match mode {
        TripleMode::Full => g.p(),
        _ => g.max_degree(),
    }
}

/// Number of candidate `(i, j, S)` the enumeration will examine. This is the
/// work measure compared against the budget.
pub fn triple_count(g: &Dag, mode: TripleMode) -> u128 {
    let p = g.p() as u64;
    if p < 2 {
        return 0;
    }
    let cap = subset_cap(g, mode) as u64;
    let per_pair: u128 = (0..=cap.min(p - 2)).map(|k| binomial(p - 2, k)).sum();
    candidate_pairs(g, mode).len() as u128 * per_pair
}

/// Streams the triples of `mode` in canonical order. Fails if the candidate
/// count exceeds `budget`.
pub fn enumerate_triples(g: &Dag, mode: TripleMode, budget: u128) -> Result<TripleIter<'_>> {
    let count = triple_count(g, mode);
    if count > budget {
        return Err(Error::EnumerationTooLarge { count, budget });
    }
    Ok(TripleIter {
        g,
        mode,
        pairs: candidate_pairs(g, mode),
        cap: subset_cap(g, mode),
        next_pair: 0,
        current: None,
    })
}

pub struct TripleIter<'a> {
    g: &'a Dag,
    mode: TripleMode,
    pairs: Vec<(usize, usize)>,
    cap: usize,
    next_pair: usize,
    current: Option<((usize, usize), SubsetIter)>,
}

impl Iterator for TripleIter<'_> {
    type Item = Triple;

    fn next(&mut self) -> Option<Triple> {
        loop {
            if let Some(((i, j), subsets)) = self.current.as_mut() {
                for s in subsets.by_ref() {
                    let t = Triple::classify(self.g, *i, *j, s).expect("valid by construction");
                    if t.class.contains(self.mode) {
                        return Some(t);
                    }
                }
            }
            let &(i, j) = self.pairs.get(self.next_pair)?;
            self.next_pair += 1;
            let rest = self.g.vertices().without(i).without(j);
            self.current = Some(((i, j), subsets_by_size(rest, self.cap)));
        }
    }
}
