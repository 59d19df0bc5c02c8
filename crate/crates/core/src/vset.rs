//! Vertex subsets as 64-bit masks. Graphs in this crate have at most 64 vertices.

use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct VertexSet(pub u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn singleton(v: usize) -> Self {
        VertexSet(1u64 << v)
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    pub fn from_slice(vs: &[usize]) -> Self {
        vs.iter().fold(Self::EMPTY, |acc, &v| acc.with(v))
    }

    #[inline]
    pub fn contains(self, v: usize) -> bool {
        self.0 >> v & 1 == 1
    }

    #[inline]
    pub fn with(self, v: usize) -> Self {
        VertexSet(self.0 | 1u64 << v)
    }

    #[inline]
    pub fn without(self, v: usize) -> Self {
        VertexSet(self.0 & !(1u64 << v))
    }

    #[inline]
    pub fn union(self, o: Self) -> Self {
        VertexSet(self.0 | o.0)
    }

    #[inline]
    pub fn intersection(self, o: Self) -> Self {
        VertexSet(self.0 & o.0)
    }

    #[inline]
    pub fn difference(self, o: Self) -> Self {
        VertexSet(self.0 & !o.0)
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> VertexIter {
        VertexIter(self.0)
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }
}

pub struct VertexIter(u64);

impl Iterator for VertexIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let v = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(v)
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(Self::EMPTY, |acc, v| acc.with(v))
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Subsets of `ground` of size at most `max_size`, ordered by size and then
/// lexicographically on the sorted element lists.
pub fn subsets_by_size(ground: VertexSet, max_size: usize) -> SubsetIter {
    let elems = ground.to_vec();
    let max_size = max_size.min(elems.len());
    SubsetIter {
        elems,
        max_size,
        idx: Some(Vec::new()),
    }
}

pub struct SubsetIter {
    elems: Vec<usize>,
    max_size: usize,
    idx: Option<Vec<usize>>,
}

impl Iterator for SubsetIter {
    type Item = VertexSet;

    fn next(&mut self) -> Option<VertexSet> {
        let idx = self.idx.as_mut()?;
        let out = idx.iter().map(|&k| self.elems[k]).collect();
        // advance to the next combination of the same size, or the first of the next size
        let n = self.elems.len();
        let k = idx.len();
        let mut pos = k;
        let mut advanced = false;
        while pos > 0 {
            pos -= 1;
            if idx[pos] < n - k + pos {
                idx[pos] += 1;
                for q in pos + 1..k {
                    idx[q] = idx[q - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            if k < self.max_size {
                *idx = (0..k + 1).collect();
            } else {
                self.idx = None;
            }
        }
        Some(out)
    }
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for t in 0..k {
        acc = acc * (n - t) as u128 / (t + 1) as u128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_order_is_size_then_lex() {
        let got: Vec<Vec<usize>> = subsets_by_size(VertexSet::from_slice(&[1, 3, 4]), 3)
            .map(|s| s.to_vec())
            .collect();
        assert_eq!(
            got,
            vec![
                vec![],
                vec![1],
                vec![3],
                vec![4],
                vec![1, 3],
                vec![1, 4],
                vec![3, 4],
                vec![1, 3, 4]
            ]
        );
    }

    #[test]
    fn subset_count_respects_cap() {
        let n = subsets_by_size(VertexSet::full(6), 2).count();
        assert_eq!(n as u128, 1 + 6 + binomial(6, 2));
        assert_eq!(subsets_by_size(VertexSet::EMPTY, 3).count(), 1);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(45, 2), 990);
        assert_eq!(binomial(5, 7), 0);
        assert_eq!(binomial(10, 0), 1);
    }
}
