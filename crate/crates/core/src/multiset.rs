//! Multisets of 1-based cell indices (occupation-number keys).

use std::fmt;

/// A multiset of cells stored as a sorted list with repeats, e.g. `{1, 1, 3}`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Multiset(Vec<u32>);

impl Multiset {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn new(cells: impl IntoIterator<Item = u32>) -> Self {
        let mut v: Vec<u32> = cells.into_iter().collect();
        v.sort_unstable();
        Self(v)
    }

    pub fn singleton(cell: u32) -> Self {
        Self(vec![cell])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn cells(&self) -> &[u32] {
        &self.0
    }

    pub fn multiplicity(&self, cell: u32) -> usize {
        self.0.iter().filter(|c| **c == cell).count()
    }

    /// `(cell, multiplicity)` pairs in increasing cell order.
    pub fn occupations(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &c in &self.0 {
            match out.last_mut() {
                Some((last, m)) if *last == c => *m += 1,
                _ => out.push((c, 1)),
            }
        }
        out
    }

    pub fn max_cell(&self) -> Option<u32> {
        self.0.last().copied()
    }

    pub fn min_cell(&self) -> Option<u32> {
        self.0.first().copied()
    }

    /// True when no cell is repeated.
    pub fn is_strict(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1])
    }

    /// Multiset sum.
    pub fn union(&self, other: &Multiset) -> Multiset {
        let mut v = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] <= other.0[j] {
                v.push(self.0[i]);
                i += 1;
            } else {
                v.push(other.0[j]);
                j += 1;
            }
        }
        v.extend_from_slice(&self.0[i..]);
        v.extend_from_slice(&other.0[j..]);
        Multiset(v)
    }

    pub fn with(&self, cell: u32) -> Multiset {
        let pos = self.0.partition_point(|c| *c <= cell);
        let mut v = self.0.clone();
        v.insert(pos, cell);
        Multiset(v)
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// All multisets of size `degree` over cells `1..=cells`, in lexicographic order.
pub fn all_multisets(cells: usize, degree: usize) -> Vec<Multiset> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(degree);
    fn rec(start: u32, cells: u32, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Multiset>) {
        if left == 0 {
            out.push(Multiset(cur.clone()));
            return;
        }
        for c in start..=cells {
            cur.push(c);
            rec(c, cells, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(1, cells as u32, degree, &mut cur, &mut out);
    out
}

/// All multisets of size `degree` using only cells `1..=max_cell` with no repeats.
pub fn strict_multisets(max_cell: usize, degree: usize) -> Vec<Multiset> {
    all_multisets(max_cell, degree)
        .into_iter()
        .filter(Multiset::is_strict)
        .collect()
}
