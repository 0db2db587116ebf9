use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HdxError, Result};

#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// A face: a set of vertices, stored strictly increasing. The empty face is
/// the unique element of `X(0)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Face(Vec<VertexId>);

impl Face {
    pub fn empty() -> Self {
        Face(Vec::new())
    }

    /// Builds a face from an arbitrary vertex list; sorts, rejects repeats.
    pub fn new(mut verts: Vec<VertexId>) -> Result<Self> {
        verts.sort_unstable();
        if verts.windows(2).any(|w| w[0] == w[1]) {
            return Err(HdxError::RepeatedVertex(format!("{:?}", verts)));
        }
        Ok(Face(verts))
    }

    pub fn from_ids(ids: &[u32]) -> Result<Self> {
        Face::new(ids.iter().map(|&v| VertexId(v)).collect())
    }

    /// Internal fast path: caller guarantees strictly increasing order.
    pub(crate) fn from_sorted(verts: Vec<VertexId>) -> Self {
        debug_assert!(verts.windows(2).all(|w| w[0] < w[1]));
        Face(verts)
    }

    pub fn verts(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &[VertexId]) -> bool {
        // Both sides sorted; advance through `other` once.
        let mut it = other.iter();
        'outer: for v in &self.0 {
            for w in it.by_ref() {
                match w.cmp(v) {
                    std::cmp::Ordering::Less => continue,
                    std::cmp::Ordering::Equal => continue 'outer,
                    std::cmp::Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    /// Merge of two disjoint faces; errors if they share a vertex.
    pub fn disjoint_union(&self, other: &Face) -> Result<Face> {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x == y {
                        return Err(HdxError::RepeatedVertex(format!("{}", x)));
                    } else if x < y {
                        out.push(x);
                        a.next();
                    } else {
                        out.push(y);
                        b.next();
                    }
                }
                (Some(_), None) => {
                    out.extend(a.by_ref().copied());
                    break;
                }
                (None, _) => {
                    out.extend(b.by_ref().copied());
                    break;
                }
            }
        }
        Ok(Face(out))
    }

    /// Set difference `self ∖ other`.
    pub fn minus(&self, other: &Face) -> Face {
        Face(
            self.0
                .iter()
                .copied()
                .filter(|v| !other.contains(*v))
                .collect(),
        )
    }

    pub fn intersects(&self, other: &[VertexId]) -> bool {
        // Sorted merge scan.
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.len() {
            match self.0[i].cmp(&other[j]) {
                std::cmp::Ordering::Equal => return true,
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
        false
    }

    /// All subsets of the given size, in lex order.
    pub fn subsets(&self, size: usize) -> Vec<Face> {
        let mut out = Vec::new();
        if size > self.len() {
            return out;
        }
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(Face(idx.iter().map(|&i| self.0[i]).collect()));
            // next combination
            let mut p = size;
            loop {
                if p == 0 {
                    return out;
                }
                p -= 1;
                if idx[p] + (size - p) < self.len() {
                    idx[p] += 1;
                    for q in p + 1..size {
                        idx[q] = idx[q - 1] + 1;
                    }
                    break;
                }
            }
        }
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", v)?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<VertexId> for Face {
    /// Collect-and-sort convenience; panics on repeated vertices.
    fn from_iter<T: IntoIterator<Item = VertexId>>(iter: T) -> Self {
        Face::new(iter.into_iter().collect()).expect("repeated vertex in face literal")
    }
}
