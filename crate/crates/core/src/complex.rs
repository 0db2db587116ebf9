use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{HdxError, Result};
use crate::face::{Face, VertexId};
use crate::function::FaceFunction;

/// Hard cap on the total number of faces across all levels.
pub const FACE_CAP: usize = 2_000_000;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

/// One level `X(i)`: faces stored as a flat, lex-sorted array of vertex lists.
/// The lex position of a face is its rank, used everywhere as the face index.
#[derive(Debug)]
pub(crate) struct LevelData {
    pub arity: usize,
    /// `count * arity` vertex ids; face `r` occupies `r*arity..(r+1)*arity`.
    pub verts: Vec<VertexId>,
    /// Normalized level measure; sums to 1.
    pub pi: Vec<f64>,
    /// `count * arity` ranks into the level below; entry `r*arity + p` is the
    /// rank of face `r` with its `p`-th vertex removed. Empty at level 0.
    pub facets: Vec<u32>,
}

impl LevelData {
    pub fn count(&self) -> usize {
        self.pi.len()
    }

    pub fn face_verts(&self, rank: usize) -> &[VertexId] {
        &self.verts[rank * self.arity..(rank + 1) * self.arity]
    }

    pub fn facet_ranks(&self, rank: usize) -> &[u32] {
        &self.facets[rank * self.arity..(rank + 1) * self.arity]
    }

    fn rank_of(&self, verts: &[VertexId]) -> Option<usize> {
        if verts.len() != self.arity {
            return None;
        }
        if self.arity == 0 {
            return Some(0);
        }
        let n = self.count();
        let mut lo = 0usize;
        let mut hi = n;
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.face_verts(mid).cmp(verts) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }
}

/// A pure weighted simplicial complex, immutable once built.
///
/// Built from its top faces by downward closure; `π_d` is the normalized top
/// weight vector and `π_i(x) = (1/(i+1)) Σ_{y ⊃ x} π_{i+1}(y)` below, so every
/// level measure is a probability distribution.
#[derive(Debug)]
pub struct SimplicialComplex {
    id: u64,
    dim: usize,
    levels: Vec<LevelData>,
    raw_top_weights: Vec<f64>,
}

impl SimplicialComplex {
    /// Builds the downward closure of the given weighted top faces. All top
    /// faces must have the same number of vertices (purity) and positive
    /// finite weights; duplicates are rejected.
    pub fn from_weighted_top_faces(
        top: impl IntoIterator<Item = (Face, f64)>,
    ) -> Result<Arc<SimplicialComplex>> {
        let mut top: Vec<(Face, f64)> = top.into_iter().collect();
        if top.is_empty() {
            return Err(HdxError::BadComplex("no top faces".into()));
        }
        let dim = top[0].0.len();
        for (f, w) in &top {
            if f.len() != dim {
                return Err(HdxError::BadComplex(format!(
                    "top faces of mixed arity: {} and {}",
                    dim,
                    f.len()
                )));
            }
            if !w.is_finite() || *w <= 0.0 {
                return Err(HdxError::BadWeight(*w));
            }
        }
        top.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        if top.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(HdxError::BadComplex("duplicate top face".into()));
        }

        let total_weight: f64 = top.iter().map(|(_, w)| w).sum();
        let raw_top_weights: Vec<f64> = top.iter().map(|(_, w)| *w).collect();

        let mut levels: Vec<Option<LevelData>> = (0..=dim).map(|_| None).collect();
        let mut verts = Vec::with_capacity(top.len() * dim);
        for (f, _) in &top {
            verts.extend_from_slice(f.verts());
        }
        levels[dim] = Some(LevelData {
            arity: dim,
            verts,
            pi: raw_top_weights.iter().map(|w| w / total_weight).collect(),
            facets: Vec::new(),
        });

        let mut total_faces = top.len();
        for i in (1..=dim).rev() {
            let (below, facets) = close_downward(levels[i].as_ref().unwrap())?;
            total_faces += below.count();
            if total_faces > FACE_CAP {
                return Err(HdxError::TooManyFaces {
                    count: total_faces,
                    cap: FACE_CAP,
                });
            }
            levels[i].as_mut().unwrap().facets = facets;
            levels[i - 1] = Some(below);
        }

        Ok(Arc::new(SimplicialComplex {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            dim,
            levels: levels.into_iter().map(Option::unwrap).collect(),
            raw_top_weights,
        }))
    }

    /// Unique per built instance; functions and operators are bound to it.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// Number of vertices in a top face.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.levels[1].count()
    }

    pub fn num_faces(&self, level: usize) -> usize {
        self.levels[level].count()
    }

    pub fn total_faces(&self) -> usize {
        self.levels.iter().map(|l| l.count()).sum()
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.dim {
            return Err(HdxError::LevelOutOfRange {
                level,
                dim: self.dim,
            });
        }
        Ok(())
    }

    pub fn pi(&self, level: usize) -> &[f64] {
        &self.levels[level].pi
    }

    pub fn raw_top_weights(&self) -> &[f64] {
        &self.raw_top_weights
    }

    pub fn face_verts(&self, level: usize, rank: usize) -> &[VertexId] {
        self.levels[level].face_verts(rank)
    }

    pub fn face(&self, level: usize, rank: usize) -> Face {
        Face::from_sorted(self.face_verts(level, rank).to_vec())
    }

    /// Lex rank of a face at its own level, if present.
    pub fn rank_of(&self, face: &Face) -> Option<usize> {
        if face.len() > self.dim {
            return None;
        }
        self.levels[face.len()].rank_of(face.verts())
    }

    pub(crate) fn rank_of_verts(&self, level: usize, verts: &[VertexId]) -> Option<usize> {
        self.levels[level].rank_of(verts)
    }

    /// Ranks (at `level-1`) of the facets of face `rank` at `level`; entry `p`
    /// omits the `p`-th vertex.
    pub fn facet_ranks(&self, level: usize, rank: usize) -> &[u32] {
        self.levels[level].facet_ranks(rank)
    }

    pub fn faces(&self, level: usize) -> impl Iterator<Item = (usize, &[VertexId])> {
        let l = &self.levels[level];
        (0..l.count()).map(move |r| (r, l.face_verts(r)))
    }

    pub fn vertex_ids(&self) -> &[VertexId] {
        &self.levels[1].verts
    }

    /// The link `X_τ`: faces disjoint from `τ` whose union with `τ` is a face,
    /// as a complex of dimension `d − |τ|` with the renormalized top measure.
    pub fn link(self: &Arc<Self>, tau: &Face) -> Result<Link> {
        let j = tau.len();
        if j > self.dim.saturating_sub(1) {
            return Err(HdxError::LevelOutOfRange {
                level: j,
                dim: self.dim,
            });
        }
        if self.rank_of(tau).is_none() {
            return Err(HdxError::FaceNotFound {
                face: tau.to_string(),
                level: j,
            });
        }
        let top = &self.levels[self.dim];
        let mut link_top = Vec::new();
        for r in 0..top.count() {
            let verts = top.face_verts(r);
            if tau.is_subset_of(verts) {
                let rest: Vec<VertexId> = verts
                    .iter()
                    .copied()
                    .filter(|v| !tau.contains(*v))
                    .collect();
                link_top.push((Face::from_sorted(rest), self.raw_top_weights[r]));
            }
        }
        let complex = SimplicialComplex::from_weighted_top_faces(link_top)?;
        Ok(Link {
            complex,
            parent: Arc::clone(self),
            tau: tau.clone(),
        })
    }
}

/// Downward closure of one level: the deduplicated facet set, its measure via
/// the averaging recurrence, and the facet-rank table for the upper level.
fn close_downward(upper: &LevelData) -> Result<(LevelData, Vec<u32>)> {
    let a = upper.arity;
    let count = upper.count();
    debug_assert!(a >= 1);

    // Candidate facets, one per (face, dropped position), then lex dedup.
    let fa = a - 1;
    let mut cand: Vec<VertexId> = Vec::with_capacity(count * a * fa);
    for r in 0..count {
        let verts = upper.face_verts(r);
        for p in 0..a {
            for (q, v) in verts.iter().enumerate() {
                if q != p {
                    cand.push(*v);
                }
            }
        }
    }
    let ncand = count * a;
    let mut order: Vec<u32> = (0..ncand as u32).collect();
    let slice_of = |i: u32| -> &[VertexId] { &cand[i as usize * fa..(i as usize + 1) * fa] };
    order.sort_unstable_by(|&x, &y| slice_of(x).cmp(slice_of(y)));

    let mut verts: Vec<VertexId> = Vec::new();
    // Rank assigned to each candidate, indexed by candidate id.
    let mut cand_rank = vec![0u32; ncand];
    let mut rank: u32 = 0;
    for (pos, &ci) in order.iter().enumerate() {
        if pos == 0 || slice_of(order[pos - 1]) != slice_of(ci) {
            if pos != 0 {
                rank += 1;
            }
            verts.extend_from_slice(slice_of(ci));
        }
        cand_rank[ci as usize] = rank;
    }
    let below_count = rank as usize + 1;

    // facets[r*a + p] for the upper level; recurrence scatter for π below.
    let mut facets = vec![0u32; ncand];
    let mut pi = vec![0.0f64; below_count];
    let inv = 1.0 / a as f64;
    for r in 0..count {
        let w = upper.pi[r] * inv;
        for p in 0..a {
            let br = cand_rank[r * a + p];
            facets[r * a + p] = br;
            pi[br as usize] += w;
        }
    }

    Ok((
        LevelData {
            arity: fa,
            verts,
            pi,
            facets: Vec::new(),
        },
        facets,
    ))
}

/// A link `X_τ` packaged with its parent, so functions can be moved between
/// the two. The link is a full complex in its own right.
pub struct Link {
    pub complex: Arc<SimplicialComplex>,
    parent: Arc<SimplicialComplex>,
    tau: Face,
}

impl Link {
    pub fn tau(&self) -> &Face {
        &self.tau
    }

    pub fn parent(&self) -> &Arc<SimplicialComplex> {
        &self.parent
    }

    /// Restriction `f|_τ(σ) = f(τ ∪ σ)`, a level `k − |τ|` function on the
    /// link. Requires `|τ| ≤ k`.
    pub fn restrict(&self, f: &FaceFunction) -> Result<FaceFunction> {
        if f.complex().id() != self.parent.id() {
            return Err(HdxError::ComplexMismatch);
        }
        let k = f.level();
        let j = self.tau.len();
        if j > k {
            return Err(HdxError::LevelOutOfRange {
                level: j,
                dim: k,
            });
        }
        let out_level = k - j;
        let mut values = Vec::with_capacity(self.complex.num_faces(out_level));
        for (r, _) in self.complex.faces(out_level) {
            let sigma = self.complex.face(out_level, r);
            let parent_face = self.tau.disjoint_union(&sigma)?;
            let pr = self
                .parent
                .rank_of(&parent_face)
                .expect("link face must extend to a parent face");
            values.push(f.values()[pr]);
        }
        FaceFunction::new(Arc::clone(&self.complex), out_level, values)
    }

    /// Localization `f^τ(σ) = f(σ)` onto the link at the same level `k`,
    /// re-weighted by the link measure. Requires `k + |τ| ≤ d` of the parent.
    pub fn localize(&self, f: &FaceFunction) -> Result<FaceFunction> {
        if f.complex().id() != self.parent.id() {
            return Err(HdxError::ComplexMismatch);
        }
        let k = f.level();
        if k + self.tau.len() > self.parent.dim() {
            return Err(HdxError::LevelOutOfRange {
                level: k + self.tau.len(),
                dim: self.parent.dim(),
            });
        }
        let mut values = Vec::with_capacity(self.complex.num_faces(k));
        for (r, verts) in self.complex.faces(k) {
            let pr = self
                .parent
                .rank_of_verts(k, verts)
                .expect("link face is a parent face by downward closure");
            let _ = r;
            values.push(f.values()[pr]);
        }
        FaceFunction::new(Arc::clone(&self.complex), k, values)
    }

    /// Parent-complex face `τ ∪ σ` for a link face `σ`.
    pub fn face_in_parent(&self, level: usize, rank: usize) -> Face {
        let sigma = self.complex.face(level, rank);
        self.tau
            .disjoint_union(&sigma)
            .expect("link faces are disjoint from τ")
    }
}
