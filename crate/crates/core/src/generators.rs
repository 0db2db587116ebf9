use std::sync::Arc;

use itertools::Itertools;
use rand::prelude::*;
use rand::seq::index::sample;

use crate::complex::SimplicialComplex;
use crate::error::{HdxError, Result};
use crate::face::{Face, VertexId};
use crate::function::FaceFunction;

/// Complete complex: all `d`-subsets of `{0..n-1}` as top faces, uniform
/// weights. Every level measure is uniform.
pub fn complete_complex(n: usize, d: usize) -> Result<Arc<SimplicialComplex>> {
    if d == 0 || d > n {
        return Err(HdxError::InvalidParameter(format!(
            "complete complex needs 1 <= d <= n, got n={n} d={d}"
        )));
    }
    let top = (0..n as u32)
        .combinations(d)
        .map(|ids| (Face::from_sorted(ids.into_iter().map(VertexId).collect()), 1.0));
    SimplicialComplex::from_weighted_top_faces(top)
}

/// Vertex id for coordinate `i` (1-based) carrying bit `b`: `2(i-1) + b`.
pub fn hypercube_vertex(coord: usize, bit: u8) -> VertexId {
    VertexId((2 * (coord - 1) + bit as usize) as u32)
}

/// The hypercube complex on `{0,1}^n`: vertices are (coordinate, bit) pairs,
/// top faces are the 2^n full assignments, uniformly weighted. Level `k`
/// consists of partial assignments of `k` coordinates.
pub fn hypercube_complex(n: usize) -> Result<Arc<SimplicialComplex>> {
    if n == 0 || n > 20 {
        return Err(HdxError::InvalidParameter(format!(
            "hypercube complex needs 1 <= n <= 20, got {n}"
        )));
    }
    let mut top = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let verts: Vec<VertexId> = (1..=n)
            .map(|i| hypercube_vertex(i, ((mask >> (i - 1)) & 1) as u8))
            .collect();
        top.push((Face::from_sorted(verts), 1.0));
    }
    SimplicialComplex::from_weighted_top_faces(top)
}

/// The point of `X(n)` corresponding to the assignment `x ∈ {0,1}^n`
/// (bit `i-1` of `mask` is coordinate `i`).
pub fn hypercube_point(n: usize, mask: u32) -> Face {
    Face::from_sorted(
        (1..=n)
            .map(|i| hypercube_vertex(i, ((mask >> (i - 1)) & 1) as u8))
            .collect(),
    )
}

/// Uniformly random pure complex: `top_count` distinct `d`-subsets of
/// `{0..n-1}`, weights i.i.d. uniform in (0.5, 1.5). Vertices not covered by
/// any sampled face simply do not appear.
pub fn random_complex(
    n: usize,
    d: usize,
    top_count: usize,
    rng: &mut impl Rng,
) -> Result<Arc<SimplicialComplex>> {
    if d == 0 || d > n || top_count == 0 {
        return Err(HdxError::InvalidParameter(format!(
            "random complex needs 1 <= d <= n and top_count >= 1, got n={n} d={d} top={top_count}"
        )));
    }
    let mut seen = std::collections::HashSet::new();
    let mut top = Vec::new();
    let mut attempts = 0usize;
    while top.len() < top_count {
        attempts += 1;
        if attempts > 1000 * top_count {
            return Err(HdxError::Infeasible(format!(
                "could not sample {top_count} distinct {d}-subsets of [{n}]"
            )));
        }
        let mut ids: Vec<u32> = sample(rng, n, d).into_iter().map(|v| v as u32).collect();
        ids.sort_unstable();
        if seen.insert(ids.clone()) {
            let w = rng.random_range(0.5..1.5);
            top.push((Face::from_ids(&ids)?, w));
        }
    }
    SimplicialComplex::from_weighted_top_faces(top)
}

/// Dictator of coordinate `bit` (1-based) on the hypercube complex: the
/// indicator of top faces whose `bit`-th coordinate is 1.
pub fn dictator(x: &Arc<SimplicialComplex>, n: usize, bit: usize) -> Result<FaceFunction> {
    if bit == 0 || bit > n {
        return Err(HdxError::InvalidParameter(format!(
            "dictator coordinate {bit} out of 1..={n}"
        )));
    }
    let one = hypercube_vertex(bit, 1);
    FaceFunction::from_fn(Arc::clone(x), n, |t| {
        if t.contains(one) {
            1.0
        } else {
            0.0
        }
    })
}

/// Indicator of the k-faces containing `tau` (the level-k shadow of a link).
pub fn link_indicator(
    x: &Arc<SimplicialComplex>,
    tau: &Face,
    k: usize,
) -> Result<FaceFunction> {
    x.check_level(k)?;
    if x.rank_of(tau).is_none() {
        return Err(HdxError::FaceNotFound {
            face: tau.to_string(),
            level: tau.len(),
        });
    }
    FaceFunction::from_fn(Arc::clone(x), k, |t| {
        if tau.is_subset_of(t.verts()) {
            1.0
        } else {
            0.0
        }
    })
}

/// Random boolean function: each face independently 1 with probability α.
pub fn random_sparse_boolean(
    x: &Arc<SimplicialComplex>,
    level: usize,
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<FaceFunction> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(HdxError::InvalidParameter(format!(
            "density {alpha} outside [0,1]"
        )));
    }
    x.check_level(level)?;
    let values = (0..x.num_faces(level))
        .map(|_| if rng.random::<f64>() < alpha { 1.0 } else { 0.0 })
        .collect();
    FaceFunction::new(Arc::clone(x), level, values)
}

/// Random real-valued function with i.i.d. standard normal values.
pub fn random_function(
    x: &Arc<SimplicialComplex>,
    level: usize,
    rng: &mut impl Rng,
) -> Result<FaceFunction> {
    x.check_level(level)?;
    let values = (0..x.num_faces(level))
        .map(|_| {
            // Box-Muller; avoids pulling a distributions crate for one use.
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let v: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            (-2.0 * u.ln()).sqrt() * v.cos()
        })
        .collect();
    FaceFunction::new(Arc::clone(x), level, values)
}

/// Disjoint tribes for the anti-tribes family: `m` consecutive blocks of
/// size `t` in `{0..n-1}`.
pub fn tribe_blocks(n: usize, m: usize, t: usize) -> Result<Vec<Vec<u32>>> {
    if m * t > n {
        return Err(HdxError::Infeasible(format!(
            "{m} tribes of size {t} do not fit in {n} vertices"
        )));
    }
    Ok((0..m)
        .map(|i| ((i * t) as u32..((i + 1) * t) as u32).collect())
        .collect())
}

/// Anti-tribes indicator on level-k faces: 1 exactly when the face meets
/// every tribe.
pub fn anti_tribes_function(
    x: &Arc<SimplicialComplex>,
    k: usize,
    tribes: &[Vec<u32>],
) -> Result<FaceFunction> {
    x.check_level(k)?;
    let tribe_faces: Vec<Face> = tribes
        .iter()
        .map(|t| Face::from_ids(t))
        .collect::<Result<_>>()?;
    FaceFunction::from_fn(Arc::clone(x), k, |s| {
        if tribe_faces.iter().all(|t| t.intersects(s.verts())) {
            1.0
        } else {
            0.0
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn complete_counts() {
        let x = complete_complex(5, 2).unwrap();
        assert_eq!(x.num_faces(2), 10);
        let x = complete_complex(10, 3).unwrap();
        assert_eq!(x.num_faces(3), 120);
        assert_eq!(x.num_faces(2), 45);
        assert!(complete_complex(3, 4).is_err());
    }

    #[test]
    fn hypercube_levels() {
        let x = hypercube_complex(3).unwrap();
        assert_eq!(x.dim(), 3);
        assert_eq!(x.num_faces(3), 8);
        // C(3,k) * 2^k partial assignments
        assert_eq!(x.num_faces(1), 6);
        assert_eq!(x.num_faces(2), 12);
        // no face holds both bits of one coordinate
        for (_, verts) in x.faces(2) {
            assert_ne!(verts[0].0 / 2, verts[1].0 / 2);
        }
        let p = hypercube_point(3, 0b101);
        assert!(x.rank_of(&p).is_some());
    }

    #[test]
    fn dictator_density() {
        let x = hypercube_complex(3).unwrap();
        let f = dictator(&x, 3, 2).unwrap();
        assert!((f.mean() - 0.5).abs() < 1e-15);
        assert!(f.is_boolean());
    }

    #[test]
    fn anti_tribes_small_pin() {
        // n=6, k=3, tribes {0,1},{2,3}: 12 of the 20 triples meet both.
        let x = complete_complex(6, 3).unwrap();
        let tribes = tribe_blocks(6, 2, 2).unwrap();
        let f = anti_tribes_function(&x, 3, &tribes).unwrap();
        assert!((f.mean() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn random_complex_is_deterministic_per_seed() {
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        let a = random_complex(8, 3, 12, &mut r1).unwrap();
        let b = random_complex(8, 3, 12, &mut r2).unwrap();
        assert_eq!(a.num_faces(3), b.num_faces(3));
        for ((_, u), (_, v)) in a.faces(3).zip(b.faces(3)) {
            assert_eq!(u, v);
        }
        assert_eq!(a.raw_top_weights(), b.raw_top_weights());
    }
}
