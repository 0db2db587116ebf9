use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::SimplicialComplex;
use crate::decompose::HdBasis;
use crate::error::{HdxError, Result};
use crate::linmap::LinearMap;
use crate::walks::{assemble_walk, WalkSpec};

/// Spectrum of one link's underlying weighted graph.
#[derive(Clone, Debug, Serialize)]
pub struct LinkSpectrum {
    pub level: usize,
    pub face: String,
    /// max(|λ_2|, |λ_min|) of the graph walk; 1.0 for disconnected links
    pub lambda: f64,
    pub connected: bool,
    pub graph_size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Strip {
    /// which lifted kernel space the strip belongs to
    pub index: usize,
    pub center: f64,
    pub width: f64,
    pub count: usize,
    pub eigenvalues: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AmbiguousAssignment {
    pub eigenvalue: f64,
    pub mass: f64,
    pub strip: usize,
}

/// Eigenvalues of a walk grouped by the kernel-lift space their eigenvectors
/// project onto.
#[derive(Clone, Debug, Serialize)]
pub struct StripReport {
    pub walk_level: usize,
    pub strips: Vec<Strip>,
    pub ambiguous: Vec<AmbiguousAssignment>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SpectralProfile {
    /// max over links of the two-sided graph expansion; None if not measured
    pub gamma: Option<f64>,
    pub links: Vec<LinkSpectrum>,
    /// links whose underlying graph is disconnected
    pub disconnected: Vec<String>,
    pub strips: Option<StripReport>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, a: usize) -> usize {
        if self.0[a] != a {
            let root = self.find(self.0[a]);
            self.0[a] = root;
        }
        self.0[a]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Two-sided spectral expansion of the underlying graph of a complex:
/// max(|λ_2|, |λ_min|) of the one-step vertex walk. Also reports
/// connectivity and the vertex count.
fn graph_two_sided(x: &SimplicialComplex) -> (f64, bool, usize) {
    let n = x.num_faces(1);
    if n <= 1 {
        return (0.0, true, n);
    }
    let pi1 = x.pi(1);
    let pi2 = x.pi(2);
    let mut b: DMatrix<f64> = DMatrix::zeros(n, n);
    let mut uf = UnionFind::new(n);
    for (r, verts) in x.faces(2) {
        let (u, v) = (
            x.rank_of_verts(1, &verts[..1]).unwrap(),
            x.rank_of_verts(1, &verts[1..]).unwrap(),
        );
        let w = pi2[r] / (2.0 * (pi1[u] * pi1[v]).sqrt());
        b[(u, v)] += w;
        b[(v, u)] += w;
        uf.union(u, v);
    }
    let root = uf.find(0);
    let connected = (1..n).all(|v| uf.find(v) == root);
    let eig = b.symmetric_eigen();
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let lambda = ev[1..]
        .iter()
        .map(|v| v.abs())
        .fold(0.0f64, f64::max);
    (lambda, connected, n)
}

/// Local-spectral expansion: the worst two-sided graph expansion over the
/// links of all faces at levels 0..dim-2 (the empty face's link is the
/// complex itself). Disconnected links force γ = 1 and are reported.
pub fn measure_gamma(x: &Arc<SimplicialComplex>) -> Result<SpectralProfile> {
    if x.dim() < 2 {
        return Err(HdxError::InvalidParameter(
            "local-spectral expansion needs dimension at least 2".into(),
        ));
    }
    let mut jobs = Vec::new();
    for level in 0..=x.dim() - 2 {
        for (r, _) in x.faces(level) {
            jobs.push((level, r));
        }
    }
    let links: Vec<LinkSpectrum> = jobs
        .into_par_iter()
        .map(|(level, r)| {
            let tau = x.face(level, r);
            let link = x.link(&tau).expect("faces below dim-1 have links");
            let (lambda, connected, graph_size) = graph_two_sided(&link.complex);
            LinkSpectrum {
                level,
                face: tau.to_string(),
                lambda: if connected { lambda } else { 1.0 },
                connected,
                graph_size,
            }
        })
        .collect();
    let disconnected: Vec<String> = links
        .iter()
        .filter(|l| !l.connected)
        .map(|l| l.face.clone())
        .collect();
    let gamma = links.iter().map(|l| l.lambda).fold(0.0f64, f64::max);
    Ok(SpectralProfile {
        gamma: Some(gamma),
        links,
        disconnected,
        strips: None,
    })
}

/// Eigen-decomposition of an assembled walk with each eigenvector assigned
/// to the kernel-lift space carrying most of its mass. Strip centers are the
/// approximate eigenvalues of the walk; assignments with mass below 1/2 are
/// reported as ambiguous.
pub fn approximate_eigenvalues(
    x: &Arc<SimplicialComplex>,
    spec: &WalkSpec,
    basis: &HdBasis,
) -> Result<SpectralProfile> {
    if basis.level() != spec.level {
        return Err(HdxError::LevelMismatch {
            expected: spec.level,
            got: basis.level(),
        });
    }
    let m = assemble_walk(x, spec)?;
    strip_profile_of_map(x, &m, basis)
}

/// Strip assignment for an already-materialized self-adjoint walk matrix.
pub fn strip_profile_of_map(
    x: &Arc<SimplicialComplex>,
    m: &LinearMap,
    basis: &HdBasis,
) -> Result<SpectralProfile> {
    let k = m.source_level();
    if m.target_level() != k || basis.level() != k {
        return Err(HdxError::LevelMismatch {
            expected: k,
            got: m.target_level(),
        });
    }
    let pi = x.pi(k);
    let mut dense = m.to_dense()?;
    let n = dense.nrows();
    for r in 0..n {
        for c in 0..n {
            dense[(r, c)] *= (pi[r] / pi[c]).sqrt();
        }
    }
    // enforce exact symmetry before the eigensolver
    let sym = (&dense + dense.transpose()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); k + 1];
    let mut ambiguous = Vec::new();
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        let w: DVector<f64> = eig.eigenvectors.column(idx).into();
        let masses = basis.projection_masses(&w);
        let (best, &best_mass) = masses
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("k+1 strips");
        if best_mass < 0.5 {
            ambiguous.push(AmbiguousAssignment {
                eigenvalue: lambda,
                mass: best_mass,
                strip: best,
            });
        }
        buckets[best].push(lambda);
    }
    let mut strips = Vec::new();
    for (index, vals) in buckets.iter_mut().enumerate() {
        if vals.is_empty() {
            continue;
        }
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let center = vals.iter().sum::<f64>() / vals.len() as f64;
        let width = vals[0] - vals[vals.len() - 1];
        strips.push(Strip {
            index,
            center,
            width,
            count: vals.len(),
            eigenvalues: vals.clone(),
        });
    }
    strips.sort_by(|a, b| b.center.partial_cmp(&a.center).unwrap());
    Ok(SpectralProfile {
        gamma: None,
        links: Vec::new(),
        disconnected: Vec::new(),
        strips: Some(StripReport {
            walk_level: k,
            strips,
            ambiguous,
        }),
    })
}

/// Number of strip centers strictly above δ. Ties are resolved with a 1e-9
/// guard so that eigenvalue noise (e.g. a stochastic walk's top eigenvalue
/// computed as 1 + 2e-16) cannot push a center past the threshold.
pub fn st_rank(profile: &SpectralProfile, delta: f64) -> Result<usize> {
    let strips = profile
        .strips
        .as_ref()
        .ok_or_else(|| HdxError::InvalidParameter("profile carries no strips".into()))?;
    Ok(strips
        .strips
        .iter()
        .filter(|s| s.center > delta + 1e-9)
        .count())
}

/// Convenience: assemble the walk, decompose, and count strips above δ.
pub fn st_rank_of_walk(
    x: &Arc<SimplicialComplex>,
    spec: &WalkSpec,
    basis: &HdBasis,
    delta: f64,
) -> Result<usize> {
    st_rank(&approximate_eigenvalues(x, spec, basis)?, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete_complex, hypercube_complex};

    #[test]
    fn triangle_gamma_is_one_half() {
        let x = complete_complex(3, 2).unwrap();
        let p = measure_gamma(&x).unwrap();
        assert!((p.gamma.unwrap() - 0.5).abs() < 1e-12);
        assert!(p.disconnected.is_empty());
    }

    #[test]
    fn complete_complex_gamma_closed_forms() {
        // d=2: only the empty link, underlying graph K_n, so 1/(n-1)
        for n in [5usize, 8, 12] {
            let x = complete_complex(n, 2).unwrap();
            let g = measure_gamma(&x).unwrap().gamma.unwrap();
            assert!(
                (g - 1.0 / (n as f64 - 1.0)).abs() < 1e-9,
                "n={n} gamma={g}"
            );
        }
        // d=3: vertex links are K_{n-1}, which dominate at 1/(n-2)
        for n in [5usize, 8, 12] {
            let x = complete_complex(n, 3).unwrap();
            let g = measure_gamma(&x).unwrap().gamma.unwrap();
            assert!(
                (g - 1.0 / (n as f64 - 2.0)).abs() < 1e-9,
                "n={n} gamma={g}"
            );
        }
    }

    #[test]
    fn single_simplex_profile_computes() {
        let x = complete_complex(3, 3).unwrap();
        let p = measure_gamma(&x).unwrap();
        // vertex links are single edges: bipartite, so two-sided expansion 1
        assert!((p.gamma.unwrap() - 1.0).abs() < 1e-12);
        assert!(p.disconnected.is_empty());
    }

    #[test]
    fn hypercube_links_are_bipartite() {
        let x = hypercube_complex(3).unwrap();
        let p = measure_gamma(&x).unwrap();
        assert!((p.gamma.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn noise_walk_strip_centers_follow_powers_of_rho() {
        let x = complete_complex(10, 2).unwrap();
        let basis = HdBasis::new(&x, 2).unwrap();
        let spec = WalkSpec::noise(2, 0.5).unwrap();
        let p = approximate_eigenvalues(&x, &spec, &basis).unwrap();
        let strips = &p.strips.as_ref().unwrap().strips;
        assert_eq!(strips.len(), 3);
        let want = [1.0, 0.5, 0.25];
        for (s, w) in strips.iter().zip(want) {
            assert!(
                (s.center - w).abs() < 0.1,
                "center {} expected near {w}",
                s.center
            );
        }
        assert_eq!(st_rank(&p, 0.3).unwrap(), 2);
        assert_eq!(st_rank(&p, 1.0).unwrap(), 0);
        assert_eq!(st_rank(&p, -0.5).unwrap(), 3);
    }

    #[test]
    fn lower_walk_strip_centers_follow_one_minus_i_over_k() {
        let x = complete_complex(12, 2).unwrap();
        let basis = HdBasis::new(&x, 2).unwrap();
        let p = approximate_eigenvalues(&x, &WalkSpec::lower(2), &basis).unwrap();
        let strips = &p.strips.as_ref().unwrap().strips;
        assert_eq!(strips.len(), 3);
        let want = [1.0, 0.5, 0.0];
        for (s, w) in strips.iter().zip(want) {
            assert!(
                (s.center - w).abs() < 0.1,
                "center {} expected near {w}",
                s.center
            );
        }
    }
}
