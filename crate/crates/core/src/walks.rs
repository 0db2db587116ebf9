use std::sync::Arc;

use itertools::Itertools;
use num_integer::binomial;

use crate::complex::SimplicialComplex;
use crate::error::{HdxError, Result};
use crate::function::FaceFunction;
use crate::linmap::{Csr, LinearMap};

/// Row stochasticity / self-adjointness tolerance for assembled walks.
pub const WALK_TOL: f64 = 1e-9;

/// One averaging step of a pure walk word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Up,
    Down,
}

/// One pure walk: a coefficient and a word of U/D letters. `word[0]` acts
/// first on the function.
#[derive(Clone, Debug)]
pub struct WalkTerm {
    pub coeff: f64,
    pub word: Vec<Step>,
}

/// A linear combination of pure walks, all starting and ending at `level`.
#[derive(Clone, Debug)]
pub struct WalkSpec {
    pub level: usize,
    pub terms: Vec<WalkTerm>,
}

impl WalkSpec {
    pub fn identity(level: usize) -> WalkSpec {
        WalkSpec {
            level,
            terms: vec![WalkTerm {
                coeff: 1.0,
                word: Vec::new(),
            }],
        }
    }

    /// Canonical walk N_k^i: lift i levels, then lower i levels.
    pub fn canonical(k: usize, i: usize) -> WalkSpec {
        let mut word = vec![Step::Up; i];
        word.extend(std::iter::repeat(Step::Down).take(i));
        WalkSpec {
            level: k,
            terms: vec![WalkTerm { coeff: 1.0, word }],
        }
    }

    /// Lower walk on X(k): one step down, one step up.
    pub fn lower(k: usize) -> WalkSpec {
        WalkSpec {
            level: k,
            terms: vec![WalkTerm {
                coeff: 1.0,
                word: vec![Step::Down, Step::Up],
            }],
        }
    }

    /// Noise operator T_ρ at level k: resample a binomially-sized random
    /// subset of positions, realized as sum_i C(k,i)(1-ρ)^i ρ^{k-i} U^k_{k-i} D^k_{k-i}.
    pub fn noise(k: usize, rho: f64) -> Result<WalkSpec> {
        if !(0.0..=1.0).contains(&rho) || !rho.is_finite() {
            return Err(HdxError::InvalidParameter(format!(
                "noise parameter {rho} outside [0,1]"
            )));
        }
        let terms = (0..=k)
            .map(|i| {
                let coeff = binomial(k as u64, i as u64) as f64
                    * (1.0 - rho).powi(i as i32)
                    * rho.powi((k - i) as i32);
                let mut word = vec![Step::Down; i];
                word.extend(std::iter::repeat(Step::Up).take(i));
                WalkTerm { coeff, word }
            })
            .filter(|t| t.coeff != 0.0)
            .collect();
        Ok(WalkSpec { level: k, terms })
    }

    /// Total coefficient weight w(M).
    pub fn weight(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    /// Height h(M): longest half-word, i.e. the deepest excursion length.
    pub fn height(&self) -> usize {
        self.terms
            .iter()
            .map(|t| t.word.len() / 2)
            .max()
            .unwrap_or(0)
    }

    /// Checks every word stays inside [0, dim] and returns to `level`.
    pub fn validate(&self, x: &SimplicialComplex) -> Result<()> {
        x.check_level(self.level)?;
        for term in &self.terms {
            if !term.coeff.is_finite() {
                return Err(HdxError::InvalidWalk(format!(
                    "non-finite coefficient {}",
                    term.coeff
                )));
            }
            let mut cur = self.level as isize;
            for step in &term.word {
                cur += match step {
                    Step::Up => 1,
                    Step::Down => -1,
                };
                if cur < 0 || cur > x.dim() as isize {
                    return Err(HdxError::InvalidWalk(format!(
                        "word leaves levels 0..={} of the complex",
                        x.dim()
                    )));
                }
            }
            if cur != self.level as isize {
                return Err(HdxError::InvalidWalk(format!(
                    "word ends at level {cur}, expected {}",
                    self.level
                )));
            }
        }
        Ok(())
    }
}

/// U_k: lift one level by averaging over facets.
pub fn up(f: &FaceFunction) -> Result<FaceFunction> {
    let x = f.complex();
    let k = f.level() + 1;
    x.check_level(k)?;
    let vals = f.values();
    let inv = 1.0 / k as f64;
    let out = (0..x.num_faces(k))
        .map(|r| {
            x.facet_ranks(k, r)
                .iter()
                .map(|&s| vals[s as usize])
                .sum::<f64>()
                * inv
        })
        .collect();
    FaceFunction::new(Arc::clone(x), k, out)
}

/// D_k: lower one level by the π-weighted coface average.
pub fn down(f: &FaceFunction) -> Result<FaceFunction> {
    let x = f.complex();
    let k = f.level();
    if k == 0 {
        return Err(HdxError::LevelOutOfRange {
            level: 0,
            dim: x.dim(),
        });
    }
    let vals = f.values();
    let pi_k = x.pi(k);
    let pi_low = x.pi(k - 1);
    let mut out = vec![0.0; x.num_faces(k - 1)];
    let inv = 1.0 / k as f64;
    for r in 0..x.num_faces(k) {
        let w = pi_k[r] * vals[r] * inv;
        for &s in x.facet_ranks(k, r) {
            out[s as usize] += w;
        }
    }
    for (v, p) in out.iter_mut().zip(pi_low) {
        *v /= *p;
    }
    FaceFunction::new(Arc::clone(x), k - 1, out)
}

/// Matrix of U_target: X(target-1) -> X(target).
pub fn up_step_map(x: &Arc<SimplicialComplex>, target: usize) -> Result<LinearMap> {
    if target == 0 {
        return Err(HdxError::LevelOutOfRange {
            level: 0,
            dim: x.dim(),
        });
    }
    x.check_level(target)?;
    let inv = 1.0 / target as f64;
    let mut trips = Vec::with_capacity(x.num_faces(target) * target);
    for r in 0..x.num_faces(target) {
        for &s in x.facet_ranks(target, r) {
            trips.push((r as u32, s, inv));
        }
    }
    let csr = Csr::from_triplets(x.num_faces(target), x.num_faces(target - 1), trips);
    LinearMap::from_csr(Arc::clone(x), target - 1, target, csr)
}

/// Matrix of D_source: X(source) -> X(source-1).
pub fn down_step_map(x: &Arc<SimplicialComplex>, source: usize) -> Result<LinearMap> {
    if source == 0 {
        return Err(HdxError::LevelOutOfRange {
            level: 0,
            dim: x.dim(),
        });
    }
    x.check_level(source)?;
    let pi_s = x.pi(source);
    let pi_low = x.pi(source - 1);
    let inv = 1.0 / source as f64;
    let mut trips = Vec::with_capacity(x.num_faces(source) * source);
    for r in 0..x.num_faces(source) {
        for &s in x.facet_ranks(source, r) {
            trips.push((s, r as u32, pi_s[r] * inv / pi_low[s as usize]));
        }
    }
    let csr = Csr::from_triplets(x.num_faces(source - 1), x.num_faces(source), trips);
    LinearMap::from_csr(Arc::clone(x), source, source - 1, csr)
}

/// U^k_i: lift from level i to level k; identity when i = k.
pub fn compose_up(x: &Arc<SimplicialComplex>, k: usize, i: usize) -> Result<LinearMap> {
    if i > k {
        return Err(HdxError::LevelMismatch {
            expected: k,
            got: i,
        });
    }
    x.check_level(k)?;
    let mut m = LinearMap::identity(Arc::clone(x), i)?;
    for t in i + 1..=k {
        m = m.then(&up_step_map(x, t)?)?;
    }
    Ok(m)
}

/// D^k_i: lower from level k to level i; identity when i = k.
pub fn compose_down(x: &Arc<SimplicialComplex>, k: usize, i: usize) -> Result<LinearMap> {
    if i > k {
        return Err(HdxError::LevelMismatch {
            expected: k,
            got: i,
        });
    }
    x.check_level(k)?;
    let mut m = LinearMap::identity(Arc::clone(x), k)?;
    for s in (i + 1..=k).rev() {
        m = m.then(&down_step_map(x, s)?)?;
    }
    Ok(m)
}

/// Applies a walk spec to a function without materializing the matrix.
pub fn walk_apply(spec: &WalkSpec, f: &FaceFunction) -> Result<FaceFunction> {
    spec.validate(f.complex())?;
    if f.level() != spec.level {
        return Err(HdxError::LevelMismatch {
            expected: spec.level,
            got: f.level(),
        });
    }
    let mut acc = FaceFunction::constant(Arc::clone(f.complex()), spec.level, 0.0)?;
    for term in &spec.terms {
        let mut g = f.clone();
        for step in &term.word {
            g = match step {
                Step::Up => up(&g)?,
                Step::Down => down(&g)?,
            };
        }
        acc.axpy(term.coeff, &g)?;
    }
    Ok(acc)
}

/// Materializes a walk spec as a matrix, enforcing row stochasticity and
/// π-self-adjointness within 1e-9.
pub fn assemble_walk(x: &Arc<SimplicialComplex>, spec: &WalkSpec) -> Result<LinearMap> {
    spec.validate(x)?;
    let mut acc: Option<LinearMap> = None;
    for term in &spec.terms {
        let mut m = LinearMap::identity(Arc::clone(x), spec.level)?;
        let mut cur = spec.level;
        for step in &term.word {
            match step {
                Step::Up => {
                    m = m.then(&up_step_map(x, cur + 1)?)?;
                    cur += 1;
                }
                Step::Down => {
                    m = m.then(&down_step_map(x, cur)?)?;
                    cur -= 1;
                }
            }
        }
        acc = Some(match acc {
            None => m.scale(term.coeff),
            Some(a) => a.add_scaled(&m, term.coeff)?,
        });
    }
    let m = acc.ok_or_else(|| HdxError::InvalidWalk("empty walk spec".into()))?;
    for (r, s) in m.row_sums().iter().enumerate() {
        if (s - 1.0).abs() > WALK_TOL {
            return Err(HdxError::InvalidWalk(format!(
                "row {r} sums to {s}, not stochastic"
            )));
        }
    }
    let res = m.pi_self_adjoint_residual()?;
    if res > WALK_TOL {
        return Err(HdxError::InvalidWalk(format!(
            "π-self-adjointness residual {res:.3e} exceeds {WALK_TOL:.0e}"
        )));
    }
    Ok(m)
}

/// Rectangular canonical walk N_{i,j} = D^{i+j}_i U^{i+j}_j: C_j -> C_i.
pub fn rectangular_canonical(
    x: &Arc<SimplicialComplex>,
    i: usize,
    j: usize,
) -> Result<LinearMap> {
    x.check_level(i + j)?;
    compose_up(x, i + j, j)?.then(&compose_down(x, i + j, i)?)
}

/// Rectangular swap walk S_{i,j}: the canonical walk conditioned on landing
/// on a face disjoint from the start. Returns the map (rows X(i), columns
/// X(j)) and the second singular value of its π-normalized matrix.
pub fn swap_walk(x: &Arc<SimplicialComplex>, i: usize, j: usize) -> Result<(LinearMap, f64)> {
    x.check_level(i + j)?;
    let m = i + j;
    let pi_m = x.pi(m);
    let pi_i = x.pi(i);
    let split = binomial(m as u64, i as u64) as f64;
    let mut trips = Vec::new();
    for (r, verts) in x.faces(m) {
        let w = pi_m[r] / split;
        for sel in (0..m).combinations(i) {
            let v: Vec<_> = sel.iter().map(|&p| verts[p]).collect();
            let rest: Vec<_> = (0..m)
                .filter(|p| !sel.contains(p))
                .map(|p| verts[p])
                .collect();
            let rv = x.rank_of_verts(i, &v).expect("subset of a face is a face");
            let rw = x
                .rank_of_verts(j, &rest)
                .expect("subset of a face is a face");
            trips.push((rv as u32, rw as u32, w / pi_i[rv]));
        }
    }
    let csr = Csr::from_triplets(x.num_faces(i), x.num_faces(j), trips);
    let map = LinearMap::from_csr(Arc::clone(x), j, i, csr)?;
    let mut empty = Vec::new();
    for (r, s) in map.row_sums().iter().enumerate() {
        if *s == 0.0 {
            empty.push(x.face(i, r).to_string());
        } else if (s - 1.0).abs() > WALK_TOL {
            return Err(HdxError::InvalidWalk(format!(
                "swap walk row {r} sums to {s}"
            )));
        }
    }
    if !empty.is_empty() {
        return Err(HdxError::NoDisjointTarget(empty.join(", ")));
    }
    let sv = map.pi_singular_values()?;
    let sigma2 = sv.get(1).copied().unwrap_or(0.0);
    Ok((map, sigma2))
}

/// Total influence ⟨f, L_UD f⟩ with L_UD = k(I - U_{k-1} D_k).
pub fn influence(f: &FaceFunction) -> Result<f64> {
    let k = f.level();
    if k == 0 {
        return Err(HdxError::LevelOutOfRange {
            level: 0,
            dim: f.complex().dim(),
        });
    }
    let df = down(f)?;
    Ok(k as f64 * (f.norm_sq() - df.norm_sq()))
}

/// L_UD = k(I - U_{k-1} D_k) at level k.
pub fn laplacian(x: &Arc<SimplicialComplex>, k: usize) -> Result<LinearMap> {
    if k == 0 {
        return Err(HdxError::LevelOutOfRange {
            level: 0,
            dim: x.dim(),
        });
    }
    x.check_level(k)?;
    let ud = down_step_map(x, k)?.then(&up_step_map(x, k)?)?;
    let l = LinearMap::identity(Arc::clone(x), k)?.sub(&ud)?;
    Ok(l.scale(k as f64))
}

/// Noise stability ⟨f, T_ρ f⟩.
pub fn stability(f: &FaceFunction, rho: f64) -> Result<f64> {
    let spec = WalkSpec::noise(f.level(), rho)?;
    let tf = walk_apply(&spec, f)?;
    Ok(f.inner(&tf)?)
}

/// Weighted edge expansion of the support of a Boolean indicator under one
/// step of the walk: Φ(S) = 1 - ⟨1_S, M 1_S⟩ / E[1_S].
pub fn edge_expansion(s: &FaceFunction, spec: &WalkSpec) -> Result<f64> {
    s.require_boolean()?;
    let mass = s.mean();
    if mass == 0.0 {
        return Err(HdxError::InvalidParameter(
            "edge expansion of the empty set".into(),
        ));
    }
    let ms = walk_apply(spec, s)?;
    Ok(1.0 - s.inner(&ms)? / mass)
}
