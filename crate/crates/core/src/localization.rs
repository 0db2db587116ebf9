use std::sync::Arc;

use crate::complex::SimplicialComplex;
use crate::error::{HdxError, Result};
use crate::face::Face;
use crate::function::FaceFunction;
use crate::linmap::LinearMap;
use crate::walks::{compose_up, down_step_map, swap_walk};

/// Γ = S_{j,i} - U^j_0 D^i_0, the swap walk minus its stationary operator.
/// Maps C_i to C_j; Γf(τ) is the deviation of the τ-localized mean of f
/// from its global mean.
pub fn localization_gamma(
    x: &Arc<SimplicialComplex>,
    i: usize,
    j: usize,
) -> Result<LinearMap> {
    x.check_level(i + j)?;
    let (s, _) = swap_walk(x, j, i)?;
    let stationary = crate::walks::compose_down(x, i, 0)?.then(&compose_up(x, j, 0)?)?;
    s.sub(&stationary)
}

/// |E_{X_τ}[f^τ] - E[f] - Γf(τ)|: the identity defect, which should vanish
/// to numerical precision.
pub fn localization_residual(f: &FaceFunction, tau: &Face) -> Result<f64> {
    let x = f.complex();
    let i = f.level();
    let j = tau.len();
    let (_, local) = f.localize(tau)?;
    let direct = local.mean() - f.mean();
    let gamma = localization_gamma(x, i, j)?;
    let gf = gamma.apply(f)?;
    let rank = x.rank_of(tau).ok_or_else(|| HdxError::FaceNotFound {
        face: tau.to_string(),
        level: j,
    })?;
    Ok((direct - gf.values()[rank]).abs())
}

/// Commutation residual E_{i,j} = D_i U^i_j - (j/i) U^{i-1}_{j-1} D_j
/// - ((i-j)/i) U^{i-1}_j, with its π-weighted operator norm. The maps all
/// send C_j to C_{i-1}; the residual norm is small exactly when the complex
/// expands locally.
pub fn ddfh_residual(
    x: &Arc<SimplicialComplex>,
    i: usize,
    j: usize,
) -> Result<(LinearMap, f64)> {
    if j == 0 || j > i {
        return Err(HdxError::InvalidParameter(format!(
            "commutation residual needs 1 <= j <= i, got i={i} j={j}"
        )));
    }
    x.check_level(i)?;
    let du = compose_up(x, i, j)?.then(&down_step_map(x, i)?)?;
    let ud = down_step_map(x, j)?.then(&compose_up(x, i - 1, j - 1)?)?;
    let mut e = du.add_scaled(&ud, -(j as f64) / i as f64)?;
    if i > j {
        // third term is weighted (i-j)/i, which vanishes (and U^{i-1}_i is
        // undefined) when j = i
        let lift = compose_up(x, i - 1, j)?;
        e = e.add_scaled(&lift, -((i - j) as f64) / i as f64)?;
    }
    let norm = e.pi_operator_norm()?;
    Ok((e, norm))
}

/// Both sides of ⟨f,f⟩ = E_{τ~π_i}[⟨f|_τ, f|_τ⟩]: the second moment split
/// over restrictions to i-links. Exact identity.
pub fn garland_restrict(f: &FaceFunction, i: usize) -> Result<(f64, f64)> {
    let x = f.complex();
    if i > f.level() {
        return Err(HdxError::LevelMismatch {
            expected: f.level(),
            got: i,
        });
    }
    let pi = x.pi(i);
    let mut rhs = 0.0;
    for (r, _) in x.faces(i) {
        let tau = x.face(i, r);
        let (_, rf) = f.restrict(&tau)?;
        rhs += pi[r] * rf.norm_sq();
    }
    Ok((f.norm_sq(), rhs))
}

/// Both sides of ⟨f,f⟩ = E_{τ~π_i}[⟨f^τ, f^τ⟩]: the second moment split
/// over localizations to i-links. Exact identity, needs level(f) + i ≤ dim.
pub fn garland_localize(f: &FaceFunction, i: usize) -> Result<(f64, f64)> {
    let x = f.complex();
    if f.level() + i > x.dim() {
        return Err(HdxError::LevelOutOfRange {
            level: f.level() + i,
            dim: x.dim(),
        });
    }
    let pi = x.pi(i);
    let mut rhs = 0.0;
    for (r, _) in x.faces(i) {
        let tau = x.face(i, r);
        let (_, lf) = f.localize(&tau)?;
        rhs += pi[r] * lf.norm_sq();
    }
    Ok((f.norm_sq(), rhs))
}
