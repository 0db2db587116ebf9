use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Dyn};
use num_integer::binomial;
use serde::Serialize;

use crate::complex::SimplicialComplex;
use crate::error::{HdxError, Result};
use crate::face::Face;
use crate::function::FaceFunction;
use crate::walks::{compose_up, down, down_step_map, up};

/// Lifts below this 2-norm count as zero when computing the degree.
pub const DEGREE_TOL: f64 = 1e-10;

/// Relative singular-value cutoff for numerical nullspaces and rank.
pub const RANK_TOL: f64 = 1e-10;

/// Reconstruction tolerance: Σ f_i must reproduce f this closely.
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BasisKind {
    BottomUp,
    HdLevelSet,
}

/// A level decomposition of `f ∈ C_k`: level functions `g_i ∈ C_i` and their
/// lifts `f_i ∈ C_k` with `f = Σ f_i`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub kind: BasisKind,
    pub level: usize,
    pub g: Vec<FaceFunction>,
    pub lifts: Vec<FaceFunction>,
    /// ‖f − Σ f_i‖_2
    pub residual: f64,
}

impl Decomposition {
    pub fn reconstruct(&self) -> Result<FaceFunction> {
        let x = self.lifts[0].complex();
        let mut acc = FaceFunction::constant(Arc::clone(x), self.level, 0.0)?;
        for fi in &self.lifts {
            acc.axpy(1.0, fi)?;
        }
        Ok(acc)
    }
}

fn down_tower(f: &FaceFunction) -> Result<Vec<FaceFunction>> {
    let k = f.level();
    let mut tower = vec![f.clone()];
    for _ in 0..k {
        let next = down(tower.last().unwrap())?;
        tower.push(next);
    }
    tower.reverse(); // tower[i] = D^k_i f
    Ok(tower)
}

fn lift_to(f: &FaceFunction, target: usize) -> Result<FaceFunction> {
    let mut g = f.clone();
    while g.level() < target {
        g = up(&g)?;
    }
    Ok(g)
}

fn finish(
    kind: BasisKind,
    f: &FaceFunction,
    g: Vec<FaceFunction>,
    lifts: Vec<FaceFunction>,
) -> Result<Decomposition> {
    let k = f.level();
    let mut recon = FaceFunction::constant(Arc::clone(f.complex()), k, 0.0)?;
    for fi in &lifts {
        recon.axpy(1.0, fi)?;
    }
    let residual = recon.sub(f)?.l2_norm();
    Ok(Decomposition {
        kind,
        level: k,
        g,
        lifts,
        residual,
    })
}

/// Bottom-Up Decomposition by its defining recursion:
/// g_i = D^k_i f − Σ_{j<i} C(i,j) U^i_j g_j, with lifts f_i = C(k,i) U^k_i g_i.
pub fn bottom_up_recursive(f: &FaceFunction) -> Result<Decomposition> {
    let k = f.level();
    let downs = down_tower(f)?;
    let mut g: Vec<FaceFunction> = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut gi = downs[i].clone();
        for (j, gj) in g.iter().enumerate() {
            let c = binomial(i as u64, j as u64) as f64;
            gi.axpy(-c, &lift_to(gj, i)?)?;
        }
        g.push(gi);
    }
    let lifts = g
        .iter()
        .enumerate()
        .map(|(i, gi)| {
            let c = binomial(k as u64, i as u64) as f64;
            Ok(lift_to(gi, k)?.scaled(c))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(BasisKind::BottomUp, f, g, lifts)
}

/// Bottom-Up Decomposition in closed form:
/// g_i = Σ_{j≤i} (−1)^{i−j} C(i,j) U^i_j D^k_j f.
pub fn bottom_up_explicit(f: &FaceFunction) -> Result<Decomposition> {
    let k = f.level();
    let downs = down_tower(f)?;
    let mut g: Vec<FaceFunction> = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut gi = FaceFunction::constant(Arc::clone(f.complex()), i, 0.0)?;
        for j in 0..=i {
            let sign = if (i - j) % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * binomial(i as u64, j as u64) as f64;
            gi.axpy(c, &lift_to(&downs[j], i)?)?;
        }
        g.push(gi);
    }
    let lifts = g
        .iter()
        .enumerate()
        .map(|(i, gi)| {
            let c = binomial(k as u64, i as u64) as f64;
            Ok(lift_to(gi, k)?.scaled(c))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(BasisKind::BottomUp, f, g, lifts)
}

/// Degree of f: the largest i whose Bottom-Up lift is numerically nonzero.
pub fn degree(f: &FaceFunction) -> Result<usize> {
    let dec = bottom_up_explicit(f)?;
    Ok(dec
        .lifts
        .iter()
        .enumerate()
        .rev()
        .find(|(_, fi)| fi.l2_norm() > DEGREE_TOL)
        .map(|(i, _)| i)
        .unwrap_or(0))
}

/// Precomputed data for the kernel-based level decomposition at one level of
/// one complex: π-orthonormal bases of H^i = Ker(D_i), their lifts to C_k,
/// and a least-squares factorization of the stacked lift matrix. Building
/// this is the expensive step; reuse it across functions.
pub struct HdBasis {
    complex: Arc<SimplicialComplex>,
    level: usize,
    kernels: Vec<DMatrix<f64>>,
    lifted: Vec<DMatrix<f64>>,
    strip_q: Vec<DMatrix<f64>>,
    // kept alongside the factorization: the solver refines its solutions
    // against the unfactored matrix
    stacked: DMatrix<f64>,
    solver: nalgebra::linalg::SVD<f64, Dyn, Dyn>,
    solver_eps: f64,
    condition: f64,
    offsets: Vec<usize>,
}

fn sqrt_scale_rows(m: &mut DMatrix<f64>, pi: &[f64], invert: bool) {
    for r in 0..m.nrows() {
        let s = if invert {
            1.0 / pi[r].sqrt()
        } else {
            pi[r].sqrt()
        };
        for c in 0..m.ncols() {
            m[(r, c)] *= s;
        }
    }
}

/// π-orthonormal basis of Ker(D_i) as columns, via a full SVD of the
/// π-normalized down-step matrix padded to square (a thin SVD would hide
/// the nullspace directions).
fn kernel_basis(x: &Arc<SimplicialComplex>, i: usize) -> Result<DMatrix<f64>> {
    let n = x.num_faces(i);
    if i == 0 {
        return Ok(DMatrix::from_element(1, 1, 1.0));
    }
    let mut d = down_step_map(x, i)?.to_dense()?;
    sqrt_scale_rows(&mut d, x.pi(i - 1), false);
    let pi_i = x.pi(i);
    for c in 0..d.ncols() {
        let s = 1.0 / pi_i[c].sqrt();
        for r in 0..d.nrows() {
            d[(r, c)] *= s;
        }
    }
    let rows = d.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.rows_mut(0, d.nrows()).copy_from(&d);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = RANK_TOL * smax;
    let kernel_rows: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&j| svd.singular_values[j] <= tol)
        .collect();
    let mut basis = DMatrix::zeros(n, kernel_rows.len());
    for (col, &j) in kernel_rows.iter().enumerate() {
        for r in 0..n {
            basis[(r, col)] = v_t[(j, r)] / pi_i[r].sqrt();
        }
    }
    Ok(basis)
}

impl HdBasis {
    pub fn new(x: &Arc<SimplicialComplex>, k: usize) -> Result<Self> {
        x.check_level(k)?;
        let nk = x.num_faces(k);
        let mut kernels = Vec::with_capacity(k + 1);
        let mut lifted = Vec::with_capacity(k + 1);
        let mut strip_q = Vec::with_capacity(k + 1);
        let mut offsets = vec![0usize];
        let pi_k = x.pi(k);
        for i in 0..=k {
            let kern = kernel_basis(x, i)?;
            let uki = compose_up(x, k, i)?.to_dense()?;
            let lift = &uki * &kern;
            offsets.push(offsets.last().unwrap() + kern.ncols());
            kernels.push(kern);
            // orthonormal strip basis in the π^{1/2} coordinates, for
            // eigenvector projections
            let mut half = lift.clone();
            sqrt_scale_rows(&mut half, pi_k, false);
            let q = if half.ncols() == 0 {
                DMatrix::zeros(nk, 0)
            } else {
                half.qr().q()
            };
            strip_q.push(q);
            lifted.push(lift);
        }
        let total: usize = *offsets.last().unwrap();
        let mut stacked = DMatrix::zeros(nk, total);
        for (i, b) in lifted.iter().enumerate() {
            let mut view = stacked.columns_mut(offsets[i], b.ncols());
            view.copy_from(b);
        }
        sqrt_scale_rows(&mut stacked, pi_k, false);
        let solver = stacked.clone().svd(true, true);
        let smax = solver.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let smin = solver
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(smin > RANK_TOL * smax) {
            return Err(HdxError::SingularSystem { condition });
        }
        Ok(HdBasis {
            complex: Arc::clone(x),
            level: k,
            kernels,
            lifted,
            strip_q,
            stacked,
            solver,
            solver_eps: RANK_TOL * smax,
            condition,
            offsets,
        })
    }

    /// SVD solve plus iterative refinement. The factorization alone loses
    /// several digits even on well-conditioned systems; correcting against
    /// the unfactored matrix recovers residuals at machine scale, which the
    /// exact-identity checks downstream rely on.
    fn refined_solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        let mut coeffs = self
            .solver
            .solve(rhs, self.solver_eps)
            .map_err(|_| HdxError::SingularSystem {
                condition: self.condition,
            })?;
        let scale = rhs.norm().max(1.0);
        for _ in 0..3 {
            let residual = rhs - &self.stacked * &coeffs;
            if residual.norm() <= 1e-14 * scale {
                break;
            }
            let correction = self
                .solver
                .solve(&residual, self.solver_eps)
                .map_err(|_| HdxError::SingularSystem {
                    condition: self.condition,
                })?;
            coeffs += correction;
        }
        Ok(coeffs)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn kernel_dim(&self, i: usize) -> usize {
        self.kernels[i].ncols()
    }

    /// Squared projection masses of an ℓ2-unit vector (given in π^{1/2}
    /// coordinates) onto the lifted kernel spaces.
    pub fn projection_masses(&self, w: &DVector<f64>) -> Vec<f64> {
        self.strip_q
            .iter()
            .map(|q| if q.ncols() == 0 { 0.0 } else { (q.transpose() * w).norm_squared() })
            .collect()
    }

    pub fn decompose(&self, f: &FaceFunction) -> Result<Decomposition> {
        if f.complex().id() != self.complex.id() {
            return Err(HdxError::ComplexMismatch);
        }
        if f.level() != self.level {
            return Err(HdxError::LevelMismatch {
                expected: self.level,
                got: f.level(),
            });
        }
        let pi_k = self.complex.pi(self.level);
        let rhs = DVector::from_iterator(
            f.values().len(),
            f.values().iter().zip(pi_k).map(|(v, p)| v * p.sqrt()),
        );
        let coeffs = self.refined_solve(&rhs)?;
        let mut g = Vec::with_capacity(self.level + 1);
        let mut lifts = Vec::with_capacity(self.level + 1);
        for i in 0..=self.level {
            let ci = coeffs.rows(self.offsets[i], self.kernels[i].ncols());
            let gi = &self.kernels[i] * ci;
            let fi = &self.lifted[i] * ci;
            g.push(FaceFunction::new(
                Arc::clone(&self.complex),
                i,
                gi.as_slice().to_vec(),
            )?);
            lifts.push(FaceFunction::new(
                Arc::clone(&self.complex),
                self.level,
                fi.as_slice().to_vec(),
            )?);
        }
        let dec = finish(BasisKind::HdLevelSet, f, g, lifts)?;
        let scale = f.l2_norm().max(1.0);
        if dec.residual > RECONSTRUCTION_TOL * scale {
            return Err(HdxError::SingularSystem {
                condition: self.condition,
            });
        }
        Ok(dec)
    }
}

/// Kernel-based level decomposition of a single function. Builds the basis
/// from scratch; use [`HdBasis`] directly to amortize over many functions.
pub fn hd_level_set(f: &FaceFunction) -> Result<Decomposition> {
    HdBasis::new(f.complex(), f.level())?.decompose(f)
}

/// Both sides of the restriction identity for Bottom-Up level functions:
/// restricting g_i to the link of τ equals an alternating sum over σ ⊆ τ of
/// level-(i−|τ|) functions of the restrictions f|_{τ∖σ}, computed inside
/// each link. Returns (lhs, rhs, max abs difference); lhs and rhs live on
/// the link of τ at level i − |τ|.
pub fn g_restriction_check(
    f: &FaceFunction,
    tau: &Face,
    i: usize,
) -> Result<(FaceFunction, FaceFunction, f64)> {
    let j = tau.len();
    let k = f.level();
    if j > i || i > k {
        return Err(HdxError::InvalidParameter(format!(
            "restriction identity needs |τ| ≤ i ≤ k, got |τ|={j}, i={i}, k={k}"
        )));
    }
    let dec = bottom_up_recursive(f)?;
    let (link_tau, lhs) = dec.g[i].restrict(tau)?;
    let mut rhs = FaceFunction::constant(Arc::clone(&link_tau.complex), i - j, 0.0)?;
    for s in 0..=j {
        for sigma in tau.subsets(s) {
            let rho = tau.minus(&sigma);
            let (link_rho, f_rho) = f.restrict(&rho)?;
            let dec_rho = bottom_up_recursive(&f_rho)?;
            let g_link = &dec_rho.g[i - j];
            // evaluate the link-of-ρ function on faces of the link of τ
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            let vals: Result<Vec<f64>> = (0..rhs.values().len())
                .map(|r| {
                    let w = link_tau.complex.face(i - j, r);
                    let rank = link_rho.complex.rank_of(&w).ok_or_else(|| {
                        HdxError::FaceNotFound {
                            face: w.to_string(),
                            level: i - j,
                        }
                    })?;
                    Ok(sign * g_link.values()[rank])
                })
                .collect();
            let term = FaceFunction::new(Arc::clone(&link_tau.complex), i - j, vals?)?;
            rhs.axpy(1.0, &term)?;
        }
    }
    let diff = lhs
        .values()
        .iter()
        .zip(rhs.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok((lhs, rhs, diff))
}

/// Measured norm relations between a function, its Bottom-Up level
/// functions, and the kernel-based lifts. Constants that the theory leaves
/// asymptotic are reported as fitted ratios.
#[derive(Clone, Debug, Serialize)]
pub struct LevelNorms {
    pub i: usize,
    /// ⟨g_i, g_i⟩
    pub g_norm_sq: f64,
    /// ⟨f_i, f_i⟩ / C(k,i)
    pub f_norm_sq_scaled: f64,
    /// |⟨g_i,g_i⟩ − ⟨f_i,f_i⟩/C(k,i)|
    pub norm_gap: f64,
    /// norm_gap / (γ ‖D^k_i f‖²); the c_{k,i} scale
    pub norm_gap_constant: f64,
    /// ‖D_i g_i‖ / ‖D^k_i f‖
    pub kernel_ratio: f64,
    /// kernel_ratio / γ
    pub kernel_constant: f64,
    /// ‖f_i(bottom-up) − f_i(kernel)‖² / ‖f‖²
    pub bottom_vs_top_sq: f64,
    /// bottom_vs_top_sq / γ
    pub bottom_vs_top_constant: f64,
    /// ‖g_i‖_p / (2^i ‖D^k_i f‖_p) for p = 1, 2, ∞; always at most 1
    pub lp_ratios: [f64; 3],
    /// ‖g_i‖_∞ / (2^i ε_i ‖f‖_∞) when ε_i was supplied
    pub inf_conditional: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormRelations {
    pub level: usize,
    pub gamma: f64,
    pub per_level: Vec<LevelNorms>,
    /// max_{i≠j} |⟨f_i, f_j⟩| / ‖f‖²
    pub max_cross_term: f64,
    /// |‖f‖² − Σ ‖f_i‖²| / ‖f‖² for the Bottom-Up lifts
    pub parseval_drift: f64,
    /// parseval_drift / γ
    pub parseval_constant: f64,
    /// human-readable descriptions of violated unconditional claims
    pub violations: Vec<String>,
}

fn safe_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

pub fn norm_relations(
    f: &FaceFunction,
    gamma: f64,
    eps_per_level: Option<&[f64]>,
) -> Result<NormRelations> {
    let k = f.level();
    let bu = bottom_up_recursive(f)?;
    let hd = hd_level_set(f)?;
    let downs = down_tower(f)?;
    let norm_sq = f.norm_sq();
    let sup = f.sup_norm();
    let mut per_level = Vec::with_capacity(k + 1);
    let mut violations = Vec::new();
    for i in 0..=k {
        let gi = &bu.g[i];
        let c_ki = binomial(k as u64, i as u64) as f64;
        let g_norm_sq = gi.norm_sq();
        let f_norm_sq_scaled = bu.lifts[i].norm_sq() / c_ki;
        let norm_gap = (g_norm_sq - f_norm_sq_scaled).abs();
        let dkif = &downs[i];
        let norm_gap_constant = safe_div(norm_gap, gamma * dkif.norm_sq());
        let kernel_ratio = if i == 0 {
            0.0
        } else {
            safe_div(down(gi)?.l2_norm(), dkif.l2_norm())
        };
        let bvt = bu.lifts[i].sub(&hd.lifts[i])?.norm_sq();
        let bottom_vs_top_sq = safe_div(bvt, norm_sq);
        let two_i = (1u64 << i) as f64;
        let lp_ratios = [
            safe_div(gi.l1_norm(), two_i * dkif.l1_norm()),
            safe_div(gi.l2_norm(), two_i * dkif.l2_norm()),
            safe_div(gi.sup_norm(), two_i * dkif.sup_norm()),
        ];
        for (p, ratio) in ["1", "2", "inf"].iter().zip(lp_ratios) {
            if ratio > 1.0 + 1e-12 {
                violations.push(format!(
                    "‖g_{i}‖_{p} exceeds 2^{i}·‖D^k_{i} f‖_{p} by factor {ratio:.6}"
                ));
            }
        }
        let inf_conditional = eps_per_level.map(|eps| {
            safe_div(gi.sup_norm(), two_i * eps.get(i).copied().unwrap_or(f64::NAN) * sup)
        });
        per_level.push(LevelNorms {
            i,
            g_norm_sq,
            f_norm_sq_scaled,
            norm_gap,
            norm_gap_constant: if gamma > 0.0 { norm_gap_constant } else { f64::NAN },
            kernel_ratio,
            kernel_constant: if gamma > 0.0 {
                safe_div(kernel_ratio, gamma)
            } else {
                f64::NAN
            },
            bottom_vs_top_sq,
            bottom_vs_top_constant: if gamma > 0.0 {
                safe_div(bottom_vs_top_sq, gamma)
            } else {
                f64::NAN
            },
            lp_ratios,
            inf_conditional,
        });
    }
    let mut max_cross = 0.0f64;
    for i in 0..=k {
        for j in i + 1..=k {
            let dot = bu.lifts[i].inner(&bu.lifts[j])?.abs();
            max_cross = max_cross.max(safe_div(dot, norm_sq));
        }
    }
    let sum_sq: f64 = bu.lifts.iter().map(|fi| fi.norm_sq()).sum();
    let parseval_drift = safe_div((norm_sq - sum_sq).abs(), norm_sq);
    Ok(NormRelations {
        level: k,
        gamma,
        per_level,
        max_cross_term: max_cross,
        parseval_drift,
        parseval_constant: if gamma > 0.0 {
            safe_div(parseval_drift, gamma)
        } else {
            f64::NAN
        },
        violations,
    })
}
