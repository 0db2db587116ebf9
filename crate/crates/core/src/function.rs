use std::sync::Arc;

use crate::complex::{Link, SimplicialComplex};
use crate::error::{HdxError, Result};
use crate::face::Face;

/// A real-valued function on one level of a complex, i.e. an element of `C_k`.
/// All norms and inner products are weighted by the level measure `π_k`.
#[derive(Clone)]
#[derive(Debug)]
pub struct FaceFunction {
    complex: Arc<SimplicialComplex>,
    level: usize,
    values: Vec<f64>,
}

impl FaceFunction {
    pub fn new(
        complex: Arc<SimplicialComplex>,
        level: usize,
        values: Vec<f64>,
    ) -> Result<FaceFunction> {
        complex.check_level(level)?;
        if values.len() != complex.num_faces(level) {
            return Err(HdxError::LevelMismatch {
                expected: complex.num_faces(level),
                got: values.len(),
            });
        }
        Ok(FaceFunction {
            complex,
            level,
            values,
        })
    }

    pub fn constant(complex: Arc<SimplicialComplex>, level: usize, c: f64) -> Result<FaceFunction> {
        complex.check_level(level)?;
        let n = complex.num_faces(level);
        FaceFunction::new(complex, level, vec![c; n])
    }

    /// 0/1 indicator of the given faces, all of which must exist at `level`.
    pub fn indicator(
        complex: Arc<SimplicialComplex>,
        level: usize,
        faces: &[Face],
    ) -> Result<FaceFunction> {
        complex.check_level(level)?;
        let mut values = vec![0.0; complex.num_faces(level)];
        for f in faces {
            if f.len() != level {
                return Err(HdxError::LevelMismatch {
                    expected: level,
                    got: f.len(),
                });
            }
            let r = complex.rank_of(f).ok_or_else(|| HdxError::FaceNotFound {
                face: f.to_string(),
                level,
            })?;
            values[r] = 1.0;
        }
        FaceFunction::new(complex, level, values)
    }

    pub fn from_fn(
        complex: Arc<SimplicialComplex>,
        level: usize,
        mut f: impl FnMut(&Face) -> f64,
    ) -> Result<FaceFunction> {
        complex.check_level(level)?;
        let values = (0..complex.num_faces(level))
            .map(|r| f(&complex.face(level, r)))
            .collect();
        FaceFunction::new(complex, level, values)
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    fn compatible(&self, other: &FaceFunction) -> Result<()> {
        if self.complex.id() != other.complex.id() {
            return Err(HdxError::ComplexMismatch);
        }
        if self.level != other.level {
            return Err(HdxError::LevelMismatch {
                expected: self.level,
                got: other.level,
            });
        }
        Ok(())
    }

    /// `⟨f,g⟩ = Σ_τ π(τ) f(τ) g(τ)`.
    pub fn inner(&self, other: &FaceFunction) -> Result<f64> {
        self.compatible(other)?;
        let pi = self.complex.pi(self.level);
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(pi)
            .map(|((a, b), p)| p * a * b)
            .sum())
    }

    pub fn mean(&self) -> f64 {
        let pi = self.complex.pi(self.level);
        self.values.iter().zip(pi).map(|(v, p)| p * v).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        let pi = self.complex.pi(self.level);
        self.values.iter().zip(pi).map(|(v, p)| p * v * v).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        let pi = self.complex.pi(self.level);
        self.values.iter().zip(pi).map(|(v, p)| p * v.abs()).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `E[f^p]` for integer p (π-weighted moment).
    pub fn moment(&self, p: u32) -> f64 {
        let pi = self.complex.pi(self.level);
        self.values
            .iter()
            .zip(pi)
            .map(|(v, w)| w * v.powi(p as i32))
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.norm_sq() - m * m).max(0.0)
    }

    /// Exactly {0,1}-valued.
    pub fn is_boolean(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn require_boolean(&self) -> Result<()> {
        if self.is_boolean() {
            Ok(())
        } else {
            Err(HdxError::NotBoolean)
        }
    }

    pub fn pointwise_sq(&self) -> FaceFunction {
        self.map(|v| v * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> FaceFunction {
        FaceFunction {
            complex: Arc::clone(&self.complex),
            level: self.level,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> FaceFunction {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &FaceFunction) -> Result<FaceFunction> {
        self.compatible(other)?;
        Ok(FaceFunction {
            complex: Arc::clone(&self.complex),
            level: self.level,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &FaceFunction) -> Result<FaceFunction> {
        self.compatible(other)?;
        Ok(FaceFunction {
            complex: Arc::clone(&self.complex),
            level: self.level,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// In-place `self += c * other`.
    pub fn axpy(&mut self, c: f64, other: &FaceFunction) -> Result<()> {
        self.compatible(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    /// Restriction onto the link of `τ`; builds the link.
    pub fn restrict(&self, tau: &Face) -> Result<(Link, FaceFunction)> {
        let link = self.complex.link(tau)?;
        let g = link.restrict(self)?;
        Ok((link, g))
    }

    /// Localization onto the link of `τ`; builds the link.
    pub fn localize(&self, tau: &Face) -> Result<(Link, FaceFunction)> {
        let link = self.complex.link(tau)?;
        let g = link.localize(self)?;
        Ok((link, g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::complete_complex;

    fn face(ids: &[u32]) -> Face {
        Face::from_ids(ids).unwrap()
    }

    #[test]
    fn moments_on_triangle() {
        let x = complete_complex(3, 2).unwrap();
        let f = FaceFunction::indicator(Arc::clone(&x), 1, &[face(&[0])]).unwrap();
        assert!((f.mean() - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.norm_sq() - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.variance() - 2.0 / 9.0).abs() < 1e-15);
        assert!(f.is_boolean());
    }

    /// restrict(f, ∅) and localize(f, ∅) both copy f onto the trivial link.
    #[test]
    fn empty_face_restriction_is_identity() {
        let x = complete_complex(4, 2).unwrap();
        let f = FaceFunction::from_fn(Arc::clone(&x), 1, |t| t.verts()[0].0 as f64).unwrap();
        let (link, g) = f.restrict(&Face::empty()).unwrap();
        let (_, h) = f.localize(&Face::empty()).unwrap();
        for (r, _) in link.complex.faces(1) {
            let pr = x.rank_of(&link.complex.face(1, r)).unwrap();
            assert_eq!(g.values()[r], f.values()[pr]);
            assert_eq!(h.values()[r], f.values()[pr]);
        }
    }

    /// K3: f|_{a}(σ) = f(a ∪ σ) on the two remaining vertices.
    #[test]
    fn restrict_shifts_levels() {
        let x = complete_complex(3, 2).unwrap();
        let f = FaceFunction::indicator(Arc::clone(&x), 2, &[face(&[0, 1])]).unwrap();
        let (link, g) = f.restrict(&face(&[0])).unwrap();
        assert_eq!(g.level(), 1);
        let rb = link.complex.rank_of(&face(&[1])).unwrap();
        let rc = link.complex.rank_of(&face(&[2])).unwrap();
        assert_eq!(g.values()[rb], 1.0);
        assert_eq!(g.values()[rc], 0.0);
        // second moment of the restriction = conditional mean of f² = 1/2
        assert!((g.norm_sq() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn localize_copies_values() {
        let x = complete_complex(4, 3).unwrap();
        let f = FaceFunction::from_fn(Arc::clone(&x), 1, |t| 10.0 + t.verts()[0].0 as f64).unwrap();
        let (link, g) = f.localize(&face(&[2])).unwrap();
        assert_eq!(g.level(), 1);
        for (r, _) in link.complex.faces(1) {
            let v = link.complex.face(1, r);
            assert_eq!(g.values()[r], 10.0 + v.verts()[0].0 as f64);
        }
    }

    #[test]
    fn mismatched_functions_error() {
        let x = complete_complex(3, 2).unwrap();
        let y = complete_complex(3, 2).unwrap();
        let f = FaceFunction::constant(x, 1, 1.0).unwrap();
        let g = FaceFunction::constant(y, 1, 1.0).unwrap();
        assert!(f.inner(&g).is_err());
    }
}
