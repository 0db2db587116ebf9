use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::complex::SimplicialComplex;
use crate::error::{HdxError, Result};
use crate::function::FaceFunction;

/// Dense storage is used while `rows * cols` stays at or below this; larger
/// maps stay in CSR form and refuse operations that would densify them.
pub const DENSE_ENTRY_LIMIT: usize = 4_000_000;

/// Minimal CSR matrix. Only what the operator algebra needs: matvec,
/// sparse-sparse product, densification.
#[derive(Clone, Debug)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    pub fn from_triplets(rows: usize, cols: usize, mut trips: Vec<(u32, u32, f64)>) -> Self {
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices: Vec<u32> = Vec::with_capacity(trips.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trips.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, v) in trips {
            debug_assert!((r as usize) < rows && (c as usize) < cols);
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                vals.push(v);
                indptr[r as usize + 1] = indices.len();
                last = Some((r, c));
            }
        }
        // turn per-row end offsets into cumulative form (empty rows inherit)
        for r in 1..=rows {
            indptr[r] = indptr[r].max(indptr[r - 1]);
        }
        Csr {
            rows,
            cols,
            indptr,
            indices,
            vals,
        }
    }

    pub fn identity(n: usize) -> Self {
        Csr {
            rows: n,
            cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.vals[a..b])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in idx.iter().zip(vals) {
                acc += v * x[c as usize];
            }
            y[r] = acc;
        }
        y
    }

    /// self * other, both CSR.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.cols, other.rows);
        let mut scratch = vec![0.0f64; other.cols];
        let mut touched: Vec<u32> = Vec::new();
        let mut trips = Vec::new();
        for r in 0..self.rows {
            touched.clear();
            let (idx, vals) = self.row(r);
            for (&m, &v) in idx.iter().zip(vals) {
                let (oidx, ovals) = other.row(m as usize);
                for (&c, &w) in oidx.iter().zip(ovals) {
                    if scratch[c as usize] == 0.0 {
                        touched.push(c);
                    }
                    scratch[c as usize] += v * w;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                let v = scratch[c as usize];
                scratch[c as usize] = 0.0;
                if v != 0.0 {
                    trips.push((r as u32, c, v));
                }
            }
        }
        Csr::from_triplets(self.rows, other.cols, trips)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let (idx, vals) = self.row(r);
            for (&c, &v) in idx.iter().zip(vals) {
                m[(r, c as usize)] += v;
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
enum MapData {
    Dense(DMatrix<f64>),
    Sparse(Csr),
}

/// Linear map between function spaces of two levels of one complex, stored
/// as a |X(target)| x |X(source)| matrix in face lexicographic rank order.
#[derive(Clone, Debug)]
pub struct LinearMap {
    complex: Arc<SimplicialComplex>,
    source: usize,
    target: usize,
    data: MapData,
}

impl LinearMap {
    pub fn from_dense(
        complex: Arc<SimplicialComplex>,
        source: usize,
        target: usize,
        matrix: DMatrix<f64>,
    ) -> Result<Self> {
        complex.check_level(source)?;
        complex.check_level(target)?;
        if matrix.nrows() != complex.num_faces(target) || matrix.ncols() != complex.num_faces(source)
        {
            return Err(HdxError::ComplexMismatch);
        }
        Ok(LinearMap {
            complex,
            source,
            target,
            data: MapData::Dense(matrix),
        })
    }

    pub fn from_csr(
        complex: Arc<SimplicialComplex>,
        source: usize,
        target: usize,
        matrix: Csr,
    ) -> Result<Self> {
        complex.check_level(source)?;
        complex.check_level(target)?;
        if matrix.rows() != complex.num_faces(target) || matrix.cols() != complex.num_faces(source) {
            return Err(HdxError::ComplexMismatch);
        }
        Ok(LinearMap {
            complex,
            source,
            target,
            data: MapData::Sparse(matrix),
        })
    }

    pub fn identity(complex: Arc<SimplicialComplex>, level: usize) -> Result<Self> {
        complex.check_level(level)?;
        let n = complex.num_faces(level);
        Ok(LinearMap {
            complex,
            source: level,
            target: level,
            data: MapData::Sparse(Csr::identity(n)),
        })
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn source_level(&self) -> usize {
        self.source
    }

    pub fn target_level(&self) -> usize {
        self.target
    }

    pub fn nrows(&self) -> usize {
        self.complex.num_faces(self.target)
    }

    pub fn ncols(&self) -> usize {
        self.complex.num_faces(self.source)
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        match &self.data {
            MapData::Dense(m) => {
                let v = m * DVector::from_column_slice(x);
                v.as_slice().to_vec()
            }
            MapData::Sparse(s) => s.matvec(x),
        }
    }

    pub fn apply(&self, f: &FaceFunction) -> Result<FaceFunction> {
        if f.complex().id() != self.complex.id() {
            return Err(HdxError::ComplexMismatch);
        }
        if f.level() != self.source {
            return Err(HdxError::LevelMismatch {
                expected: self.source,
                got: f.level(),
            });
        }
        FaceFunction::new(
            Arc::clone(&self.complex),
            self.target,
            self.apply_vec(f.values()),
        )
    }

    /// `self` first, then `next`: the map `next ∘ self`.
    pub fn then(&self, next: &LinearMap) -> Result<LinearMap> {
        if self.complex.id() != next.complex.id() {
            return Err(HdxError::ComplexMismatch);
        }
        if self.target != next.source {
            return Err(HdxError::LevelMismatch {
                expected: self.target,
                got: next.source,
            });
        }
        let data = match (&next.data, &self.data) {
            (MapData::Sparse(a), MapData::Sparse(b)) => {
                let prod = a.matmul(b);
                if prod.rows() * prod.cols() <= DENSE_ENTRY_LIMIT
                    && prod.nnz() * 2 > prod.rows() * prod.cols()
                {
                    MapData::Dense(prod.to_dense())
                } else {
                    MapData::Sparse(prod)
                }
            }
            (a, b) => {
                let da = self.densify_of(a)?;
                let db = self.densify_of(b)?;
                MapData::Dense(da * db)
            }
        };
        Ok(LinearMap {
            complex: Arc::clone(&self.complex),
            source: self.source,
            target: next.target,
            data,
        })
    }

    fn densify_of(&self, d: &MapData) -> Result<DMatrix<f64>> {
        match d {
            MapData::Dense(m) => Ok(m.clone()),
            MapData::Sparse(s) => {
                if s.rows() * s.cols() > DENSE_ENTRY_LIMIT {
                    return Err(HdxError::TooManyFaces {
                        count: s.rows() * s.cols(),
                        cap: DENSE_ENTRY_LIMIT,
                    });
                }
                Ok(s.to_dense())
            }
        }
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        self.densify_of(&self.data)
    }

    pub fn scale(&self, c: f64) -> LinearMap {
        let data = match &self.data {
            MapData::Dense(m) => MapData::Dense(m.scale(c)),
            MapData::Sparse(s) => {
                let mut s = s.clone();
                for v in &mut s.vals {
                    *v *= c;
                }
                MapData::Sparse(s)
            }
        };
        LinearMap {
            complex: Arc::clone(&self.complex),
            source: self.source,
            target: self.target,
            data,
        }
    }

    /// self + c * other; requires matching shapes and levels.
    pub fn add_scaled(&self, other: &LinearMap, c: f64) -> Result<LinearMap> {
        if self.complex.id() != other.complex.id()
            || self.source != other.source
            || self.target != other.target
        {
            return Err(HdxError::ComplexMismatch);
        }
        let data = match (&self.data, &other.data) {
            (MapData::Sparse(a), MapData::Sparse(b)) => {
                let mut trips = Vec::with_capacity(a.nnz() + b.nnz());
                for r in 0..a.rows() {
                    let (idx, vals) = a.row(r);
                    for (&cc, &v) in idx.iter().zip(vals) {
                        trips.push((r as u32, cc, v));
                    }
                    let (idx, vals) = b.row(r);
                    for (&cc, &v) in idx.iter().zip(vals) {
                        trips.push((r as u32, cc, c * v));
                    }
                }
                MapData::Sparse(Csr::from_triplets(a.rows(), a.cols(), trips))
            }
            (a, b) => {
                let mut da = self.densify_of(a)?;
                let mut db = self.densify_of(b)?;
                db.scale_mut(c);
                da += db;
                MapData::Dense(da)
            }
        };
        Ok(LinearMap {
            complex: Arc::clone(&self.complex),
            source: self.source,
            target: self.target,
            data,
        })
    }

    pub fn sub(&self, other: &LinearMap) -> Result<LinearMap> {
        self.add_scaled(other, -1.0)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        match &self.data {
            MapData::Dense(m) => (0..m.nrows()).map(|r| m.row(r).sum()).collect(),
            MapData::Sparse(s) => (0..s.rows()).map(|r| s.row(r).1.iter().sum()).collect(),
        }
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        match &self.data {
            MapData::Dense(m) => m[(r, c)],
            MapData::Sparse(s) => {
                let (idx, vals) = s.row(r);
                match idx.binary_search(&(c as u32)) {
                    Ok(p) => vals[p],
                    Err(_) => 0.0,
                }
            }
        }
    }

    /// Visits nonzero entries in row-major order without densifying.
    pub fn for_each_entry(&self, mut visit: impl FnMut(usize, usize, f64)) {
        match &self.data {
            MapData::Dense(m) => {
                for r in 0..m.nrows() {
                    for c in 0..m.ncols() {
                        if m[(r, c)] != 0.0 {
                            visit(r, c, m[(r, c)]);
                        }
                    }
                }
            }
            MapData::Sparse(s) => {
                for r in 0..s.rows() {
                    let (idx, vals) = s.row(r);
                    for (&c, &v) in idx.iter().zip(vals) {
                        if v != 0.0 {
                            visit(r, c as usize, v);
                        }
                    }
                }
            }
        }
    }

    /// max |diag(π_k) M - Mᵀ diag(π_k)| over entries; only for square maps
    /// within one level.
    pub fn pi_self_adjoint_residual(&self) -> Result<f64> {
        if self.source != self.target {
            return Err(HdxError::LevelMismatch {
                expected: self.source,
                got: self.target,
            });
        }
        let pi = self.complex.pi(self.source);
        let m = self.to_dense()?;
        let mut worst = 0.0f64;
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let d = (pi[r] * m[(r, c)] - m[(c, r)] * pi[c]).abs();
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// Singular values of diag(π_tgt)^{1/2} M diag(π_src)^{-1/2}, the matrix
    /// of the map between the π-weighted L2 spaces, sorted descending.
    pub fn pi_singular_values(&self) -> Result<Vec<f64>> {
        let mut m = self.to_dense()?;
        let pt = self.complex.pi(self.target);
        let ps = self.complex.pi(self.source);
        for r in 0..m.nrows() {
            let s = pt[r].sqrt();
            for c in 0..m.ncols() {
                m[(r, c)] *= s;
            }
        }
        for c in 0..m.ncols() {
            let s = 1.0 / ps[c].sqrt();
            for r in 0..m.nrows() {
                m[(r, c)] *= s;
            }
        }
        let svd = m.svd(false, false);
        let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(sv)
    }

    /// Operator norm w.r.t. the π-weighted inner products.
    pub fn pi_operator_norm(&self) -> Result<f64> {
        Ok(self.pi_singular_values()?.first().copied().unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_matvec_and_matmul() {
        let a = Csr::from_triplets(2, 3, vec![(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0)]);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 3.0]);
        let b = Csr::from_triplets(3, 2, vec![(0, 0, 1.0), (1, 0, 1.0), (2, 1, 1.0)]);
        let p = a.matmul(&b);
        let d = p.to_dense();
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(0, 1)], 2.0);
        assert_eq!(d[(1, 0)], 3.0);
        assert_eq!(d[(1, 1)], 0.0);
    }

    #[test]
    fn duplicate_triplets_accumulate() {
        let a = Csr::from_triplets(1, 2, vec![(0, 1, 1.0), (0, 1, 2.5), (0, 0, 1.0)]);
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.to_dense()[(0, 1)], 3.5);
    }

    #[test]
    fn empty_rows_are_fine() {
        let a = Csr::from_triplets(4, 3, vec![(2, 1, 5.0)]);
        assert_eq!(a.matvec(&[0.0, 1.0, 0.0]), vec![0.0, 0.0, 5.0, 0.0]);
    }
}
