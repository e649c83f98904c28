//! Dense square complex matrices.
//!
//! Row-major storage; every operator in the crate (POVM elements, gradient
//! operators, observables, density matrices) is backed by this type.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// Largest supported Hilbert-space dimension. Dense eigensolves dominate the
/// cost; beyond this the tool is outside its design envelope.
pub const MAX_DIM: usize = 256;

/// Checks that a dimension is in the supported range.
pub fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::DimensionOutOfRange { dim });
    }
    Ok(())
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix entry by entry from a function of (row, col).
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a real diagonal matrix.
    pub fn diagonal(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = Complex::new(x, T::zero());
        }
        m
    }

    /// Builds a matrix from nested rows; every row must have length equal to
    /// the number of rows.
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn trace(&self) -> Complex<T> {
        let mut t = Complex::new(T::zero(), T::zero());
        for i in 0..self.dim {
            t += self[(i, i)];
        }
        t
    }

    /// Real part of the trace.
    pub fn trace_re(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.dim {
            t += self[(i, i)].re;
        }
        t
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimensions must agree");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimensions must agree");
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= *b;
        }
        out
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a = a.scale(factor);
        }
        out
    }

    /// Adds `factor * other` in place.
    pub fn add_scaled(&mut self, other: &Self, factor: T) {
        assert_eq!(self.dim, other.dim, "matrix dimensions must agree");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b.scale(factor);
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matrix dimensions must agree");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let aik = self[(i, k)];
                if aik.re == T::zero() && aik.im == T::zero() {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |acc, x| acc + x)
            .sqrt()
    }

    /// Largest absolute deviation of entry (i, j) from the conjugate of (j, i).
    pub fn hermiticity_deviation(&self) -> T {
        let mut dev = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d > dev {
                    dev = d;
                }
            }
        }
        dev
    }

    /// Hermitian part (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        let half = real::<T>(0.5);
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()).scale(half))
    }

    /// Rank-one matrix v v† from a complex vector.
    pub fn outer(v: &[Complex<T>]) -> Self {
        let dim = v.len();
        Self::from_fn(dim, |i, j| v[i] * v[j].conj())
    }

    /// Applies the matrix to a vector.
    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.dim, v.len(), "matrix and vector dimensions must agree");
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim];
        for i in 0..self.dim {
            let mut acc = Complex::new(T::zero(), T::zero());
            for j in 0..self.dim {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub(crate) fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }
}

impl<T: Real> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

/// Tr(A·B) in O(d²) without forming the product.
pub fn trace_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Complex<T> {
    assert_eq!(a.dim(), b.dim(), "matrix dimensions must agree");
    let d = a.dim();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Real part of Tr(A·B); exact for Hermitian A, B where the trace is real.
pub fn trace_product_re<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    trace_product(a, b).re
}

/// Validates that the deviation from Hermiticity is within tolerance.
pub fn check_hermitian<T: Real>(m: &ComplexMatrix<T>) -> Result<()> {
    let dev = m.hermiticity_deviation();
    if dev > T::validation_tol() {
        return Err(Error::NotHermitian {
            deviation: to_f64(dev),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;
    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn matmul_and_trace() {
        let a = M::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]).unwrap();
        let b = M::identity(2);
        let ab = a.matmul(&b);
        assert_eq!(ab, a);
        assert_eq!(a.trace(), c(5.0, 0.0));
        assert!((trace_product(&a, &a).re - (1.0 + 2.0 * 2.0 * 3.0 + 16.0)).abs() < 1e-14);
    }

    #[test]
    fn hermiticity_deviation_detects_asymmetry() {
        let m = M::from_rows(vec![vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(2.0, 0.0)]]).unwrap();
        // (0,1) entry should be the conjugate of (1,0); here both are +i.
        assert!(m.hermiticity_deviation() > 1.9);
        assert!(m.hermitian_part().hermiticity_deviation() < 1e-15);
    }

    #[test]
    fn dimension_cap() {
        assert!(check_dim(256).is_ok());
        assert_eq!(check_dim(257), Err(Error::DimensionOutOfRange { dim: 257 }));
        assert_eq!(check_dim(0), Err(Error::DimensionOutOfRange { dim: 0 }));
    }

    #[test]
    fn outer_product_is_rank_one_projector() {
        let inv = 1.0 / 2.0f64.sqrt();
        let v = vec![c(inv, 0.0), c(0.0, inv)];
        let p = M::outer(&v);
        assert!((p.trace_re() - 1.0).abs() < 1e-15);
        let p2 = p.matmul(&p);
        assert!(p2.sub(&p).frobenius_norm() < 1e-15);
    }
}
