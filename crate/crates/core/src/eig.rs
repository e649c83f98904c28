//! Eigendecomposition of Hermitian matrices.
//!
//! Cyclic Jacobi with complex rotations. Quadratic convergence, residuals
//! near machine precision, and no dependence on element ordering beyond the
//! matrix itself, which keeps repeated runs bit-for-bit reproducible.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{real, Real};

const MAX_SWEEPS: usize = 100;

/// Eigenvalues in ascending order; column `k` of `vectors` is the unit
/// eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    pub fn max_value(&self) -> T {
        *self.values.last().expect("dimension is at least 1")
    }

    pub fn min_value(&self) -> T {
        self.values[0]
    }

    /// Column `k` as a vector.
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        (0..self.values.len()).map(|i| self.vectors[(i, k)]).collect()
    }
}

/// Diagonalizes a Hermitian matrix. The strictly lower triangle is taken as
/// the conjugate of the upper one; callers validate Hermiticity beforehand.
pub fn eigh<T: Real>(m: &ComplexMatrix<T>) -> Result<EigenDecomposition<T>> {
    let d = m.dim();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(d);

    if d == 1 {
        return Ok(EigenDecomposition {
            values: vec![a[(0, 0)].re],
            vectors: v,
        });
    }

    let scale = a.frobenius_norm().max(T::min_positive_value());
    let conv = T::eig_tol() * scale;
    // Rotations on entries this small no longer change the spectrum.
    let skip = scale * T::epsilon() * real::<T>(1e-3);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= conv {
            return Ok(finish(a, v));
        }
        for p in 0..d - 1 {
            for q in p + 1..d {
                rotate(&mut a, &mut v, p, q, skip);
            }
        }
    }
    if off_diagonal_norm(&a) <= conv {
        return Ok(finish(a, v));
    }
    Err(Error::SolverFailure)
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let d = a.dim();
    let mut acc = T::zero();
    for p in 0..d - 1 {
        for q in p + 1..d {
            acc += a[(p, q)].norm_sqr();
        }
    }
    (acc + acc).sqrt()
}

/// Zeroes entry (p, q) with the unitary plane rotation J and updates
/// a ← J† a J, v ← v J.
fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize, skip: T) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= skip {
        let zero = Complex::new(T::zero(), T::zero());
        a[(p, q)] = zero;
        a[(q, p)] = zero;
        return;
    }
    let phase = apq.unscale(mag); // e^{iφ} with a_pq = |a_pq| e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let tau = (aqq - app) / (mag + mag);
    let t = if tau.abs() > real::<T>(1e8) {
        (tau + tau).recip()
    } else {
        let s = if tau >= T::zero() { T::one() } else { -T::one() };
        s / (tau.abs() + (T::one() + tau * tau).sqrt())
    };
    let c = (T::one() + t * t).sqrt().recip();
    let s = t * c;

    // Column-p/column-q combination coefficients of J.
    let jpq = phase.scale(s); // J[p][q]
    let jqp = -phase.conj().scale(s); // J[q][p]

    let d = a.dim();
    for k in 0..d {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = akp.scale(c) + akq * jqp;
        let new_kq = akp * jpq + akq.scale(c);
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp.conj();
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq.conj();
    }

    let cs2 = (c * s) * (mag + mag);
    let c2 = c * c;
    let s2 = s * s;
    a[(p, p)] = Complex::new(c2 * app + s2 * aqq - cs2, T::zero());
    a[(q, q)] = Complex::new(s2 * app + c2 * aqq + cs2, T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    a[(p, q)] = zero;
    a[(q, p)] = zero;

    for k in 0..d {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp.scale(c) + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq.scale(c);
    }
}

fn finish<T: Real>(a: ComplexMatrix<T>, v: ComplexMatrix<T>) -> EigenDecomposition<T> {
    let d = a.dim();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .expect("eigenvalues of a finite Hermitian matrix are comparable")
    });
    let values: Vec<T> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(d, |i, k| v[(i, order[k])]);
    EigenDecomposition { values, vectors }
}
