//! Log-likelihood of a density matrix over a dataset of POVM elements, the
//! gradient operator R(ρ), and the computable upper bound on how much
//! log-likelihood any other state could still gain.

use crate::error::{Error, Result};
use crate::matrix::{check_dim, trace_product_re, ComplexMatrix};
use crate::quantum::{max_eig_hermitian, DensityMatrix, HermitianOperator};
use crate::scalar::{to_f64, Real};

/// Measurement outcome operator with a multiplicity. Finite-outcome
/// experiments repeat elements, so the weight keeps evaluation cost
/// proportional to the number of distinct outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmElement<T> {
    op: HermitianOperator<T>,
    weight: u64,
}

impl<T: Real> PovmElement<T> {
    /// Validates positive semidefiniteness and a positive weight.
    pub fn new(op: HermitianOperator<T>, weight: u64) -> Result<Self> {
        if weight == 0 {
            return Err(Error::InvalidParameter("POVM element weight must be at least 1".into()));
        }
        let min = op.min_eigenvalue()?;
        if min < -T::validation_tol() {
            return Err(Error::NotPositive {
                min_eigenvalue: to_f64(min),
            });
        }
        Ok(PovmElement { op, weight })
    }

    /// Wraps an operator that is positive semidefinite by construction.
    pub(crate) fn from_op_unchecked(op: HermitianOperator<T>, weight: u64) -> Self {
        PovmElement { op, weight }
    }

    pub fn op(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn weight(&self) -> u64 {
        self.weight
    }
}

/// A collection of POVM elements representing N measurement events.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    dim: usize,
    elements: Vec<PovmElement<T>>,
    n_total: u64,
}

impl<T: Real> Dataset<T> {
    pub fn new(elements: Vec<PovmElement<T>>) -> Result<Self> {
        let dim = match elements.first() {
            Some(e) => e.op.dim(),
            None => return Err(Error::InvalidParameter("dataset must contain at least one element".into())),
        };
        check_dim(dim)?;
        for e in &elements {
            if e.op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: e.op.dim(),
                });
            }
        }
        let n_total = elements.iter().map(|e| e.weight).sum();
        Ok(Dataset { dim, elements, n_total })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[PovmElement<T>] {
        &self.elements
    }

    /// Total event count N = Σ weights.
    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn n_scalar(&self) -> T {
        T::from_u64(self.n_total).expect("event count fits in T")
    }

    fn check_state(&self, rho: &DensityMatrix<T>) -> Result<()> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            });
        }
        Ok(())
    }

    /// Event probabilities Tr(Π_i ρ); fails if any is at or below the floor.
    pub(crate) fn probabilities(&self, rho: &DensityMatrix<T>) -> Result<Vec<T>> {
        self.check_state(rho)?;
        let floor = T::prob_floor();
        let mut probs = Vec::with_capacity(self.elements.len());
        for (index, e) in self.elements.iter().enumerate() {
            let p = trace_product_re(e.op.matrix(), rho.matrix());
            if p <= floor {
                return Err(Error::ZeroProbability { index });
            }
            probs.push(p);
        }
        Ok(probs)
    }
}

/// L(ρ) = Σ_i w_i · ln Tr(Π_i ρ).
pub fn log_likelihood<T: Real>(data: &Dataset<T>, rho: &DensityMatrix<T>) -> Result<T> {
    let probs = data.probabilities(rho)?;
    Ok(loglik_from_probs(data, &probs))
}

fn loglik_from_probs<T: Real>(data: &Dataset<T>, probs: &[T]) -> T {
    data.elements()
        .iter()
        .zip(probs)
        .map(|(e, &p)| T::from_u64(e.weight).expect("weight fits in T") * p.ln())
        .fold(T::zero(), |acc, x| acc + x)
}

fn r_from_probs<T: Real>(data: &Dataset<T>, probs: &[T]) -> HermitianOperator<T> {
    let mut r = ComplexMatrix::zeros(data.dim());
    for (e, &p) in data.elements().iter().zip(probs) {
        let w = T::from_u64(e.weight).expect("weight fits in T");
        r.add_scaled(e.op.matrix(), w / p);
    }
    // Sum of Hermitian terms with real coefficients.
    HermitianOperator::from_matrix_unchecked(r)
}

/// R(ρ) = Σ_i w_i · Π_i / Tr(Π_i ρ). Satisfies Tr[ρ·R(ρ)] = N.
pub fn r_matrix<T: Real>(data: &Dataset<T>, rho: &DensityMatrix<T>) -> Result<HermitianOperator<T>> {
    let probs = data.probabilities(rho)?;
    Ok(r_from_probs(data, &probs))
}

/// Log-likelihood and R(ρ) from a single pass over the elements.
pub(crate) fn loglik_and_r<T: Real>(
    data: &Dataset<T>,
    rho: &DensityMatrix<T>,
) -> Result<(T, HermitianOperator<T>)> {
    let probs = data.probabilities(rho)?;
    Ok((loglik_from_probs(data, &probs), r_from_probs(data, &probs)))
}

/// Derivative of ε ↦ L((1−ε)ρ + εσ) at ε = 0, which equals Tr[σ·R(ρ)] − N.
pub fn directional_derivative<T: Real>(
    data: &Dataset<T>,
    rho: &DensityMatrix<T>,
    sigma: &DensityMatrix<T>,
) -> Result<T> {
    data.check_state(sigma)?;
    let r = r_matrix(data, rho)?;
    Ok(trace_product_re(sigma.matrix(), r.matrix()) - data.n_scalar())
}

/// Upper bound max eig[R(ρ)] − N on L(σ) − L(ρ) over all density matrices σ,
/// and in particular on the gap to the maximum likelihood.
pub fn gradient_bound<T: Real>(data: &Dataset<T>, rho: &DensityMatrix<T>) -> Result<T> {
    let r = r_matrix(data, rho)?;
    let (top, _) = max_eig_hermitian(&r)?;
    Ok(top - data.n_scalar())
}

/// e^r, the bound transported to the likelihood ratio.
pub fn likelihood_ratio_bound<T: Real>(r: T) -> Result<T> {
    if !r.is_finite() {
        return Err(Error::InvalidParameter("bound must be finite".into()));
    }
    if r > T::exp_overflow() {
        return Err(Error::Overflow { argument: to_f64(r) });
    }
    Ok(r.exp())
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::matrix::ComplexMatrix;
    use crate::quantum::make_density;
    use num_complex::Complex;
    use rand_core::RngCore;

    pub fn uniform(rng: &mut rand_chacha::ChaCha12Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn random_density(dim: usize, rng: &mut rand_chacha::ChaCha12Rng) -> DensityMatrix<f64> {
        let g = ComplexMatrix::from_fn(dim, |_, _| {
            Complex::new(uniform(rng) - 0.5, uniform(rng) - 0.5)
        });
        let gg = g.matmul(&g.adjoint());
        let trace = gg.trace_re();
        make_density(gg.scaled(1.0 / trace)).unwrap()
    }

    pub fn random_psd(dim: usize, rng: &mut rand_chacha::ChaCha12Rng) -> HermitianOperator<f64> {
        let g = ComplexMatrix::from_fn(dim, |_, _| {
            Complex::new(uniform(rng) - 0.5, uniform(rng) - 0.5)
        });
        HermitianOperator::new(g.matmul(&g.adjoint())).unwrap()
    }

    /// Random dataset with a handful of PSD elements and N ≤ `n_max`.
    pub fn random_dataset(dim: usize, n_max: u64, rng: &mut rand_chacha::ChaCha12Rng) -> Dataset<f64> {
        let n_elements = 2 + (rng.next_u64() % 4) as usize;
        let cap = (n_max / n_elements as u64).max(1);
        let elements = (0..n_elements)
            .map(|_| {
                let weight = 1 + rng.next_u64() % cap;
                PovmElement::from_op_unchecked(random_psd(dim, rng), weight)
            })
            .collect();
        Dataset::new(elements).unwrap()
    }

    /// The two-outcome qubit dataset with counts 3 and 1; its maximum
    /// likelihood state is diag(3/4, 1/4) in closed form.
    pub fn qubit_three_one() -> Dataset<f64> {
        let p0 = HermitianOperator::new(ComplexMatrix::diagonal(&[1.0, 0.0])).unwrap();
        let p1 = HermitianOperator::new(ComplexMatrix::diagonal(&[0.0, 1.0])).unwrap();
        Dataset::new(vec![
            PovmElement::new(p0, 3).unwrap(),
            PovmElement::new(p1, 1).unwrap(),
        ])
        .unwrap()
    }

    /// Log-likelihood evaluated on a raw matrix, bypassing density-matrix
    /// validation; used by the finite-difference oracle which probes slightly
    /// infeasible points.
    pub fn raw_loglik(data: &Dataset<f64>, m: &ComplexMatrix<f64>) -> f64 {
        data.elements()
            .iter()
            .map(|e| e.weight() as f64 * crate::matrix::trace_product_re(e.op().matrix(), m).ln())
            .sum()
    }
}
