//! Hilbert-space primitives: Hermitian operators, density matrices, pure
//! states, the pure-loss channel and its dual, and the trace distance.

use num_complex::Complex;

use crate::eig::{eigh, EigenDecomposition};
use crate::error::{Error, Result};
use crate::matrix::{check_dim, check_hermitian, trace_product_re, ComplexMatrix};
use crate::scalar::{real, to_f64, Real};

/// Self-adjoint operator, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator<T> {
    base: ComplexMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates Hermiticity within tolerance and the dimension range.
    pub fn new(base: ComplexMatrix<T>) -> Result<Self> {
        check_dim(base.dim())?;
        check_hermitian(&base)?;
        Ok(HermitianOperator { base })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_matrix_unchecked(base: ComplexMatrix<T>) -> Self {
        HermitianOperator { base }
    }

    /// Wraps (m + m†)/2, discarding anti-Hermitian rounding dust.
    pub(crate) fn symmetrized(m: ComplexMatrix<T>) -> Self {
        HermitianOperator {
            base: m.hermitian_part(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOperator {
            base: ComplexMatrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.base
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.base
    }

    pub fn eigendecomposition(&self) -> Result<EigenDecomposition<T>> {
        eigh(&self.base)
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eigendecomposition()?.min_value())
    }
}

/// Largest eigenvalue and a corresponding unit eigenvector.
pub fn max_eig_hermitian<T: Real>(h: &HermitianOperator<T>) -> Result<(T, StateVector<T>)> {
    let eig = h.eigendecomposition()?;
    let top = eig.values.len() - 1;
    let vector = StateVector::from_amplitudes_normalized(eig.vector(top))?;
    Ok((eig.max_value(), vector))
}

/// Unit-trace positive semidefinite Hermitian operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    base: HermitianOperator<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.base.matrix()
    }

    pub fn operator(&self) -> &HermitianOperator<T> {
        &self.base
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        let scale = T::one() / T::from_usize(dim).expect("dim fits in T");
        Ok(DensityMatrix {
            base: HermitianOperator::from_matrix_unchecked(ComplexMatrix::identity(dim).scaled(scale)),
        })
    }

    /// Pure state |v⟩⟨v|.
    pub fn pure(state: &StateVector<T>) -> Self {
        DensityMatrix {
            base: HermitianOperator::from_matrix_unchecked(ComplexMatrix::outer(state.amplitudes())),
        }
    }

    /// Convex combination (1−w)·self + w·other. Preserves all invariants
    /// analytically, so no revalidation is performed.
    pub fn mix(&self, other: &Self, weight: T) -> Result<Self> {
        self.matrix().check_same_dim(other.matrix())?;
        let w = weight.max(T::zero()).min(T::one());
        let mut m = self.matrix().scaled(T::one() - w);
        m.add_scaled(other.matrix(), w);
        Ok(DensityMatrix {
            base: HermitianOperator::from_matrix_unchecked(m),
        })
    }

    /// Expectation value Tr(ρ·A).
    pub fn expectation(&self, a: &HermitianOperator<T>) -> Result<T> {
        self.matrix().check_same_dim(a.matrix())?;
        Ok(trace_product_re(self.matrix(), a.matrix()))
    }

    /// Tr(ρ²), 1 for pure states.
    pub fn purity(&self) -> T {
        trace_product_re(self.matrix(), self.matrix())
    }
}

/// Validates a matrix as a density matrix.
///
/// Eigenvalues in [−tol, 0) are clamped to 0 and the trace renormalized;
/// iterative algorithms routinely produce that much negative dust. Anything
/// below −tol is rejected.
pub fn make_density<T: Real>(m: ComplexMatrix<T>) -> Result<DensityMatrix<T>> {
    let op = HermitianOperator::new(m)?;
    let tol = T::validation_tol();
    let eig = op.eigendecomposition()?;
    let min = eig.min_value();
    if min < -tol {
        return Err(Error::NotPositive {
            min_eigenvalue: to_f64(min),
        });
    }
    let trace = op.matrix().trace_re();
    if (trace - T::one()).abs() > tol {
        return Err(Error::TraceNotOne { trace: to_f64(trace) });
    }
    if min >= T::zero() {
        return Ok(DensityMatrix { base: op });
    }
    let clamped: Vec<T> = eig.values.iter().map(|&v| v.max(T::zero())).collect();
    let total: T = clamped.iter().copied().sum();
    if total <= T::prob_floor() {
        return Err(Error::NotPositive {
            min_eigenvalue: to_f64(min),
        });
    }
    let dim = op.dim();
    let mut rebuilt = ComplexMatrix::zeros(dim);
    for (k, &v) in clamped.iter().enumerate() {
        if v > T::zero() {
            rebuilt.add_scaled(&ComplexMatrix::outer(&eig.vector(k)), v / total);
        }
    }
    Ok(DensityMatrix {
        base: HermitianOperator::symmetrized(rebuilt),
    })
}

/// (1/2)·Tr|a − b|, in [0, 1] for density matrices.
pub fn trace_distance<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> Result<T> {
    a.matrix().check_same_dim(b.matrix())?;
    let diff = a.matrix().sub(b.matrix());
    let eig = eigh(&diff)?;
    let half = real::<T>(0.5);
    Ok(eig.values.iter().fold(T::zero(), |acc, &v| acc + v.abs()) * half)
}

/// Unit vector in the computational (Fock) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Validates unit norm within tolerance.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = vec_norm(&amplitudes);
        if (norm - T::one()).abs() > T::norm_tol() {
            return Err(Error::StateNotNormalized { norm: to_f64(norm) });
        }
        Ok(StateVector { amplitudes })
    }

    /// Normalizes the amplitudes; fails on a numerically zero vector.
    pub fn from_amplitudes_normalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = vec_norm(&amplitudes);
        if norm < T::norm_tol() {
            return Err(Error::DegenerateState);
        }
        let amplitudes = amplitudes.into_iter().map(|a| a.unscale(norm)).collect();
        Ok(StateVector { amplitudes })
    }

    /// Basis vector |n⟩.
    pub fn basis_state(dim: usize, n: usize) -> Result<Self> {
        check_dim(dim)?;
        if n >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {n} outside dimension {dim}"
            )));
        }
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[n] = Complex::new(T::one(), T::zero());
        Ok(StateVector { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &Self) -> Complex<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }
}

fn vec_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|a| a.norm_sqr()).fold(T::zero(), |acc, x| acc + x).sqrt()
}

/// Coherent state |α⟩ in a truncated Fock basis, renormalized after
/// truncation so the unit-norm invariant is exact.
pub fn coherent_state<T: Real>(alpha: Complex<T>, dim: usize) -> Result<StateVector<T>> {
    check_dim(dim)?;
    let mut amplitudes = Vec::with_capacity(dim);
    let mut amp = Complex::new(T::one(), T::zero());
    amplitudes.push(amp);
    for n in 1..dim {
        amp *= alpha.unscale(T::from_usize(n).expect("n fits in T").sqrt());
        amplitudes.push(amp);
    }
    StateVector::from_amplitudes_normalized(amplitudes)
}

/// Normalized |α⟩ + |−α⟩ in a truncated Fock basis; odd amplitudes vanish.
pub fn even_cat_state<T: Real>(alpha: Complex<T>, dim: usize) -> Result<StateVector<T>> {
    check_dim(dim)?;
    let mut amplitudes = Vec::with_capacity(dim);
    let mut amp = Complex::new(T::one(), T::zero());
    amplitudes.push(amp + amp);
    for n in 1..dim {
        amp *= alpha.unscale(T::from_usize(n).expect("n fits in T").sqrt());
        if n % 2 == 0 {
            amplitudes.push(amp + amp);
        } else {
            amplitudes.push(Complex::new(T::zero(), T::zero()));
        }
    }
    StateVector::from_amplitudes_normalized(amplitudes)
}

/// sqrt(C(n,k) η^{n−k} (1−η)^k), computed in f64 to avoid intermediate
/// overflow of the binomial at large n.
fn loss_coefficient<T: Real>(n: usize, k: usize, eta: f64) -> T {
    let mut binom = 1.0f64;
    for i in 1..=k {
        binom *= (n - k + i) as f64 / i as f64;
    }
    let val = binom * eta.powi((n - k) as i32) * (1.0 - eta).powi(k as i32);
    real(val.max(0.0).sqrt())
}

fn check_eta<T: Real>(eta: T) -> Result<f64> {
    let e = to_f64(eta);
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::EtaOutOfRange { eta: e });
    }
    Ok(e)
}

/// Pure-loss (attenuation) channel with transmissivity `eta` in the Fock
/// basis: ρ ↦ Σ_k A_k ρ A_k† with ⟨n−k|A_k|n⟩ = √(C(n,k) η^{n−k} (1−η)^k).
pub fn loss_channel<T: Real>(rho: &DensityMatrix<T>, eta: T) -> Result<DensityMatrix<T>> {
    let e = check_eta(eta)?;
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d);
    // A_k shifts |n⟩ → |n−k⟩, so each Kraus term touches a shifted block.
    for k in 0..d {
        let coefs: Vec<T> = (k..d).map(|n| loss_coefficient::<T>(n, k, e)).collect();
        for i in 0..d - k {
            for j in 0..d - k {
                let w = coefs[i] * coefs[j];
                out[(i, j)] += rho.matrix()[(i + k, j + k)].scale(w);
            }
        }
    }
    Ok(DensityMatrix {
        base: HermitianOperator::symmetrized(out),
    })
}

/// Heisenberg-picture dual of the loss channel: op ↦ Σ_k A_k† op A_k.
/// Satisfies Tr[ρ · dual(op)] = Tr[loss(ρ) · op].
pub fn adjoint_loss_on_operator<T: Real>(op: &HermitianOperator<T>, eta: T) -> Result<HermitianOperator<T>> {
    let e = check_eta(eta)?;
    let d = op.dim();
    let mut out = ComplexMatrix::zeros(d);
    for k in 0..d {
        let coefs: Vec<T> = (k..d).map(|n| loss_coefficient::<T>(n, k, e)).collect();
        for m in k..d {
            for n in k..d {
                let w = coefs[m - k] * coefs[n - k];
                out[(m, n)] += op.matrix()[(m - k, n - k)].scale(w);
            }
        }
    }
    Ok(HermitianOperator::symmetrized(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};

    type M = ComplexMatrix<f64>;
    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn uniform(rng: &mut rand_chacha::ChaCha12Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub(crate) fn random_density(dim: usize, rng: &mut rand_chacha::ChaCha12Rng) -> DensityMatrix<f64> {
        let g = M::from_fn(dim, |_, _| c(uniform(rng) - 0.5, uniform(rng) - 0.5));
        let gg = g.matmul(&g.adjoint());
        let trace = gg.trace_re();
        make_density(gg.scaled(1.0 / trace)).unwrap()
    }

    #[test]
    fn make_density_examples() {
        let mixed = make_density(M::identity(2).scaled(0.5)).unwrap();
        let eig = mixed.operator().eigendecomposition().unwrap();
        assert!((eig.values[0] - 0.5).abs() < 1e-14);
        assert!((eig.values[1] - 0.5).abs() < 1e-14);

        assert!(make_density(M::diagonal(&[0.75, 0.25])).is_ok());

        match make_density(M::diagonal(&[1.1, -0.1])) {
            Err(Error::NotPositive { .. }) => {}
            other => panic!("expected NotPositive, got {other:?}"),
        }
        match make_density(M::diagonal(&[0.6, 0.6])) {
            Err(Error::TraceNotOne { .. }) => {}
            other => panic!("expected TraceNotOne, got {other:?}"),
        }
    }

    #[test]
    fn make_density_clamps_negative_dust() {
        let dust = -5e-11;
        let rho = make_density(M::diagonal(&[1.0 - dust, dust])).unwrap();
        let eig = rho.operator().eigendecomposition().unwrap();
        assert!(eig.min_value() >= 0.0);
        assert!((rho.matrix().trace_re() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_examples() {
        let rho = make_density(M::diagonal(&[0.75, 0.25])).unwrap();
        assert_eq!(trace_distance(&rho, &rho).unwrap(), 0.0);

        let zero = DensityMatrix::pure(&StateVector::<f64>::basis_state(2, 0).unwrap());
        let one = DensityMatrix::pure(&StateVector::basis_state(2, 1).unwrap());
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);

        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((trace_distance(&rho, &mixed).unwrap() - 0.25).abs() < 1e-14);

        let d3 = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(matches!(
            trace_distance(&rho, &d3),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn trace_distance_symmetry_and_triangle() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_density(4, &mut rng);
            let b = random_density(4, &mut rng);
            let cc = random_density(4, &mut rng);
            let dab = trace_distance(&a, &b).unwrap();
            let dba = trace_distance(&b, &a).unwrap();
            let dac = trace_distance(&a, &cc).unwrap();
            let dcb = trace_distance(&cc, &b).unwrap();
            assert!((dab - dba).abs() <= 1e-10);
            assert!(dab <= dac + dcb + 1e-10);
            assert!((0.0..=1.0 + 1e-12).contains(&dab));
        }
    }

    #[test]
    fn max_eig_examples() {
        let h = HermitianOperator::new(M::diagonal(&[6.0, 2.0])).unwrap();
        let (val, vec) = max_eig_hermitian(&h).unwrap();
        assert!((val - 6.0).abs() < 1e-14);
        assert!((vec.amplitudes()[0].norm() - 1.0).abs() < 1e-12);

        let id = HermitianOperator::<f64>::identity(3);
        let (val, _) = max_eig_hermitian(&id).unwrap();
        assert!((val - 1.0).abs() < 1e-14);
    }

    #[test]
    fn coherent_state_amplitudes() {
        let vac = coherent_state(c(0.0, 0.0), 5).unwrap();
        assert!((vac.amplitudes()[0].re - 1.0).abs() < 1e-15);
        for n in 1..5 {
            assert_eq!(vac.amplitudes()[n].norm(), 0.0);
        }

        // Squared amplitudes of |α=1⟩ follow Poisson(1) weights once the
        // truncation tail is negligible.
        let dim = 40;
        let state = coherent_state(c(1.0, 0.0), dim).unwrap();
        let mut factorial = 1.0f64;
        for n in 0..12 {
            if n > 0 {
                factorial *= n as f64;
            }
            let poisson = (-1.0f64).exp() / factorial;
            assert!(
                (state.amplitudes()[n].norm_sqr() - poisson).abs() < 1e-12,
                "Poisson weight mismatch at n={n}"
            );
        }

        // Truncated amplitudes before renormalization are ∝ 1/√(n!); the
        // ratio a_n/a_0 is truncation-independent.
        let short = coherent_state(c(1.0, 0.0), 11).unwrap();
        let ratio = short.amplitudes()[2].re / short.amplitudes()[0].re;
        assert!((ratio - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn even_cat_structure() {
        let vac = even_cat_state(c(0.0, 0.0), 6).unwrap();
        assert!((vac.amplitudes()[0].re - 1.0).abs() < 1e-15);

        let cat = even_cat_state(c(1.0, 0.0), 11).unwrap();
        for n in (1..11).step_by(2) {
            assert_eq!(cat.amplitudes()[n].norm(), 0.0, "odd amplitude at n={n}");
        }
        let ratio = cat.amplitudes()[2].re / cat.amplitudes()[0].re;
        assert!((ratio - 1.0 / 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn loss_channel_examples() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        let rho = random_density(6, &mut rng);
        let same = loss_channel(&rho, 1.0).unwrap();
        assert!(same.matrix().sub(rho.matrix()).frobenius_norm() < 1e-14);

        let vac = DensityMatrix::pure(&StateVector::basis_state(6, 0).unwrap());
        let still_vac = loss_channel(&vac, 0.37).unwrap();
        assert!(still_vac.matrix().sub(vac.matrix()).frobenius_norm() < 1e-14);

        assert!(matches!(
            loss_channel(&vac, 1.5),
            Err(Error::EtaOutOfRange { .. })
        ));

        // Coherent states map to attenuated coherent states.
        let dim = 20;
        let alpha = coherent_state(c(1.0, 0.0), dim).unwrap();
        let lossy = loss_channel(&DensityMatrix::pure(&alpha), 0.8).unwrap();
        let attenuated = coherent_state(c(0.8f64.sqrt(), 0.0), dim).unwrap();
        let fidelity = lossy
            .expectation(&HermitianOperator::from_matrix_unchecked(M::outer(attenuated.amplitudes())))
            .unwrap();
        assert!(fidelity >= 1.0 - 1e-10, "fidelity {fidelity}");
    }

    #[test]
    fn loss_channel_preserves_trace_and_positivity() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for trial in 0..100 {
            let dim = 2 + trial % 11;
            let rho = random_density(dim, &mut rng);
            let eta = uniform(&mut rng);
            let out = loss_channel(&rho, eta).unwrap();
            assert!((out.matrix().trace_re() - 1.0).abs() <= 1e-12);
            let min = out.operator().min_eigenvalue().unwrap();
            assert!(min >= -1e-10, "negative eigenvalue {min}");
        }
    }

    #[test]
    fn adjoint_loss_duality() {
        let id = HermitianOperator::<f64>::identity(7);
        let dual_id = adjoint_loss_on_operator(&id, 0.42).unwrap();
        assert!(dual_id.matrix().sub(id.matrix()).frobenius_norm() < 1e-12);

        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(23);
        let g = M::from_fn(7, |_, _| c(uniform(&mut rng) - 0.5, uniform(&mut rng) - 0.5));
        let op = HermitianOperator::new(g.hermitian_part()).unwrap();

        let same = adjoint_loss_on_operator(&op, 1.0).unwrap();
        assert!(same.matrix().sub(op.matrix()).frobenius_norm() < 1e-14);

        for _ in 0..20 {
            let rho = random_density(7, &mut rng);
            let eta = 0.7;
            let lhs = rho.expectation(&adjoint_loss_on_operator(&op, eta).unwrap()).unwrap();
            let rhs = loss_channel(&rho, eta).unwrap().expectation(&op).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10, "duality violated: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn state_vector_validation() {
        assert!(matches!(
            StateVector::new(vec![c(0.9, 0.0), c(0.0, 0.0)]),
            Err(Error::StateNotNormalized { .. })
        ));
        assert!(matches!(
            StateVector::from_amplitudes_normalized(vec![c(0.0, 0.0); 3]),
            Err(Error::DegenerateState)
        ));
    }
}
