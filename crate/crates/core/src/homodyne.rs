//! Simulated balanced-homodyne tomography: quadrature POVM elements with
//! detector efficiency folded in, outcome densities, inverse-CDF sampling,
//! and the lossy-cat-state truth scenario.
//!
//! Quadrature convention x̂ = (a + a†)/√2, so the vacuum outcome
//! distribution has variance 1/2.

use num_complex::Complex;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::likelihood::{Dataset, PovmElement};
use crate::matrix::{check_dim, ComplexMatrix};
use crate::quantum::{
    adjoint_loss_on_operator, even_cat_state, loss_channel, DensityMatrix, HermitianOperator,
};
use crate::scalar::{real, to_f64, Real};

/// Sampling grid over quadrature outcomes.
pub const X_MIN: f64 = -8.0;
pub const X_MAX: f64 = 8.0;
pub const GRID_POINTS: usize = 4096;

/// One homodyne event: local-oscillator phase and quadrature outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomodyneRecord<T> {
    pub theta: T,
    pub x: T,
}

impl<T: Real> HomodyneRecord<T> {
    pub fn new(theta: T, x: T) -> Result<Self> {
        if !(theta >= T::zero() && theta < T::PI()) {
            return Err(Error::InvalidParameter(format!(
                "phase {} outside [0, π)",
                to_f64(theta)
            )));
        }
        if !x.is_finite() {
            return Err(Error::InvalidParameter("quadrature outcome must be finite".into()));
        }
        Ok(HomodyneRecord { theta, x })
    }
}

/// Full description of a simulated homodyne experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub alpha: Complex<T>,
    pub transmissivity: T,
    pub efficiency: T,
    pub dim: usize,
    pub n_samples: u64,
    pub phases: Vec<T>,
    pub seed: u64,
}

impl<T: Real> Scenario<T> {
    pub fn new(
        alpha: Complex<T>,
        transmissivity: T,
        efficiency: T,
        dim: usize,
        n_samples: u64,
        phases: Vec<T>,
        seed: u64,
    ) -> Result<Self> {
        if !(transmissivity >= T::zero() && transmissivity <= T::one()) {
            return Err(Error::EtaOutOfRange {
                eta: to_f64(transmissivity),
            });
        }
        if !(efficiency > T::zero() && efficiency <= T::one()) {
            return Err(Error::EtaOutOfRange {
                eta: to_f64(efficiency),
            });
        }
        check_dim(dim)?;
        if dim < 2 {
            return Err(Error::InvalidParameter("scenario dimension must be at least 2".into()));
        }
        if n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        if phases.is_empty() {
            return Err(Error::InvalidParameter("at least one phase is required".into()));
        }
        for &theta in &phases {
            if !(theta >= T::zero() && theta < T::PI()) {
                return Err(Error::InvalidParameter(format!(
                    "phase {} outside [0, π)",
                    to_f64(theta)
                )));
            }
        }
        Ok(Scenario {
            alpha,
            transmissivity,
            efficiency,
            dim,
            n_samples,
            phases,
            seed,
        })
    }

    /// The crate's demo experiment: an even cat state with α = 1 through an
    /// 80 % transmissive channel, measured by 90 % efficient homodyne
    /// detectors, truncated at 10 photons, with 8 uniformly spaced phases.
    pub fn lossy_cat_demo(n_samples: u64, seed: u64) -> Self {
        Scenario {
            alpha: Complex::new(T::one(), T::zero()),
            transmissivity: real(0.8),
            efficiency: real(0.9),
            dim: 11,
            n_samples,
            phases: uniform_phases(8),
            seed,
        }
    }
}

/// `count` phases uniformly spaced over [0, π).
pub fn uniform_phases<T: Real>(count: usize) -> Vec<T> {
    let c = T::from_usize(count).expect("count fits in T");
    (0..count)
        .map(|k| T::PI() * T::from_usize(k).expect("index fits in T") / c)
        .collect()
}

/// Normalized harmonic-oscillator wavefunctions ψ_0..ψ_{dim−1} at `x`,
/// via the stable three-term recurrence.
fn hermite_functions<T: Real>(x: T, dim: usize) -> Vec<T> {
    let mut psi = Vec::with_capacity(dim);
    let inv_quarter_root_pi = real::<T>(0.751_125_544_464_942_5); // π^{−1/4}
    let half = real::<T>(0.5);
    psi.push((-(x * x) * half).exp() * inv_quarter_root_pi);
    if dim > 1 {
        let sqrt2 = (T::one() + T::one()).sqrt();
        psi.push(sqrt2 * x * psi[0]);
    }
    for n in 2..dim {
        let nf = T::from_usize(n).expect("n fits in T");
        let a = (T::one() + T::one()).sqrt() / nf.sqrt();
        let b = ((nf - T::one()) / nf).sqrt();
        let next = a * x * psi[n - 1] - b * psi[n - 2];
        psi.push(next);
    }
    psi
}

/// Ideal quadrature projector |x_θ⟩⟨x_θ| truncated to `dim`, with
/// ⟨n|x_θ⟩ = e^{inθ}·ψ_n(x). Rank one and positive semidefinite.
pub fn quadrature_projector<T: Real>(x: T, theta: T, dim: usize) -> Result<HermitianOperator<T>> {
    check_dim(dim)?;
    let psi = hermite_functions(x, dim);
    let amplitudes: Vec<Complex<T>> = (0..dim)
        .map(|n| {
            let phase = theta * T::from_usize(n).expect("n fits in T");
            Complex::new(phase.cos(), phase.sin()).scale(psi[n])
        })
        .collect();
    Ok(HermitianOperator::from_matrix_unchecked(ComplexMatrix::outer(&amplitudes)))
}

/// POVM element of an `eta`-efficient homodyne detector: the ideal
/// projector pulled back through the dual loss channel, so that
/// Tr[ρ·Π_η(x|θ)] = Tr[loss_η(ρ)·|x_θ⟩⟨x_θ|].
pub fn efficient_povm<T: Real>(x: T, theta: T, eta: T, dim: usize) -> Result<PovmElement<T>> {
    if !(eta > T::zero() && eta <= T::one()) {
        return Err(Error::EtaOutOfRange { eta: to_f64(eta) });
    }
    let projector = quadrature_projector(x, theta, dim)?;
    let op = adjoint_loss_on_operator(&projector, eta)?;
    // The dual of a positive map keeps the element positive semidefinite.
    Ok(PovmElement::from_op_unchecked(op, 1))
}

/// Outcome density Tr[ρ·Π_η(x|θ)] on a strictly increasing grid, clamped
/// at zero. Evaluated through the channel duality: the state is attenuated
/// once and probed with ideal projectors, which is algebraically identical
/// and O(d²) per point.
pub fn homodyne_pdf<T: Real>(rho: &DensityMatrix<T>, theta: T, eta: T, grid: &[T]) -> Result<Vec<T>> {
    if !(eta > T::zero() && eta <= T::one()) {
        return Err(Error::EtaOutOfRange { eta: to_f64(eta) });
    }
    for pair in grid.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParameter("grid must be strictly increasing".into()));
        }
    }
    let attenuated = loss_channel(rho, eta)?;
    let dim = rho.dim();
    let mut out = Vec::with_capacity(grid.len());
    for &x in grid {
        let psi = hermite_functions(x, dim);
        // ⟨x_θ|ρ'|x_θ⟩ with ⟨n|x_θ⟩ = e^{inθ}ψ_n.
        let mut acc = T::zero();
        for m in 0..dim {
            // Diagonal term.
            acc += psi[m] * psi[m] * attenuated.matrix()[(m, m)].re;
            for n in m + 1..dim {
                let phase = theta * T::from_usize(n - m).expect("index fits in T");
                let rot = Complex::new(phase.cos(), phase.sin());
                let z = attenuated.matrix()[(m, n)] * rot;
                acc += (z.re + z.re) * psi[m] * psi[n];
            }
        }
        out.push(acc.max(T::zero()));
    }
    Ok(out)
}

/// The transmitted state the estimator targets: the even cat state sent
/// through the loss channel. Detector efficiency is not folded here; it
/// lives in the POVM.
pub fn scenario_truth<T: Real>(scenario: &Scenario<T>) -> Result<DensityMatrix<T>> {
    let cat = even_cat_state(scenario.alpha, scenario.dim)?;
    loss_channel(&DensityMatrix::pure(&cat), scenario.transmissivity)
}

/// Mean photon number Σ n·ρ_nn in the Fock basis.
pub fn mean_photon_number<T: Real>(rho: &DensityMatrix<T>) -> T {
    (0..rho.dim())
        .map(|n| T::from_usize(n).expect("n fits in T") * rho.matrix()[(n, n)].re)
        .fold(T::zero(), |acc, x| acc + x)
}

/// The default sampling grid.
pub fn sample_grid<T: Real>() -> Vec<T> {
    let lo = real::<T>(X_MIN);
    let hi = real::<T>(X_MAX);
    let n = T::from_usize(GRID_POINTS - 1).expect("grid size fits in T");
    (0..GRID_POINTS)
        .map(|i| lo + (hi - lo) * T::from_usize(i).expect("index fits in T") / n)
        .collect()
}

/// Tabulated inverse CDF for one phase.
struct PhaseSampler<T> {
    grid: Vec<T>,
    cdf: Vec<T>,
}

impl<T: Real> PhaseSampler<T> {
    fn build(rho: &DensityMatrix<T>, theta: T, eta: T) -> Result<Self> {
        let grid = sample_grid::<T>();
        let pdf = homodyne_pdf(rho, theta, eta, &grid)?;
        let half = real::<T>(0.5);
        let mut cdf = Vec::with_capacity(grid.len());
        cdf.push(T::zero());
        for i in 1..grid.len() {
            let step = (grid[i] - grid[i - 1]) * (pdf[i] + pdf[i - 1]) * half;
            let prev = cdf[i - 1];
            cdf.push(prev + step);
        }
        let total = *cdf.last().expect("grid is nonempty");
        if !(total > T::zero()) {
            return Err(Error::InvalidParameter(
                "outcome density vanishes on the sampling grid".into(),
            ));
        }
        Ok(PhaseSampler { grid, cdf })
    }

    /// Maps u ∈ [0, 1) to a quadrature outcome by linear interpolation
    /// within the CDF cell.
    fn invert(&self, u: T) -> T {
        let total = *self.cdf.last().expect("grid is nonempty");
        let target = u * total;
        let idx = self.cdf.partition_point(|&c| c < target);
        if idx == 0 {
            return self.grid[0];
        }
        if idx >= self.cdf.len() {
            return *self.grid.last().expect("grid is nonempty");
        }
        let span = self.cdf[idx] - self.cdf[idx - 1];
        if !(span > T::zero()) {
            return self.grid[idx - 1];
        }
        let frac = (target - self.cdf[idx - 1]) / span;
        self.grid[idx - 1] + frac * (self.grid[idx] - self.grid[idx - 1])
    }
}

/// Uniform deviate in [0, 1) from the top 53 bits of the generator.
fn uniform<T: Real>(rng: &mut rand_chacha::ChaCha12Rng) -> T {
    real((rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
}

/// Draws the scenario's homodyne records from the given true state:
/// phases cycle through `scenario.phases`, outcomes are inverse-CDF samples
/// from a seeded deterministic generator.
pub fn sample_records<T: Real>(
    scenario: &Scenario<T>,
    rho_true: &DensityMatrix<T>,
) -> Result<Vec<HomodyneRecord<T>>> {
    if rho_true.dim() != scenario.dim {
        return Err(Error::DimensionMismatch {
            expected: scenario.dim,
            found: rho_true.dim(),
        });
    }
    let samplers: Vec<PhaseSampler<T>> = scenario
        .phases
        .iter()
        .map(|&theta| PhaseSampler::build(rho_true, theta, scenario.efficiency))
        .collect::<Result<_>>()?;
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(scenario.seed);
    let mut records = Vec::with_capacity(scenario.n_samples as usize);
    for i in 0..scenario.n_samples {
        let phase_idx = (i % scenario.phases.len() as u64) as usize;
        let u = uniform::<T>(&mut rng);
        records.push(HomodyneRecord {
            theta: scenario.phases[phase_idx],
            x: samplers[phase_idx].invert(u),
        });
    }
    Ok(records)
}

/// Materializes homodyne records into a dataset of weight-1 POVM elements.
pub fn dataset_from_records<T: Real>(
    records: &[HomodyneRecord<T>],
    efficiency: T,
    dim: usize,
) -> Result<Dataset<T>> {
    let elements = records
        .iter()
        .map(|rec| efficient_povm(rec.x, rec.theta, efficiency, dim))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(elements)
}

/// Simulates the scenario end to end: samples records and materializes the
/// weight-1 efficient POVM elements.
pub fn sample_homodyne<T: Real>(scenario: &Scenario<T>, rho_true: &DensityMatrix<T>) -> Result<Dataset<T>> {
    let records = sample_records(scenario, rho_true)?;
    dataset_from_records(&records, scenario.efficiency, scenario.dim)
}
