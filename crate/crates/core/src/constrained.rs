//! Constrained likelihood maximization K(ρ,λ) = L(ρ) + λ·Tr(ρA) and the
//! multiplier search that brackets likelihood-ratio confidence-interval
//! endpoints for the expectation value f = Tr(ρA).
//!
//! K is concave and is maximized by the same machinery as L with the
//! gradient operator R(ρ) replaced by R(ρ) + λA. Because K is constant on
//! level sets of f, the generalized gap bound at an iterate also bounds the
//! log-likelihood gap to the constrained maximum on the iterate's own level
//! set — which is exactly what the interval endpoints need.

use crate::confidence::{chi2_quantile, chi2_survival, Chi2Params};
use crate::error::{Error, Result};
use crate::likelihood::{log_likelihood, loglik_and_r, Dataset};
use crate::optimizer::{ascend, Algorithm, AscentObjective, Evaluation, FitResult, IterationRecord, StopSpec};
use crate::quantum::{max_eig_hermitian, DensityMatrix, HermitianOperator};
use crate::scalar::{real, Real};

/// Width of the acceptance window on D_lb above the threshold t; bounds the
/// over-coverage of the reported interval while keeping the multiplier
/// bisection cheap.
pub const CI_SLACK: f64 = 0.1;

/// Multiplier magnitude beyond which the endpoint search gives up; reaching
/// it means the observable cannot push the statistic to the threshold.
pub const LAMBDA_LIMIT: f64 = 1e6;

struct LagrangianObjective<'a, T> {
    data: &'a Dataset<T>,
    lambda: T,
    observable: &'a HermitianOperator<T>,
}

impl<T: Real> AscentObjective<T> for LagrangianObjective<'_, T> {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn evaluate(&self, rho: &DensityMatrix<T>) -> Result<Evaluation<T>> {
        let (loglik, r) = loglik_and_r(self.data, rho)?;
        let f = rho.expectation(self.observable)?;
        let mut g = r.into_matrix();
        g.add_scaled(self.observable.matrix(), self.lambda);
        Ok(Evaluation {
            value: loglik + self.lambda * f,
            gradient: HermitianOperator::from_matrix_unchecked(g),
            offset: self.data.n_scalar() + self.lambda * f,
        })
    }

    fn value(&self, rho: &DensityMatrix<T>) -> Result<T> {
        Ok(log_likelihood(self.data, rho)? + self.lambda * rho.expectation(self.observable)?)
    }
}

/// K(ρ,λ) = L(ρ) + λ·Tr(ρA).
pub fn k_objective<T: Real>(
    data: &Dataset<T>,
    rho: &DensityMatrix<T>,
    lambda: T,
    a: &HermitianOperator<T>,
) -> Result<T> {
    LagrangianObjective {
        data,
        lambda,
        observable: a,
    }
    .value(rho)
}

/// Upper bound max eig[R(ρ)+λA] − N − λ·Tr(ρA) on K(σ,λ) − K(ρ,λ) over all
/// density matrices σ. Reduces to the plain gradient bound at λ = 0.
pub fn constrained_bound<T: Real>(
    data: &Dataset<T>,
    rho: &DensityMatrix<T>,
    lambda: T,
    a: &HermitianOperator<T>,
) -> Result<T> {
    let eval = LagrangianObjective {
        data,
        lambda,
        observable: a,
    }
    .evaluate(rho)?;
    let (top, _) = max_eig_hermitian(&eval.gradient)?;
    Ok(top - eval.offset)
}

/// A converged constrained fit: the maximum-likelihood state on its own
/// expectation-value level set, up to the recorded bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedFit<T> {
    pub state: DensityMatrix<T>,
    pub lambda: T,
    /// Tr(state·A).
    pub f_value: T,
    /// Plain log-likelihood of the state (not the Lagrangian value).
    pub loglik: T,
    /// Generalized gap bound at the final iterate; bounds the
    /// log-likelihood gap to the constrained maximum at f_value.
    pub r_phi: T,
    /// Iteration trace; the `loglik` column holds the Lagrangian objective.
    pub records: Vec<IterationRecord<T>>,
}

/// Maximizes K(ρ,λ) with the safeguarded fixed-point iteration, starting
/// from the maximally mixed state, stopping when the generalized bound
/// drops below the rule threshold.
pub fn maximize_constrained<T: Real>(
    data: &Dataset<T>,
    lambda: T,
    a: &HermitianOperator<T>,
    stop: &StopSpec<T>,
) -> Result<ConstrainedFit<T>> {
    if a.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: a.dim(),
        });
    }
    let obj = LagrangianObjective {
        data,
        lambda,
        observable: a,
    };
    let rho0 = DensityMatrix::maximally_mixed(data.dim())?;
    let outcome = ascend(&obj, Algorithm::Rhor, stop, rho0)?;
    let f_value = outcome.state.expectation(a)?;
    let loglik = log_likelihood(data, &outcome.state)?;
    Ok(ConstrainedFit {
        state: outcome.state,
        lambda,
        f_value,
        loglik,
        r_phi: outcome.final_r,
        records: outcome.records,
    })
}

/// Computable bounds at one interval endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointReport<T> {
    pub lambda: T,
    /// Endpoint location f = Tr(φ·A).
    pub f: T,
    /// Lower bound on the endpoint's log-likelihood-ratio statistic;
    /// at least t by construction, so the interval is conservative.
    pub d_lb: T,
    /// Upper bound on the same statistic.
    pub d_ub: T,
    /// Bounds on the endpoint's p-value: the exact statistic lies in
    /// [d_lb, d_ub], so its p-value lies in [survival(d_ub), survival(d_lb)].
    pub pvalue_lb: T,
    pub pvalue_ub: T,
}

/// Conservative likelihood-ratio confidence interval for Tr(ρA).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceInterval<T> {
    pub f_lo: T,
    pub f_hi: T,
    pub s: T,
    /// Chi-squared(1) threshold on the statistic at significance s.
    pub t: T,
    /// Reports for the lower and upper endpoint, in that order.
    pub endpoints: [EndpointReport<T>; 2],
}

/// Searches the multiplier in one direction until the endpoint statistic's
/// lower bound lands in [t, t + slack], doubling to bracket then bisecting.
fn search_endpoint<T: Real>(
    data: &Dataset<T>,
    a: &HermitianOperator<T>,
    direction: T,
    t: T,
    l_ref: T,
    r_ref: T,
    stop: &StopSpec<T>,
) -> Result<EndpointReport<T>> {
    let two = T::one() + T::one();
    let d_lb = |fit: &ConstrainedFit<T>| two * (l_ref - fit.loglik - fit.r_phi);
    let limit = real::<T>(LAMBDA_LIMIT);
    let slack = real::<T>(CI_SLACK);

    let mut lo = T::zero();
    let mut magnitude = T::one();
    let mut best = loop {
        let fit = maximize_constrained(data, direction * magnitude, a, stop)?;
        if d_lb(&fit) >= t {
            break fit;
        }
        lo = magnitude;
        magnitude *= two;
        if magnitude > limit {
            return Err(Error::BracketFailure { limit: LAMBDA_LIMIT });
        }
    };

    let mut hi = magnitude;
    for _ in 0..200 {
        if d_lb(&best) <= t + slack {
            break;
        }
        let mid = (lo + hi) * real::<T>(0.5);
        if hi - lo <= real::<T>(1e-12) * hi {
            break; // resolution floor: keep the conservative side
        }
        let fit = maximize_constrained(data, direction * mid, a, stop)?;
        if d_lb(&fit) >= t {
            hi = mid;
            best = fit;
        } else {
            lo = mid;
        }
    }

    let params = Chi2Params::new(1)?;
    let lb = d_lb(&best);
    let ub = two * (l_ref + r_ref - best.loglik);
    Ok(EndpointReport {
        lambda: direction * hi,
        f: best.f_value,
        d_lb: lb,
        d_ub: ub,
        pvalue_lb: chi2_survival(ub.max(T::zero()), params)?,
        pvalue_ub: chi2_survival(lb.max(T::zero()), params)?,
    })
}

/// Builds the conservative confidence interval for f = Tr(ρA) at
/// significance `s` from a converged unconstrained fit: each endpoint is
/// the f-value of a constrained fit whose statistic lower bound has been
/// driven just past the chi-squared(1) threshold.
pub fn expectation_ci<T: Real>(
    data: &Dataset<T>,
    a: &HermitianOperator<T>,
    s: T,
    unconstrained: &FitResult<T>,
    stop: &StopSpec<T>,
) -> Result<ConfidenceInterval<T>> {
    if a.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: a.dim(),
        });
    }
    let t = chi2_quantile(T::one() - s, Chi2Params::new(1)?)?;
    let l_ref = unconstrained.final_loglik();
    let r_ref = unconstrained.final_r;
    // Negative multipliers push f down (lower endpoint), positive up.
    let lower = search_endpoint(data, a, -T::one(), t, l_ref, r_ref, stop)?;
    let upper = search_endpoint(data, a, T::one(), t, l_ref, r_ref, stop)?;
    Ok(ConfidenceInterval {
        f_lo: lower.f,
        f_hi: upper.f,
        s,
        t,
        endpoints: [lower, upper],
    })
}

/// True iff an independently computed exact statistic is sandwiched by the
/// reported bounds at both endpoints.
pub fn sandwich_check<T: Real>(ci: &ConfidenceInterval<T>, exact_d: [T; 2]) -> bool {
    ci.endpoints
        .iter()
        .zip(exact_d)
        .all(|(e, d)| e.d_lb <= d && d <= e.d_ub)
}
