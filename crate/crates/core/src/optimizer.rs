//! Iterative likelihood maximizers: the R·ρ·R fixed-point iteration and a
//! gradient-ascent variant, instrumented with the per-iteration gap bound
//! and pluggable stopping rules.
//!
//! Both algorithms, with or without a Lagrange term, share one ascent
//! driver: an objective supplies its value, a Hermitian gradient operator G
//! and the scalar offset that turns max eig(G) into the gap bound.

use crate::eig::EigenDecomposition;
use crate::error::{Error, Result};
use crate::likelihood::{loglik_and_r, Dataset};
use crate::quantum::{make_density, trace_distance, DensityMatrix, HermitianOperator, StateVector};
use crate::scalar::{real, Real};

/// Iterations with successive trace distance below the stall threshold
/// before the fit is declared stalled.
pub const STALL_WINDOW: usize = 50;

/// Which update produced an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Rhor,
    GradientAscent,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Rhor => "rhor",
            StepKind::GradientAscent => "gradient_ascent",
        }
    }
}

/// Fit algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Fixed-point update ρ ← GρG / Tr(GρG), safeguarded to never decrease
    /// the objective.
    Rhor,
    /// Line-search ascent toward the top eigenstate of G.
    GradientAscent,
}

/// Why a fit stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    RuleSatisfied,
    MaxIters,
    Stalled,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::RuleSatisfied => "rule_satisfied",
            StopReason::MaxIters => "max_iters",
            StopReason::Stalled => "stalled",
        }
    }
}

/// Per-iteration record. For constrained fits the `loglik` column holds the
/// Lagrangian objective being ascended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord<T> {
    pub k: usize,
    pub loglik: T,
    pub r_k: T,
    /// Trace distance from the previous iterate; absent only when unknown.
    pub trace_dist: Option<T>,
    pub step: StepKind,
    /// Line-search mixing weight; present for gradient steps.
    pub epsilon: Option<T>,
}

/// Stopping rule: threshold on the gap bound, iteration cap, and stall
/// detection on successive trace distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopSpec<T> {
    r_threshold: T,
    max_iters: usize,
    stall_trace_dist: T,
}

impl<T: Real> StopSpec<T> {
    pub fn new(r_threshold: T, max_iters: usize) -> Result<Self> {
        if !(r_threshold > T::zero()) {
            return Err(Error::InvalidParameter("stop threshold must be positive".into()));
        }
        if max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(StopSpec {
            r_threshold,
            max_iters,
            stall_trace_dist: real::<T>(1e-12),
        })
    }

    /// Overrides the stall threshold on successive trace distances.
    pub fn with_stall_distance(mut self, dist: T) -> Result<Self> {
        if !(dist >= T::zero()) {
            return Err(Error::InvalidParameter("stall distance must be nonnegative".into()));
        }
        self.stall_trace_dist = dist;
        Ok(self)
    }

    pub fn r_threshold(&self) -> T {
        self.r_threshold
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }
}

/// Result of an iterative fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub state: DensityMatrix<T>,
    pub trace: Vec<IterationRecord<T>>,
    pub stop_reason: StopReason,
    pub final_r: T,
}

impl<T: Real> FitResult<T> {
    pub fn final_loglik(&self) -> T {
        self.trace.last().expect("a fit runs at least one iteration").loglik
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Objective value, gradient operator and bound offset at one state.
pub(crate) struct Evaluation<T> {
    pub value: T,
    pub gradient: HermitianOperator<T>,
    /// Scalar such that max eig(gradient) − offset bounds the attainable
    /// objective increase from this state.
    pub offset: T,
}

/// A concave objective over density matrices that the ascent driver can
/// maximize.
pub(crate) trait AscentObjective<T: Real> {
    fn dim(&self) -> usize;
    fn evaluate(&self, rho: &DensityMatrix<T>) -> Result<Evaluation<T>>;
    /// Objective value alone; the line search calls this many times.
    fn value(&self, rho: &DensityMatrix<T>) -> Result<T>;
}

/// Plain log-likelihood objective: G = R(ρ), offset = N.
pub(crate) struct LikelihoodObjective<'a, T> {
    pub data: &'a Dataset<T>,
}

impl<T: Real> AscentObjective<T> for LikelihoodObjective<'_, T> {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn evaluate(&self, rho: &DensityMatrix<T>) -> Result<Evaluation<T>> {
        let (value, gradient) = loglik_and_r(self.data, rho)?;
        Ok(Evaluation {
            value,
            gradient,
            offset: self.data.n_scalar(),
        })
    }

    fn value(&self, rho: &DensityMatrix<T>) -> Result<T> {
        crate::likelihood::log_likelihood(self.data, rho)
    }
}

/// Objective value with infeasible states (zero probability on an observed
/// event) mapped to −∞ so the line search can probe the boundary.
fn value_or_neg_inf<T: Real, O: AscentObjective<T>>(obj: &O, rho: &DensityMatrix<T>) -> Result<T> {
    match obj.value(rho) {
        Ok(v) => Ok(v),
        Err(Error::ZeroProbability { .. }) => Ok(T::neg_infinity()),
        Err(e) => Err(e),
    }
}

/// Iteration cap for the golden-section search: 48 shrinkages take the
/// unit interval below the 1e-10 target; the cap also bounds the loop when
/// the scalar type cannot resolve the target.
const LINE_SEARCH_MAX_ITERS: usize = 64;

/// Golden-section maximization of a concave function on [0, 1], returning
/// the best point among all evaluations (including the endpoints), so the
/// result never undercuts the value at 0.
pub(crate) fn golden_section_max<T: Real>(
    mut g: impl FnMut(T) -> Result<T>,
    value_at_zero: T,
    tol: T,
) -> Result<(T, T)> {
    let inv_phi = real::<T>(0.618_033_988_749_894_9);
    let mut best = (T::zero(), value_at_zero);
    let mut track = |x: T, v: T| {
        if v > best.1 {
            best = (x, v);
        }
        v
    };

    let mut a = T::zero();
    let mut b = T::one();
    track(b, g(b)?);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut gc = track(c, g(c)?);
    let mut gd = track(d, g(d)?);
    for _ in 0..LINE_SEARCH_MAX_ITERS {
        if b - a <= tol {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = track(c, g(c)?);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = track(d, g(d)?);
        }
    }
    Ok(best)
}

/// Fixed-point update ρ ← GρG / Tr(GρG), revalidated as a density matrix.
pub(crate) fn fixed_point_update<T: Real>(
    gradient: &HermitianOperator<T>,
    rho: &DensityMatrix<T>,
) -> Result<DensityMatrix<T>> {
    let grg = gradient.matrix().matmul(rho.matrix()).matmul(gradient.matrix());
    let trace = grg.trace_re();
    if !(trace > T::prob_floor()) {
        return Err(Error::DegenerateUpdate);
    }
    make_density(grg.scaled(trace.recip()))
}

/// Line-search step toward the top eigenstate of the gradient operator.
/// Returns the new state and the mixing weight ε.
fn gradient_step<T: Real, O: AscentObjective<T>>(
    obj: &O,
    rho: &DensityMatrix<T>,
    value: T,
    eig: &EigenDecomposition<T>,
) -> Result<(DensityMatrix<T>, T)> {
    let top = eig.values.len() - 1;
    let sigma = DensityMatrix::pure(&StateVector::from_amplitudes_normalized(eig.vector(top))?);
    let tol = real::<T>(1e-10);
    let (eps, _) = golden_section_max(|e| value_or_neg_inf(obj, &rho.mix(&sigma, e)?), value, tol)?;
    Ok((rho.mix(&sigma, eps)?, eps))
}

pub(crate) struct AscentOutcome<T> {
    pub state: DensityMatrix<T>,
    pub records: Vec<IterationRecord<T>>,
    pub stop_reason: StopReason,
    pub final_r: T,
}

/// Iterates the chosen algorithm until the stopping rule fires. The
/// objective value never decreases: fixed-point updates that would lower it
/// fall back to a line-search step, as does a gradient operator whose top
/// eigenvalue makes the fixed-point update degenerate.
pub(crate) fn ascend<T: Real, O: AscentObjective<T>>(
    obj: &O,
    algo: Algorithm,
    stop: &StopSpec<T>,
    rho0: DensityMatrix<T>,
) -> Result<AscentOutcome<T>> {
    if rho0.dim() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: obj.dim(),
            found: rho0.dim(),
        });
    }
    let mut rho = rho0;
    let mut eval = obj.evaluate(&rho)?;
    let mut eig = eval.gradient.eigendecomposition()?;

    let mut records = Vec::new();
    let mut stall_run = 0usize;
    let mut stop_reason = StopReason::MaxIters;
    let mut final_r = T::nan();

    for k in 1..=stop.max_iters {
        let (next, kind, eps) = match algo {
            Algorithm::GradientAscent => {
                let (next, eps) = gradient_step(obj, &rho, eval.value, &eig)?;
                (next, StepKind::GradientAscent, Some(eps))
            }
            Algorithm::Rhor => {
                // A non-positive top eigenvalue starves the fixed-point
                // update of its ascent direction.
                let candidate = if eig.max_value() > T::zero() {
                    fixed_point_update(&eval.gradient, &rho).ok()
                } else {
                    None
                };
                let accepted = match candidate {
                    Some(cand) => {
                        let v = value_or_neg_inf(obj, &cand)?;
                        if v >= eval.value {
                            Some(cand)
                        } else {
                            None
                        }
                    }
                    None => None,
                };
                match accepted {
                    Some(next) => (next, StepKind::Rhor, None),
                    None => {
                        let (next, eps) = gradient_step(obj, &rho, eval.value, &eig)?;
                        (next, StepKind::GradientAscent, Some(eps))
                    }
                }
            }
        };

        let dist = trace_distance(&rho, &next)?;
        rho = next;
        eval = obj.evaluate(&rho)?;
        eig = eval.gradient.eigendecomposition()?;
        let r = eig.max_value() - eval.offset;
        final_r = r;
        records.push(IterationRecord {
            k,
            loglik: eval.value,
            r_k: r,
            trace_dist: Some(dist),
            step: kind,
            epsilon: eps,
        });

        if r <= stop.r_threshold {
            stop_reason = StopReason::RuleSatisfied;
            break;
        }
        if dist < stop.stall_trace_dist {
            stall_run += 1;
            if stall_run >= STALL_WINDOW {
                stop_reason = StopReason::Stalled;
                break;
            }
        } else {
            stall_run = 0;
        }
    }

    Ok(AscentOutcome {
        state: rho,
        records,
        stop_reason,
        final_r,
    })
}

/// One fixed-point update ρ ← R(ρ)·ρ·R(ρ) / Tr[·], revalidated.
pub fn rhor_step<T: Real>(data: &Dataset<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    let r = crate::likelihood::r_matrix(data, rho)?;
    fixed_point_update(&r, rho)
}

/// One gradient-ascent step: mixes ρ toward the top eigenstate of R(ρ) with
/// the line-search-optimal weight. Never decreases the log-likelihood.
pub fn gradient_ascent_step<T: Real>(
    data: &Dataset<T>,
    rho: &DensityMatrix<T>,
) -> Result<(DensityMatrix<T>, T)> {
    let obj = LikelihoodObjective { data };
    let eval = obj.evaluate(rho)?;
    let eig = eval.gradient.eigendecomposition()?;
    gradient_step(&obj, rho, eval.value, &eig)
}

/// Runs the chosen algorithm from `rho0` (maximally mixed when absent)
/// until the stopping rule fires, recording the full iteration trace.
pub fn maximize<T: Real>(
    data: &Dataset<T>,
    algo: Algorithm,
    stop: &StopSpec<T>,
    rho0: Option<DensityMatrix<T>>,
) -> Result<FitResult<T>> {
    let rho0 = match rho0 {
        Some(r) => r,
        None => DensityMatrix::maximally_mixed(data.dim())?,
    };
    let outcome = ascend(&LikelihoodObjective { data }, algo, stop, rho0)?;
    Ok(FitResult {
        state: outcome.state,
        trace: outcome.records,
        stop_reason: outcome.stop_reason,
        final_r: outcome.final_r,
    })
}
