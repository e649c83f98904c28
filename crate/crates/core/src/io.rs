//! Serialization formats: complex matrices, datasets, scenarios, fit
//! results, iteration-trace CSV, interval and region reports.
//!
//! Complex matrices serialize as nested arrays of [re, im] pairs,
//! row-major; every other format builds on that. Homodyne datasets have a
//! compact record form and materialize POVM elements on load.

use num_complex::Complex;
use serde_json::{json, Map, Value};

use crate::confidence::RegionReport;
use crate::constrained::ConfidenceInterval;
use crate::error::Error;
use crate::homodyne::{dataset_from_records, HomodyneRecord, Scenario};
use crate::likelihood::{Dataset, PovmElement};
use crate::matrix::ComplexMatrix;
use crate::optimizer::{FitResult, IterationRecord, StopReason};
use crate::quantum::{make_density, DensityMatrix, HermitianOperator};
use crate::scalar::{to_f64, Real};

/// Errors raised while encoding or decoding files.
#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unexpected document shape: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl IoError {
    pub fn code(&self) -> &'static str {
        match self {
            IoError::Json(_) => "malformed_json",
            IoError::Format(_) => "unexpected_format",
            IoError::Core(e) => e.code(),
        }
    }
}

type IoResult<T> = Result<T, IoError>;

fn format_err(msg: impl Into<String>) -> IoError {
    IoError::Format(msg.into())
}

fn as_object<'a>(value: &'a Value, what: &str) -> IoResult<&'a Map<String, Value>> {
    value.as_object().ok_or_else(|| format_err(format!("{what} must be a JSON object")))
}

fn get<'a>(map: &'a Map<String, Value>, key: &str) -> IoResult<&'a Value> {
    map.get(key).ok_or_else(|| format_err(format!("missing field \"{key}\"")))
}

fn scalar_from<T: Real>(value: &Value, what: &str) -> IoResult<T> {
    let x = value.as_f64().ok_or_else(|| format_err(format!("{what} must be a number")))?;
    T::from_f64(x).ok_or_else(|| format_err(format!("{what} out of range")))
}

fn usize_from(value: &Value, what: &str) -> IoResult<usize> {
    value
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| format_err(format!("{what} must be a nonnegative integer")))
}

fn complex_from<T: Real>(value: &Value, what: &str) -> IoResult<Complex<T>> {
    let pair = value.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
        format_err(format!("{what} must be a two-element [re, im] array"))
    })?;
    Ok(Complex::new(
        scalar_from(&pair[0], what)?,
        scalar_from(&pair[1], what)?,
    ))
}

fn number<T: Real>(x: T) -> Value {
    json!(to_f64(x))
}

/// Encodes a matrix as nested rows of [re, im] pairs.
pub fn matrix_to_value<T: Real>(m: &ComplexMatrix<T>) -> Value {
    let rows: Vec<Value> = (0..m.dim())
        .map(|i| {
            let row: Vec<Value> = (0..m.dim())
                .map(|j| json!([to_f64(m[(i, j)].re), to_f64(m[(i, j)].im)]))
                .collect();
            Value::Array(row)
        })
        .collect();
    Value::Array(rows)
}

pub fn matrix_from_value<T: Real>(value: &Value) -> IoResult<ComplexMatrix<T>> {
    let rows = value
        .as_array()
        .ok_or_else(|| format_err("matrix must be an array of rows"))?;
    let parsed: Vec<Vec<Complex<T>>> = rows
        .iter()
        .map(|row| {
            row.as_array()
                .ok_or_else(|| format_err("matrix row must be an array"))?
                .iter()
                .map(|entry| complex_from(entry, "matrix entry"))
                .collect()
        })
        .collect::<IoResult<_>>()?;
    Ok(ComplexMatrix::from_rows(parsed)?)
}

/// Decodes and validates a Hermitian operator.
pub fn hermitian_from_value<T: Real>(value: &Value) -> IoResult<HermitianOperator<T>> {
    Ok(HermitianOperator::new(matrix_from_value(value)?)?)
}

/// Decodes and validates a density matrix.
pub fn density_from_value<T: Real>(value: &Value) -> IoResult<DensityMatrix<T>> {
    Ok(make_density(matrix_from_value(value)?)?)
}

/// Encodes a generic POVM dataset.
pub fn dataset_to_value<T: Real>(data: &Dataset<T>) -> Value {
    json!({
        "dim": data.dim(),
        "elements": data
            .elements()
            .iter()
            .map(|e| json!({ "op": matrix_to_value(e.op().matrix()), "weight": e.weight() }))
            .collect::<Vec<_>>(),
    })
}

/// Encodes a homodyne dataset in the compact record form.
pub fn homodyne_dataset_to_value<T: Real>(records: &[HomodyneRecord<T>], efficiency: T, dim: usize) -> Value {
    json!({
        "kind": "homodyne",
        "dim": dim,
        "efficiency": to_f64(efficiency),
        "records": records
            .iter()
            .map(|r| json!([to_f64(r.theta), to_f64(r.x)]))
            .collect::<Vec<_>>(),
    })
}

/// Decodes either dataset form, validating every invariant; homodyne
/// records are materialized into weight-1 POVM elements.
pub fn dataset_from_value<T: Real>(value: &Value) -> IoResult<Dataset<T>> {
    let map = as_object(value, "dataset")?;
    match map.get("kind").and_then(Value::as_str) {
        Some("homodyne") => {
            let dim = usize_from(get(map, "dim")?, "dim")?;
            let efficiency: T = scalar_from(get(map, "efficiency")?, "efficiency")?;
            let entries = get(map, "records")?
                .as_array()
                .ok_or_else(|| format_err("\"records\" must be an array"))?;
            let records: Vec<HomodyneRecord<T>> = entries
                .iter()
                .map(|entry| {
                    let pair = entry
                        .as_array()
                        .filter(|a| a.len() == 2)
                        .ok_or_else(|| format_err("record must be a [theta, x] pair"))?;
                    Ok(HomodyneRecord::new(
                        scalar_from(&pair[0], "theta")?,
                        scalar_from(&pair[1], "x")?,
                    )?)
                })
                .collect::<IoResult<_>>()?;
            Ok(dataset_from_records(&records, efficiency, dim)?)
        }
        Some(other) => Err(format_err(format!("unknown dataset kind \"{other}\""))),
        None => {
            let dim = usize_from(get(map, "dim")?, "dim")?;
            let entries = get(map, "elements")?
                .as_array()
                .ok_or_else(|| format_err("\"elements\" must be an array"))?;
            let elements: Vec<PovmElement<T>> = entries
                .iter()
                .map(|entry| {
                    let emap = as_object(entry, "element")?;
                    let op = hermitian_from_value(get(emap, "op")?)?;
                    let weight = get(emap, "weight")?
                        .as_u64()
                        .ok_or_else(|| format_err("\"weight\" must be a positive integer"))?;
                    Ok(PovmElement::new(op, weight)?)
                })
                .collect::<IoResult<_>>()?;
            let data = Dataset::new(elements)?;
            if data.dim() != dim {
                return Err(format_err(format!(
                    "declared dim {dim} does not match element dimension {}",
                    data.dim()
                )));
            }
            Ok(data)
        }
    }
}

pub fn scenario_to_value<T: Real>(s: &Scenario<T>) -> Value {
    json!({
        "alpha": [to_f64(s.alpha.re), to_f64(s.alpha.im)],
        "transmissivity": to_f64(s.transmissivity),
        "efficiency": to_f64(s.efficiency),
        "dim": s.dim,
        "n_samples": s.n_samples,
        "phases": s.phases.iter().map(|&p| to_f64(p)).collect::<Vec<_>>(),
        "seed": s.seed,
    })
}

pub fn scenario_from_value<T: Real>(value: &Value) -> IoResult<Scenario<T>> {
    let map = as_object(value, "scenario")?;
    let phases = get(map, "phases")?
        .as_array()
        .ok_or_else(|| format_err("\"phases\" must be an array"))?
        .iter()
        .map(|p| scalar_from(p, "phase"))
        .collect::<IoResult<Vec<T>>>()?;
    Ok(Scenario::new(
        complex_from(get(map, "alpha")?, "alpha")?,
        scalar_from(get(map, "transmissivity")?, "transmissivity")?,
        scalar_from(get(map, "efficiency")?, "efficiency")?,
        usize_from(get(map, "dim")?, "dim")?,
        get(map, "n_samples")?
            .as_u64()
            .ok_or_else(|| format_err("\"n_samples\" must be a nonnegative integer"))?,
        phases,
        get(map, "seed")?
            .as_u64()
            .ok_or_else(|| format_err("\"seed\" must be a nonnegative integer"))?,
    )?)
}

pub fn fit_to_value<T: Real>(fit: &FitResult<T>) -> Value {
    json!({
        "dim": fit.state.dim(),
        "stop_reason": fit.stop_reason.as_str(),
        "iterations": fit.trace.len(),
        "final_r": to_f64(fit.final_r),
        "final_loglik": to_f64(fit.final_loglik()),
        "state": matrix_to_value(fit.state.matrix()),
    })
}

/// Reads the reference log-likelihood from a stored fit result.
pub fn reference_loglik_from_value<T: Real>(value: &Value) -> IoResult<T> {
    let map = as_object(value, "fit result")?;
    scalar_from(get(map, "final_loglik")?, "final_loglik")
}

/// Reads (dim, final_r) from a stored fit result, for region reports.
pub fn fit_summary_from_value(value: &Value) -> IoResult<(usize, f64)> {
    let map = as_object(value, "fit result")?;
    let dim = usize_from(get(map, "dim")?, "dim")?;
    let final_r = get(map, "final_r")?
        .as_f64()
        .ok_or_else(|| format_err("\"final_r\" must be a number"))?;
    Ok((dim, final_r))
}

pub fn interval_to_value<T: Real>(ci: &ConfidenceInterval<T>) -> Value {
    json!({
        "f_lo": to_f64(ci.f_lo),
        "f_hi": to_f64(ci.f_hi),
        "s": to_f64(ci.s),
        "t": to_f64(ci.t),
        "endpoints": ci
            .endpoints
            .iter()
            .map(|e| {
                json!({
                    "lambda": to_f64(e.lambda),
                    "f": to_f64(e.f),
                    "D_lb": to_f64(e.d_lb),
                    "D_ub": to_f64(e.d_ub),
                    "pvalue_lb": to_f64(e.pvalue_lb),
                    "pvalue_ub": to_f64(e.pvalue_ub),
                })
            })
            .collect::<Vec<_>>(),
    })
}

pub fn region_report_to_value<T: Real>(report: &RegionReport<T>) -> Value {
    json!({
        "threshold_t": number(report.threshold_t),
        "nominal_pvalue": number(report.nominal_pvalue),
        "worst_case_pvalue": number(report.worst_case_pvalue),
    })
}

/// CSV header without a reference column.
pub const TRACE_HEADER: &str = "k,loglik,r_k,trace_dist,step,epsilon";

/// Renders the iteration trace as CSV. With a reference log-likelihood, a
/// trailing `gap` column holds reference − loglik per iteration.
pub fn trace_to_csv<T: Real>(records: &[IterationRecord<T>], reference_loglik: Option<T>) -> String {
    let mut out = String::from(TRACE_HEADER);
    if reference_loglik.is_some() {
        out.push_str(",gap");
    }
    out.push('\n');
    for rec in records {
        let dist = rec.trace_dist.map(|d| format!("{:e}", to_f64(d))).unwrap_or_default();
        let eps = rec.epsilon.map(|e| format!("{:e}", to_f64(e))).unwrap_or_default();
        out.push_str(&format!(
            "{},{:e},{:e},{},{},{}",
            rec.k,
            to_f64(rec.loglik),
            to_f64(rec.r_k),
            dist,
            rec.step.as_str(),
            eps
        ));
        if let Some(reference) = reference_loglik {
            out.push_str(&format!(",{:e}", to_f64(reference - rec.loglik)));
        }
        out.push('\n');
    }
    out
}

/// Parses a stop reason serialized by [`StopReason::as_str`].
pub fn stop_reason_from_str(s: &str) -> IoResult<StopReason> {
    match s {
        "rule_satisfied" => Ok(StopReason::RuleSatisfied),
        "max_iters" => Ok(StopReason::MaxIters),
        "stalled" => Ok(StopReason::Stalled),
        other => Err(format_err(format!("unknown stop reason \"{other}\""))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homodyne::{sample_records, scenario_truth, uniform_phases};
    use crate::likelihood::test_support::qubit_three_one;
    use crate::optimizer::{maximize, Algorithm, StopSpec};

    #[test]
    fn matrix_round_trip() {
        let m = ComplexMatrix::<f64>::from_fn(3, |i, j| {
            Complex::new(i as f64 + 0.25, j as f64 - 1.5)
        });
        let v = matrix_to_value(&m);
        let back: ComplexMatrix<f64> = matrix_from_value(&v).unwrap();
        assert_eq!(m, back);

        let ragged = json!([[ [1.0, 0.0] ], [ [0.0, 0.0], [1.0, 0.0] ]]);
        assert!(matrix_from_value::<f64>(&ragged).is_err());
    }

    #[test]
    fn dataset_round_trip_validates() {
        let data = qubit_three_one();
        let v = dataset_to_value(&data);
        let back: Dataset<f64> = dataset_from_value(&v).unwrap();
        assert_eq!(back.n_total(), 4);
        assert_eq!(back.dim(), 2);

        // A non-PSD element must be rejected by the loader.
        let bad = json!({
            "dim": 2,
            "elements": [ { "op": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[-0.5,0.0]]], "weight": 1 } ],
        });
        match dataset_from_value::<f64>(&bad) {
            Err(IoError::Core(Error::NotPositive { .. })) => {}
            other => panic!("expected NotPositive, got {other:?}"),
        }
        let mismatched = json!({
            "dim": 3,
            "elements": [ { "op": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[0.5,0.0]]], "weight": 1 } ],
        });
        assert!(dataset_from_value::<f64>(&mismatched).is_err());
    }

    #[test]
    fn homodyne_dataset_round_trip() {
        let scenario = Scenario::<f64>::lossy_cat_demo(40, 5);
        let truth = scenario_truth(&scenario).unwrap();
        let records = sample_records(&scenario, &truth).unwrap();
        let v = homodyne_dataset_to_value(&records, scenario.efficiency, scenario.dim);
        let data: Dataset<f64> = dataset_from_value(&v).unwrap();
        assert_eq!(data.n_total(), 40);
        assert_eq!(data.dim(), 11);
        let direct = dataset_from_records(&records, scenario.efficiency, scenario.dim).unwrap();
        assert_eq!(data, direct);

        let bad_phase = json!({
            "kind": "homodyne", "dim": 4, "efficiency": 0.9,
            "records": [[4.0, 0.5]],
        });
        assert!(dataset_from_value::<f64>(&bad_phase).is_err());
    }

    #[test]
    fn scenario_round_trip() {
        let scenario = Scenario::<f64>::new(
            Complex::new(1.0, -0.5),
            0.8,
            0.9,
            11,
            1000,
            uniform_phases(8),
            99,
        )
        .unwrap();
        let v = scenario_to_value(&scenario);
        let back: Scenario<f64> = scenario_from_value(&v).unwrap();
        assert_eq!(scenario, back);
        assert!(scenario_from_value::<f64>(&json!({ "alpha": [1.0, 0.0] })).is_err());
    }

    #[test]
    fn fit_export_and_trace_csv() {
        let data = qubit_three_one();
        let stop = StopSpec::new(1e-6, 1000).unwrap();
        let fit = maximize(&data, Algorithm::Rhor, &stop, None).unwrap();
        let v = fit_to_value(&fit);
        let (dim, final_r) = fit_summary_from_value(&v).unwrap();
        assert_eq!(dim, 2);
        assert!(final_r <= 1e-6);
        let reference: f64 = reference_loglik_from_value(&v).unwrap();
        assert_eq!(reference, fit.final_loglik());
        let state: DensityMatrix<f64> = density_from_value(v.get("state").unwrap()).unwrap();
        assert_eq!(state.dim(), 2);

        let csv = trace_to_csv(&fit.trace, None);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(TRACE_HEADER));
        let first = lines.next().unwrap();
        assert!(first.starts_with("1,"));
        assert_eq!(csv.lines().count(), fit.trace.len() + 1);

        let with_gap = trace_to_csv(&fit.trace, Some(reference));
        assert!(with_gap.lines().next().unwrap().ends_with(",gap"));
        // Final gap is reference minus final loglik = 0.
        assert!(with_gap.trim_end().lines().last().unwrap().ends_with(",0e0"));
    }

    #[test]
    fn stop_reason_parsing() {
        assert_eq!(stop_reason_from_str("rule_satisfied").unwrap(), StopReason::RuleSatisfied);
        assert_eq!(stop_reason_from_str("max_iters").unwrap(), StopReason::MaxIters);
        assert_eq!(stop_reason_from_str("stalled").unwrap(), StopReason::Stalled);
        assert!(stop_reason_from_str("nope").is_err());
    }
}
