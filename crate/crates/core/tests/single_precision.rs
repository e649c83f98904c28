//! The core is generic over the scalar; this exercises the f32
//! instantiation end to end with single-precision tolerances.

use num_complex::Complex;

use qtomo::confidence::{chi2_quantile, Chi2Params};
use qtomo::likelihood::{gradient_bound, log_likelihood, Dataset, PovmElement};
use qtomo::matrix::ComplexMatrix;
use qtomo::optimizer::{maximize, Algorithm, StopSpec};
use qtomo::quantum::{coherent_state, make_density, trace_distance, HermitianOperator};

#[test]
fn single_precision_pipeline() {
    let p0 = HermitianOperator::<f32>::new(ComplexMatrix::diagonal(&[1.0f32, 0.0])).unwrap();
    let p1 = HermitianOperator::<f32>::new(ComplexMatrix::diagonal(&[0.0f32, 1.0])).unwrap();
    let data = Dataset::new(vec![
        PovmElement::new(p0, 3).unwrap(),
        PovmElement::new(p1, 1).unwrap(),
    ])
    .unwrap();

    let stop = StopSpec::new(1e-3f32, 10_000).unwrap();
    let fit = maximize(&data, Algorithm::Rhor, &stop, None).unwrap();
    let ml = make_density(ComplexMatrix::diagonal(&[0.75f32, 0.25])).unwrap();
    assert!(trace_distance(&fit.state, &ml).unwrap() < 1e-3);
    assert!(gradient_bound(&data, &fit.state).unwrap() <= 1e-3);
    assert!((log_likelihood(&data, &ml).unwrap() - (-2.2493f32)).abs() < 1e-3);

    let q = chi2_quantile(0.95f32, Chi2Params::new(1).unwrap()).unwrap();
    assert!((q - 3.84).abs() < 0.02, "quantile {q}");

    let state = coherent_state(Complex::new(1.0f32, 0.0), 12).unwrap();
    let norm_sq: f32 = state.amplitudes().iter().map(|a| a.norm_sqr()).sum();
    assert!((norm_sq - 1.0).abs() < 1e-5);
}
