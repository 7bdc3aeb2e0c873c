use lfpclass::basis::{
    coeff_l2_distance, eval_series, forward_transform, reconstruct, CoefficientVector, SampledSignal,
};
use lfpclass::shrinkage::{bjs_estimate, dyadic_blocks, james_stein, pinsker_mu, pinsker_shrink, EllipsoidSpec};
use proptest::prelude::*;

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0f64, 1..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficient_distance_is_function_distance(a in coeffs(15), b in coeffs(15)) {
        let grid = 2048;
        let integral: f64 = (0..grid)
            .map(|l| {
                let x = l as f64 / grid as f64;
                let d = eval_series(&a, x) - eval_series(&b, x);
                d * d
            })
            .sum::<f64>()
            / grid as f64;
        let dist = coeff_l2_distance(
            &CoefficientVector::exact(a).unwrap(),
            &CoefficientVector::exact(b).unwrap(),
        );
        prop_assert!((dist * dist - integral).abs() <= 1e-8 * integral.max(1.0));
    }

    #[test]
    fn forward_transform_is_linear(
        x in prop::collection::vec(-3.0..3.0f64, 64),
        y in prop::collection::vec(-3.0..3.0f64, 64),
        s in -4.0..4.0f64,
    ) {
        let combined: Vec<f64> = x.iter().zip(&y).map(|(a, b)| s * a + b).collect();
        let fx = forward_transform(&SampledSignal::new(x).unwrap(), 10).unwrap();
        let fy = forward_transform(&SampledSignal::new(y).unwrap(), 10).unwrap();
        let fc = forward_transform(&SampledSignal::new(combined).unwrap(), 10).unwrap();
        for k in 0..fc.len() {
            prop_assert!((fc.coeffs()[k] - (s * fx.coeffs()[k] + fy.coeffs()[k])).abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip_recovers_coefficients(c in coeffs(21)) {
        let len = c.len() | 1;
        let mut padded = c.clone();
        padded.resize(len, 0.0);
        let signal = reconstruct(&CoefficientVector::exact(padded.clone()).unwrap(), 128).unwrap();
        let back = forward_transform(&signal, len / 2).unwrap();
        for (a, b) in back.coeffs().iter().zip(&padded) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn shrinkage_never_increases_magnitude(
        y in prop::collection::vec(-20.0..20.0f64, 31),
        eps in 0.05..3.0f64,
        alpha in 0.5..3.0f64,
        radius in 0.5..20.0f64,
    ) {
        let cv = CoefficientVector::new(y.clone(), eps).unwrap();
        let spec = EllipsoidSpec::new(alpha, radius).unwrap();
        let mu = pinsker_mu(&spec, eps).unwrap();
        let pinsker = pinsker_shrink(&cv, &spec, mu).unwrap();
        let bjs = bjs_estimate(&cv, &dyadic_blocks(2, 5).unwrap()).unwrap();
        let js = james_stein(&y, eps).unwrap();
        for k in 0..y.len() {
            prop_assert!(pinsker.coeffs()[k].abs() <= y[k].abs());
            prop_assert!(bjs.coeffs()[k].abs() <= y[k].abs());
            prop_assert!(js[k].abs() <= y[k].abs());
        }
    }

    #[test]
    fn pinsker_support_is_finite(
        eps in 0.001..2.0f64,
        alpha in 0.5..3.0f64,
        radius in 0.5..20.0f64,
    ) {
        let spec = EllipsoidSpec::new(alpha, radius).unwrap();
        let mu = pinsker_mu(&spec, eps).unwrap();
        let len = 401;
        let y = CoefficientVector::new(vec![1.0; len], eps).unwrap();
        let out = pinsker_shrink(&y, &spec, mu).unwrap();
        for (k, v) in out.coeffs().iter().enumerate() {
            if spec.weight(k + 1) >= mu {
                prop_assert_eq!(*v, 0.0);
            }
        }
    }

    #[test]
    fn bjs_scales_pass_through_and_zero_regions(
        y in prop::collection::vec(-5.0..5.0f64, 40),
        lambda in -10.0..10.0f64,
    ) {
        let partition = dyadic_blocks(2, 4).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| lambda * v).collect();
        let a = bjs_estimate(&CoefficientVector::new(y, 0.3).unwrap(), &partition).unwrap();
        let b = bjs_estimate(&CoefficientVector::new(scaled, 0.3).unwrap(), &partition).unwrap();
        let zero_from = partition.coefficient_count();
        for k in 0..a.len() {
            let in_pass = k < 3;
            let in_zero = k >= zero_from;
            if in_pass || in_zero {
                prop_assert!((b.coeffs()[k] - lambda * a.coeffs()[k]).abs() < 1e-12);
            }
            if in_zero {
                prop_assert_eq!(a.coeffs()[k], 0.0);
            }
        }
    }
}
