use num_complex::Complex64;
use proptest::prelude::*;

use wellfilt::adaptive::{denoise_point_with, DenoiseSetup};
use wellfilt::field::{dft, idft, norm, star_norm, Field, Filter, GridBox, Norm};
use wellfilt::harness::{sample_noise, NoiseSpec};
use wellfilt::signals::{exp_poly_filter, ExpPolynomial, Monomial};
use wellfilt::solver::{project_l1_ball, SolverOptions};

fn complex() -> impl Strategy<Value = Complex64> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn field_on(d: usize, t: usize) -> impl Strategy<Value = Field> {
    let b = GridBox::centered(d, t);
    proptest::collection::vec(complex(), b.len()).prop_map(move |v| Field::from_vec(b.clone(), v).unwrap())
}

fn dim_order() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=2, 0usize..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_is_unitary_and_invertible(x in dim_order().prop_flat_map(|(d, t)| field_on(d, t).prop_map(move |f| (t, f)))) {
        let (t, x) = x;
        let back = idft(&dft(&x, t).unwrap());
        let scale = norm(&x, t, Norm::L2).unwrap().max(1.0);
        prop_assert!(back.max_abs_diff(&x).unwrap() <= 1e-12 * scale);
        prop_assert!((star_norm(&x, t, Norm::L2).unwrap() - norm(&x, t, Norm::L2).unwrap()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn filter_product_commutes_and_bounds_l1(
        a in (0usize..=3).prop_flat_map(|t| field_on(2, t).prop_map(move |f| (t, f))),
        b in (0usize..=3).prop_flat_map(|t| field_on(2, t).prop_map(move |f| (t, f))),
    ) {
        let qa = Filter::two_sided(a.1, a.0).unwrap();
        let qb = Filter::two_sided(b.1, b.0).unwrap();
        let ab = qa.product(&qb).unwrap();
        let ba = qb.product(&qa).unwrap();
        let scale = qa.norm(Norm::L1) * qb.norm(Norm::L1);
        prop_assert_eq!(ab.order(), a.0 + b.0);
        for (p, v) in ab.field().iter() {
            prop_assert!((v - ba.coefficient(&p)).norm() <= 1e-12 * scale.max(1.0));
        }
        prop_assert!(ab.norm(Norm::L1) <= scale * (1.0 + 1e-12));
    }

    #[test]
    fn projection_lands_in_the_ball_and_is_nearest(
        z in proptest::collection::vec(complex(), 1..12),
        radius in 0.01..20.0f64,
        probes in proptest::collection::vec(proptest::collection::vec(complex(), 12), 8),
    ) {
        let mut p = z.clone();
        project_l1_ball(&mut p, radius);
        let l1: f64 = p.iter().map(|v| v.norm()).sum();
        prop_assert!(l1 <= radius * (1.0 + 1e-12));
        let dist = |w: &[Complex64]| z.iter().zip(w).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
        let mut again = p.clone();
        project_l1_ball(&mut again, radius);
        prop_assert!(dist(&again) <= dist(&p) + 1e-9);
        for probe in probes {
            let mut w: Vec<Complex64> = probe[..z.len()].to_vec();
            let s: f64 = w.iter().map(|v| v.norm()).sum();
            if s > radius {
                w.iter_mut().for_each(|v| *v *= radius / s);
            }
            prop_assert!(dist(&p) <= dist(&w) + 1e-9 * (1.0 + dist(&w)));
        }
    }

    #[test]
    fn certificate_filter_does_not_depend_on_coefficients(
        c1 in complex(), c2 in complex(), w1 in -3.0..3.0f64, w2 in -3.0..3.0f64, t in 2usize..=8,
    ) {
        prop_assume!((w1 - w2).abs() > 1e-3);
        let shape = |a: Complex64, b: Complex64| ExpPolynomial::new(vec![
            Monomial::exponential(a, vec![Complex64::new(0.0, w1)]),
            Monomial::exponential(b, vec![Complex64::new(0.0, w2)]),
        ]).unwrap();
        let q = exp_poly_filter(&shape(c1, c2), t).unwrap();
        let r = exp_poly_filter(&shape(Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.5)), t).unwrap();
        prop_assert_eq!(q, r);
    }

    #[test]
    fn noise_is_local_to_points(seed in any::<u64>(), lo in -20i64..20, w in 0i64..6, shift in -5i64..5) {
        let spec = NoiseSpec { sigma: 1.0, seed };
        let inner = GridBox::new(vec![lo, lo], vec![lo + w, lo + w]).unwrap();
        let outer = GridBox::new(vec![lo - 3 + shift.min(0), lo - 3], vec![lo + w + 3 + shift.max(0), lo + w + 3]).unwrap();
        let a = sample_noise(&inner, &spec);
        let b = sample_noise(&outer, &spec).restrict(&inner).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn denoising_is_translation_equivariant(
        data in proptest::collection::vec(complex(), 17),
        shift in -50i64..50,
        t in 1usize..=2,
    ) {
        let y = Field::from_vec(GridBox::centered(1, 8), data).unwrap();
        let moved = y.shift(&[shift]);
        let setup = DenoiseSetup::filtering(1.5, t).unwrap();
        let opts = SolverOptions { tol: 1e-6, max_iter: 50_000, check_every: 64 };
        let a = denoise_point_with(&y, &[0], &setup, &opts);
        let b = denoise_point_with(&moved, &[shift], &setup, &opts);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.value, b.value),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "only one of the shifted problems converged"),
        }
    }
}
