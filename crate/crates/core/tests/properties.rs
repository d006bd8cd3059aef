use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use poincare_linf::flat::pairing::weak_closedness_residual;
use poincare_linf::flat::simplex::{boundary_integral, integrate_over_simplex, Simplex};
use poincare_linf::flat::{
    flatness_check, iterative_primitive, mollify, sample, FlatnessOptions, GridForm, GridFormJson, IterativeOptions,
};
use poincare_linf::form::{PolyFormJson, MultiIndex};
use poincare_linf::poincare::{
    bounded_primitive, closed_approx, closed_approx_with, NormCertificate, NormCertificateJson, PoincareOptions,
    TauRule,
};
use poincare_linf::random::{random_closed_form, random_form, random_map, RandomFormParams};
use poincare_linf::rational::{abs, rat};
use poincare_linf::supnorm::{bernstein_bound, bernstein_bound_form, sup_norm};
use poincare_linf::{Cube, PolyForm, Rational};

fn params() -> RandomFormParams {
    RandomFormParams { max_degree_per_var: 3, max_terms: 3, bound: 10, max_den: 9 }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed plus ambient dimension and a degree in `0..=n`.
fn shape(max_n: usize) -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1..=max_n).prop_flat_map(|(seed, n)| (Just(seed), Just(n), 0..=n))
}

fn sign(p: usize) -> Rational {
    if p.is_multiple_of(2) {
        rat(1, 1)
    } else {
        rat(-1, 1)
    }
}

fn random_point(r: &mut ChaCha8Rng, cube: &Cube) -> Vec<Rational> {
    (0..cube.dim()).map(|a| &cube.lo()[a] + cube.length(a) * rat(r.random_range(0..=1024), 1024)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_squared_vanishes((seed, n, k) in shape(4)) {
        let w = random_form(&mut rng(seed), n, k, &params());
        prop_assert!(w.d().d().is_zero());
    }

    #[test]
    fn wedge_graded_commutative((seed, n, p) in shape(4), q in 0usize..=4) {
        let q = q.min(n - p);
        let mut r = rng(seed);
        let a = random_form(&mut r, n, p, &params());
        let b = random_form(&mut r, n, q, &params());
        prop_assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().scale(&sign(p * q)));
    }

    #[test]
    fn leibniz_rule((seed, n, p) in shape(4), q in 0usize..=4) {
        let q = q.min(n - p);
        let mut r = rng(seed);
        let a = random_form(&mut r, n, p, &params());
        let b = random_form(&mut r, n, q, &params());
        let rhs = a.d().wedge(&b).unwrap().add(&a.wedge(&b.d()).unwrap().scale(&sign(p))).unwrap();
        prop_assert_eq!(a.wedge(&b).unwrap().d(), rhs);
    }

    #[test]
    fn split_last_round_trip((seed, n, k) in shape(4)) {
        let w = random_form(&mut rng(seed), n, k, &params());
        let (w1, w2) = w.split_last();
        for (index, _) in w2.terms() {
            prop_assert!(!index.contains(n - 1));
        }
        let rebuilt = match w1 {
            Some(w1) => w1.wedge(&PolyForm::dx(n, n - 1)).unwrap().add(&w2).unwrap(),
            None => w2,
        };
        prop_assert_eq!(rebuilt, w);
    }

    #[test]
    fn fiber_integral_is_right_inverse_of_partial((seed, n, k) in shape(4), num in -4i64..=4) {
        let w = random_form(&mut rng(seed), n, k, &params());
        let (_, w2) = w.split_last();
        let tau = rat(num, 4);
        let integral = w2.fiber_integrate(n - 1, &tau).unwrap();
        prop_assert_eq!(integral.partial(n - 1), w2);
        if n > 1 {
            prop_assert!(integral.restrict(n - 1, &tau).unwrap().is_zero());
        }
    }

    #[test]
    fn pullback_commutes_with_d(seed in any::<u64>(), src in 1usize..=3, m in 1usize..=3, k in 0usize..=3) {
        let small = RandomFormParams { max_degree_per_var: 2, ..params() };
        let mut r = rng(seed);
        let k = k.min(m);
        let phi = random_map(&mut r, src, m, &small);
        let w = random_form(&mut r, m, k, &small);
        prop_assert_eq!(w.pullback(&phi).unwrap().d(), w.d().pullback(&phi).unwrap());
    }

    #[test]
    fn bernstein_bound_dominates_samples((seed, n, k) in shape(3)) {
        let mut r = rng(seed);
        let w = random_form(&mut r, n, k, &params());
        let cube = Cube::new(vec![rat(-1, 2); n], vec![rat(3, 4); n]).unwrap();
        let bound = sup_norm(&w, &cube, 3).unwrap();
        prop_assert!(bound.lower <= bound.upper);
        for _ in 0..200 {
            let x = random_point(&mut r, &cube);
            for (_, v) in w.eval(&x) {
                prop_assert!(abs(&v) <= bound.upper);
            }
        }
    }

    #[test]
    fn upper_bound_is_subadditive((seed, n, k) in shape(3)) {
        let mut r = rng(seed);
        let a = random_form(&mut r, n, k, &params());
        let b = random_form(&mut r, n, k, &params());
        let cube = Cube::unit(n);
        let sum = bernstein_bound_form(&a.add(&b).unwrap(), &cube, 0);
        prop_assert!(sum <= bernstein_bound_form(&a, &cube, 0) + bernstein_bound_form(&b, &cube, 0));
    }

    #[test]
    fn bisection_never_loosens_the_bound((seed, n, _k) in shape(3)) {
        let w = random_form(&mut rng(seed), n, 0, &params());
        let p = w.coefficient(&MultiIndex::empty());
        let cube = Cube::unit(n);
        let coarse = bernstein_bound(&p, &cube, 0);
        let fine = bernstein_bound(&p, &cube, 1);
        let finer = bernstein_bound(&p, &cube, 2);
        prop_assert!(fine <= coarse && finer <= fine);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounded_primitive_is_exact((seed, n, k) in shape(4)) {
        prop_assume!(k >= 1);
        let w = random_closed_form(&mut rng(seed), n, k, &params());
        let p = bounded_primitive(&w, &Cube::unit(n)).unwrap();
        prop_assert_eq!(p.theta.d(), w);
        prop_assert!(p.certificate.verified);
    }

    #[test]
    fn closed_forms_are_fixed_points((seed, n, k) in shape(4)) {
        prop_assume!(k >= 1);
        let w = random_closed_form(&mut rng(seed), n, k, &params());
        prop_assert_eq!(closed_approx(&w, &Cube::unit(n)).unwrap().wprime, w);
    }

    #[test]
    fn closed_approx_is_closed_on_shifted_cubes((seed, n, k) in shape(3), shift in -3i64..=3) {
        let w = random_form(&mut rng(seed), n, k, &params());
        let cube = Cube::new(vec![rat(shift, 2); n], vec![rat(shift + 3, 2); n]).unwrap();
        let c = closed_approx(&w, &cube).unwrap();
        prop_assert!(c.wprime.d().is_zero());
        prop_assert!(c.certificate.verified);
    }

    #[test]
    fn tau_scan_never_worse((seed, n, k) in shape(3)) {
        let w = random_form(&mut rng(seed), n, k, &params());
        let cube = Cube::unit(n);
        let mid = closed_approx(&w, &cube).unwrap();
        let opts = PoincareOptions { tau: TauRule::Scan { candidates: 4 }, ..PoincareOptions::default() };
        let scan = closed_approx_with(&w, &cube, &opts).unwrap();
        prop_assert!(scan.certificate.lhs().upper <= mid.certificate.lhs().upper);
        prop_assert!(scan.wprime.d().is_zero());
    }

    #[test]
    fn polyform_json_round_trip((seed, n, k) in shape(4)) {
        let w = random_form(&mut rng(seed), n, k, &params());
        let text = serde_json::to_string(&PolyFormJson::from(&w)).unwrap();
        let back: PolyFormJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(PolyForm::try_from(&back).unwrap(), w);
    }

    #[test]
    fn certificate_json_round_trip((seed, n, k) in shape(3)) {
        prop_assume!(k >= 1);
        let w = random_closed_form(&mut rng(seed), n, k, &params());
        let cert = bounded_primitive(&w, &Cube::unit(n)).unwrap().certificate;
        let text = serde_json::to_string(&NormCertificateJson::from(&cert)).unwrap();
        let back: NormCertificateJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(NormCertificate::try_from(&back).unwrap(), cert);
    }
}

fn random_simplex(r: &mut ChaCha8Rng, n: usize, m: usize) -> Option<Simplex> {
    let center: Vec<f64> = (0..n).map(|_| r.random_range(0.3..0.7)).collect();
    let scale = r.random_range(0.02..0.25);
    let vertices = (0..=m)
        .map(|_| center.iter().map(|c| c + scale * r.random_range(-1.0..1.0)).collect())
        .collect();
    Simplex::new(vertices).ok().filter(|s| s.volume() > 1e-6 * scale.powi(m as i32))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stokes_on_polynomial_forms(seed in any::<u64>(), n in 2usize..=3, k in 0usize..=2) {
        let k = k.min(n - 1);
        let mut r = rng(seed);
        let w = random_form(&mut r, n, k, &params());
        let dw = w.d();
        for _ in 0..4 {
            let Some(sigma) = random_simplex(&mut r, n, k + 1) else { continue };
            let lhs = boundary_integral(&w, &sigma).unwrap();
            let rhs = integrate_over_simplex(&dw, &sigma).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + sigma.volume()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn grid_json_round_trip(seed in any::<u64>(), n in 1usize..=3, res in 1usize..=6) {
        let mut r = rng(seed);
        let k = r.random_range(0..=n);
        let w = random_form(&mut r, n, k, &params());
        let g = sample(&w, &Cube::unit(n), res).unwrap();
        let text = serde_json::to_string(&g.to_json()).unwrap();
        let back: GridFormJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(GridForm::try_from(&back).unwrap(), g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn mollification_keeps_closed_forms_closed(seed in any::<u64>(), radius in 0.02f64..0.08) {
        let w = random_closed_form(&mut rng(seed), 2, 1, &params());
        let g = sample(&w, &Cube::unit(2), 256).unwrap();
        let smooth = mollify(&g, radius).unwrap();
        prop_assert!(weak_closedness_residual(&smooth).unwrap() < 1e-3);
    }

    #[test]
    fn flatness_check_is_deterministic(seed in any::<u64>()) {
        let w = random_closed_form(&mut rng(seed), 2, 1, &params());
        let g = sample(&w, &Cube::unit(2), 32).unwrap();
        let options = FlatnessOptions { sample_count: 100, seed, ..FlatnessOptions::default() };
        let a = serde_json::to_string(&flatness_check(&g, &options).unwrap()).unwrap();
        let b = serde_json::to_string(&flatness_check(&g, &options).unwrap()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn iterative_primitive_is_deterministic(seed in any::<u64>()) {
        let w = random_closed_form(&mut rng(seed), 1, 1, &params());
        let g = sample(&w, &Cube::unit(1), 256).unwrap();
        let options = IterativeOptions { stages: 2, ..IterativeOptions::default() };
        let a = iterative_primitive(&g, &options).unwrap();
        let b = iterative_primitive(&g, &options).unwrap();
        prop_assert_eq!(serde_json::to_string(&a.history).unwrap(), serde_json::to_string(&b.history).unwrap());
        prop_assert_eq!(a.theta_form, b.theta_form);
    }
}
