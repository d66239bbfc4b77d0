use gamma_ec::algebraic::{
    estimate_asymptotics, perturbation_radius, sampled_perturbation_ratio, AlgebraicFunction, BivariatePolynomial,
    ImplicitBranch, PolydiskDomain,
};
use gamma_ec::contour::{build_box, winding_number};
use gamma_ec::gamma::{alpha, gamma, ln_gamma, principal_arg, verify_identities};
use gamma_ec::level_curves::{argument_slope, modulus_slope, trace_modulus_curve, z_star};
use gamma_ec::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn quadrant_point() -> impl Strategy<Value = Complex64> {
    (alpha()..50.0, 0.0..50.0f64).prop_filter("inside the disc", |(x, y)| x * x + y * y <= 2500.0).prop_map(|(x, y)| c(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn identities_hold(z in quadrant_point()) {
        let r = verify_identities(z, 2).unwrap();
        prop_assert!(r.max() < 1e-11);
        prop_assert!(verify_identities(z, 3).unwrap().multiplication < 1e-11);
    }

    #[test]
    fn conjugation_symmetry(z in quadrant_point()) {
        let g = gamma(z).unwrap().value;
        let gc = gamma(z.conj()).unwrap().value;
        prop_assert!((g.conj() - gc).norm() <= 1e-13 * g.norm());
    }

    #[test]
    fn level_curves_are_orthogonal(x in 3.0..400.0f64, y in 0.5..400.0f64) {
        let z = c(x, y);
        let product = modulus_slope(z).unwrap() * argument_slope(z).unwrap();
        prop_assert!((product + 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_gamma_is_consistent_with_gamma(z in quadrant_point()) {
        let g = gamma(z).unwrap().value;
        let l = ln_gamma(z).unwrap();
        prop_assert!((l.re - g.norm().ln()).abs() < 1e-12 * (1.0 + l.re.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn traced_modulus_curve_stays_on_level(log_r in 0.0..13.8f64, x_end in 12.0..40.0f64) {
        let r = log_r.exp();
        let curve = trace_modulus_curve(r, x_end).unwrap();
        for z in &curve.points {
            let m = gamma(*z).unwrap().value.norm();
            prop_assert!((m - r).abs() / r < 1e-8);
        }
        prop_assert!(curve.points.windows(2).all(|w| w[1].re >= w[0].re - 1e-12));
    }

    #[test]
    fn companion_point_has_equal_value(x in 16.0..200.0f64, y in 1.0..200.0f64) {
        let p = z_star(c(x, y)).unwrap();
        // Gamma overflows f64 past Re ~ 171, so compare logarithms mod 2 pi i.
        let d = ln_gamma(p.star).unwrap() - ln_gamma(p.origin).unwrap();
        let d = c(d.re, principal_arg(d.im));
        prop_assert!((d.exp() - 1.0).norm() < 1e-8);
        prop_assert!(p.star.re > p.origin.re);
    }

    /// Roots of a polynomial inside a box are counted by the winding number,
    /// and the count does not depend on where the box edges are sampled.
    #[test]
    fn winding_counts_roots(
        roots in proptest::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 1..6),
        shift in 0.0..0.3f64,
    ) {
        let roots: Vec<Complex64> = roots.into_iter().map(|(x, y)| c(x, y)).collect();
        let (ll, ur) = (c(-1.0 - shift, -1.0 + shift), c(1.0 + shift, 1.5 - shift));
        let margin = roots.iter().map(|r| {
            (r.re - ll.re).abs().min((r.re - ur.re).abs()).min((r.im - ll.im).abs()).min((r.im - ur.im).abs())
        }).fold(f64::INFINITY, f64::min);
        prop_assume!(margin > 1e-3);
        let inside = roots.iter().filter(|r| r.re > ll.re && r.re < ur.re && r.im > ll.im && r.im < ur.im).count() as i64;
        let f = |z: Complex64| Ok(roots.iter().fold(c(1.0, 0.0), |acc, r| acc * (z - r)));
        let rect = build_box(ll, ur).unwrap();
        prop_assert_eq!(winding_number(f, &rect).unwrap().winding, inside);
        prop_assert_eq!(winding_number(f, &rect.densified()).unwrap().winding, inside);
    }

    #[test]
    fn monomial_degree_is_exact(d in 1i32..6, coeff in 0.5..20.0f64) {
        let a = AlgebraicFunction::parse(&format!("{coeff} * z^{d}"), 1).unwrap();
        let data = estimate_asymptotics(&a, &PolydiskDomain::quadrant(1), 3).unwrap();
        prop_assert_eq!(data.d, d);
    }

    #[test]
    fn perturbation_radius_holds_on_fresh_samples(d in 1.0..5.0f64, seed in 0u64..1000) {
        let a = AlgebraicFunction::parse("z^2 + 3*z", 1).unwrap();
        let dom = PolydiskDomain::quadrant(1);
        let n = perturbation_radius(&a, d, &dom, seed).unwrap();
        for t in [n, 2.0 * n, 10.0 * n] {
            prop_assert!(sampled_perturbation_ratio(&a, d, &dom, t, seed ^ 0xabcdef, 64).unwrap() < 0.25);
        }
    }

    /// Continuation of `Y^2 = 1 + X` from `X = 3` along two paths that do not
    /// enclose the branch point `-1` between them.
    #[test]
    fn continuation_is_path_independent(tx in 2.0..30.0f64, ty in -20.0..20.0f64, detour in 1.0..10.0f64) {
        let p = BivariatePolynomial::from_real(&[&[-1.0, 0.0, 1.0], &[-1.0]]).unwrap();
        let a = AlgebraicFunction::implicit(ImplicitBranch::new(p, 0, c(3.0, 0.0), c(2.0, 0.0)).unwrap(), 1).unwrap();
        let target = c(tx, ty);
        let via_up = a.continue_along(&[vec![c(3.0, 0.0)], vec![c(3.0, detour)], vec![target]]).unwrap();
        let via_right = a.continue_along(&[vec![c(3.0, 0.0)], vec![c(3.0 + detour, 0.0)], vec![target]]).unwrap();
        prop_assert!((via_up - via_right).norm() < 1e-8 * (1.0 + via_up.norm()));
        prop_assert!((via_up - (target + 1.0).sqrt()).norm() < 1e-8 * (1.0 + via_up.norm()));
    }
}
