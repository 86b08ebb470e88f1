use itsub::special_fn::{gamma, upper_incomplete_gamma, weighted_exp_integral};
use itsub::quadrature::{integrate_semi_infinite, QuadratureSpec};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn small_argument_limit() {
    let z = 1e-8f64;
    for &a in &[-0.25f64, -0.5, -0.9] {
        let scaled = upper_incomplete_gamma(a, z).unwrap() * z.powf(-a) * (-a);
        // corrections to the z^a/(−a) limit through O(z)
        let correction = -a * gamma(a).unwrap() * z.powf(-a) - a * z / (a + 1.0);
        assert!((scaled - 1.0 - correction).abs() < 1e-12, "a={a}: {} vs {correction}", scaled - 1.0);
        if correction.abs() < 1e-4 {
            assert!((scaled - 1.0).abs() < 1e-4, "a={a}");
        }
    }
}

#[test]
fn weighted_integral_matches_quadrature() {
    let spec = QuadratureSpec { rel_tol: 1e-11, ..QuadratureSpec::default() };
    for &(p, q, t) in &[(0.0, 1.0, 1.0), (0.5, 1.0, 1.0), (-0.4, 2.0, 0.5), (1.7, 0.3, 3.0)] {
        let quad = integrate_semi_infinite(|y: f64| (-t * y).exp() * y.powf(p) / (y + q), &spec).unwrap();
        let closed = weighted_exp_integral(p, q, t).unwrap();
        assert!(rel(closed, quad.value) < 1e-8, "({p},{q},{t})");
    }
}

proptest! {
    #[test]
    fn recurrence(a in -3.0f64..3.0, u in 1e-3f64..40.0) {
        prop_assume!((a - a.round()).abs() > 1e-3 || a > 0.5);
        let lhs = upper_incomplete_gamma(a + 1.0, u).unwrap();
        let rhs = a * upper_incomplete_gamma(a, u).unwrap() + u.powf(a) * (-u).exp();
        prop_assert!(rel(lhs, rhs) < 1e-10, "a={} u={} {} {}", a, u, lhs, rhs);
    }

    #[test]
    fn decreasing_in_u(a in -3.0f64..3.0, u in 1e-3f64..30.0, du in 1e-3f64..5.0) {
        let g0 = upper_incomplete_gamma(a, u).unwrap();
        let g1 = upper_incomplete_gamma(a, u + du).unwrap();
        prop_assert!(g1 < g0);
    }
}
