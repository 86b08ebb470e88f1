use itsub::its_density::{eval, EvalConfig, EvalPoint};
use itsub::moments::{moment_asymptotic, moment_exact, moment_lt, MomentQuery, Regime, Talbot};
use itsub::quadrature::{integrate_semi_infinite, QuadratureSpec};
use itsub::TemperedStableParams;
use proptest::prelude::*;

fn params(b: f64, l: f64) -> TemperedStableParams {
    TemperedStableParams::new(b, l).unwrap()
}

fn ratio(q: f64, t: f64, p: TemperedStableParams, regime: Regime) -> f64 {
    let query = MomentQuery::new(q, t, p).unwrap();
    moment_exact(&query, &Talbot::default()).unwrap() / moment_asymptotic(&query, regime).unwrap()
}

#[test]
fn large_time_ratio() {
    for &q in &[1.0, 2.0] {
        for &b in &[0.3, 0.5, 0.7] {
            for &l in &[0.5, 1.0] {
                let r = ratio(q, 1e4, params(b, l), Regime::LargeT);
                assert!((r - 1.0).abs() < 0.02, "q={q} b={b} l={l}: {r}");
            }
        }
    }
}

#[test]
fn small_time_ratio() {
    for &q in &[1.0, 2.0] {
        for &b in &[0.5, 0.7] {
            for &l in &[0.5, 1.0] {
                let r = ratio(q, 1e-4, params(b, l), Regime::SmallT);
                assert!((r - 1.0).abs() < 0.02, "q={q} b={b} l={l}: {r}");
            }
        }
    }
}

#[test]
fn small_time_ratio_slow_at_low_beta() {
    // at β = 0.3 the correction decays like (λt)^β and is still 5-13% at t = 1e-4
    for &(q, l, oracle) in &[(1.0, 0.5, 1.054029), (1.0, 1.0, 1.067280), (2.0, 0.5, 1.101976), (2.0, 1.0, 1.127598)] {
        let r = ratio(q, 1e-4, params(0.3, l), Regime::SmallT);
        assert!((r - oracle).abs() < 1e-5, "q={q} l={l}: {r}");
        let deep = ratio(q, 1e-10 / l, params(0.3, l), Regime::SmallT);
        assert!((deep - 1.0).abs() < 0.02, "q={q} l={l}: {deep}");
    }
}

#[test]
fn not_linear_in_time() {
    let talbot = Talbot::default();
    for &b in &[0.3, 0.5, 0.7] {
        let p = params(b, 1.0);
        let m1 = |t| moment_exact(&MomentQuery::new(1.0, t, p).unwrap(), &talbot).unwrap();
        let r = m1(2e-4) / m1(1e-4);
        assert!((r - 2f64.powf(b)).abs() < 0.02, "b={b}: {r}");
        assert!((r - 2.0).abs() > 0.3);
    }
}

#[test]
fn first_moment_from_density() {
    let p = params(0.5, 1.0);
    let config = EvalConfig::default();
    let spec = QuadratureSpec { rel_tol: 1e-8, ..QuadratureSpec::default() };
    let mean = integrate_semi_infinite(|x| x * eval(EvalPoint::new(x, 1.0), &p, &config).unwrap().value, &spec).unwrap();
    let exact = moment_exact(&MomentQuery::new(1.0, 1.0, p).unwrap(), &Talbot::default()).unwrap();
    assert!(((mean.value - exact) / exact).abs() < 1e-4, "{} vs {exact}", mean.value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn increasing_in_time(b in 0.15f64..0.9, l in 0.0f64..3.0, q in 0.2f64..4.0, lt in -3.0f64..3.0, step in 0.01f64..1.0) {
        let p = params(b, l);
        let t = 10f64.powf(lt);
        let talbot = Talbot::default();
        let m0 = moment_exact(&MomentQuery::new(q, t, p).unwrap(), &talbot).unwrap();
        let m1 = moment_exact(&MomentQuery::new(q, t * (1.0 + step), p).unwrap(), &talbot).unwrap();
        prop_assert!(m1 > m0);
    }

    #[test]
    fn transform_decreasing_in_s(b in 0.15f64..0.9, l in 0.0f64..3.0, q in 0.2f64..4.0, s in 1e-3f64..1e3) {
        let p = params(b, l);
        prop_assert!(moment_lt(q, s * 1.1, &p).unwrap() < moment_lt(q, s, &p).unwrap());
    }
}
