//! Raw moments `M_q(t) = E[E_λ(t)^q]` of the inverse subordinator.
//!
//! The Laplace transform in `t` is `M̃_q(s) = Γ(1+q)/(s Ψ(s)^q)`; exact values
//! come from numerical inversion, asymptotics from the Tauberian limits.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::special_fn::{gamma, ln_gamma};
use crate::stable_family::TemperedStableParams;

pub const MAX_ORDER: f64 = 50.0;

/// Numerical inverse Laplace transform of a function analytic off `(−∞, 0]`.
pub trait LaplaceInverter: Send + Sync {
    fn name(&self) -> &'static str;
    fn invert(&self, f: &(dyn Fn(Complex64) -> Complex64 + Sync), t: f64) -> Result<f64>;
}

/// Fixed Talbot rule: `s(θ) = rθ(cot θ + i)`, `r = 2M/(5t)`.
/// Each value is checked against a rule with more nodes; the primary rule is
/// returned because larger `M` loses digits to the `e^{rt}` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Talbot {
    pub nodes: usize,
    pub check_nodes: usize,
    pub tolerance: f64,
}

impl Default for Talbot {
    fn default() -> Self {
        Self { nodes: 20, check_nodes: 40, tolerance: 1e-6 }
    }
}

impl Talbot {
    pub fn rule(f: &dyn Fn(Complex64) -> Complex64, t: f64, m: usize) -> f64 {
        let mf = m as f64;
        let r = 2.0 * mf / (5.0 * t);
        let mut sum = 0.5 * (f(Complex64::new(r, 0.0)) * (r * t).exp()).re;
        for k in 1..m {
            let th = k as f64 * std::f64::consts::PI / mf;
            let cot = th.cos() / th.sin();
            let s = Complex64::new(r * th * cot, r * th);
            let sigma = th + (th * cot - 1.0) * cot;
            sum += ((s * t).exp() * f(s) * Complex64::new(1.0, sigma)).re;
        }
        r / mf * sum
    }
}

impl LaplaceInverter for Talbot {
    fn name(&self) -> &'static str {
        "talbot"
    }

    fn invert(&self, f: &(dyn Fn(Complex64) -> Complex64 + Sync), t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return domain(format!("inversion needs t > 0, got {t}"));
        }
        let a = Self::rule(f, t, self.nodes);
        let b = Self::rule(f, t, self.check_nodes);
        if !a.is_finite() || !b.is_finite() || (a - b).abs() > self.tolerance * b.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::Inversion { t, a, b });
        }
        Ok(a)
    }
}

/// Gaver–Stehfest on the real axis. Limited by cancellation in double
/// precision; meant as a cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stehfest {
    pub terms: usize,
    pub check_terms: usize,
    pub tolerance: f64,
}

impl Default for Stehfest {
    fn default() -> Self {
        Self { terms: 14, check_terms: 12, tolerance: 1e-3 }
    }
}

impl Stehfest {
    fn weights(n: usize) -> Vec<f64> {
        let half = n / 2;
        let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
        (1..=n)
            .map(|k| {
                let lo = (k + 1) / 2;
                let hi = k.min(half);
                let s: f64 = (lo..=hi)
                    .map(|j| {
                        (j as f64).powi(half as i32) * fact(2 * j)
                            / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k))
                    })
                    .sum();
                if (k + half) % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect()
    }

    pub fn rule(f: &dyn Fn(Complex64) -> Complex64, t: f64, n: usize) -> f64 {
        let ln2t = std::f64::consts::LN_2 / t;
        Self::weights(n)
            .iter()
            .enumerate()
            .map(|(i, w)| w * f(Complex64::new((i + 1) as f64 * ln2t, 0.0)).re)
            .sum::<f64>()
            * ln2t
    }
}

impl LaplaceInverter for Stehfest {
    fn name(&self) -> &'static str {
        "stehfest"
    }

    fn invert(&self, f: &(dyn Fn(Complex64) -> Complex64 + Sync), t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return domain(format!("inversion needs t > 0, got {t}"));
        }
        if self.terms % 2 == 1 || self.check_terms % 2 == 1 || self.terms.max(self.check_terms) > 20 {
            return Err(Error::Config("Stehfest term counts must be even and ≤ 20".into()));
        }
        let a = Self::rule(f, t, self.terms);
        let b = Self::rule(f, t, self.check_terms);
        if !a.is_finite() || (a - b).abs() > self.tolerance * a.abs() {
            return Err(Error::Inversion { t, a, b });
        }
        Ok(a)
    }
}

/// Moment order, time and process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentQuery {
    pub q: f64,
    pub t: f64,
    pub params: TemperedStableParams,
}

impl MomentQuery {
    pub fn new(q: f64, t: f64, params: TemperedStableParams) -> Result<Self> {
        let m = Self { q, t, params };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.q)?;
        if !(self.t > 0.0 && self.t.is_finite()) {
            return domain(format!("moment time must be > 0, got {}", self.t));
        }
        self.params.validate()
    }
}

fn check_order(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= MAX_ORDER) {
        return domain(format!("moment order must lie in (0, {MAX_ORDER}], got {q}"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    SmallT,
    LargeT,
}

/// Exact, asymptotic and (optionally) simulated moments side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentReport {
    pub query: MomentQuery,
    pub exact: f64,
    pub small_t_asymptotic: f64,
    /// `None` for λ = 0, where the process has no linear regime.
    pub large_t_asymptotic: Option<f64>,
    /// Monte Carlo mean and its standard error.
    pub mc_estimate: Option<(f64, f64)>,
}

/// `M̃_q(s) = Γ(1+q)/(s Ψ(s)^q)` for real `s > 0`.
pub fn moment_lt(q: f64, s: f64, params: &TemperedStableParams) -> Result<f64> {
    check_order(q)?;
    params.validate()?;
    if !(s > 0.0) {
        return domain(format!("moment transform needs s > 0, got {s}"));
    }
    Ok((ln_gamma(1.0 + q)? - s.ln() - q * params.psi_real(s).ln()).exp())
}

fn moment_lt_complex(q: f64, params: TemperedStableParams, ln_g: f64) -> impl Fn(Complex64) -> Complex64 + Sync {
    move |s| (Complex64::new(ln_g, 0.0) - s.ln() - params.psi(s).ln() * q).exp()
}

/// `M_q(t)` by numerical inversion of `M̃_q`.
pub fn moment_exact(query: &MomentQuery, inverter: &dyn LaplaceInverter) -> Result<f64> {
    query.validate()?;
    let f = moment_lt_complex(query.q, query.params, ln_gamma(1.0 + query.q)?);
    let v = inverter.invert(&f, query.t)?;
    if !(v > 0.0) {
        return Err(Error::NotConverged {
            what: "moment inversion",
            detail: format!("non-positive value {v} at t={}", query.t),
        });
    }
    Ok(v)
}

/// `M_q` on a grid of times, evaluated in parallel.
pub fn moment_curve(
    q: f64,
    times: &[f64],
    params: &TemperedStableParams,
    inverter: &dyn LaplaceInverter,
) -> Vec<Result<f64>> {
    times
        .par_iter()
        .map(|&t| moment_exact(&MomentQuery { q, t, params: *params }, inverter))
        .collect()
}

/// Small-t: `Γ(1+q)/Γ(1+qβ) t^{qβ}`. Large-t: `(λ^{1−β} t/β)^q`.
pub fn moment_asymptotic(query: &MomentQuery, regime: Regime) -> Result<f64> {
    query.validate()?;
    let MomentQuery { q, t, params } = *query;
    let beta = params.beta;
    match regime {
        Regime::SmallT => Ok((ln_gamma(1.0 + q)? - ln_gamma(1.0 + q * beta)? + q * beta * t.ln()).exp()),
        Regime::LargeT => {
            if params.lambda == 0.0 {
                return domain("large-t asymptotic needs λ > 0");
            }
            Ok((params.lambda.powf(1.0 - beta) * t / beta).powf(q))
        }
    }
}

pub fn moment_report(query: &MomentQuery, inverter: &dyn LaplaceInverter) -> Result<MomentReport> {
    Ok(MomentReport {
        query: *query,
        exact: moment_exact(query, inverter)?,
        small_t_asymptotic: moment_asymptotic(query, Regime::SmallT)?,
        large_t_asymptotic: if query.params.lambda > 0.0 {
            Some(moment_asymptotic(query, Regime::LargeT)?)
        } else {
            None
        },
        mc_estimate: None,
    })
}

/// Closed form at λ = 0, where the small-t expression is exact.
pub fn moment_untempered(q: f64, t: f64, beta: f64) -> Result<f64> {
    check_order(q)?;
    Ok(gamma(1.0 + q)? / gamma(1.0 + q * beta)? * t.powf(q * beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(b: f64, l: f64) -> TemperedStableParams {
        TemperedStableParams::new(b, l).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn transform_examples() {
        assert!(rel(moment_lt(1.0, 1.0, &p(0.5, 1.0)).unwrap(), 1.0 / (2f64.sqrt() - 1.0)) < 1e-14);
        assert!(rel(moment_lt(2.0, 4.0, &p(0.5, 0.0)).unwrap(), 0.125) < 1e-14);
        assert!(rel(moment_lt(1.0, 3.0, &p(0.3, 0.0)).unwrap(), 3f64.powf(-1.3)) < 1e-14);
        assert!(moment_lt(1.0, 0.0, &p(0.5, 1.0)).is_err());
        assert!(moment_lt(51.0, 1.0, &p(0.5, 1.0)).is_err());
    }

    #[test]
    fn talbot_untempered_closed_form() {
        let talbot = Talbot::default();
        let mut worst = 0.0f64;
        for &b in &[0.3, 0.5, 0.7] {
            for &q in &[0.5, 1.0, 2.0, 3.7] {
                for &t in &[1e-4, 1e-2, 1.0, 1e2, 1e4] {
                    let v = moment_exact(&MomentQuery::new(q, t, p(b, 0.0)).unwrap(), &talbot).unwrap();
                    let exact = moment_untempered(q, t, b).unwrap();
                    worst = worst.max(rel(v, exact));
                }
            }
        }
        assert!(worst < 1e-12, "{worst}");
        let m = moment_exact(&MomentQuery::new(1.0, 1.0, p(0.5, 0.0)).unwrap(), &talbot).unwrap();
        assert!((m - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-12);
    }

    #[test]
    fn stehfest_cross_check() {
        let (talbot, stehfest) = (Talbot::default(), Stehfest::default());
        for &t in &[0.1, 1.0, 10.0] {
            let q = MomentQuery::new(1.0, t, p(0.6, 1.0)).unwrap();
            let a = moment_exact(&q, &talbot).unwrap();
            let b = moment_exact(&q, &stehfest).unwrap();
            assert!(rel(b, a) < 1e-4, "t={t}: {a} {b}");
        }
    }

    #[test]
    fn short_time_example() {
        // finite-t correction is still ≈ 2.8% at t = 1e-3
        let q = MomentQuery::new(1.0, 1e-3, p(0.5, 1.0)).unwrap();
        let ratio = moment_exact(&q, &Talbot::default()).unwrap() / moment_asymptotic(&q, Regime::SmallT).unwrap();
        assert!((ratio - 1.028_358_256_086_750_8).abs() < 1e-7, "{ratio}");
    }

    #[test]
    fn large_time_second_moment() {
        let q = MomentQuery::new(2.0, 1e4, p(0.5, 1.0)).unwrap();
        let ratio = moment_exact(&q, &Talbot::default()).unwrap() / moment_asymptotic(&q, Regime::LargeT).unwrap();
        assert!((0.95..=1.05).contains(&ratio), "{ratio}");
    }

    #[test]
    fn asymptotic_forms() {
        let q = MomentQuery::new(1.0, 2.0, p(0.4, 3.0)).unwrap();
        let small = moment_asymptotic(&q, Regime::SmallT).unwrap();
        assert!(rel(small, 2f64.powf(0.4) / gamma(1.4).unwrap()) < 1e-14);
        let large = moment_asymptotic(&q, Regime::LargeT).unwrap();
        assert!(rel(large, 3f64.powf(0.6) / 0.4 * 2.0) < 1e-14);
        let q0 = MomentQuery::new(1.0, 2.0, p(0.4, 0.0)).unwrap();
        assert!(moment_asymptotic(&q0, Regime::LargeT).is_err());
        assert!(moment_report(&q0, &Talbot::default()).unwrap().large_t_asymptotic.is_none());
    }

    #[test]
    fn inconsistent_inversion_is_flagged() {
        // a transform with a singularity to the right of the contour
        let f = |s: Complex64| 1.0 / (s - 12.0);
        assert!(matches!(Talbot::default().invert(&f, 1.0), Err(Error::Inversion { .. })));
    }
}
