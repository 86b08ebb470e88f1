//! Density `h_λ(x,t)` of the inverse tempered stable subordinator by its
//! integral and series representations, plus the boundary behaviour at
//! `x = 0` and the distribution function.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contour::{decay_scale, expm1, saddle_angle, shifted_ray_integral, Ray};
use crate::error::{domain, Error, Result};
use crate::quadrature::{integrate_semi_infinite_with, PanelLayout, QuadratureSpec};
use crate::special_fn::{
    gamma, ln_gamma, rgamma, scaled_upper_incomplete_gamma, sin_pi, small_arg_tail, SMALL_ARG_FLOOR,
};
use crate::stable_family::{inverse_stable_density, Evaluation, Method, TemperedStableParams};

/// Point `(x, t)` at which `h_λ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPoint {
    pub x: f64,
    pub t: f64,
}

impl EvalPoint {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }

    fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.t.is_finite()) {
            return domain(format!("non-finite evaluation point ({}, {})", self.x, self.t));
        }
        if !(self.t > 0.0) {
            return domain(format!("t must be positive, got {}", self.t));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
    pub terms_or_panels: usize,
    pub converged: bool,
}

impl From<Evaluation> for DensityResult {
    fn from(e: Evaluation) -> Self {
        Self {
            value: e.value,
            error_estimate: e.error_estimate,
            method: e.method,
            terms_or_panels: e.terms,
            converged: e.converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    pub quad: QuadratureSpec,
    pub max_terms: usize,
    /// A series value is trusted when its error is within
    /// `max(series_abs_tol, series_rel_tol·|value|)`.
    pub series_rel_tol: f64,
    pub series_abs_tol: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            quad: QuadratureSpec::default(),
            max_terms: 500,
            series_rel_tol: 1e-9,
            series_abs_tol: 1e-12,
        }
    }
}

impl EvalConfig {
    fn trusts(&self, r: &DensityResult) -> bool {
        r.converged && r.value.is_finite() && r.error_estimate <= self.series_abs_tol.max(self.series_rel_tol * r.value.abs())
    }
}

/// Dispatcher uses the series when `x λ^β` is at most this.
pub const SERIES_MAX_X_LAMBDA_BETA: f64 = 2.0;
/// Dispatcher uses the series only when `λt` is at least this.
pub const SERIES_MIN_LAMBDA_T: f64 = 1e-6;

/// Relative accuracy of one series coefficient, in units of ε.
const TERM_ULPS: f64 = 64.0;

fn require_tempered(params: &TemperedStableParams) -> Result<()> {
    params.validate()?;
    if params.lambda <= 0.0 {
        return domain("λ = 0 is the inverse stable case; use stable_family::inverse_stable_density");
    }
    Ok(())
}

/// Ψ(s) = (s+λ)^β − λ^β, accurate for small |s|.
fn psi(s: Complex64, beta: f64, lambda: f64) -> Complex64 {
    TemperedStableParams { beta, lambda }.psi(s)
}

/// Real saddle of `st − xΨ(s)`, i.e. `Ψ'(σ) = t/x`.
fn saddle(x: f64, t: f64, beta: f64, lambda: f64) -> (f64, f64) {
    let shifted = (beta * x / t).powf(1.0 / (1.0 - beta)).min(1e150);
    let curvature = x * beta * (1.0 - beta) * shifted.powf(beta - 2.0);
    (shifted - lambda, curvature)
}

/// Integral representation. Evaluates the inverse Laplace transform
/// `(Ψ(s)/s) e^{−xΨ(s)}` on rays through the saddle of the exponent; with the
/// vertex moved to the branch point `−λ` and `θ = π` this is the classical
/// (e^{λ^β x−λt}/π)∫ e^{−ty−x y^β cos βπ}/(y+λ)[λ^β sin(x y^β sin βπ) + y^β sin(βπ − x y^β sin βπ)] dy.
pub fn eval_integral(p: EvalPoint, params: &TemperedStableParams, spec: &QuadratureSpec) -> Result<DensityResult> {
    p.validate()?;
    require_tempered(params)?;
    let TemperedStableParams { beta, lambda } = *params;
    let EvalPoint { x, t } = p;
    if x < 0.0 {
        return Ok(Evaluation::exact(0.0, Method::Integral).into());
    }
    if x == 0.0 {
        return domain("eval_integral needs x > 0; x = 0 is boundary_value");
    }
    let (c, curvature) = saddle(x, t, beta, lambda);
    let ray = Ray { vertex: c, theta: saddle_angle(beta) };
    let layout = PanelLayout::with_scale(decay_scale(&[0.25 / (t * -ray.theta.cos()), 1.0 / curvature.sqrt()]));
    let q = shifted_ray_integral(
        |s| {
            let ps = psi(s, beta, lambda);
            (s * t - ps * x).exp() * ps / s
        },
        ray,
        spec,
        &layout,
    )?;
    Ok(Evaluation::from_quadrature(q).into())
}

/// `λ^c Γ(−c, λt) = t^{−c} e^{−λt} G(−c, λt)` times `Γ(1+c) sin(cπ)`, as
/// `(ln|·|, sign)`.
fn series_coefficient(c: f64, t: f64, lt: f64) -> Result<(f64, f64)> {
    let s = sin_pi(c);
    if c == 0.0 || s == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let g = scaled_upper_incomplete_gamma(-c, lt)?;
    Ok((ln_gamma(1.0 + c)? - c * t.ln() + g.ln() + s.abs().ln(), s.signum()))
}

/// Series representation
/// (e^{λ^β x}/π) Σ_k (−1)^k x^k λ^{β(k+1)}/k! [Γ(1+β(k+1))Γ(−β(k+1),λt) sin((k+1)βπ) − Γ(1+βk)Γ(−βk,λt) sin(kβπ)].
pub fn eval_series(p: EvalPoint, params: &TemperedStableParams, max_terms: usize) -> Result<DensityResult> {
    p.validate()?;
    require_tempered(params)?;
    let TemperedStableParams { beta, lambda } = *params;
    let EvalPoint { x, t } = p;
    if x < 0.0 {
        return Ok(Evaluation::exact(0.0, Method::Series).into());
    }
    let lt = lambda * t;
    let pre = (lambda.powf(beta) * x - lt).exp() / PI;
    let ln_x = x.ln();

    let mut coef_prev = (f64::NEG_INFINITY, 0.0);
    let ln_lb = beta * lambda.ln();
    let term_at = |k: usize, prev: (f64, f64)| -> Result<((f64, f64), f64, f64)> {
        let next = series_coefficient(beta * (k as f64 + 1.0), t, lt)?;
        let ln_w = if k == 0 { 0.0 } else { k as f64 * ln_x - ln_gamma(k as f64 + 1.0)? };
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let (l1, l0) = (ln_w + next.0, ln_w + ln_lb + prev.0);
        let a1 = next.1 * l1.exp();
        let a0 = prev.1 * l0.exp();
        // exp(L) carries |L|·ε relative error on top of the coefficient's own
        let ulps = |a: f64, l: f64| if a == 0.0 { 0.0 } else { a.abs() * (l.abs() + TERM_ULPS) };
        let noise = (ulps(a1, l1) + ulps(a0, l0)) * f64::EPSILON;
        Ok((next, sign * (a1 - a0), noise))
    };

    let mut sum = 0.0f64;
    let mut noise = 0.0f64;
    let mut last = f64::INFINITY;
    let mut decaying_run = 0;
    let mut n = 0;
    let mut converged = false;
    let mut tail = 0.0;
    for k in 0..max_terms {
        let (next, term, term_noise) = term_at(k, coef_prev)?;
        coef_prev = next;
        sum += term;
        noise += term_noise;
        n += 1;
        if x == 0.0 {
            converged = true;
            break;
        }
        decaying_run = if term.abs() <= last { decaying_run + 1 } else { 0 };
        last = term.abs();
        if decaying_run >= 3 && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            tail = term_at(k + 1, coef_prev)?.1.abs();
            converged = true;
            break;
        }
    }
    // a truncated series has no usable bound
    let err = if converged { (tail + noise + f64::EPSILON * sum.abs() * n as f64) * pre } else { f64::INFINITY };
    Ok(DensityResult {
        value: pre * sum,
        error_estimate: err,
        method: Method::Series,
        terms_or_panels: n,
        converged,
    })
}

/// Density with automatic choice of representation: the series when
/// `xλ^β ≤ 2` and `λt ≥ 1e−6`, the integral otherwise; the other one is
/// tried when the first cannot meet tolerance. `λ = 0` is the inverse
/// stable density and `x = 0` the boundary value.
pub fn eval(p: EvalPoint, params: &TemperedStableParams, config: &EvalConfig) -> Result<DensityResult> {
    p.validate()?;
    params.validate()?;
    let TemperedStableParams { beta, lambda } = *params;
    if p.x < 0.0 {
        return Ok(Evaluation::exact(0.0, Method::Series).into());
    }
    if lambda == 0.0 {
        return inverse_stable_density(p.x, p.t, beta, &config.quad).map(Into::into);
    }
    if p.x == 0.0 {
        return Ok(Evaluation::exact(boundary_value(p.t, params)?, Method::Series).into());
    }
    let series_first = p.x * lambda.powf(beta) <= SERIES_MAX_X_LAMBDA_BETA && lambda * p.t >= SERIES_MIN_LAMBDA_T;
    let series_allowed = lambda * p.t >= SMALL_ARG_FLOOR;
    let first = if series_first {
        eval_series(p, params, config.max_terms)
    } else {
        eval_integral(p, params, &config.quad)
    };
    if let Ok(r) = &first {
        if config.trusts(r) || (r.method == Method::Integral && r.converged) {
            return first;
        }
    }
    let second = if series_first {
        eval_integral(p, params, &config.quad)
    } else if series_allowed {
        eval_series(p, params, config.max_terms)
    } else {
        return first;
    };
    match (first, second) {
        (Ok(a), Ok(b)) => {
            let pick = match (a.converged, b.converged) {
                (true, false) => a,
                (false, true) => b,
                _ if a.error_estimate <= b.error_estimate => a,
                _ => b,
            };
            if pick.converged {
                Ok(pick)
            } else {
                Err(Error::NotConverged {
                    what: "ITS density",
                    detail: format!("x={}, t={}, both representations failed", p.x, p.t),
                })
            }
        }
        (Ok(a), Err(_)) | (Err(_), Ok(a)) => Ok(a),
        (Err(e), Err(_)) => Err(e),
    }
}

/// lim_{x→0⁺} h_λ(x,t) = (sin βπ/π) λ^β Γ(1+β) Γ(−β, λt).
pub fn boundary_value(t: f64, params: &TemperedStableParams) -> Result<f64> {
    require_tempered(params)?;
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t must be positive, got {t}"));
    }
    let TemperedStableParams { beta, lambda } = *params;
    let lt = lambda * t;
    let front = sin_pi(beta) / PI * gamma(1.0 + beta)?;
    let tail = if lt >= SMALL_ARG_FLOOR {
        t.powf(-beta) * (-lt).exp() * scaled_upper_incomplete_gamma(-beta, lt)?
    } else {
        // λ^β Γ(−β, λt) = λ^β Γ(−β) − t^{−β} Σ (−1)^n (λt)^n/(n!(n−β))
        lambda.powf(beta) * gamma(-beta)? - t.powf(-beta) * small_arg_tail(-beta, lt)
    };
    Ok(front * tail)
}

/// `∂^k_x h_λ(x,t)` at `x = 0⁺`:
/// (e^{−λt}/π)∫_0^∞ e^{−ty}/(y+λ) ρ^k [λ^β sin kα − y^β sin(kα − βπ)] dy,
/// ρ² = λ^{2β} + y^{2β} − 2λ^β y^β cos βπ, α = atan2(y^β sin βπ, λ^β − y^β cos βπ).
///
/// For `λ = 0` the integral is taken directly; it needs `(k+1)β ≤ 1`.
pub fn derivative_at_zero(k: u32, t: f64, params: &TemperedStableParams, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    if !(t > 0.0 && t.is_finite()) {
        return domain(format!("t must be positive, got {t}"));
    }
    let TemperedStableParams { beta, lambda } = *params;
    let order = (k as f64 + 1.0) * beta;
    if lambda == 0.0 && order > 1.0 + 1e-12 {
        return domain(format!("λ = 0 derivative of order {k} needs (k+1)β ≤ 1, got {order}"));
    }
    let lb = lambda.powf(beta);
    let (sb, cb) = (sin_pi(beta), (PI * beta).cos());
    let kf = k as f64;
    let f = |y: f64| {
        let yb = y.powf(beta);
        let rho = (lb * lb + yb * yb - 2.0 * lb * yb * cb).max(0.0).sqrt();
        let alpha = (yb * sb).atan2(lb - yb * cb);
        let bracket = lb * (kf * alpha).sin() - yb * (kf * alpha - PI * beta).sin();
        (-t * y).exp() / (y + lambda) * rho.powf(kf) * bracket
    };
    let layout = PanelLayout {
        scale: 0.25 / t,
        endpoint_power: if lambda * t < 1e-2 { Some(order.min(1.0)) } else { None },
        ..PanelLayout::default()
    };
    let q = integrate_semi_infinite_with(f, spec, &layout)?;
    if !q.usable() {
        return Err(Error::NotConverged {
            what: "derivative at zero",
            detail: format!("k={k}, t={t}, err={}", q.error_estimate),
        });
    }
    Ok((-lambda * t).exp() / PI * q.value)
}

/// λ = 0 closed form (−1)^k t^{−(k+1)β}/Γ(1−(k+1)β).
pub fn derivative_at_zero_untempered(k: u32, t: f64, beta: f64) -> f64 {
    let c = (k as f64 + 1.0) * beta;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * t.powf(-c) * rgamma(1.0 - c)
}

/// P(E_λ(t) ≤ x) = P(D_λ(x) ≥ t), inverted from its Laplace transform in `t`.
/// Left of the pole at `s = 0` the transform `(1 − e^{−xΨ})/s` is used; once
/// the saddle of `st − xΨ` lies right of the pole the survival transform
/// `e^{−xΨ}/s` is inverted instead and subtracted from 1.
pub fn cdf(x: f64, t: f64, params: &TemperedStableParams, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    EvalPoint::new(x, t).validate()?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let TemperedStableParams { beta, lambda } = *params;
    let (c, curvature) = saddle(x, t, beta, lambda);
    let theta = saddle_angle(beta);
    let decay = 0.25 / (t * -theta.cos());
    let q = if c > 1.0 / t {
        let layout = PanelLayout::with_scale(decay_scale(&[decay, 1.0 / curvature.sqrt()]));
        let ray = Ray { vertex: c, theta };
        let q = shifted_ray_integral(|s| (s * t - psi(s, beta, lambda) * x).exp() / s, ray, spec, &layout)?;
        crate::quadrature::QuadratureResult { value: 1.0 - q.value, ..q }
    } else {
        let vertex = c.min(0.0);
        let at_branch = lambda == 0.0 || vertex + lambda <= 0.0;
        let layout = PanelLayout {
            scale: decay_scale(&[decay, 1.0 / curvature.sqrt(), if lambda > 0.0 { lambda } else { f64::INFINITY }]),
            endpoint_power: if at_branch { Some(beta) } else { None },
            ..PanelLayout::default()
        };
        let ray = Ray { vertex, theta };
        shifted_ray_integral(
            |s| (s * t).exp() * -expm1(-psi(s, beta, lambda) * x) / s,
            ray,
            spec,
            &layout,
        )?
    };
    if !q.usable() {
        return Err(Error::NotConverged {
            what: "ITS distribution function",
            detail: format!("x={x}, t={t}, err={}", q.error_estimate),
        });
    }
    Ok(q.value.clamp(0.0, 1.0))
}

/// Classical form of the integrand on the branch cut, kept for cross-checks:
/// `e^{−ty−x y^β cos βπ}/(y+λ)[λ^β sin(x y^β sin βπ) + y^β sin(βπ − x y^β sin βπ)]`.
pub fn classical_integrand(y: f64, x: f64, t: f64, params: &TemperedStableParams) -> f64 {
    let TemperedStableParams { beta, lambda } = *params;
    let yb = y.powf(beta);
    let phase = x * yb * sin_pi(beta);
    (-t * y - x * yb * (PI * beta).cos()).exp() / (y + lambda)
        * (lambda.powf(beta) * phase.sin() + yb * (PI * beta - phase).sin())
}

/// The β = 1/2 density written as the inverse Gaussian hitting-time integral
/// (e^{√λ x−λt}/π)∫_0^∞ e^{−ty}/(y+λ)(√λ sin(x√y) + √y cos(x√y)) dy,
/// evaluated directly with `y = v²`.
pub fn inverse_gaussian_hitting_density(x: f64, t: f64, lambda: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(x >= 0.0 && t > 0.0 && lambda >= 0.0 && x.is_finite() && t.is_finite() && lambda.is_finite()) {
        return domain(format!("inverse Gaussian hitting density needs x ≥ 0, t > 0, λ ≥ 0; got ({x}, {t}, {lambda})"));
    }
    let sl = lambda.sqrt();
    let f = |v: f64| 2.0 * v * (-t * v * v).exp() / (v * v + lambda) * (sl * (x * v).sin() + v * (x * v).cos());
    let layout = PanelLayout { scale: 0.5 / t.sqrt(), max_panel_width: 1.0 / x.max(1e-3), ..PanelLayout::default() };
    let q = integrate_semi_infinite_with(f, spec, &layout)?;
    if !q.usable() {
        return Err(Error::NotConverged { what: "inverse Gaussian hitting integral", detail: format!("x={x}, t={t}") });
    }
    Ok((sl * x - lambda * t).exp() / PI * q.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_semi_infinite;

    fn params(b: f64, l: f64) -> TemperedStableParams {
        TemperedStableParams::new(b, l).unwrap()
    }

    #[test]
    fn oracle_values() {
        let spec = QuadratureSpec::default();
        let cases = [
            (1.0, 1.0, 0.5, 1.0, 0.188_940_315_308_756_08),
            (0.5, 1.0, 0.4, 1.0, 0.089_624_162_219_803_71),
            (2.0, 0.5, 0.6, 2.0, 0.338_224_149_600_416_84),
            (3.0, 1.0, 0.8, 1.0, 5.459_039_866_788e-8),
        ];
        for &(x, t, b, l, exact) in &cases {
            let r = eval_integral(EvalPoint::new(x, t), &params(b, l), &spec).unwrap();
            assert!(r.converged);
            assert!((r.value - exact).abs() < 1e-11 * exact.max(1e-3), "{x} {t} {b} {l}: {}", r.value);
        }
        for &(x, t, b, l, exact) in &cases[..3] {
            let r = eval_series(EvalPoint::new(x, t), &params(b, l), 500).unwrap();
            assert!((r.value - exact).abs() < 1e-11, "{x} {t} {b} {l}: {}", r.value);
        }
    }

    #[test]
    fn boundary_value_oracle() {
        let p = params(0.5, 1.0);
        let exact = 0.050_254_541_660_012_22;
        assert!((boundary_value(1.0, &p).unwrap() - exact).abs() < 1e-14);
        let s = eval_series(EvalPoint::new(0.0, 1.0), &p, 500).unwrap();
        assert_eq!(s.terms_or_panels, 1);
        assert!((s.value - exact).abs() < 1e-14);
        let i = eval_integral(EvalPoint::new(1e-7, 1.0), &p, &QuadratureSpec::default()).unwrap();
        assert!((i.value - exact).abs() < 1e-5);
        let i = eval_integral(EvalPoint::new(1e-6, 1.0), &p, &QuadratureSpec::default()).unwrap();
        assert!((i.value - exact).abs() < 1e-4);
    }

    #[test]
    fn boundary_value_untempered_limit() {
        let (t, lambda) = (1.5f64, 1e-10f64);
        for &b in &[0.3, 0.5, 0.7] {
            let v = boundary_value(t, &params(b, lambda)).unwrap();
            let limit = t.powf(-b) * rgamma(1.0 - b);
            // leading correction λ^β Γ(−β) β t^β relative to the limit
            let predicted = lambda.powf(b) * gamma(-b).unwrap() * b * t.powf(b);
            let rel = (v - limit) / limit;
            assert!((rel - predicted).abs() < 1e-6, "b={b}: {rel} vs {predicted}");
            if b >= 0.5 {
                assert!(rel.abs() < 1e-3);
            }
        }
    }

    #[test]
    fn matches_classical_integrand() {
        let spec = QuadratureSpec::default();
        for &(x, t, b, l) in &[(0.7, 1.0, 0.3, 1.0), (1.5, 2.0, 0.5, 0.5), (0.4, 1.0, 0.45, 2.0)] {
            let p = params(b, l);
            let q = integrate_semi_infinite(|y| classical_integrand(y, x, t, &p), &spec).unwrap();
            let classical = (l.powf(b) * x - l * t).exp() / PI * q.value;
            let r = eval_integral(EvalPoint::new(x, t), &p, &spec).unwrap();
            assert!((classical - r.value).abs() < 1e-10, "{classical} {}", r.value);
        }
    }

    #[test]
    fn dispatch_policy() {
        let cfg = EvalConfig::default();
        let p = params(0.5, 1.0);
        assert_eq!(eval(EvalPoint::new(0.01, 1.0), &p, &cfg).unwrap().method, Method::Series);
        assert_eq!(eval(EvalPoint::new(10.0, 1.0), &p, &cfg).unwrap().method, Method::Integral);
        assert_eq!(eval(EvalPoint::new(-1.0, 1.0), &p, &cfg).unwrap().value, 0.0);
        let at_zero = eval(EvalPoint::new(0.0, 1.0), &p, &cfg).unwrap();
        assert_eq!(at_zero.value, boundary_value(1.0, &p).unwrap());
    }

    #[test]
    fn derivative_at_zero_k0_is_boundary_value() {
        let spec = QuadratureSpec::default();
        for &(b, l, t) in &[(0.5, 1.0, 1.0), (0.3, 2.0, 0.5), (0.7, 0.5, 2.0)] {
            let p = params(b, l);
            let d = derivative_at_zero(0, t, &p, &spec).unwrap();
            let bv = boundary_value(t, &p).unwrap();
            assert!((d - bv).abs() < 1e-10 * bv.max(1.0), "{d} {bv}");
        }
    }

    #[test]
    fn derivative_at_zero_matches_finite_differences() {
        let spec = QuadratureSpec::default();
        let p = params(0.4, 1.0);
        let h = 1e-4;
        let f = |x: f64| eval_series(EvalPoint::new(x, 1.0), &p, 500).unwrap().value;
        let (f0, f1, f2, f3) = (f(0.0), f(h), f(2.0 * h), f(3.0 * h));
        let d1 = (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
        let d2 = (2.0 * f0 - 5.0 * f1 + 4.0 * f2 - f3) / (h * h);
        let a1 = derivative_at_zero(1, 1.0, &p, &spec).unwrap();
        let a2 = derivative_at_zero(2, 1.0, &p, &spec).unwrap();
        assert!(((a1 - d1) / a1).abs() < 1e-3, "{a1} {d1}");
        assert!(((a2 - d2) / a2).abs() < 1e-3, "{a2} {d2}");
    }

    #[test]
    fn derivative_at_zero_untempered_branch() {
        let spec = QuadratureSpec::default();
        for &(b, k) in &[(0.2, 0), (0.2, 1), (0.2, 2), (0.2, 3), (0.3, 1), (0.5, 0), (0.45, 1)] {
            let v = derivative_at_zero(k, 1.3, &params(b, 0.0), &spec).unwrap();
            let exact = derivative_at_zero_untempered(k, 1.3, b);
            assert!((v - exact).abs() < 1e-8, "b={b} k={k}: {v} {exact}");
        }
        assert!(derivative_at_zero(2, 1.0, &params(0.5, 0.0), &spec).is_err());
    }

    #[test]
    fn cdf_limits_and_derivative() {
        let spec = QuadratureSpec::default();
        let p = params(0.5, 1.0);
        assert_eq!(cdf(0.0, 1.0, &p, &spec).unwrap(), 0.0);
        assert!((cdf(50.0, 1.0, &p, &spec).unwrap() - 1.0).abs() < 1e-5);
        let h = 1e-4;
        let d = (cdf(1.0 + h, 1.0, &p, &spec).unwrap() - cdf(1.0 - h, 1.0, &p, &spec).unwrap()) / (2.0 * h);
        let dens = eval_integral(EvalPoint::new(1.0, 1.0), &p, &spec).unwrap().value;
        assert!((d - dens).abs() < 1e-4, "{d} {dens}");
    }

    #[test]
    fn cdf_is_monotone() {
        let spec = QuadratureSpec::default();
        for &(b, l) in &[(0.5, 1.0), (0.8, 0.5), (0.3, 2.0), (0.6, 0.0)] {
            let p = params(b, l);
            let mut prev = 0.0;
            for i in 1..=60 {
                let v = cdf(0.1 * i as f64, 1.0, &p, &spec).unwrap();
                assert!(v >= prev - 1e-12, "b={b} l={l} x={}", 0.1 * i as f64);
                prev = v;
            }
        }
    }

    #[test]
    fn refuses_untempered_in_tempered_forms() {
        let p = params(0.5, 0.0);
        assert!(eval_integral(EvalPoint::new(1.0, 1.0), &p, &QuadratureSpec::default()).is_err());
        assert!(eval_series(EvalPoint::new(1.0, 1.0), &p, 100).is_err());
        assert!(boundary_value(1.0, &p).is_err());
    }

    #[test]
    fn half_index_matches_hitting_time_integral() {
        let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-14, ..QuadratureSpec::default() };
        let p = params(0.5, 1.0);
        for i in 0..30 {
            let x = 0.1 + 0.1 * i as f64;
            let ig = inverse_gaussian_hitting_density(x, 1.0, 1.0, &spec).unwrap();
            let h = eval(EvalPoint::new(x, 1.0), &p, &EvalConfig::default()).unwrap().value;
            assert!((ig - h).abs() < 1e-8, "x={x}: {ig} vs {h}");
        }
        // λ = 0: heat kernel e^{−x²/4t}/√(πt)
        let v = inverse_gaussian_hitting_density(0.7, 2.0, 0.0, &spec).unwrap();
        assert!((v - (-0.49f64 / 8.0).exp() / (2.0 * PI).sqrt()).abs() < 1e-10);
    }

}
