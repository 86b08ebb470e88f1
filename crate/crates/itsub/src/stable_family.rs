//! Densities of the β-stable subordinator, its exponentially tempered
//! version, and the inverse stable subordinator.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contour::{cis, decay_scale, ray_angle, ray_integral, saddle_angle, shifted_ray_integral, Ray};
use crate::error::{domain, Error, Result};
use crate::quadrature::{PanelLayout, QuadratureSpec};
use crate::special_fn::{ln_gamma, rgamma, sin_pi};

/// Stable index β ∈ (0,1) and tempering rate λ ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperedStableParams {
    pub beta: f64,
    pub lambda: f64,
}

impl TemperedStableParams {
    pub fn new(beta: f64, lambda: f64) -> Result<Self> {
        let p = Self { beta, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return domain(format!("beta must lie in (0,1), got {}", self.beta));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return domain(format!("lambda must be finite and ≥ 0, got {}", self.lambda));
        }
        Ok(())
    }

    /// Laplace symbol Ψ(s) = (s+λ)^β − λ^β on the principal branch.
    /// Near the origin it is evaluated as λ^β expm1(β ln(1+s/λ)).
    pub fn psi(&self, s: Complex64) -> Complex64 {
        let (beta, lambda) = (self.beta, self.lambda);
        if lambda > 0.0 && s.norm() < 0.5 * lambda {
            let z = s / lambda;
            let ln1p = Complex64::new(0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p(), z.im.atan2(1.0 + z.re));
            crate::contour::expm1(ln1p * beta) * lambda.powf(beta)
        } else {
            (s + lambda).powf(beta) - lambda.powf(beta)
        }
    }

    pub fn psi_real(&self, s: f64) -> f64 {
        let (beta, lambda) = (self.beta, self.lambda);
        if lambda > 0.0 && s.abs() < 0.5 * lambda {
            (beta * (s / lambda).ln_1p()).exp_m1() * lambda.powf(beta)
        } else {
            (s + lambda).powf(beta) - lambda.powf(beta)
        }
    }
}

/// Which representation produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Integral,
    Series,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Integral => "integral",
            Method::Series => "series",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Value of one representation with its error estimate. For series the
/// estimate is the first omitted term plus accumulated rounding of the
/// largest term; `terms` counts series terms or quadrature panels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub error_estimate: f64,
    pub terms: usize,
    pub converged: bool,
    pub method: Method,
}

impl Evaluation {
    pub(crate) fn exact(value: f64, method: Method) -> Self {
        Self { value, error_estimate: 0.0, terms: 0, converged: true, method }
    }

    pub(crate) fn from_quadrature(q: crate::quadrature::QuadratureResult) -> Self {
        Self {
            value: q.value,
            error_estimate: q.error_estimate,
            terms: q.subdivisions_used,
            converged: q.usable(),
            method: Method::Integral,
        }
    }
}

pub const STABLE_SERIES_MAX_TERMS: usize = 500;
const SERIES_STOP: f64 = 1e-14;
const SWITCH_FLOOR: f64 = 0.1;
const SERIES_TRUST: f64 = 1e-10;

/// Sums `Σ_{k≥k0} term(k)` given `(ln|term|, sign)`; stops once terms are
/// decaying and negligible.
pub(crate) fn sum_log_terms<F>(k0: usize, max_terms: usize, mut term: F) -> Evaluation
where
    F: FnMut(usize) -> (f64, f64),
{
    let mut sum = 0.0f64;
    let mut max_abs = 0.0f64;
    let mut prev = f64::INFINITY;
    let mut n = 0;
    for k in k0..k0 + max_terms {
        let (ln_mag, sign) = term(k);
        let t = if sign == 0.0 { 0.0 } else { sign * ln_mag.exp() };
        let mag = t.abs();
        sum += t;
        max_abs = max_abs.max(mag);
        n += 1;
        let decaying = ln_mag.exp() <= prev || sign == 0.0;
        if sign != 0.0 {
            prev = ln_mag.exp();
        }
        if n > 2 && decaying && prev <= SERIES_STOP * sum.abs().max(f64::MIN_POSITIVE) {
            let (next_ln, _) = term(k + 1);
            let err = next_ln.exp() + f64::EPSILON * max_abs * (n as f64).sqrt();
            return Evaluation { value: sum, error_estimate: err, terms: n, converged: true, method: Method::Series };
        }
        if n > 2 && max_abs > 0.0 && prev < 1e-300 {
            let err = f64::EPSILON * max_abs * (n as f64).sqrt();
            return Evaluation { value: sum, error_estimate: err, terms: n, converged: true, method: Method::Series };
        }
    }
    Evaluation {
        value: sum,
        error_estimate: f64::INFINITY,
        terms: n,
        converged: false,
        method: Method::Series,
    }
}

fn check_xt(x: f64, t: f64) -> Result<()> {
    if !(x.is_finite() && t.is_finite()) {
        return domain(format!("non-finite arguments x={x}, t={t}"));
    }
    if !(t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("beta must lie in (0,1), got {beta}"));
    }
    Ok(())
}

/// Stable density by the alternating series in `z = x t^{-1/β}`:
/// f(z,1) = (1/π) Σ_{k≥1} (−1)^{k+1} Γ(kβ+1)/k! sin(kβπ) z^{−kβ−1}.
pub fn stable_density_series(x: f64, t: f64, beta: f64) -> Result<Evaluation> {
    check_xt(x, t)?;
    check_beta(beta)?;
    if x <= 0.0 {
        return Ok(Evaluation::exact(0.0, Method::Series));
    }
    let scale = t.powf(-1.0 / beta);
    let z = x * scale;
    let ln_z = z.ln();
    let mut r = sum_log_terms(1, STABLE_SERIES_MAX_TERMS, |k| {
        let kf = k as f64;
        let s = sin_pi(kf * beta);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 } * s.signum();
        let ln = ln_gamma(kf * beta + 1.0).unwrap_or(f64::INFINITY) - ln_gamma(kf + 1.0).unwrap_or(0.0)
            + s.abs().ln()
            - (kf * beta + 1.0) * ln_z;
        (ln, if s == 0.0 { 0.0 } else { sign })
    });
    let c = scale / PI;
    r.value *= c;
    r.error_estimate *= c;
    Ok(r)
}

/// Stable density as the inverse Laplace transform of `e^{−t s^β}` along rays
/// `s = c + r e^{±iθ}` through the real saddle `c` of `xs − ts^β`. Deforming
/// back to `c = 0, θ = π` gives the classical
/// (1/π)∫ e^{−ux − t u^β cos βπ} sin(t u^β sin βπ) du.
pub fn stable_density_integral(x: f64, t: f64, beta: f64, spec: &QuadratureSpec) -> Result<Evaluation> {
    check_xt(x, t)?;
    check_beta(beta)?;
    if x <= 0.0 {
        return Ok(Evaluation::exact(0.0, Method::Integral));
    }
    let c = (beta * t / x).powf(1.0 / (1.0 - beta)).min(1e200);
    let ray = Ray { vertex: c, theta: saddle_angle(beta) };
    let curvature = t * beta * (1.0 - beta) * c.powf(beta - 2.0);
    let layout = PanelLayout::with_scale(decay_scale(&[
        0.25 / (x * -ray.theta.cos()),
        1.0 / curvature.sqrt(),
        (1.0 / (t * (beta * ray.theta).cos().max(0.05))).powf(1.0 / beta),
    ]));
    let q = shifted_ray_integral(|s| (s * x - s.powf(beta) * t).exp(), ray, spec, &layout)?;
    Ok(Evaluation::from_quadrature(q))
}

/// Stable density with automatic choice of representation.
pub fn stable_density(x: f64, t: f64, beta: f64, spec: &QuadratureSpec) -> Result<Evaluation> {
    check_xt(x, t)?;
    check_beta(beta)?;
    if x <= 0.0 {
        return Ok(Evaluation::exact(0.0, Method::Series));
    }
    if x * t.powf(-1.0 / beta) >= SWITCH_FLOOR {
        let s = stable_density_series(x, t, beta)?;
        if s.converged && s.error_estimate <= SERIES_TRUST * s.value.abs().max(1e-300) {
            return Ok(s);
        }
    }
    let q = stable_density_integral(x, t, beta, spec)?;
    if !q.converged {
        return Err(Error::NotConverged {
            what: "stable density",
            detail: format!("x={x}, t={t}, beta={beta}, err={}", q.error_estimate),
        });
    }
    Ok(q)
}

/// Tempered stable density e^{−λx+λ^β t} f(x,t).
pub fn tempered_density(x: f64, t: f64, params: &TemperedStableParams, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    if x <= 0.0 {
        check_xt(x, t)?;
        return Ok(0.0);
    }
    let f = stable_density(x, t, params.beta, spec)?;
    let l = params.lambda;
    Ok((-l * x + l.powf(params.beta) * t).exp() * f.value)
}

/// Inverse stable series in `w = x t^{-β}`:
/// (t^{−β}/π) Σ_{k≥1} (−1)^{k−1} Γ(kβ) sin(kβπ)/(k−1)! w^{k−1}.
pub fn inverse_stable_density_series(x: f64, t: f64, beta: f64, max_terms: usize) -> Result<Evaluation> {
    check_xt(x, t)?;
    check_beta(beta)?;
    if x < 0.0 {
        return Ok(Evaluation::exact(0.0, Method::Series));
    }
    let pre = t.powf(-beta) / PI;
    if x == 0.0 {
        let v = t.powf(-beta) * rgamma(1.0 - beta);
        return Ok(Evaluation { value: v, error_estimate: f64::EPSILON * v, terms: 1, converged: true, method: Method::Series });
    }
    let ln_w = (x * t.powf(-beta)).ln();
    let mut r = sum_log_terms(1, max_terms, |k| {
        let kf = k as f64;
        let s = sin_pi(kf * beta);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 } * s.signum();
        let ln = ln_gamma(kf * beta).unwrap_or(f64::INFINITY) - ln_gamma(kf).unwrap_or(0.0)
            + s.abs().ln()
            + (kf - 1.0) * ln_w;
        (ln, if s == 0.0 { 0.0 } else { sign })
    });
    r.value *= pre;
    r.error_estimate *= pre;
    Ok(r)
}

/// Inverse stable density from its integral form, evaluated with `v = r^β`
/// along the ray: (1/(βπ)) Im ∫_0^∞ e^{iβθ} exp(t v^{1/β} e^{iθ} − x v e^{iβθ}) dv.
pub fn inverse_stable_density_integral(x: f64, t: f64, beta: f64, spec: &QuadratureSpec) -> Result<Evaluation> {
    check_xt(x, t)?;
    check_beta(beta)?;
    if x < 0.0 {
        return Ok(Evaluation::exact(0.0, Method::Series));
    }
    let theta = ray_angle(beta);
    let e1 = cis(theta);
    let eb = cis(beta * theta);
    let inv_b = 1.0 / beta;
    let layout = PanelLayout::with_scale(decay_scale(&[
        (0.25 / (t * -theta.cos())).powf(beta),
        if x > 0.0 { 0.25 / (x * eb.re.max(1e-3)) } else { f64::INFINITY },
    ]));
    let rot_back = cis(beta * theta - theta);
    let q = ray_integral(
        |v| rot_back * (e1 * (t * v.powf(inv_b)) - eb * (x * v)).exp(),
        theta,
        spec,
        &layout,
    )?;
    let mut e = Evaluation::from_quadrature(q);
    e.value *= inv_b;
    e.error_estimate *= inv_b;
    Ok(e)
}

/// Density h₀(x,t) of the inverse stable subordinator, series first with
/// fallback to the integral form.
pub fn inverse_stable_density(x: f64, t: f64, beta: f64, spec: &QuadratureSpec) -> Result<Evaluation> {
    let s = inverse_stable_density_series(x, t, beta, STABLE_SERIES_MAX_TERMS)?;
    if s.converged && s.error_estimate <= SERIES_TRUST * s.value.abs().max(1e-300) {
        return Ok(s);
    }
    let q = inverse_stable_density_integral(x, t, beta, spec)?;
    if q.converged || q.error_estimate < s.error_estimate {
        return Ok(q);
    }
    if s.converged {
        return Ok(s);
    }
    Err(Error::NotConverged {
        what: "inverse stable density",
        detail: format!("x={x}, t={t}, beta={beta}"),
    })
}
