//! Inverse Laplace transforms along the Hankel rays `s = c + r e^{±iθ}`
//! wrapped around a branch cut ending at `c`. For conjugate-symmetric
//! transforms the two rays fold into `(1/π) Im ∫_0^∞ F(s) e^{st} e^{iθ} dr`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::Result;
use crate::quadrature::{integrate_semi_infinite_with, PanelLayout, QuadratureResult, QuadratureSpec};

/// Ray angle: the classical `θ = π` cut for `β ≤ 1/2`; for larger β a
/// steeper angle so that `cos θ < 0` and `cos βθ > 0` and no factor grows.
pub(crate) fn ray_angle(beta: f64) -> f64 {
    if beta <= 0.5 {
        PI
    } else {
        0.5 * (FRAC_PI_2 + FRAC_PI_2 / beta)
    }
}

/// `e^{iφ}`.
#[inline]
pub(crate) fn cis(phi: f64) -> Complex64 {
    Complex64::new(phi.cos(), phi.sin())
}

/// `e^z − 1` without cancellation for small `|z|`.
pub(crate) fn expm1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let half = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
}

/// Panel scale from a set of decay lengths, clamped to a sane range.
pub(crate) fn decay_scale(lengths: &[f64]) -> f64 {
    lengths
        .iter()
        .copied()
        .filter(|l| l.is_finite() && *l > 0.0)
        .fold(f64::INFINITY, f64::min)
        .clamp(1e-8, 1e8)
}

/// Angle for rays leaving a saddle on the real axis: steep enough that the
/// quadratic part of the exponent decays, never past the large-r limit.
pub(crate) fn saddle_angle(beta: f64) -> f64 {
    (0.6 * PI).min(ray_angle(beta))
}

/// Vertex `c` and angle `θ` of the ray pair `s = c + r e^{±iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Ray {
    pub vertex: f64,
    pub theta: f64,
}

impl Ray {
    #[inline]
    pub(crate) fn at(&self, r: f64) -> Complex64 {
        Complex64::new(self.vertex + r * self.theta.cos(), r * self.theta.sin())
    }
}

/// `(1/π) Im ∫_0^∞ G(s(r)) e^{iθ} dr` along `s(r) = c + r e^{iθ}`.
pub(crate) fn shifted_ray_integral<G>(
    g: G,
    ray: Ray,
    spec: &QuadratureSpec,
    layout: &PanelLayout,
) -> Result<QuadratureResult>
where
    G: Fn(Complex64) -> Complex64,
{
    ray_integral(|r| g(ray.at(r)), ray.theta, spec, layout)
}

/// `(1/π) ∫_0^∞ Im[g(r) e^{iθ}] dr`.
pub(crate) fn ray_integral<G>(g: G, theta: f64, spec: &QuadratureSpec, layout: &PanelLayout) -> Result<QuadratureResult>
where
    G: Fn(f64) -> Complex64,
{
    let rot = cis(theta);
    let mut r = integrate_semi_infinite_with(|r| (g(r) * rot).im, spec, layout)?;
    r.value /= PI;
    r.error_estimate /= PI;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_keeps_both_exponents_decaying() {
        for &b in &[0.55, 0.6, 0.8, 0.95] {
            let th = ray_angle(b);
            assert!(th.cos() < 0.0 && (b * th).cos() > 0.0, "beta={b}");
        }
        assert_eq!(ray_angle(0.3), PI);
    }

    #[test]
    fn complex_expm1_small_argument() {
        let z = Complex64::new(1e-12, -2e-12);
        let e = expm1(z);
        let (a, b) = (1e-12, -2e-12);
        assert!((e.re - (a + 0.5 * (a * a - b * b))).abs() < 1e-27);
        assert!((e.im - (b + a * b)).abs() < 1e-27);
        let z = Complex64::new(0.3, 1.7);
        assert!((expm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn inverts_simple_transform() {
        // 1/(s+1) ↔ e^{-t}; pole at -1 is left of the vertex at 0 only when θ < π,
        // so test with a branch-cut transform instead: s^{-1/2} ↔ 1/√(πt)
        let t = 2.0f64;
        let theta = 0.75 * PI;
        let layout = PanelLayout { scale: 1.0 / t, endpoint_power: Some(0.5), ..PanelLayout::default() };
        let r = ray_integral(
            |r| {
                let s = cis(theta) * r;
                (s * t).exp() * s.powf(-0.5)
            },
            theta,
            &QuadratureSpec::default(),
            &layout,
        )
        .unwrap();
        assert!((r.value - 1.0 / (PI * t).sqrt()).abs() < 1e-11, "{}", r.value);
    }
}
