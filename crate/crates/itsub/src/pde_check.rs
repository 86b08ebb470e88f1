//! Finite-difference checks of the evolution equation satisfied by `h_λ` when
//! `β = 1/m`:
//!
//! `Σ_{j=1}^m (−1)^j C(m,j) λ^{1−j/m} ∂^j_x h = ∂_t h` for `t > 0`,
//!
//! plus the boundary and initial conditions at `λ = 0`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::its_density::{derivative_at_zero, eval, EvalConfig, EvalPoint};
use crate::quadrature::{integrate_between_zeros, QuadratureSpec};
use crate::special_fn::sin_pi;
use crate::stable_family::{inverse_stable_density_series, TemperedStableParams, STABLE_SERIES_MAX_TERMS};

/// Rectangular interior grid on which the residual is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeCase {
    pub m: u32,
    pub lambda: f64,
    /// Index of the density; `1/m` unless overridden for a negative control.
    pub beta: f64,
    pub x_range: (f64, f64),
    pub t_range: (f64, f64),
    pub nx: usize,
    pub nt: usize,
    pub hx: f64,
    pub ht: f64,
}

impl PdeCase {
    pub fn new(m: u32, lambda: f64) -> Self {
        Self {
            m,
            lambda,
            beta: 1.0 / m as f64,
            x_range: (0.5, 2.0),
            t_range: (0.5, 2.0),
            nx: 7,
            nt: 7,
            hx: 1e-3,
            ht: 1e-3,
        }
    }

    pub fn with_steps(self, hx: f64, ht: f64) -> Self {
        Self { hx, ht, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return domain(format!("m must be ≥ 2, got {}", self.m));
        }
        TemperedStableParams::new(self.beta, self.lambda)?;
        let reach = stencil(self.m).0 as f64 * self.hx;
        if !(self.x_range.0 - reach > 0.0 && self.t_range.0 - self.ht > 0.0) {
            return domain("grid and stencils must stay inside x > 0, t > 0");
        }
        if !(self.x_range.1 >= self.x_range.0 && self.t_range.1 >= self.t_range.0) {
            return domain("empty grid range");
        }
        if self.nx == 0 || self.nt == 0 || !(self.hx > 0.0 && self.ht > 0.0) {
            return Err(Error::Config("grid needs nx, nt ≥ 1 and positive steps".into()));
        }
        Ok(())
    }

    fn params(&self) -> TemperedStableParams {
        TemperedStableParams { beta: self.beta, lambda: self.lambda }
    }

    fn points(&self) -> Vec<(f64, f64)> {
        let lin = |(a, b): (f64, f64), n: usize, i: usize| if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
        (0..self.nt)
            .flat_map(|j| (0..self.nx).map(move |i| (i, j)))
            .map(|(i, j)| (lin(self.x_range, self.nx, i), lin(self.t_range, self.nt, j)))
            .collect()
    }
}

/// Fornberg weights for the `order`-th derivative at 0 on the given nodes.
fn fd_weights(nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] *= c4 / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[order]).collect()
}

/// Half-width and per-derivative weights of the central order-2 stencils
/// for derivatives 1..=m on the nodes `−p..=p`.
fn stencil(m: u32) -> (i32, Vec<Vec<f64>>) {
    let p = (m as i32 + 1) / 2;
    let nodes: Vec<f64> = (-p..=p).map(|k| k as f64).collect();
    (p, (1..=m as usize).map(|j| fd_weights(&nodes, j)).collect())
}

fn binomial(m: u32, j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Density with the most accurate available method: the inverse stable
/// series at λ = 0, otherwise the dispatcher with tight tolerances.
pub fn reference_density(x: f64, t: f64, params: &TemperedStableParams) -> Result<f64> {
    if params.lambda == 0.0 {
        let r = inverse_stable_density_series(x, t, params.beta, STABLE_SERIES_MAX_TERMS)?;
        if !r.converged {
            return Err(Error::NotConverged { what: "inverse stable series", detail: format!("x={x}, t={t}") });
        }
        return Ok(r.value);
    }
    let mut config = EvalConfig::default();
    config.quad.rel_tol = 1e-13;
    config.quad.abs_tol = 1e-15;
    config.series_rel_tol = 1e-13;
    config.series_abs_tol = 1e-15;
    Ok(eval(EvalPoint::new(x, t), params, &config)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualPoint {
    pub x: f64,
    pub t: f64,
    pub residual: f64,
    pub dt_h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual {
    pub points: Vec<ResidualPoint>,
    pub max_abs_residual: f64,
    /// `max |∂_t h|` over the grid.
    pub scale: f64,
    pub relative: f64,
}

/// Residual of the evolution equation on the interior grid, relative to
/// `max |∂_t h|`.
pub fn pde_residual(case: &PdeCase) -> Result<PdeResidual> {
    case.validate()?;
    let params = case.params();
    let m = case.m;
    let (p, weights) = stencil(m);
    let coeffs: Vec<f64> = (1..=m)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let power = 1.0 - j as f64 / m as f64;
            let lp = if power == 0.0 { 1.0 } else { case.lambda.powf(power) };
            sign * binomial(m, j) * lp
        })
        .collect();
    let points = case
        .points()
        .into_par_iter()
        .map(|(x, t)| -> Result<ResidualPoint> {
            let row: Vec<f64> = (-p..=p)
                .map(|k| reference_density(x + k as f64 * case.hx, t, &params))
                .collect::<Result<_>>()?;
            let space: f64 = coeffs
                .iter()
                .zip(&weights)
                .enumerate()
                .map(|(j, (c, w))| {
                    let d: f64 = w.iter().zip(&row).map(|(a, b)| a * b).sum();
                    c * d / case.hx.powi(j as i32 + 1)
                })
                .sum();
            let dt_h = (reference_density(x, t + case.ht, &params)? - reference_density(x, t - case.ht, &params)?)
                / (2.0 * case.ht);
            Ok(ResidualPoint { x, t, residual: space - dt_h, dt_h })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_residual = points.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    let scale = points.iter().map(|r| r.dt_h.abs()).fold(0.0, f64::max);
    Ok(PdeResidual { points, max_abs_residual, scale, relative: max_abs_residual / scale })
}

/// Residual at `(hx, ht)` and `(hx/2, ht/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub coarse: f64,
    pub fine: f64,
    pub ratio: f64,
    /// The residual did not shrink by at least 2.5× under halving.
    pub too_coarse: bool,
}

pub fn residual_convergence(case: &PdeCase) -> Result<Convergence> {
    let coarse = pde_residual(case)?.relative;
    let fine = pde_residual(&case.with_steps(0.5 * case.hx, 0.5 * case.ht))?.relative;
    let ratio = coarse / fine;
    Ok(Convergence { coarse, fine, ratio, too_coarse: !(ratio >= 2.5) })
}

/// `|∂^{m−1}_x h_0(x,t)|` at `x = 0` for `β = 1/m`.
pub fn boundary_derivative_check(m: u32, t: f64) -> Result<f64> {
    if m < 2 {
        return domain(format!("m must be ≥ 2, got {m}"));
    }
    let params = TemperedStableParams::new(1.0 / m as f64, 0.0)?;
    Ok(derivative_at_zero(m - 1, t, &params, &QuadratureSpec::default())?.abs())
}

/// `|h_0(x,0)|` from the t = 0 integral
/// (1/(βπ))∫_0^∞ e^{−x cos(βπ) u} sin(βπ − x sin(βπ) u) du, summed between
/// the zeros of the sine and extrapolated.
pub fn initial_condition_check(beta: f64, x: f64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 0.5) {
        return domain(format!("initial condition needs 0 < β ≤ 1/2, got {beta}"));
    }
    if !(x > 0.0 && x.is_finite()) {
        return domain(format!("initial condition needs x > 0, got {x}"));
    }
    let (sb, cb) = (sin_pi(beta), (PI * beta).cos().max(0.0));
    let f = |u: f64| (-x * cb * u).exp() * (PI * beta - x * sb * u).sin();
    let zeros = (0..).map(|n| (beta + n as f64) * PI / (x * sb));
    let spec = QuadratureSpec { abs_tol: 1e-14, rel_tol: 1e-12, ..QuadratureSpec::default() };
    let r = integrate_between_zeros(f, zeros, &spec, 400)?;
    if !r.converged && r.error_estimate > 1e-9 {
        return Err(Error::NotConverged { what: "initial condition integral", detail: format!("err={}", r.error_estimate) });
    }
    Ok((r.value / (beta * PI)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_weights() {
        let (p, w) = stencil(3);
        assert_eq!(p, 2);
        // lower derivatives on the full five-point stencil are fourth order
        let expect = [
            vec![1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
            vec![-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0],
            vec![-0.5, 1.0, 0.0, -1.0, 0.5],
        ];
        for (a, b) in w.iter().zip(&expect) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-14, "{a:?}");
            }
        }
        assert_eq!(binomial(3, 2), 3.0);
    }

    #[test]
    fn stencils_differentiate_polynomials() {
        let (p, w) = stencil(4);
        let f = |x: f64| x.powi(4) - 2.0 * x.powi(3) + x;
        let h = 0.1;
        let x0 = 0.3;
        let row: Vec<f64> = (-p..=p).map(|k| f(x0 + k as f64 * h)).collect();
        let d = |j: usize| w[j].iter().zip(&row).map(|(a, b)| a * b).sum::<f64>() / h.powi(j as i32 + 1);
        assert!((d(3) - 24.0).abs() < 1e-8);
        assert!((d(2) - (24.0 * x0 - 12.0)).abs() < 1e-8);
    }

    #[test]
    fn rejects_invalid_cases() {
        assert!(PdeCase::new(1, 0.0).validate().is_err());
        let mut c = PdeCase::new(2, 0.0);
        c.x_range = (0.0005, 1.0);
        assert!(c.validate().is_err());
        assert!(initial_condition_check(0.6, 1.0).is_err());
        assert!(boundary_derivative_check(1, 1.0).is_err());
    }
}
