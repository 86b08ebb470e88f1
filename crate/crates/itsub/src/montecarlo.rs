//! Path simulation of the tempered stable subordinator `D_λ` and first-passage
//! sampling of `E_λ(t)`, independent of every analytic formula in the crate.
//!
//! Paths advance on an operational-time grid of step `δ`. Near the horizon
//! the step is shrunk to `δ·2^{−j}` (`j ≤ refine_bisection`) based only on the
//! current gap, so the skeleton stays an exact sample of `D_λ`.

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::special_fn::regularized_upper_gamma;
use crate::stable_family::TemperedStableParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    /// Operational-time step `δ`.
    pub time_step: f64,
    /// Paths are simulated until `D_λ` exceeds this level.
    pub horizon: f64,
    pub seed: u64,
    pub refine_bisection: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { n_paths: 10_000, time_step: 1e-3, horizon: 1.0, seed: 0, refine_bisection: 10 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be ≥ 1".into()));
        }
        if !(self.time_step > 0.0 && self.time_step.is_finite()) {
            return Err(Error::Config(format!("time_step must be > 0, got {}", self.time_step)));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!("horizon must be > 0, got {}", self.horizon)));
        }
        if self.refine_bisection > 40 {
            return Err(Error::Config(format!("refine_bisection ≤ 40, got {}", self.refine_bisection)));
        }
        Ok(())
    }
}

/// Skeleton `(u, D_λ(u))` of one path, `D_λ(0) = 0`, ending at the first
/// grid point above the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub grid: Vec<(f64, f64)>,
    /// `(t, E_λ(t))` pairs recorded by [`PathRecord::cache_crossings`].
    pub crossing_cache: Vec<(f64, f64)>,
}

impl PathRecord {
    pub fn level(&self) -> f64 {
        self.grid.last().map_or(0.0, |g| g.1)
    }

    pub fn cache_crossings(&mut self, times: &[f64]) -> Result<()> {
        for &t in times {
            let e = first_passage(self, t)?;
            self.crossing_cache.push((t, e));
        }
        Ok(())
    }
}

/// Per-path random stream: the same seed and path id always give the same draws.
pub fn path_rng(seed: u64, path_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_id);
    rng
}

/// One-sided β-stable variate with Laplace transform `e^{−dt s^β}` (Kanter).
pub fn sample_stable_increment<R: Rng + ?Sized>(dt: f64, beta: f64, rng: &mut R) -> f64 {
    dt.powf(1.0 / beta) * standard_stable(beta, rng)
}

/// `S` with `E e^{−sS} = e^{−s^β}`:
/// `S = sin(βU)/sin(U)^{1/β} · (sin((1−β)U)/E)^{(1−β)/β}`.
fn standard_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let u = PI * rng.sample::<f64, _>(Open01);
    let e: f64 = rng.sample(Exp1);
    let b1 = 1.0 - beta;
    let ln_s = (beta * u).sin().ln() + b1 / beta * ((b1 * u).sin().ln() - e.ln()) - u.sin().ln() / beta;
    ln_s.exp()
}

/// Number of rejection rounds used by the last call is returned alongside
/// the draw from `e^{−λx+λ^β dt} f(x, dt)`.
pub fn sample_tempered_increment_counted<R: Rng + ?Sized>(
    dt: f64,
    params: &TemperedStableParams,
    rng: &mut R,
) -> Result<(f64, u64)> {
    let TemperedStableParams { beta, lambda } = *params;
    if lambda.powf(beta) * dt > 1.0 {
        return Err(Error::Config(format!("λ^β·dt = {} > 1; subdivide the step", lambda.powf(beta) * dt)));
    }
    Ok(tempered_by_rejection(dt.powf(1.0 / beta), beta, lambda, rng))
}

/// Rejection loop with a precomputed scale `dt^{1/β}`.
fn tempered_by_rejection<R: Rng + ?Sized>(scale: f64, beta: f64, lambda: f64, rng: &mut R) -> (f64, u64) {
    let mut rounds = 0;
    loop {
        rounds += 1;
        let x = scale * standard_stable(beta, rng);
        if lambda == 0.0 || rng.random::<f64>() < (-lambda * x).exp() {
            return (x, rounds);
        }
    }
}

/// Tempered stable increment by rejection from the stable law.
pub fn sample_tempered_increment<R: Rng + ?Sized>(dt: f64, params: &TemperedStableParams, rng: &mut R) -> Result<f64> {
    sample_tempered_increment_counted(dt, params, rng).map(|r| r.0)
}

/// Increment over `dt`, split into pieces with `λ^β·piece ≤ 1`.
pub fn sample_increment<R: Rng + ?Sized>(dt: f64, params: &TemperedStableParams, rng: &mut R) -> f64 {
    let pieces = (params.lambda.powf(params.beta) * dt).ceil().max(1.0);
    let piece = dt / pieces;
    (0..pieces as u64)
        .map(|_| sample_tempered_increment(piece, params, rng).expect("piece satisfies the rejection bound"))
        .sum()
}

/// `D_λ(u)` at a fixed operational time.
pub fn sample_subordinator<R: Rng + ?Sized>(u: f64, params: &TemperedStableParams, rng: &mut R) -> f64 {
    sample_increment(u, params, rng)
}

/// Step generator shared by stored and streamed paths.
struct Stepper {
    beta: f64,
    lambda: f64,
    delta: f64,
    horizon: f64,
    refine: u32,
    /// Refinement starts once the gap falls below this.
    refine_gap: f64,
    level: u32,
    /// Current step `h`, its split into `pieces` and each piece's `dt^{1/β}`.
    h: f64,
    pieces: u64,
    scale: f64,
    u: f64,
    d: f64,
    rng: ChaCha8Rng,
}

impl Stepper {
    fn new(config: &SimConfig, params: &TemperedStableParams, path_id: u64) -> Self {
        let mut s = Self {
            beta: params.beta,
            lambda: params.lambda,
            delta: config.time_step,
            horizon: config.horizon,
            refine: config.refine_bisection,
            refine_gap: (4.0 * config.time_step).powf(1.0 / params.beta),
            level: 0,
            h: 0.0,
            pieces: 1,
            scale: 0.0,
            u: 0.0,
            d: 0.0,
            rng: path_rng(config.seed, path_id),
        };
        s.set_step();
        s
    }

    fn set_step(&mut self) {
        self.h = self.delta / (1u64 << self.level) as f64;
        self.pieces = (self.lambda.powf(self.beta) * self.h).ceil().max(1.0) as u64;
        self.scale = (self.h / self.pieces as f64).powf(1.0 / self.beta);
    }

    /// Refinement level for the remaining gap: a step of length `h` moves
    /// `D_λ` by about `h^{1/β}`, so steps shrink until `h ≤ gap^β/4`.
    fn update_level(&mut self) {
        let gap = self.horizon - self.d;
        if self.refine == 0 || self.level == self.refine || gap >= self.refine_gap {
            return;
        }
        let target = 0.25 * gap.powf(self.beta);
        let want = (self.delta / target).log2().ceil().min(self.refine as f64) as u32;
        if want > self.level {
            self.level = want;
            self.set_step();
        }
    }

    fn step(&mut self) -> (f64, f64) {
        self.update_level();
        for _ in 0..self.pieces {
            self.d += tempered_by_rejection(self.scale, self.beta, self.lambda, &mut self.rng).0;
        }
        self.u += self.h;
        (self.u, self.d)
    }
}

pub fn simulate_path(config: &SimConfig, params: &TemperedStableParams, path_id: u64) -> Result<PathRecord> {
    config.validate()?;
    params.validate()?;
    let mut s = Stepper::new(config, params, path_id);
    let mut grid = vec![(0.0, 0.0)];
    while s.d <= config.horizon {
        grid.push(s.step());
    }
    Ok(PathRecord { grid, crossing_cache: Vec::new() })
}

pub fn simulate_paths(config: &SimConfig, params: &TemperedStableParams) -> Result<Vec<PathRecord>> {
    config.validate()?;
    (0..config.n_paths as u64).into_par_iter().map(|i| simulate_path(config, params, i)).collect()
}

/// `E_λ(t)` estimated as the midpoint of the grid bracket containing the crossing.
pub fn first_passage(path: &PathRecord, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return crate::error::domain(format!("first passage needs t > 0, got {t}"));
    }
    let i = path.grid.partition_point(|&(_, d)| d <= t);
    if i == path.grid.len() {
        return Err(Error::HorizonExceeded { target: t, reached: path.level() });
    }
    Ok(0.5 * (path.grid[i - 1].0 + path.grid[i].0))
}

/// First-passage samples for `t ≤ horizon` without storing paths. Identical
/// to [`simulate_path`] followed by [`first_passage`].
pub fn sample_first_passages(config: &SimConfig, params: &TemperedStableParams, t: f64) -> Result<Vec<f64>> {
    config.validate()?;
    params.validate()?;
    if !(t > 0.0 && t <= config.horizon) {
        return crate::error::domain(format!("first passage level {t} must lie in (0, {}]", config.horizon));
    }
    Ok((0..config.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = Stepper::new(config, params, i);
            let mut prev = 0.0;
            loop {
                let (u, d) = s.step();
                if d > t {
                    return 0.5 * (prev + u);
                }
                prev = u;
            }
        })
        .collect())
}

/// Sample mean of `x^q` and its plug-in standard error.
pub fn empirical_moment(samples: &[f64], q: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return crate::error::domain("empirical moment of an empty sample");
    }
    let n = samples.len() as f64;
    let vals: Vec<f64> = samples.iter().map(|x| x.powf(q)).collect();
    let mean = vals.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// Kolmogorov–Smirnov distance between a sample and a distribution function.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov p-value for distance `d` at sample size `n`.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let z = (sn + 0.12 + 0.11 / sn) * d;
    if z < 0.2 {
        return 1.0;
    }
    let s: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * k * k * z * z).exp()
        })
        .sum();
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² of a sample against a distribution function on `bins`
/// equal-width bins over `[lo, hi]`, with open tail cells at both ends.
/// Adjacent cells with expected count below 5 are merged.
pub fn chi_square_gof<F: Fn(f64) -> f64>(samples: &[f64], cdf: F, lo: f64, hi: f64, bins: usize) -> Result<ChiSquare> {
    if samples.is_empty() || bins == 0 || !(hi > lo) {
        return crate::error::domain("χ² test needs samples, bins ≥ 1 and hi > lo");
    }
    let n = samples.len() as f64;
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    // cells: (−∞, e0], (e0, e1], …, (e_bins, ∞)
    let mut observed = vec![0.0; bins + 2];
    for &x in samples {
        let cell = edges.partition_point(|&e| e < x);
        observed[cell] += 1.0;
    }
    let mut cum: Vec<f64> = edges.iter().map(|&e| cdf(e)).collect();
    cum.insert(0, 0.0);
    cum.push(1.0);
    let expected: Vec<f64> = cum.windows(2).map(|w| n * (w[1] - w[0]).max(0.0)).collect();

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (oi, ei) in observed.iter().zip(&expected) {
        o += oi;
        e += ei;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += o;
        last.1 += e;
    }
    if cells.len() < 2 {
        return crate::error::domain("χ² test has fewer than two usable cells");
    }
    let statistic = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum::<f64>();
    let dof = cells.len() - 1;
    Ok(ChiSquare { statistic, dof, p_value: regularized_upper_gamma(0.5 * dof as f64, 0.5 * statistic)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_large_tempered_step() {
        let p = TemperedStableParams::new(0.5, 4.0).unwrap();
        let mut rng = path_rng(1, 0);
        assert!(matches!(sample_tempered_increment(0.6, &p, &mut rng), Err(Error::Config(_))));
        assert!(sample_increment(0.6, &p, &mut rng) > 0.0);
    }

    #[test]
    fn untempered_increment_matches_stable_draw() {
        let p = TemperedStableParams::new(0.6, 0.0).unwrap();
        let (mut a, mut b) = (path_rng(9, 3), path_rng(9, 3));
        for _ in 0..100 {
            assert_eq!(sample_tempered_increment(0.3, &p, &mut a).unwrap(), sample_stable_increment(0.3, 0.6, &mut b));
        }
    }

    #[test]
    fn path_is_strictly_increasing_and_crosses() {
        let p = TemperedStableParams::new(0.5, 1.0).unwrap();
        let cfg = SimConfig { n_paths: 1, ..SimConfig::default() };
        let path = simulate_path(&cfg, &p, 7).unwrap();
        assert_eq!(path.grid[0], (0.0, 0.0));
        assert!(path.grid.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1));
        assert!(path.level() > 1.0);
        assert!(path.grid[..path.grid.len() - 1].iter().all(|g| g.1 <= 1.0));
    }

    #[test]
    fn refinement_shrinks_final_bracket() {
        let p = TemperedStableParams::new(0.5, 1.0).unwrap();
        let cfg = SimConfig { n_paths: 200, ..SimConfig::default() };
        let mut small = 0;
        for i in 0..cfg.n_paths as u64 {
            let g = simulate_path(&cfg, &p, i).unwrap().grid;
            let n = g.len();
            let h = g[n - 1].0 - g[n - 2].0;
            assert!(h <= cfg.time_step * (1.0 + 1e-12));
            assert!(h >= cfg.time_step / 1024.0 * (1.0 - 1e-12));
            if h < cfg.time_step {
                small += 1;
            }
        }
        assert!(small > 0);
    }

    #[test]
    fn crossing_beyond_horizon_is_an_error() {
        let p = TemperedStableParams::new(0.5, 1.0).unwrap();
        let mut path = simulate_path(&SimConfig::default(), &p, 0).unwrap();
        let beyond = path.level() + 1.0;
        assert!(matches!(first_passage(&path, beyond), Err(Error::HorizonExceeded { .. })));
        path.cache_crossings(&[0.25, 0.5]).unwrap();
        assert_eq!(path.crossing_cache.len(), 2);
        assert!(path.crossing_cache[0].1 <= path.crossing_cache[1].1);
    }

    #[test]
    fn empirical_moment_of_constant() {
        assert_eq!(empirical_moment(&[2.0; 10], 1.0).unwrap(), (2.0, 0.0));
        assert_eq!(empirical_moment(&[2.0; 10], 2.0).unwrap(), (4.0, 0.0));
        assert!(empirical_moment(&[], 1.0).is_err());
    }

    #[test]
    fn ks_of_uniform_grid() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let d = ks_distance(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.0005).abs() < 1e-12);
        assert!(ks_p_value(d, 1000) > 0.99);
        assert!(ks_p_value(0.1, 1000) < 1e-6);
    }

    #[test]
    fn chi_square_of_exact_counts() {
        let xs: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        let c = chi_square_gof(&xs, |x| x.clamp(0.0, 1.0), 0.0, 1.0, 40).unwrap();
        assert!(c.statistic < 1e-9);
        assert!(c.p_value > 0.999);
    }
}
