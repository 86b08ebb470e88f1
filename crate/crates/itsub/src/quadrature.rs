//! Adaptive Gauss–Kronrod quadrature on semi-infinite intervals for damped,
//! possibly oscillatory integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Relative integrand magnitude below which the tail is cut.
    pub truncation_threshold: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            truncation_threshold: 1e-16,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Config(format!(
                "quadrature tolerances must be positive (abs={}, rel={})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::Config("max_subdivisions must be at least 1".into()));
        }
        if !(self.truncation_threshold >= 0.0 && self.truncation_threshold < 1.0) {
            return Err(Error::Config(format!(
                "truncation_threshold must lie in [0,1), got {}",
                self.truncation_threshold
            )));
        }
        Ok(())
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
    pub converged: bool,
    /// The error estimate is dominated by floating-point cancellation in the
    /// integrand; further subdivision cannot improve it.
    pub roundoff_limited: bool,
}

impl QuadratureResult {
    /// Converged, or limited only by the precision of the integrand itself.
    pub fn usable(&self) -> bool {
        self.value.is_finite() && (self.converged || self.roundoff_limited)
    }
}

/// How `(0, ∞)` is cut into initial panels.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelLayout {
    /// Width of the first panel; later panels double.
    pub scale: f64,
    /// Upper bound on any initial panel width.
    pub max_panel_width: f64,
    /// Extra cut points (e.g. sign changes of an oscillating factor), ascending.
    pub breakpoints: Vec<f64>,
    /// `Some(γ)` when `f(y) ~ y^{γ-1}` at 0; the first panel is integrated in
    /// `v` with `y = y₁ v^{1/γ}`.
    pub endpoint_power: Option<f64>,
}

impl Default for PanelLayout {
    fn default() -> Self {
        Self {
            scale: 1.0,
            max_panel_width: f64::INFINITY,
            breakpoints: Vec::new(),
            endpoint_power: None,
        }
    }
}

impl PanelLayout {
    pub fn with_scale(scale: f64) -> Self {
        Self { scale, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy)]
enum Map {
    Linear,
    Power { y1: f64, inv_gamma: f64 },
}

impl Map {
    #[inline]
    fn apply(&self, v: f64) -> (f64, f64) {
        match *self {
            Map::Linear => (v, 1.0),
            Map::Power { y1, inv_gamma } => {
                let p = v.powf(inv_gamma);
                (y1 * p, y1 * inv_gamma * p / v)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    map: Map,
    value: f64,
    err: f64,
    roundoff: f64,
    max_abs: f64,
}

impl Panel {
    fn eval<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, map: Map) -> Self {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let g = |v: f64| {
            let (y, jac) = map.apply(v);
            let fy = f(y);
            if fy == 0.0 {
                0.0
            } else {
                fy * jac
            }
        };
        let fc = g(c);
        let mut kron = fc * WGK[7];
        let mut gauss = fc * WG[3];
        let mut abs_sum = fc.abs() * WGK[7];
        let mut max_abs = fc.abs();
        for j in 0..7 {
            let dx = h * XGK[j];
            let f1 = g(c - dx);
            let f2 = g(c + dx);
            kron += WGK[j] * (f1 + f2);
            abs_sum += WGK[j] * (f1.abs() + f2.abs());
            max_abs = max_abs.max(f1.abs()).max(f2.abs());
            if j % 2 == 1 {
                gauss += WG[j / 2] * (f1 + f2);
            }
        }
        let value = kron * h;
        let roundoff = 50.0 * f64::EPSILON * abs_sum * h.abs();
        let err = ((kron - gauss) * h).abs().max(roundoff);
        let err = if err.is_finite() { err } else { f64::INFINITY };
        let roundoff = if roundoff.is_finite() { roundoff } else { f64::INFINITY };
        Self { a, b, map, value, err, roundoff, max_abs }
    }

    fn width(&self) -> f64 {
        self.b - self.a
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| self.width().total_cmp(&other.width()))
    }
}

fn refine<F: Fn(f64) -> f64>(f: &F, panels: Vec<Panel>, spec: &QuadratureSpec) -> QuadratureResult {
    let mut used = panels.len();
    let mut heap: BinaryHeap<Panel> = panels.into_iter().collect();
    let totals = |heap: &BinaryHeap<Panel>| {
        heap.iter()
            .fold((0.0, 0.0, 0.0), |(v, e, r), p| (v + p.value, e + p.err, r + p.roundoff))
    };
    let (mut value, mut err, mut floor) = totals(&heap);
    while err > spec.target(value) && err > 4.0 * floor && used < spec.max_subdivisions {
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        let left = Panel::eval(f, worst.a, mid, worst.map);
        let right = Panel::eval(f, mid, worst.b, worst.map);
        value += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        floor += left.roundoff + right.roundoff - worst.roundoff;
        heap.push(left);
        heap.push(right);
        used += 1;
        if used % 64 == 0 {
            (value, err, floor) = totals(&heap);
        }
    }
    let (value, err, floor) = totals(&heap);
    QuadratureResult {
        value,
        error_estimate: err,
        subdivisions_used: used,
        converged: err <= spec.target(value) && value.is_finite(),
        roundoff_limited: err <= 4.0 * floor,
    }
}

/// ∫_a^b f with global adaptive bisection.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<QuadratureResult> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("finite interval expected, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            subdivisions_used: 0,
            converged: true,
            roundoff_limited: false,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut r = refine(&f, vec![Panel::eval(&f, lo, hi, Map::Linear)], spec);
    r.value *= sign;
    Ok(r)
}

/// ∫_0^∞ f with the default panel layout.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<QuadratureResult> {
    integrate_semi_infinite_with(f, spec, &PanelLayout::default())
}

/// ∫_0^∞ f on geometric panels, cut where the integrand has fallen below
/// `truncation_threshold` times its peak on two consecutive panels.
pub fn integrate_semi_infinite_with<F: Fn(f64) -> f64>(
    f: F,
    spec: &QuadratureSpec,
    layout: &PanelLayout,
) -> Result<QuadratureResult> {
    spec.validate()?;
    if !(layout.scale > 0.0 && layout.scale.is_finite()) {
        return Err(Error::Config(format!("panel scale must be positive, got {}", layout.scale)));
    }
    if !(layout.max_panel_width > 0.0) {
        return Err(Error::Config("max_panel_width must be positive".into()));
    }
    if let Some(g) = layout.endpoint_power {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Config(format!("endpoint power must be positive, got {g}")));
        }
    }

    let mut panels = Vec::new();
    let mut breaks = layout.breakpoints.iter().copied().filter(|&b| b > 0.0).peekable();
    let mut start = 0.0;
    let mut width = layout.scale;
    let mut peak = 0.0f64;
    let mut quiet = 0;
    let mut truncated = false;
    while panels.len() < spec.max_subdivisions {
        let mut end = start + width.min(layout.max_panel_width);
        while let Some(&bp) = breaks.peek() {
            if bp <= start {
                breaks.next();
            } else {
                if bp < end {
                    end = bp;
                    breaks.next();
                }
                break;
            }
        }
        if !end.is_finite() || end > 1e300 {
            truncated = true;
            break;
        }
        let panel = match (start == 0.0, layout.endpoint_power) {
            (true, Some(g)) => Panel::eval(&f, 0.0, 1.0, Map::Power { y1: end, inv_gamma: 1.0 / g }),
            _ => Panel::eval(&f, start, end, Map::Linear),
        };
        peak = peak.max(panel.max_abs);
        panels.push(panel);
        if peak > 0.0 && panel.max_abs <= spec.truncation_threshold * peak {
            quiet += 1;
            if quiet >= 2 {
                truncated = true;
                break;
            }
        } else {
            quiet = 0;
        }
        if peak == 0.0 && panels.len() >= 48 {
            truncated = true;
            break;
        }
        start = end;
        width *= 2.0;
    }
    let mut r = refine(&f, panels, spec);
    if !truncated {
        r.converged = false;
        r.roundoff_limited = false;
    }
    Ok(r)
}

/// Wynn epsilon extrapolation of a sequence of partial sums. Returns the
/// estimate and an error indicator.
pub fn wynn_epsilon(sums: &[f64]) -> (f64, f64) {
    let n = sums.len();
    match n {
        0 => return (0.0, f64::INFINITY),
        1 => return (sums[0], f64::INFINITY),
        _ => {}
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = sums.to_vec();
    let mut evens: Vec<f64> = vec![sums[n - 1]];
    let mut best = (sums[n - 1], (sums[n - 1] - sums[n - 2]).abs());
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        let mut degenerate = false;
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 || !d.is_finite() {
                degenerate = true;
                break;
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        if degenerate {
            break;
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            let last = *cur.last().unwrap();
            if !last.is_finite() {
                break;
            }
            // spread within the column; a constant column is exact
            let err = if cur.len() >= 2 {
                (last - cur[cur.len() - 2]).abs()
            } else {
                evens.last().map(|e| (last - e).abs()).unwrap_or(f64::INFINITY)
            };
            evens.push(last);
            best = (last, err);
        }
    }
    best
}

/// ∫_0^∞ f for integrands that oscillate too slowly to be damped in time:
/// integrate between consecutive `zeros` and extrapolate the partial sums.
pub fn integrate_between_zeros<F, Z>(f: F, zeros: Z, spec: &QuadratureSpec, max_cycles: usize) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
    Z: IntoIterator<Item = f64>,
{
    spec.validate()?;
    let mut sums = Vec::new();
    let mut total = 0.0;
    let mut used = 0;
    let mut quad_err = 0.0;
    let mut lo = 0.0;
    let mut last = (f64::NAN, f64::INFINITY);
    // tolerance scale: the partial sums, since the limit itself may be 0
    let mut size: f64 = 0.0;
    let mut pieces_usable = true;
    for z in zeros.into_iter().take(max_cycles) {
        if z <= lo {
            continue;
        }
        let piece = integrate_interval(&f, lo, z, spec)?;
        pieces_usable &= piece.usable();
        used += piece.subdivisions_used;
        quad_err += piece.error_estimate;
        total += piece.value;
        sums.push(total);
        size = size.max(total.abs());
        lo = z;
        if sums.len() >= 6 {
            let est = wynn_epsilon(&sums);
            let target = spec.target(est.0.abs().max(size));
            if est.1 <= target && last.1 <= target * 10.0 && pieces_usable {
                return Ok(QuadratureResult {
                    value: est.0,
                    error_estimate: est.1 + quad_err,
                    subdivisions_used: used,
                    converged: true,
                    roundoff_limited: false,
                });
            }
            last = est;
        }
    }
    Ok(QuadratureResult {
        value: last.0,
        error_estimate: last.1 + quad_err,
        subdivisions_used: used,
        converged: false,
        roundoff_limited: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponential() {
        let r = integrate_semi_infinite(|y: f64| (-y).exp(), &QuadratureSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn damped_sine() {
        let r = integrate_semi_infinite(|y: f64| (-y).exp() * y.sin(), &QuadratureSpec::default()).unwrap();
        assert!(r.converged);
        assert!((r.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn exponential_integral_oracle() {
        let r = integrate_semi_infinite(|y: f64| (-y).exp() / (y + 1.0), &QuadratureSpec::default()).unwrap();
        assert!((r.value - 0.596_347_362_323_194_1).abs() < 1e-10);
    }

    #[test]
    fn oscillating_with_zero_breakpoints() {
        // zeros of sin(50 √y) at y = (kπ/50)²
        let layout = PanelLayout {
            breakpoints: (1..4000).map(|k| (k as f64 * PI / 50.0).powi(2)).collect(),
            ..PanelLayout::default()
        };
        let f = |y: f64| (-0.01 * y).exp() * (50.0 * y.sqrt()).sin();
        let r = integrate_semi_infinite_with(f, &QuadratureSpec::default(), &layout).unwrap();
        // ∫_0^∞ e^{-ay} sin(b√y) dy = (b/(2a)) √(π/a) e^{-b²/(4a)}
        let (a, b) = (0.01f64, 50.0f64);
        let exact = b / (2.0 * a) * (PI / a).sqrt() * (-b * b / (4.0 * a)).exp();
        assert!(r.usable(), "{r:?}");
        assert!((r.value - exact).abs() < 1e-6, "{} vs {exact}", r.value);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫ y^{-1/2} e^{-y} = √π
        let layout = PanelLayout { endpoint_power: Some(0.5), ..PanelLayout::default() };
        let r = integrate_semi_infinite_with(|y: f64| y.powf(-0.5) * (-y).exp(), &QuadratureSpec::default(), &layout)
            .unwrap();
        assert!(r.converged);
        assert!((r.value - PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let spec = QuadratureSpec { max_subdivisions: 3, ..QuadratureSpec::default() };
        let r = integrate_semi_infinite(|y: f64| (-0.001 * y).exp() * (30.0 * y).sin(), &spec).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = QuadratureSpec { abs_tol: 0.0, ..QuadratureSpec::default() };
        assert!(integrate_semi_infinite(|y: f64| (-y).exp(), &spec).is_err());
    }

    #[test]
    fn wynn_sums_alternating_constant_sequence_to_zero() {
        let sums: Vec<f64> = (0..8).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(wynn_epsilon(&sums).0.abs() < 1e-15);
        // ln 2 = 1 - 1/2 + 1/3 - …
        let mut s = 0.0;
        let sums: Vec<f64> = (1..14)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                s
            })
            .collect();
        assert!((wynn_epsilon(&sums).0 - 2f64.ln()).abs() < 1e-8);
    }
}
