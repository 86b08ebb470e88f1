use clap::Args;

use itsub::its_density::{cdf, EvalConfig, EvalPoint};
use itsub::moments::{moment_report, MomentQuery};
use itsub::montecarlo::{empirical_moment, ks_distance, ks_p_value, sample_first_passages, SimConfig};
use itsub::pde_check::{pde_residual, residual_convergence, PdeCase};
use itsub::quadrature::QuadratureSpec;
use itsub::registry::{density_methods, laplace_inverters};
use itsub::selfcheck::{checks, select, CheckContext};
use itsub::Error;

use crate::grid::GridSpec;
use crate::table::{float, Cell, Table};
use crate::{single, CliError, ModelArgs, OutputArgs};

fn usage(e: Error) -> CliError {
    CliError::Usage(e.to_string())
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "1")]
    t: GridSpec,
    /// x-grid, e.g. `0:4:0.01`.
    #[arg(long)]
    x: GridSpec,
    /// Relative tolerance of quadrature and series.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Density method: auto, integral or series.
    #[arg(long, default_value = "auto")]
    method: String,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn density(a: &DensityArgs) -> Result<(), CliError> {
    let params = a.model.params()?;
    let t = single(&a.t, "t")?;
    if !(t > 0.0) {
        return Err(CliError::Usage(format!("t must be positive, got {t}")));
    }
    if !(a.tol > 0.0 && a.tol < 1.0) {
        return Err(CliError::Usage(format!("tol must lie in (0,1), got {}", a.tol)));
    }
    let methods = density_methods();
    let method = methods.get(&a.method).map_err(usage)?;
    let config = EvalConfig {
        quad: QuadratureSpec { rel_tol: a.tol, ..QuadratureSpec::default() },
        series_rel_tol: a.tol,
        ..EvalConfig::default()
    };
    let mut table = Table::new(&["x", "h", "err", "method"]);
    let mut failed = 0;
    for x in a.x.points() {
        let row = match method.density(EvalPoint::new(x, t), &params, &config) {
            Ok(r) => {
                if !(r.converged && r.value.is_finite()) {
                    failed += 1;
                }
                // within-band negatives are roundoff, not signal
                let h = if r.converged && r.value < 0.0 && -r.value <= r.error_estimate { 0.0 } else { r.value };
                vec![Cell::Num(x), Cell::Num(h), Cell::Num(r.error_estimate), Cell::Text(r.method.as_str().into())]
            }
            Err(e) => {
                failed += 1;
                eprintln!("x={}: {e}", float(x));
                vec![Cell::Num(x), Cell::Num(f64::NAN), Cell::Num(f64::INFINITY), Cell::Text("failed".into())]
            }
        };
        table.push(row);
    }
    table.write(a.output.format, &mut a.output.open()?)?;
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} point(s) did not converge")));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Moment order q > 0.
    #[arg(long, default_value_t = 1.0)]
    q: f64,
    /// t-grid: a value, `start:stop:step`, `lin:a:b:n` or `log:a:b:n`.
    #[arg(long, default_value = "log:1e-3:1e3:61")]
    t: GridSpec,
    /// Laplace inversion: talbot or stehfest.
    #[arg(long, default_value = "talbot")]
    inversion: String,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn moments(a: &MomentsArgs) -> Result<(), CliError> {
    let params = a.model.params()?;
    let inverters = laplace_inverters();
    let inverter = inverters.get(&a.inversion).map_err(usage)?;
    let ts = a.t.points();
    for &t in &ts {
        MomentQuery::new(a.q, t, params).map_err(usage)?;
    }
    let mut table = Table::new(&["t", "exact", "small_t_asym", "large_t_asym", "ratio_small", "ratio_large"]);
    let mut failed = 0;
    for t in ts {
        let query = MomentQuery::new(a.q, t, params).map_err(usage)?;
        match moment_report(&query, inverter) {
            Ok(r) => {
                let large = r.large_t_asymptotic.unwrap_or(f64::NAN);
                table.push(vec![
                    Cell::Num(t),
                    Cell::Num(r.exact),
                    Cell::Num(r.small_t_asymptotic),
                    Cell::Num(large),
                    Cell::Num(r.exact / r.small_t_asymptotic),
                    Cell::Num(r.exact / large),
                ]);
            }
            Err(e) => {
                failed += 1;
                eprintln!("t={}: {e}", float(t));
                let mut row = vec![Cell::Num(t)];
                row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), 5));
                table.push(row);
            }
        }
    }
    table.write(a.output.format, &mut a.output.open()?)?;
    if failed > 0 {
        return Err(CliError::Numerical(format!("inversion failed at {failed} time(s)")));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Level(s) t whose first passage is recorded.
    #[arg(long, default_value = "1")]
    t: GridSpec,
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Operational-time step of the subordinator.
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let params = a.model.params()?;
    let ts = a.t.points();
    let horizon = ts.iter().copied().fold(0.0, f64::max);
    let config = SimConfig { n_paths: a.paths, time_step: a.dt, horizon, seed: a.seed, ..SimConfig::default() };
    if !ts.is_empty() {
        config.validate().map_err(usage)?;
    }
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(CliError::Usage("levels t must be positive".into()));
    }
    let mut table = Table::new(&["path_id", "t", "E_lambda"]);
    let spec = QuadratureSpec::default();
    for t in ts {
        let samples = sample_first_passages(&config, &params, t).map_err(|e| CliError::Numerical(e.to_string()))?;
        for (i, &e) in samples.iter().enumerate() {
            table.push(vec![Cell::Int(i as u64), Cell::Num(t), Cell::Num(e)]);
        }
        let (mean, se) = empirical_moment(&samples, 1.0).map_err(|e| CliError::Numerical(e.to_string()))?;
        let n = samples.len() as f64;
        let var = se * se * n;
        let ks = ks_distance(&samples, |x| cdf(x, t, &params, &spec).unwrap_or(f64::NAN));
        let exact = MomentQuery::new(1.0, t, params)
            .and_then(|q| itsub::moments::moment_exact(&q, laplace_inverters().get("talbot")?))
            .unwrap_or(f64::NAN);
        eprintln!(
            "t={t}: n={} mean={mean:.6} var={var:.6} se={se:.2e} exact_mean={exact:.6} z={:.2} ks={ks:.5} ks_p={:.3}",
            samples.len(),
            (mean - exact) / se,
            ks_p_value(ks, samples.len()),
        );
    }
    table.write(a.output.format, &mut a.output.open()?)?;
    Ok(())
}

#[derive(Debug, Args)]
pub struct PdeArgs {
    /// Order m of the equation; the density index is β = 1/m.
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Evaluate a density of this index instead (negative control).
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    hx: f64,
    #[arg(long, default_value_t = 1e-3)]
    ht: f64,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn pde_check(a: &PdeArgs) -> Result<(), CliError> {
    let mut case = PdeCase::new(a.m, a.lambda).with_steps(a.hx, a.ht);
    if let Some(beta) = a.beta {
        case.beta = beta;
    }
    case.validate().map_err(usage)?;
    let numerical = |e: Error| CliError::Numerical(e.to_string());
    let r = pde_residual(&case).map_err(numerical)?;
    let c = residual_convergence(&case).map_err(numerical)?;
    let mut table = Table::new(&["x", "t", "residual", "dt_h"]);
    for p in &r.points {
        table.push(vec![Cell::Num(p.x), Cell::Num(p.t), Cell::Num(p.residual), Cell::Num(p.dt_h)]);
    }
    table.write(a.output.format, &mut a.output.open()?)?;
    eprintln!(
        "m={} lambda={} beta={}: max|residual|={:.3e} relative={:.3e} halving_ratio={:.3}{}",
        case.m,
        case.lambda,
        case.beta,
        r.max_abs_residual,
        r.relative,
        c.ratio,
        if c.too_coarse { " (steps too coarse)" } else { "" }
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SelfcheckArgs {
    /// Run only this check, e.g. `its_density.normalization`.
    #[arg(long)]
    only: Option<String>,
    /// Run the checks of one module, e.g. `pde`.
    #[arg(long)]
    check: Option<String>,
    /// Stable index for parameterized checks; off 1/m the PDE check becomes a negative control.
    #[arg(long)]
    beta: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

pub fn selfcheck(a: &SelfcheckArgs) -> Result<(), CliError> {
    if let Some(b) = a.beta {
        if !(b > 0.0 && b < 1.0) {
            return Err(CliError::Usage(format!("beta must lie in (0,1), got {b}")));
        }
    }
    let registry = checks();
    let names = select(&registry, a.only.as_deref(), a.check.as_deref()).map_err(usage)?;
    let ctx = CheckContext { beta: a.beta };
    let mut table = Table::new(&["check", "status", "value", "threshold", "detail"]);
    let mut failed = 0;
    for name in names {
        let check = registry.get(name).map_err(usage)?;
        let row = match check.run(&ctx) {
            Ok(o) => {
                failed += usize::from(!o.passed);
                let status = if o.passed { "PASS" } else { "FAIL" };
                vec![Cell::Text(name.into()), Cell::Text(status.into()), Cell::Num(o.value), Cell::Num(o.threshold), Cell::Text(o.detail)]
            }
            Err(e) => {
                failed += 1;
                let nan = Cell::Num(f64::NAN);
                vec![Cell::Text(name.into()), Cell::Text("ERROR".into()), nan.clone(), nan, Cell::Text(e.to_string())]
            }
        };
        table.push(row);
    }
    table.write(a.output.format, &mut a.output.open()?)?;
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
