//! Named strategies selected at runtime: density methods, Laplace inverters
//! and self-checks all live in a [`Registry`].

use crate::error::{Error, Result};
use crate::its_density::{eval, eval_integral, eval_series, DensityResult, EvalConfig, EvalPoint};
use crate::moments::{LaplaceInverter, Stehfest, Talbot};
use crate::stable_family::{inverse_stable_density_integral, inverse_stable_density_series, TemperedStableParams};

/// Ordered name → strategy table.
pub struct Registry<T: ?Sized> {
    entries: Vec<(&'static str, Box<T>)>,
}

impl<T: ?Sized> Default for Registry<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T: ?Sized> Registry<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, name: &'static str, item: Box<T>) -> Result<()> {
        if self.entries.iter().any(|(n, _)| *n == name) {
            return Err(Error::Config(format!("'{name}' is already registered")));
        }
        self.entries.push((name, item));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, item)| item.as_ref())
            .ok_or_else(|| Error::Config(format!("unknown '{name}'; known: {}", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &T)> {
        self.entries.iter().map(|(n, item)| (*n, item.as_ref()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A way of evaluating `h_λ(x,t)`.
pub trait DensityMethod: Send + Sync {
    fn density(&self, p: EvalPoint, params: &TemperedStableParams, config: &EvalConfig) -> Result<DensityResult>;
}

/// Integral representation; the inverse stable integral at λ = 0.
pub struct IntegralMethod;

/// Series representation; the inverse stable series at λ = 0.
pub struct SeriesMethod;

/// Series or integral by the dispatcher policy.
pub struct AutoMethod;

impl DensityMethod for IntegralMethod {
    fn density(&self, p: EvalPoint, params: &TemperedStableParams, config: &EvalConfig) -> Result<DensityResult> {
        if params.lambda == 0.0 {
            return inverse_stable_density_integral(p.x, p.t, params.beta, &config.quad).map(Into::into);
        }
        eval_integral(p, params, &config.quad)
    }
}

impl DensityMethod for SeriesMethod {
    fn density(&self, p: EvalPoint, params: &TemperedStableParams, config: &EvalConfig) -> Result<DensityResult> {
        if params.lambda == 0.0 {
            return inverse_stable_density_series(p.x, p.t, params.beta, config.max_terms).map(Into::into);
        }
        eval_series(p, params, config.max_terms)
    }
}

impl DensityMethod for AutoMethod {
    fn density(&self, p: EvalPoint, params: &TemperedStableParams, config: &EvalConfig) -> Result<DensityResult> {
        eval(p, params, config)
    }
}

pub fn density_methods() -> Registry<dyn DensityMethod> {
    let mut r: Registry<dyn DensityMethod> = Registry::new();
    r.register("auto", Box::new(AutoMethod)).expect("fresh registry");
    r.register("integral", Box::new(IntegralMethod)).expect("fresh registry");
    r.register("series", Box::new(SeriesMethod)).expect("fresh registry");
    r
}

pub fn laplace_inverters() -> Registry<dyn LaplaceInverter> {
    let mut r: Registry<dyn LaplaceInverter> = Registry::new();
    r.register("talbot", Box::new(Talbot::default())).expect("fresh registry");
    r.register("stehfest", Box::new(Stehfest::default())).expect("fresh registry");
    r
}
