//! Kernel, ground-state and threshold audits behind the CLI.

use serde::{Deserialize, Serialize};

use super::config::{line_of_key, GridConfig, ManifoldConfig, NonlinearityConfig};
use crate::comparison::ThresholdVerdict;
use crate::error::{Error, Result};
use crate::heat_kernel::{
    calibrate_bounds, composition_error, log_rate, BoundCalibration, MarchedKernel, RichardsonKernel,
};
use crate::spectral::solve_ground_state;

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config {
        line: e.line().max(1),
        message: e.to_string(),
    })
}

fn check(text: &str, key: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config {
            line: line_of_key(text, key),
            message: message.to_string(),
        })
    }
}

fn range_ok(r: (f64, f64)) -> bool {
    r.0.is_finite() && r.1.is_finite() && r.0 >= 0.0 && r.1 > r.0
}

fn default_radii() -> (f64, f64) {
    (0.0, 5.0)
}
fn default_times() -> (f64, f64) {
    (0.1, 5.0)
}
fn default_rate_window() -> (f64, f64) {
    (10.0, 40.0)
}
fn default_samples() -> usize {
    11
}
fn default_composition() -> (f64, f64) {
    (1.0, 1.0)
}
fn default_r_check() -> f64 {
    5.0
}
fn default_calibration_grid() -> GridConfig {
    GridConfig {
        radius: 15.0,
        points: 1500,
    }
}
fn default_march_steps() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelAuditConfig {
    pub manifold: ManifoldConfig,
    /// Grid of the eigendecomposition kernel (decay rate, composition).
    pub grid: GridConfig,
    /// Grid of the marched kernel used for the two-sided calibration.
    #[serde(default = "default_calibration_grid")]
    pub calibration_grid: GridConfig,
    #[serde(default = "default_march_steps")]
    pub march_steps: usize,
    #[serde(default = "default_radii")]
    pub radii: (f64, f64),
    #[serde(default = "default_times")]
    pub times: (f64, f64),
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_rate_window")]
    pub rate_window: (f64, f64),
    /// Split `(s, t)` of the composition check `K(s + t) = e^{tL} K(s)`.
    #[serde(default = "default_composition")]
    pub composition: (f64, f64),
    #[serde(default = "default_r_check")]
    pub r_check: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelAuditReport {
    pub calibration: BoundCalibration,
    pub rate: f64,
    pub lambda_one: f64,
    /// `|rate + λ₁| / λ₁`.
    pub rate_error: f64,
    pub composition_error: f64,
}

impl KernelAuditConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse(text)?;
        check(text, "dim", (2..=10).contains(&cfg.manifold.dim), "'dim' must be in 2..=10")?;
        check(text, "radius", cfg.grid.radius > 0.0 && cfg.grid.radius <= cfg.manifold.r_max, "'radius' must lie in (0, r_max]")?;
        let cal = cfg.calibration_grid;
        check(text, "calibration_grid", cal.radius > 0.0 && cal.radius <= cfg.manifold.r_max && cal.points <= 100_000, "'calibration_grid' must lie inside r_max with at most 100000 points")?;
        check(text, "march_steps", (1..=1_000_000).contains(&cfg.march_steps), "'march_steps' must be in 1..=1000000")?;
        check(text, "radii", range_ok(cfg.radii) && cfg.radii.1 < cal.radius.min(cfg.grid.radius), "'radii' must be an increasing pair inside the grid")?;
        check(text, "times", range_ok(cfg.times) && cfg.times.0 > 0.0, "'times' must be an increasing positive pair")?;
        check(text, "samples", cfg.samples >= 2 && cfg.samples <= 1000, "'samples' must be in 2..=1000")?;
        check(text, "rate_window", range_ok(cfg.rate_window) && cfg.rate_window.0 > 0.0, "'rate_window' must be an increasing positive pair")?;
        check(text, "composition", cfg.composition.0 > 0.0 && cfg.composition.1 > 0.0, "'composition' times must be positive")?;
        check(text, "r_check", cfg.r_check > 0.0, "'r_check' must be positive")?;
        Ok(cfg)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Calibrates the kernel against `h_n`, measures its decay rate at the pole
/// and checks the semigroup composition law.
pub fn kernel_audit(cfg: &KernelAuditConfig) -> Result<KernelAuditReport> {
    let model = cfg.manifold.build()?;
    let marched = MarchedKernel::new(&model, cfg.calibration_grid.radius, cfg.calibration_grid.points, cfg.march_steps)?;
    let radii = linspace(cfg.radii.0, cfg.radii.1, cfg.samples);
    let times = linspace(cfg.times.0, cfg.times.1, cfg.samples);
    let calibration = calibrate_bounds(&marched, model.dim(), &radii, &times)?;
    let kernel = RichardsonKernel::new(&model, cfg.grid.radius, cfg.grid.points)?;
    let rate_times = linspace(cfg.rate_window.0, cfg.rate_window.1, 31);
    let values: Vec<f64> = rate_times.iter().map(|&t| kernel.origin_profile(&[0.0], t)[0]).collect();
    let rate = log_rate(&rate_times, &values)?;
    let lambda_one = model.lambda_one();
    Ok(KernelAuditReport {
        calibration,
        rate,
        lambda_one,
        rate_error: (rate + lambda_one).abs() / lambda_one,
        composition_error: composition_error(&kernel, cfg.composition.0, cfg.composition.1, cfg.r_check),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub manifold: ManifoldConfig,
    /// Spectral parameter; `λ*` of the model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub grid: GridConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub lambda: f64,
    pub radius: f64,
    pub ode_residual: f64,
    pub c_low: f64,
    pub c_up: f64,
    pub envelope_ratio: f64,
    pub sup: f64,
    pub nodes: Vec<f64>,
    pub profile: Vec<f64>,
}

impl EigenConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse(text)?;
        check(text, "dim", (2..=10).contains(&cfg.manifold.dim), "'dim' must be in 2..=10")?;
        check(text, "radius", cfg.grid.radius > 0.0 && cfg.grid.radius <= cfg.manifold.r_max, "'radius' must lie in (0, r_max]")?;
        check(text, "points", cfg.grid.points >= 10 && cfg.grid.points <= 1_000_000, "'points' must be in 10..=1000000")?;
        if let Some(l) = cfg.lambda {
            check(text, "lambda", l.is_finite() && l >= 0.0, "'lambda' must be finite and >= 0")?;
        }
        Ok(cfg)
    }
}

/// Solves the ground-state ODE and reports residual and envelope constants.
pub fn eigen_report(cfg: &EigenConfig) -> Result<EigenReport> {
    let model = cfg.manifold.build()?;
    let lambda = cfg.lambda.unwrap_or_else(|| model.lambda_star());
    let phi = solve_ground_state(&model, lambda, cfg.grid.radius, cfg.grid.points)?;
    let (c_low, c_up) = phi.envelope();
    let profile = phi.profile();
    Ok(EigenReport {
        lambda,
        radius: phi.radius(),
        ode_residual: phi.ode_residual(),
        c_low,
        c_up,
        envelope_ratio: phi.envelope_ratio(),
        sup: phi.sup(),
        nodes: profile.nodes,
        profile: profile.values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    pub manifold: ManifoldConfig,
    pub nonlinearity: NonlinearityConfig,
}

impl ThresholdConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = parse(text)?;
        check(text, "dim", (2..=10).contains(&cfg.manifold.dim), "'dim' must be in 2..=10")?;
        cfg.nonlinearity.build().map_err(|e| Error::Config {
            line: line_of_key(text, "nonlinearity"),
            message: e.to_string(),
        })?;
        Ok(cfg)
    }
}

/// Analytic verdict for the configured model and nonlinearity.
pub fn threshold_report(cfg: &ThresholdConfig) -> Result<Option<ThresholdVerdict>> {
    let model = cfg.manifold.build()?;
    Ok(super::run::analytic_verdict(&cfg.nonlinearity, &model))
}
