//! Single configured runs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::{Amplitude, NonlinearityConfig, RunConfig, Shape};
use super::svg::sup_plot_svg;
use crate::comparison::{best_delta, max_certified_theta, threshold_type_one, threshold_type_two, ThresholdVerdict};
use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::geometry::ManifoldModel;
use crate::nonlinearity::Nonlinearity;
use crate::solver::export::{summarize, write_trajectory_csv, TrajectorySummary};
use crate::solver::{evolve_on, Discretization, RadialGrid, Trajectory, Verdict};
use crate::spectral::default_ground_state;

/// Nodes used to resolve the ground-state profile before sampling it.
const PROFILE_POINTS: usize = 4000;

/// Initial profile with unit sup-norm on the nodes of `disc`.
pub fn unit_profile(model: &ManifoldModel, disc: &Discretization, shape: Shape) -> Result<Vec<f64>> {
    let nodes = disc.nodes();
    let mut values: Vec<f64> = match shape {
        Shape::GroundStateScaled => {
            let radius = *nodes.last().unwrap();
            let phi = default_ground_state(model, radius, PROFILE_POINTS.max(nodes.len()))?;
            phi.sample(nodes).values
        }
        Shape::Bump { center, width } => nodes.iter().map(|r| (-((r - center) / width).powi(2)).exp()).collect(),
    };
    let top = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(top > 0.0) {
        return Err(Error::Data("initial profile vanishes on the grid".into()));
    }
    for v in &mut values {
        *v /= top;
    }
    *values.last_mut().unwrap() = 0.0;
    Ok(values)
}

/// Amplitude of the initial data; certified amplitudes are computed against
/// the unit ground state for `λ*`.
pub fn resolve_amplitude(cfg: &RunConfig, model: &ManifoldModel, nonlinearity: &Nonlinearity) -> Result<f64> {
    match cfg.initial.amplitude {
        Amplitude::Value(a) => Ok(a),
        Amplitude::Certified { certified } => {
            let Nonlinearity::TypeOne(spec) = nonlinearity else {
                return Err(Error::InvalidParameter("certified amplitude needs a type_one nonlinearity".into()));
            };
            let lambda = model.lambda_star();
            let delta = match certified.delta {
                Some(d) => d,
                None => best_delta(lambda, spec)
                    .ok_or_else(|| Error::InvalidParameter("no rate admits a global certificate".into()))?,
            };
            let theta = max_certified_theta(lambda, spec, 1.0, delta).ok_or_else(|| {
                Error::InvalidParameter(format!("no global certificate at delta = {delta}, lambda = {lambda}"))
            })?;
            Ok(certified.fraction * theta)
        }
    }
}

/// Analytic classification of the configured nonlinearity, if any.
pub fn analytic_verdict(nonlinearity: &NonlinearityConfig, model: &ManifoldModel) -> Option<ThresholdVerdict> {
    match *nonlinearity {
        NonlinearityConfig::Zero => None,
        NonlinearityConfig::TypeOne { alpha, q, .. } => Some(threshold_type_one(q, alpha, model)),
        NonlinearityConfig::TypeTwo { mu, p, .. } => Some(threshold_type_two(mu, p, model)),
    }
}

/// Everything needed to evolve a configuration, built once.
pub struct Prepared {
    pub model: ManifoldModel,
    pub disc: Discretization,
    pub profile: Vec<f64>,
}

impl Prepared {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        let model = cfg.manifold.build()?;
        let grid = RadialGrid::graded(cfg.grid.radius, cfg.grid.points)?;
        let disc = Discretization::new(&model, grid)?;
        let profile = unit_profile(&model, &disc, cfg.initial.shape)?;
        Ok(Self { model, disc, profile })
    }

    /// Runs `cfg`, which must share manifold, grid and shape with the
    /// configuration this was built from.
    pub fn run(&self, cfg: &RunConfig) -> Result<RunResult> {
        let start = Instant::now();
        let nonlinearity = cfg.nonlinearity.build()?;
        let amplitude = resolve_amplitude(cfg, &self.model, &nonlinearity)?;
        let u0 = RadialField::new(
            self.disc.nodes().to_vec(),
            self.profile.iter().map(|v| amplitude * v).collect(),
        );
        let (trajectory, verdict) = evolve_on(&self.disc, &nonlinearity, &u0, cfg.horizon, &cfg.controls)?;
        Ok(RunResult {
            analytic: analytic_verdict(&cfg.nonlinearity, &self.model),
            amplitude,
            trajectory,
            verdict,
            runtime_s: start.elapsed().as_secs_f64(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trajectory: Trajectory,
    pub verdict: Verdict,
    pub analytic: Option<ThresholdVerdict>,
    pub amplitude: f64,
    pub runtime_s: f64,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    amplitude: f64,
    analytic: Option<&'a ThresholdVerdict>,
    runtime_s: Option<f64>,
    #[serde(flatten)]
    trajectory: TrajectorySummary,
}

/// Builds and evolves a configuration.
pub fn simulate(cfg: &RunConfig) -> Result<RunResult> {
    Prepared::new(cfg)?.run(cfg)
}

/// Writes `trajectory_<id>.csv`, `summary.json` and, if enabled, `sup.svg`.
pub fn write_run(cfg: &RunConfig, result: &RunResult, id: usize, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut w = BufWriter::new(File::create(out_dir.join(format!("trajectory_{id}.csv")))?);
    write_trajectory_csv(&result.trajectory, &mut w)?;
    w.flush()?;
    let summary = RunSummary {
        amplitude: result.amplitude,
        analytic: result.analytic.as_ref(),
        runtime_s: cfg.timing.then_some(result.runtime_s),
        trajectory: summarize(&result.trajectory, &result.verdict),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Data(e.to_string()))?;
    std::fs::write(out_dir.join("summary.json"), json + "\n")?;
    if cfg.svg {
        std::fs::write(out_dir.join("sup.svg"), sup_plot_svg(&result.trajectory))?;
    }
    Ok(())
}
