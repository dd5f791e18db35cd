//! Configured runs, parallel parameter sweeps and their artifacts.

pub mod audit;
pub mod config;
pub mod run;
pub mod svg;

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::comparison::ThresholdKind;
use crate::error::{Error, Result};
use crate::solver::Verdict;

pub use config::{
    Amplitude, Axis, CertifiedAmplitude, GridConfig, InitialConfig, ManifoldConfig, NonlinearityConfig, RunConfig,
    Shape, SweepConfig, SweepParam,
};
pub use run::{simulate, write_run, Prepared, RunResult};

/// Outcome of one sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRecord {
    pub point_id: usize,
    pub params: Vec<(SweepParam, f64)>,
    pub verdict: Verdict,
    pub analytic: Option<ThresholdKind>,
    pub sup_final: f64,
    pub runtime_s: f64,
    /// Relative distance to the analytic threshold, when one is known.
    pub distance: Option<f64>,
    /// Zero initial data, to which the analytic dichotomy does not apply.
    pub trivial: bool,
}

impl SweepRecord {
    /// Numerical and analytic verdicts match, or the analytic one is open.
    pub fn agreement(&self) -> bool {
        if self.trivial {
            return self.verdict.is_global();
        }
        match self.analytic {
            None | Some(ThresholdKind::BorderlineUnknown) => true,
            Some(ThresholdKind::GlobalForSmallData) => self.verdict.is_global(),
            Some(ThresholdKind::BlowUpAll) => self.verdict.is_blowup(),
        }
    }

    /// Strictly inside the band; points at exactly the band distance count
    /// as outside.
    pub fn in_band(&self, band: f64) -> bool {
        self.distance.is_some_and(|d| d < band * (1.0 - 1e-9))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub axes: Vec<(SweepParam, Vec<f64>)>,
    pub band: f64,
    pub records: Vec<SweepRecord>,
}

/// Sets one swept parameter on a copy of the base configuration.
pub fn apply_param(cfg: &mut RunConfig, param: SweepParam, value: f64) {
    match (&mut cfg.nonlinearity, param) {
        (NonlinearityConfig::TypeTwo { mu, .. }, SweepParam::Mu) => *mu = value,
        (NonlinearityConfig::TypeTwo { p, .. }, SweepParam::P) => *p = value,
        (NonlinearityConfig::TypeTwo { beta, .. }, SweepParam::Beta) => *beta = value,
        (NonlinearityConfig::TypeOne { q, .. }, SweepParam::Q) => *q = value,
        (NonlinearityConfig::TypeOne { alpha, .. }, SweepParam::Alpha) => *alpha = value,
        (_, SweepParam::Amplitude) => cfg.initial.amplitude = Amplitude::Value(value),
        _ => {}
    }
}

/// Relative distance of a configuration to its analytic threshold.
pub fn threshold_distance(cfg: &RunConfig, lambda_star: f64) -> Option<f64> {
    match cfg.nonlinearity {
        NonlinearityConfig::Zero => None,
        NonlinearityConfig::TypeOne { alpha, q, .. } => Some((q - alpha).abs() / alpha),
        NonlinearityConfig::TypeTwo { mu, p, .. } => {
            let crit = p * lambda_star;
            (crit > 0.0).then(|| (mu - crit).abs() / crit)
        }
    }
}

impl SweepConfig {
    /// Points in row-major order over the axes (last axis fastest).
    pub fn points(&self) -> Vec<Vec<(SweepParam, f64)>> {
        let axes: Vec<(SweepParam, Vec<f64>)> = self
            .axes
            .iter()
            .map(|a| (a.param, a.points().expect("validated axis")))
            .collect();
        let mut out = vec![Vec::new()];
        for (param, values) in &axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push((*param, v));
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// Runs one configuration, writes its artifacts when `out_dir` is given
/// (`trajectory_0.csv`, `summary.json`, `summary.csv`, `sup.svg`) and
/// returns its record.
pub fn run_config(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<SweepRecord> {
    let prep = Prepared::new(cfg)?;
    let result = prep.run(cfg)?;
    let record = SweepRecord {
        point_id: 0,
        params: Vec::new(),
        verdict: result.verdict.clone(),
        analytic: result.analytic.as_ref().map(|v| v.kind),
        sup_final: result.trajectory.final_sup(),
        runtime_s: result.runtime_s,
        distance: threshold_distance(cfg, prep.model.lambda_star()),
        trivial: result.amplitude == 0.0,
    };
    if let Some(dir) = out_dir {
        write_run(cfg, &result, 0, dir)?;
        let report = SweepReport {
            axes: Vec::new(),
            band: 0.0,
            records: vec![record.clone()],
        };
        std::fs::write(dir.join("summary.csv"), report.summary_csv(cfg.timing))?;
    }
    Ok(record)
}

fn run_point(prep: &Prepared, base: &RunConfig, params: &[(SweepParam, f64)]) -> (RunConfig, Result<RunResult>) {
    let mut cfg = base.clone();
    for &(param, value) in params {
        apply_param(&mut cfg, param, value);
    }
    let result = catch_unwind(AssertUnwindSafe(|| prep.run(&cfg)))
        .unwrap_or_else(|_| Err(Error::Data("crash".into())));
    (cfg, result)
}

/// Runs every point of the sweep on a thread pool and writes
/// `summary.csv`, `phase.svg` (two axes, `svg` enabled) and optionally the
/// trajectories into `out_dir`.  Points are executed in a seeded random
/// order; results do not depend on it.
pub fn run_sweep(cfg: &SweepConfig, out_dir: Option<&Path>) -> Result<SweepReport> {
    let prep = Prepared::new(&cfg.base)?;
    let lambda_star = prep.model.lambda_star();
    let points = cfg.points();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.base.seed));

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Data(e.to_string()))?;
    let mut results: Vec<(usize, SweepRecord, Option<RunResult>)> = pool.install(|| {
        order
            .par_iter()
            .map(|&id| {
                let params = &points[id];
                let (run_cfg, result) = run_point(&prep, &cfg.base, params);
                let analytic = run::analytic_verdict(&run_cfg.nonlinearity, &prep.model).map(|v| v.kind);
                let distance = threshold_distance(&run_cfg, lambda_star);
                let (verdict, sup_final, runtime_s, trivial, kept) = match result {
                    Ok(r) => {
                        let sup = r.trajectory.final_sup();
                        let trivial = r.amplitude == 0.0;
                        let keep = cfg.write_trajectories.then(|| r.clone());
                        (r.verdict, sup, r.runtime_s, trivial, keep)
                    }
                    Err(e) => (Verdict::undetermined(&e.to_string()), f64::NAN, 0.0, false, None),
                };
                let record = SweepRecord {
                    point_id: id,
                    params: params.clone(),
                    verdict,
                    analytic,
                    sup_final,
                    runtime_s,
                    distance,
                    trivial,
                };
                (id, record, kept)
            })
            .collect()
    });
    results.sort_by_key(|r| r.0);

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
        for (id, _, kept) in &results {
            if let Some(r) = kept {
                let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("trajectory_{id}.csv")))?);
                crate::solver::export::write_trajectory_csv(&r.trajectory, &mut w)?;
            }
        }
    }
    let report = SweepReport {
        axes: cfg
            .axes
            .iter()
            .map(|a| (a.param, a.points().expect("validated axis")))
            .collect(),
        band: cfg.band,
        records: results.into_iter().map(|r| r.1).collect(),
    };
    if let Some(dir) = out_dir {
        std::fs::write(dir.join("summary.csv"), report.summary_csv(cfg.base.timing))?;
        if cfg.base.svg {
            if let Some(svg) = report.phase_svg(lambda_star) {
                std::fs::write(dir.join("phase.svg"), svg)?;
            }
        }
    }
    Ok(report)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.6e}"),
        _ => "NA".into(),
    }
}

/// Threshold position along `x` for fixed `y`, when the pair is recognized.
fn threshold_along(x: SweepParam, y: SweepParam, y_value: f64, lambda_star: f64) -> Option<f64> {
    match (x, y) {
        (SweepParam::Mu, SweepParam::P) => Some(y_value * lambda_star),
        (SweepParam::P, SweepParam::Mu) => (lambda_star > 0.0).then(|| y_value / lambda_star),
        (SweepParam::Q, SweepParam::Alpha) | (SweepParam::Alpha, SweepParam::Q) => Some(y_value),
        _ => None,
    }
}

/// Where the numerical verdict flips along one row of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryRow {
    pub y: f64,
    pub analytic: f64,
    /// Midpoints between adjacent cells with opposite verdicts.
    pub transitions: Vec<f64>,
    pub cell: f64,
    /// The analytic verdict changes along the row.
    pub expected_flip: bool,
}

impl BoundaryRow {
    /// Every transition lies within one cell of the analytic threshold, and
    /// the row flips exactly when the analytic verdict does.
    pub fn within_cell(&self) -> bool {
        if !self.expected_flip {
            return self.transitions.is_empty();
        }
        !self.transitions.is_empty()
            && self
                .transitions
                .iter()
                .all(|t| (t - self.analytic).abs() <= self.cell * (1.0 + 1e-9))
    }
}

impl BoundaryRow {
    /// Every transition lies within one cell of the band
    /// `[c (1 - band), c (1 + band)]` around the analytic threshold `c`.
    pub fn within_band_cell(&self, band: f64) -> bool {
        let lo = self.analytic * (1.0 - band) - self.cell * (1.0 + 1e-9);
        let hi = self.analytic * (1.0 + band) + self.cell * (1.0 + 1e-9);
        self.transitions.iter().all(|&t| t >= lo && t <= hi)
    }
}

impl SweepReport {
    /// `point_id, <params>, verdict, t_est, sup_final, runtime_s, agreement`.
    pub fn summary_csv(&self, timing: bool) -> String {
        let mut out = String::from("point_id");
        for (p, _) in &self.axes {
            out.push(',');
            out.push_str(p.name());
        }
        out.push_str(",verdict,t_est,sup_final,runtime_s,agreement\n");
        for r in &self.records {
            let _ = write!(out, "{}", r.point_id);
            for (_, v) in &r.params {
                let _ = write!(out, ",{v:.6e}");
            }
            let runtime = if timing { format!("{:.3}", r.runtime_s) } else { "NA".into() };
            let _ = writeln!(
                out,
                ",{},{},{},{},{}",
                r.verdict.label(),
                fmt_opt(r.verdict.t_est()),
                fmt_opt(Some(r.sup_final)),
                runtime,
                r.agreement()
            );
        }
        out
    }

    /// Points outside the band around the threshold that disagree.
    pub fn disagreements_outside_band(&self) -> Vec<&SweepRecord> {
        self.records
            .iter()
            .filter(|r| !r.in_band(self.band) && !r.agreement())
            .collect()
    }

    /// Per-row transition analysis for two-axis sweeps of a recognized pair.
    pub fn boundary(&self, lambda_star: f64) -> Option<Vec<BoundaryRow>> {
        let [(xp, xs), (yp, ys)] = self.axes.as_slice() else {
            return None;
        };
        threshold_along(*xp, *yp, ys[0], lambda_star)?;
        let cell = if xs.len() > 1 { (xs[1] - xs[0]).abs() } else { 0.0 };
        let rows = ys
            .iter()
            .map(|&y| {
                let in_row = || self.records.iter().filter(move |r| r.params[1].1 == y);
                let expected_flip = in_row().any(|r| r.analytic == Some(ThresholdKind::GlobalForSmallData))
                    && in_row().any(|r| r.analytic == Some(ThresholdKind::BlowUpAll));
                let mut row: Vec<(f64, &Verdict)> = in_row()
                    .map(|r| (r.params[0].1, &r.verdict))
                    .filter(|(_, v)| v.is_global() || v.is_blowup())
                    .collect();
                row.sort_by(|a, b| a.0.total_cmp(&b.0));
                let transitions = row
                    .windows(2)
                    .filter(|w| w[0].1.is_global() != w[1].1.is_global())
                    .map(|w| 0.5 * (w[0].0 + w[1].0))
                    .collect();
                BoundaryRow {
                    y,
                    analytic: threshold_along(*xp, *yp, y, lambda_star).unwrap(),
                    transitions,
                    cell,
                    expected_flip,
                }
            })
            .collect();
        Some(rows)
    }

    /// Heat map for two-axis sweeps, with the analytic threshold overlaid
    /// when the axis pair is recognized.
    pub fn phase_svg(&self, lambda_star: f64) -> Option<String> {
        let [(xp, xs), (yp, ys)] = self.axes.as_slice() else {
            return None;
        };
        let cells: Vec<svg::PhaseCell> = self
            .records
            .iter()
            .map(|r| svg::PhaseCell {
                x: r.params[0].1,
                y: r.params[1].1,
                label: r.verdict.label(),
            })
            .collect();
        let threshold: Vec<(f64, f64)> = ys
            .iter()
            .filter_map(|&y| threshold_along(*xp, *yp, y, lambda_star).map(|x| (x, y)))
            .collect();
        Some(svg::phase_svg(xp.name(), yp.name(), xs, ys, &cells, &threshold))
    }
}
