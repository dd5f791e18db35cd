//! Run and sweep configuration files (JSON, unknown keys rejected).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ManifoldModel, WarpSpec, DEFAULT_R_MAX};
use crate::nonlinearity::{Nonlinearity, TypeOneSpec, TypeTwoSpec};
use crate::solver::Controls;

/// Largest number of points a sweep may contain.
pub const MAX_SWEEP_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub dim: usize,
    pub warp: WarpSpec,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
}

fn default_r_max() -> f64 {
    DEFAULT_R_MAX
}

impl ManifoldConfig {
    pub fn build(&self) -> Result<ManifoldModel> {
        ManifoldModel::with_r_max(self.dim, self.warp, self.r_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    Zero,
    TypeOne {
        alpha: f64,
        q: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kappa_quad: Option<f64>,
    },
    TypeTwo {
        mu: f64,
        beta: f64,
        p: f64,
    },
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<Nonlinearity> {
        Ok(match *self {
            NonlinearityConfig::Zero => Nonlinearity::Zero,
            NonlinearityConfig::TypeOne { alpha, q, kappa_quad } => {
                Nonlinearity::TypeOne(TypeOneSpec::new(alpha, q, kappa_quad)?)
            }
            NonlinearityConfig::TypeTwo { mu, beta, p } => Nonlinearity::TypeTwo(TypeTwoSpec::new(mu, beta, p)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// Multiple of the ground state for `λ*`, normalized to 1 at the pole.
    GroundStateScaled,
    /// `exp(-((r - center)/width)²)`.
    Bump { center: f64, width: f64 },
}

/// Either an explicit amplitude or a fraction of the largest amplitude
/// certified global by the Type-I super-solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Value(f64),
    Certified { certified: CertifiedAmplitude },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifiedAmplitude {
    /// Rate δ; the amplitude-maximizing rate when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
}

fn default_fraction() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub amplitude: Amplitude,
    pub shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub radius: f64,
    pub points: usize,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: ManifoldConfig,
    pub nonlinearity: NonlinearityConfig,
    pub initial: InitialConfig,
    pub grid: GridConfig,
    pub horizon: f64,
    #[serde(default)]
    pub controls: Controls,
    #[serde(default)]
    pub seed: u64,
    /// Write wall-clock runtimes; disable for byte-reproducible output.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default = "default_true")]
    pub svg: bool,
}

/// Parameters a sweep axis can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Mu,
    P,
    Beta,
    Q,
    Alpha,
    Amplitude,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Mu => "mu",
            SweepParam::P => "p",
            SweepParam::Beta => "beta",
            SweepParam::Q => "q",
            SweepParam::Alpha => "alpha",
            SweepParam::Amplitude => "amplitude",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl Axis {
    pub fn linspace(param: SweepParam, min: f64, max: f64, count: usize) -> Self {
        Self {
            param,
            values: None,
            min: Some(min),
            max: Some(max),
            count: Some(count),
        }
    }

    /// Explicit values, or `count` evenly spaced values on `[min, max]`.
    pub fn points(&self) -> std::result::Result<Vec<f64>, String> {
        match (&self.values, self.min, self.max, self.count) {
            (Some(v), None, None, None) if !v.is_empty() => Ok(v.clone()),
            (None, Some(a), Some(b), Some(n)) if n >= 1 && a.is_finite() && b.is_finite() && b >= a => {
                if n == 1 {
                    return Ok(vec![a]);
                }
                Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect())
            }
            _ => Err(format!(
                "axis '{}' needs either a non-empty 'values' list or 'min' <= 'max' with 'count' >= 1",
                self.param.name()
            )),
        }
    }
}

fn default_band() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub axes: Vec<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Relative half-width of the band around the analytic threshold inside
    /// which disagreement is tolerated.
    #[serde(default = "default_band")]
    pub band: f64,
    #[serde(default)]
    pub write_trajectories: bool,
}

/// Line (1-based) of the first occurrence of `"key"` in the raw text.
pub fn line_of_key(text: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1).unwrap_or(1)
}

fn config_error(text: &str, key: &str, message: String) -> Error {
    Error::Config {
        line: line_of_key(text, key),
        message,
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Config {
        line: e.line().max(1),
        message: e.to_string(),
    })
}

fn check_positive(text: &str, key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_error(text, key, format!("'{key}' must be a finite positive number, got {v}")))
    }
}

impl RunConfig {
    /// Parses and validates a run configuration; errors carry the line of
    /// the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = parse(text)?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks ranges; `text` is only used to locate keys for messages.
    pub fn validate(&self, text: &str) -> Result<()> {
        let m = &self.manifold;
        if m.dim < 2 || m.dim > 10 {
            return Err(config_error(text, "dim", format!("'dim' must be in 2..=10, got {}", m.dim)));
        }
        check_positive(text, "r_max", m.r_max)?;
        match m.warp {
            WarpSpec::ScaledHyperbolic { kappa } => check_positive(text, "kappa", kappa)?,
            WarpSpec::PowerDecay { c_hat, gamma } => {
                check_positive(text, "c_hat", c_hat)?;
                if !(gamma.is_finite() && gamma >= 0.0) {
                    return Err(config_error(text, "gamma", format!("'gamma' must be >= 0, got {gamma}")));
                }
            }
            _ => {}
        }
        match self.nonlinearity {
            NonlinearityConfig::Zero => {}
            NonlinearityConfig::TypeOne { alpha, q, kappa_quad } => {
                check_positive(text, "alpha", alpha)?;
                check_positive(text, "q", q)?;
                if let Some(k) = kappa_quad {
                    check_positive(text, "kappa_quad", k)?;
                }
                TypeOneSpec::new(alpha, q, kappa_quad)
                    .map_err(|e| config_error(text, "kappa_quad", e.to_string()))?;
            }
            NonlinearityConfig::TypeTwo { mu, beta, p } => {
                check_positive(text, "mu", mu)?;
                check_positive(text, "beta", beta)?;
                check_positive(text, "p", p)?;
            }
        }
        match self.initial.amplitude {
            Amplitude::Value(a) => {
                if !(a.is_finite() && a >= 0.0) {
                    return Err(config_error(text, "amplitude", format!("'amplitude' must be >= 0, got {a}")));
                }
            }
            Amplitude::Certified { certified } => {
                if !matches!(self.nonlinearity, NonlinearityConfig::TypeOne { .. }) {
                    return Err(config_error(
                        text,
                        "certified",
                        "certified amplitudes exist only for type_one nonlinearities".into(),
                    ));
                }
                if !(certified.fraction > 0.0 && certified.fraction <= 1.0) {
                    return Err(config_error(text, "fraction", "'fraction' must lie in (0, 1]".into()));
                }
                if let Some(d) = certified.delta {
                    check_positive(text, "delta", d)?;
                }
            }
        }
        if let Shape::Bump { center, width } = self.initial.shape {
            if !(center.is_finite() && center >= 0.0) {
                return Err(config_error(text, "center", format!("'center' must be >= 0, got {center}")));
            }
            check_positive(text, "width", width)?;
        }
        check_positive(text, "radius", self.grid.radius)?;
        if self.grid.radius > m.r_max {
            return Err(config_error(text, "radius", format!("'radius' exceeds r_max = {}", m.r_max)));
        }
        if self.grid.points > 100_000 {
            return Err(config_error(text, "points", "'points' must be at most 100000".into()));
        }
        crate::solver::RadialGrid::graded(self.grid.radius, self.grid.points)
            .map_err(|e| config_error(text, "points", e.to_string()))?;
        check_positive(text, "horizon", self.horizon)?;
        let c = &self.controls;
        check_positive(text, "rtol", c.rtol)?;
        check_positive(text, "dt_init", c.dt_init)?;
        check_positive(text, "dt_max", c.dt_max)?;
        if let Some(f) = c.fixed_dt {
            check_positive(text, "fixed_dt", f)?;
        }
        if let Some(r) = c.record_every {
            check_positive(text, "record_every", r)?;
        }
        check_positive(text, "m_big", c.thresholds.m_big)?;
        check_positive(text, "dt_min", c.thresholds.dt_min)?;
        check_positive(text, "safe_factor", c.thresholds.safe_factor)?;
        Ok(())
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = parse(text)?;
        cfg.base.validate(text)?;
        if cfg.axes.is_empty() || cfg.axes.len() > 2 {
            return Err(config_error(text, "axes", "a sweep needs one or two axes".into()));
        }
        let mut total = 1usize;
        for axis in &cfg.axes {
            let pts = axis.points().map_err(|m| config_error(text, "axes", m))?;
            for &v in &pts {
                if !(v.is_finite() && v > 0.0) && axis.param != SweepParam::Amplitude {
                    return Err(config_error(text, "axes", format!("axis '{}' value {v} must be > 0", axis.param.name())));
                }
            }
            let applies = matches!(
                (axis.param, &cfg.base.nonlinearity),
                (SweepParam::Mu | SweepParam::P | SweepParam::Beta, NonlinearityConfig::TypeTwo { .. })
                    | (SweepParam::Q | SweepParam::Alpha, NonlinearityConfig::TypeOne { .. })
                    | (SweepParam::Amplitude, _)
            );
            if !applies {
                return Err(config_error(
                    text,
                    "param",
                    format!("axis '{}' does not apply to the base nonlinearity", axis.param.name()),
                ));
            }
            total = total.saturating_mul(pts.len());
        }
        if cfg.axes.len() == 2 && cfg.axes[0].param == cfg.axes[1].param {
            return Err(config_error(text, "axes", "the two axes must vary different parameters".into()));
        }
        if total > MAX_SWEEP_POINTS {
            return Err(config_error(text, "axes", format!("{total} points exceed the limit of {MAX_SWEEP_POINTS}")));
        }
        if cfg.threads == Some(0) {
            return Err(config_error(text, "threads", "'threads' must be >= 1".into()));
        }
        if !(cfg.band >= 0.0 && cfg.band < 1.0) {
            return Err(config_error(text, "band", "'band' must lie in [0, 1)".into()));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE: &str = r#"{
  "manifold": { "dim": 2, "warp": { "kind": "hyperbolic" } },
  "nonlinearity": { "kind": "type_two", "mu": 0.5, "beta": 1.0, "p": 1.0 },
  "initial": { "amplitude": 0.1, "shape": { "kind": "ground_state_scaled" } },
  "grid": { "radius": 20.0, "points": 800 },
  "horizon": 100.0
}"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_json(EXAMPLE).unwrap();
        assert_eq!(cfg.manifold.r_max, DEFAULT_R_MAX);
        assert_eq!(cfg.controls, Controls::default());
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let text = EXAMPLE.replace("\"horizon\": 100.0", "\"horizon\": 100.0,\n  \"colour\": 3");
        match RunConfig::from_json(&text) {
            Err(Error::Config { line, message }) => {
                assert_eq!(line, 7, "{message}");
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_alpha_points_at_its_line() {
        let text = EXAMPLE.replace(
            r#"{ "kind": "type_two", "mu": 0.5, "beta": 1.0, "p": 1.0 }"#,
            "{\n    \"kind\": \"type_one\",\n    \"alpha\": -1.0,\n    \"q\": 2.0\n  }",
        );
        match RunConfig::from_json(&text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certified_amplitude_parses() {
        let text = EXAMPLE
            .replace(
                r#"{ "kind": "type_two", "mu": 0.5, "beta": 1.0, "p": 1.0 }"#,
                r#"{ "kind": "type_one", "alpha": 1.0, "q": 0.5 }"#,
            )
            .replace("\"amplitude\": 0.1", r#""amplitude": { "certified": { "delta": 0.1 } }"#);
        let cfg = RunConfig::from_json(&text).unwrap();
        assert_eq!(
            cfg.initial.amplitude,
            Amplitude::Certified {
                certified: CertifiedAmplitude {
                    delta: Some(0.1),
                    fraction: 0.5
                }
            }
        );
        assert!(RunConfig::from_json(&text.replace("0.1 }", "0.1, \"extra\": 1 }")).is_err());
    }

    #[test]
    fn axis_points() {
        let a = Axis::linspace(SweepParam::Mu, 0.05, 0.55, 11);
        let pts = a.points().unwrap();
        assert_eq!(pts.len(), 11);
        assert!((pts[10] - 0.55).abs() < 1e-15);
        let bad = Axis {
            param: SweepParam::Mu,
            values: Some(vec![0.1]),
            min: Some(0.0),
            max: None,
            count: None,
        };
        assert!(bad.points().is_err());
    }
}
