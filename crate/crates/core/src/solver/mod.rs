//! Method-of-lines solver for radial solutions of `∂ₜu = Δu + f(u, t)`.
//!
//! Diffusion is stepped implicitly on the finite-volume grid, the reaction
//! explicitly, with step-doubling control of the step size.  The outer
//! boundary is absorbing (homogeneous Dirichlet).

pub mod blowup;
pub mod evolve;
pub mod exhaustion;
pub mod export;
pub mod grid;
pub mod mild;

use serde::{Deserialize, Serialize};

use crate::field::RadialField;

pub use blowup::{detect_blowup, estimate_blowup_time, integrate_reaction};
pub use evolve::{evolve, evolve_on};
pub use exhaustion::{exhaustion_mode, ExhaustionReport};
pub use grid::{Discretization, RadialGrid};
pub use mild::mild_residual;

/// Detector thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupThresholds {
    /// Sup-norm regarded as numerically infinite.
    pub m_big: f64,
    /// Step size regarded as collapsed.
    pub dt_min: f64,
    /// A run reaching the horizon is global if its final sup-norm stays
    /// below `safe_factor · sup(u0)`.
    pub safe_factor: f64,
}

impl Default for BlowupThresholds {
    fn default() -> Self {
        Self {
            m_big: 1e6,
            dt_min: 1e-10,
            safe_factor: 10.0,
        }
    }
}

/// Time-stepping controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Controls {
    /// Relative local error tolerance of the step-doubling estimate.
    pub rtol: f64,
    pub dt_init: f64,
    pub dt_max: f64,
    /// Fixed step size; disables adaptivity when set.
    pub fixed_dt: Option<f64>,
    /// Snapshot interval; `None` stores 100 snapshots over the horizon.
    pub record_every: Option<f64>,
    pub max_steps: usize,
    pub thresholds: BlowupThresholds,
}

impl Default for Controls {
    fn default() -> Self {
        Self {
            rtol: 1e-5,
            dt_init: 1e-3,
            dt_max: 0.5,
            fixed_dt: None,
            record_every: None,
            max_steps: 5_000_000,
            thresholds: BlowupThresholds::default(),
        }
    }
}

/// One accepted time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub sup: f64,
    pub dt: f64,
}

/// Why the time loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    StepCollapse,
    StepLimit,
}

/// Solution history: per-step sup-norms plus full snapshots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub nodes: Vec<f64>,
    pub horizon: f64,
    pub steps: Vec<StepRecord>,
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub stop: StopReason,
    /// Step size the controller asked for when the loop ended.
    pub last_proposed_dt: f64,
}

impl Trajectory {
    pub fn initial_sup(&self) -> f64 {
        sup(&self.snapshots[0])
    }

    pub fn final_sup(&self) -> f64 {
        sup(self.snapshots.last().unwrap())
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Sup-norm of each snapshot.
    pub fn sup_norms(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| sup(s)).collect()
    }

    /// Accepted step sizes.
    pub fn dt_log(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.dt).collect()
    }

    pub fn field(&self, index: usize) -> RadialField {
        RadialField::new(self.nodes.clone(), self.snapshots[index].clone())
    }

    pub fn final_field(&self) -> RadialField {
        self.field(self.snapshots.len() - 1)
    }

    /// Index of the snapshot taken at time `t`, if any.
    pub fn snapshot_at(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

pub(crate) fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Numerical verdict on a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VerdictKind {
    Global { horizon: f64 },
    BlowUp { t_est: f64 },
    Undetermined { reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Numerical,
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub provenance: Provenance,
}

impl Verdict {
    pub fn numerical(kind: VerdictKind) -> Self {
        Self {
            kind,
            provenance: Provenance::Numerical,
        }
    }

    pub fn undetermined(reason: &str) -> Self {
        Self::numerical(VerdictKind::Undetermined {
            reason: reason.to_string(),
        })
    }

    pub fn is_global(&self) -> bool {
        matches!(self.kind, VerdictKind::Global { .. })
    }

    pub fn is_blowup(&self) -> bool {
        matches!(self.kind, VerdictKind::BlowUp { .. })
    }

    pub fn t_est(&self) -> Option<f64> {
        match self.kind {
            VerdictKind::BlowUp { t_est } => Some(t_est),
            _ => None,
        }
    }

    /// Short label: `global`, `blowup` or `undetermined`.
    pub fn label(&self) -> &'static str {
        match self.kind {
            VerdictKind::Global { .. } => "global",
            VerdictKind::BlowUp { .. } => "blowup",
            VerdictKind::Undetermined { .. } => "undetermined",
        }
    }
}
