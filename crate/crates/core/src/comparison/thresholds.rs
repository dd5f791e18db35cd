//! Analytic classification of parameter points.

use serde::Serialize;

use crate::geometry::ManifoldModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    GlobalForSmallData,
    BlowUpAll,
    BorderlineUnknown,
}

impl ThresholdKind {
    pub fn label(&self) -> &'static str {
        match self {
            ThresholdKind::GlobalForSmallData => "global",
            ThresholdKind::BlowUpAll => "blowup",
            ThresholdKind::BorderlineUnknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdVerdict {
    pub kind: ThresholdKind,
    /// The inequality that decided the verdict.
    pub certificate: String,
    pub parameters: Vec<(String, f64)>,
}

impl ThresholdVerdict {
    fn new(kind: ThresholdKind, certificate: &str, parameters: &[(&str, f64)]) -> Self {
        Self {
            kind,
            certificate: certificate.to_string(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

fn nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Exponential-in-time nonlinearity `e^{μt} u (e^{βu^p} - 1)`.
///
/// On hyperbolic space the dichotomy is sharp at `μ = p λ₁` with equality on
/// the global side.  On other models only `μ < p λ*` (global) and
/// `μ > p λ₁` (blow-up) are decided.
pub fn threshold_type_two(mu: f64, p: f64, model: &ManifoldModel) -> ThresholdVerdict {
    if model.is_hyperbolic() {
        let l1 = model.lambda_one();
        let params = [("mu", mu), ("p", p), ("lambda_1", l1)];
        return if mu <= p * l1 {
            ThresholdVerdict::new(ThresholdKind::GlobalForSmallData, "mu <= p * lambda_1", &params)
        } else {
            ThresholdVerdict::new(ThresholdKind::BlowUpAll, "mu > p * lambda_1", &params)
        };
    }
    threshold_type_two_bounds(mu, p, model.lambda_star(), Some(model.lambda_one()))
}

/// [`threshold_type_two`] on a general model from the spectral constants
/// alone; `lambda_one = None` means the bottom of the spectrum is unknown,
/// so only the global side can be certified.
pub fn threshold_type_two_bounds(mu: f64, p: f64, lambda_star: f64, lambda_one: Option<f64>) -> ThresholdVerdict {
    let l1 = lambda_one.unwrap_or(f64::NAN);
    let params = [("mu", mu), ("p", p), ("lambda_star", lambda_star), ("lambda_1", l1)];
    if lambda_star > 0.0 && mu < p * lambda_star {
        ThresholdVerdict::new(ThresholdKind::GlobalForSmallData, "mu < p * lambda_star", &params)
    } else if lambda_one.is_some_and(|l| mu > p * l) {
        ThresholdVerdict::new(ThresholdKind::BlowUpAll, "mu > p * lambda_1", &params)
    } else {
        ThresholdVerdict::new(
            ThresholdKind::BorderlineUnknown,
            "p * lambda_star <= mu <= p * lambda_1",
            &params,
        )
    }
}

/// `min_{δ>0} δ + δ^{-1/α}`, attained at `δ* = α^{-α/(α+1)}`.
pub fn optimal_delta(alpha: f64) -> f64 {
    alpha.powf(-alpha / (alpha + 1.0))
}

pub fn delta_objective(delta: f64, alpha: f64) -> f64 {
    delta + delta.powf(-1.0 / alpha)
}

/// Polynomial-in-time nonlinearity `t^q g(u)` with `g(s) ~ s |ln s|^{-α}`.
pub fn threshold_type_one(q: f64, alpha: f64, model: &ManifoldModel) -> ThresholdVerdict {
    let ls = model.lambda_star();
    let l1 = model.lambda_one();
    let params = [("q", q), ("alpha", alpha), ("lambda_star", ls), ("lambda_1", l1)];
    if nearly_equal(q, alpha) {
        if model.is_hyperbolic() && l1.powf(alpha + 1.0) < 1.0 {
            return ThresholdVerdict::new(ThresholdKind::BlowUpAll, "lambda_1^(alpha+1) < 1", &params);
        }
        let d = optimal_delta(alpha);
        if ls > 0.0 && d < ls && delta_objective(d, alpha) <= ls {
            return ThresholdVerdict::new(
                ThresholdKind::GlobalForSmallData,
                "min_delta (delta + delta^(-1/alpha)) <= lambda_star",
                &params,
            );
        }
        return ThresholdVerdict::new(
            ThresholdKind::BorderlineUnknown,
            "q = alpha with neither certificate available",
            &params,
        );
    }
    if q > alpha {
        return ThresholdVerdict::new(ThresholdKind::BlowUpAll, "q > alpha", &params);
    }
    if ls > 0.0 {
        ThresholdVerdict::new(ThresholdKind::GlobalForSmallData, "q < alpha", &params)
    } else {
        ThresholdVerdict::new(ThresholdKind::BorderlineUnknown, "lambda_star = 0", &params)
    }
}
