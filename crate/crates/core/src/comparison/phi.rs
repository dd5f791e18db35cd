//! The kernel-averaged functional `Φ(x₀, t) = ∫ K(x₀, y, T - t) u(y, t) dv`
//! at the pole and the inequalities it satisfies along a solution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::geometry::ManifoldModel;
use crate::heat_kernel::NumericalKernel;
use crate::nonlinearity::{Nonlinearity, TypeTwoSpec};
use crate::solver::{evolve_on, Controls, Discretization, RadialGrid, Trajectory};

#[derive(Debug, Clone, Serialize)]
pub struct PhiReport {
    pub reference_time: f64,
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
    /// `min_t (∫K G(u) dv - G(Φ)) / max(G(Φ), tiny)`; Jensen holds when ≥ -tol.
    pub jensen_margin: f64,
    /// `min_k (Φ(t_k) - Φ(0) - ∫ w G(Φ)) / max(Φ(0), ∫ w G(Φ))`.
    pub growth_margin: f64,
}

impl PhiReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.jensen_margin >= -tol && self.growth_margin >= -tol
    }
}

/// Evaluates Φ at the pole for every snapshot with `t ≤ reference_time` and
/// audits the Jensen step and the integrated growth inequality
/// `Φ(t) - Φ(0) ≥ ∫₀ᵗ w(s) G(Φ(s)) ds`.
pub fn phi_functional(traj: &Trajectory, model: &ManifoldModel, nonlinearity: &Nonlinearity, reference_time: f64) -> Result<PhiReport> {
    if !(reference_time > 0.0) || reference_time > traj.final_time() + 1e-12 {
        return Err(Error::Precondition(format!(
            "reference time {reference_time} must lie within the trajectory (ends at {})",
            traj.final_time()
        )));
    }
    let kernel = NumericalKernel::new(model, RadialGrid::from_nodes(traj.nodes.clone())?)?;
    let disc = kernel.discretization();
    let mut times = Vec::new();
    let mut phi = Vec::new();
    let mut jensen_margin = f64::INFINITY;
    for (k, &t) in traj.times.iter().enumerate() {
        if t > reference_time + 1e-12 {
            break;
        }
        let u = &traj.snapshots[k];
        let lag = (reference_time - t).max(0.0);
        let row = kernel.row(0, lag);
        let weights: Vec<f64> = if lag == 0.0 {
            // K(x₀, ·, 0) is the point mass at the pole
            let mut w = vec![0.0; u.len()];
            w[0] = 1.0 / disc.volumes()[0];
            w
        } else {
            row
        };
        let value: f64 = weights.iter().zip(u).zip(disc.volumes()).map(|((k, u), v)| k * u * v).sum();
        let averaged: f64 = weights
            .iter()
            .zip(u)
            .zip(disc.volumes())
            .map(|((k, u), v)| k * nonlinearity.profile(*u) * v)
            .sum();
        let g_phi = nonlinearity.profile(value);
        if g_phi > 0.0 {
            jensen_margin = jensen_margin.min((averaged - g_phi) / g_phi);
        }
        times.push(t);
        phi.push(value);
    }
    let mut growth_margin = f64::INFINITY;
    let mut integral = 0.0;
    for k in 1..times.len() {
        let a = nonlinearity.time_weight(times[k - 1]) * nonlinearity.profile(phi[k - 1]);
        let b = nonlinearity.time_weight(times[k]) * nonlinearity.profile(phi[k]);
        integral += 0.5 * (times[k] - times[k - 1]) * (a + b);
        let scale = phi[0].max(integral).max(1e-300);
        growth_margin = growth_margin.min((phi[k] - phi[0] - integral) / scale);
    }
    if !jensen_margin.is_finite() {
        jensen_margin = 0.0;
    }
    if !growth_margin.is_finite() {
        growth_margin = 0.0;
    }
    Ok(PhiReport {
        reference_time,
        times,
        phi,
        jensen_margin,
        growth_margin,
    })
}

/// `Φ(x₀, 0) = (e^{TΔ} u0)(x₀)` for each reference time and the constants
/// `Φ(x₀, 0) T^{3/2} e^{λ₁T}`; the fitted `C(x₀)` is their geometric mean
/// (least squares in log space).
#[derive(Debug, Clone, Serialize)]
pub struct LowerConstantFit {
    pub reference_times: Vec<f64>,
    pub phi0: Vec<f64>,
    pub constants: Vec<f64>,
    pub fitted: f64,
}

pub fn fit_lower_constant(kernel: &NumericalKernel, u0: &[f64], lambda_one: f64, reference_times: &[f64]) -> LowerConstantFit {
    let mut phi0 = Vec::new();
    let mut constants = Vec::new();
    for &t in reference_times {
        let v = kernel.apply(u0, t)[0];
        phi0.push(v);
        constants.push(v * t.powf(1.5) * (lambda_one * t).exp());
    }
    let mean_log = constants.iter().map(|c| c.ln()).sum::<f64>() / constants.len() as f64;
    LowerConstantFit {
        reference_times: reference_times.to_vec(),
        phi0,
        constants,
        fitted: mean_log.exp(),
    }
}

/// Terms `a_k = p β^k / (k-1)! · (e^{μT}-1)/μ · Φ0^{pk}` for `k = 1..=terms`,
/// evaluated in log space.  Existence on `[0, T]` forces every `a_k ≤ 1`.
pub fn upsilon_terms(spec: &TypeTwoSpec, reference_time: f64, phi0: f64, terms: usize) -> Vec<f64> {
    let growth = (spec.mu * reference_time).exp_m1() / spec.mu;
    let base = spec.p.ln() + growth.ln();
    let mut log_fact = 0.0; // ln (k-1)!
    (1..=terms)
        .map(|k| {
            if k > 1 {
                log_fact += ((k - 1) as f64).ln();
            }
            let kf = k as f64;
            (base + kf * spec.beta.ln() - log_fact + spec.p * kf * phi0.ln()).exp()
        })
        .collect()
}

/// Outcome of the termwise and partial-sum checks.
#[derive(Debug, Clone, Serialize)]
pub struct UpsilonAudit {
    pub max_term: f64,
    /// `max_K Σ_{k≤K} a_k / (k(k+1))` relative to its bound `1 - 1/(K+1)`.
    pub max_partial_ratio: f64,
}

impl UpsilonAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_term <= 1.0 + tol && self.max_partial_ratio <= 1.0 + tol
    }
}

pub fn upsilon_audit(spec: &TypeTwoSpec, reference_time: f64, phi0: f64, terms: usize) -> UpsilonAudit {
    let a = upsilon_terms(spec, reference_time, phi0, terms);
    let mut partial = 0.0;
    let mut ratio: f64 = 0.0;
    for (i, &ak) in a.iter().enumerate() {
        let k = (i + 1) as f64;
        partial += ak / (k * (k + 1.0));
        ratio = ratio.max(partial / (1.0 - 1.0 / (k + 1.0)));
    }
    UpsilonAudit {
        max_term: a.iter().copied().fold(0.0, f64::max),
        max_partial_ratio: ratio,
    }
}

/// Largest relative sup-norm mismatch between the Type-II run with `β` and
/// data `u0`, and `(β₀/β)^{1/p}` times the run with `β₀` and data
/// `(β/β₀)^{1/p} u0`, over shared snapshot times.
pub fn beta_scaling_defect(
    disc: &Discretization,
    spec: &TypeTwoSpec,
    beta0: f64,
    u0: &RadialField,
    horizon: f64,
    controls: &Controls,
) -> Result<f64> {
    let c = (beta0 / spec.beta).powf(1.0 / spec.p);
    let direct = Nonlinearity::TypeTwo(*spec);
    let reference = Nonlinearity::TypeTwo(TypeTwoSpec { beta: beta0, ..*spec });
    let (a, _) = evolve_on(disc, &direct, u0, horizon, controls)?;
    let (b, _) = evolve_on(disc, &reference, &u0.scaled(1.0 / c), horizon, controls)?;
    let mut worst: f64 = 0.0;
    for (i, &t) in a.times.iter().enumerate() {
        let Some(j) = b.snapshot_at(t) else { continue };
        let scale = a.field(i).sup().max(1e-300);
        let diff = a.snapshots[i]
            .iter()
            .zip(&b.snapshots[j])
            .fold(0.0_f64, |m, (x, y)| m.max((x - c * y).abs()));
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}
