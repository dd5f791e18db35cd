//! Dirichlet solves on an increasing family of balls.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::geometry::ManifoldModel;
use crate::nonlinearity::Nonlinearity;

use super::evolve::evolve;
use super::grid::RadialGrid;
use super::{Controls, Trajectory, Verdict};

#[derive(Debug, Clone, Serialize)]
pub struct ExhaustionReport {
    pub radii: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    pub verdicts: Vec<Verdict>,
    /// `sup |u_{k+1} - u_k|` on the common nodes at the last shared time.
    pub increments: Vec<f64>,
    /// Largest `u_k - u_{k+1}` seen at shared snapshot times (the
    /// monotonicity defect; non-positive up to round-off).
    pub max_excess: f64,
}

/// Solves on balls of the given radii with a common bulk spacing, so that
/// consecutive grids share all but their outermost node, and checks that
/// the solutions increase with the radius.
pub fn exhaustion_mode(
    model: &ManifoldModel,
    nonlinearity: &Nonlinearity,
    u0: impl Fn(f64) -> f64,
    radii: &[f64],
    spacing: f64,
    horizon: f64,
    controls: &Controls,
) -> Result<ExhaustionReport> {
    if radii.is_empty() || radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("radii must be non-empty and increasing".into()));
    }
    let mut controls = controls.clone();
    if controls.record_every.is_none() {
        controls.record_every = Some(horizon / 20.0);
    }
    let mut trajectories = Vec::with_capacity(radii.len());
    let mut verdicts = Vec::with_capacity(radii.len());
    for &radius in radii {
        let grid = RadialGrid::with_spacing(radius, spacing)?;
        let data = RadialField::from_fn(grid.nodes(), &u0);
        let (traj, verdict) = evolve(model, &grid, nonlinearity, &data, horizon, &controls)?;
        trajectories.push(traj);
        verdicts.push(verdict);
    }
    let rel_tol = if controls.fixed_dt.is_some() { 1e-10 } else { 10.0 * controls.rtol };
    let mut increments = Vec::new();
    let mut max_excess = f64::NEG_INFINITY;
    for (k, pair) in trajectories.windows(2).enumerate() {
        let (small, large) = (&pair[0], &pair[1]);
        let common = small.nodes.len() - 1;
        let mut last_increment = f64::NAN;
        for (i, &t) in small.times.iter().enumerate() {
            let Some(j) = large.snapshot_at(t) else { continue };
            let a = &small.snapshots[i];
            let b = &large.snapshots[j];
            let scale = super::sup(b);
            let mut excess = f64::NEG_INFINITY;
            let mut inc: f64 = 0.0;
            for p in 0..common {
                excess = excess.max(a[p] - b[p]);
                inc = inc.max((a[p] - b[p]).abs());
            }
            max_excess = max_excess.max(excess);
            if excess > 1e-8 + rel_tol * scale {
                return Err(Error::Monotonicity {
                    level: k,
                    next: k + 1,
                    excess,
                });
            }
            last_increment = inc;
        }
        increments.push(last_increment);
    }
    Ok(ExhaustionReport {
        radii: radii.to_vec(),
        trajectories,
        verdicts,
        increments,
        max_excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_data_gives_zero_levels() {
        let m = ManifoldModel::hyperbolic(2);
        let rep = exhaustion_mode(&m, &Nonlinearity::Zero, |_| 0.0, &[8.0, 10.0], 0.04, 1.0, &Controls::default()).unwrap();
        assert!(rep.trajectories.iter().all(|t| t.final_sup() == 0.0));
        assert_eq!(rep.increments, vec![0.0]);
    }

    #[test]
    fn linear_increments_shrink() {
        let m = ManifoldModel::hyperbolic(3);
        let controls = Controls {
            fixed_dt: Some(0.05),
            ..Controls::default()
        };
        let rep = exhaustion_mode(
            &m,
            &Nonlinearity::Zero,
            |r| (-r * r).exp(),
            &[6.0, 8.0, 10.0, 12.0],
            0.03,
            4.0,
            &controls,
        )
        .unwrap();
        for w in rep.increments.windows(2) {
            assert!(w[1] < 0.5 * w[0], "{:?}", rep.increments);
        }
    }
}
