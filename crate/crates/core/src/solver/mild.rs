//! Duhamel (mild-solution) consistency audit.

use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::heat_kernel::NumericalKernel;
use crate::nonlinearity::Nonlinearity;

use super::grid::RadialGrid;
use super::{sup, Trajectory};

/// Relative sup-norm mismatch between the computed `u(·, t_check)` and its
/// reconstruction `e^{tΔ}u0 + ∫₀ᵗ e^{(t-s)Δ} f(u(s), s) ds`, using the exact
/// discrete heat semigroup and the trapezoid rule over the stored snapshots.
pub fn mild_residual(traj: &Trajectory, model: &ManifoldModel, nonlinearity: &Nonlinearity, t_check: f64) -> Result<f64> {
    let idx = traj
        .snapshot_at(t_check)
        .ok_or_else(|| Error::Precondition(format!("no snapshot stored at t = {t_check}")))?;
    let target = &traj.snapshots[idx];
    let scale = sup(target);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let kernel = NumericalKernel::new(model, RadialGrid::from_nodes(traj.nodes.clone())?)?;
    let t = traj.times[idx];
    let mut rec = kernel.apply(&traj.snapshots[0], t);
    let source = |k: usize| -> Vec<f64> {
        let s = traj.times[k];
        let v: Vec<f64> = traj.snapshots[k].iter().map(|&u| nonlinearity.eval(u, s)).collect();
        kernel.apply(&v, t - s)
    };
    let mut prev = source(0);
    for k in 1..=idx {
        let cur = source(k);
        let ds = traj.times[k] - traj.times[k - 1];
        for i in 0..rec.len() {
            rec[i] += 0.5 * ds * (prev[i] + cur[i]);
        }
        prev = cur;
    }
    let diff = target.iter().zip(&rec).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(diff / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RadialField;
    use crate::nonlinearity::TypeTwoSpec;
    use crate::solver::{evolve, Controls};

    #[test]
    fn linear_run_matches_semigroup() {
        let m = ManifoldModel::hyperbolic(2);
        let g = RadialGrid::graded(12.0, 300).unwrap();
        let u0 = RadialField::from_fn(g.nodes(), |r| (-r * r).exp());
        let (traj, _) = evolve(&m, &g, &Nonlinearity::Zero, &u0, 1.0, &Controls::default()).unwrap();
        let res = mild_residual(&traj, &m, &Nonlinearity::Zero, 1.0).unwrap();
        assert!(res < 0.02, "{res}");
    }

    #[test]
    fn subcritical_reaction_run_is_mild() {
        let m = ManifoldModel::hyperbolic(2);
        let g = RadialGrid::graded(12.0, 300).unwrap();
        let f = Nonlinearity::TypeTwo(TypeTwoSpec::new(0.1, 1.0, 1.0).unwrap());
        let u0 = RadialField::from_fn(g.nodes(), |r| 0.5 * (-r * r).exp());
        let controls = Controls {
            record_every: Some(0.02),
            ..Controls::default()
        };
        let (traj, _) = evolve(&m, &g, &f, &u0, 1.0, &controls).unwrap();
        let res = mild_residual(&traj, &m, &f, 1.0).unwrap();
        assert!(res < 0.05, "{res}");
        let zero = RadialField::zeros(g.nodes());
        let (traj, _) = evolve(&m, &g, &f, &zero, 1.0, &controls).unwrap();
        assert_eq!(mild_residual(&traj, &m, &f, 1.0).unwrap(), 0.0);
    }
}
