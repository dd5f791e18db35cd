use crate::error::{Error, Result};
use crate::field::RadialField;
use crate::geometry::ManifoldModel;
use crate::nonlinearity::Nonlinearity;

use super::blowup::detect_blowup;
use super::grid::{Discretization, RadialGrid};
use super::{sup, Controls, StepRecord, StopReason, Trajectory, Verdict};

/// Finite stand-in for a saturated (infinite) reaction value.
pub(crate) const REACTION_CAP: f64 = 1e300;

/// Forced steps allowed at the resolution floor before giving up.
const MAX_FORCED_STEPS: usize = 100_000;

/// Undershoot tolerated (and clipped) relative to the current sup-norm.
const POSITIVITY_SLACK: f64 = 1e-10;

/// Evolves `u0` on `grid` and classifies the run.
pub fn evolve(
    model: &ManifoldModel,
    grid: &RadialGrid,
    nonlinearity: &Nonlinearity,
    u0: &RadialField,
    horizon: f64,
    controls: &Controls,
) -> Result<(Trajectory, Verdict)> {
    let disc = Discretization::new(model, grid.clone())?;
    evolve_on(&disc, nonlinearity, u0, horizon, controls)
}

struct Stepper<'a> {
    disc: &'a Discretization,
    f: &'a Nonlinearity,
    rhs: Vec<f64>,
}

impl Stepper<'_> {
    /// One IMEX Euler step: explicit reaction at `t`, implicit diffusion.
    fn step(&mut self, u: &[f64], t: f64, dt: f64, out: &mut [f64]) {
        let m = self.disc.interior();
        for (rhs, &ui) in self.rhs[..m].iter_mut().zip(u) {
            let r = self.f.eval(ui, t);
            let r = if r.is_finite() { r.min(REACTION_CAP) } else { REACTION_CAP };
            *rhs = ui + dt * r;
        }
        self.disc.implicit_solve(dt, &self.rhs, out);
        for v in out.iter_mut() {
            if !v.is_finite() || *v > REACTION_CAP {
                *v = REACTION_CAP;
            }
        }
    }
}

/// [`evolve`] on a prebuilt discretization.  Initial data given on other
/// nodes is resampled by linear interpolation.
pub fn evolve_on(
    disc: &Discretization,
    nonlinearity: &Nonlinearity,
    u0: &RadialField,
    horizon: f64,
    controls: &Controls,
) -> Result<(Trajectory, Verdict)> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter(format!("horizon {horizon} must be > 0")));
    }
    validate_controls(controls)?;
    let nodes = disc.nodes().to_vec();
    let mut u = if u0.nodes == nodes { u0.values.clone() } else { u0.resample(&nodes).values };
    if u.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Precondition("initial data must be finite and non-negative".into()));
    }
    *u.last_mut().unwrap() = 0.0;

    let n = nodes.len();
    let th = controls.thresholds;
    let record_every = controls.record_every.unwrap_or(horizon / 100.0);
    let mut stepper = Stepper {
        disc,
        f: nonlinearity,
        rhs: vec![0.0; n],
    };
    let mut full = vec![0.0; n];
    let mut half = vec![0.0; n];
    let mut two_half = vec![0.0; n];

    let mut traj = Trajectory {
        nodes,
        horizon,
        steps: Vec::new(),
        times: vec![0.0],
        snapshots: vec![u.clone()],
        stop: StopReason::Horizon,
        last_proposed_dt: controls.dt_init,
    };
    let mut t = 0.0;
    let mut dt = controls.fixed_dt.unwrap_or(controls.dt_init).min(controls.dt_max);
    let mut next_record = record_every.min(horizon);
    let mut forced = 0usize;

    loop {
        if t >= horizon {
            traj.stop = StopReason::Horizon;
            break;
        }
        if traj.steps.len() >= controls.max_steps {
            traj.stop = StopReason::StepLimit;
            break;
        }
        let target = next_record.min(horizon);
        let room = target - t;
        let mut collapsed = false;
        let h;
        let mut factor = 1.0;
        if let Some(fixed) = controls.fixed_dt {
            h = fixed.min(room);
            stepper.step(&u, t, h, &mut two_half);
        } else if dt < th.dt_min {
            // Forced steps at the resolution floor let a saturating reaction
            // push the sup-norm past the detection threshold.
            collapsed = true;
            forced += 1;
            h = th.dt_min.min(room);
            stepper.step(&u, t, h, &mut two_half);
        } else {
            let trial = dt.min(room);
            stepper.step(&u, t, trial, &mut full);
            stepper.step(&u, t, 0.5 * trial, &mut half);
            stepper.step(&half, t + 0.5 * trial, 0.5 * trial, &mut two_half);
            let scale = sup(&two_half);
            let diff = full
                .iter()
                .zip(&two_half)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            let err = if diff == 0.0 { 0.0 } else { diff / (controls.rtol * scale.max(1e-300)) };
            factor = if err == 0.0 { 4.0 } else { (0.9 / err.sqrt()).clamp(0.2, 4.0) };
            if !(err <= 1.0) {
                dt = trial * factor;
                continue;
            }
            h = trial;
        }

        // Accept.
        let scale = sup(&two_half);
        let floor = -POSITIVITY_SLACK * scale;
        for v in two_half.iter_mut() {
            if *v < 0.0 {
                if *v < floor {
                    return Err(Error::PositivityViolation { time: t + h, value: *v });
                }
                *v = 0.0;
            }
        }
        std::mem::swap(&mut u, &mut two_half);
        t = if h == room { target } else { t + h };
        traj.steps.push(StepRecord { t, sup: scale, dt: h });
        if t >= target {
            traj.times.push(t);
            traj.snapshots.push(u.clone());
            next_record = (target + record_every).min(horizon);
        }
        if controls.fixed_dt.is_none() && !collapsed {
            let proposed = h * factor;
            dt = if h < dt { dt.max(proposed) } else { proposed }.min(controls.dt_max);
        }
        if collapsed && (scale >= th.m_big || forced >= MAX_FORCED_STEPS) {
            traj.last_proposed_dt = dt;
            traj.stop = StopReason::StepCollapse;
            break;
        }
        traj.last_proposed_dt = dt;
    }
    if *traj.times.last().unwrap() != t {
        traj.times.push(t);
        traj.snapshots.push(u);
    }
    let verdict = detect_blowup(&traj, &th);
    Ok((traj, verdict))
}

fn validate_controls(c: &Controls) -> Result<()> {
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")))
        }
    };
    positive("rtol", c.rtol)?;
    positive("dt_init", c.dt_init)?;
    positive("dt_max", c.dt_max)?;
    positive("m_big", c.thresholds.m_big)?;
    positive("dt_min", c.thresholds.dt_min)?;
    positive("safe_factor", c.thresholds.safe_factor)?;
    if let Some(f) = c.fixed_dt {
        positive("fixed_dt", f)?;
    }
    if let Some(r) = c.record_every {
        positive("record_every", r)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::TypeTwoSpec;
    use crate::spectral::default_ground_state;

    fn h2_setup(radius: f64, n: usize) -> (ManifoldModel, RadialGrid) {
        (ManifoldModel::hyperbolic(2), RadialGrid::graded(radius, n).unwrap())
    }

    #[test]
    fn zero_data_stays_zero() {
        let (m, g) = h2_setup(10.0, 200);
        let f = Nonlinearity::TypeTwo(TypeTwoSpec::new(0.5, 1.0, 1.0).unwrap());
        let u0 = RadialField::zeros(g.nodes());
        let (traj, verdict) = evolve(&m, &g, &f, &u0, 5.0, &Controls::default()).unwrap();
        assert_eq!(traj.final_sup(), 0.0);
        assert!(verdict.is_global());
    }

    #[test]
    fn linear_decay_of_ground_state() {
        let (m, g) = h2_setup(20.0, 800);
        let phi = default_ground_state(&m, 20.0, 2000).unwrap().sample(g.nodes());
        let (traj, verdict) = evolve(&m, &g, &Nonlinearity::Zero, &phi, 4.0, &Controls::default()).unwrap();
        let expected = (-1.0f64).exp() * phi.sup();
        let got = traj.final_sup();
        assert!((got / expected - 1.0).abs() < 0.01, "{got} vs {expected}");
        assert!(verdict.is_global());
        assert!(traj.steps.iter().all(|s| s.sup <= phi.sup() * (1.0 + 1e-12)));
    }

    #[test]
    fn supercritical_exponential_reaction_blows_up() {
        let (m, g) = h2_setup(15.0, 400);
        let f = Nonlinearity::TypeTwo(TypeTwoSpec::new(0.5, 1.0, 1.0).unwrap());
        let phi = default_ground_state(&m, 15.0, 1000).unwrap().sample(g.nodes());
        let (traj, verdict) = evolve(&m, &g, &f, &phi.scaled(0.1), 100.0, &Controls::default()).unwrap();
        assert!(verdict.is_blowup(), "{verdict:?} stop {:?} sup {}", traj.stop, traj.final_sup());
        let t_est = verdict.t_est().unwrap();
        assert!(t_est > 0.0 && t_est < 100.0);
    }

    #[test]
    fn outputs_hit_record_times() {
        let (m, g) = h2_setup(10.0, 200);
        let u0 = RadialField::from_fn(g.nodes(), |r| (-r * r).exp());
        let controls = Controls {
            record_every: Some(0.25),
            ..Controls::default()
        };
        let (traj, _) = evolve(&m, &g, &Nonlinearity::Zero, &u0, 1.0, &controls).unwrap();
        assert_eq!(traj.times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn rejects_negative_data() {
        let (m, g) = h2_setup(10.0, 200);
        let u0 = RadialField::from_fn(g.nodes(), |r| 1.0 - r);
        assert!(evolve(&m, &g, &Nonlinearity::Zero, &u0, 1.0, &Controls::default()).is_err());
    }
}
