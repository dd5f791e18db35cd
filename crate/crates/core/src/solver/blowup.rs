//! Blow-up detection: magnitude, step collapse and super-linear growth must
//! all fire before a run is declared to blow up.

use crate::ode::{Dopri5, OdeStatus};

use super::evolve::REACTION_CAP;
use super::{BlowupThresholds, Controls, StepRecord, StopReason, Trajectory, Verdict, VerdictKind};

const GROWTH_WINDOW: usize = 5;

/// Classifies a finished trajectory.
pub fn detect_blowup(traj: &Trajectory, th: &BlowupThresholds) -> Verdict {
    let sup0 = traj.initial_sup();
    let last = traj.final_sup();
    let collapsed = traj.stop == StopReason::StepCollapse || traj.last_proposed_dt < th.dt_min;
    if last >= th.m_big {
        if collapsed && superlinear(&traj.steps) {
            let t_est = estimate_blowup_time(&traj.steps, 1.0).unwrap_or_else(|| traj.final_time());
            return Verdict::numerical(VerdictKind::BlowUp { t_est });
        }
        return Verdict::undetermined("resolution");
    }
    if traj.stop == StopReason::Horizon && (last < th.safe_factor * sup0 || (sup0 == 0.0 && last == 0.0)) {
        return Verdict::numerical(VerdictKind::Global { horizon: traj.horizon });
    }
    match traj.stop {
        StopReason::StepLimit => Verdict::undetermined("step limit"),
        StopReason::Horizon => Verdict::undetermined("growth without blow-up"),
        StopReason::StepCollapse => Verdict::undetermined("resolution"),
    }
}

/// Growth rate `Δ ln sup / Δt` over the last `GROWTH_WINDOW` steps exceeds
/// the rate over the preceding window.
fn superlinear(steps: &[StepRecord]) -> bool {
    let n = steps.len();
    if n < 2 * GROWTH_WINDOW + 1 {
        return false;
    }
    let rate = |a: &StepRecord, b: &StepRecord| {
        let dt = b.t - a.t;
        if dt > 0.0 && a.sup > 0.0 {
            (b.sup.ln() - a.sup.ln()) / dt
        } else {
            f64::INFINITY
        }
    };
    let recent = rate(&steps[n - 1 - GROWTH_WINDOW], &steps[n - 1]);
    let earlier = rate(&steps[n - 1 - 2 * GROWTH_WINDOW], &steps[n - 1 - GROWTH_WINDOW]);
    recent > earlier && recent > 0.0
}

/// Vertical asymptote from a least-squares line through `sup^{-σ}` versus
/// `t` over the large-amplitude tail (saturated values excluded).
pub fn estimate_blowup_time(steps: &[StepRecord], sigma: f64) -> Option<f64> {
    let usable: Vec<&StepRecord> = steps
        .iter()
        .filter(|s| s.sup.is_finite() && s.sup > 0.0 && s.sup < 1e-3 * REACTION_CAP)
        .collect();
    let peak = usable.iter().map(|s| s.sup).fold(0.0, f64::max);
    let tail: Vec<&StepRecord> = usable
        .iter()
        .rev()
        .take_while(|s| s.sup >= 1e-3 * peak)
        .take(50)
        .copied()
        .collect();
    if tail.len() < 3 {
        return None;
    }
    let k = tail.len() as f64;
    let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
    let t_ref = tail[0].t;
    for s in &tail {
        let x = s.t - t_ref;
        let y = s.sup.powf(-sigma);
        st += x;
        sy += y;
        stt += x * x;
        sty += x * y;
    }
    let denom = k * stt - st * st;
    if denom <= 0.0 {
        return None;
    }
    let slope = (k * sty - st * sy) / denom;
    let intercept = (sy - slope * st) / k;
    if !(slope < 0.0) {
        return None;
    }
    let t_est = t_ref - intercept / slope;
    let t_last = tail[0].t;
    let span = t_last - tail[tail.len() - 1].t;
    if t_est.is_finite() && t_est >= t_last - span && t_est <= t_last + 10.0 * span.max(1e-12) {
        Some(t_est.max(t_last))
    } else {
        None
    }
}

/// Integrates the spatially homogeneous problem `u' = f(u, t)` (diffusion
/// off) with an adaptive fifth-order method and returns it as a one-node
/// trajectory, so that the PDE detector can be validated on exact ODE
/// blow-up times.
pub fn integrate_reaction(f: impl Fn(f64, f64) -> f64, u0: f64, horizon: f64, controls: &Controls) -> (Trajectory, Verdict) {
    let th = controls.thresholds;
    let solver = Dopri5 {
        rtol: 1e-10,
        atol: 1e-12,
        h_min: th.dt_min,
        h_max: controls.dt_max,
        ..Dopri5::default()
    };
    let mut steps = Vec::new();
    let mut prev_t = 0.0;
    let out = solver.integrate(
        |t, y, dy| dy[0] = f(y[0], t),
        0.0,
        &[u0],
        horizon,
        |t, y, _| {
            steps.push(StepRecord {
                t,
                sup: y[0].abs(),
                dt: t - prev_t,
            });
            prev_t = t;
            true
        },
    );
    let stop = match out.status {
        OdeStatus::Finished => StopReason::Horizon,
        OdeStatus::StepCollapse => StopReason::StepCollapse,
        OdeStatus::StepLimit | OdeStatus::Halted => StopReason::StepLimit,
    };
    let traj = Trajectory {
        nodes: vec![0.0],
        horizon,
        steps,
        times: vec![0.0, out.t],
        snapshots: vec![vec![u0], vec![out.y[0]]],
        stop,
        last_proposed_dt: out.h,
    };
    let verdict = detect_blowup(&traj, &th);
    (traj, verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_ode_blows_up_at_one() {
        let (_, v) = integrate_reaction(|u, _| u * u, 1.0, 10.0, &Controls::default());
        let t = v.t_est().expect("blow-up");
        assert!((t - 1.0).abs() < 0.02, "{t}");
    }

    #[test]
    fn weighted_quadratic_ode_blows_up_at_ln2() {
        let (_, v) = integrate_reaction(|u, t| t.exp() * u * u, 1.0, 10.0, &Controls::default());
        let t = v.t_est().expect("blow-up");
        assert!((t - 2f64.ln()).abs() < 0.02 * 2f64.ln(), "{t}");
    }

    #[test]
    fn decaying_ode_is_global() {
        let (_, v) = integrate_reaction(|u, _| -u, 1.0, 5.0, &Controls::default());
        assert!(v.is_global());
    }

    #[test]
    fn large_but_healthy_run_is_unresolved() {
        let steps: Vec<StepRecord> = (0..20)
            .map(|i| StepRecord {
                t: i as f64,
                sup: 1e7,
                dt: 1.0,
            })
            .collect();
        let traj = Trajectory {
            nodes: vec![0.0],
            horizon: 19.0,
            steps,
            times: vec![0.0, 19.0],
            snapshots: vec![vec![1e7], vec![1e7]],
            stop: StopReason::Horizon,
            last_proposed_dt: 1.0,
        };
        let v = detect_blowup(&traj, &BlowupThresholds::default());
        assert_eq!(v, Verdict::undetermined("resolution"));
    }
}
