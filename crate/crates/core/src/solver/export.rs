//! Plain-text exports of trajectories.

use std::io::{self, Write};

use serde::Serialize;

use super::{Trajectory, Verdict};

/// Writes every stored snapshot as `t,r,u` rows.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> io::Result<()> {
    writeln!(out, "t,r,u")?;
    for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
        for (r, u) in traj.nodes.iter().zip(snap) {
            writeln!(out, "{t:.9e},{r:.9e},{u:.9e}")?;
        }
    }
    Ok(())
}

/// Compact record of a run.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub verdict: Verdict,
    pub t_est: Option<f64>,
    pub final_time: f64,
    pub steps: usize,
    pub times: Vec<f64>,
    pub sup_norms: Vec<f64>,
}

pub fn summarize(traj: &Trajectory, verdict: &Verdict) -> TrajectorySummary {
    TrajectorySummary {
        verdict: verdict.clone(),
        t_est: verdict.t_est(),
        final_time: traj.final_time(),
        steps: traj.steps.len(),
        times: traj.times.clone(),
        sup_norms: traj.sup_norms(),
    }
}
