//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).
//!
//! Used for the radial warp and ground-state ODEs, the scalar super-solution
//! ODE, and the reaction-only trajectories fed to the blow-up detector.

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeStatus {
    /// Reached the requested end point.
    Finished,
    /// The step observer asked to stop.
    Halted,
    /// The step size fell below `h_min` (typical near a finite escape time).
    StepCollapse,
    /// Exceeded `max_steps`.
    StepLimit,
}

#[derive(Debug, Clone)]
pub struct OdeOutcome {
    pub t: f64,
    pub y: Vec<f64>,
    pub status: OdeStatus,
    pub accepted: usize,
    pub rejected: usize,
    /// Last attempted step size.
    pub h: f64,
}

#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h_init: None,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

impl Dopri5 {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    /// Integrates `y' = rhs(t, y)` from `t0` to `t_end`.
    ///
    /// `observer(t, y, h)` is called after every accepted step; returning
    /// `false` halts the integration.  The final step is clipped so that
    /// `t_end` is hit exactly.
    pub fn integrate<F, O>(
        &self,
        mut rhs: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        mut observer: O,
    ) -> OdeOutcome
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        O: FnMut(f64, &[f64], f64) -> bool,
    {
        let dim = y0.len();
        let mut y = y0.to_vec();
        let mut t = t0;
        let span = t_end - t0;
        let mut k1 = vec![0.0; dim];
        let mut k2 = vec![0.0; dim];
        let mut k3 = vec![0.0; dim];
        let mut k4 = vec![0.0; dim];
        let mut k5 = vec![0.0; dim];
        let mut k6 = vec![0.0; dim];
        let mut k7 = vec![0.0; dim];
        let mut tmp = vec![0.0; dim];
        let mut y_new = vec![0.0; dim];

        rhs(t, &y, &mut k1);
        let mut h = self
            .h_init
            .unwrap_or_else(|| initial_step(&y, &k1, self.rtol, self.atol, span))
            .min(self.h_max)
            .min(span.abs());
        let mut accepted = 0;
        let mut rejected = 0;
        let mut fac_prev_err = 1e-4_f64;

        if span <= 0.0 {
            return OdeOutcome {
                t,
                y,
                status: OdeStatus::Finished,
                accepted,
                rejected,
                h,
            };
        }

        loop {
            if accepted + rejected >= self.max_steps {
                return OdeOutcome {
                    t,
                    y,
                    status: OdeStatus::StepLimit,
                    accepted,
                    rejected,
                    h,
                };
            }
            let mut last = false;
            if t + h >= t_end {
                h = t_end - t;
                last = true;
            }
            if h < self.h_min && !last {
                return OdeOutcome {
                    t,
                    y,
                    status: OdeStatus::StepCollapse,
                    accepted,
                    rejected,
                    h,
                };
            }

            for i in 0..dim {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            rhs(t + C2 * h, &tmp, &mut k2);
            for i in 0..dim {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(t + C3 * h, &tmp, &mut k3);
            for i in 0..dim {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(t + C4 * h, &tmp, &mut k4);
            for i in 0..dim {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(t + C5 * h, &tmp, &mut k5);
            for i in 0..dim {
                tmp[i] = y[i]
                    + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            rhs(t + h, &tmp, &mut k6);
            for i in 0..dim {
                y_new[i] =
                    y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
            }
            rhs(t + h, &y_new, &mut k7);

            let mut err = 0.0;
            let mut finite = true;
            for i in 0..dim {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                        + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                if !e.is_finite() || !y_new[i].is_finite() {
                    finite = false;
                }
                err += (e / sc).powi(2);
            }
            let err = if finite {
                (err / dim as f64).sqrt()
            } else {
                f64::INFINITY
            };

            if err <= 1.0 {
                // PI step-size control
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.7 / 5.0) * fac_prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0)
                };
                fac_prev_err = err.max(1e-4);
                t = if last { t_end } else { t + h };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                accepted += 1;
                if !observer(t, &y, h) {
                    return OdeOutcome {
                        t,
                        y,
                        status: OdeStatus::Halted,
                        accepted,
                        rejected,
                        h,
                    };
                }
                if last {
                    return OdeOutcome {
                        t,
                        y,
                        status: OdeStatus::Finished,
                        accepted,
                        rejected,
                        h,
                    };
                }
                h = (h * fac).min(self.h_max);
            } else {
                rejected += 1;
                let fac = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h *= fac;
            }
        }
    }
}

fn initial_step(y: &[f64], dy: &[f64], rtol: f64, atol: f64, span: f64) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for (yi, fi) in y.iter().zip(dy) {
        let sc = atol + rtol * yi.abs();
        d0 += (yi / sc).powi(2);
        d1 += (fi / sc).powi(2);
    }
    let h = if d0 < 1e-10 || d1 < 1e-10 {
        1e-6
    } else {
        0.01 * (d0 / d1).sqrt()
    };
    h.min(span.abs()).max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let out = Dopri5::with_tolerances(1e-11, 1e-12).integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[1.0, 0.0],
            2.0 * std::f64::consts::PI,
            |_, _, _| true,
        );
        assert_eq!(out.status, OdeStatus::Finished);
        assert!((out.y[0] - 1.0).abs() < 1e-9);
        assert!(out.y[1].abs() < 1e-9);
    }

    #[test]
    fn riccati_escape_collapses_step() {
        // y' = y^2, y(0) = 1 escapes at t = 1
        let mut solver = Dopri5::with_tolerances(1e-9, 1e-12);
        solver.h_min = 1e-12;
        let out = solver.integrate(|_, y, dy| dy[0] = y[0] * y[0], 0.0, &[1.0], 2.0, |_, _, _| true);
        assert_eq!(out.status, OdeStatus::StepCollapse);
        assert!((out.t - 1.0).abs() < 1e-6);
    }

    #[test]
    fn observer_can_halt() {
        let out = Dopri5::default().integrate(
            |_, y, dy| dy[0] = y[0],
            0.0,
            &[1.0],
            10.0,
            |_, y, _| y[0] < 100.0,
        );
        assert_eq!(out.status, OdeStatus::Halted);
        assert!(out.y[0] >= 100.0);
    }
}
