//! Explicit super-solutions.
//!
//! Type-I: `ū = θ e^{(δ-λ)t} φ` stays inside the log-singular regime, where
//! `δū ≥ t^q g(ū)` reduces to `ū ≤ e^{-γ t^{q/α}}` with `γ = δ^{-1/α}`.
//! Type-II: `ū = C a(t)` with `a' = e^{μt} a (e^{β(Ca)^p} - 1)`, `a(0) = 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::nonlinearity::{TypeOneSpec, TypeTwoSpec};
use crate::ode::{Dopri5, OdeStatus};

use super::thresholds::optimal_delta;

/// Validity certificate for `ū = θ e^{(δ-λ)t} φ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupersolutionCert {
    pub theta: f64,
    pub delta: f64,
    pub lambda: f64,
    /// `γ = δ^{-1/α}`.
    pub gamma_exp: f64,
    /// Exponent `q/α` of the admissible envelope.
    pub ratio: f64,
    pub eps_regime: f64,
    pub sup_phi: f64,
    /// Time up to which the construction is valid; infinite for a global
    /// certificate.
    pub horizon: f64,
}

impl SupersolutionCert {
    pub fn is_global(&self) -> bool {
        self.horizon.is_infinite()
    }

    /// Amplitude factor `θ e^{(δ-λ)t}` multiplying `φ`.
    pub fn amplitude(&self, t: f64) -> f64 {
        self.theta * ((self.delta - self.lambda) * t).exp()
    }
}

/// `(δ-λ)t + γ t^ρ`, the log-growth of the envelope relative to `θ sup φ`.
fn exponent(delta: f64, lambda: f64, gamma: f64, rho: f64, t: f64) -> f64 {
    (delta - lambda) * t + gamma * t.powf(rho)
}

/// `sup_{t ≥ 0}` of [`exponent`], or `None` when it is unbounded.
fn exponent_max(delta: f64, lambda: f64, gamma: f64, rho: f64) -> Option<f64> {
    let a = lambda - delta;
    if rho < 1.0 {
        let t_star = (gamma * rho / a).powf(1.0 / (1.0 - rho));
        Some(exponent(delta, lambda, gamma, rho, t_star))
    } else if rho == 1.0 && gamma <= a {
        Some(0.0)
    } else {
        None
    }
}

/// Builds the certificate for amplitude `theta` and rate `delta`.  The
/// profile `φ` is the ground state for `λ* ` of the model, with sup-norm
/// `sup_phi`.
pub fn build_type_one_supersolution(
    model: &ManifoldModel,
    spec: &TypeOneSpec,
    sup_phi: f64,
    theta: f64,
    delta: f64,
) -> Result<SupersolutionCert> {
    let lambda = model.lambda_star();
    if !(delta > 0.0 && delta < lambda) {
        return Err(Error::Precondition(format!("delta = {delta} must lie in (0, {lambda})")));
    }
    if !(theta > 0.0 && sup_phi > 0.0) {
        return Err(Error::Precondition("theta and sup(phi) must be positive".into()));
    }
    let eps = spec.eps_splice;
    if !(theta * sup_phi < eps) {
        return Err(Error::Precondition(format!(
            "theta * sup(phi) = {:.3e} must be below the singular regime bound {eps:.4}",
            theta * sup_phi
        )));
    }
    let gamma = delta.powf(-1.0 / spec.alpha);
    let rho = spec.q / spec.alpha;
    let budget = eps.ln() - theta.ln() - sup_phi.ln();
    let f = |t: f64| exponent(delta, lambda, gamma, rho, t);
    let horizon = match exponent_max(delta, lambda, gamma, rho) {
        Some(m) if m < budget => f64::INFINITY,
        _ => {
            // {t : f(t) < budget} is an interval containing 0 (f is concave
            // for ρ ≤ 1 and convex for ρ ≥ 1 with f(0) = 0 < budget).
            let mut hi = 1.0;
            while f(hi) < budget && !(rho < 1.0 && hi > 1e12) {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            if rho < 1.0 {
                hi = hi.min((gamma * rho / (lambda - delta)).powf(1.0 / (1.0 - rho)));
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < budget {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };
    Ok(SupersolutionCert {
        theta,
        delta,
        lambda,
        gamma_exp: gamma,
        ratio: rho,
        eps_regime: eps,
        sup_phi,
        horizon,
    })
}

/// Supremum of amplitudes `θ` admitting a global certificate at `delta`.
pub fn max_certified_theta(lambda: f64, spec: &TypeOneSpec, sup_phi: f64, delta: f64) -> Option<f64> {
    if !(delta > 0.0 && delta < lambda) {
        return None;
    }
    let gamma = delta.powf(-1.0 / spec.alpha);
    let m = exponent_max(delta, lambda, gamma, spec.q / spec.alpha)?;
    Some(spec.eps_splice / sup_phi * (-m).exp())
}

/// Rate `δ ∈ (0, λ)` maximizing the certified amplitude, or `None` if no
/// rate admits a global certificate.
pub fn best_delta(lambda: f64, spec: &TypeOneSpec) -> Option<f64> {
    let rho = spec.q / spec.alpha;
    if rho > 1.0 || !(lambda > 0.0) {
        return None;
    }
    if rho == 1.0 {
        let d = optimal_delta(spec.alpha);
        return (d < lambda && d + d.powf(-1.0 / spec.alpha) <= lambda).then_some(d);
    }
    let cost = |d: f64| exponent_max(d, lambda, d.powf(-1.0 / spec.alpha), rho).unwrap_or(f64::INFINITY);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lambda * 1e-9, lambda * (1.0 - 1e-9));
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    Some(0.5 * (a + b))
}

/// Whether some `(θ, δ)` certifies global existence.
pub fn type_one_feasible(lambda: f64, q: f64, alpha: f64) -> bool {
    let rho = q / alpha;
    if !(lambda > 0.0) || rho > 1.0 {
        return false;
    }
    if rho < 1.0 {
        return true;
    }
    let d = optimal_delta(alpha);
    d < lambda && d + d.powf(-1.0 / alpha) <= lambda
}

/// Spatially constant super-solution `C a(t)` for the Type-II problem.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarSupersolution {
    pub amplitude: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Estimated finite escape time of `a`, if it occurs before the horizon.
    pub escape_time: Option<f64>,
}

impl ScalarSupersolution {
    /// `C a(t)` by linear interpolation between accepted steps.
    pub fn bound(&self, t: f64) -> f64 {
        let i = match self.times.iter().position(|&s| s >= t) {
            Some(0) => return self.amplitude * self.values[0],
            Some(i) => i,
            None => return if self.escape_time.is_some() { f64::INFINITY } else { self.amplitude * self.values[self.values.len() - 1] },
        };
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        self.amplitude * (self.values[i - 1] * (1.0 - w) + self.values[i] * w)
    }
}

pub fn ode_supersolution(spec: &TypeTwoSpec, amplitude: f64, horizon: f64) -> Result<ScalarSupersolution> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::Precondition(format!("amplitude {amplitude} must be >= 0")));
    }
    let solver = Dopri5 {
        rtol: 1e-11,
        atol: 1e-13,
        h_min: 1e-13,
        ..Dopri5::default()
    };
    let mut times = vec![0.0];
    let mut values = vec![1.0];
    let c = amplitude;
    let out = solver.integrate(
        |t, y, dy| {
            let x = spec.beta * (c * y[0]).powf(spec.p);
            dy[0] = (spec.mu * t).exp() * y[0] * x.exp_m1();
        },
        0.0,
        &[1.0],
        horizon,
        |t, y, _| {
            times.push(t);
            values.push(y[0]);
            y[0].is_finite() && y[0] < 1e12
        },
    );
    let escape_time = match out.status {
        OdeStatus::Finished => None,
        _ => Some(out.t),
    };
    Ok(ScalarSupersolution {
        amplitude,
        times,
        values,
        escape_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn subcritical_time_power_gives_global_certificate() {
        let h2 = ManifoldModel::hyperbolic(2);
        let spec = TypeOneSpec::new(1.0, 0.5, None).unwrap();
        let theta_max = max_certified_theta(0.25, &spec, 1.0, 0.1).unwrap();
        let cert = build_type_one_supersolution(&h2, &spec, 1.0, 0.5 * theta_max, 0.1).unwrap();
        assert!(cert.is_global());
        let cert = build_type_one_supersolution(&h2, &spec, 1.0, 2.0 * theta_max, 0.1).unwrap();
        assert!(cert.horizon.is_finite() && cert.horizon > 0.0);
    }

    #[test]
    fn borderline_certificates() {
        let spec = TypeOneSpec::new(1.0, 1.0, None).unwrap();
        let h4 = ManifoldModel::hyperbolic(4);
        let cert = build_type_one_supersolution(&h4, &spec, 1.0, 1e-3, 1.0).unwrap();
        assert!(cert.is_global());
        let h2 = ManifoldModel::hyperbolic(2);
        for i in 1..50 {
            let delta = 0.25 * i as f64 / 50.0;
            let cert = build_type_one_supersolution(&h2, &spec, 1.0, 1e-3, delta).unwrap();
            assert!(cert.horizon.is_finite());
        }
        assert!(matches!(
            build_type_one_supersolution(&h2, &spec, 1.0, 1e-3, 0.25),
            Err(Error::Precondition(_))
        ));
        assert!(build_type_one_supersolution(&h2, &spec, 1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn best_delta_beats_neighbours() {
        let spec = TypeOneSpec::new(1.0, 0.5, None).unwrap();
        let d = best_delta(0.25, &spec).unwrap();
        // closed form for ρ = 1/2, α = 1: maximize δ²(λ - δ) → δ = 2λ/3
        assert!((d - 0.5 / 3.0).abs() < 1e-6, "{d}");
        let best = max_certified_theta(0.25, &spec, 1.0, d).unwrap();
        for other in [0.05, 0.1, 0.2] {
            assert!(max_certified_theta(0.25, &spec, 1.0, other).unwrap() <= best);
        }
    }

    #[test]
    fn scalar_supersolution_examples() {
        let spec = TypeTwoSpec::new(1.0, 1.0, 1.0).unwrap();
        let zero = ode_supersolution(&spec, 0.0, 3.0).unwrap();
        assert!(zero.escape_time.is_none());
        assert!(zero.values.iter().all(|&v| v == 1.0));

        // with μ = 0 the escape time is ∫_1^∞ da / (a(e^a - 1))
        let flat = TypeTwoSpec { mu: 0.0, beta: 1.0, p: 1.0 };
        let s = ode_supersolution(&flat, 1.0, 10.0).unwrap();
        let rule = quad::gauss_legendre(20);
        let mut exact = 0.0;
        let mut a = 1.0;
        while a < 60.0 {
            exact += quad::integrate(|x| 1.0 / (x * x.exp_m1()), a, a + 1.0, &rule, 4);
            a += 1.0;
        }
        let t = s.escape_time.expect("finite escape");
        assert!((t - exact).abs() < 0.01 * exact, "{t} vs {exact}");

        let small = TypeTwoSpec::new(1.0, 1.0, 2.0).unwrap();
        let s = ode_supersolution(&small, 1e-3, 5.0).unwrap();
        assert!(s.escape_time.is_none());
        let last = *s.values.last().unwrap();
        assert!(last.is_finite() && last - 1.0 < 1e-2);
        assert!((last.ln() - 1e-6 * (5f64.exp() - 1.0)).abs() < 1e-6);
    }
}
