//! Radial ground states and the bottom of the spectrum.
//!
//! The ground state solves `φ'' + m(r) φ' + λ φ = 0`, `φ(0) = 1`,
//! `φ'(0) = 0`, where `m = (n-1) ψ'/ψ` is the radial drift.  Integration
//! starts just off the pole from the Taylor expansion
//! `φ ≈ 1 - λ r² / (2n)`.

use crate::error::{Error, Result};
use crate::field::{locate, quintic_hermite, Jet, RadialField};
use crate::geometry::ManifoldModel;
use crate::ode::{Dopri5, OdeStatus};
use crate::solver::grid::{Discretization, RadialGrid};

/// Starting radius of the shooting integration.
const POLE_OFFSET: f64 = 1e-6;

/// A positive radial solution of the eigenvalue ODE together with its
/// envelope constants relative to `(1 + r) e^{-(n-1) κ r / 2}`.
#[derive(Debug, Clone)]
pub struct GroundState {
    model: ManifoldModel,
    lambda: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    curvatures: Vec<f64>,
    c_low: f64,
    c_up: f64,
}

impl GroundState {
    /// Wraps an explicit profile given by its jet `(φ, φ', φ'')`.
    pub fn from_jets(
        model: &ManifoldModel,
        lambda: f64,
        nodes: &[f64],
        jet: impl Fn(f64) -> (f64, f64, f64),
    ) -> Self {
        let mut values = Vec::with_capacity(nodes.len());
        let mut slopes = Vec::with_capacity(nodes.len());
        let mut curvatures = Vec::with_capacity(nodes.len());
        for &r in nodes {
            let (f, d, s) = jet(r);
            values.push(f);
            slopes.push(d);
            curvatures.push(s);
        }
        Self::assemble(model, lambda, nodes.to_vec(), values, slopes, curvatures)
    }

    fn assemble(
        model: &ManifoldModel,
        lambda: f64,
        nodes: Vec<f64>,
        values: Vec<f64>,
        slopes: Vec<f64>,
        curvatures: Vec<f64>,
    ) -> Self {
        let rate = 0.5 * (model.dim() - 1) as f64 * model.kappa();
        let (mut c_low, mut c_up) = (f64::INFINITY, 0.0_f64);
        for (&r, &v) in nodes.iter().zip(&values) {
            let ratio = v / ((1.0 + r) * (-rate * r).exp());
            c_low = c_low.min(ratio);
            c_up = c_up.max(ratio);
        }
        Self {
            model: model.clone(),
            lambda,
            nodes,
            values,
            slopes,
            curvatures,
            c_low,
            c_up,
        }
    }

    pub fn model(&self) -> &ManifoldModel {
        &self.model
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    /// Nodal profile.
    pub fn profile(&self) -> RadialField {
        RadialField::new(self.nodes.clone(), self.values.clone())
    }

    pub fn derivative(&self) -> &[f64] {
        &self.slopes
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Envelope constants `(c_low, c_up)`.
    pub fn envelope(&self) -> (f64, f64) {
        (self.c_low, self.c_up)
    }

    pub fn envelope_ratio(&self) -> f64 {
        self.c_up / self.c_low
    }

    fn jet(&self, i: usize) -> Jet {
        Jet {
            f: self.values[i],
            d: self.slopes[i],
            s: self.curvatures[i],
        }
    }

    /// `(φ, φ', φ'')` by quintic Hermite interpolation; zero beyond the
    /// last node.
    pub fn eval_jet(&self, r: f64) -> (f64, f64, f64) {
        if r > self.radius() {
            return (0.0, 0.0, 0.0);
        }
        let r = r.max(0.0);
        let i = locate(&self.nodes, r);
        quintic_hermite(self.nodes[i], self.nodes[i + 1], self.jet(i), self.jet(i + 1), r)
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.eval_jet(r).0
    }

    /// Profile sampled on other nodes (zero beyond the computed radius).
    pub fn sample(&self, nodes: &[f64]) -> RadialField {
        RadialField::from_fn(nodes, |r| self.eval(r))
    }

    /// Sup-norm of `φ'' + m φ' + λ φ` for the interpolant, measured at the
    /// cell midpoints (between the nodes where the ODE was enforced).
    pub fn ode_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for w in self.nodes.windows(2) {
            let r = 0.5 * (w[0] + w[1]);
            let (f, d, s) = self.eval_jet(r);
            let drift = self.model.radial_drift(r).unwrap_or(f64::NAN);
            worst = worst.max((s + drift * d + self.lambda * f).abs());
        }
        worst
    }
}

/// Shoots the radial eigenvalue ODE from the pole and samples the solution
/// on a graded grid of `n_points` nodes over `[0, radius]`.
pub fn solve_ground_state(model: &ManifoldModel, lambda: f64, radius: f64, n_points: usize) -> Result<GroundState> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!("eigenvalue {lambda} must be >= 0")));
    }
    if radius > model.r_max() {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} exceeds the model domain {}",
            model.r_max()
        )));
    }
    let grid = RadialGrid::graded(radius, n_points)?;
    let nodes = grid.nodes().to_vec();
    let n = model.dim() as f64;
    let stepper = Dopri5::with_tolerances(1e-12, 1e-14);

    let mut values = vec![1.0];
    let mut slopes = vec![0.0];
    let mut curvatures = vec![-lambda / n];
    let mut t = POLE_OFFSET;
    let mut y = vec![1.0 - lambda * t * t / (2.0 * n), -lambda * t / n];
    for &next in &nodes[1..] {
        let out = stepper.integrate(
            |r, y, dy| {
                let drift = model.radial_drift(r).unwrap_or(f64::NAN);
                dy[0] = y[1];
                dy[1] = -drift * y[1] - lambda * y[0];
            },
            t,
            &y,
            next,
            |_, _, _| true,
        );
        if out.status != OdeStatus::Finished {
            return Err(Error::Data(format!(
                "ground-state integration stopped at r = {:.4} ({:?})",
                out.t, out.status
            )));
        }
        y = out.y;
        t = next;
        if !(y[0] > 0.0) {
            return Err(Error::EigenvalueTooLarge { lambda, radius: next });
        }
        let drift = model.radial_drift(next)?;
        values.push(y[0]);
        slopes.push(y[1]);
        curvatures.push(-drift * y[1] - lambda * y[0]);
    }
    Ok(GroundState::assemble(model, lambda, nodes, values, slopes, curvatures))
}

/// Ground state for `λ*` of the model.
pub fn default_ground_state(model: &ManifoldModel, radius: f64, n_points: usize) -> Result<GroundState> {
    solve_ground_state(model, model.lambda_star(), radius, n_points)
}

/// Pointwise `-Δφ - λ* φ` at the nodes.  Fails if the residual drops below
/// `-1e-6 sup|φ|` anywhere, i.e. when `φ` is not a super-solution of the
/// eigenvalue problem for `λ*` of the model.
pub fn supersolution_residual(phi: &GroundState) -> Result<RadialField> {
    let model = phi.model();
    let lambda_star = model.lambda_star();
    let n = model.dim() as f64;
    let tol = 1e-6 * phi.sup();
    let mut residual = Vec::with_capacity(phi.nodes.len());
    for (i, &r) in phi.nodes.iter().enumerate() {
        let laplacian = if r == 0.0 {
            n * phi.curvatures[i]
        } else {
            phi.curvatures[i] + model.radial_drift(r)? * phi.slopes[i]
        };
        let value = -laplacian - lambda_star * phi.values[i];
        if value < -tol {
            return Err(Error::NotSupersolution {
                radius: r,
                residual: value,
                tol,
            });
        }
        residual.push(value);
    }
    Ok(RadialField::new(phi.nodes.clone(), residual))
}

/// Smallest eigenvalue of a symmetric positive tridiagonal matrix by Sturm
/// bisection.
pub(crate) fn smallest_eigenvalue(diag: &[f64], off: &[f64]) -> f64 {
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..diag.len() {
            let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            d = diag[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut hi = diag
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i < off.len() { off[i].abs() } else { 0.0 };
            d + left + right
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mut lo = diag
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i < off.len() { off[i].abs() } else { 0.0 };
            d - left - right
        })
        .fold(f64::INFINITY, f64::min);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest Dirichlet eigenvalue of `-Δ` on the ball of radius `radius` with
/// `n_points` radial nodes.
pub fn dirichlet_eigenvalue(model: &ManifoldModel, radius: f64, n_points: usize) -> Result<f64> {
    let disc = Discretization::new(model, RadialGrid::graded(radius, n_points)?)?;
    let (diag, off) = disc.symmetric_tridiagonal();
    let neg_diag: Vec<f64> = diag.iter().map(|d| -d).collect();
    let neg_off: Vec<f64> = off.iter().map(|d| -d).collect();
    Ok(smallest_eigenvalue(&neg_diag, &neg_off))
}

/// Bottom of the spectrum of a model whose curvature grows without bound,
/// where the spectrum is discrete and the radial ground state is localised.
/// Two resolutions are combined by Richardson extrapolation.
pub fn bottom_of_spectrum(model: &ManifoldModel) -> Result<f64> {
    let radius = model.r_max().min(30.0);
    let coarse = dirichlet_eigenvalue(model, radius, 2000)?;
    let fine = dirichlet_eigenvalue(model, radius, 3999)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpSpec;
    use approx::assert_relative_eq;

    fn exact_h3(r: f64) -> f64 {
        if r < 1e-4 {
            1.0 - r * r / 6.0
        } else {
            r / r.sinh()
        }
    }

    #[test]
    fn h3_ground_state_is_r_over_sinh() {
        let m = ManifoldModel::hyperbolic(3);
        let gs = solve_ground_state(&m, 1.0, 20.0, 2000).unwrap();
        assert_relative_eq!(gs.eval(1.0), 1.0 / 1f64.sinh(), epsilon = 1e-8);
        let worst = gs
            .nodes()
            .iter()
            .map(|&r| (gs.eval(r) - exact_h3(r)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
        assert!(gs.ode_residual() < 1e-6, "{}", gs.ode_residual());
    }

    #[test]
    fn euclidean_zero_eigenvalue_is_constant() {
        let gs = solve_ground_state(&ManifoldModel::euclidean(3), 0.0, 10.0, 300).unwrap();
        for v in gs.profile().values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn envelope_ratio_is_moderate_on_hyperbolic_spaces() {
        for n in [2usize, 3, 4] {
            let m = ManifoldModel::hyperbolic(n);
            let gs = default_ground_state(&m, 20.0, 2000).unwrap();
            let (lo, hi) = gs.envelope();
            assert!(lo > 0.0 && lo <= hi);
            assert!(gs.envelope_ratio() <= 10.0, "n={n}: {}", gs.envelope_ratio());
            let p = gs.profile();
            for w in p.nodes.windows(2).zip(p.values.windows(2)) {
                if w.0[0] >= 1.0 {
                    assert!(w.1[1] < w.1[0]);
                }
            }
        }
    }

    #[test]
    fn too_large_eigenvalue_changes_sign() {
        let m = ManifoldModel::hyperbolic(2);
        let err = solve_ground_state(&m, 1.0, 20.0, 400).unwrap_err();
        assert!(matches!(err, Error::EigenvalueTooLarge { .. }));
    }

    #[test]
    fn supersolution_residuals() {
        let m = ManifoldModel::new(3, WarpSpec::ScaledHyperbolic { kappa: 2.0 }).unwrap();
        assert_eq!(m.lambda_star(), 4.0);
        let gs = default_ground_state(&m, 10.0, 1000).unwrap();
        let res = supersolution_residual(&gs).unwrap();
        assert!(res.min() >= -1e-6);

        let h3 = ManifoldModel::hyperbolic(3);
        let nodes = RadialGrid::graded(20.0, 1000).unwrap().nodes().to_vec();
        let exact = GroundState::from_jets(&h3, 1.0, &nodes, |r| {
            if r == 0.0 {
                return (1.0, 0.0, -1.0 / 3.0);
            }
            let (s, c) = (r.sinh(), r.cosh());
            let f = r / s;
            let d = (s - r * c) / (s * s);
            let dd = (2.0 * r * c * c - r * s * s - 2.0 * s * c) / (s * s * s);
            (f, d, dd)
        });
        let res = supersolution_residual(&exact).unwrap();
        assert!(res.sup() < 1e-10);

        let flat = GroundState::from_jets(&h3, 0.0, &nodes, |_| (1.0, 0.0, 0.0));
        assert!(matches!(supersolution_residual(&flat), Err(Error::NotSupersolution { .. })));
    }

    #[test]
    fn dirichlet_eigenvalue_approaches_bottom_of_spectrum() {
        // For H³ the Dirichlet eigenvalue on B(R) is 1 + π²/R².
        let m = ManifoldModel::hyperbolic(3);
        let lam = dirichlet_eigenvalue(&m, 10.0, 1000).unwrap();
        assert_relative_eq!(lam, 1.0 + std::f64::consts::PI.powi(2) / 100.0, max_relative = 1e-4);
    }

    #[test]
    fn power_decay_bottom_of_spectrum_exceeds_constant_curvature_value() {
        let m = ManifoldModel::power_decay(3, 0.5, 1.0).unwrap();
        let base = ManifoldModel::power_decay(3, 0.5, 0.0).unwrap();
        assert!(m.lambda_one() > base.lambda_one());
        assert!(m.lambda_one().is_finite());
        assert_eq!(m.lambda_star(), m.lambda_one());
    }
}
