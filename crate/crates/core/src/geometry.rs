//! Rotationally symmetric model manifolds `dr² + ψ(r)² dω²`.
//!
//! A model is fixed by its dimension and its warp function ψ, which solves
//! `ψ'' = G(r) ψ` with `ψ(0) = 0`, `ψ'(0) = 1` for a non-negative radial
//! curvature profile `G`.  Hyperbolic space is `ψ = sinh r`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{locate, quintic_hermite, Jet};
use crate::ode::{Dopri5, OdeStatus};

/// Default cap on the radial evaluation domain, in geodesic units.
pub const DEFAULT_R_MAX: f64 = 40.0;

/// Which warp function the model uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WarpSpec {
    /// `ψ(r) = r`
    Euclidean,
    /// `ψ(r) = sinh r`
    Hyperbolic,
    /// `ψ(r) = sinh(κ r) / κ`, constant curvature `-κ²`
    ScaledHyperbolic { kappa: f64 },
    /// `ψ'' = Ĉ (1 + r^γ) ψ`, integrated numerically
    PowerDecay { c_hat: f64, gamma: f64 },
}

/// Tabulated solution of the warp ODE on a curvature-adapted mesh.
#[derive(Debug)]
struct WarpTable {
    r: Vec<f64>,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    c_hat: f64,
    gamma: f64,
}

impl WarpTable {
    fn curvature(&self, r: f64) -> f64 {
        power_curvature(self.c_hat, self.gamma, r)
    }

    fn jet(&self, i: usize) -> Jet {
        Jet {
            f: self.psi[i],
            d: self.dpsi[i],
            s: self.curvature(self.r[i]) * self.psi[i],
        }
    }

    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let i = locate(&self.r, r);
        quintic_hermite(self.r[i], self.r[i + 1], self.jet(i), self.jet(i + 1), r)
    }
}

fn power_curvature(c_hat: f64, gamma: f64, r: f64) -> f64 {
    let rg = if gamma == 0.0 { 1.0 } else { r.powf(gamma) };
    c_hat * (1.0 + rg)
}

/// An immutable rotationally symmetric Cartan-Hadamard model.
#[derive(Debug, Clone)]
pub struct ManifoldModel {
    dim: usize,
    warp: WarpSpec,
    kappa: f64,
    gamma: f64,
    c_hat: f64,
    r_max: f64,
    table: Option<Arc<WarpTable>>,
    lambda_one: f64,
}

impl ManifoldModel {
    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, WarpSpec::Euclidean).expect("valid Euclidean model")
    }

    pub fn hyperbolic(dim: usize) -> Self {
        Self::new(dim, WarpSpec::Hyperbolic).expect("valid hyperbolic model")
    }

    pub fn scaled_hyperbolic(dim: usize, kappa: f64) -> Result<Self> {
        Self::new(dim, WarpSpec::ScaledHyperbolic { kappa })
    }

    pub fn power_decay(dim: usize, c_hat: f64, gamma: f64) -> Result<Self> {
        Self::new(dim, WarpSpec::PowerDecay { c_hat, gamma })
    }

    pub fn new(dim: usize, warp: WarpSpec) -> Result<Self> {
        Self::with_r_max(dim, warp, DEFAULT_R_MAX)
    }

    pub fn with_r_max(dim: usize, warp: WarpSpec, r_max: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!("dimension {dim} < 2")));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::InvalidParameter(format!("r_max = {r_max}")));
        }
        let nm1 = (dim - 1) as f64;
        let mut model = match warp {
            WarpSpec::Euclidean => Self {
                dim,
                warp,
                kappa: 0.0,
                gamma: 0.0,
                c_hat: 0.0,
                r_max,
                table: None,
                lambda_one: 0.0,
            },
            WarpSpec::Hyperbolic => Self {
                dim,
                warp,
                kappa: 1.0,
                gamma: 0.0,
                c_hat: 0.5,
                r_max,
                table: None,
                lambda_one: nm1 * nm1 / 4.0,
            },
            WarpSpec::ScaledHyperbolic { kappa } => {
                if !(kappa.is_finite() && kappa > 0.0) {
                    return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
                }
                Self {
                    dim,
                    warp,
                    kappa,
                    gamma: 0.0,
                    c_hat: 0.5 * kappa * kappa,
                    r_max,
                    table: None,
                    lambda_one: nm1 * nm1 * kappa * kappa / 4.0,
                }
            }
            WarpSpec::PowerDecay { c_hat, gamma } => {
                if !(c_hat.is_finite() && c_hat > 0.0) {
                    return Err(Error::InvalidParameter(format!("c_hat = {c_hat}")));
                }
                if !(gamma.is_finite() && gamma >= 0.0) {
                    return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
                }
                let table = build_power_table(c_hat, gamma, r_max)?;
                let kappa = power_curvature(c_hat, gamma, 0.0).sqrt();
                Self {
                    dim,
                    warp,
                    kappa,
                    gamma,
                    c_hat,
                    r_max,
                    table: Some(Arc::new(table)),
                    lambda_one: nm1 * nm1 * kappa * kappa / 4.0,
                }
            }
        };
        if matches!(warp, WarpSpec::PowerDecay { gamma, .. } if gamma > 0.0) {
            model.lambda_one = crate::spectral::bottom_of_spectrum(&model)?;
        }
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn warp(&self) -> WarpSpec {
        self.warp
    }

    /// Curvature scale κ of the uniform bound `K ≤ -κ²`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Decay exponent γ in `K_R ≤ -Ĉ(1 + r^γ)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn c_hat(&self) -> f64 {
        self.c_hat
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn is_hyperbolic(&self) -> bool {
        matches!(self.warp, WarpSpec::Hyperbolic)
    }

    /// `(ψ, ψ', ψ'')` at `r ∈ [0, r_max]`.
    pub fn warp_jet(&self, r: f64) -> (f64, f64, f64) {
        match self.warp {
            WarpSpec::Euclidean => (r, 1.0, 0.0),
            WarpSpec::Hyperbolic => (r.sinh(), r.cosh(), r.sinh()),
            WarpSpec::ScaledHyperbolic { kappa } => {
                let s = (kappa * r).sinh();
                (s / kappa, (kappa * r).cosh(), kappa * s)
            }
            WarpSpec::PowerDecay { .. } => {
                let table = self.table.as_ref().expect("power-decay table");
                if r <= 0.0 {
                    (0.0, 1.0, 0.0)
                } else {
                    table.eval(r.min(self.r_max))
                }
            }
        }
    }

    pub fn psi(&self, r: f64) -> f64 {
        self.warp_jet(r).0
    }

    /// Radial curvature profile `G = ψ''/ψ`.
    pub fn curvature(&self, r: f64) -> f64 {
        match self.warp {
            WarpSpec::Euclidean => 0.0,
            WarpSpec::Hyperbolic => 1.0,
            WarpSpec::ScaledHyperbolic { kappa } => kappa * kappa,
            WarpSpec::PowerDecay { c_hat, gamma } => power_curvature(c_hat, gamma, r),
        }
    }

    /// Mean-curvature drift `(n-1) ψ'(r)/ψ(r)` of the radial Laplacian.
    pub fn radial_drift(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain {
                what: "radial_drift",
                value: r,
            });
        }
        let nm1 = (self.dim - 1) as f64;
        Ok(match self.warp {
            WarpSpec::Euclidean => nm1 / r,
            WarpSpec::Hyperbolic => nm1 / r.tanh(),
            WarpSpec::ScaledHyperbolic { kappa } => nm1 * kappa / (kappa * r).tanh(),
            WarpSpec::PowerDecay { .. } => {
                if r > self.r_max {
                    return Err(Error::Domain {
                        what: "radial_drift beyond r_max",
                        value: r,
                    });
                }
                let (p, dp, _) = self.warp_jet(r);
                nm1 * dp / p
            }
        })
    }

    /// Area density `ψ(r)^{n-1}` of the geodesic sphere of radius `r`
    /// (without the unit-sphere measure).
    pub fn volume_weight(&self, r: f64) -> f64 {
        self.psi(r.max(0.0)).powi(self.dim as i32 - 1)
    }

    /// Measure ω_{n-1} of the unit sphere `S^{n-1}`.
    pub fn sphere_measure(&self) -> f64 {
        sphere_measure(self.dim)
    }

    /// Spectral constant used by the global-existence constructions.
    pub fn lambda_star(&self) -> f64 {
        let nm1 = (self.dim - 1) as f64;
        match self.warp {
            WarpSpec::PowerDecay { gamma, .. } if gamma > 0.0 => self.lambda_one,
            _ => nm1 * nm1 * self.kappa * self.kappa / 4.0,
        }
    }

    /// Bottom of the L² spectrum: exact for constant curvature, numerical
    /// for power-decay curvature.
    pub fn lambda_one(&self) -> f64 {
        self.lambda_one
    }
}

/// `2 π^{n/2} / Γ(n/2)`.
pub fn sphere_measure(dim: usize) -> f64 {
    2.0 * PI.powf(dim as f64 / 2.0) / gamma_half_integer(dim)
}

/// Γ(n/2) for a positive integer n.
fn gamma_half_integer(n: usize) -> f64 {
    let (mut value, mut x) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = n as f64 / 2.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// Geodesic distance from the origin of the Poincaré ball to a point of
/// Euclidean norm `norm`.
pub fn ball_to_geodesic(norm: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&norm) {
        return Err(Error::Domain {
            what: "ball_to_geodesic",
            value: norm,
        });
    }
    Ok(2.0 * norm.atanh())
}

fn build_power_table(c_hat: f64, gamma: f64, r_max: f64) -> Result<WarpTable> {
    const BASE_SPACING: f64 = 0.01;
    let mut r = vec![0.0];
    let mut psi = vec![0.0];
    let mut dpsi = vec![1.0];
    let solver = Dopri5 {
        rtol: 1e-13,
        atol: 1e-15,
        ..Dopri5::default()
    };
    let mut h_guess: f64 = 1e-3;
    let mut t = 0.0;
    while t < r_max {
        let g = power_curvature(c_hat, gamma, t).max(1.0);
        let next = (t + BASE_SPACING / g.sqrt()).min(r_max);
        let mut stepper = solver.clone();
        stepper.h_init = Some(h_guess.min(next - t));
        let y0 = [psi[psi.len() - 1], dpsi[dpsi.len() - 1]];
        let out = stepper.integrate(
            |s, y, dy| {
                dy[0] = y[1];
                dy[1] = power_curvature(c_hat, gamma, s) * y[0];
            },
            t,
            &y0,
            next,
            |_, _, _| true,
        );
        if out.status != OdeStatus::Finished {
            return Err(Error::Data(format!(
                "warp integration stopped at r = {:.4} ({:?})",
                out.t, out.status
            )));
        }
        if !(out.y[0] < 1e250) {
            return Err(Error::InvalidParameter(format!(
                "warp overflows before r = {next:.2}; lower r_max"
            )));
        }
        h_guess = out.h;
        t = next;
        r.push(t);
        psi.push(out.y[0]);
        dpsi.push(out.y[1]);
    }
    Ok(WarpTable {
        r,
        psi,
        dpsi,
        c_hat,
        gamma,
    })
}
