//! Heat kernels: the explicit comparison profile `h_n`, the numerical
//! kernel of the discretized Laplacian, bound calibration and the
//! large-time logarithmic rate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{locate, RadialField};
use crate::geometry::ManifoldModel;
use crate::quad;
use crate::solver::grid::{Discretization, RadialGrid};

/// Ratio dispersion above which a calibration is rejected.
pub const MAX_DISPERSION: f64 = 1e3;

/// `ln h_n(r, t)`.
pub fn log_h_n(n: usize, r: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain { what: "h_n time", value: t });
    }
    if !(r >= 0.0) {
        return Err(Error::Domain { what: "h_n distance", value: r });
    }
    let nf = n as f64;
    let nm1 = nf - 1.0;
    Ok(-0.5 * nf * (4.0 * PI * t).ln() - nm1 * nm1 * t / 4.0 - nm1 * r / 2.0 - r * r / (4.0 * t)
        + 0.5 * (nf - 3.0) * (1.0 + r + t).ln()
        + (1.0 + r).ln())
}

/// `h_n(r,t) = (4πt)^{-n/2} e^{-(n-1)²t/4 - (n-1)r/2 - r²/4t} (1+r+t)^{(n-3)/2} (1+r)`.
pub fn h_n(n: usize, r: f64, t: f64) -> Result<f64> {
    Ok(log_h_n(n, r, t)?.exp())
}

/// Heat kernel of the discrete Dirichlet Laplacian, from a full
/// eigendecomposition of its symmetrized form.  Exact in time.
#[derive(Debug, Clone)]
pub struct NumericalKernel {
    disc: Discretization,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
    sqrt_volumes: Vec<f64>,
}

impl NumericalKernel {
    pub fn new(model: &ManifoldModel, grid: RadialGrid) -> Result<Self> {
        Self::from_discretization(Discretization::new(model, grid)?)
    }

    pub fn from_discretization(disc: Discretization) -> Result<Self> {
        let m = disc.interior();
        let (diag, off) = disc.symmetric_tridiagonal();
        let mut a = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            a[(i, i)] = diag[i];
            if i + 1 < m {
                a[(i, i + 1)] = off[i];
                a[(i + 1, i)] = off[i];
            }
        }
        let eig = SymmetricEigen::new(a);
        let sqrt_volumes = disc.volumes()[..m].iter().map(|v| v.sqrt()).collect();
        Ok(Self {
            disc,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
            sqrt_volumes,
        })
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn nodes(&self) -> &[f64] {
        self.disc.nodes()
    }

    /// Largest discrete eigenvalue of `Δ`, i.e. minus the discrete bottom of
    /// the Dirichlet spectrum.
    pub fn top_eigenvalue(&self) -> f64 {
        self.eigenvalues.max()
    }

    /// `K(r_i, r_j, t)`; zero when either index is the Dirichlet node.
    pub fn density(&self, i: usize, j: usize, t: f64) -> f64 {
        let m = self.disc.interior();
        if i >= m || j >= m {
            return 0.0;
        }
        let q = &self.eigenvectors;
        let mut s = 0.0;
        for k in 0..m {
            s += (t * self.eigenvalues[k]).exp() * q[(i, k)] * q[(j, k)];
        }
        s / (self.sqrt_volumes[i] * self.sqrt_volumes[j])
    }

    /// `K(x_i, ·, t)` on every node.
    pub fn row(&self, i: usize, t: f64) -> Vec<f64> {
        let m = self.disc.interior();
        let q = &self.eigenvectors;
        let weights: Vec<f64> = (0..m).map(|k| (t * self.eigenvalues[k]).exp() * q[(i, k)]).collect();
        let mut out = vec![0.0; m + 1];
        for (j, o) in out.iter_mut().enumerate().take(m) {
            let mut s = 0.0;
            for (k, w) in weights.iter().enumerate() {
                s += w * q[(j, k)];
            }
            *o = s / (self.sqrt_volumes[i] * self.sqrt_volumes[j]);
        }
        out
    }

    /// `∫ K(x_i, y, t) dv(y)`.
    pub fn mass(&self, i: usize, t: f64) -> f64 {
        self.disc.integrate(&self.row(i, t))
    }

    /// `u(t) = e^{tL} u0` for nodal data on this kernel's grid.
    pub fn apply(&self, u0: &[f64], t: f64) -> Vec<f64> {
        let m = self.disc.interior();
        let y = DVector::from_iterator(m, (0..m).map(|i| u0[i] * self.sqrt_volumes[i]));
        let mut c = self.eigenvectors.tr_mul(&y);
        for k in 0..m {
            c[k] *= (t * self.eigenvalues[k]).exp();
        }
        let z = &self.eigenvectors * c;
        let mut out = vec![0.0; m + 1];
        for i in 0..m {
            out[i] = z[i] / self.sqrt_volumes[i];
        }
        out
    }

    /// Kernel from the pole, `K(0, r, t)`, by log-linear interpolation
    /// between nodes.
    pub fn origin_density(&self, r: f64, t: f64) -> f64 {
        interpolate_log(self.nodes(), &self.row(0, t), r)
    }
}

fn interpolate_log(nodes: &[f64], values: &[f64], r: f64) -> f64 {
    if r <= 0.0 {
        return values[0];
    }
    if r >= nodes[nodes.len() - 1] {
        return 0.0;
    }
    let i = locate(nodes, r);
    let w = (r - nodes[i]) / (nodes[i + 1] - nodes[i]);
    let (a, b) = (values[i], values[i + 1]);
    if a > 0.0 && b > 0.0 {
        (a.ln() * (1.0 - w) + b.ln() * w).exp()
    } else {
        a * (1.0 - w) + b * w
    }
}

/// Pole kernel extrapolated from two resolutions (`n` and `2n - 1` nodes).
#[derive(Debug, Clone)]
pub struct RichardsonKernel {
    coarse: NumericalKernel,
    fine: NumericalKernel,
}

impl RichardsonKernel {
    pub fn new(model: &ManifoldModel, radius: f64, n_points: usize) -> Result<Self> {
        let coarse = NumericalKernel::new(model, RadialGrid::graded(radius, n_points)?)?;
        let fine = NumericalKernel::new(model, RadialGrid::graded(radius, 2 * n_points - 1)?)?;
        Ok(Self { coarse, fine })
    }

    pub fn fine(&self) -> &NumericalKernel {
        &self.fine
    }

    pub fn coarse(&self) -> &NumericalKernel {
        &self.coarse
    }

    /// `K(0, r_j, t)` at every sample radius.
    pub fn origin_profile(&self, radii: &[f64], t: f64) -> Vec<f64> {
        let rc = self.coarse.row(0, t);
        let rf = self.fine.row(0, t);
        radii
            .iter()
            .map(|&r| {
                let c = interpolate_log(self.coarse.nodes(), &rc, r);
                let f = interpolate_log(self.fine.nodes(), &rf, r);
                let x = (4.0 * f - c) / 3.0;
                if x > 0.0 {
                    x
                } else {
                    f
                }
            })
            .collect()
    }
}

/// Kernel from the pole sampled at arbitrary radii.
pub trait PoleKernel: Sync {
    fn origin_profile(&self, radii: &[f64], t: f64) -> Vec<f64>;
}

impl PoleKernel for RichardsonKernel {
    fn origin_profile(&self, radii: &[f64], t: f64) -> Vec<f64> {
        RichardsonKernel::origin_profile(self, radii, t)
    }
}

/// Pole kernel obtained by backward-Euler marching of `δ_0 / V_0`,
/// extrapolated in time (`M` and `2M` steps) and space (`n` and `2n - 1`
/// nodes) in log space.
///
/// Every step is a Thomas sweep on an M-matrix, which adds non-negative
/// terms only, so each value carries a small relative error.  This keeps the
/// far tail meaningful where the eigendecomposition kernel, accurate only
/// up to an absolute error, is swamped by round-off.
#[derive(Debug, Clone)]
pub struct MarchedKernel {
    coarse: Discretization,
    fine: Discretization,
    steps: usize,
}

impl MarchedKernel {
    pub fn new(model: &ManifoldModel, radius: f64, n_points: usize, steps: usize) -> Result<Self> {
        if steps < 1 {
            return Err(Error::InvalidParameter("at least one time step is required".into()));
        }
        let coarse = Discretization::new(model, RadialGrid::graded(radius, n_points)?)?;
        let fine = Discretization::new(model, RadialGrid::graded(radius, 2 * n_points - 1)?)?;
        Ok(Self { coarse, fine, steps })
    }

    fn march(disc: &Discretization, t: f64, steps: usize) -> Vec<f64> {
        let mut u = vec![0.0; disc.len()];
        u[0] = 1.0 / disc.volumes()[0];
        let mut next = vec![0.0; disc.len()];
        let dt = t / steps as f64;
        for _ in 0..steps {
            disc.implicit_solve(dt, &u, &mut next);
            std::mem::swap(&mut u, &mut next);
        }
        u
    }

    /// `ln K(0, r_j, t)` on one grid, extrapolated in time.
    fn log_profile(&self, disc: &Discretization, radii: &[f64], t: f64) -> Vec<f64> {
        let one = Self::march(disc, t, self.steps);
        let two = Self::march(disc, t, 2 * self.steps);
        radii
            .iter()
            .map(|&r| {
                let a = interpolate_log(disc.nodes(), &one, r).ln();
                let b = interpolate_log(disc.nodes(), &two, r).ln();
                2.0 * b - a
            })
            .collect()
    }
}

impl PoleKernel for MarchedKernel {
    fn origin_profile(&self, radii: &[f64], t: f64) -> Vec<f64> {
        let c = self.log_profile(&self.coarse, radii, t);
        let f = self.log_profile(&self.fine, radii, t);
        c.iter().zip(&f).map(|(c, f)| ((4.0 * f - c) / 3.0).exp()).collect()
    }
}

/// Empirical two-sided constants `A ≤ K / h_n ≤ B`.
#[derive(Debug, Clone, Serialize)]
pub struct BoundCalibration {
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub r_range: (f64, f64),
    pub t_range: (f64, f64),
    pub samples: usize,
}

impl BoundCalibration {
    pub fn dispersion(&self) -> f64 {
        self.b / self.a
    }
}

/// Ratio of the Richardson-extrapolated numerical kernel to `h_n` over the
/// sample rectangle.
pub fn calibrate_bounds(kernel: &impl PoleKernel, dim: usize, radii: &[f64], times: &[f64]) -> Result<BoundCalibration> {
    if radii.is_empty() || times.is_empty() {
        return Err(Error::InvalidParameter("empty calibration grid".into()));
    }
    let profiles: Vec<Vec<f64>> = times.par_iter().map(|&t| kernel.origin_profile(radii, t)).collect();
    let (mut a, mut b) = (f64::INFINITY, 0.0_f64);
    for (&t, k) in times.iter().zip(&profiles) {
        for (&r, &kv) in radii.iter().zip(k) {
            let ratio = (kv.ln() - log_h_n(dim, r, t)?).exp();
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(Error::CalibrationFailure { dispersion: f64::INFINITY });
            }
            a = a.min(ratio);
            b = b.max(ratio);
        }
    }
    if b / a > MAX_DISPERSION {
        return Err(Error::CalibrationFailure { dispersion: b / a });
    }
    let span = |v: &[f64]| {
        (
            v.iter().copied().fold(f64::INFINITY, f64::min),
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    Ok(BoundCalibration {
        dim,
        a,
        b,
        r_range: span(radii),
        t_range: span(times),
        samples: radii.len() * times.len(),
    })
}

/// Which kernel `semigroup_apply` integrates against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    /// The discrete Dirichlet heat semigroup on the data's own nodes.
    Numerical,
    /// Quadrature against `h_n` (hyperbolic space only).
    HnProxy,
}

/// Applies the heat semigroup to radial data.
pub fn semigroup_apply(model: &ManifoldModel, u0: &RadialField, t: f64, kernel: KernelChoice) -> Result<RadialField> {
    if t == 0.0 {
        return Ok(u0.clone());
    }
    if !(t > 0.0) {
        return Err(Error::Domain { what: "semigroup time", value: t });
    }
    if u0.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Precondition("initial data must be finite and non-negative".into()));
    }
    match kernel {
        KernelChoice::Numerical => {
            let k = NumericalKernel::new(model, RadialGrid::from_nodes(u0.nodes.clone())?)?;
            let mut out = k.apply(&u0.values, t);
            for v in &mut out {
                *v = v.max(0.0);
            }
            Ok(RadialField::new(u0.nodes.clone(), out))
        }
        KernelChoice::HnProxy => proxy_apply(model, u0, t),
    }
}

/// `∫ h_n(d(x, y), t) u0(y) dv(y)` with the hyperbolic law of cosines for the
/// distance and Gauss-Legendre quadrature in the polar angle.
fn proxy_apply(model: &ManifoldModel, u0: &RadialField, t: f64) -> Result<RadialField> {
    if !model.is_hyperbolic() {
        return Err(Error::Precondition("the h_n proxy is defined on hyperbolic space only".into()));
    }
    let n = model.dim();
    let nodes = &u0.nodes;
    let disc = Discretization::new(model, RadialGrid::from_nodes(nodes.clone())?)?;
    let vols = disc.volumes();
    let (gx, gw) = quad::gauss_legendre(48);
    // angular weights ∝ sin^{n-2}θ on [0, π], normalized to a probability
    let mut angles = Vec::with_capacity(gx.len());
    let mut total = 0.0;
    for (x, w) in gx.iter().zip(&gw) {
        let theta = 0.5 * PI * (x + 1.0);
        let weight = w * theta.sin().powi(n as i32 - 2);
        angles.push((theta.cos(), weight));
        total += weight;
    }
    for a in &mut angles {
        a.1 /= total;
    }
    let mut out = vec![0.0; nodes.len()];
    for (i, &r) in nodes.iter().enumerate() {
        let (cr, sr) = (r.cosh(), r.sinh());
        let mut acc = 0.0;
        for (j, &s) in nodes.iter().enumerate() {
            if u0.values[j] == 0.0 {
                continue;
            }
            let (cs, ss) = (s.cosh(), s.sinh());
            let mut avg = 0.0;
            for &(c, w) in &angles {
                let d = (cr * cs - sr * ss * c).max(1.0).acosh();
                avg += w * h_n(n, d, t)?;
            }
            acc += avg * u0.values[j] * vols[j];
        }
        out[i] = acc;
    }
    Ok(RadialField::new(nodes.clone(), out))
}

/// Large-time exponential rate of kernel samples `K(x, x, t_i)`.
///
/// Fits `ln K = a + b t + c ln t` by least squares over the larger half of
/// the times and returns `b`.  The `ln t` term absorbs the polynomial
/// prefactor of the kernel, which otherwise biases a plain slope.
pub fn log_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::Data("times and values differ in length".into()));
    }
    if times.len() < 3 {
        return Err(Error::Data(format!("{} samples; at least 3 required", times.len())));
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Data("kernel samples must be positive".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || !(times[0] > 0.0) {
        return Err(Error::Data("sample times must be positive and increasing".into()));
    }
    if *times.last().unwrap() < 20.0 {
        return Err(Error::Precondition("largest sample time must be at least 20".into()));
    }
    let keep = (times.len() / 2).max(3).min(times.len());
    let start = times.len() - keep;
    let rows: Vec<[f64; 3]> = times[start..].iter().map(|&t| [1.0, t, t.ln()]).collect();
    let rhs: Vec<f64> = values[start..].iter().map(|v| v.ln()).collect();
    let x = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    let y = DVector::from_vec(rhs);
    let svd = x.svd(true, true);
    let coef = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::Data(format!("rate regression failed: {e}")))?;
    Ok(coef[1])
}

/// Sup-relative mismatch on `r ≤ r_check` between `K(0,·,s+t)` and the
/// discrete semigroup applied for time `t` to the extrapolated `K(0,·,s)`.
pub fn composition_error(kernel: &RichardsonKernel, s: f64, t: f64, r_check: f64) -> f64 {
    let fine = kernel.fine();
    let nodes = fine.nodes();
    let first = kernel.origin_profile(nodes, s);
    let composed = fine.apply(&first, t);
    let direct = kernel.origin_profile(nodes, s + t);
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (i, &r) in nodes.iter().enumerate() {
        if r > r_check {
            break;
        }
        num = num.max((composed[i] - direct[i]).abs());
        den = den.max(direct[i].abs());
    }
    num / den
}
