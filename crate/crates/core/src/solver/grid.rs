//! Graded radial grids and the finite-volume radial Laplacian.
//!
//! Node `i` owns the cell `[b_i, b_{i+1}]` bounded by the midpoints between
//! neighbouring nodes (`b_0 = 0`).  The operator is
//! `(L u)_i = (T_{i+1/2}(u_{i+1} - u_i) - T_{i-1/2}(u_i - u_{i-1})) / V_i`
//! with exact cell volumes `V_i = ω ∫ ψ^{n-1}` and face transmissibilities
//! `T = ω ψ(b)^{n-1} / (r_{i+1} - r_i)`.  This is the radial part of the
//! Laplace-Beltrami operator in divergence form; the last node carries the
//! homogeneous Dirichlet condition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ManifoldModel;
use crate::quad;

/// Largest admissible node spacing.
pub const MAX_SPACING: f64 = 0.2;
/// Smallest admissible node count.
pub const MIN_POINTS: usize = 200;

const GROWTH: f64 = 1.05;
const POLE_REFINEMENT: f64 = 16.0;

/// Strictly increasing radial nodes from `0` to `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

fn pole_steps() -> usize {
    (POLE_REFINEMENT.ln() / GROWTH.ln()).ceil() as usize
}

/// Length covered by the geometric prefix for bulk spacing `hu`.
fn prefix_length(hu: f64) -> f64 {
    let k = pole_steps() as i32;
    hu / POLE_REFINEMENT * (GROWTH.powi(k) - 1.0) / (GROWTH - 1.0)
}

fn push_prefix(nodes: &mut Vec<f64>, hu: f64) {
    let mut h = hu / POLE_REFINEMENT;
    let mut r = 0.0;
    nodes.push(0.0);
    for _ in 0..pole_steps() {
        r += h;
        nodes.push(r);
        h *= GROWTH;
    }
}

impl RadialGrid {
    /// `n_points` nodes on `[0, radius]`: geometric spacing (ratio 1.05) near
    /// the pole, growing to a uniform bulk spacing.
    pub fn graded(radius: f64, n_points: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!("grid radius {radius}")));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "{n_points} grid points; at least {MIN_POINTS} required"
            )));
        }
        let k = pole_steps();
        let uniform = (n_points - 1 - k) as f64;
        let hu = radius / (uniform + prefix_length(1.0));
        check_spacing(hu)?;
        let mut nodes = Vec::with_capacity(n_points);
        push_prefix(&mut nodes, hu);
        let start = *nodes.last().unwrap();
        for j in 1..=(n_points - 1 - k) {
            nodes.push(start + j as f64 * hu);
        }
        *nodes.last_mut().unwrap() = radius;
        Ok(Self { nodes })
    }

    /// Grid with bulk spacing `spacing` ending at `radius`.  Grids with the
    /// same spacing share every node except the outermost one, which makes
    /// them suitable for exhaustion studies.
    pub fn with_spacing(radius: f64, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("grid spacing {spacing}")));
        }
        check_spacing(spacing)?;
        if !(radius.is_finite() && radius > prefix_length(spacing) + spacing) {
            return Err(Error::InvalidParameter(format!(
                "radius {radius} too small for spacing {spacing}"
            )));
        }
        let mut nodes = Vec::new();
        push_prefix(&mut nodes, spacing);
        let mut r = *nodes.last().unwrap();
        while r + 1.5 * spacing <= radius {
            r += spacing;
            nodes.push(r);
        }
        nodes.push(radius);
        if nodes.len() < MIN_POINTS {
            return Err(Error::InvalidParameter(format!(
                "{} grid points; at least {MIN_POINTS} required",
                nodes.len()
            )));
        }
        Ok(Self { nodes })
    }

    /// Wraps explicit nodes after validating them.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 || nodes[0] != 0.0 {
            return Err(Error::InvalidParameter("grid must start at 0 with at least 3 nodes".into()));
        }
        let mut widest: f64 = 0.0;
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidParameter("grid nodes must increase strictly".into()));
            }
            widest = widest.max(w[1] - w[0]);
        }
        check_spacing(widest)?;
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

fn check_spacing(h: f64) -> Result<()> {
    if h > MAX_SPACING {
        Err(Error::Resolution {
            spacing: h,
            limit: MAX_SPACING,
        })
    } else {
        Ok(())
    }
}

/// Finite-volume radial Laplacian on a grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    grid: RadialGrid,
    dim: usize,
    volumes: Vec<f64>,
    trans: Vec<f64>,
}

impl Discretization {
    pub fn new(model: &ManifoldModel, grid: RadialGrid) -> Result<Self> {
        let r_max = model.r_max();
        if grid.radius() > r_max + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "grid radius {} exceeds the model domain {r_max}",
                grid.radius()
            )));
        }
        let nodes = grid.nodes();
        let n = nodes.len();
        let omega = model.sphere_measure();
        let rule = quad::gauss_legendre(8);
        let mut faces = Vec::with_capacity(n);
        faces.push(0.0);
        for w in nodes.windows(2) {
            faces.push(0.5 * (w[0] + w[1]));
        }
        let mut volumes = Vec::with_capacity(n);
        for i in 0..n {
            let hi = if i + 1 < n { faces[i + 1] } else { nodes[i] };
            let lo = faces[i].min(hi);
            volumes.push(omega * quad::integrate(|r| model.volume_weight(r), lo, hi, &rule, 1));
        }
        let trans = (0..n - 1)
            .map(|i| omega * model.volume_weight(faces[i + 1]) / (nodes[i + 1] - nodes[i]))
            .collect();
        Ok(Self {
            grid,
            dim: model.dim(),
            volumes,
            trans,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.volumes.is_empty()
    }

    /// Number of unknowns (every node but the Dirichlet one).
    pub fn interior(&self) -> usize {
        self.len() - 1
    }

    /// Riemannian volume of each node's cell.  The Dirichlet node's cell is
    /// the half cell inside the domain.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Face transmissibilities `T_{i+1/2}`.
    pub fn transmissibilities(&self) -> &[f64] {
        &self.trans
    }

    /// `∫ u dv` by the cell-volume rule.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.volumes).map(|(a, v)| a * v).sum()
    }

    /// Applies the operator to a full nodal vector; the Dirichlet row is zero.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let m = self.interior();
        let mut out = vec![0.0; self.len()];
        for i in 0..m {
            let right = self.trans[i] * (u[i + 1] - u[i]);
            let left = if i > 0 { self.trans[i - 1] * (u[i] - u[i - 1]) } else { 0.0 };
            out[i] = (right - left) / self.volumes[i];
        }
        out
    }

    /// Solves `(I - dt L) u = rhs` on the interior nodes (Dirichlet value
    /// zero), writing into `out`.  The matrix is a tridiagonal M-matrix, so
    /// the Thomas sweep is stable and preserves non-negativity.
    pub fn implicit_solve(&self, dt: f64, rhs: &[f64], out: &mut [f64]) {
        let m = self.interior();
        let t = &self.trans;
        let v = &self.volumes;
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        for i in 0..m {
            let tl = if i > 0 { t[i - 1] } else { 0.0 };
            let diag = v[i] + dt * (tl + t[i]);
            let lower = -dt * tl;
            let upper = if i + 1 < m { -dt * t[i] } else { 0.0 };
            let b = v[i] * rhs[i];
            if i == 0 {
                c[i] = upper / diag;
                d[i] = b / diag;
            } else {
                let denom = diag - lower * c[i - 1];
                c[i] = upper / denom;
                d[i] = (b - lower * d[i - 1]) / denom;
            }
        }
        out[m] = 0.0;
        out[m - 1] = d[m - 1];
        for i in (0..m - 1).rev() {
            out[i] = d[i] - c[i] * out[i + 1];
        }
    }

    /// Symmetrized operator `V^{-1/2} F V^{-1/2}` on the interior nodes as
    /// (diagonal, off-diagonal).
    pub fn symmetric_tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let m = self.interior();
        let t = &self.trans;
        let v = &self.volumes;
        let diag = (0..m)
            .map(|i| {
                let tl = if i > 0 { t[i - 1] } else { 0.0 };
                -(tl + t[i]) / v[i]
            })
            .collect();
        let off = (0..m - 1).map(|i| t[i] / (v[i] * v[i + 1]).sqrt()).collect();
        (diag, off)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpSpec;
    use approx::assert_relative_eq;

    #[test]
    fn graded_grid_shape() {
        let g = RadialGrid::graded(20.0, 800).unwrap();
        assert_eq!(g.len(), 800);
        assert_eq!(g.nodes()[0], 0.0);
        assert_eq!(g.radius(), 20.0);
        let n = g.nodes();
        for w in n.windows(3) {
            let (a, b) = (w[1] - w[0], w[2] - w[1]);
            assert!(b > 0.0 && b <= a * GROWTH * (1.0 + 1e-9) + 1e-12);
        }
        assert!(n[1] < 0.1 * (n[799] - n[798]));
    }

    #[test]
    fn coarse_grid_is_a_resolution_error() {
        assert!(matches!(RadialGrid::graded(100.0, 300), Err(Error::Resolution { .. })));
        assert!(RadialGrid::graded(10.0, 50).is_err());
    }

    #[test]
    fn spacing_grids_are_nested() {
        let a = RadialGrid::with_spacing(10.0, 0.04).unwrap();
        let b = RadialGrid::with_spacing(15.0, 0.04).unwrap();
        let common = a.len() - 1;
        assert_eq!(&a.nodes()[..common], &b.nodes()[..common]);
    }

    #[test]
    fn constant_is_harmonic_and_r_squared_gives_2n() {
        for dim in [2usize, 3, 5] {
            let m = ManifoldModel::euclidean(dim);
            let d = Discretization::new(&m, RadialGrid::graded(5.0, 300).unwrap()).unwrap();
            let ones = vec![1.0; d.len()];
            let lu = d.apply(&ones);
            for v in &lu[..d.interior() - 1] {
                assert!(v.abs() < 1e-9);
            }
            let sq: Vec<f64> = d.nodes().iter().map(|r| r * r).collect();
            let lu = d.apply(&sq);
            for v in &lu[..d.interior() - 1] {
                assert_relative_eq!(*v, 2.0 * dim as f64, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn volumes_sum_to_ball_volume() {
        let m = ManifoldModel::hyperbolic(3);
        let d = Discretization::new(&m, RadialGrid::graded(3.0, 400).unwrap()).unwrap();
        let total: f64 = d.volumes().iter().sum();
        // vol B(R) in H³ = π (sinh 2R - 2R)
        let exact = std::f64::consts::PI * ((6.0f64).sinh() - 6.0);
        assert_relative_eq!(total, exact, max_relative = 1e-12);
    }

    #[test]
    fn hyperbolic_eigenfunction_is_reproduced_to_second_order() {
        // r / sinh r is an eigenfunction with eigenvalue -1 on H³
        let m = ManifoldModel::hyperbolic(3);
        let err = |n: usize| {
            let d = Discretization::new(&m, RadialGrid::graded(10.0, n).unwrap()).unwrap();
            let phi: Vec<f64> = d.nodes().iter().map(|&r| if r == 0.0 { 1.0 } else { r / r.sinh() }).collect();
            let lu = d.apply(&phi);
            (0..d.interior() - 1).map(|i| (lu[i] + phi[i]).abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (err(400), err(799));
        assert!(coarse < 1e-3, "{coarse}");
        assert!(coarse / fine > 3.0, "{coarse} {fine}");
    }

    #[test]
    fn implicit_solve_inverts_operator() {
        let m = ManifoldModel::new(4, WarpSpec::ScaledHyperbolic { kappa: 0.5 }).unwrap();
        let d = Discretization::new(&m, RadialGrid::graded(8.0, 250).unwrap()).unwrap();
        let mut u: Vec<f64> = d.nodes().iter().map(|r| (-r * r).exp()).collect();
        *u.last_mut().unwrap() = 0.0;
        let lu = d.apply(&u);
        let dt = 0.3;
        let rhs: Vec<f64> = u.iter().zip(&lu).map(|(a, b)| a - dt * b).collect();
        let mut out = vec![0.0; d.len()];
        d.implicit_solve(dt, &rhs, &mut out);
        for (a, b) in out.iter().zip(&u) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
