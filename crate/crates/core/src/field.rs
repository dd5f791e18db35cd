use serde::{Deserialize, Serialize};

/// A radial function sampled on strictly increasing nodes starting at `r = 0`.
///
/// Between nodes the field is piecewise linear; outside `[0, R]` it is zero
/// beyond the last node and equal to the first value below the first node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialField {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
}

impl RadialField {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(nodes.len(), values.len(), "nodes/values length mismatch");
        Self { nodes, values }
    }

    pub fn zeros(nodes: &[f64]) -> Self {
        Self::new(nodes.to_vec(), vec![0.0; nodes.len()])
    }

    pub fn from_fn(nodes: &[f64], f: impl Fn(f64) -> f64) -> Self {
        Self::new(nodes.to_vec(), nodes.iter().map(|&r| f(r)).collect())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Piecewise-linear interpolation.
    pub fn eval(&self, r: f64) -> f64 {
        let n = self.nodes.len();
        if n == 0 || r > self.nodes[n - 1] {
            return 0.0;
        }
        if r <= self.nodes[0] {
            return self.values[0];
        }
        let i = locate(&self.nodes, r);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let w = (r - x0) / (x1 - x0);
        self.values[i] * (1.0 - w) + self.values[i + 1] * w
    }

    /// Resamples onto other nodes by linear interpolation.
    pub fn resample(&self, nodes: &[f64]) -> RadialField {
        RadialField::from_fn(nodes, |r| self.eval(r))
    }

    pub fn scaled(&self, factor: f64) -> RadialField {
        RadialField::new(
            self.nodes.clone(),
            self.values.iter().map(|v| v * factor).collect(),
        )
    }
}

/// Index `i` with `nodes[i] <= x < nodes[i + 1]`, clamped to a valid interval.
pub(crate) fn locate(nodes: &[f64], x: f64) -> usize {
    let n = nodes.len();
    debug_assert!(n >= 2);
    match nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    }
}

/// Value, first and second derivative at one end of a quintic Hermite cell.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Jet {
    pub f: f64,
    pub d: f64,
    pub s: f64,
}

/// Quintic Hermite interpolation through two jets; returns `(f, f', f'')` at `x`.
pub(crate) fn quintic_hermite(x0: f64, x1: f64, a: Jet, b: Jet, x: f64) -> (f64, f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);

    let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
    let d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
    let d2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
    let d3 = -d0;
    let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
    let d5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);

    let s0 = -60.0 * t + 180.0 * t2 - 120.0 * t3;
    let s1 = -36.0 * t + 96.0 * t2 - 60.0 * t3;
    let s2 = 0.5 * (2.0 - 18.0 * t + 36.0 * t2 - 20.0 * t3);
    let s3 = -s0;
    let s4 = -24.0 * t + 84.0 * t2 - 60.0 * t3;
    let s5 = 0.5 * (6.0 * t - 24.0 * t2 + 20.0 * t3);

    let f = a.f * h0 + h * a.d * h1 + h * h * a.s * h2 + b.f * h3 + h * b.d * h4 + h * h * b.s * h5;
    let df = (a.f * d0 + h * a.d * d1 + h * h * a.s * d2 + b.f * d3 + h * b.d * d4
        + h * h * b.s * d5)
        / h;
    let sf = (a.f * s0 + h * a.d * s1 + h * h * a.s * s2 + b.f * s3 + h * b.d * s4
        + h * h * b.s * s5)
        / (h * h);
    (f, df, sf)
}
