//! Reaction terms `f(u, t) = w(t) G(u)`.
//!
//! Type-I: `t^q g(s)` where `g` is the log-singular profile `s |ln s|^{-α}`
//! near zero, continued linearly and then by a quadratic so that `g` stays
//! convex and non-decreasing.  Type-II: `e^{μt} s (e^{β s^p} - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;

/// Largest admissible end of the singular regime.
pub const SPLICE_CAP: f64 = 0.135_335_283_236_612_7; // e^{-2}

/// Type-I profile `g` and time power `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeOneSpec {
    pub alpha: f64,
    pub q: f64,
    pub kappa_quad: f64,
    pub eps_splice: f64,
    /// Slope of the linear middle piece on `(eps_splice, 1/2]`.
    pub slope: f64,
    pub intercept: f64,
    /// `h(s) = kappa_quad s² + offset` for `s > 1/2`.
    pub offset: f64,
}

fn singular(alpha: f64, s: f64) -> f64 {
    s * (-s.ln()).powf(-alpha)
}

/// `d/ds [s |ln s|^{-α}] = |ln s|^{-α} (1 + α/|ln s|)` for `s < 1`.
fn singular_slope(alpha: f64, s: f64) -> f64 {
    slope_at_log(alpha, -s.ln())
}

fn slope_at_log(alpha: f64, l: f64) -> f64 {
    l.powf(-alpha) * (1.0 + alpha / l)
}

impl TypeOneSpec {
    /// Builds the spliced profile.  With `kappa_quad = None` the quadratic
    /// coefficient defaults to the singular slope at `e^{-2}`, which keeps
    /// the singular regime on all of `(0, e^{-2}]`.
    pub fn new(alpha: f64, q: f64, kappa_quad: Option<f64>) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} must be > 0")));
        }
        if !(q.is_finite() && q > 0.0) {
            return Err(Error::InvalidParameter(format!("q = {q} must be > 0")));
        }
        let kappa = kappa_quad.unwrap_or_else(|| singular_slope(alpha, SPLICE_CAP));
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa_quad = {kappa} must be > 0")));
        }
        // The linear piece continues the singular branch tangentially, and its
        // slope may not exceed h'(1/2) = kappa.  The singular slope increases
        // with s, so pick the largest admissible splice point.
        let eps = if singular_slope(alpha, SPLICE_CAP) <= kappa {
            SPLICE_CAP
        } else {
            // slope_at_log decreases in L = |ln s|
            let (mut lo, mut hi) = (2.0_f64, 4.0_f64);
            while slope_at_log(alpha, hi) > kappa {
                hi *= 2.0;
                if hi > 1e6 {
                    return Err(Error::InvalidParameter(format!(
                        "kappa_quad = {kappa} too small to splice alpha = {alpha}"
                    )));
                }
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if slope_at_log(alpha, mid) > kappa {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (-hi).exp()
        };
        let slope = singular_slope(alpha, eps);
        let intercept = singular(alpha, eps) - slope * eps;
        let offset = slope * 0.5 + intercept - 0.25 * kappa;
        if offset < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "kappa_quad = {kappa} too large for alpha = {alpha}: quadratic piece would fall below kappa s^2"
            )));
        }
        Ok(Self {
            alpha,
            q,
            kappa_quad: kappa,
            eps_splice: eps,
            slope,
            intercept,
            offset,
        })
    }

    /// The profile `g(s)`.
    pub fn g(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s <= self.eps_splice {
            singular(self.alpha, s)
        } else if s <= 0.5 {
            self.slope * s + self.intercept
        } else {
            self.kappa_quad * s * s + self.offset
        }
    }
}

/// `e^{μt} s (e^{β s^p} - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeTwoSpec {
    pub mu: f64,
    pub beta: f64,
    pub p: f64,
}

impl TypeTwoSpec {
    pub fn new(mu: f64, beta: f64, p: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("beta", beta), ("p", p)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be > 0")));
            }
        }
        Ok(Self { mu, beta, p })
    }

    /// Time-independent part `s (e^{β s^p} - 1)`, saturating to `+∞`.
    pub fn g(&self, s: f64) -> f64 {
        self.eval_log_shift(s, 0.0)
    }

    pub fn eval(&self, s: f64, t: f64) -> f64 {
        self.eval_log_shift(s, self.mu * t)
    }

    fn eval_log_shift(&self, s: f64, shift: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let x = self.beta * s.powf(self.p);
        if x > 500.0 {
            let log_f = shift + s.ln() + x;
            if log_f >= f64::MAX.ln() {
                f64::INFINITY
            } else {
                log_f.exp()
            }
        } else {
            let v = shift.exp() * s * x.exp_m1();
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        }
    }
}

/// Reaction term of the semilinear heat equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `f ≡ 0`: the linear heat equation.
    Zero,
    TypeOne(TypeOneSpec),
    TypeTwo(TypeTwoSpec),
}

impl Nonlinearity {
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::TypeOne(spec) => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powf(spec.q) * spec.g(s)
                }
            }
            Nonlinearity::TypeTwo(spec) => spec.eval(s, t),
        }
    }

    /// Time weight `w(t)` in `f = w(t) G(s)`.
    pub fn time_weight(&self, t: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::TypeOne(spec) => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powf(spec.q)
                }
            }
            Nonlinearity::TypeTwo(spec) => (spec.mu * t).exp(),
        }
    }

    /// Convex profile `G` in `f = w(t) G(s)`.
    pub fn profile(&self, s: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::TypeOne(spec) => spec.g(s),
            Nonlinearity::TypeTwo(spec) => spec.g(s),
        }
    }

    /// Exponent σ such that `sup^{-σ}` is asymptotically linear in time near
    /// blow-up; both families are at least quadratic at infinity.
    pub fn blowup_sigma(&self) -> f64 {
        1.0
    }
}

/// Critical power `1 + μ/λ₁`.
pub fn fujita_exponent(mu: f64, lambda1: f64) -> Result<f64> {
    if !(lambda1 > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda1 = {lambda1} must be > 0")));
    }
    Ok(1.0 + mu / lambda1)
}

/// `∫_{1/2}^∞ dτ / g(τ)` for the Type-I profile.
pub fn reciprocal_tail(spec: &TypeOneSpec) -> Result<f64> {
    reciprocal_tail_of(|s| spec.g(s))
}

/// `∫_{1/2}^∞ dτ / g(τ)` for an arbitrary positive profile, summed over
/// dyadic panels until the geometric tail estimate is negligible.
pub fn reciprocal_tail_of(g: impl Fn(f64) -> f64) -> Result<f64> {
    const MAX_PANELS: usize = 400;
    const STALL_RUN: usize = 24;
    let rule = quad::gauss_legendre(12);
    let mut total = 0.0;
    let mut prev = f64::NAN;
    let mut stalled = 0;
    let mut a = 0.5_f64;
    for _ in 0..MAX_PANELS {
        let b = 2.0 * a;
        let piece = quad::integrate(
            |s| {
                let v = g(s);
                if v > 0.0 {
                    1.0 / v
                } else {
                    f64::INFINITY
                }
            },
            a,
            b,
            &rule,
            4,
        );
        if !piece.is_finite() {
            return Err(Error::Divergence(format!("1/g not integrable near s = {a}")));
        }
        total += piece;
        let ratio = piece / prev;
        if ratio.is_finite() && ratio < 0.95 {
            stalled = 0;
            let tail = piece * ratio / (1.0 - ratio);
            if tail <= 1e-13 * total.max(1e-300) {
                return Ok(total + tail);
            }
        } else if prev.is_finite() {
            stalled += 1;
            if stalled >= STALL_RUN {
                return Err(Error::Divergence(format!(
                    "panel integrals stopped shrinking (last ratio {ratio:.4} at s = {b:.3e})"
                )));
            }
        }
        prev = piece;
        a = b;
    }
    Err(Error::Divergence(format!("no convergence after {MAX_PANELS} dyadic panels")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const E: f64 = std::f64::consts::E;

    #[test]
    fn g_examples() {
        let spec = TypeOneSpec::new(2.0, 1.0, None).unwrap();
        assert_eq!(spec.eps_splice, SPLICE_CAP);
        assert_relative_eq!(spec.g(E.powi(-2)), E.powi(-2) / 4.0, epsilon = 1e-16);
        assert_relative_eq!(spec.g(E.powi(-2)), 0.033_834, epsilon = 1e-6);
        assert_eq!(spec.g(0.0), 0.0);
        let spec5 = TypeOneSpec::new(5.0, 1.0, None).unwrap();
        assert_relative_eq!(spec5.g(E.powi(-4)), E.powi(-4) * 4f64.powi(-5), max_relative = 1e-14);
        assert_relative_eq!(spec5.g(E.powi(-4)), 1.789e-5, max_relative = 1e-3);
    }

    #[test]
    fn default_alpha_five_reproduces_figure_pieces() {
        // linear piece e^{-2}/32 + (7/64)(s - e^{-2}); quadratic (7/64)s² - (5/64)e^{-2} + 7/256
        let spec = TypeOneSpec::new(5.0, 1.0, None).unwrap();
        let e2 = E.powi(-2);
        assert_relative_eq!(spec.slope, 7.0 / 64.0, epsilon = 1e-15);
        assert_relative_eq!(spec.g(0.3), e2 / 32.0 + 7.0 / 64.0 * (0.3 - e2), epsilon = 1e-15);
        assert_relative_eq!(spec.offset, -5.0 / 64.0 * e2 + 7.0 / 256.0, epsilon = 1e-15);
    }

    #[test]
    fn steep_quadratic_floor_is_rejected_and_small_one_moves_splice() {
        assert!(TypeOneSpec::new(2.0, 1.0, Some(1.0)).is_err());
        let spec = TypeOneSpec::new(2.0, 1.0, Some(5.0 / 16.0)).unwrap();
        assert!(spec.eps_splice < SPLICE_CAP);
        assert_relative_eq!(spec.slope, 5.0 / 16.0, epsilon = 1e-12);
        assert!(TypeOneSpec::new(-1.0, 1.0, None).is_err());
        assert!(TypeOneSpec::new(1.0, 0.0, None).is_err());
    }

    fn specs() -> Vec<TypeOneSpec> {
        let mut v = Vec::new();
        for &alpha in &[0.3, 0.5, 1.0, 1.5, 2.0, 5.0, 9.0] {
            v.push(TypeOneSpec::new(alpha, 1.0, None).unwrap());
        }
        v.push(TypeOneSpec::new(1.0, 1.0, Some(1.0)).unwrap());
        v.push(TypeOneSpec::new(2.0, 1.0, Some(0.2)).unwrap());
        v
    }

    #[test]
    fn splice_points_are_continuous() {
        for spec in specs() {
            for x in [spec.eps_splice, 0.5] {
                let left = spec.g(x);
                let right = spec.g(x * (1.0 + 1e-15) + 1e-300);
                assert!((left - right).abs() < 1e-14, "alpha={} at {x}", spec.alpha);
            }
            // explicit piece formulas agree at the joints
            let e = spec.eps_splice;
            assert!((singular(spec.alpha, e) - (spec.slope * e + spec.intercept)).abs() < 1e-14);
            assert!((spec.slope * 0.5 + spec.intercept - (spec.kappa_quad * 0.25 + spec.offset)).abs() < 1e-14);
        }
    }

    #[test]
    fn g_is_monotone_on_fine_grid() {
        for spec in specs() {
            let mut prev = spec.g(0.0);
            for i in 1..=100_000 {
                let v = spec.g(i as f64 * 1e-4);
                assert!(v >= prev, "alpha={}", spec.alpha);
                prev = v;
            }
        }
    }

    #[test]
    fn g_dominates_quadratic_floor() {
        for spec in specs() {
            for i in 0..100 {
                let s = 0.5 + 0.1 * i as f64 + 1e-9;
                assert!(spec.g(s) >= spec.kappa_quad * s * s);
            }
        }
    }

    #[test]
    fn type_two_examples() {
        let spec = TypeTwoSpec::new(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(spec.eval(1.0, 0.0), E - 1.0, epsilon = 1e-15);
        let nl = Nonlinearity::TypeOne(TypeOneSpec::new(1.0, 2.0, None).unwrap());
        for s in [0.0, 0.1, 3.0, 100.0] {
            assert_eq!(nl.eval(s, 0.0), 0.0);
        }
        let spec = TypeTwoSpec::new(0.3, 1.7, 2.0).unwrap();
        for &s in &[1e-2, 1e-3, 1e-4] {
            let ratio = spec.eval(s, 0.0) / s.powf(3.0);
            assert!((ratio - 1.7).abs() < 1.7 * 2.0 * s * s, "s={s} ratio={ratio}");
        }
    }

    #[test]
    fn type_two_saturates_instead_of_nan() {
        let spec = TypeTwoSpec::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(spec.eval(800.0, 0.0), f64::INFINITY);
        assert_eq!(spec.eval(f64::INFINITY, 1.0), f64::INFINITY);
        assert_eq!(spec.eval(1e300, 1e3), f64::INFINITY);
        let big = spec.eval(501.0, 0.0);
        assert!(big.is_finite());
        assert_relative_eq!(big.ln(), 501.0_f64.ln() + 501.0, epsilon = 1e-9);
        let mut prev = 0.0;
        for i in 0..2000 {
            let v = spec.eval(i as f64, 2.0);
            assert!(!v.is_nan() && v >= prev);
            prev = v;
        }
    }

    #[test]
    fn fujita_exponent_examples() {
        assert_eq!(fujita_exponent(0.25, 0.25).unwrap(), 2.0);
        assert_eq!(fujita_exponent(0.0, 3.0).unwrap(), 1.0);
        assert_eq!(fujita_exponent(2.25, 2.25).unwrap(), 2.0);
        assert!(fujita_exponent(1.0, 0.0).is_err());
    }

    #[test]
    fn reciprocal_tail_examples() {
        assert_relative_eq!(reciprocal_tail_of(|s| s * s).unwrap(), 2.0, epsilon = 1e-10);
        let spec = TypeOneSpec::new(1.0, 1.0, Some(1.0)).unwrap();
        let v = reciprocal_tail(&spec).unwrap();
        assert!(v <= 2.0 + 1e-6, "{v}");
        // closed form for κ s² + c with c > 0
        let (k, c) = (spec.kappa_quad, spec.offset);
        let exact = (std::f64::consts::FRAC_PI_2 - (0.5 * (k / c).sqrt()).atan()) / (k * c).sqrt();
        assert_relative_eq!(v, exact, epsilon = 1e-10);
        assert!(matches!(reciprocal_tail_of(|s| s), Err(Error::Divergence(_))));
        assert!(reciprocal_tail_of(|s: f64| s.powf(1.5)).is_ok());
    }
}
