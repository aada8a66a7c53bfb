//! Adaptive quadrature for the radial, polar and ambient integrals.
//!
//! One-dimensional integrals are evaluated by globally adaptive bisection
//! with Gauss-Kronrod panels. Endpoint behaviour that bisection alone handles
//! poorly is declared on the [`Integrand1D`] and removed by a change of
//! variables on the affected segment:
//!
//! * a power weight `(x - a)^e` at the left end: `x = a + h s^{1/(1+e)}`,
//! * a logarithmic weight `(log(b/x))^k` at the right end: `t = log(b/x)`,
//!   followed by the power substitution in `t`,
//! * infinite ends: `x = c + s u/(1-u)` for algebraic decay or
//!   `x = c - s log(1-u)` for exponential decay,
//! * wide positive segments (ratio above 16) are integrated in `log x`.

mod adaptive;
mod ambient;
mod polar;
mod rule;

use serde::{Deserialize, Serialize};

pub use adaptive::integrate_radial;
pub use ambient::{integrate_ambient, AmbientDomain};
pub use polar::{angular_integral, integrate_polar};

use crate::error::{Error, Result};

/// The change of variables applied to a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Substitution {
    None,
    /// `t = log(R/r)` at a log-singular right endpoint.
    LogAtR,
    /// `r = a + h s^{1/(1+e)}` at a power-singular left endpoint.
    PowerAtZero,
    /// Exponential map of an infinite tail.
    ExpTail,
    /// Rational map `c + s u/(1-u)` of an infinite tail with algebraic decay.
    RationalTail,
    /// `r = e^t` across a segment spanning many scales.
    LogScale,
}

/// Decay of an integrand towards an infinite endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Polynomial decay, integrated with the rational map.
    #[default]
    Algebraic,
    /// Exponential or faster decay.
    Exponential,
}

/// Tolerances and panel rule for one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Enables the endpoint substitutions; with `false` the declared weights
    /// are multiplied in and plain bisection is used (finite intervals only).
    pub substitutions: bool,
    /// Gauss order of the Gauss-Kronrod pair: 7 (G7K15) or 10 (G10K21).
    pub order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_panels: 4096,
            substitutions: true,
            order: 10,
        }
    }
}

impl QuadratureSpec {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::param("quad", "tolerances must be positive"));
        }
        if self.max_panels == 0 {
            return Err(Error::param("quad", "max_panels must be at least 1"));
        }
        if rule::KronrodRule::by_order(self.order).is_none() {
            return Err(Error::param("quad", format!("unsupported panel order {}", self.order)));
        }
        Ok(())
    }

    /// Tighter spec for nested (inner) integrations. Only the relative
    /// tolerance tightens: inner values near the edge of a support can be
    /// tiny, and an absolute target far below the outer one is wasted work.
    pub(crate) fn inner(&self) -> Self {
        QuadratureSpec {
            rel_tol: (self.rel_tol * 1e-1).max(1e-14),
            ..*self
        }
    }
}

/// A one-dimensional integrand on `(a, b)` with endpoint annotations.
///
/// The integrated function is `W(x) f(x)` where `W` collects the declared
/// weights: `(x - a)^e` for [`Integrand1D::power_at_a`] and
/// `(log(b/x))^k` for [`Integrand1D::log_at_b`].
pub struct Integrand1D<'f> {
    f: Box<dyn Fn(f64) -> f64 + 'f>,
    pub a: f64,
    pub b: f64,
    pub power_at_a: Option<f64>,
    pub log_at_b: Option<f64>,
    pub tail: Tail,
    pub breakpoints: Vec<f64>,
    /// Length scale used by the tail maps.
    pub tail_scale: Option<f64>,
}

impl<'f> Integrand1D<'f> {
    pub fn new(a: f64, b: f64, f: impl Fn(f64) -> f64 + 'f) -> Self {
        Integrand1D {
            f: Box::new(f),
            a,
            b,
            power_at_a: None,
            log_at_b: None,
            tail: Tail::Algebraic,
            breakpoints: Vec::new(),
            tail_scale: None,
        }
    }

    pub fn power_at_a(mut self, exponent: f64) -> Self {
        self.power_at_a = Some(exponent);
        self
    }

    pub fn log_at_b(mut self, order: f64) -> Self {
        self.log_at_b = Some(order);
        self
    }

    pub fn tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn tail_scale(mut self, scale: f64) -> Self {
        self.tail_scale = Some(scale);
        self
    }

    pub fn breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    /// Evaluates the full weighted integrand `W(x) f(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x) * self.weight(x)
    }

    pub(crate) fn raw(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub(crate) fn weight(&self, x: f64) -> f64 {
        let mut w = 1.0;
        if let Some(e) = self.power_at_a {
            w *= (x - self.a).powf(e);
        }
        if let Some(k) = self.log_at_b {
            w *= (self.b / x).ln().powf(k);
        }
        w
    }
}

/// Value and diagnostics of an integration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub err_est: f64,
    pub panels: usize,
    pub evaluations: usize,
    /// Some panels stopped at the rounding floor rather than the tolerance.
    pub roundoff_limited: bool,
    pub substitutions: Vec<Substitution>,
}

impl Estimate {
    pub fn zero() -> Self {
        Estimate {
            value: 0.0,
            err_est: 0.0,
            panels: 0,
            evaluations: 0,
            roundoff_limited: false,
            substitutions: Vec::new(),
        }
    }

    /// Accumulates `other` into `self` (values and error estimates add).
    pub fn add(&mut self, other: &Estimate) {
        self.value += other.value;
        self.err_est += other.err_est;
        self.panels += other.panels;
        self.evaluations += other.evaluations;
        self.roundoff_limited |= other.roundoff_limited;
        for s in &other.substitutions {
            if !self.substitutions.contains(s) {
                self.substitutions.push(*s);
            }
        }
    }
}
