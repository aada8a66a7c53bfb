use super::{Jet, Radial, RadialProfile};
use crate::error::{Error, Result};

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// `r^gamma phi(r)`.
#[derive(Debug, Clone)]
pub struct PowerWeighted {
    inner: RadialProfile,
    gamma: f64,
}

impl PowerWeighted {
    pub fn new(inner: RadialProfile, gamma: f64) -> Self {
        PowerWeighted { inner, gamma }
    }
}

impl Radial for PowerWeighted {
    fn jet(&self, r: f64) -> Jet {
        if !(r > 0.0) {
            return Jet::ZERO;
        }
        let j = self.inner.jet(r);
        if j == Jet::ZERO {
            return j;
        }
        let g = self.gamma;
        let p = r.powf(g);
        let (p1, p2) = (g * p / r, g * (g - 1.0) * p / (r * r));
        Jet::new(
            p * j.value,
            p1 * j.value + p * j.d1,
            p2 * j.value + 2.0 * p1 * j.d1 + p * j.d2,
        )
    }

    fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        let j = self.inner.log_jet(anchor, tau);
        if j == Jet::ZERO {
            return j;
        }
        let g = self.gamma;
        let e = (g * (anchor.ln() - tau)).exp();
        Jet::new(
            e * j.value,
            e * (j.d1 - g * j.value),
            e * (j.d2 - 2.0 * g * j.d1 + g * g * j.value),
        )
    }

    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn log_support(&self, anchor: f64) -> (f64, f64) {
        self.inner.log_support(anchor)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
    fn log_breakpoints(&self, anchor: f64) -> Vec<f64> {
        self.inner.log_breakpoints(anchor)
    }
    fn scale(&self) -> f64 {
        self.inner.scale()
    }
    fn describe(&self) -> String {
        format!("r^{} * {}", self.gamma, self.inner.describe())
    }
}

/// `sgn(v) |v|^a`.
///
/// At zeros of `v` the derivatives are the one-sided limits; they are
/// infinite when `a < 1` (first) or `1 < a < 2` (second).
#[derive(Debug, Clone)]
pub struct SignedPower {
    inner: RadialProfile,
    a: f64,
}

impl SignedPower {
    pub fn new(inner: RadialProfile, a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::param("a", format!("exponent must be positive, got {a}")));
        }
        Ok(SignedPower { inner, a })
    }

    fn compose(&self, j: Jet) -> Jet {
        let a = self.a;
        let y = j.value;
        if y == 0.0 {
            let f1 = if a > 1.0 {
                0.0
            } else if a == 1.0 {
                1.0
            } else {
                f64::INFINITY
            };
            let f2 = if a == 1.0 || a >= 2.0 { 0.0 } else { f64::INFINITY };
            let d2 = if j.d1 == 0.0 && f2.is_infinite() {
                f64::INFINITY
            } else {
                f2 * j.d1 * j.d1 + if f1 == 0.0 { 0.0 } else { f1 * j.d2 }
            };
            let d1 = if j.d1 == 0.0 && f1.is_infinite() {
                f64::INFINITY
            } else if f1 == 0.0 {
                0.0
            } else {
                f1 * j.d1
            };
            return Jet::new(0.0, d1, d2);
        }
        let m = y.abs();
        let f0 = y.signum() * m.powf(a);
        let f1 = a * m.powf(a - 1.0);
        let f2 = a * (a - 1.0) * y.signum() * m.powf(a - 2.0);
        Jet::new(f0, f1 * j.d1, f2 * j.d1 * j.d1 + f1 * j.d2)
    }
}

impl Radial for SignedPower {
    fn jet(&self, r: f64) -> Jet {
        self.compose(self.inner.jet(r))
    }
    fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        self.compose(self.inner.log_jet(anchor, tau))
    }
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }
    fn log_support(&self, anchor: f64) -> (f64, f64) {
        self.inner.log_support(anchor)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }
    fn log_breakpoints(&self, anchor: f64) -> Vec<f64> {
        self.inner.log_breakpoints(anchor)
    }
    fn scale(&self) -> f64 {
        self.inner.scale()
    }
    fn describe(&self) -> String {
        format!("sgn|{}|^{}", self.inner.describe(), self.a)
    }
}

/// `v(s) = s^beta phi(R e^{-1/s})`, a profile in `s = 1/log(R/r)`.
///
/// `phi` must vanish near `r = R`, otherwise `v` is not compactly supported.
#[derive(Debug, Clone)]
pub struct CriticalS {
    inner: RadialProfile,
    radius: f64,
    beta: f64,
    t_range: (f64, f64),
}

impl CriticalS {
    pub fn new(inner: RadialProfile, radius: f64, beta: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("R", format!("must be positive, got {radius}")));
        }
        let t_range = inner.log_support(radius);
        if !(t_range.0 > 0.0) && !inner.is_zero() {
            return Err(Error::SupportViolation(format!(
                "{} is not supported inside the open ball of radius {radius}",
                inner.describe()
            )));
        }
        Ok(CriticalS {
            inner,
            radius,
            beta,
            t_range,
        })
    }
}

impl Radial for CriticalS {
    fn jet(&self, s: f64) -> Jet {
        if !(s > 0.0) {
            return Jet::ZERO;
        }
        self.log_jet(s, 0.0).from_log(s)
    }

    fn log_jet(&self, anchor: f64, sigma: f64) -> Jet {
        // lambda = log t = sigma - log(anchor), with t = log(R/r) = 1/s
        let lambda = sigma - anchor.ln();
        let t = lambda.exp();
        if t < self.t_range.0 || t > self.t_range.1 {
            return Jet::ZERO;
        }
        let psi = self.inner.log_jet(self.radius, t);
        let chi = Jet::new(psi.value, t * psi.d1, t * psi.d1 + t * t * psi.d2);
        let b = self.beta;
        let e = (-b * lambda).exp();
        Jet::new(
            e * chi.value,
            e * (chi.d1 - b * chi.value),
            e * (chi.d2 - 2.0 * b * chi.d1 + b * b * chi.value),
        )
    }

    fn support(&self) -> (f64, f64) {
        let (t_lo, t_hi) = self.t_range;
        if t_hi < t_lo {
            return (0.0, 0.0);
        }
        (1.0 / t_hi, 1.0 / t_lo)
    }

    fn log_support(&self, anchor: f64) -> (f64, f64) {
        let (t_lo, t_hi) = self.t_range;
        (anchor.ln() + t_lo.ln(), anchor.ln() + t_hi.ln())
    }

    fn breakpoints(&self) -> Vec<f64> {
        sorted(
            self.inner
                .log_breakpoints(self.radius)
                .into_iter()
                .filter(|t| *t > 0.0)
                .map(|t| 1.0 / t)
                .collect(),
        )
    }

    fn log_breakpoints(&self, anchor: f64) -> Vec<f64> {
        self.inner
            .log_breakpoints(self.radius)
            .into_iter()
            .filter(|t| *t > 0.0)
            .map(|t| anchor.ln() + t.ln())
            .collect()
    }

    fn scale(&self) -> f64 {
        let (t_lo, t_hi) = self.t_range;
        if t_hi.is_finite() {
            1.0 / (t_lo.sqrt() * t_hi.sqrt())
        } else {
            0.5 / t_lo
        }
    }

    fn describe(&self) -> String {
        format!(
            "s^{} * ({})(R e^(-1/s)), R = {}",
            self.beta,
            self.inner.describe(),
            self.radius
        )
    }
}

/// `u(r) = t^beta chi(1/t)` with `t = log(R/r)`, for a profile `chi` in `s`
/// that vanishes near `s = 0`. Inverse of [`CriticalS`].
#[derive(Debug, Clone)]
pub struct CriticalLift {
    chi: RadialProfile,
    radius: f64,
    beta: f64,
}

impl CriticalLift {
    pub fn new(chi: RadialProfile, radius: f64, beta: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("R", format!("must be positive, got {radius}")));
        }
        if !(chi.support().0 > 0.0) && !chi.is_zero() {
            return Err(Error::SupportViolation(format!(
                "{} must vanish near s = 0",
                chi.describe()
            )));
        }
        Ok(CriticalLift { chi, radius, beta })
    }

    fn t_range(&self) -> (f64, f64) {
        let (s_lo, s_hi) = self.chi.support();
        let t_lo = if s_hi.is_finite() { 1.0 / s_hi } else { 0.0 };
        (t_lo, 1.0 / s_lo)
    }
}

impl Radial for CriticalLift {
    fn jet(&self, r: f64) -> Jet {
        if !(r > 0.0) {
            return Jet::ZERO;
        }
        self.log_jet(r, 0.0).from_log(r)
    }

    fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        let t = tau - (anchor / self.radius).ln();
        if !(t > 0.0) {
            return Jet::ZERO;
        }
        let lambda = t.ln();
        let c = self.chi.log_jet(1.0, lambda);
        if c == Jet::ZERO {
            return c;
        }
        let b = self.beta;
        let e = (b * lambda).exp();
        let d0 = e * c.value;
        let d1 = e * (c.d1 + b * c.value);
        let d2 = e * (c.d2 + 2.0 * b * c.d1 + b * b * c.value);
        Jet::new(d0, d1 / t, (d2 - d1) / (t * t))
    }

    fn support(&self) -> (f64, f64) {
        if self.chi.is_zero() {
            return (0.0, 0.0);
        }
        let (t_lo, t_hi) = self.t_range();
        (self.radius * (-t_hi).exp(), self.radius * (-t_lo).exp())
    }

    fn log_support(&self, anchor: f64) -> (f64, f64) {
        let d = (anchor / self.radius).ln();
        let (t_lo, t_hi) = self.t_range();
        (t_lo + d, t_hi + d)
    }

    fn breakpoints(&self) -> Vec<f64> {
        sorted(
            self.chi
                .breakpoints()
                .into_iter()
                .map(|s| self.radius * (-1.0 / s).exp())
                .collect(),
        )
    }

    fn log_breakpoints(&self, anchor: f64) -> Vec<f64> {
        let d = (anchor / self.radius).ln();
        sorted(self.chi.breakpoints().into_iter().map(|s| 1.0 / s + d).collect())
    }

    fn scale(&self) -> f64 {
        let (t_lo, t_hi) = self.t_range();
        self.radius * (-0.5 * (t_lo + t_hi)).exp()
    }

    fn describe(&self) -> String {
        format!(
            "log(R/r)^{} * ({})(1/log(R/r)), R = {}",
            self.beta,
            self.chi.describe(),
            self.radius
        )
    }
}

/// `c phi(lambda r)`.
#[derive(Debug, Clone)]
pub struct Dilated {
    inner: RadialProfile,
    lambda: f64,
    amplitude: f64,
}

impl Dilated {
    pub fn new(inner: RadialProfile, lambda: f64, amplitude: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
        }
        if !amplitude.is_finite() {
            return Err(Error::param("amplitude", "must be finite"));
        }
        Ok(Dilated {
            inner,
            lambda,
            amplitude,
        })
    }
}

impl Radial for Dilated {
    fn jet(&self, r: f64) -> Jet {
        let j = self.inner.jet(self.lambda * r);
        let (l, c) = (self.lambda, self.amplitude);
        Jet::new(c * j.value, c * l * j.d1, c * l * l * j.d2)
    }
    fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        self.inner
            .log_jet(self.lambda * anchor, tau)
            .scale(self.amplitude)
    }
    fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.support();
        (lo / self.lambda, hi / self.lambda)
    }
    fn log_support(&self, anchor: f64) -> (f64, f64) {
        self.inner.log_support(self.lambda * anchor)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.inner
            .breakpoints()
            .iter()
            .map(|r| r / self.lambda)
            .collect()
    }
    fn log_breakpoints(&self, anchor: f64) -> Vec<f64> {
        self.inner.log_breakpoints(self.lambda * anchor)
    }
    fn scale(&self) -> f64 {
        self.inner.scale() / self.lambda
    }
    fn describe(&self) -> String {
        format!(
            "{} * ({})({} r)",
            self.amplitude,
            self.inner.describe(),
            self.lambda
        )
    }
}
