//! Radial test functions with analytic first and second derivatives.
//!
//! A profile is a function `phi(r)` on `(0, inf)`. Besides the ordinary jet
//! `(phi, phi', phi'')` every profile exposes its jet in logarithmic
//! coordinates `tau = log(anchor / r)`:
//!
//! ```text
//! psi(tau) = phi(r),   psi' = -r phi'(r),   psi'' = r phi'(r) + r^2 phi''(r)
//! ```
//!
//! All dilation-invariant functionals are integrated in `tau`, which keeps
//! profiles spread over many decades of `r` well resolved.

mod families;
mod transforms;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use families::{smoothstep, Bump, Gaussian, LogPower, MollifiedPower};
pub use transforms::{CriticalLift, CriticalS, Dilated, PowerWeighted, SignedPower};

/// Value and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        value: 0.0,
        d1: 0.0,
        d2: 0.0,
    };

    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Jet { value, d1, d2 }
    }

    pub fn scale(self, c: f64) -> Self {
        Jet::new(c * self.value, c * self.d1, c * self.d2)
    }

    /// Converts an `r`-jet at `r` into the `tau`-jet (`tau = log(anchor/r)`).
    pub fn to_log(self, r: f64) -> Self {
        Jet::new(self.value, -r * self.d1, r * self.d1 + r * r * self.d2)
    }

    /// Converts a `tau`-jet back into the `r`-jet at `r`.
    pub fn from_log(self, r: f64) -> Self {
        Jet::new(self.value, -self.d1 / r, (self.d2 + self.d1) / (r * r))
    }
}

/// A radial function with analytic derivatives.
pub trait Radial: Send + Sync {
    fn jet(&self, r: f64) -> Jet;

    /// Jet of `tau -> phi(anchor e^{-tau})`.
    fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        let r = anchor * (-tau).exp();
        let j = self.jet(r);
        if j == Jet::ZERO {
            return j;
        }
        j.to_log(r)
    }

    /// Closed interval `[lo, hi]` outside of which the profile vanishes.
    fn support(&self) -> (f64, f64);

    /// The support in `tau = log(anchor/r)`, as an increasing interval.
    fn log_support(&self, anchor: f64) -> (f64, f64) {
        let (lo, hi) = self.support();
        let t_lo = if hi.is_finite() {
            (anchor / hi).ln()
        } else {
            f64::NEG_INFINITY
        };
        let t_hi = if lo > 0.0 {
            (anchor / lo).ln()
        } else {
            f64::INFINITY
        };
        (t_lo, t_hi)
    }

    /// Interior radii where a derivative may be discontinuous.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// [`Radial::breakpoints`] in `tau`, increasing.
    fn log_breakpoints(&self, anchor: f64) -> Vec<f64> {
        let mut b: Vec<f64> = self
            .breakpoints()
            .iter()
            .filter(|r| **r > 0.0 && r.is_finite())
            .map(|r| (anchor / r).ln())
            .collect();
        b.sort_by(f64::total_cmp);
        b
    }

    /// A characteristic radius, used as the default anchor and grid centre.
    fn scale(&self) -> f64;

    fn describe(&self) -> String;
}

/// Catalog description of a profile, as accepted in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `(1 - (r/R)^2)^m` on `[0, R]`.
    Bump {
        m: u32,
        #[serde(rename = "R")]
        radius: f64,
    },
    /// `exp(-r^2 / (2 sigma^2))`.
    Gaussian { sigma: f64 },
    /// `r^gamma` with smooth cut-offs on `[eps, 2 eps]` and `[M/2, M]`.
    MollifiedPower {
        gamma: f64,
        eps: f64,
        #[serde(rename = "M")]
        outer: f64,
        #[serde(default = "default_order")]
        m: u32,
    },
    /// `t^beta` in `t = log(R/r)` with smooth cut-offs on
    /// `[t_inner, 2 t_inner]` and `[t_outer/2, t_outer]`.
    LogPower {
        beta: f64,
        #[serde(rename = "R")]
        radius: f64,
        t_inner: f64,
        t_outer: f64,
        #[serde(default = "default_order")]
        m: u32,
    },
}

fn default_order() -> u32 {
    4
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Bump { m, radius } => write!(f, "bump:m={m},R={radius}"),
            ProfileSpec::Gaussian { sigma } => write!(f, "gaussian:sigma={sigma}"),
            ProfileSpec::MollifiedPower {
                gamma,
                eps,
                outer,
                m,
            } => write!(f, "mollified_power:gamma={gamma},eps={eps},M={outer},m={m}"),
            ProfileSpec::LogPower {
                beta,
                radius,
                t_inner,
                t_outer,
                m,
            } => write!(
                f,
                "log_power:beta={beta},R={radius},t_inner={t_inner},t_outer={t_outer},m={m}"
            ),
        }
    }
}

/// Parses the command-line form `family:key=value,...`.
impl FromStr for ProfileSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut obj = serde_json::Map::new();
        obj.insert(
            "family".into(),
            serde_json::Value::String(family.trim().replace('-', "_")),
        );
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::param("profile", format!("expected key=value, got `{item}`")))?;
            let num: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::param("profile", format!("`{v}` is not a number")))?;
            let value = if num.fract() == 0.0 && (0.0..4e9).contains(&num) && !v.contains(['.', 'e', 'E']) {
                serde_json::Value::from(num as u64)
            } else {
                serde_json::Value::from(num)
            };
            obj.insert(k.trim().to_string(), value);
        }
        serde_json::from_value(serde_json::Value::Object(obj))
            .map_err(|e| Error::param("profile", format!("`{s}`: {e}")))
    }
}

/// Builds and validates a catalog profile.
pub fn make_profile(spec: &ProfileSpec) -> Result<RadialProfile> {
    let radial: Arc<dyn Radial> = match *spec {
        ProfileSpec::Bump { m, radius } => Arc::new(Bump::new(m, radius)?),
        ProfileSpec::Gaussian { sigma } => Arc::new(Gaussian::new(sigma)?),
        ProfileSpec::MollifiedPower {
            gamma,
            eps,
            outer,
            m,
        } => Arc::new(MollifiedPower::new(gamma, eps, outer, m)?),
        ProfileSpec::LogPower {
            beta,
            radius,
            t_inner,
            t_outer,
            m,
        } => Arc::new(LogPower::new(beta, radius, t_inner, t_outer, m)?),
    };
    let profile = RadialProfile {
        inner: radial,
        spec: Some(spec.clone()),
    };
    profile.check_derivatives(100, 0x5eed)?;
    Ok(profile)
}

/// A shareable radial profile.
#[derive(Clone)]
pub struct RadialProfile {
    inner: Arc<dyn Radial>,
    spec: Option<ProfileSpec>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RadialProfile({})", self.inner.describe())
    }
}

struct CustomRadial {
    name: String,
    support: (f64, f64),
    scale: f64,
    breakpoints: Vec<f64>,
    jet: Box<dyn Fn(f64) -> Jet + Send + Sync>,
}

impl Radial for CustomRadial {
    fn jet(&self, r: f64) -> Jet {
        if r < self.support.0 || r > self.support.1 {
            return Jet::ZERO;
        }
        (self.jet)(r)
    }
    fn support(&self) -> (f64, f64) {
        self.support
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
    fn scale(&self) -> f64 {
        self.scale
    }
    fn describe(&self) -> String {
        self.name.clone()
    }
}

impl RadialProfile {
    /// Wraps an arbitrary implementation (no catalog entry, no validation).
    pub fn new(radial: impl Radial + 'static) -> Self {
        RadialProfile {
            inner: Arc::new(radial),
            spec: None,
        }
    }

    /// A profile given by a jet closure on `support` (API only).
    pub fn custom(
        name: &str,
        support: (f64, f64),
        scale: f64,
        jet: impl Fn(f64) -> Jet + Send + Sync + 'static,
    ) -> Self {
        RadialProfile::new(CustomRadial {
            name: name.to_string(),
            support,
            scale,
            breakpoints: Vec::new(),
            jet: Box::new(jet),
        })
    }

    /// Like [`RadialProfile::custom`] with interior breakpoints.
    pub fn custom_with_breakpoints(
        name: &str,
        support: (f64, f64),
        scale: f64,
        breakpoints: Vec<f64>,
        jet: impl Fn(f64) -> Jet + Send + Sync + 'static,
    ) -> Self {
        RadialProfile::new(CustomRadial {
            name: name.to_string(),
            support,
            scale,
            breakpoints,
            jet: Box::new(jet),
        })
    }

    /// The identically zero function.
    pub fn zero() -> Self {
        RadialProfile::custom("zero", (0.0, 0.0), 1.0, |_| Jet::ZERO)
    }

    /// `c * phi(lambda r)`.
    pub fn dilated(&self, lambda: f64, amplitude: f64) -> Result<Self> {
        Ok(RadialProfile::new(Dilated::new(self.clone(), lambda, amplitude)?))
    }

    pub fn spec(&self) -> Option<&ProfileSpec> {
        self.spec.as_ref()
    }

    pub fn describe(&self) -> String {
        self.inner.describe()
    }

    pub fn jet(&self, r: f64) -> Jet {
        self.inner.jet(r)
    }

    pub fn value(&self, r: f64) -> f64 {
        self.inner.jet(r).value
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.inner.jet(r).d1
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.inner.jet(r).d2
    }

    pub fn log_jet(&self, anchor: f64, tau: f64) -> Jet {
        self.inner.log_jet(anchor, tau)
    }

    pub fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    pub fn log_support(&self, anchor: f64) -> (f64, f64) {
        self.inner.log_support(anchor)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints()
    }

    pub fn log_breakpoints(&self, anchor: f64) -> Vec<f64> {
        self.inner.log_breakpoints(anchor)
    }

    pub fn scale(&self) -> f64 {
        self.inner.scale()
    }

    /// True if the profile is identically zero (empty support).
    pub fn is_zero(&self) -> bool {
        let (lo, hi) = self.support();
        hi <= lo
    }

    /// Compares both jets against fourth-order central differences at
    /// `points` deterministic pseudo-random points of the support.
    ///
    /// The `tau`-jet is checked in `tau`; the `r`-jet is checked wherever
    /// the point is representable in `r`. Points near breakpoints are
    /// skipped; the stencil never crosses one.
    pub fn check_derivatives(&self, points: usize, seed: u64) -> Result<()> {
        if self.is_zero() {
            return Ok(());
        }
        let anchor = self.scale();
        let (lo, hi) = self.log_support(anchor);
        let lo_w = if lo.is_finite() { lo } else { hi.min(0.0) - 8.0 };
        let hi_w = if hi.is_finite() { hi } else { lo.max(0.0) + 20.0 };
        let mut walls: Vec<f64> = self.log_breakpoints(anchor);
        walls.extend([lo, hi].into_iter().filter(|t| t.is_finite()));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fail = |detail: String| Error::DerivativeMismatch {
            family: self.describe(),
            detail,
        };
        let mut accepted = 0;
        let mut attempts = 0;
        while accepted < points && attempts < 50 * points {
            attempts += 1;
            let u: f64 = rng.random();
            let tau = if lo_w > 0.0 && hi_w / lo_w > 16.0 {
                (lo_w.ln() + u * (hi_w / lo_w).ln()).exp()
            } else {
                lo_w + u * (hi_w - lo_w)
            };
            let dist = walls
                .iter()
                .map(|w| (tau - w).abs())
                .fold(f64::INFINITY, f64::min);
            if !(dist > 1e-9 * tau.abs().max(1.0)) {
                continue;
            }
            accepted += 1;

            // steep tapers need a step well below the width of their piece,
            // and powers of log(anchor/r) one below the distance to the anchor
            let left = walls.iter().filter(|w| **w < tau).fold(f64::NEG_INFINITY, |a, w| a.max(*w));
            let right = walls.iter().filter(|w| **w > tau).fold(f64::INFINITY, |a, w| a.min(*w));
            let h = (dist / 4.0)
                .min(2e-3 * (right - left))
                .min(1e-3 * tau.abs().min(1.0) + 1e-12);
            let jet = |t: f64| self.log_jet(anchor, t);
            check_point(&jet, tau, h).map_err(|d| fail(format!("log jet at tau = {tau:e}: {d}")))?;

            let r = anchor * (-tau).exp();
            let r_dist = r * (1.0 - (-dist).exp());
            // r-derivatives overflow at extreme radii
            if r > 1e-100 && r < 1e100 && r_dist > 1e-9 * r {
                let seg = anchor * ((-left).exp() - (-right).exp());
                let hr = (r_dist / 4.0)
                    .min(1e-3 * r)
                    .min(2e-3 * seg)
                    .min(1e-3 * (r - anchor).abs() + 1e-12 * r);
                let jet = |x: f64| self.jet(x);
                check_point(&jet, r, hr).map_err(|d| fail(format!("jet at r = {r:e}: {d}")))?;
            }
        }
        Ok(())
    }
}

fn five_point(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

fn check_point(jet: &dyn Fn(f64) -> Jet, x: f64, h: f64) -> std::result::Result<(), String> {
    let j = jet(x);
    if !(j.value.is_finite() && j.d1.is_finite() && j.d2.is_finite()) {
        return Err(format!("non-finite jet {j:?}"));
    }
    let fd1 = five_point(&|t| jet(t).value, x, h);
    let fd2 = five_point(&|t| jet(t).d1, x, h);
    // the stencil cannot resolve differences below its own rounding level
    let stencil_max = |f: &dyn Fn(Jet) -> f64| {
        [-2.0, -1.0, 1.0, 2.0]
            .iter()
            .map(|k| f(jet(x + k * h)).abs())
            .fold(0.0, f64::max)
    };
    // plus the rounding of the stencil abscissae themselves
    let ulp = f64::EPSILON * x.abs();
    let noise1 = 10.0 * (f64::EPSILON * stencil_max(&|j| j.value) + ulp * j.d1.abs()) / h;
    let noise2 = 10.0 * (f64::EPSILON * stencil_max(&|j| j.d1) + ulp * j.d2.abs()) / h;
    if (j.d1 - fd1).abs() > 1e-6 * (1.0 + j.d1.abs()) + noise1 {
        return Err(format!("first derivative {} vs difference {fd1}", j.d1));
    }
    if (j.d2 - fd2).abs() > 1e-5 * (1.0 + j.d2.abs()) + noise2 {
        return Err(format!("second derivative {} vs difference {fd2}", j.d2));
    }
    Ok(())
}

/// Deterministic grid of `n` radii in the open support, log-spaced when the
/// support spans more than a decade.
pub fn interior_grid(profile: &RadialProfile, n: usize) -> Vec<f64> {
    let (lo, hi) = profile.support();
    let scale = profile.scale();
    let lo = if lo > 0.0 { lo } else { scale * 1e-3 };
    let hi = if hi.is_finite() { hi } else { scale * 5.0 };
    (1..=n)
        .map(|i| {
            let u = i as f64 / (n + 1) as f64;
            if hi / lo > 10.0 {
                (lo.ln() + u * (hi / lo).ln()).exp()
            } else {
                lo + u * (hi - lo)
            }
        })
        .collect()
}

/// A function on the Euclidean unit sphere.
pub type SphereFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Angular factor of a separable function `u(ry) = phi(r) omega(y)`.
#[derive(Clone)]
pub enum Angular {
    Constant(f64),
    /// A function on the Euclidean unit sphere (Euclidean norm only).
    Function(SphereFn),
}

impl fmt::Debug for Angular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angular::Constant(c) => write!(f, "Constant({c})"),
            Angular::Function(_) => write!(f, "Function"),
        }
    }
}

impl Angular {
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            Angular::Constant(c) => *c,
            Angular::Function(w) => w(y),
        }
    }
}

/// `u(ry) = phi(r) omega(y)`.
#[derive(Debug, Clone)]
pub struct SeparableFunction {
    pub profile: RadialProfile,
    pub angular: Angular,
}

impl SeparableFunction {
    pub fn radial(profile: RadialProfile) -> Self {
        SeparableFunction {
            profile,
            angular: Angular::Constant(1.0),
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.angular, Angular::Constant(_))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings_round_trip() {
        let cases = [
            "bump:m=4,R=1",
            "gaussian:sigma=0.5",
            "mollified_power:gamma=-1,eps=0.001,M=1000,m=4",
            "log_power:beta=0.5,R=1,t_inner=0.01,t_outer=100,m=3",
        ];
        for c in cases {
            let spec: ProfileSpec = c.parse().unwrap();
            let again: ProfileSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
        let spec: ProfileSpec = "bump:m=4,R=1".parse().unwrap();
        assert_eq!(spec, ProfileSpec::Bump { m: 4, radius: 1.0 });
        let spec: ProfileSpec = "mollified-power:gamma=-1,eps=0.001,M=1000".parse().unwrap();
        assert!(matches!(spec, ProfileSpec::MollifiedPower { m: 4, .. }));
        assert!("bump:m=4".parse::<ProfileSpec>().is_err());
        assert!("bump:m=four,R=1".parse::<ProfileSpec>().is_err());
        assert!("nonsense:x=1".parse::<ProfileSpec>().is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec: ProfileSpec = serde_json::from_str(r#"{"family":"bump","m":4,"R":1.0}"#).unwrap();
        assert_eq!(spec, ProfileSpec::Bump { m: 4, radius: 1.0 });
        assert_eq!(
            serde_json::to_string(&spec).unwrap(),
            r#"{"family":"bump","m":4,"R":1.0}"#
        );
    }

    #[test]
    fn catalog_examples() {
        let b = make_profile(&ProfileSpec::Bump { m: 2, radius: 1.0 }).unwrap();
        assert!((b.value(0.5f64.sqrt()) - 0.25).abs() < 1e-15);
        assert_eq!(b.value(1.5), 0.0);
        let g = make_profile(&ProfileSpec::Gaussian { sigma: 1.0 }).unwrap();
        for r in [0.1, 1.0, 2.5] {
            assert!((g.d1(r) + r * (-r * r / 2.0).exp()).abs() < 1e-15);
        }
        let m = make_profile(&ProfileSpec::MollifiedPower {
            gamma: -1.0,
            eps: 1e-3,
            outer: 1e3,
            m: 4,
        })
        .unwrap();
        for r in [0.01, 1.0, 100.0] {
            assert!((m.value(r) * r - 1.0).abs() < 1e-15);
        }
        assert_eq!(m.value(1e-4), 0.0);
        assert_eq!(m.value(2e3), 0.0);
    }

    #[test]
    fn invalid_parameters() {
        assert!(make_profile(&ProfileSpec::Bump { m: 1, radius: 1.0 }).is_err());
        assert!(make_profile(&ProfileSpec::Bump { m: 3, radius: 0.0 }).is_err());
        assert!(make_profile(&ProfileSpec::Gaussian { sigma: -1.0 }).is_err());
        assert!(make_profile(&ProfileSpec::MollifiedPower {
            gamma: 1.0,
            eps: 1.0,
            outer: 2.0,
            m: 4
        })
        .is_err());
        assert!(make_profile(&ProfileSpec::LogPower {
            beta: 0.5,
            radius: 1.0,
            t_inner: 0.0,
            t_outer: 2.0,
            m: 4
        })
        .is_err());
    }

    #[test]
    fn wrong_derivatives_are_caught() {
        let bad = RadialProfile::custom("bad", (0.0, f64::INFINITY), 1.0, |r: f64| {
            Jet::new((-r).exp(), -(-r).exp(), 2.0 * (-r).exp())
        });
        assert!(matches!(
            bad.check_derivatives(100, 1),
            Err(Error::DerivativeMismatch { .. })
        ));
        let good = RadialProfile::custom("good", (0.0, f64::INFINITY), 1.0, |r: f64| {
            Jet::new((-r).exp(), -(-r).exp(), (-r).exp())
        });
        good.check_derivatives(100, 1).unwrap();
    }

    #[test]
    fn log_jet_conversions_invert() {
        let j = Jet::new(0.3, -1.2, 4.5);
        let r = 0.7;
        let back = j.to_log(r).from_log(r);
        assert!((back.d1 - j.d1).abs() < 1e-14);
        assert!((back.d2 - j.d2).abs() < 1e-13);
    }
}
