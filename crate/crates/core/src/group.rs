//! Homogeneous groups in exponential coordinates with diagonal dilations.
//!
//! A group is described by its dilation weights `nu_i`; the dilation acts by
//! `D_l x = (l^{nu_1} x_1, ..., l^{nu_n} x_n)` and the homogeneous dimension
//! is `Q = sum nu_i`. The group law is only a tag: every functional here is
//! an integral against Lebesgue measure along dilation rays.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_ambient, integrate_radial, AmbientDomain, Integrand1D, QuadratureSpec, Tail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupLaw {
    Abelian,
    Heisenberg,
}

/// Dimension, dilation weights and homogeneous dimension of a group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec {
    pub n: usize,
    weights: Vec<f64>,
    pub law: GroupLaw,
    q: f64,
}

impl GroupSpec {
    pub fn new(n: usize, weights: Vec<f64>, law: GroupLaw) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGroup("dimension must be at least 1".into()));
        }
        if weights.len() != n {
            return Err(Error::InvalidGroup(format!(
                "{} weights given for dimension {n}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidGroup(format!(
                "dilation weights must be positive, got {w}"
            )));
        }
        if law == GroupLaw::Heisenberg && (n != 3 || weights != [1.0, 1.0, 2.0]) {
            return Err(Error::InvalidGroup(
                "the Heisenberg group has dimension 3 and weights (1, 1, 2)".into(),
            ));
        }
        let q = weights.iter().sum();
        Ok(GroupSpec { n, weights, law, q })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        GroupSpec::new(n, vec![1.0; n], GroupLaw::Abelian)
    }

    pub fn heisenberg() -> Self {
        GroupSpec::new(3, vec![1.0, 1.0, 2.0], GroupLaw::Heisenberg).expect("valid weights")
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Homogeneous dimension.
    pub fn q(&self) -> f64 {
        self.q
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn dilate(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("dilation factor must be positive, got {lambda}")));
        }
        self.check_point(x)?;
        Ok(x.iter()
            .zip(&self.weights)
            .map(|(xi, nu)| lambda.powf(*nu) * xi)
            .collect())
    }
}

/// A homogeneous quasi-norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuasiNormSpec {
    Euclidean,
    /// `(sum |x_i|^{p0/nu_i})^{1/p0}`.
    Anisotropic { p0: u32 },
    /// `((x_1^2 + x_2^2)^2 + x_3^2)^{1/4}` on the Heisenberg group.
    Koranyi,
}

impl fmt::Display for QuasiNormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuasiNormSpec::Euclidean => write!(f, "euclidean"),
            QuasiNormSpec::Anisotropic { p0 } => write!(f, "anisotropic:{p0}"),
            QuasiNormSpec::Koranyi => write!(f, "koranyi"),
        }
    }
}

impl QuasiNormSpec {
    pub fn check(&self, group: &GroupSpec) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::IncompatibleNorm {
                norm: self.to_string(),
                reason,
            })
        };
        match *self {
            QuasiNormSpec::Euclidean => {
                if group.weights.iter().any(|w| *w != 1.0) {
                    return fail("needs all dilation weights equal to 1".into());
                }
            }
            QuasiNormSpec::Anisotropic { p0 } => {
                if p0 == 0 || p0 % 2 != 0 {
                    return Err(Error::InvalidNorm(format!(
                        "anisotropic exponent must be a positive even integer, got {p0}"
                    )));
                }
                if let Some(w) = group.weights.iter().find(|w| (p0 as f64) / **w < 1.0) {
                    return fail(format!("p0 / weight must be at least 1 (weight {w})"));
                }
            }
            QuasiNormSpec::Koranyi => {
                if group.law != GroupLaw::Heisenberg {
                    return fail("defined on the Heisenberg group only".into());
                }
            }
        }
        Ok(())
    }

    /// Evaluates the norm; `x` is assumed to have the group's dimension.
    fn eval(&self, weights: &[f64], x: &[f64]) -> f64 {
        match *self {
            QuasiNormSpec::Euclidean => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            QuasiNormSpec::Anisotropic { p0 } => {
                let p0 = p0 as f64;
                // pull out the dominant homogeneous scale so extreme points stay finite
                let m = x
                    .iter()
                    .zip(weights)
                    .map(|(xi, nu)| pow(xi.abs(), 1.0 / nu))
                    .fold(0.0, f64::max);
                if m == 0.0 {
                    return 0.0;
                }
                let s: f64 = x
                    .iter()
                    .zip(weights)
                    .map(|(xi, nu)| pow(xi.abs() / pow(m, *nu), p0 / nu))
                    .sum();
                m * pow(s, 1.0 / p0)
            }
            QuasiNormSpec::Koranyi => {
                let a = x[0] * x[0] + x[1] * x[1];
                (a * a + x[2] * x[2]).sqrt().sqrt()
            }
        }
    }
}

/// `x^e` for `x >= 0`, avoiding `powf` for the small integer and
/// square-root exponents that integer weights produce.
fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 0.5 {
        x.sqrt()
    } else if e == 0.25 {
        x.sqrt().sqrt()
    } else if e.fract() == 0.0 && e.abs() <= 16.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// A group together with a compatible quasi-norm.
///
/// The quasi-sphere measure is computed on first use and cached.
#[derive(Serialize, Deserialize)]
#[serde(try_from = "GeometryRepr", into = "GeometryRepr")]
pub struct Geometry {
    group: GroupSpec,
    norm: QuasiNormSpec,
    sphere: OnceLock<Result<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryRepr {
    n: usize,
    weights: Vec<f64>,
    law: GroupLaw,
    norm: QuasiNormSpec,
}

impl TryFrom<GeometryRepr> for Geometry {
    type Error = Error;
    fn try_from(r: GeometryRepr) -> Result<Self> {
        Geometry::new(GroupSpec::new(r.n, r.weights, r.law)?, r.norm)
    }
}

impl From<Geometry> for GeometryRepr {
    fn from(g: Geometry) -> Self {
        GeometryRepr {
            n: g.group.n,
            weights: g.group.weights,
            law: g.group.law,
            norm: g.norm,
        }
    }
}

impl Clone for Geometry {
    fn clone(&self) -> Self {
        let sphere = OnceLock::new();
        if let Some(v) = self.sphere.get() {
            let _ = sphere.set(v.clone());
        }
        Geometry {
            group: self.group.clone(),
            norm: self.norm,
            sphere,
        }
    }
}

impl PartialEq for Geometry {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group && self.norm == other.norm
    }
}

impl fmt::Debug for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Geometry")
            .field("group", &self.group)
            .field("norm", &self.norm)
            .finish()
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.group.weights.iter().map(|w| format!("{w}")).collect();
        let law = match self.group.law {
            GroupLaw::Abelian => "abelian",
            GroupLaw::Heisenberg => "heisenberg",
        };
        write!(f, "{law}({}) with {} norm", w.join(","), self.norm)
    }
}

impl Geometry {
    pub fn new(group: GroupSpec, norm: QuasiNormSpec) -> Result<Self> {
        norm.check(&group)?;
        Ok(Geometry {
            group,
            norm,
            sphere: OnceLock::new(),
        })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Geometry::new(GroupSpec::euclidean(n)?, QuasiNormSpec::Euclidean)
    }

    pub fn heisenberg_koranyi() -> Self {
        Geometry::new(GroupSpec::heisenberg(), QuasiNormSpec::Koranyi).expect("compatible")
    }

    pub fn anisotropic(weights: Vec<f64>, p0: u32) -> Result<Self> {
        let group = GroupSpec::new(weights.len(), weights, GroupLaw::Abelian)?;
        Geometry::new(group, QuasiNormSpec::Anisotropic { p0 })
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn norm(&self) -> &QuasiNormSpec {
        &self.norm
    }

    pub fn q(&self) -> f64 {
        self.group.q
    }

    pub fn dilate(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.group.dilate(lambda, x)
    }

    pub fn quasi_norm(&self, x: &[f64]) -> Result<f64> {
        self.group.check_point(x)?;
        Ok(self.norm.eval(&self.group.weights, x))
    }

    /// Measure of the unit quasi-sphere, so that
    /// `int_G f(|x|) dx = |S| int_0^inf f(r) r^{Q-1} dr`.
    ///
    /// Obtained as the ratio of `int_G exp(-|x|^s) dx` to
    /// `int_0^inf exp(-r^s) r^{Q-1} dr`. For the Euclidean and anisotropic
    /// norms, `s` is chosen (2, resp. `p0`) so that the ambient integral
    /// factors into one-dimensional integrals, which works in any dimension.
    /// The Koranyi norm uses the iterated three-dimensional integral.
    pub fn sphere_measure(&self) -> Result<f64> {
        self.sphere
            .get_or_init(|| self.compute_sphere_measure(&QuadratureSpec::default().with_rel_tol(1e-12)))
            .clone()
    }

    fn compute_sphere_measure(&self, spec: &QuadratureSpec) -> Result<f64> {
        let (s, exponents) = match self.norm {
            QuasiNormSpec::Euclidean => (2.0, vec![2.0; self.group.n]),
            QuasiNormSpec::Anisotropic { p0 } => {
                let p0 = p0 as f64;
                (p0, self.group.weights.iter().map(|nu| p0 / nu).collect())
            }
            QuasiNormSpec::Koranyi => return self.sphere_measure_with(4.0, spec),
        };
        // exp(-|x|^s) = prod_i exp(-|x_i|^{e_i})
        let mut ambient = 1.0;
        for e in exponents {
            let f = Integrand1D::new(0.0, f64::INFINITY, move |t: f64| (-t.powf(e)).exp())
                .tail(Tail::Exponential)
                .tail_scale(1.0);
            ambient *= 2.0 * integrate_radial(&f, spec)?.value;
        }
        Ok(ambient / self.radial_gauge_moment(s, spec)?)
    }

    /// Sphere measure through the iterated ambient integral of
    /// `exp(-|x|^s)` (dimension at most 3).
    pub fn sphere_measure_with(&self, s: f64, spec: &QuadratureSpec) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::param("s", "the gauge exponent must be positive"));
        }
        let f = |x: &[f64]| (-self.norm.eval(&self.group.weights, x).powf(s)).exp();
        let domain = AmbientDomain::Whole {
            symmetric: true,
            tail: Tail::Exponential,
            scales: None,
        };
        let ambient = integrate_ambient(&f, self.group.n, &domain, spec)?.value;
        Ok(ambient / self.radial_gauge_moment(s, spec)?)
    }

    fn radial_gauge_moment(&self, s: f64, spec: &QuadratureSpec) -> Result<f64> {
        let q1 = self.q() - 1.0;
        let f = Integrand1D::new(0.0, f64::INFINITY, move |r: f64| (-r.powf(s)).exp())
            .power_at_a(q1)
            .tail(Tail::Exponential);
        Ok(integrate_radial(&f, spec)?.value)
    }
}
