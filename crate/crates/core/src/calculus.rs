//! Radial derivative, the Rellich-type operator and the changes of variables
//! used to reduce the inequalities to one-dimensional ones.

use crate::error::{Error, Result};
use crate::group::{Geometry, GroupLaw};
use crate::profiles::{CriticalLift, CriticalS, PowerWeighted, RadialProfile, SeparableFunction};

/// `d/dt u(D_t y)` at `t = |x|`, where `y = D_{1/|x|} x` lies on the unit
/// quasi-sphere. For separable `u` this is `phi'(|x|) omega(y)`.
pub fn radial_derivative(u: &SeparableFunction, geom: &Geometry, x: &[f64]) -> Result<f64> {
    let r = geom.quasi_norm(x)?;
    if r == 0.0 {
        return Err(Error::param("x", "the radial derivative is undefined at the origin"));
    }
    let w = if u.is_radial() {
        u.angular.eval(&[])
    } else {
        u.angular.eval(&geom.dilate(1.0 / r, x)?)
    };
    Ok(u.profile.d1(r) * w)
}

/// Radial derivative of a general smooth function from its gradient:
/// `(1/|x|) sum_i nu_i x_i d_i u(x)` (abelian groups only).
pub fn euler_radial_derivative(geom: &Geometry, x: &[f64], grad: &[f64]) -> Result<f64> {
    if geom.group().law != GroupLaw::Abelian {
        return Err(Error::InvalidGroup(
            "the Euler form of the radial derivative is provided on abelian groups only".into(),
        ));
    }
    if grad.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: grad.len(),
        });
    }
    let r = geom.quasi_norm(x)?;
    if r == 0.0 {
        return Err(Error::param("x", "the radial derivative is undefined at the origin"));
    }
    let s: f64 = geom
        .group()
        .weights()
        .iter()
        .zip(x)
        .zip(grad)
        .map(|((nu, xi), gi)| nu * xi * gi)
        .sum();
    Ok(s / r)
}

/// `phi''(r) + (Q-1)/r phi'(r)`.
pub fn rellich_operator(phi: &RadialProfile, q: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::param("r", format!("must be positive, got {r}")));
    }
    let j = phi.jet(r);
    Ok(j.d2 + (q - 1.0) / r * j.d1)
}

/// `r^{(Q-p)/p} phi(r)`.
pub fn hardy_transform(phi: &RadialProfile, q: f64, p: f64) -> Result<RadialProfile> {
    let e = (q - p) / p;
    if !(e > 0.0) {
        return Err(Error::param(
            "p",
            format!("the transform needs 1 < p < Q (exponent {e})"),
        ));
    }
    Ok(RadialProfile::new(PowerWeighted::new(phi.clone(), e)))
}

/// `r^{(Q-kp)/p} phi(r)`, the second-order variant.
pub fn rellich_transform(phi: &RadialProfile, q: f64, k: u32, p: f64) -> Result<RadialProfile> {
    let e = (q - k as f64 * p) / p;
    if !(e > 0.0) {
        return Err(Error::param(
            "k",
            format!("the transform needs kp < Q (exponent {e})"),
        ));
    }
    Ok(RadialProfile::new(PowerWeighted::new(phi.clone(), e)))
}

/// The change of variables `s = 1/log(R/r)`, `v(s) = s^{(Q-1)/Q} phi(r)`.
#[derive(Debug, Clone)]
pub struct CriticalSubstitution {
    /// `v` as a profile in `s`.
    pub v: RadialProfile,
    pub radius: f64,
}

impl CriticalSubstitution {
    pub fn s_of_r(&self, r: f64) -> f64 {
        1.0 / (self.radius / r).ln()
    }

    pub fn r_of_s(&self, s: f64) -> f64 {
        self.radius * (-1.0 / s).exp()
    }

    /// `ds/dr = s / (r log(R/r))`.
    pub fn ds_dr(&self, r: f64) -> f64 {
        let l = (self.radius / r).ln();
        1.0 / (r * l * l)
    }
}

/// Requires `phi` supported in the open ball `B(0, R)`.
pub fn critical_substitution(phi: &RadialProfile, radius: f64, q: f64) -> Result<CriticalSubstitution> {
    check_q(q)?;
    Ok(CriticalSubstitution {
        v: RadialProfile::new(CriticalS::new(phi.clone(), radius, (q - 1.0) / q)?),
        radius,
    })
}

/// `u(r) = log(R/r)^{(Q-1)/Q} chi(1/log(R/r))`; the substitution maps it
/// back to `chi`.
pub fn critical_lift(chi: &RadialProfile, radius: f64, q: f64) -> Result<RadialProfile> {
    check_q(q)?;
    Ok(RadialProfile::new(CriticalLift::new(chi.clone(), radius, (q - 1.0) / q)?))
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 2.0) || !q.is_finite() {
        return Err(Error::param("Q", format!("needs Q >= 2, got {q}")));
    }
    Ok(())
}
