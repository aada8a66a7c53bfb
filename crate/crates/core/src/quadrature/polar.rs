use std::cell::RefCell;
use std::f64::consts::PI;

use super::{integrate_radial, Estimate, Integrand1D, QuadratureSpec};
use crate::error::{Error, Result};
use crate::group::{Geometry, QuasiNormSpec};
use crate::profiles::Angular;

/// `int_sphere |omega|^power dsigma` over the unit quasi-sphere.
///
/// Constant angular factors only need the sphere measure. Angular functions
/// are integrated over the Euclidean unit sphere of dimension 1, 2 or 3.
pub fn angular_integral(
    geom: &Geometry,
    angular: &Angular,
    power: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    match angular {
        Angular::Constant(c) => Ok(c.abs().powf(power) * geom.sphere_measure()?),
        Angular::Function(w) => {
            if geom.norm() != &QuasiNormSpec::Euclidean {
                return Err(Error::IncompatibleNorm {
                    norm: geom.norm().to_string(),
                    reason: "non-constant angular factors need the Euclidean norm".into(),
                });
            }
            let g = |y: &[f64]| w(y).abs().powf(power);
            match geom.group().n {
                1 => Ok(g(&[1.0]) + g(&[-1.0])),
                2 => {
                    let f = Integrand1D::new(0.0, 2.0 * PI, |t: f64| g(&[t.cos(), t.sin()]));
                    Ok(integrate_radial(&f, spec)?.value)
                }
                3 => {
                    let inner = spec.inner();
                    let failure: RefCell<Option<Error>> = RefCell::new(None);
                    let f = Integrand1D::new(0.0, PI, |theta: f64| {
                        let (st, ct) = theta.sin_cos();
                        let ring = Integrand1D::new(0.0, 2.0 * PI, |ph: f64| {
                            g(&[st * ph.cos(), st * ph.sin(), ct])
                        });
                        match integrate_radial(&ring, &inner) {
                            Ok(e) => e.value * st,
                            Err(e) => {
                                failure.borrow_mut().get_or_insert(e);
                                0.0
                            }
                        }
                    });
                    let v = integrate_radial(&f, spec);
                    let failed = failure.borrow_mut().take();
                    match failed {
                        Some(e) => Err(e),
                        None => Ok(v?.value),
                    }
                }
                n => Err(Error::DimensionTooLarge(n)),
            }
        }
    }
}

/// Polar form of `int_G F(x) dx` for `F(ry) = g(r) |omega(y)|^power`.
///
/// `radial` is `g` on its interval; the Jacobian `r^{Q-1}` is applied here,
/// so `radial` keeps its own endpoint annotations.
pub fn integrate_polar(
    geom: &Geometry,
    angular: &Angular,
    power: f64,
    radial: &Integrand1D<'_>,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let a = angular_integral(geom, angular, power, spec)?;
    if a == 0.0 {
        return Ok(Estimate::zero());
    }
    let q1 = geom.q() - 1.0;
    let mut with_jacobian = Integrand1D::new(radial.a, radial.b, |r: f64| {
        let v = radial.raw(r);
        if v == 0.0 {
            0.0
        } else {
            v * r.powf(q1)
        }
    })
    .tail(radial.tail)
    .breakpoints(radial.breakpoints.iter().copied());
    with_jacobian.power_at_a = radial.power_at_a;
    with_jacobian.log_at_b = radial.log_at_b;
    with_jacobian.tail_scale = radial.tail_scale;
    let mut est = integrate_radial(&with_jacobian, spec)?;
    est.value *= a;
    est.err_est *= a;
    Ok(est)
}
