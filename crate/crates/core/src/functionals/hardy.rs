//! The `L^p` Hardy inequality with its distance remainder and the
//! logarithmic Hardy inequality with constant `p/(p-1)`.

use serde::Serialize;

use super::{
    log_moment, log_quotient, sup_search, DeficitReport, EvalOptions, ExponentParams,
    Inequality, Inputs, SHARP_SLACK,
};
use crate::calculus::hardy_transform;
use crate::error::{Error, Result};
use crate::group::Geometry;
use crate::profiles::{RadialProfile, SeparableFunction};
use crate::quadrature::{angular_integral, QuadratureSpec, Tail};

fn check_exponent(p: f64, q: f64) -> Result<()> {
    if !(p >= 2.0 && p < q) {
        return Err(Error::param(
            "p",
            format!("the stability estimate needs 2 <= p < Q (p = {p}, Q = {q})"),
        ));
    }
    Ok(())
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::param(name, format!("must be positive and finite, got {r}")));
    }
    Ok(())
}

/// `(int |Ru|^p, int |u|^p / |x|^p)` for the profile alone (unit angular
/// factor), integrated in `tau = log(anchor/r)` as
/// `int (|psi'| r^{(Q-p)/p})^p` and `int (|psi| r^{(Q-p)/p})^p`.
pub(crate) fn hardy_sides(
    phi: &RadialProfile,
    q: f64,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    let anchor = phi.scale();
    let g = (q - p) / p;
    let ln_a = anchor.ln();
    let weight = |tau: f64| (g * (ln_a - tau)).exp();
    let range = phi.log_support(anchor);
    let lhs = log_moment(phi, anchor, range, &weight, &|j| j.d1, p, Tail::Exponential, quad)?;
    let rhs = log_moment(phi, anchor, range, &weight, &|j| j.value, p, Tail::Exponential, quad)?;
    Ok((lhs.value, rhs.value, lhs.err_est + rhs.err_est))
}

fn distance_with_factor(
    phi: &RadialProfile,
    angular: f64,
    radius: f64,
    q: f64,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if phi.is_zero() || angular == 0.0 {
        return Ok(0.0);
    }
    let v = hardy_transform(phi, q, p)?;
    let k = log_quotient(&v, radius, p, quad)?;
    Ok((angular * k.value).powf(1.0 / p))
}

/// The Hardy deficit `int |Ru|^p - ((Q-p)/p)^p int |u|^p/|x|^p` with the
/// distance `d_H(u; R)` over the configured `R` grid.
pub fn hardy_deficit(
    u: &SeparableFunction,
    geom: &Geometry,
    p: f64,
    opts: &EvalOptions,
) -> Result<DeficitReport> {
    let q = geom.q();
    check_exponent(p, q)?;
    let quad = &opts.quad;
    let a = angular_integral(geom, &u.angular, p, quad)?;
    let phi = &u.profile;
    let (lhs, rhs, err) = if phi.is_zero() || a == 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        hardy_sides(phi, q, p, quad)?
    };
    let c = ((q - p) / p).powf(p);
    let mut report = DeficitReport::new(
        Inequality::LpHardy,
        a * lhs,
        c * a * rhs,
        Inputs::new(u, geom, ExponentParams::with_p(p)),
    );
    report.quadrature_err = a * err * (1.0 + c);
    let dist = |r: f64| distance_with_factor(phi, a, r, q, p, quad);
    let (grid, sup) = sup_search(&opts.grid, phi.scale(), &dist)?;
    report.set_sup(grid, sup, p);
    report.holds = report.deficit_nonnegative();
    Ok(report)
}

/// `d_H(u; R)`: the `L^p` distance of `u` from the extremal profile
/// `|x|^{-(Q-p)/p}` matched at radius `R`, with the logarithmic weight.
pub fn hardy_distance(
    u: &SeparableFunction,
    radius: f64,
    geom: &Geometry,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_radius("R", radius)?;
    let q = geom.q();
    check_exponent(p, q)?;
    let a = angular_integral(geom, &u.angular, p, quad)?;
    distance_with_factor(&u.profile, a, radius, q, p, quad)
}

/// Both sides of the logarithmic Hardy inequality
/// `||(u - u_R) / (|x|^{Q/p} log(R/|x|))||_p <= p/(p-1) || |x|^{(p-Q)/p} Ru ||_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CknCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, zero when both vanish.
    pub ratio: f64,
    /// The sharp constant `p/(p-1)`.
    pub constant: f64,
    pub holds: bool,
    pub quadrature_err: f64,
}

/// Evaluates both sides for `u` supported in an annulus around the origin.
pub fn ckn_check(
    u: &SeparableFunction,
    radius: f64,
    geom: &Geometry,
    p: f64,
    quad: &QuadratureSpec,
) -> Result<CknCheck> {
    check_radius("R", radius)?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::param("p", format!("needs 1 < p < inf, got {p}")));
    }
    let phi = &u.profile;
    let constant = p / (p - 1.0);
    if phi.is_zero() {
        return Ok(CknCheck {
            lhs: 0.0,
            rhs: 0.0,
            ratio: 0.0,
            constant,
            holds: true,
            quadrature_err: 0.0,
        });
    }
    let (lo, hi) = phi.support();
    if !(lo > 0.0) || !hi.is_finite() {
        return Err(Error::SupportViolation(format!(
            "{} must be compactly supported away from the origin",
            phi.describe()
        )));
    }
    let a = angular_integral(geom, &u.angular, p, quad)?;
    let quotient = log_quotient(phi, radius, p, quad)?;
    let range = phi.log_support(radius);
    let grad = log_moment(phi, radius, range, &|_| 1.0, &|j| j.d1, p, Tail::Algebraic, quad)?;
    let lhs = (a * quotient.value).powf(1.0 / p);
    let rhs = (a * grad.value).powf(1.0 / p);
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CknCheck {
        lhs,
        rhs,
        ratio,
        constant,
        holds: lhs <= constant * rhs * (1.0 + SHARP_SLACK),
        quadrature_err: a * (quotient.err_est + grad.err_est),
    })
}

/// The logarithmic Hardy inequality as a deficit:
/// `lhs = int | |x|^{(p-Q)/p} Ru |^p`,
/// `rhs_constant_part = ((p-1)/p)^p int |u - u_R|^p / (|x|^Q |log(R/|x|)|^p)`.
pub fn ckn_report(
    u: &SeparableFunction,
    radius: f64,
    geom: &Geometry,
    p: f64,
    opts: &EvalOptions,
) -> Result<DeficitReport> {
    let check = ckn_check(u, radius, geom, p, &opts.quad)?;
    let exponents = ExponentParams {
        p: Some(p),
        radius: Some(radius),
        ..Default::default()
    };
    let mut report = DeficitReport::new(
        Inequality::Ckn,
        check.rhs.powf(p),
        (check.lhs / check.constant).powf(p),
        Inputs::new(u, geom, exponents),
    );
    report.ratio = Some(check.ratio);
    report.sharp_constant = Some(check.constant);
    report.quadrature_err = check.quadrature_err;
    report.holds = check.holds && report.deficit_nonnegative();
    Ok(report)
}
