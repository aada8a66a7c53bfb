//! The critical (`p = Q`) Hardy inequality on a ball, its distance to the
//! logarithmic extremals, and the improved inequality for non-increasing
//! radial functions.
//!
//! With `t = log(R/r)` and `psi(t) = phi(r)` the critical integrals are
//! `int |Ru|^Q = A int |psi'|^Q dt` and
//! `int |u|^Q / (|x|^Q log^Q(R/|x|)) = A int |psi|^Q t^{-Q} dt`.

use serde::Serialize;
use statrs::function::gamma::gamma;

use super::{
    log_moment, log_quotient, sup_search, DeficitReport, DistanceForm, EvalOptions,
    ExponentParams, Inequality, Inputs, DEFICIT_SLACK,
};
use crate::calculus::critical_substitution;
use crate::error::{Error, Result};
use crate::group::Geometry;
use crate::profiles::{Angular, RadialProfile, SeparableFunction};
use crate::quadrature::{angular_integral, integrate_radial, Integrand1D, QuadratureSpec, Tail};

fn check_q(q: f64) -> Result<()> {
    if !(q >= 2.0) || !q.is_finite() {
        return Err(Error::param("Q", format!("needs Q >= 2, got {q}")));
    }
    Ok(())
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::param(name, format!("must be positive and finite, got {x}")));
    }
    Ok(())
}

/// The `t`-range of the support; `t_lo > 0` unless `allow_boundary`.
fn t_range(phi: &RadialProfile, radius: f64, allow_boundary: bool) -> Result<(f64, f64)> {
    let (lo, hi) = phi.log_support(radius);
    let inside = if allow_boundary {
        lo >= -1e-12
    } else {
        lo > 0.0
    };
    if !inside {
        return Err(Error::SupportViolation(format!(
            "{} is not supported in the {} ball of radius {radius}",
            phi.describe(),
            if allow_boundary { "closed" } else { "open" }
        )));
    }
    Ok((lo.max(0.0), hi))
}

/// `(int |psi'|^Q dt, int |psi|^Q w(t)^{-Q} dt)` with `w(t) = t + shift`.
fn critical_sides(
    phi: &RadialProfile,
    radius: f64,
    range: (f64, f64),
    q: f64,
    shift: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    let grad = log_moment(phi, radius, range, &|_| 1.0, &|j| j.d1, q, Tail::Exponential, quad)?;
    let weighted = log_moment(
        phi,
        radius,
        range,
        &|t| 1.0 / (t + shift),
        &|j| j.value,
        q,
        Tail::Algebraic,
        quad,
    )?;
    Ok((grad.value, weighted.value, grad.err_est + weighted.err_est))
}

/// The critical deficit
/// `S = int_{B(0,R)} |Ru|^Q - ((Q-1)/Q)^Q int_{B(0,R)} |u|^Q / (|x|^Q log^Q(R/|x|))`
/// and `d_cH(u; T, R)` over the `T` grid, in the proof form.
pub fn critical_hardy_deficit(
    u: &SeparableFunction,
    radius: f64,
    geom: &Geometry,
    opts: &EvalOptions,
) -> Result<DeficitReport> {
    check_positive("R", radius)?;
    let q = geom.q();
    check_q(q)?;
    let quad = &opts.quad;
    let phi = &u.profile;
    let exponents = ExponentParams {
        p: Some(q),
        radius: Some(radius),
        ..Default::default()
    };
    let inputs = Inputs::new(u, geom, exponents);
    if phi.is_zero() {
        let mut report = DeficitReport::new(Inequality::CriticalHardy, 0.0, 0.0, inputs);
        report.set_sup(Vec::new(), (1.0, 0.0), q);
        report.asserted_form = Some(DistanceForm::Proof);
        report.definition_form_distance = Some(0.0);
        return Ok(report);
    }
    let range = t_range(phi, radius, false)?;
    let a = angular_integral(geom, &u.angular, q, quad)?;
    let beta = (q - 1.0) / q;
    let (grad, weighted, err) = critical_sides(phi, radius, range, q, 0.0, quad)?;
    let c = beta.powf(q);
    let mut report = DeficitReport::new(Inequality::CriticalHardy, a * grad, c * a * weighted, inputs);
    report.quadrature_err = a * err * (1.0 + c);

    let v = critical_substitution(phi, radius, q)?.v;
    let dist = |t: f64| proof_form(&v, a, t, q, quad);
    let (grid, sup) = sup_search(&opts.grid, v.scale(), &dist)?;
    report.set_sup(grid, sup, q);
    report.asserted_form = Some(DistanceForm::Proof);
    report.definition_form_distance = definition_form(&v, a, sup.0, q, quad)?;
    report.inputs.exponents.t = Some(sup.0);
    report.holds = report.deficit_nonnegative();
    Ok(report)
}

/// `d_cH` in `s = 1/log(R/r)`: `(A int |v(s) - v(T)|^Q / |log(s/T)|^Q ds/s)^{1/Q}`.
fn proof_form(v: &RadialProfile, a: f64, t: f64, q: f64, quad: &QuadratureSpec) -> Result<f64> {
    if a == 0.0 || v.is_zero() {
        return Ok(0.0);
    }
    Ok((a * log_quotient(v, t, q, quad)?.value).powf(1.0 / q))
}

/// The definition-form distance. Its integrand behaves like
/// `|v(T)|^Q log(R/r)^{-Q-1} / r` near `r = R`, so it is finite only when
/// `v(T) = 0`, in which case it equals `(A T^{-Q} int |v|^Q s^{Q-1} ds)^{1/Q}`.
fn definition_form(
    v: &RadialProfile,
    a: f64,
    t: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<Option<f64>> {
    if a == 0.0 || v.is_zero() {
        return Ok(Some(0.0));
    }
    if v.value(t) != 0.0 {
        return Ok(None);
    }
    // sigma = log(T/s): s^Q T^{-Q} = e^{-Q sigma}
    let range = v.log_support(t);
    let m = log_moment(
        v,
        t,
        range,
        &|sigma| (-sigma).exp(),
        &|j| j.value,
        q,
        Tail::Exponential,
        quad,
    )?;
    Ok(Some((a * m.value).powf(1.0 / q)))
}

/// Both forms of the critical distance at one `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalDistance {
    /// Denominator `|log(T log(R/|x|))|^Q`; the asserted form.
    pub proof_form: f64,
    /// Denominator `|T log(R/|x|)|^Q`; `None` when the integral diverges.
    pub definition_form: Option<f64>,
}

/// `d_cH(u; T, R)` in both forms.
pub fn critical_hardy_distance(
    u: &SeparableFunction,
    t: f64,
    radius: f64,
    geom: &Geometry,
    quad: &QuadratureSpec,
) -> Result<CriticalDistance> {
    check_positive("T", t)?;
    check_positive("R", radius)?;
    let q = geom.q();
    check_q(q)?;
    if u.profile.is_zero() {
        return Ok(CriticalDistance {
            proof_form: 0.0,
            definition_form: Some(0.0),
        });
    }
    let a = angular_integral(geom, &u.angular, q, quad)?;
    let v = critical_substitution(&u.profile, radius, q)?.v;
    Ok(CriticalDistance {
        proof_form: proof_form(&v, a, t, q, quad)?,
        definition_form: definition_form(&v, a, t, q, quad)?,
    })
}

/// The critical deficit computed after the substitution `s = 1/log(R/r)`:
/// `S = A int (|s v' - beta v|^Q - beta^Q |v|^Q) ds/s`, `beta = (Q-1)/Q`.
///
/// An independent route to the value in [`critical_hardy_deficit`].
pub fn critical_deficit_in_s(
    u: &SeparableFunction,
    radius: f64,
    geom: &Geometry,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_positive("R", radius)?;
    let q = geom.q();
    check_q(q)?;
    if u.profile.is_zero() {
        return Ok(0.0);
    }
    let a = angular_integral(geom, &u.angular, q, quad)?;
    let v = critical_substitution(&u.profile, radius, q)?.v;
    let beta = (q - 1.0) / q;
    let bq = beta.powf(q);
    let anchor = v.scale();
    let (lo, hi) = v.log_support(anchor);
    // with sigma = log(anchor/s): s v' = -dV/dsigma
    let f = Integrand1D::new(lo, hi, |sigma: f64| {
        let j = v.log_jet(anchor, sigma);
        if j.value == 0.0 && j.d1 == 0.0 {
            return 0.0;
        }
        (j.d1 + beta * j.value).abs().powf(q) - bq * j.value.abs().powf(q)
    })
    .tail(Tail::Exponential)
    .breakpoints(v.log_breakpoints(anchor));
    Ok(a * integrate_radial(&f, quad)?.value)
}

/// `C(L, Q, q)` with
/// `C^{-1} = int_0^1 s^L log(1/s)^{(Q-1)q/Q} ds = (L+1)^{-(a+1)} Gamma(a+1)`,
/// `a = (Q-1) q / Q`.
pub fn constant_clqq(l: f64, q_dim: f64, q: f64) -> Result<f64> {
    let a = clqq_exponent(l, q_dim, q)?;
    Ok((l + 1.0).powf(a + 1.0) / gamma(a + 1.0))
}

/// [`constant_clqq`] from its defining integral.
pub fn constant_clqq_by_quadrature(
    l: f64,
    q_dim: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let a = clqq_exponent(l, q_dim, q)?;
    let f = Integrand1D::new(0.0, 1.0, |_| 1.0).power_at_a(l).log_at_b(a);
    Ok(1.0 / integrate_radial(&f, quad)?.value)
}

fn clqq_exponent(l: f64, q_dim: f64, q: f64) -> Result<f64> {
    if !(l > -1.0) || !l.is_finite() {
        return Err(Error::param("L", format!("needs L > -1, got {l}")));
    }
    if !(q_dim > 0.0) || !q_dim.is_finite() {
        return Err(Error::param("Q", format!("must be positive, got {q_dim}")));
    }
    let a = (q_dim - 1.0) * q / q_dim;
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::param("q", format!("needs (Q-1)q/Q > -1, got {a}")));
    }
    Ok(a)
}

/// Samples `phi' <= 0` and `phi >= 0` on the support.
fn check_nonincreasing(phi: &RadialProfile) -> Result<()> {
    let (lo, hi) = phi.support();
    let hi = if hi.is_finite() { hi } else { phi.scale() * 50.0 };
    let n = 400;
    let pts: Vec<f64> = (1..n)
        .map(|i| {
            let u = i as f64 / n as f64;
            if lo > 0.0 && hi / lo > 10.0 {
                (lo.ln() + u * (hi / lo).ln()).exp()
            } else {
                lo + u * (hi - lo)
            }
        })
        .collect();
    let scale = pts
        .iter()
        .map(|r| (phi.d1(*r) * r).abs())
        .fold(0.0, f64::max);
    for r in pts {
        let j = phi.jet(r);
        if j.d1 * r > 1e-12 * scale {
            return Err(Error::NotMonotone { r, derivative: j.d1 });
        }
        if j.value < 0.0 {
            return Err(Error::param("u", format!("must be non-negative, phi({r}) = {}", j.value)));
        }
    }
    Ok(())
}

/// The improved critical inequality for non-negative, non-increasing radial
/// `u` supported in `B(0,R)`:
/// `int |Ru|^Q - ((Q-1)/Q)^Q int |u|^Q / (|x|^Q log^Q(Re/|x|))
///   >= |S|^{1-Q/q} C^{Q/q} (int |u|^q / (|x|^Q log^alpha(Re/|x|)))^{Q/q}`.
///
/// The report's distance is the weighted `L^q` quantity in parentheses to
/// the power `1/q`, with power `Q`; `bound` is the right-hand side.
pub fn radial_improved_check(
    u: &SeparableFunction,
    q: f64,
    l: f64,
    radius: f64,
    geom: &Geometry,
    opts: &EvalOptions,
) -> Result<DeficitReport> {
    check_positive("R", radius)?;
    check_positive("q", q)?;
    let qd = geom.q();
    check_q(qd)?;
    if !(l > -1.0 && l < qd - 2.0) {
        return Err(Error::param("L", format!("needs -1 < L < Q-2 (L = {l}, Q = {qd})")));
    }
    let alpha = (qd - 1.0) * q / qd + l + 2.0;
    if alpha > qd * (1.0 + 1e-12) {
        return Err(Error::param(
            "q",
            format!("needs alpha = (Q-1)q/Q + L + 2 <= Q, got alpha = {alpha}"),
        ));
    }
    let c_amp = match u.angular {
        Angular::Constant(c) if c >= 0.0 => c,
        _ => {
            return Err(Error::param(
                "u",
                "the improved inequality is for non-negative radial functions",
            ))
        }
    };
    let quad = &opts.quad;
    let phi = &u.profile;
    let exponents = ExponentParams {
        p: Some(qd),
        q: Some(q),
        l: Some(l),
        radius: Some(radius),
        alpha: Some(alpha),
        ..Default::default()
    };
    let c = constant_clqq(l, qd, q)?;
    let inputs = Inputs::new(u, geom, exponents);
    let sphere = geom.sphere_measure()?;
    if phi.is_zero() || c_amp == 0.0 {
        let mut report = DeficitReport::new(Inequality::RadialImproved, 0.0, 0.0, inputs);
        report.set_sup(Vec::new(), (radius, 0.0), qd);
        report.sup_is_lower_bound = false;
        report.bound = Some(0.0);
        report.margin = Some(0.0);
        return Ok(report);
    }
    check_nonincreasing(phi)?;
    let range = t_range(phi, radius, true)?;
    let (grad, weighted, err) = critical_sides(phi, radius, range, qd, 1.0, quad)?;
    let lq = log_moment(
        phi,
        radius,
        range,
        &|t| (1.0 + t).powf(-alpha / q),
        &|j| j.value,
        q,
        Tail::Algebraic,
        quad,
    )?;
    let a_qd = c_amp.powf(qd) * sphere;
    let a_q = c_amp.powf(q) * sphere;
    let beta_q = ((qd - 1.0) / qd).powf(qd);
    let mut report = DeficitReport::new(
        Inequality::RadialImproved,
        a_qd * grad,
        beta_q * a_qd * weighted,
        inputs,
    );
    let norm = (a_q * lq.value).powf(1.0 / q);
    let bound = sphere.powf(1.0 - qd / q) * c.powf(qd / q) * norm.powf(qd);
    report.set_sup(Vec::new(), (radius, norm), qd);
    report.sup_is_lower_bound = false;
    report.bound = Some(bound);
    report.margin = Some(report.deficit - bound);
    report.quadrature_err = a_qd * err * (1.0 + beta_q) + a_q * lq.err_est;
    report.holds = report.deficit_nonnegative()
        && report.deficit - bound >= -DEFICIT_SLACK * (1.0 + report.lhs.abs());
    Ok(report)
}
