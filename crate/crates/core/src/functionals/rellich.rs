//! The second-order inequality
//! `int |R~u|^p / |x|^{(k-2)p} - K^p int |u|^p / |x|^{kp} >= C sup_R d_R(u; R)^2`
//! with `R~ = R^2 + (Q-1)/|x| R`, and the identities its proof rests on.
//!
//! In `tau = log(anchor/r)` the operator becomes
//! `r^2 R~u = psi'' - (Q-2) psi'`.

use super::{
    log_moment, log_quotient, signed_power, sup_search, DeficitReport, EvalOptions,
    ExponentParams, Inequality, Inputs,
};
use crate::calculus::{rellich_operator, rellich_transform};
use crate::error::{Error, Result};
use crate::group::Geometry;
use crate::profiles::{RadialProfile, SeparableFunction, SignedPower};
use crate::quadrature::{angular_integral, integrate_radial, Integrand1D, QuadratureSpec, Tail};

/// `K_{k,p} = (Q - kp)((k-2)p + (p-1)Q) / p^2`.
pub fn k_constant(k: u32, p: f64, q: f64) -> f64 {
    let k = k as f64;
    (q - k * p) * ((k - 2.0) * p + (p - 1.0) * q) / (p * p)
}

fn check(k: u32, p: f64, q: f64) -> Result<()> {
    if k < 2 {
        return Err(Error::param("k", format!("needs k >= 2, got {k}")));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param("p", format!("needs p >= 1, got {p}")));
    }
    if !(k as f64 * p < q) {
        return Err(Error::param(
            "k",
            format!("needs kp < Q (k = {k}, p = {p}, Q = {q})"),
        ));
    }
    Ok(())
}

/// `(int |R~u|^p r^{-(k-2)p}, int |u|^p r^{-kp})` per unit angular factor.
fn rellich_sides(
    phi: &RadialProfile,
    k: u32,
    p: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    let anchor = phi.scale();
    let g = (q - k as f64 * p) / p;
    let ln_a = anchor.ln();
    let weight = |tau: f64| (g * (ln_a - tau)).exp();
    let range = phi.log_support(anchor);
    let op = |j: crate::profiles::Jet| j.d2 - (q - 2.0) * j.d1;
    let lhs = log_moment(phi, anchor, range, &weight, &op, p, Tail::Exponential, quad)?;
    let rhs = log_moment(phi, anchor, range, &weight, &|j| j.value, p, Tail::Exponential, quad)?;
    Ok((lhs.value, rhs.value, lhs.err_est + rhs.err_est))
}

/// `w = sign(v)|v|^{p/2}` with `v = r^{(Q-kp)/p} phi`; the distance is the
/// logarithmic quotient of `w` with exponent 2.
fn distance_profile(phi: &RadialProfile, k: u32, p: f64, q: f64) -> Result<RadialProfile> {
    let v = rellich_transform(phi, q, k, p)?;
    Ok(RadialProfile::new(SignedPower::new(v, p / 2.0)?))
}

fn distance_with_factor(
    w: &RadialProfile,
    angular: f64,
    radius: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if w.is_zero() || angular == 0.0 {
        return Ok(0.0);
    }
    Ok((angular * log_quotient(w, radius, 2.0, quad)?.value).sqrt())
}

/// The deficit `J` with `d_R(u; R)` over the `R` grid, where
/// `d_R(u; R)^2 = int | |u|^{(p-2)/2} u - R^{(Q-kp)/2} |u(R)|^{(p-2)/2} u(R) |x|^{-(Q-kp)/2} |^2
///   / (|x|^{kp} log^2(R/|x|)) dx`.
pub fn rellich_deficit(
    u: &SeparableFunction,
    k: u32,
    p: f64,
    geom: &Geometry,
    opts: &EvalOptions,
) -> Result<DeficitReport> {
    let q = geom.q();
    check(k, p, q)?;
    let quad = &opts.quad;
    let a = angular_integral(geom, &u.angular, p, quad)?;
    let phi = &u.profile;
    let (lhs, rhs, err) = if phi.is_zero() || a == 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        rellich_sides(phi, k, p, q, quad)?
    };
    let c = k_constant(k, p, q).powf(p);
    let exponents = ExponentParams {
        p: Some(p),
        k: Some(k),
        ..Default::default()
    };
    let mut report = DeficitReport::new(Inequality::Rellich, a * lhs, c * a * rhs, Inputs::new(u, geom, exponents));
    report.quadrature_err = a * err * (1.0 + c);
    let w = distance_profile(phi, k, p, q)?;
    let dist = |r: f64| distance_with_factor(&w, a, r, quad);
    let (grid, sup) = sup_search(&opts.grid, phi.scale(), &dist)?;
    report.set_sup(grid, sup, 2.0);
    report.holds = report.deficit_nonnegative();
    Ok(report)
}

/// `d_R(u; R)`, the square root of the distance integral.
pub fn rellich_distance(
    u: &SeparableFunction,
    radius: f64,
    k: u32,
    p: f64,
    geom: &Geometry,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::param("R", format!("must be positive and finite, got {radius}")));
    }
    let q = geom.q();
    check(k, p, q)?;
    let a = angular_integral(geom, &u.angular, p, quad)?;
    let w = distance_profile(&u.profile, k, p, q)?;
    distance_with_factor(&w, a, radius, quad)
}

/// Largest relative residual over `r_grid` of the expansion
/// `-R~u = r^{k-2-Q/p} (K v - r^2 R~_k v)`, `v = r^{(Q-kp)/p} phi`,
/// `R~_k f = f'' + (2k + Q(p-2)/p - 1)/r f'`, scaled by `1 + |R~u|`.
pub fn rellich_expansion_residual(
    phi: &RadialProfile,
    k: u32,
    p: f64,
    q: f64,
    r_grid: &[f64],
) -> Result<f64> {
    check(k, p, q)?;
    let v = rellich_transform(phi, q, k, p)?;
    let (lo, hi) = phi.support();
    let kk = k_constant(k, p, q);
    let c = 2.0 * k as f64 + q * (p - 2.0) / p - 1.0;
    let e = k as f64 - 2.0 - q / p;
    let mut worst: f64 = 0.0;
    for &r in r_grid {
        if !(r > lo && r < hi) {
            return Err(Error::SupportViolation(format!(
                "grid point {r} is not inside the support ({lo}, {hi})"
            )));
        }
        let lhs = -rellich_operator(phi, q, r)?;
        let j = v.jet(r);
        let rhs = r.powf(e) * (kk * j.value - r * r * (j.d2 + c / r * j.d1));
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    Ok(worst)
}

fn radial_integral(
    v: &RadialProfile,
    quad: &QuadratureSpec,
    f: impl Fn(f64) -> f64,
) -> Result<f64> {
    if v.is_zero() {
        return Ok(0.0);
    }
    let (lo, hi) = v.support();
    let g = Integrand1D::new(lo, hi, f)
        .tail(Tail::Exponential)
        .tail_scale(v.scale())
        .breakpoints(v.breakpoints());
    Ok(integrate_radial(&g, quad)?.value)
}

/// `int_0^inf |v|^{p-2} v v' dr`, which vanishes when `v(0) = 0` and `v`
/// decays at infinity.
pub fn boundary_term_integral(v: &RadialProfile, p: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::param("p", format!("needs p > 1, got {p}")));
    }
    // the exact value is zero, so the tolerance is taken relative to the
    // size of the integrand rather than to the (cancelling) result
    let scale = radial_integral(v, quad, |r| {
        let j = v.jet(r);
        j.value.abs().powf(p - 1.0) * j.d1.abs()
    })?;
    let quad = quad.with_abs_tol(quad.abs_tol.max(quad.rel_tol * scale));
    radial_integral(v, &quad, |r| {
        let j = v.jet(r);
        signed_power(j.value, p - 1.0) * j.d1
    })
}

/// The two sides of `-int |v|^{p-2} v v'' r dr = (p-1) int |v|^{p-2} v'^2 r dr`.
pub fn parts_identity(v: &RadialProfile, p: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::param("p", format!("needs p >= 2, got {p}")));
    }
    let lhs = radial_integral(v, quad, |r| {
        let j = v.jet(r);
        -signed_power(j.value, p - 1.0) * j.d2 * r
    })?;
    let rhs = radial_integral(v, quad, |r| {
        let j = v.jet(r);
        if j.value == 0.0 && p > 2.0 {
            return 0.0;
        }
        j.value.abs().powf(p - 2.0) * j.d1 * j.d1 * r
    })?;
    Ok((lhs, (p - 1.0) * rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{make_profile, ProfileSpec};

    fn profile(spec: &str) -> RadialProfile {
        make_profile(&spec.parse::<ProfileSpec>().unwrap()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    /// `K` as an exact fraction when `p = num/den` with small integers.
    fn k_rational(k: i128, num: i128, den: i128, q: i128) -> f64 {
        // (Q - k p)((k-2)p + (p-1)Q)/p^2 with p = num/den
        let a = q * den - k * num;
        let b = (k - 2) * num + (num - den) * q;
        let n = a * b;
        let d = num * num;
        n as f64 / d as f64
    }

    #[test]
    fn k_constant_examples() {
        assert_eq!(k_constant(2, 2.0, 5.0), 1.25);
        assert_eq!(k_constant(2, 1.0, 3.0), 0.0);
        assert_eq!(k_constant(3, 2.0, 8.0), 5.0);
    }

    #[test]
    fn k_constant_matches_rational_arithmetic() {
        for (num, den) in [(3, 2), (2, 1), (3, 1)] {
            for k in [2, 3, 4] {
                for q in [5, 8, 13] {
                    let p = num as f64 / den as f64;
                    assert_eq!(
                        k_constant(k as u32, p, q as f64),
                        k_rational(k, num, den, q),
                        "k = {k}, p = {p}, Q = {q}"
                    );
                }
            }
        }
    }

    #[test]
    fn gaussian_in_five_dimensions() {
        // phi = e^{-r^2/2}, R~phi = (r^2 - 5) e^{-r^2/2};
        // J = |S^4| (int (r^2-5)^2 e^{-r^2} r^4 dr - 25/16 int e^{-r^2} dr)
        let geom = Geometry::euclidean(5).unwrap();
        let u = SeparableFunction::radial(profile("gaussian:sigma=1"));
        let rep = rellich_deficit(&u, 2, 2.0, &geom, &EvalOptions::default()).unwrap();
        let quad = QuadratureSpec::default();
        let f = Integrand1D::new(0.0, f64::INFINITY, |r: f64| {
            let e = (-r * r).exp();
            (r * r - 5.0).powi(2) * e * r.powi(4) - 25.0 / 16.0 * e
        });
        let expect =
            geom.sphere_measure().unwrap() * integrate_radial(&f, &quad).unwrap().value;
        assert!(rel(rep.deficit, expect) < 1e-9, "{} vs {expect}", rep.deficit);
        assert!(rep.deficit > 0.0 && rep.holds);
        assert_eq!(rep.distance_power, Some(2.0));
    }

    #[test]
    fn zero_function() {
        let geom = Geometry::euclidean(5).unwrap();
        let u = SeparableFunction::radial(RadialProfile::zero());
        let rep = rellich_deficit(&u, 2, 2.0, &geom, &EvalOptions::default()).unwrap();
        assert_eq!((rep.lhs, rep.deficit), (0.0, 0.0));
        assert!(rellich_deficit(&u, 3, 2.0, &geom, &EvalOptions::default()).is_err());
    }

    #[test]
    fn distance_matches_a_direct_radial_integral() {
        let geom = Geometry::euclidean(7).unwrap();
        let phi = profile("bump:m=4,R=1");
        let u = SeparableFunction::radial(phi.clone());
        let (k, p, q, radius) = (2u32, 3.0, 7.0, 0.5);
        let quad = QuadratureSpec::default();
        let d = rellich_distance(&u, radius, k, p, &geom, &quad).unwrap();
        let h = (q - k as f64 * p) / 2.0;
        // the integrand is |w(r) - w(R)|^2 / (r log^2(R/r)), w = r^h |u|^{(p-2)/2} u
        let w = |r: f64| match phi.value(r) {
            0.0 => 0.0,
            x => r.powf(h) * signed_power(x, p / 2.0),
        };
        let w0 = w(radius);
        let f = |r: f64| ((w(r) - w0) / (radius / r).ln()).powi(2) / r;
        // away from R, s = 1/|log(R/r)| turns dr / (r log^2) into ds
        let inner = |s: f64| (w(radius * (-1.0 / s).exp()) - w0).powi(2);
        let outer = |s: f64| (w(radius * (1.0 / s).exp()) - w0).powi(2);
        let e = std::f64::consts::E;
        let spec = quad.with_rel_tol(1e-10);
        let parts = [
            Integrand1D::new(0.0, 1.0, inner),
            Integrand1D::new(radius / e, radius, f),
            Integrand1D::new(radius, radius * e, f).breakpoints([1.0]),
            Integrand1D::new(0.0, 1.0, outer).breakpoints([1.0 / (1.0 / radius).ln()]),
        ];
        let direct: f64 = parts
            .iter()
            .map(|g| integrate_radial(g, &spec).unwrap().value)
            .sum::<f64>()
            * geom.sphere_measure().unwrap();
        assert!(rel(d * d, direct) < 1e-7, "{} vs {direct}", d * d);
    }

    #[test]
    fn expansion_residual_is_small() {
        let grid: Vec<f64> = (1..40).map(|i| i as f64 / 40.0).collect();
        for spec in ["bump:m=4,R=1", "gaussian:sigma=0.7"] {
            let phi = profile(spec);
            let res = rellich_expansion_residual(&phi, 2, 2.0, 5.0, &grid).unwrap();
            assert!(res < 1e-8, "{spec}: {res}");
        }
        let phi = profile("bump:m=4,R=1");
        assert!(matches!(
            rellich_expansion_residual(&phi, 2, 2.0, 5.0, &[0.5, 1.0]),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn parts_identities() {
        let quad = QuadratureSpec::default();
        for spec in ["bump:m=4,R=1", "gaussian:sigma=1", "mollified_power:gamma=-1,eps=0.1,M=5"] {
            let phi = profile(spec);
            for (k, p, q) in [(2, 2.0, 5.0), (2, 3.0, 7.0), (3, 2.0, 7.0)] {
                let v = rellich_transform(&phi, q, k, p).unwrap();
                let b = boundary_term_integral(&v, p, &quad).unwrap();
                assert!(b.abs() < 1e-9, "{spec}: {b}");
                let (l, r) = parts_identity(&v, p, &quad).unwrap();
                assert!(rel(l, r) < 1e-8, "{spec}: {l} vs {r}");
            }
        }
    }
}
