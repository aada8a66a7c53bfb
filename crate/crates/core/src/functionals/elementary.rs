//! Scalar inequalities for `|a - b|^p` used by every remainder estimate.

use crate::error::{Error, Result};

/// `sign(x) |x|^a`, zero at `x = 0`.
pub fn signed_power(x: f64, a: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(a)
    }
}

/// Which scalar inequality to test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// `|a-b|^p - |a|^p >= -p |a|^{p-2} a b` for `p >= 1`.
    First,
    /// `|a-b|^p - |a|^p >= -p |a|^{p-2} a b + c |b|^p` for `p >= 2`.
    Second { c: f64 },
    /// `(a-b)^p + p a^{p-1} b - a^p >= |b|^p` for `p >= 2`, `a >= 0`, `a >= b`.
    Third,
}

/// Left minus right side of the chosen inequality.
pub fn elementary_ineq_check(a: f64, b: f64, p: f64, variant: Variant) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::param("a, b", "must be finite"));
    }
    let first = |p: f64| (a - b).abs().powf(p) - a.abs().powf(p) + p * signed_power(a, p - 1.0) * b;
    match variant {
        Variant::First => {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::param("p", format!("needs p >= 1, got {p}")));
            }
            Ok(first(p))
        }
        Variant::Second { c } => {
            check_p2(p)?;
            if !c.is_finite() {
                return Err(Error::param("C", "must be finite"));
            }
            Ok(first(p) - c * b.abs().powf(p))
        }
        Variant::Third => {
            check_p2(p)?;
            if !(a >= 0.0 && a - b >= 0.0) {
                return Err(Error::param(
                    "a, b",
                    format!("needs a >= 0 and a - b >= 0 (a = {a}, b = {b})"),
                ));
            }
            Ok((a - b).powf(p) + p * a.powf(p - 1.0) * b - a.powf(p) - b.abs().powf(p))
        }
    }
}

fn check_p2(p: f64) -> Result<()> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::param("p", format!("needs p >= 2, got {p}")));
    }
    Ok(())
}

/// Smallest admissible constant of the second variant, estimated as the
/// minimum over the unit circle of
/// `(|a-b|^p - |a|^p + p sign(a) |a|^{p-1} b) / |b|^p`,
/// by `samples` angles followed by golden-section refinement around the
/// best one.
pub fn estimate_cp(p: f64, samples: usize) -> Result<f64> {
    check_p2(p)?;
    if samples < 4 {
        return Err(Error::param("samples", "needs at least 4 angles"));
    }
    let h = |theta: f64| {
        let (b, a) = theta.sin_cos();
        first_over_bp(a, b, p)
    };
    // the ratio is invariant under (a, b) -> (-a, -b): half a turn suffices
    let step = std::f64::consts::PI / samples as f64;
    let (mut best_i, mut best) = (0, f64::INFINITY);
    for i in 0..samples {
        let v = h((i as f64 + 0.5) * step);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let centre = (best_i as f64 + 0.5) * step;
    let (lo, hi) = (
        (centre - step).max(step * 1e-3),
        (centre + step).min(std::f64::consts::PI - step * 1e-3),
    );
    let refined = super::golden_max(lo, hi, 80, &|t| Ok(-h(t)))?;
    Ok(best.min(-refined.1))
}

fn first_over_bp(a: f64, b: f64, p: f64) -> f64 {
    let num = (a - b).abs().powf(p) - a.abs().powf(p) + p * signed_power(a, p - 1.0) * b;
    num / b.abs().powf(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        for p in [1.0, 1.5, 2.0, 3.7] {
            assert_eq!(elementary_ineq_check(1.0, 0.0, p, Variant::First).unwrap(), 0.0);
        }
        for (a, b) in [(0.3, -2.0), (0.0, 1.0), (-1.5, 0.25)] {
            let m = elementary_ineq_check(a, b, 2.0, Variant::Second { c: 1.0 }).unwrap();
            assert!(m.abs() < 1e-14, "{m}");
        }
        let m = elementary_ineq_check(1.0, 0.5, 2.0, Variant::Third).unwrap();
        assert!(m.abs() < 1e-15);
    }

    #[test]
    fn preconditions() {
        assert!(elementary_ineq_check(1.0, 1.0, 0.5, Variant::First).is_err());
        assert!(elementary_ineq_check(1.0, 1.0, 1.5, Variant::Second { c: 0.1 }).is_err());
        assert!(elementary_ineq_check(-1.0, -2.0, 3.0, Variant::Third).is_err());
        assert!(elementary_ineq_check(1.0, 2.0, 3.0, Variant::Third).is_err());
        assert!(estimate_cp(1.9, 100).is_err());
    }

    #[test]
    fn quadratic_constant_is_one() {
        assert!((estimate_cp(2.0, 1000).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cubic_constant_matches_its_closed_form() {
        // with b = 1, a = t in [0, 1] the ratio is 1 - 3t + 6t^2 - 2t^3,
        // minimised at t = 1 - 1/sqrt 2
        let exact = 2.0 - 2f64.sqrt();
        let got = estimate_cp(3.0, 2000).unwrap();
        assert!((got - exact).abs() < 1e-9, "{got} vs {exact}");
    }

    #[test]
    fn estimates_are_stable_under_grid_doubling() {
        for p in [3.0, 4.0, 5.5] {
            let a = estimate_cp(p, 500).unwrap();
            let b = estimate_cp(p, 1000).unwrap();
            assert!((a - b).abs() < 1e-4, "p = {p}: {a} vs {b}");
            assert!(a > 0.0 && a <= 1.0);
        }
    }

    #[test]
    fn brute_force_agrees() {
        // plain dense scan over the circle as an oracle
        let p = 4.0;
        let n = 200_000;
        let scan = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * 2.0 * std::f64::consts::PI / n as f64;
                first_over_bp(t.cos(), t.sin(), p)
            })
            .fold(f64::INFINITY, f64::min);
        let est = estimate_cp(p, 400).unwrap();
        assert!(est <= scan + 1e-12 && scan - est < 1e-6, "{est} vs {scan}");
    }

    fn tol(a: f64, b: f64, p: f64) -> f64 {
        1e-12 * (a.abs() + b.abs()).powf(p)
    }

    proptest! {
        #[test]
        fn first_variant_holds(a in -10.0..10.0f64, b in -10.0..10.0f64, p in 1.0..8.0f64) {
            let m = elementary_ineq_check(a, b, p, Variant::First).unwrap();
            prop_assert!(m >= -tol(a, b, p), "margin {}", m);
        }

        #[test]
        fn second_variant_holds(a in -10.0..10.0f64, b in -10.0..10.0f64, i in 0usize..4) {
            let p = [2.0, 3.0, 4.0, 6.5][i];
            let c = estimate_cp(p, 256).unwrap() * (1.0 - 1e-6);
            let m = elementary_ineq_check(a, b, p, Variant::Second { c }).unwrap();
            prop_assert!(m >= -tol(a, b, p), "margin {}", m);
        }

        #[test]
        fn third_variant_holds(a in 0.0..10.0f64, gap in 0.0..20.0f64, p in 2.0..8.0f64) {
            let b = a - gap;
            let m = elementary_ineq_check(a, b, p, Variant::Third).unwrap();
            prop_assert!(m >= -tol(a, b, p), "margin {}", m);
        }
    }
}
