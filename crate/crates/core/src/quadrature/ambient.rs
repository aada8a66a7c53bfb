use std::cell::RefCell;

use super::{integrate_radial, Estimate, Integrand1D, QuadratureSpec, Tail};
use crate::error::{Error, Result};

/// Integration region for [`integrate_ambient`].
#[derive(Debug, Clone, PartialEq)]
pub enum AmbientDomain {
    /// A coordinate box `[lo_1, hi_1] x ... x [lo_n, hi_n]`.
    Box(Vec<(f64, f64)>),
    /// All of `R^n`. With `symmetric` the integrand must be even in every
    /// coordinate and only the positive orthant is integrated. `scales`
    /// gives the decay length of each coordinate for the tail maps
    /// (default 1).
    Whole {
        symmetric: bool,
        tail: Tail,
        scales: Option<Vec<f64>>,
    },
}

/// Iterated adaptive quadrature of `f` over an `n`-dimensional region.
///
/// Intended as an independent reference for the polar formulas, so it is
/// limited to `n <= 3`. Inner integrals use [`QuadratureSpec::inner`].
pub fn integrate_ambient(
    f: &dyn Fn(&[f64]) -> f64,
    n: usize,
    domain: &AmbientDomain,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::param("n", "dimension must be at least 1"));
    }
    if n > 3 {
        return Err(Error::DimensionTooLarge(n));
    }
    spec.validate()?;
    let (ranges, factor, tail, scales) = match domain {
        AmbientDomain::Box(b) => {
            if b.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: b.len(),
                });
            }
            (b.clone(), 1.0, Tail::Algebraic, vec![1.0; n])
        }
        AmbientDomain::Whole {
            symmetric,
            tail,
            scales,
        } => {
            let scales = scales.clone().unwrap_or_else(|| vec![1.0; n]);
            if scales.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: scales.len(),
                });
            }
            if let Some(s) = scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
                return Err(Error::param("scales", format!("tail scales must be positive, got {s}")));
            }
            if *symmetric {
                (vec![(0.0, f64::INFINITY); n], 2f64.powi(n as i32), *tail, scales)
            } else {
                (
                    vec![(f64::NEG_INFINITY, f64::INFINITY); n],
                    1.0,
                    *tail,
                    scales,
                )
            }
        }
    };
    let mut x = vec![0.0; n];
    let mut est = nested(f, &ranges, &scales, tail, 0, &mut x, spec)?;
    est.value *= factor;
    est.err_est *= factor;
    Ok(est)
}

fn nested(
    f: &dyn Fn(&[f64]) -> f64,
    ranges: &[(f64, f64)],
    scales: &[f64],
    tail: Tail,
    level: usize,
    x: &mut [f64],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let (lo, hi) = ranges[level];
    let last = level + 1 == ranges.len();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let prefix = x.to_vec();
    let inner_spec = spec.inner();
    let g = |t: f64| -> f64 {
        let mut point = prefix.clone();
        point[level] = t;
        if last {
            return f(&point);
        }
        if failure.borrow().is_some() {
            return 0.0;
        }
        match nested(f, ranges, scales, tail, level + 1, &mut point, &inner_spec) {
            Ok(e) => e.value,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    let integrand = Integrand1D::new(lo, hi, g).tail(tail).tail_scale(scales[level]);
    let est = integrate_radial(&integrand, spec);
    let failed = failure.borrow_mut().take();
    if let Some(e) = failed {
        return Err(e);
    }
    est
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_in_the_plane() {
        let f = |x: &[f64]| (-x[0] * x[0] - x[1] * x[1]).exp();
        for symmetric in [true, false] {
            let dom = AmbientDomain::Whole {
                symmetric,
                tail: Tail::Exponential,
                scales: None,
            };
            let est = integrate_ambient(&f, 2, &dom, &QuadratureSpec::default()).unwrap();
            assert!((est.value - PI).abs() < 1e-10 * PI, "{}", est.value);
        }
    }

    #[test]
    fn quartic_gaussian_of_the_gauge() {
        // int_{R^3} exp(-((x^2+y^2)^2 + z^2)) = sqrt(pi) * pi * sqrt(pi)/2
        let f = |x: &[f64]| {
            let a = x[0] * x[0] + x[1] * x[1];
            (-(a * a + x[2] * x[2])).exp()
        };
        let dom = AmbientDomain::Whole {
            symmetric: true,
            tail: Tail::Exponential,
            scales: None,
        };
        let spec = QuadratureSpec::default().with_rel_tol(1e-9);
        let est = integrate_ambient(&f, 3, &dom, &spec).unwrap();
        let exact = PI * PI / 2.0;
        assert!((est.value - exact).abs() < 1e-8 * exact, "{}", est.value);
    }

    #[test]
    fn slow_exponential_decay_with_matching_scales() {
        // int_{R^2} exp(-|x|/6 - |y|/3) = (2 * 6) * (2 * 3)
        let f = |x: &[f64]| (-x[0].abs() / 6.0 - x[1].abs() / 3.0).exp();
        let dom = AmbientDomain::Whole {
            symmetric: true,
            tail: Tail::Exponential,
            scales: Some(vec![6.0, 3.0]),
        };
        let spec = QuadratureSpec::default().with_rel_tol(1e-9);
        let est = integrate_ambient(&f, 2, &dom, &spec).unwrap();
        assert!((est.value - 72.0).abs() < 1e-8 * 72.0, "{}", est.value);
    }

    #[test]
    fn bad_scales_are_rejected() {
        let f = |_: &[f64]| 1.0;
        for scales in [vec![1.0], vec![1.0, 0.0]] {
            let dom = AmbientDomain::Whole {
                symmetric: true,
                tail: Tail::Exponential,
                scales: Some(scales),
            };
            assert!(integrate_ambient(&f, 2, &dom, &QuadratureSpec::default()).is_err());
        }
    }

    #[test]
    fn unit_ball_indicator() {
        let f = |x: &[f64]| {
            if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                1.0
            } else {
                0.0
            }
        };
        let dom = AmbientDomain::Box(vec![(0.0, 1.0); 3]);
        let spec = QuadratureSpec::default().with_rel_tol(1e-5);
        let est = integrate_ambient(&f, 3, &dom, &spec).unwrap();
        let exact = 4.0 * PI / 3.0 / 8.0;
        // Jumps inside panels are only resolved by bisection, so the nested
        // rule converges slowly here.
        assert!((est.value - exact).abs() < 1e-4 * exact, "{}", est.value);
    }

    #[test]
    fn dimension_limits() {
        let f = |_: &[f64]| 1.0;
        let dom = AmbientDomain::Box(vec![(0.0, 1.0); 4]);
        assert_eq!(
            integrate_ambient(&f, 4, &dom, &QuadratureSpec::default()),
            Err(Error::DimensionTooLarge(4))
        );
        let dom = AmbientDomain::Box(vec![(0.0, 1.0); 2]);
        assert!(integrate_ambient(&f, 3, &dom, &QuadratureSpec::default()).is_err());
    }

    #[test]
    fn inner_failures_propagate() {
        let f = |x: &[f64]| if x[1] > 0.5 { f64::NAN } else { 1.0 };
        let dom = AmbientDomain::Box(vec![(0.0, 1.0); 2]);
        assert!(matches!(
            integrate_ambient(&f, 2, &dom, &QuadratureSpec::default()),
            Err(Error::NonFiniteIntegrand { .. })
        ));
    }
}
