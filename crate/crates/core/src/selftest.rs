//! The invariant suite behind the `selftest` command.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::rellich_transform;
use crate::corpus;
use crate::error::Result;
use crate::functionals::{
    boundary_term_integral, constant_clqq, constant_clqq_by_quadrature, elementary_ineq_check,
    estimate_cp, hardy_deficit, parts_identity, rellich_expansion_residual, EvalOptions, Variant,
};
use crate::group::Geometry;
use crate::profiles::{interior_grid, make_profile, ProfileSpec, SeparableFunction};

/// One named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// All checks with their pass and fail counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

/// Settings of the suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    /// Random `(a, b, p)` samples per scalar inequality.
    pub samples: usize,
    pub seed: u64,
    pub jobs: usize,
    pub eval: EvalOptions,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            samples: 100_000,
            seed: 0,
            jobs: 0,
            eval: EvalOptions::default(),
        }
    }
}

/// Profiles of every catalog family used by the identity checks.
pub fn catalog_profiles() -> Vec<ProfileSpec> {
    [
        "bump:m=4,R=1",
        "bump:m=6,R=2",
        "gaussian:sigma=1",
        "mollified_power:gamma=-1,eps=0.1,M=5",
        "mollified_power:gamma=0.5,eps=0.05,M=2,m=6",
        "log_power:beta=0.5,R=1,t_inner=0.1,t_outer=8",
    ]
    .iter()
    .map(|s| s.parse().expect("catalog profile"))
    .collect()
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn from_result(name: String, r: Result<(bool, String)>) -> Check {
    match r {
        Ok((passed, detail)) => check(name, passed, detail),
        Err(e) => check(name, false, e.to_string()),
    }
}

/// Runs the corpus, the scalar inequalities, the constant cross-checks, the
/// proof identities and the norm-independence check.
pub fn run(opts: &SelftestOptions) -> Result<SelftestReport> {
    let mut checks = Vec::new();

    for v in corpus::run(&opts.eval, opts.jobs)? {
        let detail = match (&v.error, v.stability_ratio) {
            (Some(e), _) => e.clone(),
            (None, Some(r)) => format!("stability ratio {r:.6e}"),
            (None, None) => "deficit and ratio checked".into(),
        };
        checks.push(check(format!("corpus/{} {}", v.index, v.inequality), v.passed(), detail));
    }

    checks.extend(elementary_samples(opts.samples, opts.seed));

    checks.push(from_result("C_p(2) = 1".into(), estimate_cp(2.0, 1000).map(|c| {
        ((c - 1.0).abs() <= 1e-10, format!("{c:.17}"))
    })));

    for l in [-0.5, 0.0, 1.5] {
        for qd in [2.0, 4.0, 7.0] {
            for q in [0.5, 2.0, 3.5] {
                let r = constant_clqq(l, qd, q).and_then(|c| {
                    let d = constant_clqq_by_quadrature(l, qd, q, &opts.eval.quad)?;
                    let rel = (c - d).abs() / c;
                    Ok((rel <= 1e-8, format!("relative difference {rel:.2e}")))
                });
                checks.push(from_result(format!("C(L={l}, Q={qd}, q={q})"), r));
            }
        }
    }

    for spec in catalog_profiles() {
        let phi = make_profile(&spec)?;
        let grid = interior_grid(&phi, 40);
        for (k, p, q) in [(2, 2.0, 5.0), (2, 3.0, 7.0), (3, 2.0, 7.0)] {
            let r = rellich_expansion_residual(&phi, k, p, q, &grid)
                .map(|res| (res <= 1e-8, format!("residual {res:.2e}")));
            checks.push(from_result(format!("expansion {spec} k={k} p={p} Q={q}"), r));
            let r = rellich_transform(&phi, q, k, p).and_then(|v| {
                let b = boundary_term_integral(&v, p, &opts.eval.quad)?;
                let (lhs, rhs) = parts_identity(&v, p, &opts.eval.quad)?;
                let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
                Ok((
                    b.abs() <= 1e-9 && rel <= 1e-8,
                    format!("boundary term {b:.2e}, parts relative difference {rel:.2e}"),
                ))
            });
            checks.push(from_result(format!("parts {spec} k={k} p={p} Q={q}"), r));
        }
    }

    checks.push(from_result("norm independence at Q = 4".into(), norm_independence(&opts.eval)));

    let failed = checks.iter().filter(|c| !c.passed).count();
    Ok(SelftestReport {
        passed: checks.len() - failed,
        failed,
        checks,
    })
}

fn elementary_samples(samples: usize, seed: u64) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ps = [2.0, 3.0, 4.0, 6.5];
    let cps: Vec<f64> = ps
        .iter()
        .map(|p| estimate_cp(*p, 256).map(|c| c * (1.0 - 1e-6)).unwrap_or(f64::NAN))
        .collect();
    let mut out = Vec::new();
    for (name, which) in [("first", 0), ("second", 1), ("third", 2)] {
        let mut violations = 0usize;
        for _ in 0..samples {
            let (a, b, p, variant) = match which {
                0 => (
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                    rng.random_range(1.0..8.0),
                    Variant::First,
                ),
                1 => {
                    let i = rng.random_range(0..ps.len());
                    (
                        rng.random_range(-10.0..10.0),
                        rng.random_range(-10.0..10.0),
                        ps[i],
                        Variant::Second { c: cps[i] },
                    )
                }
                _ => {
                    let a: f64 = rng.random_range(0.0..10.0);
                    (a, a - rng.random_range(0.0..20.0), rng.random_range(2.0..8.0), Variant::Third)
                }
            };
            let tol = 1e-12 * (f64::abs(a) + f64::abs(b)).powf(p);
            match elementary_ineq_check(a, b, p, variant) {
                Ok(m) if m >= -tol => {}
                _ => violations += 1,
            }
        }
        out.push(check(
            format!("scalar inequality, {name} variant"),
            violations == 0,
            format!("{violations} violations in {samples} samples"),
        ));
    }
    out
}

/// Deficit over sphere measure for one radial profile on the three `Q = 4`
/// geometries.
fn norm_independence(eval: &EvalOptions) -> Result<(bool, String)> {
    let geoms = [
        Geometry::euclidean(4)?,
        Geometry::heisenberg_koranyi(),
        Geometry::anisotropic(vec![1.0, 1.0, 2.0], 4)?,
    ];
    let u = SeparableFunction::radial(make_profile(&ProfileSpec::Bump { m: 4, radius: 1.0 })?);
    let mut values = Vec::new();
    for g in &geoms {
        let r = hardy_deficit(&u, g, 2.0, eval)?;
        values.push(r.deficit / g.sphere_measure()?);
    }
    let spread = values
        .iter()
        .map(|v| (v - values[0]).abs() / values[0].abs())
        .fold(0.0, f64::max);
    Ok((spread <= 1e-8, format!("relative spread {spread:.2e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_samples_have_no_violations() {
        let checks = elementary_samples(2_000, 7);
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }

    #[test]
    fn catalog_profiles_build() {
        for spec in catalog_profiles() {
            make_profile(&spec).unwrap();
        }
    }
}
