//! Acceptance suite: one pass/fail line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use hardybench::calculus::{hardy_transform, rellich_transform};
use hardybench::corpus;
use hardybench::functionals::{
    boundary_term_integral, constant_clqq, constant_clqq_by_quadrature, critical_hardy_deficit,
    elementary_ineq_check, estimate_cp, hardy_deficit, k_constant, parts_identity,
    radial_improved_check, rellich_deficit, rellich_expansion_residual, EvalOptions, Inequality,
    Variant, DEFICIT_SLACK, SHARP_SLACK,
};
use hardybench::group::{Geometry, GroupSpec, QuasiNormSpec};
use hardybench::profiles::{interior_grid, make_profile, Angular, ProfileSpec, RadialProfile, SeparableFunction};
use hardybench::quadrature::{integrate_ambient, integrate_polar, AmbientDomain, Integrand1D, QuadratureSpec, Tail};
use hardybench::sharpness::{probe_sharp_constant, sweep, FamilySearchSpace, ProbeSettings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("constants table", Duration::from_secs(5), constants_table),
        ("polar decomposition", Duration::from_secs(60), polar_decomposition),
        ("exact Gaussian deficit", Duration::from_secs(1), gaussian_deficit),
        ("inequality suite", Duration::from_secs(600), inequality_suite),
        ("sharpness reproduction", Duration::from_secs(300), sharpness),
        ("proof identities", Duration::from_secs(30), proof_identities),
        ("norm and group independence", Duration::from_secs(60), norm_independence),
        ("scalar inequality suite", Duration::from_secs(60), scalar_suite),
        ("determinism", Duration::from_secs(600), determinism),
    ];
    let mut failures = 0;
    for (i, (name, limit, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let elapsed = t.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= *limit => (true, d),
            Ok(d) => (false, format!("{d}; took {elapsed:.1?}, limit {limit:?}")),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {} {}: {name} ({:.2} s) {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn profile(s: &str) -> RadialProfile {
    make_profile(&s.parse::<ProfileSpec>().unwrap()).unwrap()
}

fn radial(s: &str) -> SeparableFunction {
    SeparableFunction::radial(profile(s))
}

// --- 1 -------------------------------------------------------------------

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `n / d` in lowest terms with `d > 0`.
#[derive(Clone, Copy, PartialEq, Debug)]
struct Frac(i128, i128);

impl Frac {
    fn new(n: i128, d: i128) -> Self {
        let g = gcd(n, d).max(1) * d.signum();
        Frac(n / g, d / g)
    }
    fn int(n: i128) -> Self {
        Frac(n, 1)
    }
    fn add(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1 + o.0 * self.1, self.1 * o.1)
    }
    fn sub(self, o: Frac) -> Frac {
        self.add(Frac(-o.0, o.1))
    }
    fn mul(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.0, self.1 * o.1)
    }
    fn div(self, o: Frac) -> Frac {
        Frac::new(self.0 * o.1, self.1 * o.0)
    }
    fn to_f64(self) -> f64 {
        // both parts are small integers, so this is the correctly rounded value
        self.0 as f64 / self.1 as f64
    }
}

fn constants_table() -> Outcome {
    // p and Q are halves, so every input is exactly representable
    let mut exact = 0;
    for k in [2u32, 3, 4] {
        for p2 in [2i128, 3, 4] {
            for q2 in [19i128, 22, 27] {
                let (p, q) = (Frac::new(p2, 2), Frac::new(q2, 2));
                let kf = Frac::int(k as i128);
                let want = q
                    .sub(kf.mul(p))
                    .mul(kf.sub(Frac::int(2)).mul(p).add(p.sub(Frac::int(1)).mul(q)))
                    .div(p.mul(p));
                let got = k_constant(k, p.to_f64(), q.to_f64());
                ensure(got == want.to_f64(), || {
                    format!("K({k}, {}, {}) = {got}, exact {want:?}", p.to_f64(), q.to_f64())
                })?;
                exact += 1;
            }
        }
    }
    let quad = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for l in [-0.5, 0.0, 1.5] {
        for qd in [2.0, 4.0, 7.0] {
            for q in [0.5, 2.0, 3.5] {
                let closed = constant_clqq(l, qd, q).map_err(err)?;
                let integral = constant_clqq_by_quadrature(l, qd, q, &quad).map_err(err)?;
                worst = worst.max(rel(closed, integral));
            }
        }
    }
    ensure(worst <= 1e-8, || format!("C(L,Q,q) relative difference {worst:.2e}"))?;
    Ok(format!("{exact} exact K values; C(L,Q,q) worst relative difference {worst:.1e} over 27 points"))
}

// --- 2 -------------------------------------------------------------------

fn polar_decomposition() -> Outcome {
    let geometries = [
        Geometry::euclidean(2).map_err(err)?,
        Geometry::euclidean(3).map_err(err)?,
        Geometry::heisenberg_koranyi(),
        Geometry::anisotropic(vec![1.0, 1.0, 2.0], 4).map_err(err)?,
    ];
    let profiles = [
        "bump:m=4,R=1",
        "bump:m=3,R=0.7",
        "bump:m=6,R=1.5",
        "bump:m=8,R=2",
        "gaussian:sigma=0.6",
        "gaussian:sigma=1",
        "gaussian:sigma=1.7",
        "mollified_power:gamma=0.5,eps=0.2,M=2",
        "mollified_power:gamma=-0.5,eps=0.3,M=3,m=6",
        "log_power:beta=0.5,R=1,t_inner=0.2,t_outer=3",
    ];
    let quad = QuadratureSpec::default().with_rel_tol(1e-7);
    let mut worst: f64 = 0.0;
    for g in &geometries {
        let n = g.group().n;
        for s in profiles {
            let phi = profile(s);
            let (lo, hi) = phi.support();
            let f1 = Integrand1D::new(lo, hi, |r| phi.value(r))
                .tail(Tail::Exponential)
                .tail_scale(phi.scale())
                .breakpoints(phi.breakpoints());
            let polar = integrate_polar(g, &Angular::Constant(1.0), 1.0, &f1, &quad)
                .map_err(err)?
                .value;
            let f = |x: &[f64]| phi.value(g.quasi_norm(x).unwrap());
            let domain = AmbientDomain::Whole {
                symmetric: true,
                tail: Tail::Exponential,
                scales: Some(tail_scales(&phi, g)),
            };
            let ambient = integrate_ambient(&f, n, &domain, &quad)
                .map_err(|e| format!("{s} on {g}: {e}"))?
                .value;
            let d = rel(polar, ambient);
            ensure(d <= 1e-6, || format!("{s} on {g}: polar {polar} vs ambient {ambient}"))?;
            worst = worst.max(d);
        }
    }
    let h = Geometry::heisenberg_koranyi().sphere_measure().map_err(err)?;
    ensure((h - 2.0 * PI * PI).abs() <= 1e-5, || format!("Koranyi sphere measure {h}"))?;
    Ok(format!(
        "worst relative difference {worst:.1e} over 40 pairs; Koranyi sphere measure {h:.10}"
    ))
}

/// Decay length of each coordinate: a coordinate of weight `w` scales like
/// `r^w`, and a profile decaying like `exp(-(r/s)^2)` decays like
/// `exp(-x/(w s^w))` along it.
fn tail_scales(phi: &RadialProfile, g: &Geometry) -> Vec<f64> {
    g.group().weights().iter().map(|w| w * phi.scale().powf(*w)).collect()
}

// --- 3 -------------------------------------------------------------------

fn gaussian_deficit() -> Outcome {
    let u = radial("gaussian:sigma=1");
    let g = Geometry::euclidean(3).map_err(err)?;
    let r = hardy_deficit(&u, &g, 2.0, &EvalOptions::default()).map_err(err)?;
    let exact = PI.powf(1.5);
    ensure((r.deficit - exact).abs() <= 1e-7, || format!("deficit {} vs {exact}", r.deficit))?;
    Ok(format!("deficit {:.12} vs pi^(3/2) {exact:.12}", r.deficit))
}

// --- 4 -------------------------------------------------------------------

fn inequality_suite() -> Outcome {
    let cases = corpus::cases().map_err(err)?;
    let c0 = corpus::recorded_constants().map_err(err)?;
    let rows = sweep(&cases, &EvalOptions::default(), 1).map_err(err)?;
    let mut counts = std::collections::BTreeMap::new();
    for row in &rows {
        let case = &row.case;
        let r = row
            .report
            .as_ref()
            .ok_or_else(|| format!("case {}: {}", row.index, row.error.clone().unwrap_or_default()))?;
        *counts.entry(case.inequality).or_insert(0) += 1;
        ensure(r.deficit >= -DEFICIT_SLACK * (1.0 + r.lhs.abs()), || {
            format!("case {}: deficit {} with lhs {}", row.index, r.deficit, r.lhs)
        })?;
        if let Some(c) = c0.get(&case.inequality) {
            let (_, d) = r.sup_distance.ok_or("missing distance")?;
            let power = r.distance_power.ok_or("missing power")?;
            let ratio = r.deficit / d.powf(power);
            ensure(ratio >= *c, || {
                format!("case {}: stability ratio {ratio} below c0 {c}", row.index)
            })?;
        }
        if case.inequality == Inequality::Ckn {
            let p = case.exponents.p.unwrap();
            let ratio = r.ratio.ok_or("missing ratio")?;
            ensure(ratio <= p / (p - 1.0) * (1.0 + SHARP_SLACK), || {
                format!("case {}: ratio {ratio} above p/(p-1)", row.index)
            })?;
        }
    }
    for ineq in [
        Inequality::LpHardy,
        Inequality::Ckn,
        Inequality::CriticalHardy,
        Inequality::RadialImproved,
        Inequality::Rellich,
    ] {
        let n = counts.get(&ineq).copied().unwrap_or(0);
        ensure(n >= 20, || format!("{ineq}: only {n} cases"))?;
    }
    let c0_list: Vec<String> = c0.iter().map(|(k, v)| format!("{k} {v}")).collect();
    Ok(format!("{} cases, c0: {}", rows.len(), c0_list.join(", ")))
}

// --- 5 -------------------------------------------------------------------

fn sharpness() -> Outcome {
    let settings = ProbeSettings::default();
    let budget = 800;
    let mut parts = Vec::new();
    let space = FamilySearchSpace::hardy_ratio(Geometry::euclidean(4).map_err(err)?, 2.0);
    let res = probe_sharp_constant(Inequality::LpHardy, &space, budget, &settings).map_err(err)?;
    let fr = res.best_value;
    ensure((0.98..=1.0 + SHARP_SLACK).contains(&fr), || format!("Hardy ratio {}", res.best_value))?;
    parts.push(format!("Hardy {fr:.4}"));
    for p in [2.0, 3.0] {
        let space = FamilySearchSpace::ckn_ratio(Geometry::euclidean(3).map_err(err)?, p);
        let res = probe_sharp_constant(Inequality::Ckn, &space, budget, &settings).map_err(err)?;
        let sharp = p / (p - 1.0);
        let fr = res.best_value / sharp;
        ensure((0.95..=1.0 + SHARP_SLACK).contains(&fr), || {
            format!("CKN p = {p}: ratio {} of {sharp}", res.best_value)
        })?;
        parts.push(format!("CKN p={p} {fr:.4}"));
    }
    Ok(format!("fractions of the sharp constants: {}", parts.join(", ")))
}

// --- 6 -------------------------------------------------------------------

fn proof_identities() -> Outcome {
    let catalog = [
        "bump:m=4,R=1",
        "bump:m=6,R=2",
        "gaussian:sigma=1",
        "gaussian:sigma=0.4",
        "mollified_power:gamma=-1,eps=0.1,M=5",
        "mollified_power:gamma=0.5,eps=0.05,M=2,m=6",
        "log_power:beta=0.5,R=1,t_inner=0.1,t_outer=8",
    ];
    let quad = QuadratureSpec::default();
    let (mut res_max, mut bnd_max, mut parts_max) = (0f64, 0f64, 0f64);
    for s in catalog {
        let phi = profile(s);
        let grid = interior_grid(&phi, 40);
        for (k, p) in [(2u32, 2.0), (2, 3.0), (3, 2.0)] {
            for q in [k as f64 * p + 1.0, k as f64 * p + 3.0] {
                let r = rellich_expansion_residual(&phi, k, p, q, &grid).map_err(err)?;
                ensure(r <= 1e-8, || format!("{s}, k={k}, p={p}, Q={q}: residual {r:e}"))?;
                res_max = res_max.max(r);
                // v = r^{(Q-kp)/p} phi for the second-order identity, and
                // v = r^{(Q-p)/p} phi for the first-order one
                for v in [
                    rellich_transform(&phi, q, k, p).map_err(err)?,
                    hardy_transform(&phi, q, p).map_err(err)?,
                ] {
                    let b = boundary_term_integral(&v, p, &quad).map_err(err)?;
                    ensure(b.abs() <= 1e-9, || format!("{s}: boundary term {b:e}"))?;
                    bnd_max = bnd_max.max(b.abs());
                    let (lhs, rhs) = parts_identity(&v, p, &quad).map_err(err)?;
                    let d = rel(lhs, rhs);
                    ensure(d <= 1e-8, || format!("{s}: parts identity {lhs} vs {rhs}"))?;
                    parts_max = parts_max.max(d);
                }
            }
        }
    }
    Ok(format!(
        "max residual {res_max:.1e}, max boundary term {bnd_max:.1e}, max parts difference {parts_max:.1e}"
    ))
}

// --- 7 -------------------------------------------------------------------

fn norm_independence() -> Outcome {
    let heis = GroupSpec::heisenberg();
    let geoms = [
        Geometry::euclidean(4).map_err(err)?,
        Geometry::heisenberg_koranyi(),
        Geometry::new(heis, QuasiNormSpec::Anisotropic { p0: 4 }).map_err(err)?,
        Geometry::anisotropic(vec![1.0, 1.0, 2.0], 4).map_err(err)?,
    ];
    let opts = EvalOptions::default();
    let evals: Vec<(&str, &str, Box<Eval<'_>>)> = vec![
        ("lp-hardy p=2", "gaussian:sigma=1", Box::new(|u, g| Ok(hardy_deficit(u, g, 2.0, &opts)?.deficit))),
        ("lp-hardy p=3", "bump:m=4,R=1", Box::new(|u, g| Ok(hardy_deficit(u, g, 3.0, &opts)?.deficit))),
        ("critical", "bump:m=4,R=0.5", Box::new(|u, g| Ok(critical_hardy_deficit(u, 1.0, g, &opts)?.deficit))),
        (
            "radial-improved",
            "bump:m=4,R=1",
            Box::new(|u, g| Ok(radial_improved_check(u, 2.0, 0.0, 1.0, g, &opts)?.deficit)),
        ),
        ("rellich", "gaussian:sigma=1", Box::new(|u, g| Ok(rellich_deficit(u, 2, 1.5, g, &opts)?.deficit))),
    ];
    let mut worst: f64 = 0.0;
    for (name, s, eval) in &evals {
        let u = radial(s);
        let mut normalized = Vec::new();
        for g in &geoms {
            let d = eval(&u, g).map_err(err)?;
            normalized.push(d / g.sphere_measure().map_err(err)?);
        }
        for (g, v) in geoms.iter().zip(&normalized) {
            let d = rel(*v, normalized[0]);
            ensure(d <= 1e-8, || format!("{name} on {g}: {v} vs {}", normalized[0]))?;
            worst = worst.max(d);
        }
    }
    // independent of the polar formulas: ambient integrals over the two
    // three-dimensional Q = 4 geometries, normalised by their sphere measures
    let quad = QuadratureSpec::default().with_rel_tol(1e-8);
    let phi = profile("bump:m=4,R=1");
    let mut amb = Vec::new();
    for g in &geoms[1..] {
        let f = |x: &[f64]| phi.value(g.quasi_norm(x).unwrap()).powi(2);
        let domain = AmbientDomain::Whole {
            symmetric: true,
            tail: Tail::Exponential,
            scales: Some(tail_scales(&phi, g)),
        };
        let v = integrate_ambient(&f, 3, &domain, &quad).map_err(err)?.value;
        amb.push(v / g.sphere_measure().map_err(err)?);
    }
    let spread = amb.iter().map(|v| rel(*v, amb[0])).fold(0.0, f64::max);
    ensure(spread <= 1e-6, || format!("ambient cross-check {amb:?}"))?;
    Ok(format!(
        "worst relative spread {worst:.1e} over 5 functionals x 4 geometries; ambient cross-check {spread:.1e}"
    ))
}

type Eval<'a> = dyn Fn(&SeparableFunction, &Geometry) -> hardybench::Result<f64> + 'a;

// --- 8 -------------------------------------------------------------------

fn scalar_suite() -> Outcome {
    const N: usize = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let ps = [2.0, 3.0, 4.0, 6.5];
    let cs: Vec<f64> = ps
        .iter()
        .map(|p| estimate_cp(*p, 256).map(|c| c * (1.0 - 1e-6)))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let tol = |a: f64, b: f64, p: f64| 1e-12 * (a.abs() + b.abs()).powf(p);
    let mut violations = [0usize; 3];
    for _ in 0..N {
        let (a, b, p): (f64, f64, f64) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(1.0..8.0));
        if elementary_ineq_check(a, b, p, Variant::First).map_err(err)? < -tol(a, b, p) {
            violations[0] += 1;
        }
        let i = rng.random_range(0..ps.len());
        let (a, b): (f64, f64) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        if elementary_ineq_check(a, b, ps[i], Variant::Second { c: cs[i] }).map_err(err)? < -tol(a, b, ps[i]) {
            violations[1] += 1;
        }
        let a: f64 = rng.random_range(0.0..10.0);
        let b = a - rng.random_range(0.0..20.0);
        let p: f64 = rng.random_range(2.0..8.0);
        if elementary_ineq_check(a, b, p, Variant::Third).map_err(err)? < -tol(a, b, p) {
            violations[2] += 1;
        }
    }
    ensure(violations == [0; 3], || format!("violations {violations:?} in {N} samples per variant"))?;
    let c2 = estimate_cp(2.0, 1000).map_err(err)?;
    ensure((c2 - 1.0).abs() <= 1e-10, || format!("C(2) = {c2}"))?;
    let mut stable = Vec::new();
    for p in [3.0, 4.0] {
        let a = estimate_cp(p, 500).map_err(err)?;
        let b = estimate_cp(p, 1000).map_err(err)?;
        ensure((a - b).abs() <= 1e-4, || format!("C({p}): {a} vs {b}"))?;
        stable.push(format!("C({p}) = {b:.8}"));
    }
    Ok(format!("0 violations in {N} samples per variant; C(2) = {c2}; {}", stable.join(", ")))
}

// --- 9 -------------------------------------------------------------------

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_hardybench"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(err)?;
    ensure(status.status.success(), || {
        format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr))
    })?;
    let name = format!("{}_{}.json", args[0], args[2]);
    std::fs::read(out.join(&name)).map_err(|e| format!("{name}: {e}"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let runs: [&[&str]; 2] = [
        &["verify", "--inequality", "lp-hardy", "--group", "heisenberg", "--norm", "koranyi", "--profile", "bump:m=4,R=1", "--p", "2"],
        &["sharpness", "--inequality", "ckn", "--group", "euclidean", "--n", "3", "--p", "2", "--budget", "200", "--seed", "11"],
    ];
    for args in runs {
        let a = run_cli(args, &dir.path().join("a"))?;
        let b = run_cli(args, &dir.path().join("b"))?;
        ensure(!a.is_empty() && a == b, || format!("{} outputs differ", args[0]))?;
    }
    Ok("verify and sharpness JSON byte-identical across repeated runs".into())
}
