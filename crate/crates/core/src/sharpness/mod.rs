//! Derivative-free searches over profile-family parameters: approaching the
//! sharp constants from below, estimating stability constants from above,
//! and batch sweeps over parameter grids.

mod nelder_mead;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{
    ckn_check, evaluate, hardy_sides, Case, DeficitReport, EvalOptions, ExponentParams,
    Inequality, SHARP_SLACK,
};
use crate::group::Geometry;
use crate::profiles::{make_profile, ProfileSpec, RadialProfile, SeparableFunction};

/// Supremum distances below this are treated as the extremal direction and
/// skipped by the stability search.
pub const SUP_FLOOR: f64 = 1e-10;

/// One searched parameter of a profile family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamRange {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Search `log(value)` uniformly.
    #[serde(default)]
    pub log: bool,
    /// Round to the nearest integer.
    #[serde(default)]
    pub integer: bool,
}

impl ParamRange {
    pub fn linear(name: &str, lo: f64, hi: f64) -> Self {
        ParamRange {
            name: name.into(),
            lo,
            hi,
            log: false,
            integer: false,
        }
    }

    pub fn logarithmic(name: &str, lo: f64, hi: f64) -> Self {
        ParamRange {
            log: true,
            ..ParamRange::linear(name, lo, hi)
        }
    }

    pub fn integer(name: &str, lo: u32, hi: u32) -> Self {
        ParamRange {
            integer: true,
            ..ParamRange::linear(name, lo as f64, hi as f64)
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi;
        if !ok || (self.log && !(self.lo > 0.0)) {
            return Err(Error::param(
                &self.name,
                format!("invalid search range [{}, {}]", self.lo, self.hi),
            ));
        }
        if self.integer && self.lo.ceil() > self.hi.floor() {
            return Err(Error::param(&self.name, "range contains no integer"));
        }
        Ok(())
    }

    /// Maps `u` in `[0, 1]` into the range.
    fn at(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        if self.integer {
            let (lo, hi) = (self.lo.ceil(), self.hi.floor());
            return (lo + u * (hi - lo)).round();
        }
        if self.log {
            (self.lo.ln() + u * (self.hi / self.lo).ln()).exp()
        } else {
            self.lo + u * (self.hi - self.lo)
        }
    }
}

/// A feasibility predicate on the parameters of a search point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Constraint {
    /// The profile vanishes outside the ball of this radius; `strict`
    /// requires the support to stay inside the open ball.
    SupportInside { radius: f64, strict: bool },
    /// `factor * lower <= upper`.
    Ordered {
        lower: String,
        upper: String,
        factor: f64,
    },
    /// The profile is not identically zero.
    NonZero,
}

impl Constraint {
    fn holds(&self, params: &BTreeMap<String, f64>, profile: &RadialProfile) -> bool {
        match self {
            Constraint::SupportInside { radius, strict } => {
                let hi = profile.support().1;
                if *strict {
                    hi < *radius
                } else {
                    hi <= *radius
                }
            }
            Constraint::Ordered {
                lower,
                upper,
                factor,
            } => match (params.get(lower), params.get(upper)) {
                (Some(a), Some(b)) => factor * a <= *b,
                _ => false,
            },
            Constraint::NonZero => !profile.is_zero(),
        }
    }
}

/// A box of profile-family parameters together with the fixed data of the
/// evaluation (geometry and exponents).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySearchSpace {
    /// Family name as in [`ProfileSpec`], e.g. `bump`.
    pub family: String,
    pub params: Vec<ParamRange>,
    /// Parameters held fixed.
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    pub geometry: Geometry,
    #[serde(default)]
    pub exponents: ExponentParams,
}

impl FamilySearchSpace {
    pub fn validate(&self) -> Result<()> {
        if self.params.is_empty() {
            return Err(Error::param("space", "needs at least one searched parameter"));
        }
        for p in &self.params {
            p.validate()?;
            if self.fixed.contains_key(&p.name) {
                return Err(Error::param(&p.name, "both searched and fixed"));
            }
        }
        Ok(())
    }

    /// The parameters at a point of the unit cube.
    pub fn params_at(&self, u: &[f64]) -> BTreeMap<String, f64> {
        let mut map = self.fixed.clone();
        for (range, x) in self.params.iter().zip(u) {
            map.insert(range.name.clone(), range.at(*x));
        }
        map
    }

    /// The catalog description for a parameter set.
    pub fn profile_spec(&self, params: &BTreeMap<String, f64>) -> Result<ProfileSpec> {
        let integer = |name: &str| {
            self.params.iter().any(|p| p.name == name && p.integer)
                || (name == "m" && params.get(name).is_some_and(|v| v.fract() == 0.0))
        };
        let mut obj = serde_json::Map::new();
        obj.insert("family".into(), self.family.clone().into());
        for (k, v) in params {
            let value = if integer(k) && *v >= 0.0 {
                serde_json::Value::from(*v as u64)
            } else {
                serde_json::Value::from(*v)
            };
            obj.insert(k.clone(), value);
        }
        serde_json::from_value(serde_json::Value::Object(obj))
            .map_err(|e| Error::param("profile", format!("family `{}`: {e}", self.family)))
    }

    /// The profile at a parameter set, if it is feasible.
    fn feasible_profile(&self, params: &BTreeMap<String, f64>) -> Option<(ProfileSpec, RadialProfile)> {
        let spec = self.profile_spec(params).ok()?;
        let profile = make_profile(&spec).ok()?;
        if profile.is_zero() {
            return None;
        }
        self.constraints
            .iter()
            .all(|c| c.holds(params, &profile))
            .then_some((spec, profile))
    }

    /// Near-extremal `r^gamma` profiles with a long logarithmic range, for
    /// the Hardy constant.
    pub fn hardy_ratio(geometry: Geometry, p: f64) -> Self {
        FamilySearchSpace {
            family: "mollified_power".into(),
            params: vec![
                ParamRange::linear("gamma", -1.5, -0.5),
                ParamRange::logarithmic("eps", (-250f64).exp(), (-1f64).exp()),
                ParamRange::logarithmic("M", 1f64.exp(), 250f64.exp()),
            ],
            fixed: BTreeMap::from([("m".into(), 4.0)]),
            constraints: vec![Constraint::Ordered {
                lower: "eps".into(),
                upper: "M".into(),
                factor: 4.0,
            }],
            geometry,
            exponents: ExponentParams::with_p(p),
        }
    }

    /// `log(R/r)^beta` profiles for the logarithmic Hardy constant. Both
    /// sides are invariant under scaling `t`, so only the ratio of the
    /// cut-offs matters.
    pub fn ckn_ratio(geometry: Geometry, p: f64) -> Self {
        FamilySearchSpace {
            family: "log_power".into(),
            params: vec![
                ParamRange::linear("beta", 0.05, 1.5),
                ParamRange::logarithmic("t_inner", (-600f64).exp(), 1.0),
                ParamRange::logarithmic("t_outer", 1f64.exp(), 700.0),
            ],
            fixed: BTreeMap::from([("R".into(), 1.0), ("m".into(), 4.0)]),
            constraints: vec![Constraint::Ordered {
                lower: "t_inner".into(),
                upper: "t_outer".into(),
                factor: 4.0,
            }],
            geometry,
            exponents: ExponentParams {
                p: Some(p),
                radius: Some(1.0),
                ..Default::default()
            },
        }
    }

    /// Bumps `(1 - (r/R)^2)^m`, `m in [m_lo, 8]`, `R in [0.5, 2]`.
    pub fn bumps(geometry: Geometry, exponents: ExponentParams, m_lo: u32) -> Self {
        FamilySearchSpace {
            family: "bump".into(),
            params: vec![ParamRange::integer("m", m_lo, 8), ParamRange::linear("R", 0.5, 2.0)],
            fixed: BTreeMap::new(),
            constraints: vec![Constraint::NonZero],
            geometry,
            exponents,
        }
    }

    /// Bumps inside the open ball of radius `radius`, for the critical
    /// inequality.
    pub fn critical_bumps(geometry: Geometry, radius: f64) -> Self {
        FamilySearchSpace {
            family: "bump".into(),
            params: vec![
                ParamRange::integer("m", 2, 8),
                ParamRange::linear("R", 0.2 * radius, 0.9 * radius),
            ],
            fixed: BTreeMap::new(),
            constraints: vec![Constraint::SupportInside {
                radius,
                strict: true,
            }],
            geometry,
            exponents: ExponentParams {
                radius: Some(radius),
                ..Default::default()
            },
        }
    }
}

/// What a search optimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    /// Maximise the ratio whose supremum is the sharp constant.
    SharpRatio,
    /// Minimise `deficit / sup_distance^power`.
    StabilityConstant,
}

/// `(evaluation, best value so far)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation: usize,
    pub value: f64,
}

/// Result of a search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub inequality: Inequality,
    pub objective: ObjectiveKind,
    pub best_value: f64,
    pub best_params: BTreeMap<String, f64>,
    pub best_profile: ProfileSpec,
    /// The sharp constant the ratio approaches, for sharp-ratio searches.
    pub theoretical: Option<f64>,
    /// `best_value / theoretical`.
    pub fraction_of_theoretical: Option<f64>,
    /// False if the ratio exceeds the sharp constant beyond `SHARP_SLACK`.
    pub sound: bool,
    pub evaluations: usize,
    /// Feasible points skipped because their distance supremum vanished.
    pub skipped: usize,
    pub restarts: usize,
    pub seed: u64,
    pub trace: Vec<TracePoint>,
}

/// Optimizer settings shared by both searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSettings {
    pub seed: u64,
    pub restarts: usize,
    /// Initial simplex edge in the unit cube.
    pub step: f64,
    pub eval: EvalOptions,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            seed: 0,
            restarts: 8,
            step: 0.25,
            eval: EvalOptions::default(),
        }
    }
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let (mut x, mut f) = (0.0, inv);
    while i > 0 {
        x += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    x
}

/// Halton points with a random Cranley-Patterson shift.
fn start_points(dim: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim > PRIMES.len() {
        return Err(Error::param("space", format!("at most {} parameters", PRIMES.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    Ok((1..=count as u64)
        .map(|i| {
            (0..dim)
                .map(|j| (radical_inverse(i, PRIMES[j]) + shift[j]).fract())
                .collect()
        })
        .collect())
}

/// Budget split over restarts; earlier restarts get the remainder.
fn split_budget(budget: usize, restarts: usize) -> Vec<usize> {
    let k = restarts.clamp(1, budget.max(1));
    (0..k)
        .map(|i| budget / k + usize::from(i < budget % k))
        .collect()
}

struct Search {
    best_x: Vec<f64>,
    best_f: f64,
    evaluations: usize,
    trace: Vec<TracePoint>,
}

/// Minimises `f` from every start point in parallel and merges the runs in
/// start order.
fn multistart(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    dim: usize,
    budget: usize,
    settings: &ProbeSettings,
) -> Result<Search> {
    if budget == 0 {
        return Err(Error::param("budget", "needs at least one evaluation"));
    }
    let budgets = split_budget(budget, settings.restarts);
    let starts = start_points(dim, budgets.len(), settings.seed)?;
    let runs: Vec<nelder_mead::Run> = starts
        .par_iter()
        .zip(budgets.par_iter())
        .map(|(x, b)| nelder_mead::minimize(f, x, settings.step, *b))
        .collect();
    let mut search = Search {
        best_x: starts[0].clone(),
        best_f: f64::INFINITY,
        evaluations: 0,
        trace: Vec::new(),
    };
    for run in runs {
        if run.best_f < search.best_f {
            search.best_x = run.best_x.clone();
        }
        for (i, v) in &run.trace {
            if *v < search.best_f {
                search.best_f = *v;
                search.trace.push(TracePoint {
                    evaluation: search.evaluations + i,
                    value: *v,
                });
            }
        }
        search.evaluations += run.evaluations;
    }
    if !search.best_f.is_finite() {
        return Err(Error::Optimizer(format!(
            "no feasible point in {} evaluations",
            search.evaluations
        )));
    }
    Ok(search)
}

/// The ratio whose supremum over the family is the sharp constant, and that
/// constant.
fn sharp_ratio(
    inequality: Inequality,
    space: &FamilySearchSpace,
    profile: &RadialProfile,
    settings: &ProbeSettings,
) -> Result<(f64, f64)> {
    let q = space.geometry.q();
    let p = space
        .exponents
        .p
        .ok_or_else(|| Error::param("p", "required"))?;
    match inequality {
        Inequality::LpHardy => {
            if !(p > 1.0 && p < q) {
                return Err(Error::param("p", format!("needs 1 < p < Q (p = {p}, Q = {q})")));
            }
            let (grad, weighted, _) = hardy_sides(profile, q, p, &settings.eval.quad)?;
            Ok((weighted / grad, ((q - p) / p).powf(-p)))
        }
        Inequality::Ckn => {
            let radius = space
                .exponents
                .radius
                .ok_or_else(|| Error::param("R", "required"))?;
            let u = SeparableFunction::radial(profile.clone());
            let c = ckn_check(&u, radius, &space.geometry, p, &settings.eval.quad)?;
            Ok((c.ratio, c.constant))
        }
        other => Err(Error::param(
            "inequality",
            format!("no sharp-ratio search for {other}"),
        )),
    }
}

/// Maximises the sharp ratio of `inequality` (`lp-hardy`:
/// `int |u|^p/|x|^p / int |Ru|^p`, `ckn`: quotient side over gradient side)
/// over the family, with `budget` evaluations in total.
pub fn probe_sharp_constant(
    inequality: Inequality,
    space: &FamilySearchSpace,
    budget: usize,
    settings: &ProbeSettings,
) -> Result<ProbeResult> {
    space.validate()?;
    if !matches!(inequality, Inequality::LpHardy | Inequality::Ckn) {
        return Err(Error::param(
            "inequality",
            format!("no sharp-ratio search for {inequality}"),
        ));
    }
    let objective = |u: &[f64]| -> f64 {
        let params = space.params_at(u);
        let Some((_, profile)) = space.feasible_profile(&params) else {
            return f64::INFINITY;
        };
        match sharp_ratio(inequality, space, &profile, settings) {
            Ok((r, _)) if r.is_finite() => -r,
            _ => f64::INFINITY,
        }
    };
    let search = multistart(&objective, space.params.len(), budget, settings)?;
    let best_params = space.params_at(&search.best_x);
    let (spec, profile) = space
        .feasible_profile(&best_params)
        .ok_or_else(|| Error::Optimizer("best point is not feasible".into()))?;
    let (_, theoretical) = sharp_ratio(inequality, space, &profile, settings)?;
    let best = -search.best_f;
    Ok(ProbeResult {
        inequality,
        objective: ObjectiveKind::SharpRatio,
        best_value: best,
        best_params,
        best_profile: spec,
        theoretical: Some(theoretical),
        fraction_of_theoretical: Some(best / theoretical),
        sound: best <= theoretical * (1.0 + SHARP_SLACK),
        evaluations: search.evaluations,
        skipped: 0,
        restarts: split_budget(budget, settings.restarts).len(),
        seed: settings.seed,
        trace: search
            .trace
            .into_iter()
            .map(|t| TracePoint {
                evaluation: t.evaluation,
                value: -t.value,
            })
            .collect(),
    })
}

/// Minimises `deficit / sup_distance^power` over the family. Points whose
/// distance supremum is below [`SUP_FLOOR`] are skipped and counted.
pub fn estimate_stability_constant(
    inequality: Inequality,
    space: &FamilySearchSpace,
    budget: usize,
    settings: &ProbeSettings,
) -> Result<ProbeResult> {
    space.validate()?;
    if !matches!(
        inequality,
        Inequality::LpHardy | Inequality::CriticalHardy | Inequality::Rellich
    ) {
        return Err(Error::param(
            "inequality",
            format!("no stability-constant search for {inequality}"),
        ));
    }
    let skipped = std::sync::atomic::AtomicUsize::new(0);
    let ratio = |spec: ProfileSpec| -> Result<Option<f64>> {
        let case = Case {
            inequality,
            geometry: space.geometry.clone(),
            profile: spec,
            amplitude: 1.0,
            exponents: space.exponents,
        };
        let report = evaluate(&case, &settings.eval)?;
        Ok(stability_value(&report))
    };
    let objective = |u: &[f64]| -> f64 {
        let params = space.params_at(u);
        let Some((spec, _)) = space.feasible_profile(&params) else {
            return f64::INFINITY;
        };
        match ratio(spec) {
            Ok(Some(v)) => v,
            Ok(None) => {
                skipped.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                f64::INFINITY
            }
            Err(_) => f64::INFINITY,
        }
    };
    let search = multistart(&objective, space.params.len(), budget, settings)?;
    let best_params = space.params_at(&search.best_x);
    let (spec, _) = space
        .feasible_profile(&best_params)
        .ok_or_else(|| Error::Optimizer("best point is not feasible".into()))?;
    if !(search.best_f > 0.0) {
        return Err(Error::Optimizer(format!(
            "non-positive stability ratio {} at {spec}",
            search.best_f
        )));
    }
    Ok(ProbeResult {
        inequality,
        objective: ObjectiveKind::StabilityConstant,
        best_value: search.best_f,
        best_params,
        best_profile: spec,
        theoretical: None,
        fraction_of_theoretical: None,
        sound: true,
        evaluations: search.evaluations,
        skipped: skipped.into_inner(),
        restarts: split_budget(budget, settings.restarts).len(),
        seed: settings.seed,
        trace: search.trace,
    })
}

/// `deficit / sup^power`, or `None` below the distance floor.
fn stability_value(report: &DeficitReport) -> Option<f64> {
    let (_, sup) = report.sup_distance?;
    if !(sup >= SUP_FLOOR) {
        return None;
    }
    report.stability_ratio()
}

/// Cross product of cases for a sweep. Empty exponent lists leave the
/// exponent unset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterGrid {
    pub geometries: Vec<Geometry>,
    pub profiles: Vec<ProfileSpec>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<f64>,
    pub k: Vec<u32>,
    #[serde(rename = "R")]
    pub radius: Vec<f64>,
}

impl ParameterGrid {
    /// All cases in grid order: geometry, profile, `p`, `q`, `L`, `k`, `R`,
    /// with the last varying fastest.
    pub fn cases(&self, inequality: Inequality) -> Vec<Case> {
        fn axis<T: Copy>(v: &[T]) -> Vec<Option<T>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for g in &self.geometries {
            for prof in &self.profiles {
                for p in axis(&self.p) {
                    for q in axis(&self.q) {
                        for l in axis(&self.l) {
                            for k in axis(&self.k) {
                                for r in axis(&self.radius) {
                                    out.push(Case {
                                        inequality,
                                        geometry: g.clone(),
                                        profile: prof.clone(),
                                        amplitude: 1.0,
                                        exponents: ExponentParams {
                                            p,
                                            q,
                                            l,
                                            k,
                                            radius: r,
                                            ..Default::default()
                                        },
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// One sweep row: the report, or the error that point produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub case: Case,
    pub report: Option<DeficitReport>,
    pub error: Option<String>,
}

/// Evaluates every case on up to `jobs` threads (0 uses rayon's default).
/// Rows come back in input order; a failing case fills its `error`.
pub fn sweep(cases: &[Case], opts: &EvalOptions, jobs: usize) -> Result<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::param("jobs", e.to_string()))?;
    Ok(pool.install(|| {
        cases
            .par_iter()
            .enumerate()
            .map(|(index, case)| {
                let (report, error) = match evaluate(case, opts) {
                    Ok(r) => (Some(r), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                SweepRow {
                    index,
                    case: case.clone(),
                    report,
                    error,
                }
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ProbeSettings {
        let mut s = ProbeSettings::default();
        s.eval.grid.points = 9;
        s.eval.grid.refine_steps = 10;
        s
    }

    #[test]
    fn ranges_map_the_unit_interval() {
        let r = ParamRange::logarithmic("eps", 1e-4, 1.0);
        assert!((r.at(0.5) - 1e-2).abs() < 1e-15);
        let m = ParamRange::integer("m", 2, 8);
        assert_eq!((m.at(0.0), m.at(1.0), m.at(0.49)), (2.0, 8.0, 5.0));
        assert!(ParamRange::logarithmic("x", 0.0, 1.0).validate().is_err());
    }

    #[test]
    fn halton_points_are_shifted_and_in_the_cube() {
        let a = start_points(3, 8, 1).unwrap();
        let b = start_points(3, 8, 1).unwrap();
        let c = start_points(3, 8, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().flatten().all(|x| (0.0..1.0).contains(x)));
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn budget_is_split_exactly() {
        assert_eq!(split_budget(10, 4), vec![3, 3, 2, 2]);
        assert_eq!(split_budget(3, 8), vec![1, 1, 1]);
        assert_eq!(split_budget(10, 4).iter().sum::<usize>(), 10);
    }

    #[test]
    fn profile_specs_from_parameters() {
        let space = FamilySearchSpace::bumps(Geometry::euclidean(3).unwrap(), ExponentParams::with_p(2.0), 2);
        let params = space.params_at(&[1.0, 0.0]);
        assert_eq!(
            space.profile_spec(&params).unwrap(),
            ProfileSpec::Bump { m: 8, radius: 0.5 }
        );
    }

    #[test]
    fn hardy_ratio_search_approaches_the_constant() {
        let geom = Geometry::heisenberg_koranyi();
        let space = FamilySearchSpace::hardy_ratio(geom, 2.0);
        let res = probe_sharp_constant(Inequality::LpHardy, &space, 240, &quick()).unwrap();
        assert!(res.sound, "{res:?}");
        assert!(res.fraction_of_theoretical.unwrap() > 0.9, "{res:?}");
        assert!(res.trace.windows(2).all(|w| w[1].value > w[0].value));
        let again = probe_sharp_constant(Inequality::LpHardy, &space, 240, &quick()).unwrap();
        assert_eq!(res, again);
    }

    #[test]
    fn empty_feasible_space_is_an_error() {
        let mut space = FamilySearchSpace::critical_bumps(Geometry::euclidean(2).unwrap(), 1.0);
        space.constraints.push(Constraint::SupportInside {
            radius: 0.1,
            strict: true,
        });
        let res = estimate_stability_constant(Inequality::CriticalHardy, &space, 10, &quick());
        assert!(matches!(res, Err(Error::Optimizer(_))));
        assert!(probe_sharp_constant(Inequality::Rellich, &space, 10, &quick()).is_err());
    }

    #[test]
    fn stability_constant_is_positive() {
        let geom = Geometry::heisenberg_koranyi();
        let space = FamilySearchSpace::bumps(geom, ExponentParams::with_p(2.0), 2);
        let res = estimate_stability_constant(Inequality::LpHardy, &space, 24, &quick()).unwrap();
        assert!(res.best_value > 0.0 && res.evaluations == 24);
    }

    #[test]
    fn sweep_keeps_grid_order_and_row_errors() {
        let grid = ParameterGrid {
            geometries: vec![Geometry::euclidean(4).unwrap(), Geometry::euclidean(5).unwrap()],
            profiles: vec![ProfileSpec::Gaussian { sigma: 1.0 }],
            p: vec![2.0, 2.5, 4.0],
            ..Default::default()
        };
        let cases = grid.cases(Inequality::LpHardy);
        assert_eq!(cases.len(), 6);
        let mut opts = EvalOptions::default();
        opts.grid.points = 5;
        opts.grid.refine_steps = 0;
        let rows = sweep(&cases, &opts, 3).unwrap();
        assert_eq!(rows.iter().map(|r| r.index).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
        // p = Q = 4 is inadmissible
        assert!(rows[2].error.is_some() && rows[2].report.is_none());
        assert_eq!(rows.iter().filter(|r| r.report.is_some()).count(), 5);
        assert!(sweep(&[], &opts, 2).unwrap().is_empty());
    }
}
