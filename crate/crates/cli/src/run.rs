//! Command execution and report emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hardybench::corpus;
use hardybench::emit::{self, Format};
use hardybench::functionals::{
    constant_clqq, evaluate, k_constant, Case, ExponentParams, Inequality,
};
use hardybench::selftest::{self, SelftestOptions};
use hardybench::sharpness::{
    estimate_stability_constant, probe_sharp_constant, sweep, FamilySearchSpace, ObjectiveKind,
    ParameterGrid, ProbeSettings,
};
use serde::Serialize;

use crate::config::{Command, RunConfig};

const DEFAULT_BUDGET: usize = 400;

/// Exit status for a failed run: 2 when the inputs were inadmissible, 1
/// otherwise.
pub fn exit_code(e: &anyhow::Error) -> u8 {
    use hardybench::Error as E;
    match e.downcast_ref::<E>() {
        Some(
            E::InvalidGroup(_)
            | E::InvalidNorm(_)
            | E::IncompatibleNorm { .. }
            | E::DimensionMismatch { .. }
            | E::InvalidParameter { .. },
        ) => 2,
        _ => 1,
    }
}

/// Runs the configured command. `Ok(false)` means an inequality failed.
pub fn run(c: &RunConfig) -> Result<bool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(c.jobs.unwrap_or(0))
        .build_global()
        .context("starting the worker pool")?;
    if let Some(out) = &c.out {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    }
    match c.command {
        Command::Verify => verify(c),
        Command::Sweep => run_sweep(c),
        Command::Sharpness => sharpness(c),
        Command::Constants => constants(c),
        Command::Selftest => run_selftest(c),
    }
}

/// Writes through `write` when an output directory is set, otherwise prints
/// the JSON on stdout. Summary lines go to stdout with files and to stderr
/// without.
fn deliver<T: Serialize + ?Sized>(
    c: &RunConfig,
    name: &str,
    value: &T,
    write: impl FnOnce(Format, &Path) -> hardybench::Result<Vec<PathBuf>>,
    summary: &[String],
) -> Result<()> {
    let mut text = String::new();
    match &c.out {
        Some(dir) => {
            let files = write(c.format, &dir.join(name))?;
            for line in summary {
                text.push_str(line);
                text.push('\n');
            }
            for f in files {
                text.push_str(&format!("wrote {}\n", f.display()));
            }
        }
        None => {
            for line in summary {
                eprintln!("{line}");
            }
            text = emit::to_json_string(value)?;
        }
    }
    to_stdout(&text)
}

/// Prints without panicking when the reader has gone away (`| head`).
fn to_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e).context("writing to stdout"),
        _ => Ok(()),
    }
}

fn single<T: Copy>(v: &[T]) -> Option<T> {
    v.first().copied()
}

fn inequality(c: &RunConfig) -> Result<Inequality> {
    c.inequality.context("--inequality is required")
}

fn verify(c: &RunConfig) -> Result<bool> {
    let ineq = inequality(c)?;
    let case = Case {
        inequality: ineq,
        geometry: c.geometry()?,
        profile: c.profiles[0].clone(),
        amplitude: 1.0,
        exponents: ExponentParams {
            p: single(&c.p),
            q: single(&c.q),
            l: single(&c.l),
            k: single(&c.k),
            radius: single(&c.radius),
            t: single(&c.t),
            alpha: None,
        },
    };
    let report = evaluate(&case, &c.eval_options()?)?;
    let mut summary = vec![format!(
        "{ineq} for {} on {}: lhs {:.10e}, rhs {:.10e}, deficit {:.10e}",
        case.profile, case.geometry, report.lhs, report.rhs_constant_part, report.deficit
    )];
    if let Some((x, d)) = report.sup_distance {
        summary.push(format!("sup distance {d:.10e} at {x:.6e} (grid lower bound)"));
    }
    if let Some(r) = report.ratio {
        summary.push(format!("ratio {r:.10e}, sharp constant {:.10e}", report.sharp_constant.unwrap_or(f64::NAN)));
    }
    if let Some(m) = report.margin {
        summary.push(format!("margin over the explicit bound {m:.10e}"));
    }
    summary.push(format!("holds: {}", report.holds));
    let stem = format!("verify_{ineq}");
    deliver(c, &stem, &report, |f, p| emit::emit_report(&report, f, p), &summary)?;
    Ok(report.holds)
}

#[derive(Serialize)]
struct CorpusRun<'a> {
    rows: &'a [hardybench::sharpness::SweepRow],
    verdicts: &'a [corpus::Verdict],
}

fn run_sweep(c: &RunConfig) -> Result<bool> {
    let opts = c.eval_options()?;
    let jobs = c.jobs.unwrap_or(0);
    if c.corpus {
        let cases: Vec<Case> = corpus::cases()?
            .into_iter()
            .filter(|k| c.inequality.is_none_or(|i| i == k.inequality))
            .collect();
        let rows = sweep(&cases, &opts, jobs)?;
        let c0 = corpus::recorded_constants()?;
        let verdicts: Vec<_> = rows.iter().map(|r| corpus::judge(r, &c0)).collect();
        let failed: Vec<_> = verdicts.iter().filter(|v| !v.passed()).collect();
        let mut summary = vec![format!(
            "corpus: {} cases, {} passed, {} failed",
            verdicts.len(),
            verdicts.len() - failed.len(),
            failed.len()
        )];
        for (ineq, m) in corpus::minimum_ratios(&verdicts) {
            summary.push(format!("{ineq}: minimum stability ratio {m:.6e}, recorded c0 {}", c0.get(&ineq).copied().unwrap_or(f64::NAN)));
        }
        for v in &failed {
            summary.push(format!("FAIL {} {}: {}", v.index, v.inequality, v.case));
        }
        let name = match c.inequality {
            Some(i) => format!("corpus_{i}"),
            None => "corpus".to_string(),
        };
        let value = CorpusRun {
            rows: &rows,
            verdicts: &verdicts,
        };
        deliver(
            c,
            &name,
            &value,
            |f, p| {
                let mut files = Vec::new();
                if f.json() {
                    let path = p.with_extension("json");
                    emit::write_file(&path, &emit::to_json_string(&value)?)?;
                    files.push(path);
                }
                if f.csv() {
                    let path = p.with_extension("csv");
                    emit::write_file(&path, &emit::sweep_csv(&rows)?)?;
                    files.push(path);
                }
                Ok(files)
            },
            &summary,
        )?;
        return Ok(failed.is_empty());
    }
    let ineq = inequality(c)?;
    let grid = ParameterGrid {
        geometries: vec![c.geometry()?],
        profiles: c.profiles.clone(),
        p: c.p.clone(),
        q: c.q.clone(),
        l: c.l.clone(),
        k: c.k.clone(),
        radius: c.radius.clone(),
    };
    let rows = sweep(&grid.cases(ineq), &opts, jobs)?;
    let ok = rows.iter().all(|r| r.report.as_ref().is_some_and(|r| r.holds));
    let mut summary = vec![format!("{ineq}: {} grid points", rows.len())];
    for r in &rows {
        summary.push(match (&r.report, &r.error) {
            (Some(rep), _) => format!(
                "{:4} {}: deficit {:.6e}, holds {}",
                r.index, r.case.profile, rep.deficit, rep.holds
            ),
            (None, e) => format!("{:4} {}: error {}", r.index, r.case.profile, e.clone().unwrap_or_default()),
        });
    }
    deliver(c, &format!("sweep_{ineq}"), &rows, |f, p| emit::emit_sweep(&rows, f, p), &summary)?;
    Ok(ok)
}

fn sharpness(c: &RunConfig) -> Result<bool> {
    let ineq = inequality(c)?;
    let geom = c.geometry()?;
    let objective = c.objective.unwrap_or(match ineq {
        Inequality::LpHardy | Inequality::Ckn => ObjectiveKind::SharpRatio,
        _ => ObjectiveKind::StabilityConstant,
    });
    let p = single(&c.p);
    let need_p = || p.context("--p is required");
    let space = match (objective, ineq) {
        (ObjectiveKind::SharpRatio, Inequality::LpHardy) => FamilySearchSpace::hardy_ratio(geom, need_p()?),
        (ObjectiveKind::SharpRatio, Inequality::Ckn) => FamilySearchSpace::ckn_ratio(geom, need_p()?),
        (ObjectiveKind::StabilityConstant, Inequality::LpHardy) => {
            FamilySearchSpace::bumps(geom, ExponentParams::with_p(need_p()?), 2)
        }
        (ObjectiveKind::StabilityConstant, Inequality::Rellich) => FamilySearchSpace::bumps(
            geom,
            ExponentParams {
                p: Some(need_p()?),
                k: Some(single(&c.k).unwrap_or(2)),
                ..Default::default()
            },
            3,
        ),
        (ObjectiveKind::StabilityConstant, Inequality::CriticalHardy) => {
            FamilySearchSpace::critical_bumps(geom, single(&c.radius).unwrap_or(1.0))
        }
        (o, i) => bail!("no {o:?} search for {i}"),
    };
    let settings = ProbeSettings {
        seed: c.seed,
        restarts: c.restarts.unwrap_or(ProbeSettings::default().restarts),
        eval: c.eval_options()?,
        ..ProbeSettings::default()
    };
    let budget = c.budget.unwrap_or(DEFAULT_BUDGET);
    let result = match objective {
        ObjectiveKind::SharpRatio => probe_sharp_constant(ineq, &space, budget, &settings)?,
        ObjectiveKind::StabilityConstant => estimate_stability_constant(ineq, &space, budget, &settings)?,
    };
    let mut summary = vec![format!(
        "{ineq} {objective:?}: best {:.10e} at {} after {} evaluations",
        result.best_value, result.best_profile, result.evaluations
    )];
    if let (Some(t), Some(fr)) = (result.theoretical, result.fraction_of_theoretical) {
        summary.push(format!("theoretical {t:.10e}, fraction {fr:.6}, sound {}", result.sound));
    }
    if result.skipped > 0 {
        summary.push(format!("{} points skipped below the distance floor", result.skipped));
    }
    deliver(
        c,
        &format!("sharpness_{ineq}"),
        &result,
        |f, p| emit::emit_probe(&result, f, p),
        &summary,
    )?;
    Ok(result.sound)
}

#[derive(Debug, Serialize)]
struct ConstantRow {
    name: &'static str,
    k: Option<u32>,
    p: Option<f64>,
    q: Option<f64>,
    #[serde(rename = "L")]
    l: Option<f64>,
    #[serde(rename = "Q")]
    q_dim: Option<f64>,
    value: f64,
}

fn constant_rows(c: &RunConfig) -> Result<Vec<ConstantRow>> {
    let dims = if c.q_dim.is_empty() {
        vec![c.geometry().context("--Q or a geometry is required")?.q()]
    } else {
        c.q_dim.clone()
    };
    let row = |name, k, p, q, l, q_dim, value| ConstantRow {
        name,
        k,
        p,
        q,
        l,
        q_dim,
        value,
    };
    let mut rows = Vec::new();
    for &qd in &dims {
        for &k in &c.k {
            for &p in &c.p {
                if k >= 2 && p >= 1.0 && (k as f64) * p < qd {
                    rows.push(row("K_kp", Some(k), Some(p), None, None, Some(qd), k_constant(k, p, qd)));
                }
            }
        }
        for &p in &c.p {
            if p > 1.0 && p < qd {
                rows.push(row("hardy", None, Some(p), None, None, Some(qd), ((qd - p) / p).powf(p)));
            }
        }
        for &l in &c.l {
            for &q in &c.q {
                if let Ok(v) = constant_clqq(l, qd, q) {
                    rows.push(row("C_LQq", None, None, Some(q), Some(l), Some(qd), v));
                }
            }
        }
    }
    for &p in &c.p {
        if p > 1.0 {
            rows.push(row("ckn", None, Some(p), None, None, None, p / (p - 1.0)));
        }
    }
    Ok(rows)
}

fn constants(c: &RunConfig) -> Result<bool> {
    let rows = constant_rows(c)?;
    let fmt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
    let mut summary = vec![format!("{:<6} {:>3} {:>6} {:>6} {:>6} {:>6}  value", "name", "k", "p", "q", "L", "Q")];
    for r in &rows {
        summary.push(format!(
            "{:<6} {:>3} {:>6} {:>6} {:>6} {:>6}  {:.16e}",
            r.name,
            r.k.map(|k| k.to_string()).unwrap_or_else(|| "-".into()),
            fmt(r.p),
            fmt(r.q),
            fmt(r.l),
            fmt(r.q_dim),
            r.value
        ));
    }
    deliver(
        c,
        "constants",
        &rows,
        |f, stem| {
            let mut files = Vec::new();
            if f.json() {
                let path = stem.with_extension("json");
                emit::write_file(&path, &emit::to_json_string(&rows)?)?;
                files.push(path);
            }
            if f.csv() {
                let path = stem.with_extension("csv");
                let mut text = String::from("name,k,p,q,L,Q,value\n");
                let opt = |x: Option<f64>| x.map(emit::format_float).unwrap_or_default();
                for r in &rows {
                    text.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        r.name,
                        r.k.map(|k| k.to_string()).unwrap_or_default(),
                        opt(r.p),
                        opt(r.q),
                        opt(r.l),
                        opt(r.q_dim),
                        emit::format_float(r.value)
                    ));
                }
                emit::write_file(&path, &text)?;
                files.push(path);
            }
            Ok(files)
        },
        &summary,
    )?;
    Ok(true)
}

fn run_selftest(c: &RunConfig) -> Result<bool> {
    let defaults = SelftestOptions::default();
    let opts = SelftestOptions {
        samples: c.samples.unwrap_or(defaults.samples),
        seed: c.seed,
        jobs: c.jobs.unwrap_or(0),
        eval: c.eval_options()?,
    };
    let report = selftest::run(&opts)?;
    let mut summary = vec![format!("selftest: {} passed, {} failed", report.passed, report.failed)];
    for ch in report.checks.iter().filter(|ch| !ch.passed) {
        summary.push(format!("FAIL {}: {}", ch.name, ch.detail));
    }
    deliver(
        c,
        "selftest",
        &report,
        |f, stem| {
            let mut files = Vec::new();
            if f.json() {
                let path = stem.with_extension("json");
                emit::write_file(&path, &emit::to_json_string(&report)?)?;
                files.push(path);
            }
            Ok(files)
        },
        &summary,
    )?;
    Ok(report.all_passed())
}
