//! The shipped test corpus and its recorded stability constants.
//!
//! `data/corpus.json` lists the cases, `data/c0.json` the constant `c0` per
//! inequality: the corpus minimum of `deficit / sup_distance^power`,
//! rounded down to three significant digits. A run passes when every
//! deficit is non-negative within slack, every stability ratio is at least
//! its recorded `c0`, and every logarithmic Hardy ratio stays below its
//! sharp constant.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{Case, EvalOptions, Inequality, SHARP_SLACK};
use crate::sharpness::{sweep, SweepRow};

const CORPUS: &str = include_str!("../data/corpus.json");
const CONSTANTS: &str = include_str!("../data/c0.json");

/// The shipped cases, in file order.
pub fn cases() -> Result<Vec<Case>> {
    serde_json::from_str(CORPUS).map_err(|e| Error::param("corpus", e.to_string()))
}

/// Recorded `c0` for each inequality with a distance term.
pub fn recorded_constants() -> Result<BTreeMap<Inequality, f64>> {
    serde_json::from_str(CONSTANTS).map_err(|e| Error::param("c0", e.to_string()))
}

/// Rounds `x > 0` down to three significant digits.
pub fn round_down_3(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return x;
    }
    let e = x.log10().floor() as i32 - 2;
    let scale = 10f64.powi(e);
    let r = (x / scale).floor() * scale;
    // guard against the division rounding up
    if r > x {
        ((x / scale).floor() - 1.0) * scale
    } else {
        r
    }
}

/// Outcome of one corpus case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub index: usize,
    pub inequality: Inequality,
    pub case: String,
    pub deficit_ok: bool,
    /// `deficit / sup^power`, when the case has a distance term.
    pub stability_ratio: Option<f64>,
    pub stability_ok: bool,
    pub ratio_ok: bool,
    pub error: Option<String>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.deficit_ok && self.stability_ok && self.ratio_ok
    }
}

/// Judges a sweep row against the recorded constants.
pub fn judge(row: &SweepRow, c0: &BTreeMap<Inequality, f64>) -> Verdict {
    let inequality = row.case.inequality;
    let mut v = Verdict {
        index: row.index,
        inequality,
        case: format!("{} on {}", row.case.profile, row.case.geometry),
        deficit_ok: false,
        stability_ratio: None,
        stability_ok: false,
        ratio_ok: false,
        error: row.error.clone(),
    };
    let Some(report) = &row.report else {
        return v;
    };
    v.deficit_ok = report.deficit_nonnegative();
    v.stability_ratio = report.stability_ratio();
    v.stability_ok = match (c0.get(&inequality), v.stability_ratio) {
        (Some(c), Some(r)) => r >= *c,
        (Some(_), None) => false,
        (None, _) => true,
    };
    v.ratio_ok = match (report.ratio, report.sharp_constant) {
        (Some(r), Some(c)) => r <= c * (1.0 + SHARP_SLACK),
        _ => true,
    };
    if inequality == Inequality::RadialImproved {
        v.deficit_ok &= report.margin.is_some_and(|m| m >= -1e-9 * (1.0 + report.lhs.abs()));
    }
    v
}

/// Evaluates the whole corpus on `jobs` threads and judges every case.
pub fn run(opts: &EvalOptions, jobs: usize) -> Result<Vec<Verdict>> {
    let cases = cases()?;
    let c0 = recorded_constants()?;
    let rows = sweep(&cases, opts, jobs)?;
    Ok(rows.iter().map(|r| judge(r, &c0)).collect())
}

/// Smallest stability ratio per inequality over a set of verdicts.
pub fn minimum_ratios(verdicts: &[Verdict]) -> BTreeMap<Inequality, f64> {
    let mut out: BTreeMap<Inequality, f64> = BTreeMap::new();
    for v in verdicts {
        if let Some(r) = v.stability_ratio {
            let e = out.entry(v.inequality).or_insert(f64::INFINITY);
            *e = e.min(r);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_has_twenty_cases_per_inequality() {
        let cases = cases().unwrap();
        for ineq in [
            Inequality::LpHardy,
            Inequality::Ckn,
            Inequality::CriticalHardy,
            Inequality::RadialImproved,
            Inequality::Rellich,
        ] {
            let n = cases.iter().filter(|c| c.inequality == ineq).count();
            assert!(n >= 20, "{ineq}: {n} cases");
        }
    }

    #[test]
    fn constants_are_positive() {
        let c0 = recorded_constants().unwrap();
        assert!(c0.len() >= 3);
        assert!(c0.values().all(|c| *c > 0.0 && c.is_finite()));
    }

    #[test]
    fn rounding_down_keeps_three_digits() {
        assert_eq!(round_down_3(0.123456), 0.123);
        assert_eq!(round_down_3(98765.0), 98700.0);
        assert!(round_down_3(1.0) <= 1.0);
        for x in [3.3e-7, 0.999999, 12.3456, 7.0] {
            let r = round_down_3(x);
            assert!(r <= x && r > 0.99 * x, "{x} -> {r}");
        }
    }
}
