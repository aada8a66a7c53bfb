use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::rule::KronrodRule;
use super::{Estimate, Integrand1D, QuadratureSpec, Substitution, Tail};
use crate::error::{Error, Result};

/// Segments wider than this ratio (both ends positive) are integrated in `log x`.
const LOG_SCALE_RATIO: f64 = 16.0;

struct Segment<'a> {
    lo: f64,
    hi: f64,
    sub: Substitution,
    g: Box<dyn Fn(f64) -> f64 + 'a>,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    seg: usize,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
    floor: bool,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.seg.cmp(&self.seg))
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// Integrates `f` over `(f.a, f.b)` to `max(rel_tol |I|, abs_tol)`.
///
/// Panels are refined in order of decreasing error estimate across all
/// segments; the final sum runs over segments and panels in interval order,
/// so the result is deterministic for a given integrand and spec.
pub fn integrate_radial(f: &Integrand1D<'_>, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    let rule = KronrodRule::by_order(spec.order).expect("validated order");
    if f.a.is_nan() || f.b.is_nan() || f.a > f.b {
        return Err(Error::param(
            "interval",
            format!("invalid integration interval ({}, {})", f.a, f.b),
        ));
    }
    if f.a == f.b {
        return Ok(Estimate::zero());
    }
    let segments = build_segments(f, spec)?;
    run(&segments, rule, spec)
}

fn run(segments: &[Segment<'_>], rule: &KronrodRule, spec: &QuadratureSpec) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut finals: Vec<Panel> = Vec::new();
    let mut evaluations = 0usize;

    let evaluate = |seg: usize, lo: f64, hi: f64, evaluations: &mut usize| -> Result<Panel> {
        let est = rule.apply(&*segments[seg].g, lo, hi);
        *evaluations += rule.evaluations();
        if let Some(x) = est.bad_x {
            return Err(Error::NonFiniteIntegrand { x });
        }
        Ok(Panel {
            seg,
            lo,
            hi,
            value: est.value,
            error: est.error,
            floor: est.roundoff_floor,
        })
    };

    let mut total = 0.0;
    let mut active_err = 0.0;
    for (i, s) in segments.iter().enumerate() {
        let p = evaluate(i, s.lo, s.hi, &mut evaluations)?;
        total += p.value;
        active_err += p.error;
        heap.push(p);
    }

    let tol = |v: f64| spec.abs_tol.max(spec.rel_tol * v.abs());
    let mut panels = segments.len();
    let mut iterations = 0usize;
    loop {
        if active_err <= tol(total) {
            // confirm against exact sums so the final check below agrees
            total = heap.iter().chain(finals.iter()).map(|q| q.value).sum();
            active_err = heap.iter().map(|q| q.error).sum();
            if active_err <= tol(total) {
                break;
            }
        }
        if panels >= spec.max_panels {
            break;
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.lo + p.hi);
        if p.floor || mid <= p.lo || mid >= p.hi {
            active_err -= p.error;
            finals.push(p);
            continue;
        }
        let left = evaluate(p.seg, p.lo, mid, &mut evaluations)?;
        let right = evaluate(p.seg, mid, p.hi, &mut evaluations)?;
        total += left.value + right.value - p.value;
        active_err += left.error + right.error - p.error;
        heap.push(left);
        heap.push(right);
        panels += 1;
        iterations += 1;
        if iterations.is_multiple_of(64) {
            // incremental sums drift; resynchronise
            total = heap.iter().chain(finals.iter()).map(|q| q.value).sum();
            active_err = heap.iter().map(|q| q.error).sum();
        }
    }

    let mut all: Vec<Panel> = heap.into_vec();
    let active: f64 = all.iter().map(|q| q.error).sum();
    all.extend(finals.iter().copied());
    all.sort_by(|x, y| x.seg.cmp(&y.seg).then(x.lo.total_cmp(&y.lo)));
    let value: f64 = all.iter().map(|q| q.value).sum();
    let err_est: f64 = all.iter().map(|q| q.error).sum();

    let mut substitutions: Vec<Substitution> = Vec::new();
    for s in segments {
        if !substitutions.contains(&s.sub) {
            substitutions.push(s.sub);
        }
    }
    if active > tol(value) {
        return Err(Error::NonConvergence {
            value,
            err_est,
            panels: all.len(),
        });
    }
    Ok(Estimate {
        value,
        err_est,
        panels: all.len(),
        evaluations,
        roundoff_limited: !finals.is_empty(),
        substitutions,
    })
}

fn build_segments<'a>(f: &'a Integrand1D<'a>, spec: &QuadratureSpec) -> Result<Vec<Segment<'a>>> {
    let (a, b) = (f.a, f.b);
    if let Some(e) = f.power_at_a {
        if !a.is_finite() || !(e > -1.0) {
            return Err(Error::param(
                "power_at_a",
                format!("power weight needs a finite left end and exponent > -1 (got {e})"),
            ));
        }
    }
    if let Some(k) = f.log_at_b {
        if !b.is_finite() || !(b > 0.0) || a < 0.0 || !(k > -1.0) {
            return Err(Error::param(
                "log_at_b",
                format!("log weight needs 0 <= a < b < inf and order > -1 (got {k})"),
            ));
        }
    }

    let mut points = vec![a];
    let mut interior: Vec<f64> = f
        .breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    interior.sort_by(f64::total_cmp);
    interior.dedup();
    points.extend(interior);
    points.push(b);

    let scale = |c: f64| f.tail_scale.unwrap_or_else(|| c.abs().max(1.0));

    if !spec.substitutions {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::param(
                "substitutions",
                "infinite intervals need the tail substitutions",
            ));
        }
        return Ok(points
            .windows(2)
            .map(|w| Segment {
                lo: w[0],
                hi: w[1],
                sub: Substitution::None,
                g: Box::new(move |x| f.eval(x)),
            })
            .collect());
    }

    // Infinite ends need a finite anchor point.
    if points.len() == 2 {
        match (a.is_finite(), b.is_finite()) {
            (false, false) => points.insert(1, 0.0),
            (true, false) if f.power_at_a.is_some() => {
                points.insert(1, a + f.tail_scale.unwrap_or(1.0))
            }
            _ => {}
        }
    }
    if f.power_at_a.is_some() && !points[1].is_finite() {
        points.insert(1, a + f.tail_scale.unwrap_or(1.0));
    }
    if f.log_at_b.is_some() {
        let n = points.len();
        let c = points[n - 2];
        if c <= 0.0 || (n == 2 && f.power_at_a.is_some()) {
            let split = if c <= 0.0 && f.power_at_a.is_none() {
                0.5 * b
            } else {
                0.5 * (c + b)
            };
            points.insert(n - 1, split);
        }
    }

    let n_seg = points.len() - 1;
    let mut segments = Vec::with_capacity(n_seg);
    for i in 0..n_seg {
        let (lo, hi) = (points[i], points[i + 1]);
        let first = i == 0;
        let last = i == n_seg - 1;
        let seg = if first && f.power_at_a.is_some() {
            power_segment(f, lo, hi)
        } else if last && f.log_at_b.is_some() {
            log_segment(f, lo, hi)
        } else if lo == f64::NEG_INFINITY {
            left_tail_segment(f, hi, scale(hi))
        } else if hi == f64::INFINITY {
            right_tail_segment(f, lo, scale(lo))
        } else if lo > 0.0 && hi / lo > LOG_SCALE_RATIO {
            Segment {
                lo: lo.ln(),
                hi: hi.ln(),
                sub: Substitution::LogScale,
                g: Box::new(move |s| {
                    let x = s.exp();
                    let v = f.eval(x);
                    if v == 0.0 {
                        0.0
                    } else {
                        v * x
                    }
                }),
            }
        } else {
            Segment {
                lo,
                hi,
                sub: Substitution::None,
                g: Box::new(move |x| f.eval(x)),
            }
        };
        segments.push(seg);
    }
    Ok(segments)
}

/// `(x - a)^e` on `[a, c]` via `x = a + (c - a) s^{1/(1+e)}`.
fn power_segment<'a>(f: &'a Integrand1D<'a>, a: f64, c: f64) -> Segment<'a> {
    let e = f.power_at_a.expect("power segment");
    let len = c - a;
    let inv = 1.0 / (1.0 + e);
    let factor = len.powf(1.0 + e) * inv;
    let log_k = f.log_at_b;
    let b = f.b;
    Segment {
        lo: 0.0,
        hi: 1.0,
        sub: Substitution::PowerAtZero,
        g: Box::new(move |s| {
            let x = a + len * s.powf(inv);
            let mut v = f.raw(x);
            if v == 0.0 {
                return 0.0;
            }
            if let Some(k) = log_k {
                v *= (b / x).ln().powf(k);
            }
            factor * v
        }),
    }
}

/// `(log(b/x))^k` on `[c, b]` via `t = log(b/x)` and the power map in `t`.
fn log_segment<'a>(f: &'a Integrand1D<'a>, c: f64, b: f64) -> Segment<'a> {
    let k = f.log_at_b.expect("log segment");
    let span = (b / c).ln();
    let inv = 1.0 / (1.0 + k);
    let factor = span.powf(1.0 + k) * inv;
    let power = f.power_at_a;
    let a = f.a;
    Segment {
        lo: 0.0,
        hi: 1.0,
        sub: Substitution::LogAtR,
        g: Box::new(move |s| {
            let t = span * s.powf(inv);
            let x = b * (-t).exp();
            let mut v = f.raw(x);
            if v == 0.0 {
                return 0.0;
            }
            if let Some(e) = power {
                v *= (x - a).powf(e);
            }
            factor * v * x
        }),
    }
}

fn right_tail_segment<'a>(f: &'a Integrand1D<'a>, c: f64, s: f64) -> Segment<'a> {
    match f.tail {
        Tail::Algebraic => Segment {
            lo: 0.0,
            hi: 1.0,
            sub: Substitution::RationalTail,
            g: Box::new(move |u| {
                let w = 1.0 - u;
                if w <= 0.0 {
                    // the node rounded onto the point at infinity
                    return 0.0;
                }
                let v = f.eval(c + s * u / w);
                if v == 0.0 {
                    0.0
                } else {
                    v * s / (w * w)
                }
            }),
        },
        Tail::Exponential => Segment {
            lo: 0.0,
            hi: 1.0,
            sub: Substitution::ExpTail,
            g: Box::new(move |u| {
                let w = 1.0 - u;
                if w <= 0.0 {
                    // the node rounded onto the point at infinity
                    return 0.0;
                }
                let v = f.eval(c - s * w.ln());
                if v == 0.0 {
                    0.0
                } else {
                    v * s / w
                }
            }),
        },
    }
}

fn left_tail_segment<'a>(f: &'a Integrand1D<'a>, c: f64, s: f64) -> Segment<'a> {
    match f.tail {
        Tail::Algebraic => Segment {
            lo: 0.0,
            hi: 1.0,
            sub: Substitution::RationalTail,
            g: Box::new(move |u| {
                let w = 1.0 - u;
                if w <= 0.0 {
                    // the node rounded onto the point at infinity
                    return 0.0;
                }
                let v = f.eval(c - s * u / w);
                if v == 0.0 {
                    0.0
                } else {
                    v * s / (w * w)
                }
            }),
        },
        Tail::Exponential => Segment {
            lo: 0.0,
            hi: 1.0,
            sub: Substitution::ExpTail,
            g: Box::new(move |u| {
                let w = 1.0 - u;
                if w <= 0.0 {
                    // the node rounded onto the point at infinity
                    return 0.0;
                }
                let v = f.eval(c + s * w.ln());
                if v == 0.0 {
                    0.0
                } else {
                    v * s / w
                }
            }),
        },
    }
}
