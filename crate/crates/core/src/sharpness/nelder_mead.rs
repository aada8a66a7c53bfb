//! Nelder-Mead minimisation in the unit cube.

/// Outcome of one simplex run.
#[derive(Debug, Clone)]
pub(crate) struct Run {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evaluations: usize,
    /// `(evaluation index, best value so far)` at every improvement.
    pub trace: Vec<(usize, f64)>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimises `f` over `[0, 1]^d` from `start`, using at most `budget`
/// evaluations. Trial points are clamped to the cube; non-finite values
/// count as `+inf`.
pub(crate) fn minimize(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    step: f64,
    budget: usize,
) -> Run {
    let d = start.len();
    let mut run = Run {
        best_x: start.to_vec(),
        best_f: f64::INFINITY,
        evaluations: 0,
        trace: Vec::new(),
    };
    let eval = |x: &[f64], run: &mut Run| -> Option<f64> {
        if run.evaluations >= budget {
            return None;
        }
        run.evaluations += 1;
        let v = f(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < run.best_f {
            run.best_f = v;
            run.best_x = x.to_vec();
            run.trace.push((run.evaluations, v));
        }
        Some(v)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let x0: Vec<f64> = start.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    match eval(&x0, &mut run) {
        Some(v) => simplex.push((x0.clone(), v)),
        None => return run,
    }
    for i in 0..d {
        let mut x = x0.clone();
        x[i] = if x[i] + step <= 1.0 { x[i] + step } else { x[i] - step };
        match eval(&x, &mut run) {
            Some(v) => simplex.push((x, v)),
            None => return run,
        }
    }
    if d == 0 {
        return run;
    }

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[d].1 - simplex[0].1;
        let size = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| dist(x, &simplex[0].0))
            .fold(0.0, f64::max);
        if size < 1e-10 || (spread.abs() < 1e-14 * (1.0 + simplex[0].1.abs()) && size < 1e-6) {
            return run;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|(x, _)| x[j]).sum::<f64>() / d as f64)
            .collect();
        let toward = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| (c + t * (c - w)).clamp(0.0, 1.0))
                .collect()
        };
        let xr = toward(REFLECT);
        let Some(fr) = eval(&xr, &mut run) else { return run };
        if fr < simplex[0].1 {
            let xe = toward(EXPAND);
            let Some(fe) = eval(&xe, &mut run) else { return run };
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[d].1 {
            let xc = toward(CONTRACT);
            let Some(fc) = eval(&xc, &mut run) else { return run };
            (xc, fc)
        } else {
            let xc = toward(-CONTRACT);
            let Some(fc) = eval(&xc, &mut run) else { return run };
            (xc, fc)
        };
        if fc < fr.min(simplex[d].1) {
            simplex[d] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + SHRINK * (v - b))
                .collect();
            let Some(v) = eval(&x, &mut run) else { return run };
            *vertex = (x, v);
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_an_interior_minimum() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 10.0 * (x[1] - 0.7).powi(2);
        let run = minimize(&f, &[0.9, 0.1], 0.2, 500);
        assert!(run.best_f < 1e-12, "{}", run.best_f);
        assert!((run.best_x[0] - 0.3).abs() < 1e-5);
    }

    #[test]
    fn respects_the_box_and_the_budget() {
        // minimum outside the cube at x = -1: best point is on the face
        let f = |x: &[f64]| (x[0] + 1.0).powi(2) + x[1] * x[1];
        let run = minimize(&f, &[0.5, 0.5], 0.25, 300);
        assert!(run.best_x[0] < 1e-6 && run.best_x.iter().all(|v| (0.0..=1.0).contains(v)));
        let run = minimize(&f, &[0.5, 0.5], 0.25, 7);
        assert_eq!(run.evaluations, 7);
    }

    #[test]
    fn trace_is_monotone() {
        let f = |x: &[f64]| (x[0] * 7.0).sin() + x[0];
        let run = minimize(&f, &[0.8], 0.1, 100);
        assert!(run.trace.windows(2).all(|w| w[1].1 < w[0].1 && w[1].0 > w[0].0));
    }

    #[test]
    fn infeasible_points_are_avoided() {
        let f = |x: &[f64]| if x[0] > 0.6 { f64::NAN } else { -x[0] };
        let run = minimize(&f, &[0.1], 0.2, 200);
        assert!((run.best_x[0] - 0.6).abs() < 1e-4 && run.best_f.is_finite());
    }
}
