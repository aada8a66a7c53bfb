use hardybench::corpus;
use hardybench::functionals::EvalOptions;

#[test]
fn shipped_corpus_passes() {
    let verdicts = corpus::run(&EvalOptions::default(), 0).unwrap();
    let failed: Vec<_> = verdicts.iter().filter(|v| !v.passed()).collect();
    assert!(failed.is_empty(), "{failed:#?}");
}

#[test]
fn recorded_constants_have_not_drifted() {
    // the recorded value is the rounded-down corpus minimum; a fresh run must
    // stay above it and the record must be within 1% of the rounded minimum
    let verdicts = corpus::run(&EvalOptions::default(), 0).unwrap();
    let minima = corpus::minimum_ratios(&verdicts);
    let recorded = corpus::recorded_constants().unwrap();
    for (ineq, c0) in &recorded {
        let min = minima[ineq];
        assert!(min >= *c0, "{ineq}: corpus minimum {min} below recorded {c0}");
        assert!(*c0 >= 0.99 * corpus::round_down_3(min), "{ineq}: record {c0} stale against {min}");
    }
}
