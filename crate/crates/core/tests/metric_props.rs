use proptest::prelude::*;
use qfilter::metrics::{filtered_fraction, uniform_grid};
use qfilter::{compare, evaluate, joint_sweep, sweep, Decision};

fn labeled(max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (1..=max).prop_flat_map(|n| (prop::collection::vec(0.0..=1.0f64, n), prop::collection::vec(any::<bool>(), n)))
}

fn decisions(sigma: &[f64], correct: &[bool], tau1: f64) -> Vec<Decision> {
    sigma
        .iter()
        .zip(correct)
        .enumerate()
        .map(|(i, (&s, &c))| Decision {
            question_id: format!("q{i}"),
            sigma: s,
            best_candidate_index: Some(0),
            answered: s > tau1,
            correct: Some(c),
        })
        .collect()
}

proptest! {
    #[test]
    fn precision_equals_recall_at_zero((sigma, correct) in labeled(60)) {
        let sigma: Vec<f64> = sigma.into_iter().map(|s| s.max(1e-9)).collect();
        let p = &sweep(&sigma, &correct, &[0.0]).unwrap().points[0].metrics;
        prop_assert_eq!(p.precision, Some(p.recall));
    }

    #[test]
    fn finer_grid_contains_coarser((sigma, correct) in labeled(40), k in 1usize..20) {
        let coarse = uniform_grid(11).unwrap();
        let fine = uniform_grid(10 * k + 1).unwrap();
        let c = sweep(&sigma, &correct, &coarse).unwrap();
        let f = sweep(&sigma, &correct, &fine).unwrap();
        for p in &c.points {
            let q = f.points.iter().find(|q| q.tau == p.tau);
            prop_assert!(q.is_some(), "tau {} missing from the finer grid", p.tau);
            prop_assert_eq!(&q.unwrap().metrics, &p.metrics);
        }
    }

    #[test]
    fn recall_never_rises_above_threshold((sigma, correct) in labeled(40)) {
        let curve = sweep(&sigma, &correct, &uniform_grid(51).unwrap()).unwrap();
        for w in curve.points.windows(2) {
            prop_assert!(w[1].metrics.recall <= w[0].metrics.recall);
        }
    }

    #[test]
    fn filtering_only_removes_answers(
        (sigma, correct) in labeled(40),
        f_seed in prop::collection::vec(0.0..=1.0f64, 40),
        tau1 in 0.0..=1.0f64,
    ) {
        let f = &f_seed[..sigma.len()];
        let d = decisions(&sigma, &correct, tau1);
        let grid = uniform_grid(101).unwrap();
        let mut last_pct = -1.0;
        for &tau2 in &grid {
            let r = compare(&d, f, tau1, tau2).unwrap();
            prop_assert!(r.filtered.recall <= r.base.recall);
            prop_assert!(r.filtered.answered <= r.base.answered);
            prop_assert!(r.pct_filter >= last_pct);
            last_pct = r.pct_filter;
        }
    }

    #[test]
    fn joint_sweep_is_bounded_by_either_stage(
        (sigma, correct) in labeled(40),
        f_seed in prop::collection::vec(0.0..=1.0f64, 40),
    ) {
        let f = &f_seed[..sigma.len()];
        let grid = uniform_grid(21).unwrap();
        let joint = joint_sweep(f, &sigma, &correct, &grid).unwrap();
        let alone = sweep(&sigma, &correct, &grid).unwrap();
        for (j, a) in joint.points.iter().zip(&alone.points) {
            prop_assert!(j.metrics.answered <= a.metrics.answered);
            prop_assert_eq!(j.filtered_fraction, Some(filtered_fraction(f, j.tau)));
        }
    }

    #[test]
    fn evaluate_matches_sweep_at_the_same_threshold((sigma, correct) in labeled(40), tau in 0.0..=1.0f64) {
        let d = decisions(&sigma, &correct, tau);
        let e = evaluate(&d).unwrap();
        let s = sweep(&sigma, &correct, &[tau]).unwrap();
        prop_assert_eq!(e, s.points[0].metrics);
    }
}
