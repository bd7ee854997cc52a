use std::sync::Arc;

use impulsive_core::bounds::{
    dependence_function_bound, dependence_initial_bound, dependence_parameter_bound, maximal_solution,
    PachpatteInstance, PreparedBound,
};
use impulsive_core::linalg::inf_dist;
use impulsive_core::model::catalog::entry;
use impulsive_core::semigroup::{operator_norm_bound, DEFAULT_NORM_SAMPLES};
use impulsive_core::solver::{jump_value, solve_mild, Discretization, PicardControl};
use impulsive_core::trajectory::History;
use proptest::prelude::*;

fn solve(
    name: &str,
    h: f64,
) -> (
    impulsive_core::model::ImpulsiveProblem,
    impulsive_core::trajectory::PiecewiseTrajectory,
) {
    let p = entry(name).unwrap().problem;
    let (traj, _) = solve_mild(&p, &Discretization::new(h).unwrap(), &PicardControl::default()).unwrap();
    (p, traj)
}

#[test]
fn jump_bookkeeping_on_converged_solves() {
    for name in ["paper_example", "coupled_impulsive"] {
        let (p, traj) = solve(name, 0.02);
        for k in 1..=p.impulse_count() {
            let tk = p.schedule.time(k);
            let stored = traj.jump(k).unwrap();
            let recomputed = jump_value(&p, &traj, k).unwrap();
            let scale = 1.0 + recomputed.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(
                inf_dist(&stored, &recomputed) <= 4.0 * f64::EPSILON * scale,
                "{name} k = {k}"
            );
            let diff: Vec<f64> = traj
                .eval_right(tk)
                .unwrap()
                .iter()
                .zip(traj.eval(tk).unwrap())
                .map(|(r, l)| r - l)
                .collect();
            assert_eq!(diff, stored);
        }
    }
}

#[test]
fn history_segment_at_zero_reproduces_history() {
    let (p, traj) = solve("coupled_impulsive", 0.05);
    let seg = traj.history_segment(0.0).unwrap();
    for (i, &theta) in seg.theta_grid().iter().enumerate() {
        assert_eq!(seg.value(i), (p.history)(theta).as_slice());
    }
    let view = traj.view(0.0, false);
    assert_eq!(view.at(-0.25), (p.history)(-0.25));
}

#[test]
fn left_continuity_at_impulses() {
    let (p, traj) = solve("coupled_impulsive", 0.01);
    for &tk in &p.schedule.times {
        let at = traj.eval(tk).unwrap();
        let near = traj.eval(tk - 1e-9).unwrap();
        assert!(inf_dist(&at, &near) < 1e-6);
    }
}

#[test]
fn picard_counts_do_not_grow_as_h_shrinks() {
    let p = entry("coupled_impulsive").unwrap().problem;
    let mut previous: Option<Vec<usize>> = None;
    for h in [0.04, 0.02, 0.01] {
        let (_, report) = solve_mild(&p, &Discretization::new(h).unwrap(), &PicardControl::default()).unwrap();
        if let Some(prev) = &previous {
            for (a, b) in prev.iter().zip(&report.iterations_per_segment) {
                assert!(b <= a, "h = {h}: {prev:?} -> {:?}", report.iterations_per_segment);
            }
        }
        previous = Some(report.iterations_per_segment);
    }
}

fn smooth(c0: f64, c1: f64, w: f64) -> impulsive_core::model::ScalarFn {
    Arc::new(move |t: f64| c0 * (1.0 + c1 * (w * t).sin()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_never_exceeds_bound(
        f0 in 0.0f64..1.0, g0 in 0.0f64..1.0, c in -1.0f64..1.0, w in 0.5f64..8.0,
        t1 in 0.2f64..0.45, t2 in 0.55f64..0.9, a in 0.0f64..0.5, b in 0.5f64..1.0,
        beta in proptest::collection::vec(0.0f64..2.0, 2),
    ) {
        let gaps = [t1, t2 - t1];
        let inst = PachpatteInstance {
            n: Arc::new(|t| 1.0 + t * t),
            f: smooth(f0, c, w),
            g: smooth(g0, -c, 2.0 * w),
            impulse_times: vec![t1, t2],
            beta,
            theta: gaps.iter().map(|l| a * l).collect(),
            tau: gaps.iter().map(|l| b * l).collect(),
            horizon: 1.0,
        };
        let h = 1.0 / 256.0;
        let u = maximal_solution(&inst, &inst.grid(h)).unwrap();
        let bound = PreparedBound::new(&inst, 512).unwrap();
        let tol = 1e-8 + 10.0 * h * h;
        for (i, &t) in u.nodes.iter().enumerate() {
            prop_assert!(u.left[i] <= bound.value(t).unwrap() + tol);
            prop_assert!(u.right[i] <= bound.value_right(t).unwrap() + tol);
        }
    }

    #[test]
    fn dependence_bounds_are_nonnegative_and_vanish_with_gap(
        gap in 0.0f64..2.0, rho in 0.0f64..2.0, mu in 0.0f64..2.0, lg in 0.0f64..0.03,
    ) {
        let e = entry("paper_example").unwrap().with("lg", lg).unwrap();
        let sg = operator_norm_bound(&e.problem.generator, e.problem.horizon, DEFAULT_NORM_SAMPLES).unwrap();
        let (p, lip) = (&e.problem, &e.lipschitz);
        let initial = dependence_initial_bound(p, lip, &sg, gap, None).unwrap();
        prop_assert!(initial >= 0.0);
        prop_assert_eq!(initial == 0.0, gap == 0.0);
        prop_assert_eq!(dependence_initial_bound(p, lip, &sg, 0.0, None).unwrap(), 0.0);
        let param = dependence_parameter_bound(p, lip, &sg, rho, mu, None).unwrap();
        prop_assert!(param >= 0.0);
        prop_assert_eq!(dependence_parameter_bound(p, lip, &sg, 0.0, 0.0, None).unwrap(), 0.0);
        let mut perturbed = lip.clone();
        perturbed.p = gap;
        let function = dependence_function_bound(p, &perturbed, &sg, None).unwrap();
        prop_assert!(function >= 0.0);
        prop_assert_eq!(function == 0.0, gap == 0.0);
    }
}
