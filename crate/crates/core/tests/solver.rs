mod common;

use common::*;
use proxpareto::expr::Expr;
use proxpareto::problem::ConstraintSet;
use proxpareto::solver::{proximal_step, solve_ppa, SolverConfig, Termination};

#[test]
fn scalar_ppa_contracts_geometrically() {
    let p = scalar(one(Expr::square(x())), ConstraintSet::whole(1));
    let t = solve_ppa(&p, &[1.0], 0.5, &[1.0], &SolverConfig::default()).unwrap();
    let k = t.iterates.iter().position(|r| r.x[0].abs() <= 1e-3).expect("reaches 1e-3");
    assert!(k <= 8, "k = {k}");
    for w in t.iterates.windows(2).take(4) {
        assert!((w[1].x[0] - w[0].x[0] / 3.0).abs() <= 1e-4, "{} -> {}", w[0].x[0], w[1].x[0]);
    }
    assert!(t.is_monotone(1e-10));
}

#[test]
fn two_parabolas_end_in_pareto_set() {
    let t = solve_ppa(&two_parabolas(), &[2.0], 1.0, &balanced(2), &SolverConfig::default()).unwrap();
    let x = t.final_point()[0];
    assert!((-1e-3..=1.0 + 1e-3).contains(&x), "x = {x}");
    assert!(t.is_monotone(1e-10));
    assert_eq!(t.termination, Termination::StepTolerance);
    assert!(t.final_check.certificate().is_some_and(|c| c.is_feasible()), "{:?}", t.final_check);
}

#[test]
fn cube_root_pareto_run_lands_near_pareto_interval() {
    let t = solve_ppa(&cube_root_pareto(), &[1.0], 1.0, &balanced(2), &SolverConfig::default()).unwrap();
    let x = t.final_point()[0];
    assert!((-1.0 - 1e-2..=-0.5 + 1e-2).contains(&x), "x = {x}");
    assert!(t.is_monotone(1e-10));
    assert!(t.iterates.iter().all(|r| r.x[0].is_finite()));
}

#[test]
fn collapsed_feasible_set_gives_null_step() {
    let s = proximal_step(&cube_root_pareto(), &[-1.0], 1.0, &balanced(2), &SolverConfig::default()).unwrap();
    assert!(s.null_step);
    assert_eq!(s.x_next, vec![-1.0]);
}

#[test]
fn constrained_run_stays_feasible() {
    // minimizer of (x+1)² over [0, 2] is the boundary point 0
    let p = scalar(one(shifted_square(-1.0)), ConstraintSet::interval(0.0, 2.0));
    let t = solve_ppa(&p, &[2.0], 1.0, &[1.0], &SolverConfig::default()).unwrap();
    assert!(t.iterates.iter().all(|r| p.constraint.contains(&r.x)));
    assert!(t.final_point()[0] <= 1e-3, "{:?}", t.final_point());
}

#[test]
fn traces_do_not_depend_on_thread_count() {
    let cfg = SolverConfig::default().with_max_outer(5);
    let a = solve_ppa(&two_parabolas(), &[2.0], 1.0, &balanced(2), &cfg).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| solve_ppa(&two_parabolas(), &[2.0], 1.0, &balanced(2), &cfg).unwrap());
    assert_eq!(a, b);
}
