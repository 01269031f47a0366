#![allow(dead_code)]

use proxpareto::expr::{AffineForm, Expr};
use proxpareto::function::{GuardInterval, PiecewiseFunction, VectorFunction};
use proxpareto::problem::{ConstraintSet, MOProblem};

pub fn x() -> Expr {
    Expr::coord(1, 0)
}

pub fn cbrt() -> Expr {
    Expr::power(AffineForm::coord(1, 0), 1, 3).unwrap()
}

pub fn one(e: Expr) -> PiecewiseFunction {
    PiecewiseFunction::from_expr(1, e).unwrap()
}

pub fn shifted_square(c: f64) -> Expr {
    Expr::square(Expr::affine(vec![1.0], -c))
}

/// `x^{1/3}` for `x > 0`, `x² + x` for `x ≤ 0`.
pub fn cube_root_quadratic() -> PiecewiseFunction {
    PiecewiseFunction::from_intervals_1d(
        vec![
            (
                GuardInterval {
                    lo: f64::NEG_INFINITY,
                    lo_open: true,
                    hi: 0.0,
                    hi_open: false,
                },
                Expr::sum(vec![Expr::square(x()), x()]),
            ),
            (
                GuardInterval {
                    lo: 0.0,
                    lo_open: true,
                    hi: f64::INFINITY,
                    hi_open: true,
                },
                cbrt(),
            ),
        ],
        true,
    )
    .unwrap()
}

/// `((x+1)², cube_root_quadratic)`, Pareto set `[-1, -1/2]`.
pub fn cube_root_pareto() -> MOProblem {
    let f = VectorFunction::new(vec![one(shifted_square(-1.0)), cube_root_quadratic()]).unwrap();
    MOProblem::new(f, ConstraintSet::whole(1)).unwrap()
}

pub fn two_parabolas() -> MOProblem {
    let f = VectorFunction::new(vec![one(Expr::square(x())), one(shifted_square(1.0))]).unwrap();
    MOProblem::new(f, ConstraintSet::whole(1)).unwrap()
}

pub fn scalar(f: PiecewiseFunction, omega: ConstraintSet) -> MOProblem {
    MOProblem::new(VectorFunction::new(vec![f]).unwrap(), omega).unwrap()
}

pub fn balanced(m: usize) -> Vec<f64> {
    vec![1.0 / (m as f64).sqrt(); m]
}
