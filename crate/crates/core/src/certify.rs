//! Multiplier certificates for Pareto candidates of regularized problems,
//! exact-penalty scans, and local Lipschitz tests.

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirlip::{certify_dl, DLSchedule, DLVerdict};
use crate::error::{Error, Result};
use crate::function::{PiecewiseFunction, VectorFunction};
use crate::problem::{ConstraintSet, Grid, RegularizedProblem};
use crate::subdiff::product_subdiff;

/// Local Lipschitz verdict for one component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LipschitzVerdict {
    pub lipschitz: bool,
    /// Decided by sampling rather than the exact singular subdifferential.
    pub approximate: bool,
}

/// Per-component local Lipschitz test at `x`.
pub fn lipschitz_at(f: &VectorFunction, x: &[f64]) -> Result<Vec<LipschitzVerdict>> {
    if x.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    f.components
        .iter()
        .map(|fi| match product_subdiff(fi, x) {
            Ok(p) => Ok(LipschitzVerdict {
                lipschitz: p.lipschitz(),
                approximate: p.approximate,
            }),
            Err(Error::Unsupported(_)) => Ok(LipschitzVerdict {
                lipschitz: sampled_lipschitz(fi, x),
                approximate: true,
            }),
            Err(e) => Err(e),
        })
        .collect()
}

/// Largest sampled difference quotient on shrinking balls; Lipschitz when
/// it stops growing.
fn sampled_lipschitz(f: &PiecewiseFunction, x: &[f64]) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11b5);
    let n = x.len();
    let quotients: Vec<f64> = (1..=6)
        .map(|j| {
            let r = 10f64.powi(-j);
            let mut q = 0.0f64;
            for _ in 0..256 {
                let a: Vec<f64> = x.iter().map(|v| v + r * rng.gen_range(-1.0..1.0)).collect();
                let b: Vec<f64> = x.iter().map(|v| v + r * rng.gen_range(-1.0..1.0)).collect();
                let d = (0..n).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt();
                let (fa, fb) = (f.value(&a), f.value(&b));
                if d > 0.0 && fa.is_finite() && fb.is_finite() {
                    q = q.max((fa - fb).abs() / d);
                }
            }
            q
        })
        .collect();
    quotients[5] <= 2.0 * quotients[2] + 1e-6
}

/// Coefficient of the prox term in the stationarity inclusion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxConvention {
    /// `2λ`, the derivative of `λ‖x − x̃‖²`.
    #[default]
    Analytic,
    /// `λ`, as the condition is usually printed.
    PaperLiteral,
}

impl ProxConvention {
    pub fn factor(self, lambda: f64) -> f64 {
        match self {
            ProxConvention::Analytic => 2.0 * lambda,
            ProxConvention::PaperLiteral => lambda,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Stationarity tolerance.
    pub tol: f64,
    /// `|f_i(x̄) − f_i(x̃)|` above this forces `β_i = 0`.
    pub active_tol: f64,
    pub convention: ProxConvention,
    /// Bound on the total weight of normal-cone generators.
    pub normal_cap: f64,
    pub max_selections: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            active_tol: 1e-9,
            convention: ProxConvention::Analytic,
            normal_cap: 1e6,
            max_selections: 4096,
        }
    }
}

impl CertifyOptions {
    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn paper_literal(mut self, on: bool) -> Self {
        self.convention = if on {
            ProxConvention::PaperLiteral
        } else {
            ProxConvention::Analytic
        };
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertVerdict {
    Feasible,
    NoCertificate,
}

/// Multipliers, subgradients and normal element witnessing the necessary
/// condition at `point`, with independently recomputed residuals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierCertificate {
    pub point: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// Selected limiting subgradient of each objective.
    pub subgradients: Vec<Vec<f64>>,
    /// Weights on the normal-cone generators.
    pub normal_weights: Vec<f64>,
    pub normal_generators: Vec<Vec<f64>>,
    pub normal: Vec<f64>,
    /// `‖w‖`.
    pub tau: f64,
    /// Euclidean defect of the inclusion.
    pub stationarity: f64,
    pub normalization: f64,
    pub complementarity: f64,
    /// Convex piece `[lo, hi]` per coordinate used for each objective.
    #[serde(with = "selection_serde")]
    pub selection: Vec<Vec<(f64, f64)>>,
    pub selection_index: usize,
    pub selections_tried: usize,
    pub convention: ProxConvention,
    pub verdict: CertVerdict,
}

mod selection_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::report::ext_pair;

    #[derive(Serialize, Deserialize)]
    struct P(#[serde(with = "ext_pair")] (f64, f64));

    pub fn serialize<S: Serializer>(v: &[Vec<(f64, f64)>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|row| row.iter().map(|&p| P(p)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<(f64, f64)>>, D::Error> {
        Ok(Vec::<Vec<P>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(|p| p.0).collect())
            .collect())
    }
}

impl MultiplierCertificate {
    pub fn is_feasible(&self) -> bool {
        self.verdict == CertVerdict::Feasible
    }
}

struct Setup<'a> {
    rp: &'a RegularizedProblem,
    xbar: &'a [f64],
    free_beta: Vec<bool>,
    prox: Vec<Vec<f64>>,
    generators: Vec<Vec<f64>>,
    opts: CertifyOptions,
}

struct LpSolution {
    alpha: Vec<f64>,
    beta: Vec<f64>,
    weights: Vec<f64>,
}

/// Search multipliers for `0 ∈ Σ(α_i+β_i)∂f_i(x̄) + κΣα_iυ_i(x̄−x̃) + N_Ω(x̄)`.
pub fn certify_pareto(rp: &RegularizedProblem, xbar: &[f64], opts: &CertifyOptions) -> Result<MultiplierCertificate> {
    let n = rp.dim();
    if xbar.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: xbar.len(),
        });
    }
    if !rp.in_d(xbar) {
        return Err(Error::Precondition(format!(
            "{xbar:?} is outside the feasible set of the regularized problem"
        )));
    }
    let lip = lipschitz_at(&rp.base.objectives, xbar)?;
    if let Some(i) = lip.iter().position(|v| !v.lipschitz) {
        return Err(Error::Precondition(format!(
            "objective {i} is not locally Lipschitz at {xbar:?}; epigraphical conditions for that case are not implemented"
        )));
    }
    let pieces: Vec<Vec<Vec<(f64, f64)>>> = rp
        .base
        .objectives
        .components
        .iter()
        .map(|fi| component_pieces(fi, xbar))
        .collect::<Result<_>>()?;
    let total = pieces.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.len()));
    let total = match total {
        Some(t) if t <= opts.max_selections => t,
        _ => {
            return Err(Error::Unsupported(format!(
                "more than {} subgradient piece selections",
                opts.max_selections
            )))
        }
    };
    let fx = rp.base.objectives.values(xbar);
    let free_beta = fx
        .iter()
        .zip(&rp.center_values)
        .map(|(a, b)| (a - b).abs() <= opts.active_tol)
        .collect();
    let kappa = opts.convention.factor(rp.lambda);
    let prox = rp
        .weights
        .iter()
        .map(|u| xbar.iter().zip(&rp.center).map(|(a, c)| kappa * u * (a - c)).collect())
        .collect();
    let setup = Setup {
        rp,
        xbar,
        free_beta,
        prox,
        generators: rp.base.constraint.normal_cone(xbar)?.generators,
        opts: *opts,
    };
    let results: Vec<(f64, usize, MultiplierCertificate)> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let sel = selection(&pieces, idx);
            let lp = solve_selection(&setup, &sel)?;
            let cert = assemble(&setup, sel, idx, total, lp);
            Ok((cert.stationarity, idx, cert))
        })
        .collect::<Result<_>>()?;
    let best = results
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("at least one selection");
    Ok(best.2)
}

/// Convex pieces of the limiting subdifferential, as boxes.
fn component_pieces(f: &PiecewiseFunction, x: &[f64]) -> Result<Vec<Vec<(f64, f64)>>> {
    let p = product_subdiff(f, x)?;
    let mut boxes: Vec<Vec<(f64, f64)>> = vec![vec![]];
    for set in &p.limiting {
        let comps = set.components();
        if comps.is_empty() {
            return Err(Error::Precondition(format!("empty limiting subdifferential at {x:?}")));
        }
        boxes = boxes
            .into_iter()
            .flat_map(|b| {
                comps.iter().map(move |c| {
                    let mut b = b.clone();
                    b.push(*c);
                    b
                })
            })
            .collect();
    }
    Ok(boxes)
}

fn selection(pieces: &[Vec<Vec<(f64, f64)>>], mut idx: usize) -> Vec<Vec<(f64, f64)>> {
    pieces
        .iter()
        .map(|p| {
            let k = idx % p.len();
            idx /= p.len();
            p[k].clone()
        })
        .collect()
}

fn solve_selection(s: &Setup, sel: &[Vec<(f64, f64)>]) -> Result<LpSolution> {
    let first = build_lp(s, sel, None)?;
    // second pass: among residual-optimal multipliers prefer α over β
    let l1 = first.0;
    match build_lp(s, sel, Some(l1 + 1e-12 * (1.0 + l1))) {
        Ok(second) => Ok(second.1),
        Err(_) => Ok(first.1),
    }
}

/// Minimizes the L1 defect, or `Σβ` subject to a defect bound.
fn build_lp(s: &Setup, sel: &[Vec<(f64, f64)>], defect_bound: Option<f64>) -> Result<(f64, LpSolution)> {
    let n = s.xbar.len();
    let m = sel.len();
    let phase_two = defect_bound.is_some();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let alpha: Vec<Variable> = (0..m).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let beta: Vec<Variable> = (0..m)
        .map(|i| {
            let hi = if s.free_beta[i] { f64::INFINITY } else { 0.0 };
            lp.add_var(if phase_two { 1.0 } else { 0.0 }, (0.0, hi))
        })
        .collect();
    let y: Vec<Vec<Variable>> = (0..m)
        .map(|_| (0..n).map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect())
        .collect();
    let c: Vec<Variable> = s
        .generators
        .iter()
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let res_obj = if phase_two { 0.0 } else { 1.0 };
    let pos: Vec<Variable> = (0..n).map(|_| lp.add_var(res_obj, (0.0, f64::INFINITY))).collect();
    let neg: Vec<Variable> = (0..n).map(|_| lp.add_var(res_obj, (0.0, f64::INFINITY))).collect();

    let mut norm = Vec::new();
    for i in 0..m {
        norm.push((alpha[i], 1.0));
        norm.push((beta[i], 1.0));
    }
    lp.add_constraint(&norm, ComparisonOp::Eq, 1.0);
    // y_i ∈ (α_i+β_i)·box_i
    for i in 0..m {
        for j in 0..n {
            let (lo, hi) = sel[i][j];
            if lo.is_finite() {
                lp.add_constraint([(y[i][j], 1.0), (alpha[i], -lo), (beta[i], -lo)], ComparisonOp::Ge, 0.0);
            }
            if hi.is_finite() {
                lp.add_constraint([(y[i][j], 1.0), (alpha[i], -hi), (beta[i], -hi)], ComparisonOp::Le, 0.0);
            }
        }
    }
    if !c.is_empty() {
        let terms: Vec<(Variable, f64)> = c.iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&terms, ComparisonOp::Le, s.opts.normal_cap);
    }
    for j in 0..n {
        let mut row: Vec<(Variable, f64)> = Vec::new();
        for i in 0..m {
            row.push((y[i][j], 1.0));
            if s.prox[i][j] != 0.0 {
                row.push((alpha[i], s.prox[i][j]));
            }
        }
        for (k, g) in s.generators.iter().enumerate() {
            if g[j] != 0.0 {
                row.push((c[k], g[j]));
            }
        }
        row.push((pos[j], -1.0));
        row.push((neg[j], 1.0));
        lp.add_constraint(&row, ComparisonOp::Eq, 0.0);
    }
    if let Some(bound) = defect_bound {
        let row: Vec<(Variable, f64)> = pos.iter().chain(&neg).map(|&v| (v, 1.0)).collect();
        lp.add_constraint(&row, ComparisonOp::Le, bound);
    }
    let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;
    let l1 = pos.iter().chain(&neg).map(|&v| sol[v]).sum();
    Ok((
        l1,
        LpSolution {
            alpha: alpha.iter().map(|&v| sol[v].max(0.0)).collect(),
            beta: beta.iter().map(|&v| sol[v].max(0.0)).collect(),
            weights: c.iter().map(|&v| sol[v].max(0.0)).collect(),
        },
    ))
}

/// Rebuilds the certificate from the multipliers alone: the subgradients are
/// re-chosen to minimize the Euclidean defect.
fn assemble(s: &Setup, sel: Vec<Vec<(f64, f64)>>, idx: usize, total: usize, lp: LpSolution) -> MultiplierCertificate {
    let n = s.xbar.len();
    let m = sel.len();
    let weight: Vec<f64> = (0..m).map(|i| lp.alpha[i] + lp.beta[i]).collect();
    let normal: Vec<f64> = (0..n)
        .map(|j| s.generators.iter().zip(&lp.weights).map(|(g, c)| c * g[j]).sum())
        .collect();
    let mut subgradients = vec![vec![0.0; n]; m];
    let mut defect2 = 0.0;
    for j in 0..n {
        let fixed: f64 = (0..m).map(|i| lp.alpha[i] * s.prox[i][j]).sum::<f64>() + normal[j];
        let lo: f64 = (0..m).map(|i| weight[i] * sel[i][j].0).sum();
        let hi: f64 = (0..m).map(|i| weight[i] * sel[i][j].1).sum();
        let target = (-fixed).clamp(lo, hi);
        let theta = if hi > lo { (target - lo) / (hi - lo) } else { 0.0 };
        for i in 0..m {
            let (a, b) = sel[i][j];
            subgradients[i][j] = a + theta * (b - a);
        }
        let sum: f64 = (0..m).map(|i| weight[i] * subgradients[i][j]).sum();
        defect2 += (sum + fixed).powi(2);
    }
    let stationarity = defect2.sqrt();
    let normalization = (weight.iter().sum::<f64>() - 1.0).abs();
    let fx = s.rp.base.objectives.values(s.xbar);
    let complementarity = (0..m)
        .map(|i| (lp.beta[i] * (fx[i] - s.rp.center_values[i])).abs())
        .fold(0.0, f64::max);
    let feasible = stationarity <= s.opts.tol && normalization <= 1e-12 && complementarity <= 1e-10;
    MultiplierCertificate {
        point: s.xbar.to_vec(),
        tau: normal.iter().map(|v| v * v).sum::<f64>().sqrt(),
        alpha: lp.alpha,
        beta: lp.beta,
        subgradients,
        normal_weights: lp.weights,
        normal_generators: s.generators.clone(),
        normal,
        stationarity,
        normalization,
        complementarity,
        selection: sel,
        selection_index: idx,
        selections_tried: total,
        convention: s.opts.convention,
        verdict: if feasible {
            CertVerdict::Feasible
        } else {
            CertVerdict::NoCertificate
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyVerdict {
    Pass,
    Fail,
}

/// Result of scanning `f + τ d_Ω` around `x̄`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyReport {
    pub tau: f64,
    pub radius: f64,
    pub step: f64,
    pub base_value: f64,
    pub violating_point: Option<Vec<f64>>,
    pub violating_value: Option<f64>,
    pub points_scanned: u64,
    pub verdict: PenaltyVerdict,
}

/// Margin by which a scanned point must undercut `f(x̄)`.
pub const PENALTY_MARGIN: f64 = 1e-12;

/// Scans the ball `B_radius(x̄)` on a lattice of the given step, plus points
/// `x̄ + radius·2^{-k}·v` (`k ≤ 60`, `v` in `{-1,0,1}^n`) that reach far
/// below the lattice resolution.
pub fn exact_penalty_check(
    f: &PiecewiseFunction,
    omega: &ConstraintSet,
    xbar: &[f64],
    tau: f64,
    radius: f64,
    step: f64,
) -> Result<PenaltyReport> {
    let n = f.dim;
    if xbar.len() != n || omega.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if xbar.len() != n { xbar.len() } else { omega.dim() },
        });
    }
    if !omega.contains(xbar) {
        return Err(Error::Precondition(format!("{xbar:?} is not in the constraint set")));
    }
    if !(radius > 0.0) || !(tau >= 0.0) {
        return Err(Error::InvalidParameter("radius must be positive and tau nonnegative".into()));
    }
    let base = f.eval(xbar)?;
    let grid = Grid::new(xbar.iter().map(|&c| (c - radius, c + radius)).collect(), step)?;
    let penalized = |x: &[f64]| f.value(x) + tau * omega.distance(x);
    let in_ball = |x: &[f64]| x.iter().zip(xbar).map(|(a, b)| (a - b).powi(2)).sum::<f64>() <= radius * radius;

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let dirs: Vec<Vec<f64>> = (0..3u32.pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let d = (k % 3) as f64 - 1.0;
                    k /= 3;
                    d
                })
                .collect::<Vec<f64>>()
        })
        .filter(|v| v.iter().any(|&d| d != 0.0))
        .collect();
    for v in &dirs {
        let norm = v.iter().map(|d| d * d).sum::<f64>().sqrt();
        for k in 0..=60 {
            let r = radius * 0.5f64.powi(k) / norm;
            candidates.push(xbar.iter().zip(v).map(|(c, d)| c + r * d).collect());
        }
    }
    let geometric = candidates
        .iter()
        .map(|x| (penalized(x), x))
        .filter(|(v, _)| *v < base - PENALTY_MARGIN)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(v, x)| (v, x.clone()));
    let total = grid.size() as u64;
    let lattice = (0..total)
        .into_par_iter()
        .filter_map(|i| {
            let x = grid.point(i);
            if !in_ball(&x) {
                return None;
            }
            let v = penalized(&x);
            (v < base - PENALTY_MARGIN).then_some((v, i))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(v, i)| (v, grid.point(i)));
    let worst = match (geometric, lattice) {
        (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
        (a, b) => a.or(b),
    };
    Ok(PenaltyReport {
        tau,
        radius,
        step,
        base_value: base,
        verdict: if worst.is_some() {
            PenaltyVerdict::Fail
        } else {
            PenaltyVerdict::Pass
        },
        violating_value: worst.as_ref().map(|w| w.0),
        violating_point: worst.map(|w| w.1),
        points_scanned: total + candidates.len() as u64,
    })
}

/// Margin added to the directional Lipschitz constant.
pub const TAU_MARGIN: f64 = 1e-3;

/// Penalty parameter suggested by the directional Lipschitz constants at
/// `x̄`: the largest constant over certified directions, floored at zero,
/// plus [`TAU_MARGIN`].
pub fn penalty_tau_from_dl(f: &PiecewiseFunction, omega: &ConstraintSet, xbar: &[f64], sched: &DLSchedule) -> Result<f64> {
    if omega.dim() != f.dim {
        return Err(Error::DimensionMismatch {
            expected: f.dim,
            got: omega.dim(),
        });
    }
    let report = certify_dl(f, xbar, sched)?;
    if report.verdict != DLVerdict::Dl {
        return Err(Error::Precondition(format!(
            "no direction certifies directional Lipschitz continuity at {xbar:?}"
        )));
    }
    let l = report.certified.iter().map(|c| c.constant).fold(f64::NEG_INFINITY, f64::max);
    Ok(l.max(0.0) + TAU_MARGIN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::problem::MOProblem;

    fn scalar(e: Expr) -> VectorFunction {
        VectorFunction::new(vec![PiecewiseFunction::from_expr(1, e).unwrap()]).unwrap()
    }

    #[test]
    fn abs_prox_certificate() {
        let p = MOProblem::new(scalar(Expr::abs(Expr::coord(1, 0))), ConstraintSet::whole(1)).unwrap();
        let rp = RegularizedProblem::new(p, vec![1.0], 1.0, vec![1.0]).unwrap();
        let c = certify_pareto(&rp, &[0.5], &CertifyOptions::default()).unwrap();
        assert!(c.is_feasible());
        assert_eq!((c.alpha[0], c.beta[0]), (1.0, 0.0));
        assert!(c.stationarity <= 1e-12);
        let lit = certify_pareto(&rp, &[0.5], &CertifyOptions::default().paper_literal(true)).unwrap();
        assert!((lit.stationarity - 0.5).abs() < 1e-12);
        assert!(!lit.is_feasible());
    }

    #[test]
    fn normal_cone_absorbs_boundary_gradient() {
        let p = MOProblem::new(scalar(Expr::coord(1, 0)), ConstraintSet::interval(1.0, 2.0)).unwrap();
        let rp = RegularizedProblem::new(p, vec![1.0], 1.0, vec![1.0]).unwrap();
        let c = certify_pareto(&rp, &[1.0], &CertifyOptions::default()).unwrap();
        assert!(c.is_feasible(), "{c:?}");
        assert!((c.tau - 1.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_scan_finds_cube_root_descent() {
        let f = PiecewiseFunction::from_expr(1, Expr::power(crate::expr::AffineForm::coord(1, 0), 1, 3).unwrap()).unwrap();
        let r = exact_penalty_check(&f, &ConstraintSet::interval(0.0, 1.0), &[0.0], 1e6, 0.5, 1e-3).unwrap();
        assert_eq!(r.verdict, PenaltyVerdict::Fail);
        assert!(r.violating_point.unwrap()[0] < 0.0);
    }
}
