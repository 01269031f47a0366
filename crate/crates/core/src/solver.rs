//! Proximal-point solver. Each outer step minimizes the penalized,
//! Ekeland-perturbed scalarization
//! `χ_γ(x) = φ_γ(x) + √γ‖x − z‖ + τ d_Ω(x)` over a decreasing `γ` schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::{certify_pareto, penalty_tau_from_dl, CertifyOptions, MultiplierCertificate};
use crate::dirlip::DLSchedule;
use crate::error::{Error, Result};
use crate::problem::{phi_gamma_unchecked, MOProblem, RegularizedProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Decreasing `γ` continuation.
    pub gammas: Vec<f64>,
    /// Fixed initial penalty; `None` derives it from directional Lipschitz
    /// constants (falling back to 1).
    pub tau_init: Option<f64>,
    pub tau_growth: f64,
    pub max_tau_doublings: usize,
    /// Starts per inner search, including the incumbent.
    pub multistart: usize,
    /// Spread of the random starts around the incumbent.
    pub start_radius: f64,
    pub step_max: f64,
    pub step_min: f64,
    pub max_evals: usize,
    pub step_tol: f64,
    pub max_outer: usize,
    pub seed: u64,
    pub certify: CertifyOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gammas: (1..=8).map(|k| 10f64.powi(-k)).collect(),
            tau_init: None,
            tau_growth: 2.0,
            max_tau_doublings: 20,
            multistart: 4,
            start_radius: 1.0,
            step_max: 0.5,
            step_min: 0.5f64.powi(20),
            max_evals: 20_000,
            step_tol: 1e-6,
            max_outer: 50,
            seed: 0x5eed,
            certify: CertifyOptions::default().with_tol(1e-3),
        }
    }
}

impl SolverConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_outer(mut self, k: usize) -> Self {
        self.max_outer = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.gammas.is_empty()
            || !self.gammas.iter().all(|&g| positive(g))
            || self.gammas.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidParameter("gamma schedule must be positive and decreasing".into()));
        }
        if !(positive(self.step_max) && positive(self.step_min) && self.step_min <= self.step_max) {
            return Err(Error::InvalidParameter("pattern steps need 0 < step_min ≤ step_max".into()));
        }
        if !positive(self.step_tol) || !(self.tau_growth > 1.0) || self.multistart == 0 || self.max_outer == 0 {
            return Err(Error::InvalidParameter("invalid solver tolerances".into()));
        }
        if self.tau_init.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::InvalidParameter("tau must be nonnegative".into()));
        }
        Ok(())
    }
}

/// `χ_γ(x)` with `φ_γ` anchored at `xref`.
pub fn scalarized_value(rp: &RegularizedProblem, xref: &[f64], gamma: f64, z: &[f64], tau: f64, x: &[f64]) -> Result<f64> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be nonnegative, got {tau}")));
    }
    let phi = crate::problem::phi_gamma(rp, xref, gamma, x)?;
    if z.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: z.len(),
        });
    }
    Ok(phi + gamma.sqrt() * dist(x, z) + tau * rp.base.constraint.distance(x))
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

/// One `γ` level of an inner search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerRecord {
    pub gamma: f64,
    pub incumbent: Vec<f64>,
    pub value: f64,
    pub tau: f64,
    pub penalty: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub x_next: Vec<f64>,
    pub null_step: bool,
    /// Smallest `γ` reached, after any null-step halving.
    pub gamma_floor: f64,
    pub tau: f64,
    pub inner: Vec<InnerRecord>,
}

/// Minimizes `obj` by compass search from `start`.
fn pattern_search<F: Fn(&[f64]) -> f64>(obj: &F, start: &[f64], cfg: &SolverConfig) -> (Vec<f64>, f64, usize) {
    let mut x = start.to_vec();
    let mut val = obj(&x);
    let mut evals = 1;
    if !val.is_finite() {
        return (x, val, evals);
    }
    let mut step = cfg.step_max;
    while step >= cfg.step_min && evals < cfg.max_evals {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for i in 0..x.len() {
            for s in [step, -step] {
                let mut y = x.clone();
                y[i] += s;
                let v = obj(&y);
                evals += 1;
                if v < val && best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, y));
                }
            }
        }
        match best {
            Some((v, y)) => {
                val = v;
                x = y;
            }
            None => step /= 2.0,
        }
    }
    (x, val, evals)
}

struct Inner<'a> {
    rp: &'a RegularizedProblem,
    cfg: &'a SolverConfig,
    tau: f64,
}

impl Inner<'_> {
    /// `χ_γ`, infinite off the level set `Φ ≤ 0`.
    fn chi(&self, psi_ref: &[f64], gamma: f64, z: &[f64], x: &[f64]) -> f64 {
        if !self.rp.in_level_set(x) {
            return f64::INFINITY;
        }
        phi_gamma_unchecked(self.rp, psi_ref, gamma, x) + gamma.sqrt() * dist(x, z) + self.tau * self.rp.base.constraint.distance(x)
    }

    fn level(&self, gamma: f64, level: usize, incumbent: &[f64]) -> (Vec<f64>, InnerRecord) {
        let psi_ref = self.rp.psi_values(incumbent);
        let obj = |x: &[f64]| self.chi(&psi_ref, gamma, incumbent, x);
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ (level as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let mut starts = vec![incumbent.to_vec()];
        for _ in 1..self.cfg.multistart {
            starts.push(
                incumbent
                    .iter()
                    .map(|c| c + self.cfg.start_radius * rng.gen_range(-1.0..1.0))
                    .collect(),
            );
        }
        let runs: Vec<(Vec<f64>, f64, usize)> = starts.par_iter().map(|s| pattern_search(&obj, s, self.cfg)).collect();
        let evaluations = runs.iter().map(|r| r.2).sum();
        let (x, value, _) = runs
            .into_iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.0.cmp(&b.0)))
            .map(|(_, r)| r)
            .expect("at least one start");
        let penalty = self.tau * self.rp.base.constraint.distance(&x);
        let record = InnerRecord {
            gamma,
            incumbent: x.clone(),
            value,
            tau: self.tau,
            penalty,
            evaluations,
        };
        (x, record)
    }

    /// Runs the continuation from `start`; the incumbent only moves on strict
    /// decrease of `χ`.
    fn continuation(&self, gammas: &[f64], start: &[f64], records: &mut Vec<InnerRecord>) -> Vec<f64> {
        let mut inc = start.to_vec();
        for (l, &g) in gammas.iter().enumerate() {
            let (x, rec) = self.level(g, l, &inc);
            let psi_ref = self.rp.psi_values(&inc);
            if rec.value < self.chi(&psi_ref, g, &inc, &inc) {
                inc = x;
            }
            records.push(rec);
        }
        inc
    }
}

fn initial_tau(rp: &RegularizedProblem, center: &[f64], cfg: &SolverConfig) -> f64 {
    if let Some(t) = cfg.tau_init {
        return t;
    }
    if rp.base.constraint.is_whole() {
        return 0.0;
    }
    let sched = DLSchedule::default().with_samples(64).with_seed(cfg.seed);
    rp.psi
        .components
        .iter()
        .map(|psi| penalty_tau_from_dl(psi, &rp.base.constraint, center, &sched))
        .collect::<Result<Vec<f64>>>()
        .map(|ts| ts.into_iter().fold(0.0, f64::max))
        .unwrap_or(1.0)
}

/// One proximal step from `center`.
pub fn proximal_step(p: &MOProblem, center: &[f64], lambda: f64, weights: &[f64], cfg: &SolverConfig) -> Result<StepOutcome> {
    cfg.validate()?;
    let rp = RegularizedProblem::new(p.clone(), center.to_vec(), lambda, weights.to_vec())?;
    let psi_center = rp.psi_values(center);
    let accepts = |x: &[f64]| {
        x != center
            && rp.in_d(x)
            && rp
                .psi_values(x)
                .iter()
                .zip(&psi_center)
                .all(|(a, b)| *a <= b + 1e-10)
    };
    let mut tau = initial_tau(&rp, center, cfg);
    let mut inner = Vec::new();
    let mut inc = center.to_vec();
    for _ in 0..=cfg.max_tau_doublings {
        let inner_search = Inner { rp: &rp, cfg, tau };
        inner.clear();
        inc = inner_search.continuation(&cfg.gammas, center, &mut inner);
        if p.constraint.contains(&inc) {
            break;
        }
        tau = if tau > 0.0 { tau * cfg.tau_growth } else { 1.0 };
    }
    let mut gamma_floor = *cfg.gammas.last().expect("validated");
    if !accepts(&inc) {
        // null-step rule: one more level at half the floor before giving up
        gamma_floor /= 2.0;
        let inner_search = Inner { rp: &rp, cfg, tau };
        let start = if p.constraint.contains(&inc) { inc.clone() } else { center.to_vec() };
        inc = inner_search.continuation(&[gamma_floor], &start, &mut inner);
    }
    let null_step = !accepts(&inc);
    Ok(StepOutcome {
        x_next: if null_step { center.to_vec() } else { inc },
        null_step,
        gamma_floor,
        tau,
        inner,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub gamma_floor: Option<f64>,
    pub null_step: bool,
    pub tau: Option<f64>,
    pub inner: Vec<InnerRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StepTolerance,
    MaxIterations,
}

/// Certificate check of the final iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FinalCheck {
    Certified { certificate: Box<MultiplierCertificate> },
    PreconditionFailed { reason: String },
    Failed { reason: String },
}

impl FinalCheck {
    pub fn certificate(&self) -> Option<&MultiplierCertificate> {
        match self {
            FinalCheck::Certified { certificate } => Some(certificate),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub iterates: Vec<OuterRecord>,
    pub termination: Termination,
    pub final_check: FinalCheck,
}

impl SolverTrace {
    pub fn final_point(&self) -> &[f64] {
        &self.iterates.last().expect("trace starts with x0").x
    }

    /// `F(x^{k+1}) ≤ F(x^k) + tol` along the whole trace.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.iterates
            .windows(2)
            .all(|w| w[1].f.iter().zip(&w[0].f).all(|(a, b)| *a <= b + tol))
    }
}

/// Iterates proximal steps from `x0`, then certifies the final point for
/// the problem regularized at itself.
pub fn solve_ppa(p: &MOProblem, x0: &[f64], lambda: f64, weights: &[f64], cfg: &SolverConfig) -> Result<SolverTrace> {
    cfg.validate()?;
    if x0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: x0.len(),
        });
    }
    if !p.constraint.contains(x0) {
        return Err(Error::Precondition(format!("{x0:?} is not in the constraint set")));
    }
    let mut iterates = vec![OuterRecord {
        k: 0,
        x: x0.to_vec(),
        f: p.objectives.values(x0),
        gamma_floor: None,
        null_step: false,
        tau: None,
        inner: vec![],
    }];
    let mut termination = Termination::MaxIterations;
    let mut x = x0.to_vec();
    for k in 1..=cfg.max_outer {
        let step = proximal_step(p, &x, lambda, weights, cfg)?;
        let moved = dist(&step.x_next, &x);
        x = step.x_next;
        iterates.push(OuterRecord {
            k,
            x: x.clone(),
            f: p.objectives.values(&x),
            gamma_floor: Some(step.gamma_floor),
            null_step: step.null_step,
            tau: Some(step.tau),
            inner: step.inner,
        });
        if moved <= cfg.step_tol {
            termination = Termination::StepTolerance;
            break;
        }
    }
    let final_check = match RegularizedProblem::new(p.clone(), x.clone(), lambda, weights.to_vec())
        .and_then(|rp| certify_pareto(&rp, &x, &cfg.certify))
    {
        Ok(c) => FinalCheck::Certified { certificate: Box::new(c) },
        Err(Error::Precondition(reason)) => FinalCheck::PreconditionFailed { reason },
        Err(e) => FinalCheck::Failed { reason: e.to_string() },
    };
    Ok(SolverTrace {
        iterates,
        termination,
        final_check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::function::{PiecewiseFunction, VectorFunction};
    use crate::problem::ConstraintSet;

    fn square() -> MOProblem {
        let f = PiecewiseFunction::from_expr(1, Expr::square(Expr::coord(1, 0))).unwrap();
        MOProblem::new(VectorFunction::new(vec![f]).unwrap(), ConstraintSet::whole(1)).unwrap()
    }

    #[test]
    fn scalar_prox_step_matches_closed_form() {
        // argmin x² + λ(x − 1)² = λ/(1 + λ)
        for (lambda, expect) in [(0.5, 1.0 / 3.0), (1.0, 0.5)] {
            let s = proximal_step(&square(), &[1.0], lambda, &[1.0], &SolverConfig::default()).unwrap();
            assert!((s.x_next[0] - expect).abs() <= 1e-4, "λ = {lambda}: {:?}", s.x_next);
            assert!(!s.null_step);
        }
    }

    #[test]
    fn scalarized_value_hand_case() {
        let f = PiecewiseFunction::from_expr(1, Expr::abs(Expr::coord(1, 0))).unwrap();
        let p = MOProblem::new(VectorFunction::new(vec![f]).unwrap(), ConstraintSet::whole(1)).unwrap();
        let rp = RegularizedProblem::new(p, vec![1.0], 1.0, vec![1.0]).unwrap();
        // ψ(0) − ψ(0.5) + γ = 1 − 0.75 + 0.04, plus √γ·|0 − 0.5| = 0.1
        let v = scalarized_value(&rp, &[0.5], 0.04, &[0.5], 0.0, &[0.0]).unwrap();
        assert!((v - 0.39).abs() < 1e-12);
        let at_ref = scalarized_value(&rp, &[0.5], 0.04, &[0.5], 3.0, &[0.5]).unwrap();
        assert!((at_ref - 0.04).abs() < 1e-15);
    }
}
