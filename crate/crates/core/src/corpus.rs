//! Bundled regression corpus and the checks behind `selftest`.

use serde::{Deserialize, Serialize};

use crate::certify::{certify_pareto, exact_penalty_check, lipschitz_at, CertifyOptions, PenaltyVerdict};
use crate::dirlip::{certify_dl, DLSchedule};
use crate::error::{Error, Result};
use crate::problem::{pareto_bruteforce, pareto_regularized, phi_gamma_scan, Grid};
use crate::problem_file::{Expectation, ProblemFile};
use crate::solver::{solve_ppa, SolverConfig};
use crate::subdiff::subdiff_report;

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name, ".json")))),*]
    };
}

/// `(name, JSON)` of every bundled problem.
pub const BUNDLED: &[(&str, &str)] = bundled![
    "abs_interval",
    "abs_prox",
    "abs_cube_root",
    "boundary_pareto",
    "cube_root",
    "cube_root_pareto",
    "cube_root_pareto_collapsed",
    "cube_root_sum",
    "oscillating_pair",
    "planar_pair",
    "square",
    "two_parabolas",
];

pub fn bundled() -> Result<Vec<ProblemFile>> {
    BUNDLED
        .iter()
        .map(|(name, json)| ProblemFile::from_json(json).map_err(|e| Error::Parse(format!("{name}: {e}"))))
        .collect()
}

pub fn bundled_named(name: &str) -> Result<ProblemFile> {
    let (_, json) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Parse(format!("no bundled problem `{name}`")))?;
    ProblemFile::from_json(json)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub problem: String,
    pub check: String,
    pub provenance: String,
    pub passed: bool,
    pub detail: String,
}

/// Runs every expectation of `pf`.
pub fn run_checks(pf: &ProblemFile, seed: u64) -> Vec<CheckOutcome> {
    pf.expected
        .iter()
        .map(|e| {
            let (passed, detail) = match run_check(pf, e, seed) {
                Ok(r) => r,
                Err(err) => (false, format!("error: {err}")),
            };
            CheckOutcome {
                problem: pf.name.clone(),
                check: e.kind().to_string(),
                provenance: e.provenance().to_string(),
                passed,
                detail,
            }
        })
        .collect()
}

/// Runs the whole bundled corpus.
pub fn selftest(seed: u64) -> Result<Vec<CheckOutcome>> {
    Ok(bundled()?.iter().flat_map(|pf| run_checks(pf, seed)).collect())
}

fn declared_grid(pf: &ProblemFile) -> Result<Grid> {
    pf.grid()?
        .ok_or_else(|| Error::Parse(format!("`{}` declares no grid", pf.name)))
}

fn run_check(pf: &ProblemFile, e: &Expectation, seed: u64) -> Result<(bool, String)> {
    match e {
        Expectation::Eval {
            function, point, value, ..
        } => {
            let got = pf.function(function)?.eval(point)?;
            let ok = got == *value || (got - value).abs() <= 1e-12 * (1.0 + value.abs());
            Ok((ok, format!("value {got}")))
        }
        Expectation::Subdiff {
            function,
            point,
            frechet,
            limiting,
            singular,
            ..
        } => {
            let r = subdiff_report(&pf.function(function)?, *point)?;
            let same = |want: &Option<_>, got: &crate::set1d::RealSet1D| want.as_ref().is_none_or(|w| got.approx_eq(w, 1e-12));
            let ok = same(frechet, &r.frechet) && same(limiting, &r.limiting) && same(singular, &r.singular);
            Ok((
                ok,
                format!("frechet {}, limiting {}, singular {}", r.frechet, r.limiting, r.singular),
            ))
        }
        Expectation::Dirlip {
            function, point, verdict, ..
        } => {
            let r = certify_dl(&pf.function(function)?, point, &DLSchedule::default().with_seed(seed))?;
            Ok((r.verdict == *verdict, format!("verdict {:?}, direction {:?}", r.verdict, r.best.direction)))
        }
        Expectation::Lipschitz { point, lipschitz, .. } => {
            let got: Vec<bool> = lipschitz_at(&pf.objectives()?, point)?.iter().map(|v| v.lipschitz).collect();
            Ok((&got == lipschitz, format!("{got:?}")))
        }
        Expectation::ParetoHull {
            lo,
            hi,
            tolerance,
            regularized,
            ..
        } => {
            let grid = declared_grid(pf)?;
            let set = if *regularized {
                pareto_regularized(&pf.regularized()?, &grid)?
            } else {
                pareto_bruteforce(&pf.problem()?, &grid)?
            };
            if set.is_empty() {
                return Ok((false, "empty Pareto set".into()));
            }
            let n = lo.len();
            let got_lo: Vec<f64> = (0..n).map(|i| set.iter().map(|p| p.x[i]).fold(f64::INFINITY, f64::min)).collect();
            let got_hi: Vec<f64> = (0..n).map(|i| set.iter().map(|p| p.x[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
            let ok = (0..n).all(|i| (got_lo[i] - lo[i]).abs() <= *tolerance && (got_hi[i] - hi[i]).abs() <= *tolerance);
            Ok((ok, format!("{} points, hull {got_lo:?}..{got_hi:?}", set.len())))
        }
        Expectation::Certificate {
            point,
            feasible,
            alpha,
            beta,
            ..
        } => {
            let c = certify_pareto(&pf.regularized()?, point, &CertifyOptions::default())?;
            let close = |want: &Option<Vec<f64>>, got: &[f64]| {
                want.as_ref()
                    .is_none_or(|w| w.iter().zip(got).all(|(a, b)| (a - b).abs() <= 1e-9))
            };
            let ok = c.is_feasible() == *feasible && close(alpha, &c.alpha) && close(beta, &c.beta);
            Ok((
                ok,
                format!("{:?}, residual {:.3e}, alpha {:?}, beta {:?}", c.verdict, c.stationarity, c.alpha, c.beta),
            ))
        }
        Expectation::Penalty {
            function,
            point,
            tau,
            radius,
            step,
            pass,
            ..
        } => {
            let r = exact_penalty_check(&pf.function(function)?, &pf.constraint, point, *tau, *radius, *step)?;
            let ok = (r.verdict == PenaltyVerdict::Pass) == *pass;
            Ok((ok, format!("{:?}, violating point {:?}", r.verdict, r.violating_point)))
        }
        Expectation::PhiPositive { point, gamma, .. } => {
            let s = phi_gamma_scan(&pf.regularized()?, point, *gamma, &declared_grid(pf)?)?;
            Ok((s.positive, format!("min {:.3e} at {:?}", s.min, s.argmin)))
        }
        Expectation::Solve { x0, lo, hi, .. } => {
            let lambda = pf.regularization.as_ref().map_or(1.0, |r| r.lambda);
            let t = solve_ppa(&pf.problem()?, x0, lambda, &pf.weights(), &SolverConfig::default().with_seed(seed))?;
            let x = t.final_point();
            let ok = x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| l <= v && v <= h) && t.is_monotone(1e-10);
            Ok((ok, format!("final {x:?} after {} steps", t.iterates.len() - 1)))
        }
    }
}
