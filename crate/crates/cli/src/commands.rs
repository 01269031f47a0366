use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use proxpareto::certify::{certify_pareto, CertifyOptions, MultiplierCertificate};
use proxpareto::corpus::{bundled, bundled_named, run_checks, CheckOutcome};
use proxpareto::dirlip::{certify_dl, DLSchedule, DLVerdict};
use proxpareto::problem::{pareto_bruteforce, pareto_regularized, phi_gamma_scan, Grid, ParetoPoint};
use proxpareto::problem_file::ProblemFile;
use proxpareto::report::{ext_value, RunReport};
use proxpareto::solver::{solve_ppa, FinalCheck, SolverConfig};
use proxpareto::subdiff::{product_subdiff, subdiff_report};

use crate::{write_atomic, Command, Global};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Negative,
    Precondition,
}

pub struct Outcome {
    /// Canonical form of the problem (or corpus) the command ran on.
    pub inputs: Value,
    pub outputs: Value,
    pub table: String,
    pub status: Status,
}

/// A path if one exists, otherwise a bundled problem name.
pub fn load_problem(spec: &str) -> Result<ProblemFile> {
    let path = Path::new(spec);
    if path.exists() {
        return ProblemFile::load(path).with_context(|| format!("loading {spec}"));
    }
    bundled_named(spec).with_context(|| format!("`{spec}` is neither a file nor a bundled problem"))
}

fn ext_vec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| ext_value(x)).collect())
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn fmt_point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}

fn verdict_name(v: DLVerdict) -> &'static str {
    match v {
        DLVerdict::Dl => "DL",
        DLVerdict::NotDl => "not-DL",
        DLVerdict::Inconclusive => "inconclusive",
    }
}

fn function_ids(pf: &ProblemFile, only: &Option<String>) -> Vec<String> {
    match only {
        Some(id) => vec![id.clone()],
        None => pf.objectives.clone(),
    }
}

fn grid(pf: &ProblemFile, g: &Global) -> Result<Grid> {
    match pf.grid_with_step(g.grid_step)? {
        Some(grid) => Ok(grid),
        None => bail!(proxpareto::error::Error::Parse(format!("`{}` declares no grid", pf.name))),
    }
}

pub fn dispatch(cmd: &Command, g: &Global) -> Result<Outcome> {
    if let Command::Selftest(a) = cmd {
        return selftest(&a.only, a.out_dir.as_deref(), g);
    }
    let spec = match cmd {
        Command::Eval(a) | Command::Subdiff(a) => &a.problem,
        Command::Dirlip(a) => &a.point.problem,
        Command::Pareto(a) => &a.problem,
        Command::Regularize(a) => &a.problem,
        Command::Certify(a) => &a.problem,
        Command::Solve(a) => &a.problem,
        Command::Selftest(_) => unreachable!(),
    };
    let pf = load_problem(spec)?;
    let (outputs, table, status) = match cmd {
        Command::Eval(a) => eval(&pf, &a.at, &a.function)?,
        Command::Subdiff(a) => subdiff(&pf, &a.at, &a.function)?,
        Command::Dirlip(a) => dirlip(&pf, &a.point.at, &a.point.function, a.samples, g)?,
        Command::Pareto(a) => pareto(&pf, a.regularized, g)?,
        Command::Regularize(a) => regularize(&pf, a.at.as_deref(), a.gamma, g)?,
        Command::Certify(a) => certify(&pf, &a.at, g)?,
        Command::Solve(a) => solve(&pf, &a.x0, a.lambda, a.max_outer, g)?,
        Command::Selftest(_) => unreachable!(),
    };
    Ok(Outcome {
        inputs: to_value(&pf)?,
        outputs,
        table,
        status,
    })
}

type Parts = (Value, String, Status);

fn eval(pf: &ProblemFile, at: &[f64], only: &Option<String>) -> Result<Parts> {
    let mut out = serde_json::Map::new();
    let mut table = String::new();
    for id in function_ids(pf, only) {
        let v = pf.function(&id)?.eval(at)?;
        writeln!(table, "{id}{} = {v}", fmt_point(at))?;
        out.insert(id, ext_value(v));
    }
    Ok((json!({ "point": at, "values": out }), table, Status::Ok))
}

fn subdiff(pf: &ProblemFile, at: &[f64], only: &Option<String>) -> Result<Parts> {
    let mut out = serde_json::Map::new();
    let mut table = String::new();
    for id in function_ids(pf, only) {
        let f = pf.function(&id)?;
        writeln!(table, "{id} at {}", fmt_point(at))?;
        if f.dim == 1 && at.len() == 1 {
            let r = subdiff_report(&f, at[0])?;
            writeln!(table, "  frechet   {}", r.frechet)?;
            writeln!(table, "  limiting  {}", r.limiting)?;
            writeln!(table, "  singular  {}", r.singular)?;
            match &r.clarke {
                Some(c) => writeln!(table, "  clarke    {c}")?,
                None => writeln!(table, "  clarke    undefined (not Lipschitz)")?,
            }
            if r.approximate {
                writeln!(table, "  (sampled)")?;
            }
            out.insert(id, to_value(&r)?);
        } else {
            let r = product_subdiff(&f, at)?;
            let join = |sets: &[proxpareto::set1d::RealSet1D]| sets.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" × ");
            writeln!(table, "  frechet   {}", join(&r.frechet))?;
            writeln!(table, "  limiting  {}", join(&r.limiting))?;
            writeln!(table, "  singular  {}", join(&r.singular))?;
            out.insert(id, to_value(&r)?);
        }
    }
    Ok((json!({ "point": at, "functions": out }), table, Status::Ok))
}

fn dirlip(pf: &ProblemFile, at: &[f64], only: &Option<String>, samples: Option<usize>, g: &Global) -> Result<Parts> {
    let mut sched = DLSchedule::default().with_seed(g.seed);
    if let Some(n) = samples {
        sched = sched.with_samples(n);
    }
    let mut out = serde_json::Map::new();
    let mut table = String::new();
    let mut status = Status::Ok;
    for id in function_ids(pf, only) {
        let r = certify_dl(&pf.function(&id)?, at, &sched)?;
        write!(table, "{id} at {}: {}", fmt_point(at), verdict_name(r.verdict))?;
        match r.verdict {
            DLVerdict::Dl => writeln!(table, ", direction {} with L = {:.3e}", fmt_point(&r.best.direction), r.best.constant)?,
            _ => {
                status = Status::Negative;
                match r.best.slope {
                    Some(s) => writeln!(table, ", best direction {} blows up with slope {s:.3}", fmt_point(&r.best.direction))?,
                    None => writeln!(table)?,
                }
            }
        }
        out.insert(id, to_value(&r)?);
    }
    Ok((json!({ "point": at, "functions": out, "schedule": sched }), table, status))
}

fn hull(set: &[ParetoPoint], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = (0..dim).map(|i| set.iter().map(|p| p.x[i]).fold(f64::INFINITY, f64::min)).collect();
    let hi = (0..dim).map(|i| set.iter().map(|p| p.x[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    (lo, hi)
}

fn pareto(pf: &ProblemFile, regularized: bool, g: &Global) -> Result<Parts> {
    let grid = grid(pf, g)?;
    let set = if regularized {
        pareto_regularized(&pf.regularized()?, &grid)?
    } else {
        pareto_bruteforce(&pf.problem()?, &grid)?
    };
    let dim = grid.dim();
    let (lo, hi) = hull(&set, dim);
    let mut table = format!("{} Pareto lattice points out of {} (step {})\n", set.len(), grid.size(), grid.step);
    if !set.is_empty() {
        writeln!(table, "hull {} .. {}", fmt_point(&lo), fmt_point(&hi))?;
    }
    let outputs = json!({
        "grid": { "ranges": grid.ranges, "step": grid.step, "size": grid.size() as f64 },
        "regularized": regularized,
        "count": set.len(),
        "hull": { "lo": ext_vec(&lo), "hi": ext_vec(&hi) },
        "points": set,
    });
    let status = if set.is_empty() { Status::Negative } else { Status::Ok };
    Ok((outputs, table, status))
}

fn regularize(pf: &ProblemFile, at: Option<&[f64]>, gamma: Option<f64>, g: &Global) -> Result<Parts> {
    let rp = pf.regularized()?;
    let mut table = format!(
        "Ψ = F + {}‖x − {}‖²Υ with Υ = {}\nF(x̃) = {}\n",
        rp.lambda,
        fmt_point(&rp.center),
        fmt_point(&rp.weights),
        fmt_point(&rp.center_values)
    );
    let mut out = json!({
        "center": rp.center,
        "lambda": rp.lambda,
        "weights": rp.weights,
        "center_values": ext_vec(&rp.center_values),
        "psi": rp.psi,
    });
    if let Some(x) = at {
        let psi = rp.psi.eval(x)?;
        let phi = rp.phi_values(x);
        writeln!(table, "at {}: Ψ = {}, Φ = {}, in D: {}", fmt_point(x), fmt_point(&psi), fmt_point(&phi), rp.in_d(x))?;
        out["at"] = json!({
            "point": x,
            "psi": ext_vec(&psi),
            "phi": ext_vec(&phi),
            "in_level_set": rp.in_level_set(x),
            "in_d": rp.in_d(x),
        });
        if let Some(gamma) = gamma {
            let scan = phi_gamma_scan(&rp, x, gamma, &grid(pf, g)?)?;
            writeln!(
                table,
                "φ_γ (γ = {gamma}) over {} lattice points: min {:.3e} at {}, positive: {}",
                scan.points,
                scan.min,
                fmt_point(&scan.argmin),
                scan.positive
            )?;
            out["phi_scan"] = json!({ "gamma": gamma, "scan": scan });
        }
    }
    Ok((out, table, Status::Ok))
}

fn describe(table: &mut String, label: &str, c: &MultiplierCertificate) -> Result<()> {
    writeln!(
        table,
        "{label}: {:?}, stationarity {:.3e}, alpha {}, beta {}, ‖w‖ {:.3e} ({} selections tried)",
        c.verdict,
        c.stationarity,
        fmt_point(&c.alpha),
        fmt_point(&c.beta),
        c.tau,
        c.selections_tried
    )?;
    Ok(())
}

fn certify(pf: &ProblemFile, at: &[f64], g: &Global) -> Result<Parts> {
    let rp = pf.regularized()?;
    let opts = match g.tol {
        Some(t) => CertifyOptions::default().with_tol(t),
        None => CertifyOptions::default(),
    };
    let analytic = certify_pareto(&rp, at, &opts.paper_literal(false))?;
    let mut table = format!("candidate {}\n", fmt_point(at));
    describe(&mut table, "analytic (2λ)", &analytic)?;
    let (chosen, outputs) = if g.paper_literal {
        let literal = certify_pareto(&rp, at, &opts.paper_literal(true))?;
        describe(&mut table, "literal (λ)", &literal)?;
        let discrepancy = literal.stationarity - analytic.stationarity;
        writeln!(table, "residual discrepancy (literal − analytic): {discrepancy:.3e}")?;
        let out = json!({
            "certificate": literal,
            "analytic": analytic,
            "discrepancy": discrepancy,
        });
        (literal.is_feasible(), out)
    } else {
        (analytic.is_feasible(), json!({ "certificate": analytic }))
    };
    let status = if chosen { Status::Ok } else { Status::Negative };
    Ok((outputs, table, status))
}

fn solve(pf: &ProblemFile, x0: &[f64], lambda: Option<f64>, max_outer: Option<usize>, g: &Global) -> Result<Parts> {
    let lambda = lambda.or(pf.regularization.as_ref().map(|r| r.lambda)).unwrap_or(1.0);
    let mut cfg = SolverConfig::default().with_seed(g.seed);
    if let Some(t) = g.tol {
        cfg.step_tol = t;
    }
    if let Some(k) = max_outer {
        cfg = cfg.with_max_outer(k);
    }
    cfg.certify = cfg.certify.paper_literal(g.paper_literal);
    let trace = solve_ppa(&pf.problem()?, x0, lambda, &pf.weights(), &cfg)?;
    let mut table = String::from("  k  x                          F(x)                       null\n");
    for r in &trace.iterates {
        writeln!(table, "{:>3}  {:<26} {:<26} {}", r.k, fmt_point(&r.x), fmt_point(&r.f), if r.null_step { "yes" } else { "" })?;
    }
    writeln!(table, "termination: {:?}", trace.termination)?;
    let status = match &trace.final_check {
        FinalCheck::Certified { certificate } => {
            writeln!(table, "final point certified (stationarity {:.3e})", certificate.stationarity)?;
            Status::Ok
        }
        FinalCheck::PreconditionFailed { reason } => {
            writeln!(table, "final check skipped: {reason}")?;
            Status::Precondition
        }
        FinalCheck::Failed { reason } => {
            writeln!(table, "final check failed: {reason}")?;
            Status::Negative
        }
    };
    let outputs = json!({
        "lambda": lambda,
        "weights": pf.weights(),
        "config": cfg,
        "final_point": trace.final_point(),
        "monotone": trace.is_monotone(1e-10),
        "trace": trace,
    });
    Ok((outputs, table, status))
}

fn selftest(only: &[String], out_dir: Option<&Path>, g: &Global) -> Result<Outcome> {
    let mut problems = bundled()?;
    if !only.is_empty() {
        for name in only {
            if !problems.iter().any(|p| &p.name == name) {
                bail!(proxpareto::error::Error::Parse(format!("no bundled problem `{name}`")));
            }
        }
        problems.retain(|p| only.contains(&p.name));
    }
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let per_problem: Vec<(String, Vec<CheckOutcome>)> = problems
        .par_iter()
        .map(|pf| -> Result<_> {
            let start = std::time::Instant::now();
            let outcomes = run_checks(pf, g.seed);
            if let Some(dir) = out_dir {
                let report = RunReport::new("selftest", &to_value(pf)?, to_value(&outcomes)?, start.elapsed().as_secs_f64(), g.seed);
                write_atomic(&dir.join(format!("{}.json", pf.name)), &report.to_json()?)?;
            }
            Ok((pf.name.clone(), outcomes))
        })
        .collect::<Result<_>>()?;
    let outcomes: Vec<CheckOutcome> = per_problem.into_iter().flat_map(|(_, o)| o).collect();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let mut table = String::new();
    for o in &outcomes {
        writeln!(
            table,
            "{} {}/{} [{}]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.problem,
            o.check,
            o.provenance,
            o.detail
        )?;
    }
    writeln!(table, "{} checks, {failed} failed", outcomes.len())?;
    let names: Vec<&str> = problems.iter().map(|p| p.name.as_str()).collect();
    Ok(Outcome {
        inputs: json!({ "corpus": names }),
        outputs: json!({ "checks": outcomes.len(), "failed": failed, "outcomes": outcomes }),
        table,
        status: if failed == 0 { Status::Ok } else { Status::Negative },
    })
}
