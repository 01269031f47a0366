//! JSON problem files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "two_parabolas",
//!   "functions": {
//!     "f1": { "dim": 1, "expr": { "node": "square", "arg": { "node": "affine", "coeffs": [1.0] } } }
//!   },
//!   "objectives": ["f1"],
//!   "constraint": { "kind": "whole", "dim": 1 }
//! }
//! ```
//!
//! A function is either a single expression (`dim` + `expr`) or a full
//! piecewise definition (`dim` + `pieces`). Optional blocks:
//! `regularization` (prox center, `lambda`, `weights`), `grid` (`ranges`,
//! `step`) and `expected`, a list of regression checks each carrying a
//! `provenance` string.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dirlip::DLVerdict;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::function::{PiecewiseFunction, VectorFunction};
use crate::problem::{ConstraintSet, Grid, MOProblem, RegularizedProblem};
use crate::set1d::RealSet1D;

/// Schema version understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionDef {
    Expr { dim: usize, expr: Expr },
    Piecewise(PiecewiseFunction),
}

impl FunctionDef {
    pub fn build(&self) -> Result<PiecewiseFunction> {
        match self {
            FunctionDef::Expr { dim, expr } => PiecewiseFunction::from_expr(*dim, expr.clone()),
            FunctionDef::Piecewise(f) => {
                f.validate()?;
                Ok(f.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub center: Vec<f64>,
    pub lambda: f64,
    /// Defaults to equal weights of unit norm.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ranges: Vec<(f64, f64)>,
    pub step: f64,
}

/// A regression check attached to a problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum Expectation {
    Eval {
        function: String,
        point: Vec<f64>,
        #[serde(with = "crate::report::ext_f64")]
        value: f64,
        provenance: String,
    },
    Subdiff {
        function: String,
        point: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        frechet: Option<RealSet1D>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        limiting: Option<RealSet1D>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        singular: Option<RealSet1D>,
        provenance: String,
    },
    Dirlip {
        function: String,
        point: Vec<f64>,
        verdict: DLVerdict,
        provenance: String,
    },
    Lipschitz {
        point: Vec<f64>,
        lipschitz: Vec<bool>,
        provenance: String,
    },
    /// Hull of the lattice Pareto set of the base problem (or of the
    /// regularized one when `regularized`).
    ParetoHull {
        lo: Vec<f64>,
        hi: Vec<f64>,
        tolerance: f64,
        #[serde(default)]
        regularized: bool,
        provenance: String,
    },
    Certificate {
        point: Vec<f64>,
        feasible: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        beta: Option<Vec<f64>>,
        provenance: String,
    },
    Penalty {
        function: String,
        point: Vec<f64>,
        tau: f64,
        radius: f64,
        step: f64,
        pass: bool,
        provenance: String,
    },
    PhiPositive {
        point: Vec<f64>,
        gamma: f64,
        provenance: String,
    },
    Solve {
        x0: Vec<f64>,
        lo: Vec<f64>,
        hi: Vec<f64>,
        provenance: String,
    },
}

impl Expectation {
    pub fn kind(&self) -> &'static str {
        match self {
            Expectation::Eval { .. } => "eval",
            Expectation::Subdiff { .. } => "subdiff",
            Expectation::Dirlip { .. } => "dirlip",
            Expectation::Lipschitz { .. } => "lipschitz",
            Expectation::ParetoHull { .. } => "pareto_hull",
            Expectation::Certificate { .. } => "certificate",
            Expectation::Penalty { .. } => "penalty",
            Expectation::PhiPositive { .. } => "phi_positive",
            Expectation::Solve { .. } => "solve",
        }
    }

    pub fn provenance(&self) -> &str {
        match self {
            Expectation::Eval { provenance, .. }
            | Expectation::Subdiff { provenance, .. }
            | Expectation::Dirlip { provenance, .. }
            | Expectation::Lipschitz { provenance, .. }
            | Expectation::ParetoHull { provenance, .. }
            | Expectation::Certificate { provenance, .. }
            | Expectation::Penalty { provenance, .. }
            | Expectation::PhiPositive { provenance, .. }
            | Expectation::Solve { provenance, .. } => provenance,
        }
    }

    fn function(&self) -> Option<&str> {
        match self {
            Expectation::Eval { function, .. }
            | Expectation::Subdiff { function, .. }
            | Expectation::Dirlip { function, .. }
            | Expectation::Penalty { function, .. } => Some(function),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    pub functions: BTreeMap<String, FunctionDef>,
    pub objectives: Vec<String>,
    pub constraint: ConstraintSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularization: Option<Regularization>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expected: Vec<Expectation>,
}

impl ProblemFile {
    /// Parses and validates.
    pub fn from_json(s: &str) -> Result<Self> {
        let pf: ProblemFile = serde_json::from_str(s)?;
        pf.validate()?;
        Ok(pf)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported problem file version {} (expected {SCHEMA_VERSION})",
                self.version
            )));
        }
        for (id, def) in &self.functions {
            def.build().map_err(|e| Error::Parse(format!("function `{id}`: {e}")))?;
        }
        if self.objectives.is_empty() {
            return Err(Error::Parse("at least one objective is required".into()));
        }
        for id in self.objectives.iter().map(String::as_str).chain(self.expected.iter().filter_map(Expectation::function)) {
            if !self.functions.contains_key(id) {
                return Err(Error::Parse(format!("unknown function `{id}`")));
            }
        }
        if let Some(e) = self.expected.iter().find(|e| e.provenance().trim().is_empty()) {
            return Err(Error::Parse(format!("`{}` check has no provenance", e.kind())));
        }
        self.problem()?;
        if self.regularization.is_some() {
            self.regularized()?;
        }
        self.grid()?;
        Ok(())
    }

    pub fn function(&self, id: &str) -> Result<PiecewiseFunction> {
        self.functions
            .get(id)
            .ok_or_else(|| Error::Parse(format!("unknown function `{id}`")))?
            .build()
    }

    pub fn objectives(&self) -> Result<VectorFunction> {
        VectorFunction::new(self.objectives.iter().map(|id| self.function(id)).collect::<Result<_>>()?)
    }

    pub fn problem(&self) -> Result<MOProblem> {
        MOProblem::new(self.objectives()?, self.constraint.clone())
    }

    /// Weights of the regularization block, or equal unit-norm weights.
    pub fn weights(&self) -> Vec<f64> {
        let m = self.objectives.len();
        self.regularization
            .as_ref()
            .and_then(|r| r.weights.clone())
            .unwrap_or_else(|| vec![1.0 / (m as f64).sqrt(); m])
    }

    pub fn regularized(&self) -> Result<RegularizedProblem> {
        let r = self
            .regularization
            .as_ref()
            .ok_or_else(|| Error::Parse(format!("`{}` has no regularization block", self.name)))?;
        RegularizedProblem::new(self.problem()?, r.center.clone(), r.lambda, self.weights())
    }

    /// The declared grid, optionally with a different step.
    pub fn grid_with_step(&self, step: Option<f64>) -> Result<Option<Grid>> {
        self.grid
            .as_ref()
            .map(|g| Grid::new(g.ranges.clone(), step.unwrap_or(g.step)))
            .transpose()
    }

    pub fn grid(&self) -> Result<Option<Grid>> {
        self.grid_with_step(None)
    }
}
