//! Nonsmooth multiobjective optimization: exact one-dimensional
//! subdifferentials, directional Lipschitz tests, lattice Pareto sets,
//! multiplier certificates and a proximal point solver.

// `!(a > b)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod corpus;
pub mod dirlip;
pub mod error;
pub mod expr;
pub mod function;
mod local;
pub mod problem;
pub mod problem_file;
pub mod report;
pub mod set1d;
pub mod solver;
pub mod subdiff;
