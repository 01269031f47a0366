//! The chapters of the guide under `book/src`, compiled as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/functions.md")]
pub mod functions {}

#[doc = include_str!("../../../book/src/subdifferentials.md")]
pub mod subdifferentials {}

#[doc = include_str!("../../../book/src/directional_lipschitz.md")]
pub mod directional_lipschitz {}

#[doc = include_str!("../../../book/src/pareto.md")]
pub mod pareto {}

#[doc = include_str!("../../../book/src/certificates.md")]
pub mod certificates {}

#[doc = include_str!("../../../book/src/solver.md")]
pub mod solver {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
