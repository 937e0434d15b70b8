// SPDX-License-Identifier: Apache-2.0

//! SSA control/data flow graph, lowering, optimization and analyses.

pub mod cdfg;
pub mod dot;
pub mod eval;
pub mod loops;
pub mod lower;
pub mod optimize;
pub mod ssa_check;

pub use cdfg::*;
pub use dot::to_dot;
pub use eval::eval_cdfg;
pub use loops::{analyze_loops, LoopInfo};
pub use lower::{lower_to_cdfg, lower_with, LowerOptions};
pub use optimize::optimize;
pub use ssa_check::validate;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MiddleError {
    #[error("program too large after inlining (budget {0} ops)")]
    TooLarge(usize),
    #[error("irreducible loop")]
    Irreducible,
}
