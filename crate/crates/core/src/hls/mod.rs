// SPDX-License-Identifier: Apache-2.0

//! Allocation, scheduling, binding and FSMD construction.

pub mod allocate;
pub mod bind;
pub mod fsmd;
pub mod report;
pub mod schedule;
pub mod validate;

pub use allocate::{allocate, kind_name, Allocation, Constraints, OpTiming, Resource};
pub use bind::{bind, left_edge, max_overlap, Binding};
pub use fsmd::{build_fsmd, check_fsmd, map_memories, FsmEncoding, Fsmd, Next, StateKind, Wire};
pub use schedule::{schedule_list, Placement, Schedule};
pub use validate::validate_schedule;

use crate::charlib::CharlibError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HlsError {
    #[error(transparent)]
    Lookup(#[from] CharlibError),
    #[error("{0}")]
    Allocation(String),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("bind: {0}")]
    Bind(String),
    #[error("{0}")]
    Memory(String),
}
