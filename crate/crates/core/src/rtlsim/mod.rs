// SPDX-License-Identifier: Apache-2.0

//! Reference interpreter, cycle-accurate FSMD simulator, AXI slave model and an
//! interpreter for the emitted Verilog subset.

pub mod cosim;
pub mod equiv;
pub mod interp;
pub mod memory;
pub mod verilog;
pub mod vharness;

pub use cosim::{run_cosim, CosimConfig, CosimResult, TraceRecord, DEFAULT_CYCLE_BUDGET};
pub use equiv::{cosim_equiv, OutputRange, TestVector, Verdict};
pub use interp::{interpret, interpret_with_budget, ArgValue, InterpResult};
pub use memory::MemoryImage;
pub use verilog::{VModule, VSim};
pub use vharness::{run_module, run_verilog};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("possible non-termination: step budget of {0} exceeded")]
    StepBudget(u64),
    #[error("cycle budget of {0} exceeded")]
    CycleBudget(u64),
    #[error("array '{0}' index {1} out of bounds")]
    OutOfBounds(String, u64),
    #[error("bad test vector: {0}")]
    Vector(String),
    #[error("combinational loop detected")]
    CombLoop,
    #[error("AXI protocol violation at cycle {cycle}: {msg}")]
    Protocol { cycle: u64, msg: String },
    #[error("verilog: {0}")]
    Verilog(String),
}
