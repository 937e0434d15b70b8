// SPDX-License-Identifier: Apache-2.0

//! Source-to-FSMD synthesis shared by the compile, verify and sweep flows.

use crate::axi::{apply_interfaces, attach_controllers, infer_interfaces, AxiError, InterfaceConfig, InterfaceSpec};
use crate::charlib::{CharlibError, ComponentLibrary, LookupParams};
use crate::frontend::{check, Diagnostic, SourceUnit, TypedProgram};
use crate::hls::report::{build_report, HlsReport};
use crate::hls::{allocate, bind, build_fsmd, check_fsmd, map_memories, schedule_list, validate_schedule};
use crate::hls::{Allocation, Binding, Constraints, FsmEncoding, Fsmd, HlsError, Schedule};
use crate::middle::{lower_with, optimize, Cdfg, LowerOptions, MiddleError};
use crate::rtlsim::SimError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ToolError {
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Frontend(Vec<Diagnostic>),
    #[error(transparent)]
    Middle(#[from] MiddleError),
    #[error(transparent)]
    Charlib(#[from] CharlibError),
    #[error(transparent)]
    Hls(#[from] HlsError),
    #[error(transparent)]
    Axi(#[from] AxiError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Verify(String),
}

impl From<Vec<Diagnostic>> for ToolError {
    fn from(d: Vec<Diagnostic>) -> Self {
        ToolError::Frontend(d)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HlsOptions {
    pub top: String,
    pub clock_ps: u32,
    pub margin_ps: u32,
    pub max_stages: u8,
    pub constraints: Constraints,
    pub iface: Option<InterfaceConfig>,
    pub encoding: FsmEncoding,
    pub opt_level: u8,
}

impl Default for HlsOptions {
    fn default() -> Self {
        HlsOptions {
            top: "main".into(),
            clock_ps: 10_000,
            margin_ps: 0,
            max_stages: 2,
            constraints: Constraints::default(),
            iface: None,
            encoding: FsmEncoding::Binary,
            opt_level: 1,
        }
    }
}

impl HlsOptions {
    pub fn lookup(&self) -> LookupParams {
        LookupParams {
            clock_ps: self.clock_ps,
            margin_ps: self.margin_ps,
            max_stages: self.max_stages,
        }
    }
}

/// Every intermediate product of one synthesis run.
#[derive(Debug, Clone)]
pub struct Design {
    pub prog: TypedProgram,
    pub cdfg: Cdfg,
    pub iface: InterfaceSpec,
    pub alloc: Allocation,
    pub sched: Schedule,
    pub binding: Binding,
    pub fsmd: Fsmd,
    pub report: HlsReport,
}

/// parse → check → lower → optimize → interfaces → allocate → schedule →
/// bind → build → map memories → attach controllers.
pub fn synthesize(src: &SourceUnit, lib: &ComponentLibrary, opts: &HlsOptions) -> Result<Design, ToolError> {
    let prog = check(src, &opts.top)?;
    let lowered = lower_with(
        &prog,
        LowerOptions {
            dsp_native_width: lib.target.dsp_native_width,
            ..LowerOptions::default()
        },
    )?;
    let mut cdfg = optimize(&lowered, opts.opt_level);
    let iface = infer_interfaces(&prog, opts.iface.as_ref())?;
    apply_interfaces(&mut cdfg, &iface);
    let alloc = allocate(&cdfg, &opts.constraints, lib, opts.lookup())?;
    let sched = schedule_list(&cdfg, &alloc)?;
    let errs = validate_schedule(&cdfg, &alloc, &sched);
    if !errs.is_empty() {
        return Err(HlsError::Schedule(format!("validator rejected the schedule: {}", errs.join("; "))).into());
    }
    let binding = bind(&cdfg, &sched, &alloc)?;
    let f = build_fsmd(&cdfg, &sched, &binding, &alloc)?;
    let f = map_memories(&cdfg, f, &lib.target)?;
    let mut fsmd = attach_controllers(f, &iface);
    fsmd.encoding = opts.encoding;
    check_fsmd(&fsmd).map_err(HlsError::Memory)?;
    let report = build_report(&cdfg, &alloc, &sched, &fsmd, &lib.target);
    Ok(Design {
        prog,
        cdfg,
        iface,
        alloc,
        sched,
        binding,
        fsmd,
        report,
    })
}
