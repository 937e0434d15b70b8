// SPDX-License-Identifier: Apache-2.0

//! Tool flows: compile, verify, run an emitted testbench, sweep the corpus.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axi::DelayConfig;
use crate::backend::{emit_all, emit_testbench, run_testbench, Artifacts, Expected, TbOutcome, Testbench};
use crate::charlib::{import_xml, ComponentLibrary, TargetDescriptor};
use crate::config::{parse_target, ToolConfig};
use crate::corpus::{generate_with, ArgSpec, CorpusEntry};
use crate::frontend::SourceUnit;
use crate::middle::dot::to_dot;
use crate::pipeline::{synthesize, Design, ToolError};
use crate::rtlsim::{cosim_equiv, interpret, CosimConfig, TestVector};

/// Name of the serialized testbench plan in an output directory.
pub const TB_PLAN: &str = "testbench.json";

fn io(p: &Path, e: std::io::Error) -> ToolError {
    ToolError::Io(format!("{}: {e}", p.display()))
}

/// The component library a configuration selects. A library file wins over
/// a target descriptor; with neither, the default library is built.
pub fn load_library(cfg: &ToolConfig) -> Result<ComponentLibrary, ToolError> {
    if let Some(p) = &cfg.library_path {
        let text = std::fs::read_to_string(p).map_err(|e| ToolError::Config(format!("library {}: {e}", p.display())))?;
        return Ok(import_xml(&text)?);
    }
    let target = load_target(cfg)?;
    if target == TargetDescriptor::default() {
        return Ok(ComponentLibrary::default_library());
    }
    Ok(ComponentLibrary::build(
        target,
        &crate::charlib::LinearModel::default(),
        &crate::charlib::BuildSpec::default(),
    )?)
}

pub fn load_target(cfg: &ToolConfig) -> Result<TargetDescriptor, ToolError> {
    match &cfg.target_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ToolError::Config(format!("target {}: {e}", p.display())))?;
            parse_target(&text).map_err(|e| ToolError::Config(format!("target {}: {e}", p.display())))
        }
        None => Ok(TargetDescriptor::default()),
    }
}

/// Extra outputs of [`compile`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompileOptions {
    pub dump_cdfg: bool,
    /// Vector for the testbench; a smoke vector is derived when absent.
    pub vector: Option<TestVector>,
}

pub struct Compiled {
    pub design: Design,
    pub artifacts: Artifacts,
}

/// Argument description used when no vectors are supplied: scalars 1,
/// arrays of 16 elements counting up from 1, every array an output.
pub fn smoke_entry(src: &SourceUnit, cfg: &ToolConfig) -> Result<CorpusEntry, ToolError> {
    let prog = crate::frontend::check(src, &cfg.top)?;
    let args = prog
        .top_function()
        .param_types()
        .map(|(n, t)| match t {
            crate::frontend::typed::ParamType::Scalar(_) => ArgSpec::Scalar {
                name: n.to_string(),
                min: 1,
                max: 1,
            },
            crate::frontend::typed::ParamType::ArrayRef(_) => ArgSpec::Array {
                name: n.to_string(),
                len: 16,
                min: 1,
                max: 16,
                offset: 0,
                output: true,
                sorted: true,
            },
        })
        .collect();
    Ok(CorpusEntry {
        name: cfg.top.clone(),
        tags: vec!["control".into()],
        top: cfg.top.clone(),
        source: src.text.clone(),
        iface: cfg.iface.clone(),
        args,
        dir: None,
    })
}

fn reference(d: &Design, v: &TestVector) -> Result<Expected, ToolError> {
    let mut mems = v.mems.clone();
    let r = interpret(&d.prog, &v.args, &mut mems)?;
    Ok(Expected { ret: r.ret, mems })
}

/// parse → … → emit; every file goes into `artifacts`, nothing is written.
pub fn compile(cfg: &ToolConfig, src: &SourceUnit, opts: &CompileOptions) -> Result<Compiled, ToolError> {
    if cfg.clock_ps == 0 {
        return Err(ToolError::Config("clock period must be positive".into()));
    }
    let lib = load_library(cfg)?;
    let design = synthesize(src, &lib, &cfg.hls_options())?;
    let vector = match &opts.vector {
        Some(v) => v.clone(),
        None => {
            let e = smoke_entry(src, cfg)?;
            let l = e.layout().map_err(|e| ToolError::Config(e.to_string()))?;
            generate_with(&e, &l, 1, 1).remove(0)
        }
    };
    let exp = reference(&design, &vector)?;
    let delays = cfg.delays.first().copied().unwrap_or_default();
    let mut artifacts = emit_all(
        &design.fsmd,
        &design.iface,
        Some((&vector, &exp)),
        delays,
        std::slice::from_ref(&lib.target),
    )
    .map_err(|e| ToolError::Config(e.to_string()))?;
    let top = artifacts.top.clone();
    if let Some(tb) = &artifacts.testbench {
        let plan = serde_json::to_string_pretty(tb).expect("plan serializes");
        artifacts.insert(TB_PLAN, plan + "\n");
    }
    artifacts.insert(&format!("{top}.report"), design.report.to_text());
    artifacts.insert(&format!("{top}.fsmd.txt"), design.fsmd.dump());
    if opts.dump_cdfg {
        artifacts.insert(&format!("{top}.cdfg.dot"), to_dot(&design.cdfg));
    }
    Ok(Compiled { design, artifacts })
}

/// One row of the verdict file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictLine {
    pub vector: usize,
    pub delays: String,
    pub pass: bool,
    pub cycles: u64,
    pub mismatches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TbLine {
    pub delays: String,
    pub pass: bool,
    pub cycles: u64,
    pub messages: Vec<String>,
}

/// Machine-readable result of [`verify`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub top: String,
    pub clock_ps: u32,
    pub pass: bool,
    pub cosim: Vec<VerdictLine>,
    pub testbench: Vec<TbLine>,
}

impl VerifyReport {
    pub fn to_text(&self) -> String {
        let mut s = format!("verify {} clock_ps {}\n", self.top, self.clock_ps);
        for l in &self.cosim {
            s.push_str(&format!(
                "cosim v{} delays {} {} cycles {}{}\n",
                l.vector,
                l.delays,
                if l.pass { "PASS" } else { "FAIL" },
                l.cycles,
                l.mismatches.first().map(|m| format!(" ({m})")).unwrap_or_default()
            ));
        }
        for t in &self.testbench {
            s.push_str(&format!(
                "testbench delays {} {} cycles {}: {}\n",
                t.delays,
                if t.pass { "PASS" } else { "FAIL" },
                t.cycles,
                t.messages.first().map(String::as_str).unwrap_or("")
            ));
        }
        s.push_str(if self.pass { "PASS\n" } else { "FAIL\n" });
        s
    }
}

fn delay_text(d: DelayConfig) -> String {
    format!("{},{},{}", d.read_latency, d.gap, d.write_latency)
}

/// Compiles, then checks every vector against the reference interpreter
/// under every configured delay set and runs the emitted testbench (first
/// vector) under each delay set. Adds `verdict.json` and `verdict.txt`.
pub fn verify(cfg: &ToolConfig, src: &SourceUnit, vectors: &[TestVector]) -> Result<(Compiled, VerifyReport), ToolError> {
    if vectors.is_empty() {
        return Err(ToolError::Verify("no test vectors".into()));
    }
    let mut c = compile(
        cfg,
        src,
        &CompileOptions {
            vector: Some(vectors[0].clone()),
            ..Default::default()
        },
    )?;
    let d = &c.design;
    let mut cosim = Vec::new();
    for &delays in &cfg.delays {
        let cc = CosimConfig::with_delays(delays);
        for (k, v) in vectors.iter().enumerate() {
            let r = cosim_equiv(&d.prog, &d.fsmd, v, &cc)?;
            cosim.push(VerdictLine {
                vector: k,
                delays: delay_text(delays),
                pass: r.pass,
                cycles: r.cycles,
                mismatches: r.mismatches,
            });
        }
    }
    let exp = reference(d, &vectors[0])?;
    let text = c
        .artifacts
        .file(&format!("{}.v", c.artifacts.top))
        .expect("design file")
        .to_string();
    let mut testbench = Vec::new();
    for &delays in &cfg.delays {
        let tb = emit_testbench(&d.fsmd, &d.iface, &vectors[0], &exp, delays).map_err(|e| ToolError::Verify(e.to_string()))?;
        let o = run_testbench(&text, &tb)?;
        testbench.push(TbLine {
            delays: delay_text(delays),
            pass: o.pass,
            cycles: o.cycles,
            messages: o.messages,
        });
    }
    let report = VerifyReport {
        top: c.artifacts.top.clone(),
        clock_ps: cfg.clock_ps,
        pass: cosim.iter().all(|l| l.pass) && testbench.iter().all(|t| t.pass),
        cosim,
        testbench,
    };
    c.artifacts.insert(
        "verdict.json",
        serde_json::to_string_pretty(&report).expect("verdict serializes") + "\n",
    );
    c.artifacts.insert("verdict.txt", report.to_text());
    Ok((c, report))
}

/// Re-runs the testbench stored in an output directory, reading the design,
/// memory images and expected-value files from disk.
pub fn run_testbench_dir(dir: &Path) -> Result<TbOutcome, ToolError> {
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).map_err(|e| io(&dir.join(name), e));
    let mut tb: Testbench = serde_json::from_str(&read(TB_PLAN)?).map_err(|e| ToolError::Io(format!("{TB_PLAN}: {e}")))?;
    let design = read(&format!("{}.v", tb.top))?;
    tb.text = read(&format!("{}_tb.v", tb.top))?;
    let mut names: Vec<String> = tb
        .slaves
        .iter()
        .map(|s| s.file.clone())
        .chain(tb.checks.iter().map(|c| c.file.clone()))
        .collect();
    names.sort();
    names.dedup();
    tb.files = names.into_iter().map(|n| read(&n).map(|t| (n, t))).collect::<Result<_, _>>()?;
    Ok(run_testbench(&design, &tb)?)
}

/// One (kernel, clock) cell of a sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kernel: String,
    pub clock_ps: u32,
    pub states: u32,
    pub fus: u32,
    pub registers: u32,
    pub luts: u64,
    pub dsp: u32,
    /// Cycle count of the first vector per delay set.
    pub cycles: Vec<u64>,
    pub vectors: usize,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub pass: bool,
}

impl SweepReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("kernel clock_ps states fus regs luts dsp cycles verdict\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{} {} {} {} {} {} {} {} {}\n",
                r.kernel,
                r.clock_ps,
                r.states,
                r.fus,
                r.registers,
                r.luts,
                r.dsp,
                r.cycles.iter().map(u64::to_string).collect::<Vec<_>>().join("/"),
                if r.failures.is_empty() {
                    "PASS".to_string()
                } else {
                    format!("FAIL: {}", r.failures[0])
                }
            ));
        }
        s
    }
}

/// Settings for [`sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub clocks_ps: Vec<u32>,
    pub delays: Vec<DelayConfig>,
    pub vectors: usize,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            clocks_ps: vec![2000, 4000, 6670, 10_000],
            delays: crate::config::DEFAULT_DELAYS.to_vec(),
            vectors: 10,
            seed: 1,
        }
    }
}

fn sweep_cell(e: &CorpusEntry, clock_ps: u32, lib: &ComponentLibrary, cfg: &ToolConfig, o: &SweepOptions) -> SweepRow {
    let mut row = SweepRow {
        kernel: e.name.clone(),
        clock_ps,
        states: 0,
        fus: 0,
        registers: 0,
        luts: 0,
        dsp: 0,
        cycles: Vec::new(),
        vectors: o.vectors,
        failures: Vec::new(),
    };
    let mut c = cfg.clone();
    c.top = e.top.clone();
    c.clock_ps = clock_ps;
    c.iface = e.iface.clone();
    let d = match synthesize(&e.unit(), lib, &c.hls_options()) {
        Ok(d) => d,
        Err(err) => {
            row.failures.push(format!("compile: {err}"));
            return row;
        }
    };
    row.states = d.report.states;
    row.fus = d.fsmd.fus.len() as u32;
    row.registers = d.report.registers;
    row.luts = d.report.luts;
    row.dsp = d.report.dsp;
    let vs = match e.layout() {
        Ok(l) => generate_with(e, &l, o.seed, o.vectors),
        Err(err) => {
            row.failures.push(err.to_string());
            return row;
        }
    };
    for &delays in &o.delays {
        for (k, v) in vs.iter().enumerate() {
            match cosim_equiv(&d.prog, &d.fsmd, v, &CosimConfig::with_delays(delays)) {
                Ok(r) => {
                    if k == 0 {
                        row.cycles.push(r.cycles);
                    }
                    if !r.pass {
                        row.failures
                            .push(format!("v{k} delays {}: {}", delay_text(delays), r.mismatches.join("; ")));
                    }
                }
                Err(err) => row.failures.push(format!("v{k} delays {}: {err}", delay_text(delays))),
            }
        }
    }
    row
}

/// Compiles and verifies every entry at every clock in parallel; rows are
/// sorted by kernel name and clock regardless of completion order.
pub fn sweep(entries: &[CorpusEntry], cfg: &ToolConfig, o: &SweepOptions) -> Result<SweepReport, ToolError> {
    let lib = load_library(cfg)?;
    let mut seen = HashSet::new();
    for e in entries {
        if !seen.insert(&e.name) {
            return Err(ToolError::Config(format!("duplicate corpus entry {}", e.name)));
        }
    }
    let cells: Vec<(&CorpusEntry, u32)> = entries.iter().flat_map(|e| o.clocks_ps.iter().map(move |&c| (e, c))).collect();
    let mut rows: Vec<SweepRow> = cells.par_iter().map(|&(e, c)| sweep_cell(e, c, &lib, cfg, o)).collect();
    rows.sort_by(|a, b| (&a.kernel, a.clock_ps).cmp(&(&b.kernel, b.clock_ps)));
    let pass = rows.iter().all(|r| r.failures.is_empty());
    Ok(SweepReport { rows, pass })
}
