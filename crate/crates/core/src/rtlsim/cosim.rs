// SPDX-License-Identifier: Apache-2.0

//! Cycle-accurate execution of an FSMD against behavioural AXI slaves.
//!
//! Each cycle evaluates the datapath combinationally from the current state
//! and registers, then commits everything at the clock edge. Registers,
//! RAMs, unit pipelines and AXI read-data holds commit only on the last
//! cycle of a step (`adv`).

use std::fmt::Write;

use crate::axi::{AxiController, AxiSlave, DelayConfig, Issue, ProtocolMonitor, Sampling, SlaveFault};
use crate::hls::fsmd::{Edge, Fsmd, MemOp, MemTarget, Next, StateKind, Step, Wire};
use crate::middle::eval::apply;
use crate::semantics::mask;

use super::interp::ArgValue;
use super::memory::MemoryImage;
use super::SimError;

pub const DEFAULT_CYCLE_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosimConfig {
    pub delays: DelayConfig,
    pub budget: u64,
    pub trace: bool,
    pub slave_fault: Option<SlaveFault>,
}

impl Default for CosimConfig {
    fn default() -> Self {
        CosimConfig {
            delays: DelayConfig::default(),
            budget: DEFAULT_CYCLE_BUDGET,
            trace: false,
            slave_fault: None,
        }
    }
}

impl CosimConfig {
    pub fn with_delays(delays: DelayConfig) -> CosimConfig {
        CosimConfig {
            delays,
            ..Default::default()
        }
    }
}

/// One cycle of execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub cycle: u64,
    pub state: u32,
    pub reg_writes: Vec<(usize, u64)>,
    /// `(bundle, channel, payload)` for every completed handshake.
    pub handshakes: Vec<(u32, &'static str, u64)>,
    pub busy: Vec<bool>,
}

impl TraceRecord {
    /// Plain-text line: `cycle state [rN=v ...] [bB:CH=payload ...]`.
    pub fn line(&self) -> String {
        let mut s = format!("{} s{}", self.cycle, self.state);
        for (r, v) in &self.reg_writes {
            let _ = write!(s, " r{r}={v:#x}");
        }
        for (b, ch, p) in &self.handshakes {
            let _ = write!(s, " b{b}:{ch}={p:#x}");
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosimResult {
    pub ret: Option<u64>,
    pub cycles: u64,
    pub trace: Vec<TraceRecord>,
    /// Some transaction received SLVERR.
    pub error_response: bool,
}

impl CosimResult {
    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|r| r.line() + "\n").collect()
    }
}

struct FuState {
    /// Delay line for units with latency; `pipe[0]` is the newest entry.
    pipe: Vec<u64>,
}

struct Sim<'a> {
    f: &'a Fsmd,
    args: Vec<u64>,
    regs: Vec<u64>,
    rams: Vec<Vec<u64>>,
    ram_q: Vec<[u64; 2]>,
    fus: Vec<FuState>,
    axi_q: Vec<u64>,
    ctl: Vec<AxiController>,
    slaves: Vec<AxiSlave>,
    monitors: Vec<ProtocolMonitor>,
    /// Bundle id → index into memories.
    state: usize,
    ret: u64,
}

impl Sim<'_> {
    fn bundle_index(&self, id: u32) -> usize {
        self.f.bundles.iter().position(|b| b.id == id).expect("bundle")
    }

    fn eval(&self, w: &Wire, step: Option<&Step>, depth: u32) -> Result<u64, SimError> {
        if depth > 256 {
            return Err(SimError::CombLoop);
        }
        let f = self.f;
        Ok(match w {
            Wire::Const { bits, width } => bits & mask(*width),
            Wire::Arg(i) => self.args[*i as usize],
            Wire::Reg(r) => self.regs[*r],
            Wire::Ram { mem, port } => self.ram_q[f.ram_index(*mem).expect("ram")][*port as usize],
            Wire::Axi(b) => self.axi_q[self.bundle_index(*b)],
            Wire::Fu(u) => {
                let unit = &f.fus[*u];
                if unit.latency > 0 {
                    *self.fus[*u].pipe.last().unwrap()
                } else {
                    self.fu_result(*u, step, depth)?
                }
            }
            Wire::Free { op, args, width } => {
                let vals = args.iter().map(|a| self.eval(a, step, depth + 1)).collect::<Result<Vec<_>, _>>()?;
                let aw: Vec<u8> = args.iter().map(|a| f.wire_width(a)).collect();
                apply(*op, &vals, &aw, *width)
            }
        })
    }

    /// Value a unit computes from the operands issued in the current step.
    fn fu_result(&self, u: usize, step: Option<&Step>, depth: u32) -> Result<u64, SimError> {
        let unit = &self.f.fus[u];
        let Some(op) = step.and_then(|s| s.fu_ops.iter().find(|o| o.fu == u)) else {
            return Ok(0);
        };
        let vals = op
            .args
            .iter()
            .map(|a| self.eval(a, step, depth + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(apply(op.func, &vals, &unit.in_widths, unit.kind.width) & mask(unit.out_width()))
    }

    fn mem_addr(&self, m: &MemOp, step: &Step) -> Result<u32, SimError> {
        let off = self.eval(&m.addr, Some(step), 0)?;
        Ok(match m.target {
            MemTarget::Ram { .. } => off as u32,
            MemTarget::Axi { base, .. } => (self.args[base as usize] as u32).wrapping_add(off as u32),
        })
    }
}

/// Runs `f` once with the given arguments. `mems[b]` backs bundle `b` and is
/// updated in place.
pub fn run_cosim(f: &Fsmd, args: &[ArgValue], mems: &mut [MemoryImage], cfg: &CosimConfig) -> Result<CosimResult, SimError> {
    if args.len() != f.args.len() {
        return Err(SimError::Vector(format!("expected {} arguments, got {}", f.args.len(), args.len())));
    }
    let mut latched = Vec::new();
    for (a, p) in args.iter().zip(&f.args) {
        latched.push(match (a, p.pointer) {
            (ArgValue::Scalar(v), false) => v & mask(p.width),
            (ArgValue::Array { base, .. }, true) => *base as u64,
            _ => return Err(SimError::Vector(format!("argument kind mismatch for {}", p.name))),
        });
    }
    for b in &f.bundles {
        if b.id as usize >= mems.len() {
            return Err(SimError::Vector(format!("no memory image for bundle {}", b.id)));
        }
    }
    let mut sim = Sim {
        f,
        args: latched,
        regs: vec![0; f.regs.len()],
        rams: f
            .rams
            .iter()
            .map(|r| {
                let mut v = r.init.clone();
                v.resize(r.depth as usize, 0);
                v
            })
            .collect(),
        ram_q: vec![[0; 2]; f.rams.len()],
        fus: f
            .fus
            .iter()
            .map(|u| FuState {
                pipe: vec![0; u.latency as usize],
            })
            .collect(),
        axi_q: vec![0; f.bundles.len()],
        ctl: f.bundles.iter().map(|b| AxiController::new(b.data_width / 8)).collect(),
        slaves: f
            .bundles
            .iter()
            .map(|b| {
                let mut s = AxiSlave::new(b.data_width / 8, cfg.delays);
                s.fault = cfg.slave_fault;
                s
            })
            .collect(),
        monitors: f.bundles.iter().map(|_| ProtocolMonitor::new()).collect(),
        state: 0,
        ret: 0,
    };
    let mut trace = Vec::new();
    let mut cycle = 0u64;
    let mut started = false;
    loop {
        if cycle >= cfg.budget {
            return Err(SimError::CycleBudget(cfg.budget));
        }
        let kind = f.states[sim.state];
        let step = match kind {
            StateKind::Exec(s) | StateKind::Wait(s) => Some(&f.steps[s as usize]),
            _ => None,
        };
        let nb = f.bundles.len();
        // issue requests in the first state of an AXI step
        let mut issues: Vec<Option<Issue>> = vec![None; nb];
        let mut adv = false;
        let mut next_state = sim.state;
        match kind {
            StateKind::Idle => {
                if !started {
                    started = true;
                    next_state = f.exec_state(f.entry);
                }
            }
            StateKind::Done => {}
            StateKind::Exec(s) => {
                let st = step.unwrap();
                if st.has_axi() {
                    for m in &st.mem_ops {
                        if let MemTarget::Axi { bundle, .. } = m.target {
                            let data = match &m.data {
                                Some(d) => sim.eval(d, step, 0)?,
                                None => 0,
                            };
                            issues[sim.bundle_index(bundle)] = Some(Issue {
                                write: m.store,
                                addr: sim.mem_addr(m, st)?,
                                bytes: m.bytes as u32,
                                wdata: data,
                            });
                        }
                    }
                    next_state = sim.state + 1;
                } else {
                    adv = true;
                }
                let _ = s;
            }
            StateKind::Wait(_) => {
                let st = step.unwrap();
                adv = st.bundles().iter().all(|&b| !sim.ctl[sim.bundle_index(b)].busy());
            }
        }
        // datapath commits on adv
        let mut reg_writes = Vec::new();
        let mut ram_writes: Vec<(usize, usize, u64)> = Vec::new();
        let mut ram_reads: Vec<(usize, u8, usize)> = Vec::new();
        let mut axi_loads: Vec<usize> = Vec::new();
        let mut fu_in: Vec<(usize, u64)> = Vec::new();
        if adv {
            let st = step.unwrap();
            for (r, w) in &st.reg_writes {
                reg_writes.push((*r, sim.eval(w, step, 0)? & mask(f.regs[*r])));
            }
            for m in &st.mem_ops {
                match m.target {
                    MemTarget::Ram { mem, port } => {
                        let ri = f.ram_index(mem).expect("ram");
                        let a = sim.mem_addr(m, st)? as usize;
                        if m.store {
                            let d = sim.eval(m.data.as_ref().unwrap(), step, 0)?;
                            ram_writes.push((ri, a, d & mask(f.rams[ri].width)));
                        }
                        ram_reads.push((ri, port, a));
                    }
                    MemTarget::Axi { bundle, .. } => {
                        if !m.store {
                            axi_loads.push(sim.bundle_index(bundle));
                        }
                    }
                }
            }
            for (u, unit) in f.fus.iter().enumerate() {
                if unit.latency > 0 {
                    fu_in.push((u, sim.fu_result(u, step, 0)?));
                }
            }
            let edge = |e: &Edge| -> Result<(usize, Vec<(usize, u64)>), SimError> {
                let mut c = Vec::new();
                for (r, w) in &e.copies {
                    c.push((*r, sim.eval(w, step, 0)? & mask(f.regs[*r])));
                }
                Ok((f.exec_state(e.to), c))
            };
            let (ns, copies) = match &st.next {
                Next::Goto(e) => edge(e)?,
                Next::Branch { cond, then, els } => {
                    if sim.eval(cond, step, 0)? & 1 == 1 {
                        edge(then)?
                    } else {
                        edge(els)?
                    }
                }
                Next::Return(v) => {
                    if let Some(v) = v {
                        sim.ret = sim.eval(v, step, 0)? & mask(f.ret_width.unwrap_or(64));
                    }
                    (f.done_state(), Vec::new())
                }
            };
            reg_writes.extend(copies);
            next_state = ns;
        }
        // AXI channels
        let mut handshakes = Vec::new();
        for i in 0..nb {
            let mem = &mut mems[f.bundles[i].id as usize];
            let so = sim.slaves[i].outputs(mem);
            let mo = sim.ctl[i].outputs();
            let smp = Sampling {
                r_captured: mo.rready && so.rvalid,
                b_captured: mo.bready && so.bvalid,
            };
            sim.monitors[i].observe(&mo, &so, smp);
            if let Some(v) = sim.monitors[i].violations.first() {
                return Err(SimError::Protocol {
                    cycle,
                    msg: format!("bundle {}: {}", f.bundles[i].id, v.msg),
                });
            }
            if cfg.trace {
                let id = f.bundles[i].id;
                if mo.arvalid && so.arready {
                    handshakes.push((id, "AR", mo.araddr as u64));
                }
                if mo.rready && so.rvalid {
                    handshakes.push((id, "R", so.rdata));
                }
                if mo.awvalid && so.awready {
                    handshakes.push((id, "AW", mo.awaddr as u64));
                }
                if mo.wvalid && so.wready {
                    handshakes.push((id, "W", mo.wdata));
                }
                if mo.bready && so.bvalid {
                    handshakes.push((id, "B", so.bresp as u64));
                }
            }
            sim.ctl[i].clock(issues[i], &so);
            sim.slaves[i].clock(&mo, mem);
        }
        if cfg.trace {
            trace.push(TraceRecord {
                cycle,
                state: sim.state as u32,
                reg_writes: reg_writes.clone(),
                handshakes,
                busy: sim.ctl.iter().map(|c| c.busy()).collect(),
            });
        }
        // clock edge
        for (r, v) in reg_writes {
            sim.regs[r] = v;
        }
        for (ri, port, a) in ram_reads {
            sim.ram_q[ri][port as usize] = sim.rams[ri].get(a).copied().unwrap_or(0);
        }
        for (ri, a, d) in ram_writes {
            if let Some(x) = sim.rams[ri].get_mut(a) {
                *x = d;
            }
        }
        for i in axi_loads {
            sim.axi_q[i] = sim.ctl[i].rdata;
        }
        for (u, v) in fu_in {
            let p = &mut sim.fus[u].pipe;
            p.rotate_right(1);
            p[0] = v;
        }
        cycle += 1;
        if kind == StateKind::Done {
            break;
        }
        sim.state = next_state;
    }
    let mut mons = std::mem::take(&mut sim.monitors);
    for (i, m) in mons.iter_mut().enumerate() {
        if let Some(v) = m.finish().first() {
            return Err(SimError::Protocol {
                cycle: v.cycle,
                msg: format!("bundle {}: {}", f.bundles[i].id, v.msg),
            });
        }
    }
    Ok(CosimResult {
        ret: f.ret_width.map(|_| sim.ret),
        cycles: cycle,
        trace,
        error_response: sim.ctl.iter().any(|c| c.err),
    })
}
