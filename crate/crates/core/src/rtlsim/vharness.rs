// SPDX-License-Identifier: Apache-2.0

//! Drives an emitted module the way a testbench would: reset, `start`, one
//! behavioural AXI slave and protocol monitor per bundle, run until `done`.

use crate::axi::{AxiSlave, MasterOut, ProtocolMonitor, Sampling, SlaveOut};
use crate::semantics::mask;

use super::cosim::{CosimConfig, CosimResult, TraceRecord};
use super::interp::ArgValue;
use super::memory::MemoryImage;
use super::verilog::{VModule, VSim};
use super::SimError;

struct Bundle {
    id: u32,
    prefix: String,
    slave: AxiSlave,
    monitor: ProtocolMonitor,
}

fn master(s: &VSim, p: &str) -> Result<MasterOut, SimError> {
    let g = |n: &str| s.get(&format!("{p}{n}"));
    Ok(MasterOut {
        arvalid: g("ARVALID")? != 0,
        araddr: g("ARADDR")? as u32,
        arlen: g("ARLEN")? as u8,
        arsize: g("ARSIZE")? as u8,
        rready: g("RREADY")? != 0,
        awvalid: g("AWVALID")? != 0,
        awaddr: g("AWADDR")? as u32,
        awlen: g("AWLEN")? as u8,
        awsize: g("AWSIZE")? as u8,
        wvalid: g("WVALID")? != 0,
        wdata: g("WDATA")? as u64,
        wstrb: g("WSTRB")? as u8,
        wlast: g("WLAST")? != 0,
        bready: g("BREADY")? != 0,
    })
}

fn drive(s: &mut VSim, p: &str, o: &SlaveOut) -> Result<(), SimError> {
    let mut set = |n: &str, v: u128| s.set(&format!("{p}{n}"), v);
    set("ARREADY", o.arready as u128)?;
    set("RVALID", o.rvalid as u128)?;
    set("RDATA", o.rdata as u128)?;
    set("RRESP", o.rresp as u128)?;
    set("RLAST", o.rlast as u128)?;
    set("RID", 0)?;
    set("AWREADY", o.awready as u128)?;
    set("WREADY", o.wready as u128)?;
    set("BVALID", o.bvalid as u128)?;
    set("BRESP", o.bresp as u128)?;
    set("BID", 0)
}

/// Runs the module in `src` once. `mems[b]` backs AXI bundle `b`.
pub fn run_verilog(src: &str, args: &[ArgValue], mems: &mut [MemoryImage], cfg: &CosimConfig) -> Result<CosimResult, SimError> {
    let m = VModule::parse(src)?;
    run_module(&m, args, mems, cfg, false)
}

/// As [`run_verilog`] on an elaborated module; `onehot` selects how the
/// state register is decoded in the trace.
pub fn run_module(
    m: &VModule,
    args: &[ArgValue],
    mems: &mut [MemoryImage],
    cfg: &CosimConfig,
    onehot: bool,
) -> Result<CosimResult, SimError> {
    let mut s = VSim::new(m)?;
    let arg_ports: Vec<_> = m.ports.iter().filter(|p| !p.output && p.name.starts_with("arg_")).collect();
    if arg_ports.len() != args.len() {
        return Err(SimError::Vector(format!(
            "expected {} arguments, got {}",
            arg_ports.len(),
            args.len()
        )));
    }
    for (p, a) in arg_ports.iter().zip(args) {
        let v = match a {
            ArgValue::Scalar(v) => *v,
            ArgValue::Array { base, .. } => *base as u64,
        };
        s.set(&p.name, (v & mask(p.width.min(64) as u8)) as u128)?;
    }
    let mut bundles = Vec::new();
    for p in &m.ports {
        let Some(rest) = p.name.strip_prefix("m_axi_") else { continue };
        let Some(id) = rest.strip_suffix("_RDATA") else { continue };
        let id: u32 = id.parse().map_err(|_| SimError::Verilog(format!("bad bundle port {}", p.name)))?;
        if id as usize >= mems.len() {
            return Err(SimError::Vector(format!("no memory image for bundle {id}")));
        }
        let mut slave = AxiSlave::new(p.width / 8, cfg.delays);
        slave.fault = cfg.slave_fault;
        bundles.push(Bundle {
            id,
            prefix: format!("m_axi_{id}_"),
            slave,
            monitor: ProtocolMonitor::new(),
        });
    }
    // synchronous reset
    s.set("rst", 1)?;
    s.set("start", 0)?;
    for b in &bundles {
        drive(&mut s, &b.prefix, &SlaveOut::default())?;
    }
    s.settle();
    s.posedge()?;
    s.set("rst", 0)?;
    s.set("start", 1)?;
    let mut trace = Vec::new();
    let mut cycle = 0u64;
    loop {
        if cycle >= cfg.budget {
            return Err(SimError::CycleBudget(cfg.budget));
        }
        let mut outs = Vec::with_capacity(bundles.len());
        for b in &bundles {
            let o = b.slave.outputs(&mems[b.id as usize]);
            drive(&mut s, &b.prefix, &o)?;
            outs.push(o);
        }
        s.settle();
        let done = s.get("done")? != 0;
        let mut handshakes = Vec::new();
        let mut mos = Vec::with_capacity(bundles.len());
        for (b, so) in bundles.iter_mut().zip(&outs) {
            let mo = master(&s, &b.prefix)?;
            let smp = Sampling {
                r_captured: mo.rready && so.rvalid,
                b_captured: mo.bready && so.bvalid,
            };
            b.monitor.observe(&mo, so, smp);
            if let Some(v) = b.monitor.violations.first() {
                return Err(SimError::Protocol {
                    cycle,
                    msg: format!("bundle {}: {}", b.id, v.msg),
                });
            }
            if cfg.trace {
                for (hit, ch, payload) in [
                    (mo.arvalid && so.arready, "AR", mo.araddr as u64),
                    (mo.rready && so.rvalid, "R", so.rdata),
                    (mo.awvalid && so.awready, "AW", mo.awaddr as u64),
                    (mo.wvalid && so.wready, "W", mo.wdata),
                    (mo.bready && so.bvalid, "B", so.bresp as u64),
                ] {
                    if hit {
                        handshakes.push((b.id, ch, payload));
                    }
                }
            }
            mos.push(mo);
        }
        if cfg.trace {
            let st = s.get("state")?;
            trace.push(TraceRecord {
                cycle,
                state: if onehot { st.trailing_zeros() } else { st as u32 },
                reg_writes: Vec::new(),
                handshakes,
                busy: mos
                    .iter()
                    .map(|o| o.arvalid || o.rready || o.awvalid || o.wvalid || o.bready)
                    .collect(),
            });
        }
        let ret = s.get("ret").ok();
        let err = s.get("axi_error")? != 0;
        s.posedge()?;
        for (b, mo) in bundles.iter_mut().zip(&mos) {
            b.slave.clock(mo, &mut mems[b.id as usize]);
        }
        cycle += 1;
        if done {
            for b in &mut bundles {
                if let Some(v) = b.monitor.finish().first() {
                    return Err(SimError::Protocol {
                        cycle: v.cycle,
                        msg: format!("bundle {}: {}", b.id, v.msg),
                    });
                }
            }
            return Ok(CosimResult {
                ret: ret.map(|v| v as u64),
                cycles: cycle,
                trace,
                error_response: err,
            });
        }
    }
}
