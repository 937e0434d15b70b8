// SPDX-License-Identifier: Apache-2.0

//! Structured synthesis reports.
//!
//! The text form is line oriented: `<keyword> <fields…>`, with state
//! sections holding indented `op` lines. `parse_report` accepts exactly what
//! `HlsReport::to_text` writes, so the format doubles as its own schema.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::charlib::TargetDescriptor;
use crate::middle::Cdfg;

use super::allocate::{kind_name, Allocation};
use super::fsmd::{Fsmd, StateKind};
use super::schedule::Schedule;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuLine {
    pub kind: String,
    pub count: u32,
    pub dsp: bool,
    pub lut: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLine {
    pub block: u32,
    /// FSM states of the block, excluding AXI waits; a lower bound on cycles.
    pub min_cycles: u32,
    pub axi_waits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateLine {
    pub state: u32,
    pub kind: String,
    /// (start offset in ps, op text)
    pub ops: Vec<(u32, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HlsReport {
    pub top: String,
    pub clock_ps: u32,
    pub states: u32,
    pub steps: u32,
    pub blocks: Vec<BlockLine>,
    pub fus: Vec<FuLine>,
    pub registers: u32,
    pub register_bits: u32,
    pub ram_blocks: u32,
    pub dsp: u32,
    pub luts: u64,
    pub lut_capacity: u64,
    pub feasible: bool,
    pub schedule: Vec<StateLine>,
}

pub fn build_report(g: &Cdfg, a: &Allocation, s: &Schedule, f: &Fsmd, target: &TargetDescriptor) -> HlsReport {
    let mut fus: Vec<FuLine> = Vec::new();
    for u in &f.fus {
        let rec = a.fus[&u.kind].record;
        let name = kind_name(u.kind);
        match fus.iter_mut().find(|l| l.kind == name) {
            Some(l) => l.count += 1,
            None => fus.push(FuLine {
                kind: name,
                count: 1,
                dsp: u.dsp,
                lut: rec.res.lut,
            }),
        }
    }
    let dsp: u32 = f.fus.iter().filter(|u| u.dsp).map(|u| a.fus[&u.kind].record.res.dsp.max(1)).sum();
    let luts: u64 = f.fus.iter().filter(|u| !u.dsp).map(|u| a.fus[&u.kind].record.res.lut as u64).sum();
    let blocks = g
        .block_ids()
        .map(|b| BlockLine {
            block: b.0,
            min_cycles: s.states(b),
            axi_waits: f.steps.iter().filter(|st| st.block == b && st.has_axi()).count() as u32,
        })
        .collect();
    let schedule = f
        .states
        .iter()
        .enumerate()
        .map(|(i, k)| {
            let (kind, ops) = match *k {
                StateKind::Idle => ("idle".to_string(), Vec::new()),
                StateKind::Done => ("done".to_string(), Vec::new()),
                StateKind::Wait(st) => (format!("wait step{st}"), Vec::new()),
                StateKind::Exec(st) => {
                    let step = &f.steps[st as usize];
                    let ops = s
                        .block_ops(g, step.block)
                        .into_iter()
                        .filter_map(|o| {
                            let p = s.placement(o)?;
                            (p.step == step.index).then(|| (p.start_ps, g.op_string(o)))
                        })
                        .collect();
                    (format!("exec step{st} {} s{}", step.block, step.index), ops)
                }
            };
            StateLine {
                state: i as u32,
                kind,
                ops,
            }
        })
        .collect();
    HlsReport {
        top: f.name.clone(),
        clock_ps: f.clock_ps,
        states: f.states.len() as u32,
        steps: f.steps.len() as u32,
        blocks,
        fus,
        registers: f.regs.len() as u32,
        register_bits: f.regs.iter().map(|&w| w as u32).sum(),
        ram_blocks: f.rams.len() as u32,
        dsp,
        luts,
        lut_capacity: target.lut_capacity,
        feasible: luts <= target.lut_capacity,
        schedule,
    }
}

impl HlsReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "report {REPORT_VERSION}");
        let _ = writeln!(s, "top {}", self.top);
        let _ = writeln!(s, "clock_ps {}", self.clock_ps);
        let _ = writeln!(s, "states {}", self.states);
        let _ = writeln!(s, "steps {}", self.steps);
        for b in &self.blocks {
            let _ = writeln!(s, "block {} min_cycles {} axi_waits {}", b.block, b.min_cycles, b.axi_waits);
        }
        for f in &self.fus {
            let _ = writeln!(s, "fu {} count {} dsp {} lut {}", f.kind, f.count, f.dsp as u8, f.lut);
        }
        let _ = writeln!(s, "registers {} bits {}", self.registers, self.register_bits);
        let _ = writeln!(s, "ram_blocks {}", self.ram_blocks);
        let _ = writeln!(s, "dsp {}", self.dsp);
        let _ = writeln!(
            s,
            "luts {} capacity {} feasible {}",
            self.luts,
            self.lut_capacity,
            if self.feasible { "yes" } else { "no" }
        );
        for st in &self.schedule {
            let _ = writeln!(s, "state {} {}", st.state, st.kind);
            for (off, op) in &st.ops {
                let _ = writeln!(s, "  op {off} {op}");
            }
        }
        s
    }

    /// The resource section alone.
    pub fn resources_text(&self) -> String {
        self.to_text()
            .lines()
            .filter(|l| {
                ["report", "top", "clock_ps", "fu", "registers", "ram_blocks", "dsp", "luts"].contains(&l.split(' ').next().unwrap_or(""))
            })
            .map(|l| format!("{l}\n"))
            .collect()
    }

    /// The schedule section alone.
    pub fn schedule_text(&self) -> String {
        self.to_text()
            .lines()
            .filter(|l| {
                let k = l.split(' ').next().unwrap_or("");
                ["report", "top", "clock_ps", "states", "steps", "block", "state"].contains(&k) || l.starts_with("  op ")
            })
            .map(|l| format!("{l}\n"))
            .collect()
    }
}

fn num<T: std::str::FromStr>(line: usize, t: Option<&str>) -> Result<T, String> {
    t.and_then(|x| x.parse().ok())
        .ok_or_else(|| format!("line {line}: expected a number"))
}

fn expect(line: usize, t: Option<&str>, kw: &str) -> Result<(), String> {
    if t == Some(kw) {
        Ok(())
    } else {
        Err(format!("line {line}: expected '{kw}'"))
    }
}

/// Parses a full report, rejecting unknown lines and missing fields.
pub fn parse_report(text: &str) -> Result<HlsReport, String> {
    let mut r = HlsReport {
        top: String::new(),
        clock_ps: 0,
        states: 0,
        steps: 0,
        blocks: Vec::new(),
        fus: Vec::new(),
        registers: 0,
        register_bits: 0,
        ram_blocks: 0,
        dsp: 0,
        luts: 0,
        lut_capacity: 0,
        feasible: false,
        schedule: Vec::new(),
    };
    let mut seen = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if let Some(rest) = line.strip_prefix("  op ") {
            let (off, op) = rest.split_once(' ').ok_or_else(|| format!("line {n}: malformed op"))?;
            let st = r.schedule.last_mut().ok_or_else(|| format!("line {n}: op outside a state"))?;
            st.ops.push((num(n, Some(off))?, op.to_string()));
            continue;
        }
        let mut t = line.split(' ');
        let kw = t.next().unwrap_or("");
        match kw {
            "report" => {
                let v: u32 = num(n, t.next())?;
                if v != REPORT_VERSION {
                    return Err(format!("line {n}: unsupported report version {v}"));
                }
            }
            "top" => r.top = t.next().ok_or_else(|| format!("line {n}: missing name"))?.to_string(),
            "clock_ps" => r.clock_ps = num(n, t.next())?,
            "states" => r.states = num(n, t.next())?,
            "steps" => r.steps = num(n, t.next())?,
            "block" => {
                let block = num(n, t.next())?;
                expect(n, t.next(), "min_cycles")?;
                let min_cycles = num(n, t.next())?;
                expect(n, t.next(), "axi_waits")?;
                let axi_waits = num(n, t.next())?;
                r.blocks.push(BlockLine {
                    block,
                    min_cycles,
                    axi_waits,
                });
            }
            "fu" => {
                let kind = t.next().ok_or_else(|| format!("line {n}: missing kind"))?.to_string();
                expect(n, t.next(), "count")?;
                let count = num(n, t.next())?;
                expect(n, t.next(), "dsp")?;
                let dsp: u8 = num(n, t.next())?;
                expect(n, t.next(), "lut")?;
                let lut = num(n, t.next())?;
                r.fus.push(FuLine {
                    kind,
                    count,
                    dsp: dsp == 1,
                    lut,
                });
            }
            "registers" => {
                r.registers = num(n, t.next())?;
                expect(n, t.next(), "bits")?;
                r.register_bits = num(n, t.next())?;
            }
            "ram_blocks" => r.ram_blocks = num(n, t.next())?,
            "dsp" => r.dsp = num(n, t.next())?,
            "luts" => {
                r.luts = num(n, t.next())?;
                expect(n, t.next(), "capacity")?;
                r.lut_capacity = num(n, t.next())?;
                expect(n, t.next(), "feasible")?;
                r.feasible = match t.next() {
                    Some("yes") => true,
                    Some("no") => false,
                    _ => return Err(format!("line {n}: feasible must be yes or no")),
                };
            }
            "state" => {
                let state = num(n, t.next())?;
                let kind: Vec<&str> = t.by_ref().collect();
                if kind.is_empty() {
                    return Err(format!("line {n}: missing state kind"));
                }
                r.schedule.push(StateLine {
                    state,
                    kind: kind.join(" "),
                    ops: Vec::new(),
                });
                continue;
            }
            _ => return Err(format!("line {n}: unknown entry '{kw}'")),
        }
        if t.next().is_some() {
            return Err(format!("line {n}: trailing fields"));
        }
        seen.push(kw);
    }
    for req in [
        "report",
        "top",
        "clock_ps",
        "states",
        "steps",
        "registers",
        "ram_blocks",
        "dsp",
        "luts",
    ] {
        if !seen.contains(&req) {
            return Err(format!("missing '{req}' entry"));
        }
    }
    if r.schedule.len() as u32 != r.states {
        return Err(format!("state count {} but {} state sections", r.states, r.schedule.len()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charlib::{ComponentLibrary, LookupParams};
    use crate::frontend::{check, SourceUnit};
    use crate::hls::{allocate, bind, build_fsmd, map_memories, schedule_list, Constraints};
    use crate::middle::{lower_to_cdfg, optimize};

    #[test]
    fn round_trip() {
        let src = "int f(int a, int b) { int x[8]; for (int i = 0; i < 8; i++) x[i] = a * i; return x[b & 7] + b; }";
        let g = optimize(&lower_to_cdfg(&check(&SourceUnit::new("t.c", src), "f").unwrap()).unwrap(), 1);
        let lib = ComponentLibrary::default_library();
        let a = allocate(&g, &Constraints::default(), &lib, LookupParams::at(10_000)).unwrap();
        let s = schedule_list(&g, &a).unwrap();
        let b = bind(&g, &s, &a).unwrap();
        let f = map_memories(&g, build_fsmd(&g, &s, &b, &a).unwrap(), &lib.target).unwrap();
        let r = build_report(&g, &a, &s, &f, &lib.target);
        assert_eq!(r.ram_blocks, 1);
        assert!(r.dsp >= 1);
        let text = r.to_text();
        assert_eq!(parse_report(&text).unwrap(), r);
        assert!(parse_report(&text.replace("ram_blocks", "rams")).is_err());
        assert!(r.resources_text().contains("ram_blocks 1"));
        assert!(r.schedule_text().contains("  op "));
    }
}
