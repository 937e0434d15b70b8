// SPDX-License-Identifier: Apache-2.0

//! Finite state machine with datapath.
//!
//! Every (block, step) pair becomes one step of the controller. A step is a
//! single FSM state, or two when it issues AXI transactions: the first state
//! issues the requests, the second waits for all involved controllers to go
//! idle. Registers, RAMs and pipelined units only advance on the final cycle
//! of a step, so wait states never disturb the datapath.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::charlib::{Instance, TargetDescriptor};
use crate::middle::{Backing, BlockId, Cdfg, MemId, MemKind, OpClass, OpId, Opcode, ParamKind, Terminator, ValueDef, ValueId};
use crate::semantics::mask;

use super::allocate::{Allocation, Resource};
use super::bind::{phi_args_on_edge, value_home, Binding};
use super::schedule::Schedule;
use super::HlsError;

/// A combinational signal feeding a unit, register, memory or transition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wire {
    Const {
        bits: u64,
        width: u8,
    },
    /// Argument latched at start.
    Arg(u32),
    Reg(usize),
    /// Output of a functional unit at its full width.
    Fu(usize),
    /// Registered read data of a RAM port.
    Ram {
        mem: MemId,
        port: u8,
    },
    /// Read data of an AXI controller (64 bits).
    Axi(u32),
    /// Extension, truncation or constant shift.
    Free {
        op: Opcode,
        args: Vec<Wire>,
        width: u8,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgPort {
    pub name: String,
    pub width: u8,
    /// Array parameters arrive as 32-bit byte addresses.
    pub pointer: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuUnit {
    pub kind: Instance,
    pub latency: u32,
    pub ii: u32,
    pub dsp: bool,
    pub in_widths: Vec<u8>,
}

impl FuUnit {
    pub fn out_width(&self) -> u8 {
        if self.kind.opcode == OpClass::Cmp {
            1
        } else {
            self.kind.width
        }
    }

    pub fn is_divider(&self) -> bool {
        matches!(self.kind.opcode, OpClass::Div | OpClass::Mod)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuOp {
    pub fu: usize,
    pub func: Opcode,
    /// Operands already extended to the unit's input widths.
    pub args: Vec<Wire>,
    pub op: OpId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemTarget {
    Ram {
        mem: MemId,
        port: u8,
    },
    /// `base` is the argument holding the array's byte address.
    Axi {
        bundle: u32,
        base: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemOp {
    pub target: MemTarget,
    pub store: bool,
    pub bytes: u8,
    /// Element index for RAMs, byte offset for AXI.
    pub addr: Wire,
    pub data: Option<Wire>,
    pub op: OpId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub to: u32,
    /// Phi register writes performed when the edge is taken.
    pub copies: Vec<(usize, Wire)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Next {
    Goto(Edge),
    Branch { cond: Wire, then: Edge, els: Edge },
    Return(Option<Wire>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub block: BlockId,
    pub index: u32,
    pub fu_ops: Vec<FuOp>,
    pub reg_writes: Vec<(usize, Wire)>,
    pub mem_ops: Vec<MemOp>,
    pub next: Next,
}

impl Step {
    pub fn has_axi(&self) -> bool {
        self.mem_ops.iter().any(|m| matches!(m.target, MemTarget::Axi { .. }))
    }

    pub fn bundles(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .mem_ops
            .iter()
            .filter_map(|m| match m.target {
                MemTarget::Axi { bundle, .. } => Some(bundle),
                _ => None,
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateKind {
    Idle,
    /// Computes a step; for AXI steps, also issues the requests.
    Exec(u32),
    /// Waits for the controllers of an AXI step.
    Wait(u32),
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RamBlock {
    pub mem: MemId,
    pub name: String,
    pub depth: u32,
    pub width: u8,
    /// Power-on contents; missing entries are zero.
    pub init: Vec<u64>,
}

impl RamBlock {
    pub fn addr_bits(&self) -> u8 {
        addr_bits(self.depth)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleCtl {
    pub id: u32,
    pub data_width: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FsmEncoding {
    #[default]
    Binary,
    OneHot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fsmd {
    pub name: String,
    pub args: Vec<ArgPort>,
    pub ret_width: Option<u8>,
    pub regs: Vec<u8>,
    pub fus: Vec<FuUnit>,
    pub rams: Vec<RamBlock>,
    pub bundles: Vec<BundleCtl>,
    pub steps: Vec<Step>,
    pub states: Vec<StateKind>,
    pub entry: u32,
    pub encoding: FsmEncoding,
    pub clock_ps: u32,
}

pub fn addr_bits(depth: u32) -> u8 {
    (32 - depth.saturating_sub(1).leading_zeros()).max(1) as u8
}

impl Fsmd {
    pub fn wire_width(&self, w: &Wire) -> u8 {
        match w {
            Wire::Const { width, .. } | Wire::Free { width, .. } => *width,
            Wire::Arg(i) => self.args[*i as usize].width,
            Wire::Reg(r) => self.regs[*r],
            Wire::Fu(f) => self.fus[*f].out_width(),
            Wire::Ram { mem, .. } => self.ram(*mem).map_or(64, |r| r.width),
            Wire::Axi(_) => 64,
        }
    }

    pub fn ram(&self, mem: MemId) -> Option<&RamBlock> {
        self.rams.iter().find(|r| r.mem == mem)
    }

    pub fn ram_index(&self, mem: MemId) -> Option<usize> {
        self.rams.iter().position(|r| r.mem == mem)
    }

    pub fn exec_state(&self, step: u32) -> usize {
        self.states.iter().position(|s| *s == StateKind::Exec(step)).expect("step state")
    }

    pub fn done_state(&self) -> usize {
        self.states.len() - 1
    }

    /// Text dump; identical inputs give identical dumps.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "fsmd {} ({} states, {} steps)", self.name, self.states.len(), self.steps.len());
        for (i, a) in self.args.iter().enumerate() {
            let _ = writeln!(s, "arg{i} {} : {}{}", a.name, a.width, if a.pointer { " ptr" } else { "" });
        }
        for (i, w) in self.regs.iter().enumerate() {
            let _ = writeln!(s, "reg r{i} : {w}");
        }
        for (i, f) in self.fus.iter().enumerate() {
            let _ = writeln!(
                s,
                "fu{i} {} lat {} ii {}{} in {:?}",
                super::kind_name(f.kind),
                f.latency,
                f.ii,
                if f.dsp { " dsp" } else { "" },
                f.in_widths
            );
        }
        for r in &self.rams {
            let _ = writeln!(s, "ram {} {}x{}", r.name, r.depth, r.width);
        }
        for b in &self.bundles {
            let _ = writeln!(s, "axi{} {} bits", b.id, b.data_width);
        }
        for (i, st) in self.states.iter().enumerate() {
            let _ = writeln!(s, "state {i}: {st:?}");
        }
        for (i, st) in self.steps.iter().enumerate() {
            let _ = writeln!(s, "step {i} ({} s{}):", st.block, st.index);
            for op in &st.fu_ops {
                let _ = writeln!(s, "  fu{} <- {}({})", op.fu, op.func.mnemonic(), wires(&op.args));
            }
            for m in &st.mem_ops {
                let _ = writeln!(
                    s,
                    "  {} {:?} {}B addr {}{}",
                    if m.store { "store" } else { "load" },
                    m.target,
                    m.bytes,
                    wire_str(&m.addr),
                    m.data.as_ref().map(|d| format!(" data {}", wire_str(d))).unwrap_or_default()
                );
            }
            for (r, w) in &st.reg_writes {
                let _ = writeln!(s, "  r{r} <= {}", wire_str(w));
            }
            let _ = writeln!(s, "  next {}", next_str(&st.next));
        }
        s
    }
}

fn wires(ws: &[Wire]) -> String {
    ws.iter().map(wire_str).collect::<Vec<_>>().join(", ")
}

pub fn wire_str(w: &Wire) -> String {
    match w {
        Wire::Const { bits, width } => format!("{width}'d{bits}"),
        Wire::Arg(i) => format!("arg{i}"),
        Wire::Reg(r) => format!("r{r}"),
        Wire::Fu(f) => format!("fu{f}"),
        Wire::Ram { mem, port } => format!("ram{}.q{}", mem.0, port),
        Wire::Axi(b) => format!("axi{b}.rdata"),
        Wire::Free { op, args, width } => format!("{}{}({})", op.mnemonic(), width, wires(args)),
    }
}

fn edge_str(e: &Edge) -> String {
    let c: Vec<String> = e.copies.iter().map(|(r, w)| format!("r{r}={}", wire_str(w))).collect();
    if c.is_empty() {
        format!("step{}", e.to)
    } else {
        format!("step{} [{}]", e.to, c.join(", "))
    }
}

fn next_str(n: &Next) -> String {
    match n {
        Next::Goto(e) => edge_str(e),
        Next::Branch { cond, then, els } => format!("if {} then {} else {}", wire_str(cond), edge_str(then), edge_str(els)),
        Next::Return(v) => format!("return {}", v.as_ref().map(wire_str).unwrap_or_default()),
    }
}

struct Builder<'a> {
    g: &'a Cdfg,
    a: &'a Allocation,
    s: &'a Schedule,
    b: &'a Binding,
    fus: Vec<FuUnit>,
    base: Vec<u32>,
}

fn extend(w: Wire, from: u8, to: u8, signed: bool) -> Wire {
    if from == to {
        w
    } else {
        debug_assert!(from < to);
        Wire::Free {
            op: Opcode::Ext { signed },
            args: vec![w],
            width: to,
        }
    }
}

fn trunc(w: Wire, from: u8, to: u8) -> Wire {
    if from == to {
        w
    } else {
        Wire::Free {
            op: Opcode::Trunc,
            args: vec![w],
            width: to,
        }
    }
}

/// Which operands of an opcode are sign-extended when widened to a unit.
fn signed_operand(op: Opcode, k: usize) -> bool {
    match op {
        Opcode::Div { signed } | Opcode::Rem { signed } | Opcode::Lt { signed } | Opcode::Le { signed } => signed,
        Opcode::Shr { arith } => arith && k == 0,
        _ => false,
    }
}

impl Builder<'_> {
    fn wire(&self, v: ValueId, blk: BlockId, step: u32) -> Wire {
        let g = self.g;
        let w = g.width(v);
        match g.value(v).def {
            ValueDef::Const(bits) => Wire::Const { bits, width: w },
            ValueDef::Input(p) => Wire::Arg(p),
            ValueDef::Op(o) => {
                let op = g.op(o);
                if op.opcode != Opcode::Phi && value_home(g, self.a, self.s, v) == Some((blk, step)) {
                    match self.a.timing(o).unwrap().resource {
                        Resource::Free => Wire::Free {
                            op: op.opcode,
                            args: op.args.iter().map(|&x| self.wire(x, blk, step)).collect(),
                            width: w,
                        },
                        Resource::Fu(_) => {
                            let f = self.b.fu_of[o.0 as usize].unwrap();
                            trunc(Wire::Fu(f), self.fus[f].out_width(), w)
                        }
                        Resource::Ram(mem) => Wire::Ram {
                            mem,
                            port: self.b.port_of[o.0 as usize].unwrap(),
                        },
                        Resource::Axi(bundle) => trunc(Wire::Axi(bundle), 64, w),
                    }
                } else {
                    Wire::Reg(self.b.reg_of[v.0 as usize].unwrap_or_else(|| panic!("{v} used at {blk}/{step} without a register")))
                }
            }
        }
    }

    fn step_index(&self, b: BlockId, step: u32) -> u32 {
        self.base[b.0 as usize] + step
    }

    fn edge(&self, from: BlockId, to: BlockId) -> Edge {
        let last = self.s.states(from) - 1;
        let copies = phi_args_on_edge(self.g, from, to)
            .into_iter()
            .filter_map(|(phi, arg)| {
                let r = self.b.reg_of[self.g.result(phi).0 as usize]?;
                Some((r, self.wire(arg, from, last)))
            })
            .collect();
        Edge {
            to: self.step_index(to, 0),
            copies,
        }
    }
}

/// Builds the controller and datapath from a scheduled, bound graph.
pub fn build_fsmd(g: &Cdfg, s: &Schedule, b: &Binding, a: &Allocation) -> Result<Fsmd, HlsError> {
    // unit input widths: operand widths grow to the unit width; shift amounts
    // keep the widest amount routed to the unit
    let mut fus: Vec<FuUnit> = b
        .fus
        .iter()
        .map(|&kind| {
            let rec = a.fus[&kind].record;
            let n = match kind.opcode {
                OpClass::Mux => 3,
                _ => 2,
            };
            let mut in_widths = vec![kind.width; n];
            if kind.opcode == OpClass::Mux {
                in_widths[0] = 1;
            }
            if matches!(kind.opcode, OpClass::Shl | OpClass::Shr) {
                in_widths[1] = 1;
            }
            FuUnit {
                kind,
                latency: rec.latency,
                ii: rec.ii.max(1),
                dsp: a.fus[&kind].dsp,
                in_widths,
            }
        })
        .collect();
    for (i, op) in g.ops.iter().enumerate() {
        if let (Some(f), Opcode::Shl | Opcode::Shr { .. }) = (b.fu_of[i], op.opcode) {
            let w = g.width(op.args[1]);
            fus[f].in_widths[1] = fus[f].in_widths[1].max(w);
        }
    }
    let mut base = Vec::new();
    let mut acc = 0;
    for blk in g.block_ids() {
        base.push(acc);
        acc += s.states(blk);
    }
    let bl = Builder { g, a, s, b, fus, base };
    let mut steps = Vec::new();
    let registered: Vec<(ValueId, usize)> = b
        .reg_of
        .iter()
        .enumerate()
        .filter_map(|(v, r)| r.map(|r| (ValueId(v as u32), r)))
        .collect();
    for blk in g.block_ids() {
        let n = s.states(blk);
        let first = steps.len();
        for k in 0..n {
            steps.push(Step {
                block: blk,
                index: k,
                fu_ops: Vec::new(),
                reg_writes: Vec::new(),
                mem_ops: Vec::new(),
                next: Next::Goto(Edge {
                    to: bl.step_index(blk, k + 1),
                    copies: Vec::new(),
                }),
            });
        }
        for o in s.block_ops(g, blk) {
            let op = g.op(o);
            let p = s.placement(o).unwrap();
            let st = &mut steps[first + p.step as usize];
            match a.timing(o).unwrap().resource {
                Resource::Free => {}
                Resource::Fu(_) => {
                    let f = b.fu_of[o.0 as usize].unwrap();
                    let unit = &bl.fus[f];
                    let args = op
                        .args
                        .iter()
                        .enumerate()
                        .map(|(k, &x)| {
                            let w = bl.wire(x, blk, p.step);
                            extend(w, g.width(x), unit.in_widths[k], signed_operand(op.opcode, k))
                        })
                        .collect();
                    st.fu_ops.push(FuOp {
                        fu: f,
                        func: op.opcode,
                        args,
                        op: o,
                    });
                }
                Resource::Ram(_) | Resource::Axi(_) if op.opcode.mem().is_some() => {
                    let mem = op.opcode.mem().unwrap();
                    let mo = g.mem(mem);
                    let store = matches!(op.opcode, Opcode::Store { .. });
                    let off = bl.wire(op.args[0], blk, p.step);
                    let data = store.then(|| bl.wire(op.args[1], blk, p.step));
                    let (target, addr) = match (mo.backing, &mo.kind) {
                        (Backing::OnChip, MemKind::Local { len, .. }) => {
                            let sh = mo.elem_shift();
                            let idx = if sh == 0 {
                                off
                            } else {
                                Wire::Free {
                                    op: Opcode::Shr { arith: false },
                                    args: vec![
                                        off,
                                        Wire::Const {
                                            bits: sh as u64,
                                            width: 32,
                                        },
                                    ],
                                    width: 32,
                                }
                            };
                            let ab = addr_bits(*len);
                            (
                                MemTarget::Ram {
                                    mem,
                                    port: b.port_of[o.0 as usize].unwrap(),
                                },
                                trunc(idx, 32, ab),
                            )
                        }
                        (Backing::Axi(bundle), MemKind::External { param }) => (MemTarget::Axi { bundle, base: *param }, off),
                        _ => return Err(HlsError::Memory(format!("memory {} has no usable backing", mo.name))),
                    };
                    st.mem_ops.push(MemOp {
                        target,
                        store,
                        bytes: mo.elem_bytes() as u8,
                        addr,
                        data,
                        op: o,
                    });
                }
                r => return Err(HlsError::Memory(format!("unexpected resource {r} for {}", g.op_string(o)))),
            }
        }
        // register captures at each value's home step
        for &(v, r) in &registered {
            let ValueDef::Op(o) = g.value(v).def else { continue };
            if g.op(o).block != blk || g.op(o).opcode == Opcode::Phi {
                continue;
            }
            let (_, step) = value_home(g, a, s, v).unwrap();
            let w = bl.wire(v, blk, step);
            steps[first + step as usize].reg_writes.push((r, w));
        }
        let last = first + n as usize - 1;
        steps[last].next = match &g.block(blk).term {
            Terminator::Jump(t) => Next::Goto(bl.edge(blk, *t)),
            Terminator::Branch { cond, then, els } => Next::Branch {
                cond: bl.wire(*cond, blk, n - 1),
                then: bl.edge(blk, *then),
                els: bl.edge(blk, *els),
            },
            Terminator::Return(v) => Next::Return(v.map(|v| bl.wire(v, blk, n - 1))),
        };
    }
    for st in &mut steps {
        st.reg_writes.sort_by_key(|(r, _)| *r);
    }
    let mut states = vec![StateKind::Idle];
    for (i, st) in steps.iter().enumerate() {
        states.push(StateKind::Exec(i as u32));
        if st.has_axi() {
            states.push(StateKind::Wait(i as u32));
        }
    }
    states.push(StateKind::Done);
    let args = g
        .params
        .iter()
        .map(|p| match &p.kind {
            ParamKind::Scalar { ty, .. } => ArgPort {
                name: p.name.clone(),
                width: ty.width(),
                pointer: false,
            },
            ParamKind::Array { .. } => ArgPort {
                name: p.name.clone(),
                width: 32,
                pointer: true,
            },
        })
        .collect();
    Ok(Fsmd {
        name: g.name.clone(),
        args,
        ret_width: g.ret.map(|t| t.width()),
        regs: b.regs.clone(),
        fus: bl.fus,
        rams: Vec::new(),
        bundles: Vec::new(),
        steps,
        states,
        entry: 0,
        encoding: FsmEncoding::Binary,
        clock_ps: s.clock_ps,
    })
}

/// Maps every accessed local array onto one dual-port RAM block and marks
/// multipliers that fit the target's DSP blocks.
pub fn map_memories(g: &Cdfg, mut f: Fsmd, target: &TargetDescriptor) -> Result<Fsmd, HlsError> {
    let mut used: Vec<MemId> = f
        .steps
        .iter()
        .flat_map(|s| s.mem_ops.iter())
        .filter_map(|m| match m.target {
            MemTarget::Ram { mem, .. } => Some(mem),
            _ => None,
        })
        .collect();
    used.sort();
    used.dedup();
    f.rams.clear();
    for mem in used {
        let mo = g.mem(mem);
        let MemKind::Local { len, init, .. } = &mo.kind else {
            return Err(HlsError::Memory(format!("{} is not a local array", mo.name)));
        };
        if mo.elem.width() > 64 {
            return Err(HlsError::Memory(format!(
                "unsupported: {} has elements wider than 64 bits",
                mo.name
            )));
        }
        let width = mo.elem.width();
        f.rams.push(RamBlock {
            mem,
            name: mo.name.clone(),
            depth: *len,
            width,
            init: init.clone().unwrap_or_default().into_iter().map(|v| v & mask(width)).collect(),
        });
    }
    for (i, st) in f.steps.iter().enumerate() {
        let mut seen: Vec<(MemId, u8)> = Vec::new();
        for m in &st.mem_ops {
            if let MemTarget::Ram { mem, port } = m.target {
                if port >= target.ram_ports_per_block || seen.contains(&(mem, port)) {
                    return Err(HlsError::Memory(format!("memory port conflict on {} in step {i}", g.mem(mem).name)));
                }
                seen.push((mem, port));
            }
        }
    }
    for u in &mut f.fus {
        u.dsp = u.kind.opcode == OpClass::Mul && u.kind.width <= target.dsp_native_width;
    }
    Ok(f)
}

/// Structural checks shared by the simulators and the emitter.
pub fn check_fsmd(f: &Fsmd) -> Result<(), String> {
    let nsteps = f.steps.len() as u32;
    for (i, st) in f.steps.iter().enumerate() {
        let targets: Vec<u32> = match &st.next {
            Next::Goto(e) => vec![e.to],
            Next::Branch { then, els, .. } => vec![then.to, els.to],
            Next::Return(_) => vec![],
        };
        if targets.iter().any(|&t| t >= nsteps) {
            return Err(format!("step {i} jumps outside the controller"));
        }
        for m in &st.mem_ops {
            match m.target {
                MemTarget::Ram { mem, .. } if f.ram(mem).is_none() => {
                    return Err(format!("step {i} accesses unmapped memory {}", mem.0));
                }
                MemTarget::Axi { bundle, .. } if !f.bundles.iter().any(|b| b.id == bundle) => {
                    return Err(format!("step {i} uses bundle {bundle} without a controller"));
                }
                _ => {}
            }
        }
        let mut regs: Vec<usize> = st.reg_writes.iter().map(|(r, _)| *r).collect();
        regs.sort();
        if regs.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("step {i} writes a register twice"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charlib::{ComponentLibrary, LookupParams};
    use crate::frontend::{check, SourceUnit};
    use crate::hls::{allocate, bind, schedule_list, Constraints};
    use crate::middle::{lower_to_cdfg, optimize};

    fn fsmd(src: &str) -> (Cdfg, Fsmd) {
        let g = optimize(&lower_to_cdfg(&check(&SourceUnit::new("t.c", src), "f").unwrap()).unwrap(), 1);
        let lib = ComponentLibrary::default_library();
        let a = allocate(&g, &Constraints::default(), &lib, LookupParams::at(10_000)).unwrap();
        let s = schedule_list(&g, &a).unwrap();
        let b = bind(&g, &s, &a).unwrap();
        let f = build_fsmd(&g, &s, &b, &a).unwrap();
        let f = map_memories(&g, f, &lib.target).unwrap();
        (g, f)
    }

    #[test]
    fn constant_return_three_states() {
        let (_, f) = fsmd("int f() { return 42; }");
        assert_eq!(f.states, vec![StateKind::Idle, StateKind::Exec(0), StateKind::Done]);
    }

    #[test]
    fn state_count_invariant() {
        let (_, f) = fsmd("int f(int a, int b) { int x = a * b; int y = x * a; return y * b; }");
        assert_eq!(f.states.len(), 2 + f.steps.len());
    }

    #[test]
    fn diamond_branches() {
        let (_, f) = fsmd("int f(int a, int b) { int r; if (a < b) r = a * 3; else r = b - a; return r; }");
        assert!(f.steps.iter().any(|s| matches!(s.next, Next::Branch { .. })));
        check_fsmd(&f).unwrap();
    }

    #[test]
    fn local_array_one_ram() {
        let (_, f) = fsmd("int f(int i, int j) { int x[16]; for (int k = 0; k < 16; k++) x[k] = k * k; return x[i] + x[j]; }");
        assert_eq!(f.rams.len(), 1);
        assert_eq!((f.rams[0].depth, f.rams[0].width), (16, 32));
        let two = f.steps.iter().any(|s| {
            let ports: Vec<_> = s
                .mem_ops
                .iter()
                .filter_map(|m| match m.target {
                    MemTarget::Ram { port, .. } => Some(port),
                    _ => None,
                })
                .collect();
            ports == vec![0, 1]
        });
        assert!(two, "expected a step using both ports");
    }

    #[test]
    fn port_conflict_detected() {
        let (g, mut f) = fsmd("int f(int i, int j) { int x[4] = {1,2,3,4}; return x[i] + x[j]; }");
        let st = f.steps.iter_mut().find(|s| s.mem_ops.len() == 2).unwrap();
        st.mem_ops[1].target = st.mem_ops[0].target;
        let e = map_memories(&g, f, &TargetDescriptor::default()).unwrap_err();
        assert!(e.to_string().starts_with("memory port conflict"), "{e}");
    }
}
