// SPDX-License-Identifier: Apache-2.0

//! Resource allocation and per-operation timing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::charlib::model::ps_to_ns_text;
use crate::charlib::{lookup, ComponentLibrary, Instance, LookupParams, Record};
use crate::middle::{Backing, Cdfg, MemId, OpClass, OpId, Opcode};

use super::HlsError;

/// What an operation occupies while it issues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Resource {
    /// Wiring only: extensions, truncations and constant shifts.
    Free,
    Fu(Instance),
    /// A port of an on-chip RAM.
    Ram(MemId),
    /// The controller of an AXI bundle.
    Axi(u32),
}

/// Timing of one scheduled operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpTiming {
    pub resource: Resource,
    /// Combinational delay in the issue step.
    pub delay_ps: u32,
    /// Steps until the result is available (0 for combinational units).
    pub latency: u32,
    /// Steps an instance stays busy after issue.
    pub ii: u32,
    /// Offset within step `issue + latency` at which a multi-cycle result appears.
    pub out_ps: u32,
}

/// User overrides of FU instance counts.
///
/// Keys name an opcode class (`mul`), a class at a width (`mul32`), or a
/// full kind (`mul32p1`); the most specific key wins. `ram_ports` caps the
/// ports used per on-chip memory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Constraints {
    pub entries: BTreeMap<String, u32>,
}

impl Constraints {
    pub fn with(mut self, key: &str, n: u32) -> Constraints {
        self.entries.insert(key.to_string(), n);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FuAlloc {
    pub count: u32,
    pub dsp: bool,
    pub record: Record,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    pub clock_ps: u32,
    pub margin_ps: u32,
    pub fus: BTreeMap<Instance, FuAlloc>,
    pub ram_ports: BTreeMap<MemId, u32>,
    pub bundles: BTreeSet<u32>,
    /// Indexed by op; `None` for phis.
    pub timing: Vec<Option<OpTiming>>,
}

impl Allocation {
    /// Usable part of the clock period.
    pub fn budget_ps(&self) -> u32 {
        self.clock_ps.saturating_sub(self.margin_ps)
    }

    pub fn timing(&self, o: OpId) -> Option<&OpTiming> {
        self.timing[o.0 as usize].as_ref()
    }

    /// Instances available for a resource; unbounded resources report `u32::MAX`.
    pub fn capacity(&self, r: Resource) -> u32 {
        match r {
            Resource::Free => u32::MAX,
            Resource::Fu(k) => self.fus.get(&k).map_or(0, |a| a.count),
            Resource::Ram(m) => self.ram_ports.get(&m).copied().unwrap_or(0),
            Resource::Axi(_) => 1,
        }
    }
}

/// Display name of a kind: class, width and, when pipelined, stage count.
pub fn kind_name(k: Instance) -> String {
    if k.stages == 0 {
        format!("{}{}", k.opcode, k.width)
    } else {
        format!("{}{}p{}", k.opcode, k.width, k.stages)
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Free => write!(f, "wire"),
            Resource::Fu(k) => write!(f, "{}", kind_name(*k)),
            Resource::Ram(m) => write!(f, "ram{}", m.0),
            Resource::Axi(b) => write!(f, "axi{b}"),
        }
    }
}

/// True for operations implemented as wiring.
pub fn is_free(g: &Cdfg, o: OpId) -> bool {
    let op = g.op(o);
    match op.opcode {
        Opcode::Ext { .. } | Opcode::Trunc => true,
        Opcode::Shl | Opcode::Shr { .. } => g.const_value(op.args[1]).is_some(),
        _ => false,
    }
}

/// Width used to select a component: operand width for comparisons and
/// stores, result width otherwise.
pub fn op_width(g: &Cdfg, o: OpId) -> u8 {
    let op = g.op(o);
    match op.opcode {
        Opcode::Eq | Opcode::Ne | Opcode::Lt { .. } | Opcode::Le { .. } => g.width(op.args[0]),
        Opcode::Store { .. } => g.width(op.args[1]),
        _ => g.width(g.result(o)),
    }
}

const CLASSES: [&str; 13] = [
    "add",
    "sub",
    "mul",
    "div",
    "mod",
    "shl",
    "shr",
    "bitop",
    "cmp",
    "mux",
    "load_port",
    "store_port",
    "ext",
];

fn key_matches(key: &str, k: Instance) -> Option<u8> {
    let class = k.opcode.name();
    if key == class {
        Some(0)
    } else if key == format!("{class}{}", k.width) {
        Some(1)
    } else if key == kind_name(k) {
        Some(2)
    } else {
        None
    }
}

fn key_is_known(key: &str) -> bool {
    if key == "ram_ports" {
        return true;
    }
    CLASSES.iter().any(|c| {
        key.strip_prefix(c).is_some_and(|rest| {
            let (w, p) = rest.split_once('p').unwrap_or((rest, "0"));
            rest.is_empty() || (w.parse::<u8>().is_ok() && p.parse::<u8>().is_ok())
        })
    })
}

/// Looks up every operation in the library and sizes the datapath: one
/// instance per used kind unless a constraint says otherwise.
pub fn allocate(g: &Cdfg, constraints: &Constraints, lib: &ComponentLibrary, params: LookupParams) -> Result<Allocation, HlsError> {
    for key in constraints.entries.keys() {
        if !key_is_known(key) {
            return Err(HlsError::Allocation(format!("unknown resource kind {key}")));
        }
    }
    let mut fus: BTreeMap<Instance, FuAlloc> = BTreeMap::new();
    let mut ram_ports = BTreeMap::new();
    let mut bundles = BTreeSet::new();
    let mut timing = Vec::with_capacity(g.ops.len());
    let ports = constraints
        .entries
        .get("ram_ports")
        .copied()
        .unwrap_or(2)
        .min(lib.target.ram_ports_per_block as u32);
    for (i, op) in g.ops.iter().enumerate() {
        let o = OpId(i as u32);
        let Some(class) = op.opcode.class() else {
            timing.push(None);
            continue;
        };
        if is_free(g, o) {
            timing.push(Some(OpTiming {
                resource: Resource::Free,
                delay_ps: 0,
                latency: 0,
                ii: 1,
                out_ps: 0,
            }));
            continue;
        }
        let w = op_width(g, o);
        let rec = lookup(lib, class, w, params)?;
        let resource = match op.opcode.mem() {
            Some(m) => match g.mem(m).backing {
                Backing::OnChip => {
                    if ports == 0 {
                        return Err(HlsError::Allocation(format!("allocation below 1 for memory {}", g.mem(m).name)));
                    }
                    ram_ports.insert(m, ports);
                    Resource::Ram(m)
                }
                Backing::Axi(b) => {
                    bundles.insert(b);
                    Resource::Axi(b)
                }
            },
            None => {
                let dsp = class == OpClass::Mul && rec.inst.width <= lib.target.dsp_native_width;
                fus.entry(rec.inst).or_insert(FuAlloc {
                    count: 1,
                    dsp,
                    record: rec,
                });
                Resource::Fu(rec.inst)
            }
        };
        let out_ps = match class {
            OpClass::Div | OpClass::Mod | OpClass::LoadPort => 0,
            _ => rec.delay_ps,
        };
        timing.push(Some(OpTiming {
            resource,
            delay_ps: rec.delay_ps,
            latency: rec.latency,
            ii: rec.ii.max(1),
            out_ps,
        }));
    }
    for (k, a) in fus.iter_mut() {
        let mut best: Option<(u8, u32)> = None;
        for (key, &n) in &constraints.entries {
            if let Some(spec) = key_matches(key, *k) {
                if best.is_none_or(|(s, _)| spec > s) {
                    best = Some((spec, n));
                }
            }
        }
        if let Some((_, n)) = best {
            if n < 1 {
                return Err(HlsError::Allocation(format!("allocation below 1 for used kind {}", kind_name(*k))));
            }
            a.count = n;
        }
    }
    Ok(Allocation {
        clock_ps: params.clock_ps,
        margin_ps: params.margin_ps,
        fus,
        ram_ports,
        bundles,
        timing,
    })
}

/// Human-readable summary: one line per kind.
pub fn allocation_summary(a: &Allocation) -> String {
    let mut s = String::new();
    for (k, f) in &a.fus {
        s.push_str(&format!(
            "{}: {} (delay {} ns, latency {}{})\n",
            kind_name(*k),
            f.count,
            ps_to_ns_text(f.record.delay_ps),
            f.record.latency,
            if f.dsp { ", dsp" } else { "" }
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check, SourceUnit};
    use crate::middle::{lower_to_cdfg, optimize, ValueDef};

    fn graph(src: &str) -> Cdfg {
        optimize(&lower_to_cdfg(&check(&SourceUnit::new("t.c", src), "f").unwrap()).unwrap(), 1)
    }

    const MULS: &str = "int f(int a, int b, int c, int d) { return (a*b) ^ (c*d) ^ (a*c) ^ (b*d); }";

    #[test]
    fn constraint_raises_count() {
        let lib = ComponentLibrary::default_library();
        let a = allocate(&graph(MULS), &Constraints::default().with("mul", 2), &lib, LookupParams::at(10_000)).unwrap();
        let mul: Vec<_> = a.fus.iter().filter(|(k, _)| k.opcode == OpClass::Mul).collect();
        assert_eq!(mul.len(), 1);
        assert_eq!((kind_name(*mul[0].0), mul[0].1.count, mul[0].1.dsp), ("mul32".to_string(), 2, true));
    }

    #[test]
    fn default_one_per_kind() {
        let lib = ComponentLibrary::default_library();
        let a = allocate(
            &graph("int f(int a, int b, int c) { return a + b + c; }"),
            &Constraints::default(),
            &lib,
            LookupParams::at(10_000),
        )
        .unwrap();
        let names: Vec<_> = a.fus.iter().map(|(k, f)| (kind_name(*k), f.count)).collect();
        assert_eq!(names, vec![("add32".to_string(), 1)]);
    }

    #[test]
    fn zero_allocation_rejected() {
        let lib = ComponentLibrary::default_library();
        let e = allocate(&graph(MULS), &Constraints::default().with("mul", 0), &lib, LookupParams::at(10_000)).unwrap_err();
        assert_eq!(e.to_string(), "allocation below 1 for used kind mul32");
        let e = allocate(
            &graph(MULS),
            &Constraints::default().with("frob", 1),
            &lib,
            LookupParams::at(10_000),
        )
        .unwrap_err();
        assert_eq!(e.to_string(), "unknown resource kind frob");
    }

    #[test]
    fn unschedulable_clock() {
        let lib = ComponentLibrary::default_library();
        let e = allocate(&graph(MULS), &Constraints::default(), &lib, LookupParams::at(100)).unwrap_err();
        assert!(e.to_string().starts_with("unschedulable operation at clock period 0.100 ns"), "{e}");
    }

    #[test]
    fn constant_shifts_are_wiring() {
        let g = graph("int f(int a) { return (a << 3) + (a >> 2); }");
        let lib = ComponentLibrary::default_library();
        let a = allocate(&g, &Constraints::default(), &lib, LookupParams::at(10_000)).unwrap();
        assert!(a.fus.keys().all(|k| k.opcode == OpClass::Add));
        assert!(g.values.iter().any(|v| matches!(v.def, ValueDef::Op(_))));
    }
}
