// SPDX-License-Identifier: Apache-2.0

//! Oracles and generators shared by the property and acceptance tests.

#![allow(dead_code)]

use std::collections::HashMap;

use hls_core::axi::{AxiController, AxiSlave, DelayConfig, Issue, ProtocolMonitor, Sampling};
use hls_core::charlib::model::is_legal;
use hls_core::charlib::{ComponentLibrary, Instance, Record, Resources, TargetDescriptor};
use hls_core::frontend::{check, SourceUnit};
use hls_core::hls::schedule::{availability, block_deps};
use hls_core::hls::{Allocation, Resource};
use hls_core::middle::{lower_to_cdfg, optimize, BlockId, Cdfg, OpClass, OpId};
use hls_core::rtlsim::MemoryImage;
use proptest::prelude::*;

pub fn graph(src: &str) -> Cdfg {
    optimize(&lower_to_cdfg(&check(&SourceUnit::new("p.c", src), "f").unwrap()).unwrap(), 1)
}

/// Random straight-line kernel with up to 8 binary operations.
pub fn kernel() -> impl Strategy<Value = String> {
    prop::collection::vec((0usize..6, any::<prop::sample::Index>(), any::<prop::sample::Index>()), 1..=8).prop_map(|ops| {
        let mut names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let mut body = String::new();
        for (k, (op, x, y)) in ops.iter().enumerate() {
            let sym = ["+", "-", "*", "&", "^", "|"][*op];
            let (x, y) = (x.get(&names).clone(), y.get(&names).clone());
            body.push_str(&format!("int t{k} = {x} {sym} {y}; "));
            names.push(format!("t{k}"));
        }
        format!("int f(int a, int b, int c, int d) {{ {body}return t{}; }}", ops.len() - 1)
    })
}

/// Exhaustive minimum step count of one block under the allocation.
pub fn optimal_steps(g: &Cdfg, a: &Allocation, b: BlockId, bound: u32) -> u32 {
    let deps = block_deps(g, a, b);
    let budget = a.budget_ps();
    struct S<'a> {
        deps: &'a [(OpId, Vec<(OpId, bool)>)],
        a: &'a Allocation,
        budget: u32,
        placed: HashMap<OpId, (u32, u32)>,
        busy: HashMap<(Resource, u32), u32>,
        best: u32,
    }
    fn dfs(s: &mut S, i: usize, span: u32) {
        if span >= s.best {
            return;
        }
        if i == s.deps.len() {
            s.best = span;
            return;
        }
        let (o, ref ds) = s.deps[i];
        let t = *s.a.timing(o).unwrap();
        let cap = match t.resource {
            Resource::Ram(_) => s.a.capacity(t.resource).min(2),
            r => s.a.capacity(r),
        };
        let ii = if matches!(t.resource, Resource::Fu(_)) { t.ii } else { 1 };
        // earliest step allowed by predecessors
        let mut lo = 0;
        for &(d, ord) in ds {
            let (ds_, dp) = s.placed[&d];
            let td = s.a.timing(d).unwrap();
            let av = if ord {
                ds_ + 1
            } else {
                availability(td, hls_core::hls::Placement { step: ds_, start_ps: dp }).0
            };
            lo = lo.max(av);
        }
        for step in lo..s.best {
            let mut start = 0;
            let mut ok = true;
            for &(d, ord) in ds {
                let (ds_, dp) = s.placed[&d];
                if ord {
                    ok &= ds_ < step;
                    continue;
                }
                let td = s.a.timing(d).unwrap();
                let (av, off) = availability(td, hls_core::hls::Placement { step: ds_, start_ps: dp });
                if av > step {
                    ok = false;
                } else if av == step {
                    start = start.max(off);
                }
            }
            if !ok || start + t.delay_ps > s.budget {
                continue;
            }
            if cap != u32::MAX && (0..ii).any(|k| s.busy.get(&(t.resource, step + k)).copied().unwrap_or(0) >= cap) {
                continue;
            }
            if cap != u32::MAX {
                for k in 0..ii {
                    *s.busy.entry((t.resource, step + k)).or_default() += 1;
                }
            }
            s.placed.insert(o, (step, start));
            let end = if t.latency == 0 { step } else { step + t.latency };
            dfs(s, i + 1, span.max(end + 1));
            s.placed.remove(&o);
            if cap != u32::MAX {
                for k in 0..ii {
                    *s.busy.get_mut(&(t.resource, step + k)).unwrap() -= 1;
                }
            }
        }
    }
    let mut s = S {
        deps: &deps,
        a,
        budget,
        placed: HashMap::new(),
        busy: HashMap::new(),
        best: bound + 1,
    };
    dfs(&mut s, 0, 0);
    s.best
}

pub fn record() -> impl Strategy<Value = Record> {
    (
        0usize..OpClass::ALL.len(),
        1u8..=64,
        0u8..=8,
        1u32..100_000,
        0u32..100_000,
        0u32..70,
        1u32..70,
        (any::<u32>(), 0u32..16, 0u32..16),
        any::<bool>(),
    )
        .prop_map(|(op, width, stages, clock_ps, delay_ps, latency, ii, (lut, dsp, ram), feasible)| {
            let opcode = OpClass::ALL[op];
            let stages = if is_legal(Instance { opcode, width, stages }) { stages } else { 0 };
            Record {
                inst: Instance { opcode, width, stages },
                clock_ps,
                delay_ps,
                latency,
                ii,
                res: Resources { lut, dsp, ram },
                feasible,
            }
        })
}

pub fn library() -> impl Strategy<Value = ComponentLibrary> {
    (
        "[a-z<>&\"' _]{1,12}",
        any::<u64>(),
        1u8..=64,
        prop::collection::vec(record(), 0..24),
    )
        .prop_map(|(name, cap, dspw, recs)| {
            let mut lib = ComponentLibrary::new(TargetDescriptor {
                name,
                lut_capacity: cap,
                dsp_native_width: dspw,
                ram_ports_per_block: 2,
                host_clock_mhz: 600,
            });
            for r in recs {
                lib.records.insert((r.inst, r.clock_ps), r);
            }
            lib
        })
}

pub fn mask(bytes: u32) -> u64 {
    if bytes == 8 {
        u64::MAX
    } else {
        (1u64 << (8 * bytes)) - 1
    }
}

/// Runs one access through controller, slave and monitor.
pub fn hw_access(mem: &mut MemoryImage, bus: u32, d: DelayConfig, i: Issue) -> u64 {
    let mut c = AxiController::new(bus);
    let mut s = AxiSlave::new(bus, d);
    let mut mon = ProtocolMonitor::new();
    let mut pending = Some(i);
    for _ in 0..500 {
        let so = s.outputs(mem);
        let mo = c.outputs();
        mon.observe(
            &mo,
            &so,
            Sampling {
                r_captured: mo.rready && so.rvalid,
                b_captured: mo.bready && so.bvalid,
            },
        );
        c.clock(pending.take(), &so);
        s.clock(&mo, mem);
        if !c.busy() {
            let v = mon.finish();
            assert!(v.is_empty(), "{v:?}");
            return c.rdata;
        }
    }
    panic!("access did not finish");
}
