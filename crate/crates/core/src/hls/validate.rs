// SPDX-License-Identifier: Apache-2.0

//! Independent schedule checker.
//!
//! Re-derives every constraint from the graph and the allocation rather than
//! reusing scheduler state, so a scheduler bug cannot hide itself.

use std::collections::BTreeMap;

use crate::middle::{Cdfg, OpId, Opcode, ValueDef};

use super::allocate::{Allocation, Resource};
use super::schedule::Schedule;

/// Returns one message per violated constraint; empty when legal.
pub fn validate_schedule(g: &Cdfg, a: &Allocation, s: &Schedule) -> Vec<String> {
    let mut errs = Vec::new();
    let budget = a.budget_ps();
    for b in g.block_ids() {
        let n = s.steps[b.0 as usize];
        // (resource, step) -> ops active
        let mut usage: BTreeMap<(Resource, u32), Vec<OpId>> = BTreeMap::new();
        let mut mem_ops: Vec<(OpId, Resource, bool, u32)> = Vec::new();
        for &o in &g.block(b).ops {
            let op = g.op(o);
            if op.opcode == Opcode::Phi {
                continue;
            }
            let name = g.op_string(o);
            let (Some(t), Some(p)) = (a.timing(o), s.placement(o)) else {
                errs.push(format!("{b}: unscheduled op {name}"));
                continue;
            };
            let finish = p.start_ps + t.delay_ps;
            if finish > budget {
                errs.push(format!("{b}: chaining bound exceeded by {name}: ends at {finish} ps"));
            }
            let done_step = p.step + t.latency;
            if done_step >= n {
                errs.push(format!("{b}: {name} completes after the last step"));
            }
            for &v in &op.args {
                let ValueDef::Op(d) = g.value(v).def else { continue };
                if g.op(d).block != b || g.op(d).opcode == Opcode::Phi {
                    continue;
                }
                let (Some(dt), Some(dp)) = (a.timing(d), s.placement(d)) else {
                    continue;
                };
                if dt.latency == 0 {
                    if p.step < dp.step || (p.step == dp.step && p.start_ps < dp.start_ps + dt.delay_ps) {
                        errs.push(format!("{b}: {name} starts before its operand {} is computed", g.op_string(d)));
                    }
                } else {
                    let ready = dp.step + dt.latency;
                    if p.step < ready || (p.step == ready && p.start_ps < dt.out_ps) {
                        errs.push(format!("{b}: {name} uses {} before its latency elapses", g.op_string(d)));
                    }
                }
            }
            let busy = match t.resource {
                Resource::Free => 0,
                Resource::Fu(_) => t.ii,
                _ => 1,
            };
            for k in 0..busy {
                usage.entry((t.resource, p.step + k)).or_default().push(o);
            }
            if let Resource::Ram(_) | Resource::Axi(_) = t.resource {
                mem_ops.push((o, t.resource, matches!(op.opcode, Opcode::Store { .. }), p.step));
            }
        }
        for ((r, step), ops) in &usage {
            let cap = match r {
                Resource::Ram(_) => a.capacity(*r).min(2),
                _ => a.capacity(*r),
            };
            if ops.len() as u64 > cap as u64 {
                errs.push(format!("{b}: step {step} uses {} units of {r}, {cap} allocated", ops.len()));
            }
        }
        // program order among conflicting accesses of one memory
        for (i, &(o1, r1, st1, s1)) in mem_ops.iter().enumerate() {
            for &(o2, r2, st2, s2) in &mem_ops[i + 1..] {
                if r1 == r2 && (st1 || st2) && s2 <= s1 {
                    errs.push(format!(
                        "{b}: memory order violated between {} and {}",
                        g.op_string(o1),
                        g.op_string(o2)
                    ));
                }
            }
        }
    }
    errs
}
