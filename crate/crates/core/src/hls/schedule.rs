// SPDX-License-Identifier: Apache-2.0

//! Per-block resource-constrained list scheduling with operator chaining.

use std::collections::HashMap;

use crate::middle::{BlockId, Cdfg, OpId, Opcode, ValueDef};

use super::allocate::{Allocation, OpTiming, Resource};
use super::HlsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Placement {
    /// Control step within the block.
    pub step: u32,
    /// Start offset within the step.
    pub start_ps: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub clock_ps: u32,
    /// Indexed by op; `None` for phis.
    pub ops: Vec<Option<Placement>>,
    /// Compute steps per block; 0 for blocks without operations.
    pub steps: Vec<u32>,
}

impl Schedule {
    pub fn placement(&self, o: OpId) -> Option<Placement> {
        self.ops[o.0 as usize]
    }

    /// FSM states spent in a block: blocks without operations still pass
    /// through one state.
    pub fn states(&self, b: BlockId) -> u32 {
        self.steps[b.0 as usize].max(1)
    }

    pub fn total_steps(&self) -> u32 {
        self.steps.iter().sum()
    }

    /// Ops of a block sorted by (step, start, id).
    pub fn block_ops(&self, g: &Cdfg, b: BlockId) -> Vec<OpId> {
        let mut v: Vec<OpId> = g.block(b).ops.iter().copied().filter(|&o| self.placement(o).is_some()).collect();
        v.sort_by_key(|&o| (self.placement(o).unwrap(), o));
        v
    }

    /// Text dump: one line per op with step and offset.
    pub fn dump(&self, g: &Cdfg) -> String {
        let mut s = String::new();
        for b in g.block_ids() {
            s.push_str(&format!("{b}: {} steps\n", self.steps[b.0 as usize]));
            for o in self.block_ops(g, b) {
                let p = self.placement(o).unwrap();
                s.push_str(&format!("  s{} @{}ps  {}\n", p.step, p.start_ps, g.op_string(o)));
            }
        }
        s
    }
}

/// Step and offset at which the result of `o` placed at `p` becomes usable.
pub fn availability(t: &OpTiming, p: Placement) -> (u32, u32) {
    if t.latency == 0 {
        (p.step, p.start_ps + t.delay_ps)
    } else {
        (p.step + t.latency, t.out_ps)
    }
}

/// Data and memory-order predecessors of every non-phi op of a block. The
/// flag marks ordering edges, which require a strictly later step.
pub fn block_deps(g: &Cdfg, a: &Allocation, b: BlockId) -> Vec<(OpId, Vec<(OpId, bool)>)> {
    let ops: Vec<OpId> = g.block(b).ops.iter().copied().filter(|&o| a.timing(o).is_some()).collect();
    let mut out = Vec::with_capacity(ops.len());
    let mut last_store: HashMap<Resource, OpId> = HashMap::new();
    let mut loads_since: HashMap<Resource, Vec<OpId>> = HashMap::new();
    for &o in &ops {
        let op = g.op(o);
        let mut deps = Vec::new();
        for &v in &op.args {
            if let ValueDef::Op(d) = g.value(v).def {
                if g.op(d).block == b && a.timing(d).is_some() && !deps.contains(&(d, false)) {
                    deps.push((d, false));
                }
            }
        }
        let r = a.timing(o).unwrap().resource;
        if matches!(r, Resource::Ram(_) | Resource::Axi(_)) {
            if let Some(&s) = last_store.get(&r) {
                deps.push((s, true));
            }
            if matches!(op.opcode, Opcode::Store { .. }) {
                for l in loads_since.remove(&r).unwrap_or_default() {
                    deps.push((l, true));
                }
                last_store.insert(r, o);
            } else {
                loads_since.entry(r).or_default().push(o);
            }
        }
        out.push((o, deps));
    }
    out
}

/// Unconstrained ASAP placement with chaining, in (step, offset) order.
fn asap(deps: &[(OpId, Vec<(OpId, bool)>)], a: &Allocation) -> HashMap<OpId, Placement> {
    let budget = a.budget_ps();
    let mut pl: HashMap<OpId, Placement> = HashMap::new();
    for (o, ds) in deps {
        let t = a.timing(*o).unwrap();
        let (mut step, mut start) = (0u32, 0u32);
        for &(d, order) in ds {
            let dp = pl[&d];
            let (s, off) = if order {
                (dp.step + 1, 0)
            } else {
                availability(a.timing(d).unwrap(), dp)
            };
            if (s, off) > (step, start) {
                (step, start) = (s, off);
            }
        }
        if start + t.delay_ps > budget {
            step += 1;
            start = 0;
        }
        pl.insert(*o, Placement { step, start_ps: start });
    }
    pl
}

/// Mobility (ALAP − ASAP) per op, in steps.
fn mobility(deps: &[(OpId, Vec<(OpId, bool)>)], a: &Allocation) -> HashMap<OpId, i64> {
    let early = asap(deps, a);
    let lat = |o: OpId| a.timing(o).unwrap().latency as i64;
    let horizon = deps.iter().map(|(o, _)| early[o].step as i64 + lat(*o)).max().unwrap_or(0);
    let mut late: HashMap<OpId, i64> = deps.iter().map(|(o, _)| (*o, horizon - lat(*o))).collect();
    for (o, ds) in deps.iter().rev() {
        let lo = late[o];
        for &(d, order) in ds {
            let gap = if order { lat(d).max(1) } else { lat(d) };
            let e = late.get_mut(&d).unwrap();
            *e = (*e).min(lo - gap);
        }
    }
    deps.iter().map(|(o, _)| (*o, late[o] - early[o].step as i64)).collect()
}

/// Schedules every block independently.
pub fn schedule_list(g: &Cdfg, a: &Allocation) -> Result<Schedule, HlsError> {
    let mut s = Schedule {
        clock_ps: a.clock_ps,
        ops: vec![None; g.ops.len()],
        steps: vec![0; g.blocks.len()],
    };
    for b in g.block_ids() {
        schedule_block(g, a, b, &mut s)?;
    }
    Ok(s)
}

fn schedule_block(g: &Cdfg, a: &Allocation, b: BlockId, s: &mut Schedule) -> Result<(), HlsError> {
    let budget = a.budget_ps();
    let deps = block_deps(g, a, b);
    if deps.is_empty() {
        return Ok(());
    }
    let mob = mobility(&deps, a);
    let mut order: Vec<usize> = (0..deps.len()).collect();
    order.sort_by_key(|&i| (mob[&deps[i].0], deps[i].0));
    let mut placed: HashMap<OpId, Placement> = HashMap::new();
    // issue step and busy steps of ops, per resource
    let mut busy: HashMap<Resource, Vec<(u32, u32)>> = HashMap::new();
    let mut remaining = deps.len();
    let mut done = vec![false; deps.len()];
    let mut step = 0u32;
    let mut idle = 0u32;
    let max_lat = deps
        .iter()
        .map(|(o, _)| a.timing(*o).unwrap().latency.max(a.timing(*o).unwrap().ii))
        .max()
        .unwrap_or(0);
    while remaining > 0 {
        let mut progress = true;
        let mut any = false;
        while progress {
            progress = false;
            for &i in &order {
                if done[i] {
                    continue;
                }
                let (o, ref ds) = deps[i];
                let t = a.timing(o).unwrap();
                let mut start = 0u32;
                let mut ready = true;
                for &(d, ord) in ds {
                    let Some(&dp) = placed.get(&d) else {
                        ready = false;
                        break;
                    };
                    if ord {
                        if dp.step >= step {
                            ready = false;
                            break;
                        }
                        continue;
                    }
                    let (av, off) = availability(a.timing(d).unwrap(), dp);
                    if av > step {
                        ready = false;
                        break;
                    }
                    if av == step {
                        start = start.max(off);
                    }
                }
                if !ready {
                    continue;
                }
                if t.delay_ps > budget {
                    return Err(HlsError::Schedule(format!(
                        "operation {} cannot meet the clock period",
                        g.op_string(o)
                    )));
                }
                if start + t.delay_ps > budget {
                    continue;
                }
                let cap = a.capacity(t.resource);
                if cap != u32::MAX {
                    let active = busy
                        .get(&t.resource)
                        .map_or(0, |v| v.iter().filter(|&&(is, ii)| is <= step && step < is + ii).count());
                    if active as u32 >= cap {
                        continue;
                    }
                    let ii = if matches!(t.resource, Resource::Fu(_)) { t.ii } else { 1 };
                    busy.entry(t.resource).or_default().push((step, ii));
                }
                placed.insert(o, Placement { step, start_ps: start });
                done[i] = true;
                remaining -= 1;
                progress = true;
                any = true;
                break;
            }
        }
        idle = if any { 0 } else { idle + 1 };
        if idle > max_lat + 2 {
            return Err(HlsError::Schedule(format!("no progress scheduling block {b}")));
        }
        step += 1;
    }
    let mut n = 0;
    for (o, _) in &deps {
        let p = placed[o];
        let (av, _) = availability(a.timing(*o).unwrap(), p);
        n = n.max(av + 1);
        s.ops[o.0 as usize] = Some(p);
    }
    s.steps[b.0 as usize] = n;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charlib::{ComponentLibrary, LookupParams};
    use crate::frontend::{check, SourceUnit};
    use crate::hls::{allocate, Constraints};
    use crate::middle::{lower_to_cdfg, optimize};

    fn sched(src: &str, clock: u32, c: Constraints) -> (Cdfg, Schedule) {
        let g = optimize(&lower_to_cdfg(&check(&SourceUnit::new("t.c", src), "f").unwrap()).unwrap(), 1);
        let lib = ComponentLibrary::default_library();
        let a = allocate(&g, &c, &lib, LookupParams::at(clock)).unwrap();
        let s = schedule_list(&g, &a).unwrap();
        (g, s)
    }

    const CHAIN: &str = "int f(int a, int b, int c, int d) { return a + b + c + d; }";

    #[test]
    fn chained_adds_in_one_step() {
        let (g, s) = sched(CHAIN, 10_000, Constraints::default().with("add", 3));
        assert_eq!(s.steps[0], 1);
        let offs: Vec<u32> = s
            .block_ops(&g, BlockId(0))
            .iter()
            .map(|&o| s.placement(o).unwrap().start_ps)
            .collect();
        assert_eq!(offs, vec![0, 2100, 4200]);
    }

    #[test]
    fn chaining_forbidden_at_short_clock() {
        let (_, s) = sched(CHAIN, 2500, Constraints::default().with("add", 3));
        assert_eq!(s.steps[0], 3);
    }

    #[test]
    fn one_adder_serializes_chain() {
        let (_, s) = sched(CHAIN, 10_000, Constraints::default());
        assert_eq!(s.steps[0], 3);
    }

    #[test]
    fn independent_muls_two_units() {
        let src = "void f(int* o, int a, int b, int c, int d) { o[0] = a*b; o[1] = c*d; o[2] = a*c; o[3] = b*d; }";
        let (g, s) = sched(src, 10_000, Constraints::default().with("mul", 2));
        let mut steps: Vec<u32> = g
            .ops
            .iter()
            .enumerate()
            .filter(|(_, op)| op.opcode == Opcode::Mul)
            .map(|(i, _)| s.ops[i].unwrap().step)
            .collect();
        steps.sort();
        steps.dedup();
        assert_eq!(steps.len(), 2);
    }

    #[test]
    fn empty_block_has_no_steps() {
        let (g, s) = sched("int f() { return 7; }", 10_000, Constraints::default());
        assert_eq!(g.blocks.len(), 1);
        assert_eq!((s.steps[0], s.states(BlockId(0))), (0, 1));
    }
}
