// SPDX-License-Identifier: Apache-2.0

//! Functional-unit, memory-port and register binding.

use std::collections::{BTreeMap, BTreeSet};

use crate::charlib::Instance;
use crate::middle::{BlockId, Cdfg, OpId, Opcode, Terminator, ValueDef, ValueId};

use super::allocate::{Allocation, Resource};
use super::schedule::{availability, Schedule};
use super::HlsError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Binding {
    /// FU instance per op, indexing `fus`.
    pub fu_of: Vec<Option<usize>>,
    /// Kind of every FU instance that executes at least one op.
    pub fus: Vec<Instance>,
    /// RAM port per on-chip access.
    pub port_of: Vec<Option<u8>>,
    /// Register per value that lives across a step boundary.
    pub reg_of: Vec<Option<usize>>,
    /// Register widths.
    pub regs: Vec<u8>,
    /// Occupancy interval per registered value, on a timeline with two points
    /// per step: `2t` is the step itself, `2t+1` the clock edge ending it.
    pub lifetimes: Vec<(ValueId, u64, u64)>,
}

/// Left-edge interval colouring: intervals sorted by left end are placed in
/// the first register whose previous interval has ended. Returns a register
/// per interval.
pub fn left_edge(intervals: &[(u64, u64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..intervals.len()).collect();
    idx.sort_by_key(|&i| (intervals[i].0, intervals[i].1, i));
    let mut ends: Vec<u64> = Vec::new();
    let mut out = vec![0; intervals.len()];
    for i in idx {
        let (lo, hi) = intervals[i];
        match ends.iter().position(|&e| e < lo) {
            Some(r) => {
                ends[r] = hi;
                out[i] = r;
            }
            None => {
                ends.push(hi);
                out[i] = ends.len() - 1;
            }
        }
    }
    out
}

/// First global step of every block, with blocks laid out in id order.
pub fn block_bases(g: &Cdfg, s: &Schedule) -> Vec<u32> {
    let mut base = Vec::with_capacity(g.blocks.len());
    let mut acc = 0;
    for b in g.block_ids() {
        base.push(acc);
        acc += s.states(b);
    }
    base
}

/// Where each use of a value happens: (block, step within block).
fn uses(g: &Cdfg, s: &Schedule) -> Vec<Vec<(BlockId, u32)>> {
    let mut u = vec![Vec::new(); g.values.len()];
    for b in g.block_ids() {
        let last = s.states(b) - 1;
        for &o in &g.block(b).ops {
            let op = g.op(o);
            if op.opcode == Opcode::Phi {
                continue;
            }
            let step = s.placement(o).map_or(0, |p| p.step);
            for &v in &op.args {
                u[v.0 as usize].push((b, step));
            }
        }
        if let Some(v) = g.block(b).term.uses() {
            u[v.0 as usize].push((b, last));
        }
        for succ in g.block(b).term.successors() {
            let k = g.block(succ).preds.iter().position(|&p| p == b).expect("pred list");
            for &o in &g.block(succ).ops {
                let op = g.op(o);
                if op.opcode != Opcode::Phi {
                    break;
                }
                u[op.args[k].0 as usize].push((b, last));
            }
        }
    }
    for l in &mut u {
        l.sort();
        l.dedup();
    }
    u
}

/// Block and step at which a value is first usable without a register, if it
/// is produced by a scheduled op.
pub fn value_home(g: &Cdfg, a: &Allocation, s: &Schedule, v: ValueId) -> Option<(BlockId, u32)> {
    let ValueDef::Op(o) = g.value(v).def else { return None };
    let t = a.timing(o)?;
    let (step, _) = availability(t, s.placement(o)?);
    Some((g.op(o).block, step))
}

/// Values that must be held in a register.
pub fn registered_values(g: &Cdfg, a: &Allocation, s: &Schedule) -> Vec<bool> {
    let us = uses(g, s);
    let mut r = vec![false; g.values.len()];
    for (i, v) in g.values.iter().enumerate() {
        let ValueDef::Op(o) = v.def else { continue };
        if us[i].is_empty() {
            continue;
        }
        if g.op(o).opcode == Opcode::Phi {
            r[i] = true;
            continue;
        }
        let home = value_home(g, a, s, ValueId(i as u32));
        r[i] = us[i].iter().any(|&u| Some(u) != home);
    }
    r
}

fn lifetimes(g: &Cdfg, a: &Allocation, s: &Schedule, reg: &[bool]) -> Vec<(ValueId, u64, u64)> {
    let nb = g.blocks.len();
    let base = block_bases(g, s);
    let last = |b: BlockId| (base[b.0 as usize] + s.states(b) - 1) as u64;
    let us = uses(g, s);
    // block-level liveness over registered values
    let mut defs: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); nb];
    let mut gen: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); nb];
    for (i, v) in g.values.iter().enumerate() {
        if !reg[i] {
            continue;
        }
        let ValueDef::Op(o) = v.def else { continue };
        let db = g.op(o).block;
        defs[db.0 as usize].insert(i as u32);
        for &(ub, _) in &us[i] {
            if ub != db {
                gen[ub.0 as usize].insert(i as u32);
            }
        }
    }
    // values used as phi args at the end of a block whose def is elsewhere
    // were recorded as uses in that block; a phi in the same block as its use
    // (loop back-edge) is also a def there and therefore not upward exposed.
    for b in 0..nb {
        let d = defs[b].clone();
        gen[b].retain(|v| !d.contains(v));
    }
    let succs = g.successors();
    let mut live_in: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); nb];
    let mut live_out: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); nb];
    let mut changed = true;
    while changed {
        changed = false;
        for b in (0..nb).rev() {
            let mut out = BTreeSet::new();
            for sb in &succs[b] {
                for &v in &live_in[sb.0 as usize] {
                    out.insert(v);
                }
            }
            let mut inn: BTreeSet<u32> = out.difference(&defs[b]).copied().collect();
            inn.extend(gen[b].iter().copied());
            if out != live_out[b] || inn != live_in[b] {
                live_out[b] = out;
                live_in[b] = inn;
                changed = true;
            }
        }
    }
    let mut points: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for (i, v) in g.values.iter().enumerate() {
        if !reg[i] {
            continue;
        }
        let ValueDef::Op(o) = v.def else { continue };
        let op = g.op(o);
        let p = points.entry(i as u32).or_default();
        if op.opcode == Opcode::Phi {
            for &pred in &g.block(op.block).preds {
                p.push(2 * last(pred) + 1);
            }
            p.push(2 * base[op.block.0 as usize] as u64);
        } else {
            let (step, _) = availability(a.timing(o).unwrap(), s.placement(o).unwrap());
            p.push(2 * (base[op.block.0 as usize] + step) as u64 + 1);
        }
        for &(ub, st) in &us[i] {
            p.push(2 * (base[ub.0 as usize] + st) as u64);
        }
    }
    for b in 0..nb {
        for &v in &live_in[b] {
            points.get_mut(&v).unwrap().push(2 * base[b] as u64);
        }
        for &v in &live_out[b] {
            points.get_mut(&v).unwrap().push(2 * last(BlockId(b as u32)) + 1);
        }
    }
    points
        .into_iter()
        .map(|(v, p)| (ValueId(v), *p.iter().min().unwrap(), *p.iter().max().unwrap()))
        .collect()
}

pub fn bind(g: &Cdfg, s: &Schedule, a: &Allocation) -> Result<Binding, HlsError> {
    let mut fu_of = vec![None; g.ops.len()];
    let mut port_of = vec![None; g.ops.len()];
    // per kind: instances used so far (global numbering assigned afterwards)
    let mut used: BTreeMap<Instance, usize> = BTreeMap::new();
    let mut local: Vec<Option<(Instance, usize)>> = vec![None; g.ops.len()];
    for b in g.block_ids() {
        let mut busy: BTreeMap<Instance, Vec<u32>> = BTreeMap::new();
        let mut ports: BTreeMap<(u32, u32), u8> = BTreeMap::new();
        for o in s.block_ops(g, b) {
            let t = a.timing(o).unwrap();
            let p = s.placement(o).unwrap();
            match t.resource {
                Resource::Fu(k) => {
                    let cap = a.capacity(t.resource) as usize;
                    let inst = busy.entry(k).or_insert_with(|| vec![0; cap]);
                    let i = inst
                        .iter()
                        .position(|&free_at| free_at <= p.step)
                        .ok_or_else(|| HlsError::Bind(format!("no free {} instance for {}", super::kind_name(k), g.op_string(o))))?;
                    inst[i] = p.step + t.ii;
                    local[o.0 as usize] = Some((k, i));
                    let u = used.entry(k).or_insert(0);
                    *u = (*u).max(i + 1);
                }
                Resource::Ram(m) => {
                    let n = ports.entry((m.0, p.step)).or_insert(0);
                    if *n >= 2 {
                        return Err(HlsError::Bind(format!("more than two accesses to {} in one step", g.mem(m).name)));
                    }
                    port_of[o.0 as usize] = Some(*n);
                    *n += 1;
                }
                _ => {}
            }
        }
    }
    let mut fus = Vec::new();
    let mut first: BTreeMap<Instance, usize> = BTreeMap::new();
    for (&k, &n) in &used {
        first.insert(k, fus.len());
        fus.extend(std::iter::repeat_n(k, n));
    }
    for (i, l) in local.iter().enumerate() {
        if let Some((k, idx)) = l {
            fu_of[i] = Some(first[k] + idx);
        }
    }
    let reg = registered_values(g, a, s);
    let lt = lifetimes(g, a, s, &reg);
    let mut reg_of = vec![None; g.values.len()];
    let mut regs = Vec::new();
    let mut by_width: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, &(v, _, _)) in lt.iter().enumerate() {
        by_width.entry(g.width(v)).or_default().push(i);
    }
    for (w, idx) in by_width {
        let iv: Vec<(u64, u64)> = idx.iter().map(|&i| (lt[i].1, lt[i].2)).collect();
        let colour = left_edge(&iv);
        let n = colour.iter().max().map_or(0, |m| m + 1);
        let first = regs.len();
        regs.extend(std::iter::repeat_n(w, n));
        for (k, &i) in idx.iter().enumerate() {
            reg_of[lt[i].0 .0 as usize] = Some(first + colour[k]);
        }
    }
    Ok(Binding {
        fu_of,
        fus,
        port_of,
        reg_of,
        regs,
        lifetimes: lt,
    })
}

/// Largest number of intervals covering a single point.
pub fn max_overlap(intervals: &[(u64, u64)]) -> usize {
    let mut ev: Vec<(u64, i32)> = Vec::new();
    for &(lo, hi) in intervals {
        ev.push((lo, 1));
        ev.push((hi + 1, -1));
    }
    ev.sort_by_key(|&(p, d)| (p, d));
    let (mut cur, mut best) = (0i32, 0i32);
    for (_, d) in ev {
        cur += d;
        best = best.max(cur);
    }
    best as usize
}

/// Terminator helper used by FSMD construction.
pub fn phi_args_on_edge(g: &Cdfg, from: BlockId, to: BlockId) -> Vec<(OpId, ValueId)> {
    let k = g.block(to).preds.iter().position(|&p| p == from).expect("edge");
    g.block(to)
        .ops
        .iter()
        .copied()
        .take_while(|&o| g.op(o).opcode == Opcode::Phi)
        .map(|o| (o, g.op(o).args[k]))
        .collect()
}

/// True when the block ends in a return.
pub fn is_exit(g: &Cdfg, b: BlockId) -> bool {
    matches!(g.block(b).term, Terminator::Return(_))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_lifetimes_share() {
        assert_eq!(left_edge(&[(1, 4), (5, 9)]), vec![0, 0]);
        assert_eq!(left_edge(&[(1, 4), (4, 9)]), vec![0, 1]);
    }

    #[test]
    fn overlapping_need_three() {
        let iv = [(0, 10), (2, 5), (3, 12), (11, 20)];
        let c = left_edge(&iv);
        assert_eq!(c.iter().max().unwrap() + 1, 3);
        assert_eq!(max_overlap(&iv), 3);
    }
}
