// SPDX-License-Identifier: Apache-2.0

//! Level-1 optimizations, iterated to a fixpoint: constant folding, algebraic
//! simplification, trivial phi removal, bitwidth narrowing from unsigned value
//! ranges, and dead-op elimination.

use std::collections::HashMap;

use super::cdfg::*;
use super::eval::apply;
use crate::semantics::mask;

/// Returns an optimized copy of `g`. Level 0 is the identity.
pub fn optimize(g: &Cdfg, level: u8) -> Cdfg {
    let mut g = g.clone();
    if level == 0 {
        return g;
    }
    g.reindex_consts();
    loop {
        let mut changed = simplify(&mut g);
        changed |= narrow(&mut g);
        changed |= dce(&mut g);
        if !changed {
            break;
        }
    }
    g.compact();
    g
}

enum Action {
    Replace(ValueId),
    Mutate(Opcode, Vec<ValueId>),
}

fn resolve(repl: &HashMap<ValueId, ValueId>, mut v: ValueId) -> ValueId {
    while let Some(&n) = repl.get(&v) {
        v = n;
    }
    v
}

fn is_pure(op: Opcode) -> bool {
    !matches!(op, Opcode::Load { .. } | Opcode::Store { .. } | Opcode::Phi)
}

fn simplify(g: &mut Cdfg) -> bool {
    let mut repl: HashMap<ValueId, ValueId> = HashMap::new();
    let mut changed = false;
    for b in g.reverse_postorder() {
        let ops = g.block(b).ops.clone();
        for o in ops {
            let args: Vec<ValueId> = g.op(o).args.iter().map(|&a| resolve(&repl, a)).collect();
            if args != g.op(o).args {
                g.op_mut(o).args = args.clone();
                changed = true;
            }
            let Some(r) = g.op(o).result else { continue };
            let opcode = g.op(o).opcode;
            let action = if opcode == Opcode::Phi {
                trivial_phi(r, &args)
            } else if is_pure(opcode) && args.iter().all(|&a| g.const_value(a).is_some()) {
                let vals: Vec<u64> = args.iter().map(|&a| g.const_value(a).unwrap()).collect();
                let ws: Vec<u8> = args.iter().map(|&a| g.width(a)).collect();
                let rw = g.width(r);
                Some(Action::Replace(g.konst(apply(opcode, &vals, &ws, rw), rw)))
            } else {
                rule(g, opcode, &args, g.width(r))
            };
            match action {
                Some(Action::Replace(v)) if v != r => {
                    repl.insert(r, v);
                    changed = true;
                }
                Some(Action::Mutate(opc, a)) => {
                    let op = g.op_mut(o);
                    if op.opcode != opc || op.args != a {
                        op.opcode = opc;
                        op.args = a;
                        changed = true;
                    }
                }
                _ => {}
            }
        }
    }
    if !repl.is_empty() {
        for op in &mut g.ops {
            for a in &mut op.args {
                *a = resolve(&repl, *a);
            }
        }
        for blk in &mut g.blocks {
            match &mut blk.term {
                Terminator::Branch { cond, .. } => *cond = resolve(&repl, *cond),
                Terminator::Return(Some(v)) => *v = resolve(&repl, *v),
                _ => {}
            }
        }
    }
    changed
}

fn trivial_phi(me: ValueId, args: &[ValueId]) -> Option<Action> {
    let mut same = None;
    for &a in args {
        if a == me || Some(a) == same {
            continue;
        }
        if same.is_some() {
            return None;
        }
        same = Some(a);
    }
    same.map(Action::Replace)
}

fn pow2(c: u64) -> Option<u32> {
    (c != 0 && c & (c - 1) == 0).then(|| c.trailing_zeros())
}

fn rule(g: &mut Cdfg, opcode: Opcode, a: &[ValueId], rw: u8) -> Option<Action> {
    use Action::*;
    let c = |i: usize| g.const_value(a[i]);
    let def = |v: ValueId| g.def_op(v).map(|o| (g.op(o).opcode, g.op(o).args.clone()));
    let ones = mask(rw);
    match opcode {
        op if op.is_commutative() && c(0).is_some() && c(1).is_none() => Some(Mutate(op, vec![a[1], a[0]])),
        Opcode::Add | Opcode::Or | Opcode::Xor if c(1) == Some(0) => Some(Replace(a[0])),
        Opcode::Sub | Opcode::Shl | Opcode::Shr { .. } if c(1) == Some(0) => Some(Replace(a[0])),
        Opcode::Sub | Opcode::Xor if a[0] == a[1] => Some(Replace(g.konst(0, rw))),
        Opcode::And | Opcode::Or if a[0] == a[1] => Some(Replace(a[0])),
        Opcode::Mul | Opcode::And if c(1) == Some(0) => Some(Replace(g.konst(0, rw))),
        Opcode::Mul | Opcode::Div { .. } if c(1) == Some(1) => Some(Replace(a[0])),
        Opcode::And if c(1) == Some(ones) => Some(Replace(a[0])),
        Opcode::Or if c(1) == Some(ones) => Some(Replace(a[1])),
        Opcode::Rem { .. } if c(1) == Some(1) => Some(Replace(g.konst(0, rw))),
        Opcode::Mul => {
            let k = pow2(c(1)?)?;
            let kv = g.konst(k as u64, rw);
            Some(Mutate(Opcode::Shl, vec![a[0], kv]))
        }
        Opcode::Div { signed: false } => {
            let k = pow2(c(1)?)?;
            let kv = g.konst(k as u64, rw);
            Some(Mutate(Opcode::Shr { arith: false }, vec![a[0], kv]))
        }
        Opcode::Rem { signed: false } => {
            let d = c(1)?;
            pow2(d)?;
            let m = g.konst(d - 1, rw);
            Some(Mutate(Opcode::And, vec![a[0], m]))
        }
        Opcode::Eq | Opcode::Le { .. } if a[0] == a[1] => Some(Replace(g.konst(1, 1))),
        Opcode::Ne | Opcode::Lt { .. } if a[0] == a[1] => Some(Replace(g.konst(0, 1))),
        Opcode::Ne if g.width(a[0]) == 1 && c(1) == Some(0) => Some(Replace(a[0])),
        Opcode::Mux => {
            if a[1] == a[2] {
                return Some(Replace(a[1]));
            }
            match c(0) {
                Some(k) => Some(Replace(if k & 1 != 0 { a[1] } else { a[2] })),
                None if rw == 1 && c(1) == Some(1) && c(2) == Some(0) => Some(Replace(a[0])),
                None => None,
            }
        }
        Opcode::Trunc => match def(a[0])? {
            (Opcode::Trunc, inner) => Some(Mutate(Opcode::Trunc, inner)),
            (Opcode::Ext { signed }, inner) => {
                let iw = g.width(inner[0]);
                Some(if rw == iw {
                    Replace(inner[0])
                } else if rw < iw {
                    Mutate(Opcode::Trunc, inner)
                } else {
                    Mutate(Opcode::Ext { signed }, inner)
                })
            }
            _ => None,
        },
        Opcode::Ext { signed } => match def(a[0])? {
            // the inner zero extension clears the sign bit, so either outer kind is a zero extension
            (Opcode::Ext { signed: inner_signed }, inner) if inner_signed == signed || !inner_signed => {
                Some(Mutate(Opcode::Ext { signed: inner_signed }, inner))
            }
            _ => None,
        },
        _ => None,
    }
}

/// Largest unsigned value each op result can take; phis and loads are unconstrained.
fn value_ranges(g: &Cdfg) -> Vec<u64> {
    let mut umax: Vec<u64> = g
        .values
        .iter()
        .map(|v| match v.def {
            ValueDef::Const(c) => c,
            _ => mask(v.width),
        })
        .collect();
    for b in g.reverse_postorder() {
        for &o in &g.block(b).ops {
            let op = g.op(o);
            let Some(r) = op.result else { continue };
            let rw = g.width(r);
            let m = mask(rw);
            let u = |i: usize| umax[op.args[i].0 as usize];
            let k = |i: usize| g.const_value(op.args[i]);
            let v = match op.opcode {
                Opcode::Ext { signed: false } => u(0),
                Opcode::Ext { signed: true } => {
                    let aw = g.width(op.args[0]);
                    if u(0) >> (aw - 1) == 0 {
                        u(0)
                    } else {
                        m
                    }
                }
                Opcode::Trunc => u(0).min(m),
                Opcode::And => u(0).min(u(1)),
                Opcode::Or | Opcode::Xor => smear(u(0).max(u(1))),
                Opcode::Add => sat(u(0) as u128 + u(1) as u128, m),
                Opcode::Mul => sat(u(0) as u128 * u(1) as u128, m),
                Opcode::Shr { arith: false } => match k(1) {
                    Some(s) if s < 64 => u(0) >> s,
                    _ => u(0),
                },
                Opcode::Shl => match k(1) {
                    Some(s) if s < 64 => sat((u(0) as u128) << s, m),
                    _ => m,
                },
                Opcode::Div { signed: false } | Opcode::Rem { signed: false } => u(0),
                Opcode::Eq | Opcode::Ne | Opcode::Lt { .. } | Opcode::Le { .. } => 1,
                Opcode::Mux => u(1).max(u(2)),
                _ => m,
            };
            umax[r.0 as usize] = v.min(m);
        }
    }
    umax
}

fn smear(x: u64) -> u64 {
    if x == 0 {
        0
    } else {
        u64::MAX >> x.leading_zeros()
    }
}

fn sat(x: u128, m: u64) -> u64 {
    if x > m as u128 {
        m
    } else {
        x as u64
    }
}

fn bits(x: u64) -> u8 {
    (64 - x.leading_zeros()).max(1) as u8
}

/// Rewrites wide arithmetic whose operands and result provably fit in fewer
/// bits as `zext(op_n(trunc a, trunc b))`, and unsigned compares likewise.
fn narrow(g: &mut Cdfg) -> bool {
    let umax = value_ranges(g);
    let mut changed = false;
    for b in g.reverse_postorder() {
        let ops = g.block(b).ops.clone();
        let mut new_list = Vec::with_capacity(ops.len());
        for o in ops {
            let op = g.op(o).clone();
            let (Some(r), true) = (op.result, op.args.len() == 2) else {
                new_list.push(o);
                continue;
            };
            let aw = g.width(op.args[0]);
            let ua = umax[op.args[0].0 as usize];
            let ub = umax[op.args[1].0 as usize];
            let (arith, n) = match op.opcode {
                Opcode::Add | Opcode::Mul | Opcode::And | Opcode::Or | Opcode::Xor => {
                    (true, bits(ua).max(bits(ub)).max(bits(umax[r.0 as usize])))
                }
                Opcode::Eq | Opcode::Ne | Opcode::Lt { signed: false } | Opcode::Le { signed: false } => (false, bits(ua).max(bits(ub))),
                _ => (false, aw),
            };
            if n >= aw || g.width(op.args[1]) != aw {
                new_list.push(o);
                continue;
            }
            let mut narrowed = Vec::new();
            for &x in &op.args {
                narrowed.push(match g.const_value(x) {
                    Some(c) => g.konst(c, n),
                    None => {
                        let t = g.new_op(b, Opcode::Trunc, vec![x], Some(n), op.pos);
                        new_list.push(t);
                        g.result(t)
                    }
                });
            }
            if arith {
                let inner = g.new_op(b, op.opcode, narrowed, Some(n), op.pos);
                new_list.push(inner);
                let iv = g.result(inner);
                let o_mut = g.op_mut(o);
                o_mut.opcode = Opcode::Ext { signed: false };
                o_mut.args = vec![iv];
            } else {
                g.op_mut(o).args = narrowed;
            }
            new_list.push(o);
            changed = true;
        }
        g.blocks[b.0 as usize].ops = new_list;
    }
    changed
}

/// Mark-sweep from stores and terminators.
fn dce(g: &mut Cdfg) -> bool {
    let mut live = vec![false; g.ops.len()];
    let mut work: Vec<ValueId> = Vec::new();
    for b in g.block_ids() {
        let blk = g.block(b);
        for &o in &blk.ops {
            if g.op(o).opcode.has_side_effect() {
                live[o.0 as usize] = true;
                work.extend(&g.op(o).args);
            }
        }
        work.extend(blk.term.uses());
    }
    while let Some(v) = work.pop() {
        if let Some(o) = g.def_op(v) {
            if !live[o.0 as usize] {
                live[o.0 as usize] = true;
                work.extend(&g.op(o).args);
            }
        }
    }
    let mut changed = false;
    for blk in &mut g.blocks {
        let before = blk.ops.len();
        blk.ops.retain(|o| live[o.0 as usize]);
        changed |= blk.ops.len() != before;
    }
    changed
}
