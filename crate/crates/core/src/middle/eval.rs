// SPDX-License-Identifier: Apache-2.0

//! Direct execution of a CDFG, used to check that passes preserve semantics.

use crate::rtlsim::{ArgValue, InterpResult, MemoryImage, SimError};
use crate::semantics::{self as sem, mask};

use super::cdfg::*;

/// Evaluates a non-memory, non-phi opcode on width-masked operands.
pub fn apply(op: Opcode, a: &[u64], aw: &[u8], rw: u8) -> u64 {
    match op {
        Opcode::Add => sem::add(a[0], a[1], rw),
        Opcode::Sub => sem::sub(a[0], a[1], rw),
        Opcode::Mul => sem::mul(a[0], a[1], rw),
        Opcode::Div { signed } => sem::div(a[0], a[1], rw, signed),
        Opcode::Rem { signed } => sem::rem(a[0], a[1], rw, signed),
        Opcode::Shl => sem::shl(a[0], a[1] & mask(aw[1]), rw),
        Opcode::Shr { arith } => sem::shr(a[0], a[1] & mask(aw[1]), rw, arith),
        Opcode::And => a[0] & a[1] & mask(rw),
        Opcode::Or => (a[0] | a[1]) & mask(rw),
        Opcode::Xor => (a[0] ^ a[1]) & mask(rw),
        Opcode::Eq => (a[0] & mask(aw[0]) == a[1] & mask(aw[0])) as u64,
        Opcode::Ne => (a[0] & mask(aw[0]) != a[1] & mask(aw[0])) as u64,
        Opcode::Lt { signed } => sem::lt(a[0], a[1], aw[0], signed) as u64,
        Opcode::Le { signed } => (!sem::lt(a[1], a[0], aw[0], signed)) as u64,
        Opcode::Mux => {
            if a[0] & 1 != 0 {
                a[1]
            } else {
                a[2]
            }
        }
        Opcode::Ext { signed } => sem::resize(a[0], aw[0], signed, rw),
        Opcode::Trunc => a[0] & mask(rw),
        Opcode::Load { .. } | Opcode::Store { .. } | Opcode::Phi => {
            panic!("{} is not a pure operator", op.mnemonic())
        }
    }
}

/// Runs `g` to completion. Array arguments name the memory image and base
/// address backing each external object.
pub fn eval_cdfg(g: &Cdfg, args: &[ArgValue], mems: &mut [MemoryImage], budget: u64) -> Result<InterpResult, SimError> {
    if args.len() != g.params.len() {
        return Err(SimError::Vector(format!(
            "expected {} arguments, got {}",
            g.params.len(),
            args.len()
        )));
    }
    let mut vals = vec![0u64; g.values.len()];
    for (i, v) in g.values.iter().enumerate() {
        match v.def {
            ValueDef::Const(c) => vals[i] = c,
            ValueDef::Input(p) => match args[p as usize] {
                ArgValue::Scalar(x) => vals[i] = x & mask(v.width),
                _ => return Err(SimError::Vector(format!("parameter {p} expects a scalar"))),
            },
            ValueDef::Op(_) => {}
        }
    }
    let mut ext = vec![None; g.mems.len()];
    let mut local: Vec<Vec<u64>> = vec![Vec::new(); g.mems.len()];
    for (i, m) in g.mems.iter().enumerate() {
        match &m.kind {
            MemKind::Local { len, init, .. } => {
                local[i] = init.clone().unwrap_or_else(|| vec![0; *len as usize]);
            }
            MemKind::External { param } => match args[*param as usize] {
                ArgValue::Array { bundle, base } => {
                    if bundle as usize >= mems.len() {
                        return Err(SimError::Vector(format!("no memory for bundle {bundle}")));
                    }
                    ext[i] = Some((bundle as usize, base));
                }
                _ => return Err(SimError::Vector(format!("parameter {param} expects an array"))),
            },
        }
    }

    let mut steps = 0u64;
    let mut div_by_zero = 0u64;
    let mut prev: Option<BlockId> = None;
    let mut b = g.entry;
    let mut scratch = Vec::new();
    let mut widths = Vec::new();
    loop {
        let blk = g.block(b);
        // phis read their operands simultaneously
        if let Some(p) = prev {
            let k = blk.preds.iter().position(|&x| x == p).expect("edge present in preds");
            let updates: Vec<(ValueId, u64)> = blk
                .ops
                .iter()
                .map(|&o| g.op(o))
                .take_while(|op| op.opcode == Opcode::Phi)
                .map(|op| (op.result.unwrap(), vals[op.args[k].0 as usize]))
                .collect();
            for (r, v) in updates {
                vals[r.0 as usize] = v;
            }
        }
        for &o in &blk.ops {
            let op = g.op(o);
            steps += 1;
            if steps > budget {
                return Err(SimError::StepBudget(budget));
            }
            match op.opcode {
                Opcode::Phi => {}
                Opcode::Load { mem } => {
                    let off = vals[op.args[0].0 as usize] as u32;
                    let m = g.mem(mem);
                    let r = op.result.unwrap();
                    vals[r.0 as usize] = match ext[mem.0 as usize] {
                        Some((bundle, base)) => mems[bundle].read(base.wrapping_add(off), m.elem_bytes()) & mask(m.elem.width()),
                        None => {
                            let i = (off >> m.elem_shift()) as u64;
                            *local[mem.0 as usize]
                                .get(i as usize)
                                .ok_or_else(|| SimError::OutOfBounds(m.name.clone(), i))?
                        }
                    };
                }
                Opcode::Store { mem } => {
                    let off = vals[op.args[0].0 as usize] as u32;
                    let v = vals[op.args[1].0 as usize];
                    let m = g.mem(mem);
                    match ext[mem.0 as usize] {
                        Some((bundle, base)) => mems[bundle].write(base.wrapping_add(off), m.elem_bytes(), v),
                        None => {
                            let i = (off >> m.elem_shift()) as u64;
                            let slot = local[mem.0 as usize]
                                .get_mut(i as usize)
                                .ok_or_else(|| SimError::OutOfBounds(m.name.clone(), i))?;
                            *slot = v;
                        }
                    }
                }
                opc => {
                    scratch.clear();
                    widths.clear();
                    for &a in &op.args {
                        scratch.push(vals[a.0 as usize]);
                        widths.push(g.width(a));
                    }
                    if matches!(opc, Opcode::Div { .. } | Opcode::Rem { .. }) && scratch[1] == 0 {
                        div_by_zero += 1;
                    }
                    let r = op.result.unwrap();
                    vals[r.0 as usize] = apply(opc, &scratch, &widths, g.width(r));
                }
            }
        }
        steps += 1;
        if steps > budget {
            return Err(SimError::StepBudget(budget));
        }
        match blk.term {
            Terminator::Jump(t) => {
                prev = Some(b);
                b = t;
            }
            Terminator::Branch { cond, then, els } => {
                prev = Some(b);
                b = if vals[cond.0 as usize] & 1 != 0 { then } else { els };
            }
            Terminator::Return(v) => {
                return Ok(InterpResult {
                    ret: v.map(|v| vals[v.0 as usize]),
                    div_by_zero,
                    steps,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check, SourceUnit};
    use crate::middle::lower_to_cdfg;
    use crate::rtlsim::interpret;

    #[test]
    fn matches_reference_interpreter() {
        let src = "int g(int* x, int n){int s = 0; for (int i = 0; i < n; i++) { if (x[i] > 2) s += x[i]; else s -= 1; } return s;}
                   int f(int* x, int n){int t[3] = {1, 2, 3}; x[0] = t[2]; return g(x, n) * 3;}";
        let p = check(&SourceUnit::new("t.c", src), "f").unwrap();
        let g = lower_to_cdfg(&p).unwrap();
        let mut m1 = MemoryImage::new();
        for i in 0..5u32 {
            m1.write(0x40 + 4 * i, 4, (i * 7 % 5) as u64);
        }
        let mut m2 = m1.clone();
        let args = [ArgValue::Array { bundle: 0, base: 0x40 }, ArgValue::Scalar(5)];
        let a = interpret(&p, &args, std::slice::from_mut(&mut m1)).unwrap();
        let b = eval_cdfg(&g, &args, std::slice::from_mut(&mut m2), 1 << 20).unwrap();
        assert_eq!(a.ret, b.ret);
        assert_eq!(m1, m2);
    }
}
