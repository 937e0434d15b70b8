// SPDX-License-Identifier: Apache-2.0

//! Structural validator: single definitions, dominance of uses, phi shape and
//! operand widths.

use std::collections::HashMap;

use super::cdfg::*;
use super::loops::{dominates, dominators};

pub fn validate(g: &Cdfg) -> Result<(), String> {
    let idom = dominators(g);
    let preds = g.recompute_preds();
    let mut pos: HashMap<OpId, (BlockId, usize)> = HashMap::new();
    for b in g.block_ids() {
        let blk = g.block(b);
        let mut sorted = blk.preds.clone();
        sorted.sort();
        let mut expect = preds[b.0 as usize].clone();
        expect.sort();
        if idom[b.0 as usize].is_some() && sorted != expect {
            return Err(format!("{b}: predecessor list disagrees with terminators"));
        }
        let mut seen_non_phi = false;
        for (i, &o) in blk.ops.iter().enumerate() {
            if pos.insert(o, (b, i)).is_some() {
                return Err(format!("op {} placed twice", o.0));
            }
            let op = g.op(o);
            if op.block != b {
                return Err(format!("op {} records block {} but sits in {}", o.0, op.block, b));
            }
            if op.opcode == Opcode::Phi {
                if seen_non_phi {
                    return Err(format!("{b}: phi after non-phi op"));
                }
                if op.args.len() != blk.preds.len() {
                    return Err(format!("{b}: phi arity {} != {} preds", op.args.len(), blk.preds.len()));
                }
            } else {
                seen_non_phi = true;
            }
            if let Some(r) = op.result {
                if g.value(r).def != ValueDef::Op(o) {
                    return Err(format!("{} is not defined by its op", r));
                }
            }
            check_widths(g, op).map_err(|e| format!("{}: {}", g.op_string(o), e))?;
        }
    }
    for (i, v) in g.values.iter().enumerate() {
        if let ValueDef::Op(o) = v.def {
            if g.ops.get(o.0 as usize).and_then(|op| op.result) != Some(ValueId(i as u32)) {
                return Err(format!("v{i} claims a defining op that does not produce it"));
            }
        }
    }
    let available = |v: ValueId, b: BlockId, idx: usize| -> Result<(), String> {
        match g.value(v).def {
            ValueDef::Const(_) | ValueDef::Input(_) => Ok(()),
            ValueDef::Op(d) => {
                let Some(&(db, di)) = pos.get(&d) else {
                    return Err(format!("{v} is defined by an unplaced op"));
                };
                let ok = if db == b { di < idx } else { dominates(&idom, db, b) };
                if ok {
                    Ok(())
                } else {
                    Err(format!("use of {v} in {b} is not dominated by its definition"))
                }
            }
        }
    };
    for b in g.block_ids() {
        if idom[b.0 as usize].is_none() {
            continue;
        }
        let blk = g.block(b);
        for (i, &o) in blk.ops.iter().enumerate() {
            let op = g.op(o);
            if op.opcode == Opcode::Phi {
                for (k, &a) in op.args.iter().enumerate() {
                    let p = blk.preds[k];
                    available(a, p, usize::MAX)?;
                }
            } else {
                for &a in &op.args {
                    available(a, b, i)?;
                }
            }
        }
        if let Some(v) = blk.term.uses() {
            available(v, b, usize::MAX)?;
        }
        if let Terminator::Branch { cond, .. } = blk.term {
            if g.width(cond) != 1 {
                return Err(format!("{b}: branch condition is not 1 bit wide"));
            }
        }
        if let Terminator::Return(v) = blk.term {
            if v.map(|v| g.width(v)) != g.ret.map(|t| t.width()) {
                return Err(format!("{b}: return width mismatch"));
            }
        }
    }
    Ok(())
}

fn check_widths(g: &Cdfg, op: &Op) -> Result<(), String> {
    let w: Vec<u8> = op.args.iter().map(|&a| g.width(a)).collect();
    let rw = op.result.map(|r| g.width(r));
    let arity = |n: usize| {
        if w.len() == n {
            Ok(())
        } else {
            Err(format!("expected {n} operands"))
        }
    };
    match op.opcode {
        Opcode::Add | Opcode::Sub | Opcode::Mul | Opcode::Div { .. } | Opcode::Rem { .. } | Opcode::And | Opcode::Or | Opcode::Xor => {
            arity(2)?;
            if w[0] != w[1] || Some(w[0]) != rw {
                return Err("operand widths differ from result".into());
            }
        }
        Opcode::Shl | Opcode::Shr { .. } => {
            arity(2)?;
            if Some(w[0]) != rw {
                return Err("shifted operand width differs from result".into());
            }
        }
        Opcode::Eq | Opcode::Ne | Opcode::Lt { .. } | Opcode::Le { .. } => {
            arity(2)?;
            if w[0] != w[1] || rw != Some(1) {
                return Err("comparison width mismatch".into());
            }
        }
        Opcode::Mux => {
            arity(3)?;
            if w[0] != 1 || w[1] != w[2] || Some(w[1]) != rw {
                return Err("mux width mismatch".into());
            }
        }
        Opcode::Ext { .. } => {
            arity(1)?;
            if rw.is_none_or(|r| r <= w[0]) {
                return Err("extension must widen".into());
            }
        }
        Opcode::Trunc => {
            arity(1)?;
            if rw.is_none_or(|r| r >= w[0]) {
                return Err("truncation must narrow".into());
            }
        }
        Opcode::Load { mem } => {
            arity(1)?;
            if w[0] != 32 || rw != Some(g.mem(mem).elem.width()) {
                return Err("load width mismatch".into());
            }
        }
        Opcode::Store { mem } => {
            arity(2)?;
            if w[0] != 32 || w[1] != g.mem(mem).elem.width() || rw.is_some() {
                return Err("store width mismatch".into());
            }
        }
        Opcode::Phi => {
            if w.iter().any(|&x| Some(x) != rw) {
                return Err("phi width mismatch".into());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check, SourceUnit};
    use crate::middle::lower_to_cdfg;

    fn graph(src: &str) -> Cdfg {
        lower_to_cdfg(&check(&SourceUnit::new("t.c", src), "f").unwrap()).unwrap()
    }

    #[test]
    fn lowered_graphs_validate() {
        let g = graph("int f(int* x, int n){int s=0; for(int i=0;i<n;i++){ if (x[i]) s += i; } return s;}");
        validate(&g).unwrap();
    }

    #[test]
    fn detects_use_before_def() {
        let mut g = graph("int f(int a){int b = a + 1; return b * 3;}");
        let ops = g.blocks[0].ops.clone();
        g.blocks[0].ops = ops.into_iter().rev().collect();
        assert!(validate(&g).unwrap_err().contains("not dominated"));
    }

    #[test]
    fn detects_width_violation() {
        let mut g = graph("int f(int a, int b){return a + b;}");
        let k = g.konst(1, 8);
        g.ops[0].args[1] = k;
        assert!(validate(&g).is_err());
    }
}
