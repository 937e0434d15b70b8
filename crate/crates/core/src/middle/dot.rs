// SPDX-License-Identifier: Apache-2.0

//! DOT rendering of a CDFG. Op nodes are labelled `opcode:width`; blocks are
//! clusters; dashed edges are control flow.

use std::fmt::Write;

use super::cdfg::*;

pub fn to_dot(g: &Cdfg) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph \"{}\" {{", g.name);
    let _ = writeln!(s, "  node [shape=box];");
    for b in g.block_ids() {
        let blk = g.block(b);
        let _ = writeln!(s, "  subgraph cluster_{} {{", b.0);
        let _ = writeln!(s, "    label=\"{}\";", b);
        let _ = writeln!(s, "    {}_entry [shape=point];", b);
        for &o in &blk.ops {
            let op = g.op(o);
            let w = op
                .result
                .map(|r| g.width(r))
                .unwrap_or_else(|| op.args.last().map(|&a| g.width(a)).unwrap_or(0));
            let _ = writeln!(s, "    op{} [label=\"{}:{}\"];", o.0, op.opcode.mnemonic(), w);
        }
        let term = match blk.term {
            Terminator::Jump(_) => "jump",
            Terminator::Branch { .. } => "br",
            Terminator::Return(_) => "ret",
        };
        let _ = writeln!(s, "    {}_term [label=\"{}\", shape=diamond];", b, term);
        let _ = writeln!(s, "  }}");
    }
    for b in g.block_ids() {
        let blk = g.block(b);
        for &o in &blk.ops {
            for (k, &a) in g.op(o).args.iter().enumerate() {
                if let Some(d) = g.def_op(a) {
                    let _ = writeln!(s, "  op{} -> op{} [label=\"{}\"];", d.0, o.0, k);
                }
            }
        }
        if let Some(v) = blk.term.uses() {
            if let Some(d) = g.def_op(v) {
                let _ = writeln!(s, "  op{} -> {}_term;", d.0, b);
            }
        }
        for t in blk.term.successors() {
            let _ = writeln!(s, "  {}_term -> {}_entry [style=dashed];", b, t);
        }
    }
    s.push_str("}\n");
    s
}
