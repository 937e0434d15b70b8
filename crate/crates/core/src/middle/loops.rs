// SPDX-License-Identifier: Apache-2.0

//! Dominators and natural loops.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::cdfg::{BlockId, Cdfg};
use super::MiddleError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopInfo {
    /// Loop nesting depth per block; unreachable blocks have depth 0.
    pub depth: Vec<u32>,
    /// `(latch, header)` pairs.
    pub back_edges: Vec<(BlockId, BlockId)>,
}

/// Immediate dominators (Cooper, Harvey and Kennedy); `None` for unreachable
/// blocks, the entry maps to itself.
pub fn dominators(g: &Cdfg) -> Vec<Option<BlockId>> {
    let rpo = g.reverse_postorder();
    let n = g.blocks.len();
    let mut order = vec![usize::MAX; n];
    for (i, b) in rpo.iter().enumerate() {
        order[b.0 as usize] = i;
    }
    let preds = g.recompute_preds();
    let mut idom: Vec<Option<BlockId>> = vec![None; n];
    idom[g.entry.0 as usize] = Some(g.entry);
    let intersect = |idom: &[Option<BlockId>], mut a: BlockId, mut b: BlockId| {
        while a != b {
            while order[a.0 as usize] > order[b.0 as usize] {
                a = idom[a.0 as usize].unwrap();
            }
            while order[b.0 as usize] > order[a.0 as usize] {
                b = idom[b.0 as usize].unwrap();
            }
        }
        a
    };
    let mut changed = true;
    while changed {
        changed = false;
        for &b in rpo.iter().skip(1) {
            let mut new: Option<BlockId> = None;
            for &p in &preds[b.0 as usize] {
                if idom[p.0 as usize].is_none() {
                    continue;
                }
                new = Some(match new {
                    None => p,
                    Some(x) => intersect(&idom, p, x),
                });
            }
            if new != idom[b.0 as usize] {
                idom[b.0 as usize] = new;
                changed = true;
            }
        }
    }
    idom
}

/// True if `a` dominates `b` under the immediate-dominator tree `idom`.
pub fn dominates(idom: &[Option<BlockId>], a: BlockId, mut b: BlockId) -> bool {
    loop {
        if a == b {
            return true;
        }
        match idom[b.0 as usize] {
            Some(p) if p != b => b = p,
            _ => return false,
        }
    }
}

pub fn analyze_loops(g: &Cdfg) -> Result<LoopInfo, MiddleError> {
    let n = g.blocks.len();
    let idom = dominators(g);
    let succ = g.successors();
    let preds = g.recompute_preds();

    // retreating edges found by DFS must all be back edges for reducibility
    let mut state = vec![0u8; n];
    let mut back_edges = Vec::new();
    let mut stack = vec![(g.entry, 0usize)];
    state[g.entry.0 as usize] = 1;
    while let Some((b, i)) = stack.pop() {
        let s = &succ[b.0 as usize];
        if i < s.len() {
            stack.push((b, i + 1));
            let t = s[i];
            match state[t.0 as usize] {
                0 => {
                    state[t.0 as usize] = 1;
                    stack.push((t, 0));
                }
                1 => {
                    if !dominates(&idom, t, b) {
                        return Err(MiddleError::Irreducible);
                    }
                    back_edges.push((b, t));
                }
                _ => {}
            }
        } else {
            state[b.0 as usize] = 2;
        }
    }
    back_edges.sort();

    let mut depth = vec![0u32; n];
    // loops sharing a header form one loop
    let mut headers: Vec<BlockId> = back_edges.iter().map(|e| e.1).collect();
    headers.dedup();
    for h in headers {
        let mut body = BTreeSet::new();
        body.insert(h);
        let mut work: Vec<BlockId> = back_edges.iter().filter(|e| e.1 == h).map(|e| e.0).collect();
        while let Some(x) = work.pop() {
            if body.insert(x) {
                for &p in &preds[x.0 as usize] {
                    if idom[p.0 as usize].is_some() {
                        work.push(p);
                    }
                }
            }
        }
        for b in body {
            depth[b.0 as usize] += 1;
        }
    }
    Ok(LoopInfo { depth, back_edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check, SourceUnit};
    use crate::middle::cdfg::Terminator;
    use crate::middle::lower_to_cdfg;

    fn graph(src: &str) -> Cdfg {
        lower_to_cdfg(&check(&SourceUnit::new("t.c", src), "f").unwrap()).unwrap()
    }

    #[test]
    fn straight_line() {
        let li = analyze_loops(&graph("int f(int a){return a*2;}")).unwrap();
        assert!(li.depth.iter().all(|&d| d == 0));
        assert!(li.back_edges.is_empty());
    }

    #[test]
    fn nested_loops() {
        let g = graph("int f(int n){int s=0; for(int i=0;i<n;i++){ for(int j=0;j<n;j++){ s+=j; } } return s;}");
        let li = analyze_loops(&g).unwrap();
        assert_eq!(li.back_edges.len(), 2);
        assert_eq!(*li.depth.iter().max().unwrap(), 2);
        let g1 = graph("int f(int n){int s=0; while(s<n) s++; return s;}");
        let li1 = analyze_loops(&g1).unwrap();
        assert_eq!(li1.depth.iter().filter(|&&d| d == 1).count(), 2);
    }

    #[test]
    fn irreducible_detected() {
        // entry branches into both halves of a two-block cycle
        let mut g = Cdfg::new("irr");
        let e = g.new_block();
        let a = g.new_block();
        let b = g.new_block();
        let c = g.konst(1, 1);
        g.blocks[e.0 as usize].term = Terminator::Branch { cond: c, then: a, els: b };
        g.blocks[a.0 as usize].term = Terminator::Jump(b);
        g.blocks[b.0 as usize].term = Terminator::Jump(a);
        assert_eq!(analyze_loops(&g).unwrap_err(), MiddleError::Irreducible);
    }
}
