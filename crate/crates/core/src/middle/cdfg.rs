// SPDX-License-Identifier: Apache-2.0

//! Control and data flow graph in SSA form.

use std::collections::HashMap;
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

use crate::frontend::types::{Pos, ScalarType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValueId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemId(pub u32);

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bb{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Opcode {
    Add,
    Sub,
    Mul,
    Div {
        signed: bool,
    },
    Rem {
        signed: bool,
    },
    Shl,
    Shr {
        arith: bool,
    },
    And,
    Or,
    Xor,
    Eq,
    Ne,
    Lt {
        signed: bool,
    },
    Le {
        signed: bool,
    },
    /// `[cond, if_true, if_false]`.
    Mux,
    /// Widening by zero or sign extension.
    Ext {
        signed: bool,
    },
    /// Narrowing to the result width.
    Trunc,
    /// `[byte_offset]`.
    Load {
        mem: MemId,
    },
    /// `[byte_offset, value]`; no result.
    Store {
        mem: MemId,
    },
    /// One argument per predecessor, in the order of the block's `preds`.
    Phi,
}

/// Component class an operation is implemented by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpClass {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Shl,
    Shr,
    Bitop,
    Cmp,
    Mux,
    LoadPort,
    StorePort,
    Ext,
}

impl OpClass {
    pub const ALL: [OpClass; 13] = [
        OpClass::Add,
        OpClass::Sub,
        OpClass::Mul,
        OpClass::Div,
        OpClass::Mod,
        OpClass::Shl,
        OpClass::Shr,
        OpClass::Bitop,
        OpClass::Cmp,
        OpClass::Mux,
        OpClass::LoadPort,
        OpClass::StorePort,
        OpClass::Ext,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpClass::Add => "add",
            OpClass::Sub => "sub",
            OpClass::Mul => "mul",
            OpClass::Div => "div",
            OpClass::Mod => "mod",
            OpClass::Shl => "shl",
            OpClass::Shr => "shr",
            OpClass::Bitop => "bitop",
            OpClass::Cmp => "cmp",
            OpClass::Mux => "mux",
            OpClass::LoadPort => "load_port",
            OpClass::StorePort => "store_port",
            OpClass::Ext => "ext",
        }
    }

    pub fn from_name(s: &str) -> Option<OpClass> {
        OpClass::ALL.iter().copied().find(|c| c.name() == s)
    }
}

impl fmt::Display for OpClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Opcode {
    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::Add => "add",
            Opcode::Sub => "sub",
            Opcode::Mul => "mul",
            Opcode::Div { signed: true } => "sdiv",
            Opcode::Div { signed: false } => "udiv",
            Opcode::Rem { signed: true } => "srem",
            Opcode::Rem { signed: false } => "urem",
            Opcode::Shl => "shl",
            Opcode::Shr { arith: true } => "ashr",
            Opcode::Shr { arith: false } => "lshr",
            Opcode::And => "and",
            Opcode::Or => "or",
            Opcode::Xor => "xor",
            Opcode::Eq => "eq",
            Opcode::Ne => "ne",
            Opcode::Lt { signed: true } => "slt",
            Opcode::Lt { signed: false } => "ult",
            Opcode::Le { signed: true } => "sle",
            Opcode::Le { signed: false } => "ule",
            Opcode::Mux => "mux",
            Opcode::Ext { signed: true } => "sext",
            Opcode::Ext { signed: false } => "zext",
            Opcode::Trunc => "trunc",
            Opcode::Load { .. } => "load",
            Opcode::Store { .. } => "store",
            Opcode::Phi => "phi",
        }
    }

    /// `None` for phis, which are register transfers on control edges.
    pub fn class(self) -> Option<OpClass> {
        Some(match self {
            Opcode::Add => OpClass::Add,
            Opcode::Sub => OpClass::Sub,
            Opcode::Mul => OpClass::Mul,
            Opcode::Div { .. } => OpClass::Div,
            Opcode::Rem { .. } => OpClass::Mod,
            Opcode::Shl => OpClass::Shl,
            Opcode::Shr { .. } => OpClass::Shr,
            Opcode::And | Opcode::Or | Opcode::Xor => OpClass::Bitop,
            Opcode::Eq | Opcode::Ne | Opcode::Lt { .. } | Opcode::Le { .. } => OpClass::Cmp,
            Opcode::Mux => OpClass::Mux,
            Opcode::Ext { .. } | Opcode::Trunc => OpClass::Ext,
            Opcode::Load { .. } => OpClass::LoadPort,
            Opcode::Store { .. } => OpClass::StorePort,
            Opcode::Phi => return None,
        })
    }

    pub fn mem(self) -> Option<MemId> {
        match self {
            Opcode::Load { mem } | Opcode::Store { mem } => Some(mem),
            _ => None,
        }
    }

    pub fn is_commutative(self) -> bool {
        matches!(
            self,
            Opcode::Add | Opcode::Mul | Opcode::And | Opcode::Or | Opcode::Xor | Opcode::Eq | Opcode::Ne
        )
    }

    pub fn has_side_effect(self) -> bool {
        matches!(self, Opcode::Store { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueDef {
    /// Scalar parameter with the given position in the parameter list.
    Input(u32),
    Const(u64),
    Op(OpId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Value {
    pub width: u8,
    pub def: ValueDef,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Op {
    pub opcode: Opcode,
    pub args: Vec<ValueId>,
    pub result: Option<ValueId>,
    pub block: BlockId,
    #[serde(skip)]
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Terminator {
    Jump(BlockId),
    Branch { cond: ValueId, then: BlockId, els: BlockId },
    Return(Option<ValueId>),
}

impl Terminator {
    pub fn successors(&self) -> Vec<BlockId> {
        match *self {
            Terminator::Jump(b) => vec![b],
            Terminator::Branch { then, els, .. } => vec![then, els],
            Terminator::Return(_) => vec![],
        }
    }

    pub fn uses(&self) -> Option<ValueId> {
        match *self {
            Terminator::Branch { cond, .. } => Some(cond),
            Terminator::Return(v) => v,
            Terminator::Jump(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// Phis first, then the remaining ops in a topological order of data edges.
    pub ops: Vec<OpId>,
    pub preds: Vec<BlockId>,
    pub term: Terminator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemKind {
    Local {
        len: u32,
        /// Power-on contents, one entry per element.
        init: Option<Vec<u64>>,
        read_only: bool,
    },
    External {
        /// Position of the array parameter in the parameter list.
        param: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Backing {
    OnChip,
    Axi(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemObject {
    pub name: String,
    pub kind: MemKind,
    pub elem: ScalarType,
    pub backing: Backing,
}

impl MemObject {
    pub fn elem_bytes(&self) -> u32 {
        self.elem.bytes() as u32
    }

    /// log2 of the element size in bytes.
    pub fn elem_shift(&self) -> u32 {
        self.elem_bytes().trailing_zeros()
    }

    pub fn is_local(&self) -> bool {
        matches!(self.kind, MemKind::Local { .. })
    }

    /// Element count of a local array; `None` for external memory.
    pub fn local_len(&self) -> Option<u32> {
        match self.kind {
            MemKind::Local { len, .. } => Some(len),
            MemKind::External { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    Scalar { ty: ScalarType, value: ValueId },
    Array { elem: ScalarType, mem: MemId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cdfg {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: Option<ScalarType>,
    pub values: Vec<Value>,
    pub ops: Vec<Op>,
    pub blocks: Vec<Block>,
    pub entry: BlockId,
    pub mems: Vec<MemObject>,
    #[serde(skip)]
    consts: HashMap<(u64, u8), ValueId>,
}

impl PartialEq for Cdfg {
    fn eq(&self, o: &Cdfg) -> bool {
        self.name == o.name
            && self.params == o.params
            && self.ret == o.ret
            && self.values == o.values
            && self.ops == o.ops
            && self.blocks == o.blocks
            && self.entry == o.entry
            && self.mems == o.mems
    }
}

impl Cdfg {
    pub fn new(name: impl Into<String>) -> Cdfg {
        Cdfg {
            name: name.into(),
            params: Vec::new(),
            ret: None,
            values: Vec::new(),
            ops: Vec::new(),
            blocks: Vec::new(),
            entry: BlockId(0),
            mems: Vec::new(),
            consts: HashMap::new(),
        }
    }

    pub fn value(&self, v: ValueId) -> &Value {
        &self.values[v.0 as usize]
    }

    pub fn width(&self, v: ValueId) -> u8 {
        self.values[v.0 as usize].width
    }

    pub fn op(&self, o: OpId) -> &Op {
        &self.ops[o.0 as usize]
    }

    pub fn op_mut(&mut self, o: OpId) -> &mut Op {
        &mut self.ops[o.0 as usize]
    }

    pub fn block(&self, b: BlockId) -> &Block {
        &self.blocks[b.0 as usize]
    }

    pub fn mem(&self, m: MemId) -> &MemObject {
        &self.mems[m.0 as usize]
    }

    pub fn block_ids(&self) -> impl Iterator<Item = BlockId> {
        (0..self.blocks.len() as u32).map(BlockId)
    }

    pub fn const_value(&self, v: ValueId) -> Option<u64> {
        match self.value(v).def {
            ValueDef::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn def_op(&self, v: ValueId) -> Option<OpId> {
        match self.value(v).def {
            ValueDef::Op(o) => Some(o),
            _ => None,
        }
    }

    /// Interned constant of the given width; `bits` is masked to the width.
    pub fn konst(&mut self, bits: u64, width: u8) -> ValueId {
        let bits = bits & crate::semantics::mask(width);
        if let Some(&v) = self.consts.get(&(bits, width)) {
            return v;
        }
        let v = self.new_value(width, ValueDef::Const(bits));
        self.consts.insert((bits, width), v);
        v
    }

    pub fn new_value(&mut self, width: u8, def: ValueDef) -> ValueId {
        let id = ValueId(self.values.len() as u32);
        self.values.push(Value { width, def });
        id
    }

    pub fn new_block(&mut self) -> BlockId {
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(Block {
            ops: Vec::new(),
            preds: Vec::new(),
            term: Terminator::Return(None),
        });
        id
    }

    /// Creates an op (not yet placed in any block's op list) and its result value.
    pub fn new_op(&mut self, block: BlockId, opcode: Opcode, args: Vec<ValueId>, width: Option<u8>, pos: Pos) -> OpId {
        let id = OpId(self.ops.len() as u32);
        let result = width.map(|w| self.new_value(w, ValueDef::Op(id)));
        self.ops.push(Op {
            opcode,
            args,
            result,
            block,
            pos,
        });
        id
    }

    /// Creates an op and appends it to `block`.
    pub fn push_op(&mut self, block: BlockId, opcode: Opcode, args: Vec<ValueId>, width: Option<u8>, pos: Pos) -> OpId {
        let id = self.new_op(block, opcode, args, width, pos);
        self.blocks[block.0 as usize].ops.push(id);
        id
    }

    pub fn result(&self, o: OpId) -> ValueId {
        self.op(o).result.expect("op has a result")
    }

    /// Successor lists, indexed by block.
    pub fn successors(&self) -> Vec<Vec<BlockId>> {
        self.blocks.iter().map(|b| b.term.successors()).collect()
    }

    /// Predecessor lists derived from terminators, in block order.
    pub fn recompute_preds(&self) -> Vec<Vec<BlockId>> {
        let mut preds = vec![Vec::new(); self.blocks.len()];
        for (i, b) in self.blocks.iter().enumerate() {
            for s in b.term.successors() {
                preds[s.0 as usize].push(BlockId(i as u32));
            }
        }
        preds
    }

    pub fn op_count(&self) -> usize {
        self.blocks.iter().map(|b| b.ops.len()).sum()
    }

    /// Count of placed ops, excluding phis.
    pub fn non_phi_op_count(&self) -> usize {
        self.blocks
            .iter()
            .flat_map(|b| &b.ops)
            .filter(|&&o| self.op(o).opcode != Opcode::Phi)
            .count()
    }

    /// Renumbers values, ops and blocks canonically and drops anything not
    /// reachable from the entry block or not placed in a block.
    pub fn compact(&mut self) {
        // blocks in reverse post-order from the entry
        let order = self.reverse_postorder();
        let mut bmap = vec![None; self.blocks.len()];
        for (i, &b) in order.iter().enumerate() {
            bmap[b.0 as usize] = Some(BlockId(i as u32));
        }

        let mut vmap: Vec<Option<ValueId>> = vec![None; self.values.len()];
        let mut values = Vec::new();
        let mut consts = HashMap::new();
        for p in &self.params {
            if let ParamKind::Scalar { value, .. } = p.kind {
                vmap[value.0 as usize] = Some(ValueId(values.len() as u32));
                values.push(self.values[value.0 as usize]);
            }
        }
        let mut ops = Vec::new();
        let mut blocks = Vec::new();
        let old_ops = std::mem::take(&mut self.ops);
        let mut map_const = |v: ValueId, values: &mut Vec<Value>, vmap: &mut Vec<Option<ValueId>>| {
            if vmap[v.0 as usize].is_none() {
                let val = self.values[v.0 as usize];
                if let ValueDef::Const(c) = val.def {
                    let nv = *consts.entry((c, val.width)).or_insert_with(|| {
                        values.push(val);
                        ValueId(values.len() as u32 - 1)
                    });
                    vmap[v.0 as usize] = Some(nv);
                }
            }
        };
        // assign result ids first so phi back-edge operands resolve
        let mut result_order = Vec::new();
        for &b in &order {
            for &o in &self.blocks[b.0 as usize].ops {
                if let Some(r) = old_ops[o.0 as usize].result {
                    result_order.push(r);
                }
            }
        }
        // constants take ids after inputs, in order of first use
        for &b in &order {
            let blk = &self.blocks[b.0 as usize];
            for &o in &blk.ops {
                for &a in &old_ops[o.0 as usize].args {
                    map_const(a, &mut values, &mut vmap);
                }
            }
            if let Some(v) = blk.term.uses() {
                map_const(v, &mut values, &mut vmap);
            }
        }
        for r in &result_order {
            vmap[r.0 as usize] = Some(ValueId(values.len() as u32));
            values.push(self.values[r.0 as usize]);
        }
        let mv = |v: ValueId| vmap[v.0 as usize].expect("value defined in a reachable block");
        for (bi, &b) in order.iter().enumerate() {
            let blk = &self.blocks[b.0 as usize];
            let mut new_ops = Vec::new();
            for &o in &blk.ops {
                let op = &old_ops[o.0 as usize];
                let nid = OpId(ops.len() as u32);
                if let Some(r) = op.result {
                    values[mv(r).0 as usize].def = ValueDef::Op(nid);
                }
                ops.push(Op {
                    opcode: op.opcode,
                    args: op.args.iter().map(|&a| mv(a)).collect(),
                    result: op.result.map(mv),
                    block: BlockId(bi as u32),
                    pos: op.pos,
                });
                new_ops.push(nid);
            }
            let term = match blk.term {
                Terminator::Jump(t) => Terminator::Jump(bmap[t.0 as usize].unwrap()),
                Terminator::Branch { cond, then, els } => Terminator::Branch {
                    cond: mv(cond),
                    then: bmap[then.0 as usize].unwrap(),
                    els: bmap[els.0 as usize].unwrap(),
                },
                Terminator::Return(v) => Terminator::Return(v.map(mv)),
            };
            // preds must all be reachable; filtering keeps phi args aligned
            let mut preds = Vec::new();
            let mut keep = Vec::new();
            for (i, p) in blk.preds.iter().enumerate() {
                if let Some(np) = bmap[p.0 as usize] {
                    preds.push(np);
                    keep.push(i);
                }
            }
            if keep.len() != blk.preds.len() {
                for &o in &new_ops {
                    let op = &mut ops[o.0 as usize];
                    if op.opcode == Opcode::Phi {
                        op.args = keep.iter().map(|&i| op.args[i]).collect();
                    }
                }
            }
            blocks.push(Block { ops: new_ops, preds, term });
        }
        for p in &mut self.params {
            if let ParamKind::Scalar { value, .. } = &mut p.kind {
                *value = mv(*value);
            }
        }
        self.values = values;
        self.ops = ops;
        self.blocks = blocks;
        self.entry = BlockId(0);
        self.consts = consts;
    }

    /// Blocks reachable from the entry in reverse post-order.
    pub fn reverse_postorder(&self) -> Vec<BlockId> {
        let n = self.blocks.len();
        let mut seen = vec![false; n];
        let mut post = Vec::new();
        // iterative DFS keeping successor cursor
        let mut stack = vec![(self.entry, 0usize)];
        seen[self.entry.0 as usize] = true;
        while let Some((b, i)) = stack.pop() {
            let succ = self.blocks[b.0 as usize].term.successors();
            if i < succ.len() {
                stack.push((b, i + 1));
                let s = succ[i];
                if !seen[s.0 as usize] {
                    seen[s.0 as usize] = true;
                    stack.push((s, 0));
                }
            } else {
                post.push(b);
            }
        }
        post.reverse();
        post
    }

    /// Rebuilds the constant intern table (after deserialization).
    pub fn reindex_consts(&mut self) {
        self.consts.clear();
        for (i, v) in self.values.iter().enumerate() {
            if let ValueDef::Const(c) = v.def {
                self.consts.entry((c, v.width)).or_insert(ValueId(i as u32));
            }
        }
    }

    /// Human-readable listing; stable across runs.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cdfg {}", self.name);
        for p in &self.params {
            match &p.kind {
                ParamKind::Scalar { ty, value } => {
                    let _ = writeln!(s, "  param {}: {} = {}", p.name, ty, value);
                }
                ParamKind::Array { elem, mem } => {
                    let _ = writeln!(s, "  param {}: {}[] = m{}", p.name, elem, mem.0);
                }
            }
        }
        for (i, m) in self.mems.iter().enumerate() {
            let _ = writeln!(s, "  mem m{} {} {:?} {} {:?}", i, m.name, m.kind, m.elem, m.backing);
        }
        for b in self.block_ids() {
            let blk = self.block(b);
            let preds: Vec<String> = blk.preds.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(s, "{}: preds [{}]", b, preds.join(", "));
            for &o in &blk.ops {
                let _ = writeln!(s, "  {}", self.op_string(o));
            }
            let _ = match &blk.term {
                Terminator::Jump(t) => writeln!(s, "  jump {}", t),
                Terminator::Branch { cond, then, els } => {
                    writeln!(s, "  br {}, {}, {}", self.value_string(*cond), then, els)
                }
                Terminator::Return(Some(v)) => writeln!(s, "  ret {}", self.value_string(*v)),
                Terminator::Return(None) => writeln!(s, "  ret"),
            };
        }
        s
    }

    pub fn value_string(&self, v: ValueId) -> String {
        match self.value(v).def {
            ValueDef::Const(c) => format!("{}:i{}", c, self.width(v)),
            _ => v.to_string(),
        }
    }

    pub fn op_string(&self, o: OpId) -> String {
        let op = self.op(o);
        let args: Vec<String> = op.args.iter().map(|&a| self.value_string(a)).collect();
        let mem = op.opcode.mem().map(|m| format!(" m{}", m.0)).unwrap_or_default();
        match op.result {
            Some(r) => format!("{} = {}{}:{} {}", r, op.opcode.mnemonic(), mem, self.width(r), args.join(", ")),
            None => format!("{}{} {}", op.opcode.mnemonic(), mem, args.join(", ")),
        }
    }
}
