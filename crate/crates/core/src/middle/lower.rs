// SPDX-License-Identifier: Apache-2.0

//! Lowering of the typed program to SSA form with full inlining.
//!
//! SSA values are built on the fly from variable definitions per block, with
//! incomplete phis for blocks whose predecessors are not all known yet.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, HashSet};

use crate::frontend::typed::*;
use crate::frontend::types::{Pos, ScalarType};

use super::cdfg::*;
use super::MiddleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LowerOptions {
    /// Cap on non-phi ops after inlining.
    pub inline_budget: usize,
    /// Multiplies wider than this are decomposed into partial products.
    pub dsp_native_width: u8,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions {
            inline_budget: 20_000,
            dsp_native_width: 32,
        }
    }
}

pub fn lower_to_cdfg(prog: &TypedProgram) -> Result<Cdfg, MiddleError> {
    lower_with(prog, LowerOptions::default())
}

pub fn lower_with(prog: &TypedProgram, opts: LowerOptions) -> Result<Cdfg, MiddleError> {
    let top = prog.top_function();
    let mut b = Builder {
        prog,
        opts,
        g: Cdfg::new(top.name.clone()),
        cur: BlockId(0),
        sealed: Vec::new(),
        phis: Vec::new(),
        defs: HashMap::new(),
        var_width: Vec::new(),
        incomplete: HashMap::new(),
        instances: HashMap::new(),
        op_count: 0,
    };
    b.g.ret = top.ret;
    let entry = b.new_block();
    b.g.entry = entry;
    b.seal(entry);
    b.cur = entry;

    let mut env = Env::new(top);
    let mut axi = 0;
    for (i, &pv) in top.params.iter().enumerate() {
        let def = top.var(pv);
        match def.ty {
            VarType::Scalar(ty) => {
                let value = b.g.new_value(ty.width(), ValueDef::Input(i as u32));
                b.g.params.push(Param {
                    name: def.name.clone(),
                    kind: ParamKind::Scalar { ty, value },
                });
                let key = b.new_var(ty.width());
                env.vars.insert(pv, key);
                b.write_var(key, entry, value);
            }
            VarType::ArrayRef(elem) => {
                let mem = MemId(b.g.mems.len() as u32);
                b.g.mems.push(MemObject {
                    name: def.name.clone(),
                    kind: MemKind::External { param: i as u32 },
                    elem,
                    backing: Backing::Axi(axi),
                });
                axi += 1;
                b.g.params.push(Param {
                    name: def.name.clone(),
                    kind: ParamKind::Array { elem, mem },
                });
                env.arrays.insert(pv, mem);
            }
            VarType::Array { .. } => unreachable!("parameters are scalars or references"),
        }
    }
    b.declare_locals(&mut env, None);
    b.bind_scalars(&mut env);
    b.stmts(&env, &top.body)?;
    // fall-through return
    let v = top.ret.map(|t| b.g.konst(0, t.width()));
    let cur = b.cur;
    b.g.blocks[cur.0 as usize].term = Terminator::Return(v);
    b.finish();
    Ok(b.g)
}

struct Env<'p> {
    func: &'p FunctionDef,
    vars: HashMap<VarId, u32>,
    arrays: HashMap<VarId, MemId>,
    /// For inlined bodies: return variable and continuation block.
    ret: Option<(Option<u32>, BlockId)>,
}

impl<'p> Env<'p> {
    fn new(func: &'p FunctionDef) -> Env<'p> {
        Env {
            func,
            vars: HashMap::new(),
            arrays: HashMap::new(),
            ret: None,
        }
    }
}

struct Builder<'p> {
    prog: &'p TypedProgram,
    opts: LowerOptions,
    g: Cdfg,
    cur: BlockId,
    sealed: Vec<bool>,
    /// Phi ops per block, kept apart from the ordinary op list during construction.
    phis: Vec<Vec<OpId>>,
    defs: HashMap<(u32, BlockId), ValueId>,
    var_width: Vec<u8>,
    incomplete: HashMap<BlockId, Vec<(u32, OpId)>>,
    instances: HashMap<String, u32>,
    op_count: usize,
}

type LResult<T> = Result<T, MiddleError>;

impl<'p> Builder<'p> {
    fn new_block(&mut self) -> BlockId {
        self.sealed.push(false);
        self.phis.push(Vec::new());
        self.g.new_block()
    }

    fn new_var(&mut self, width: u8) -> u32 {
        self.var_width.push(width);
        self.var_width.len() as u32 - 1
    }

    fn write_var(&mut self, var: u32, b: BlockId, v: ValueId) {
        self.defs.insert((var, b), v);
    }

    fn read_var(&mut self, var: u32, b: BlockId) -> ValueId {
        if let Some(&v) = self.defs.get(&(var, b)) {
            return v;
        }
        let w = self.var_width[var as usize];
        let preds = self.g.block(b).preds.clone();
        let v = if !self.sealed[b.0 as usize] {
            let phi = self.new_phi(b, w);
            self.incomplete.entry(b).or_default().push((var, phi));
            self.g.result(phi)
        } else if preds.is_empty() {
            self.g.konst(0, w)
        } else if preds.len() == 1 {
            self.read_var(var, preds[0])
        } else {
            let phi = self.new_phi(b, w);
            let pv = self.g.result(phi);
            self.write_var(var, b, pv);
            self.add_phi_operands(var, phi);
            pv
        };
        self.write_var(var, b, v);
        v
    }

    fn new_phi(&mut self, b: BlockId, w: u8) -> OpId {
        let o = self.g.new_op(b, Opcode::Phi, Vec::new(), Some(w), Pos::default());
        self.phis[b.0 as usize].push(o);
        o
    }

    fn add_phi_operands(&mut self, var: u32, phi: OpId) {
        let b = self.g.op(phi).block;
        let preds = self.g.block(b).preds.clone();
        for p in preds {
            let v = self.read_var(var, p);
            self.g.op_mut(phi).args.push(v);
        }
    }

    fn seal(&mut self, b: BlockId) {
        if let Some(list) = self.incomplete.remove(&b) {
            for (var, phi) in list {
                self.add_phi_operands(var, phi);
            }
        }
        self.sealed[b.0 as usize] = true;
    }

    fn jump(&mut self, from: BlockId, to: BlockId) {
        self.g.blocks[from.0 as usize].term = Terminator::Jump(to);
        self.g.blocks[to.0 as usize].preds.push(from);
    }

    fn branch(&mut self, from: BlockId, cond: ValueId, then: BlockId, els: BlockId) {
        self.g.blocks[from.0 as usize].term = Terminator::Branch { cond, then, els };
        self.g.blocks[then.0 as usize].preds.push(from);
        self.g.blocks[els.0 as usize].preds.push(from);
    }

    /// Starts a fresh block with no predecessors after a return.
    fn dead_block(&mut self) {
        let b = self.new_block();
        self.seal(b);
        self.cur = b;
    }

    fn emit(&mut self, opcode: Opcode, args: Vec<ValueId>, width: Option<u8>, pos: Pos) -> LResult<Option<ValueId>> {
        self.op_count += 1;
        if self.op_count > self.opts.inline_budget {
            return Err(MiddleError::TooLarge(self.opts.inline_budget));
        }
        let o = self.g.push_op(self.cur, opcode, args, width, pos);
        Ok(self.g.op(o).result)
    }

    fn emit_v(&mut self, opcode: Opcode, args: Vec<ValueId>, width: u8, pos: Pos) -> LResult<ValueId> {
        Ok(self.emit(opcode, args, Some(width), pos)?.unwrap())
    }

    /// Creates memory objects for the local arrays of an activation of `env.func`.
    fn declare_locals(&mut self, env: &mut Env<'p>, instance: Option<&str>) {
        for (i, def) in env.func.vars.iter().enumerate() {
            if let VarType::Array { elem, len } = def.ty {
                let base = match instance {
                    Some(p) => format!("{}_{}", p, def.name),
                    None => def.name.clone(),
                };
                let mut name = base.clone();
                let mut n = 1;
                while self.g.mems.iter().any(|m| m.name == name) {
                    name = format!("{base}_{n}");
                    n += 1;
                }
                let mem = MemId(self.g.mems.len() as u32);
                self.g.mems.push(MemObject {
                    name,
                    kind: MemKind::Local {
                        len,
                        init: def.init.clone(),
                        read_only: def.read_only,
                    },
                    elem,
                    backing: Backing::OnChip,
                });
                env.arrays.insert(VarId(i as u32), mem);
            }
        }
    }

    fn var_key(&mut self, env: &Env<'p>, v: VarId) -> u32 {
        *env.vars.get(&v).expect("variable bound before use")
    }

    fn stmts(&mut self, env: &Env<'p>, ss: &'p [TStmt]) -> LResult<()> {
        // Env is shared immutably; scalar locals are bound lazily via `bind`.
        for s in ss {
            self.stmt(env, s)?;
        }
        Ok(())
    }

    fn stmt(&mut self, env: &Env<'p>, s: &'p TStmt) -> LResult<()> {
        match s {
            TStmt::Assign { var, value } => {
                let v = self.expr(env, value)?;
                let key = self.var_key(env, *var);
                let cur = self.cur;
                self.write_var(key, cur, v);
            }
            TStmt::Store { array, index, value } => {
                let idx = self.expr(env, index)?;
                let v = self.expr(env, value)?;
                let mem = env.arrays[array];
                let off = self.offset(mem, idx, value.pos)?;
                self.emit(Opcode::Store { mem }, vec![off, v], None, value.pos)?;
            }
            TStmt::InitArray { array } => {
                let def = env.func.var(*array);
                if !def.read_only {
                    let mem = env.arrays[array];
                    let init = def.init.clone().unwrap_or_default();
                    let elem = def.ty.elem();
                    let bytes = elem.bytes() as u64;
                    for (i, v) in init.iter().enumerate() {
                        let off = self.g.konst(i as u64 * bytes, 32);
                        let val = self.g.konst(*v, elem.width());
                        self.emit(Opcode::Store { mem }, vec![off, val], None, Pos::default())?;
                    }
                }
            }
            TStmt::If { cond, then, els } => {
                let c = self.expr(env, cond)?;
                let tb = self.new_block();
                let join = self.new_block();
                if els.is_empty() {
                    self.branch(self.cur, c, tb, join);
                    self.seal(tb);
                    self.cur = tb;
                    self.stmts(env, then)?;
                    self.jump(self.cur, join);
                } else {
                    let eb = self.new_block();
                    self.branch(self.cur, c, tb, eb);
                    self.seal(tb);
                    self.seal(eb);
                    self.cur = tb;
                    self.stmts(env, then)?;
                    self.jump(self.cur, join);
                    self.cur = eb;
                    self.stmts(env, els)?;
                    self.jump(self.cur, join);
                }
                self.seal(join);
                self.cur = join;
            }
            TStmt::While { cond, body } => {
                let header = self.new_block();
                self.jump(self.cur, header);
                self.cur = header;
                let c = self.expr(env, cond)?;
                let bb = self.new_block();
                let exit = self.new_block();
                self.branch(self.cur, c, bb, exit);
                self.seal(bb);
                self.cur = bb;
                self.stmts(env, body)?;
                self.jump(self.cur, header);
                self.seal(header);
                self.seal(exit);
                self.cur = exit;
            }
            TStmt::Call(e) => {
                self.expr(env, e)?;
            }
            TStmt::Return(v) => {
                let v = match v {
                    Some(e) => Some(self.expr(env, e)?),
                    None => None,
                };
                match env.ret {
                    None => {
                        let cur = self.cur;
                        self.g.blocks[cur.0 as usize].term = Terminator::Return(v);
                    }
                    Some((key, cont)) => {
                        if let (Some(k), Some(v)) = (key, v) {
                            let cur = self.cur;
                            self.write_var(k, cur, v);
                        }
                        self.jump(self.cur, cont);
                    }
                }
                self.dead_block();
            }
        }
        Ok(())
    }

    /// Byte offset of element `idx` of `mem`.
    fn offset(&mut self, mem: MemId, idx: ValueId, pos: Pos) -> LResult<ValueId> {
        let sh = self.g.mem(mem).elem_shift();
        if sh == 0 {
            return Ok(idx);
        }
        let k = self.g.konst(sh as u64, 32);
        self.emit_v(Opcode::Shl, vec![idx, k], 32, pos)
    }

    fn expr(&mut self, env: &Env<'p>, e: &'p TExpr) -> LResult<ValueId> {
        let w = e.ty.width();
        let pos = e.pos;
        match &e.kind {
            TExprKind::Const(c) => Ok(self.g.konst(*c, w)),
            TExprKind::Var(v) => {
                let key = self.var_key(env, *v);
                let cur = self.cur;
                Ok(self.read_var(key, cur))
            }
            TExprKind::Load { array, index } => {
                let idx = self.expr(env, index)?;
                let mem = env.arrays[array];
                let off = self.offset(mem, idx, pos)?;
                self.emit_v(Opcode::Load { mem }, vec![off], w, pos)
            }
            TExprKind::Unary(op, x) => {
                let a = self.expr(env, x)?;
                match op {
                    TUnOp::Neg => {
                        let z = self.g.konst(0, w);
                        self.emit_v(Opcode::Sub, vec![z, a], w, pos)
                    }
                    TUnOp::BitNot => {
                        let m = self.g.konst(u64::MAX, w);
                        self.emit_v(Opcode::Xor, vec![a, m], w, pos)
                    }
                    TUnOp::LNot => {
                        let z = self.g.konst(0, 1);
                        self.emit_v(Opcode::Eq, vec![a, z], 1, pos)
                    }
                }
            }
            TExprKind::Binary(op, l, r) => {
                let a = self.expr(env, l)?;
                let b = self.expr(env, r)?;
                let s = l.ty.signed();
                let (opc, args) = match op {
                    TBinOp::Add => (Opcode::Add, vec![a, b]),
                    TBinOp::Sub => (Opcode::Sub, vec![a, b]),
                    TBinOp::Mul => return self.mul(a, b, w, pos),
                    TBinOp::Div => (Opcode::Div { signed: s }, vec![a, b]),
                    TBinOp::Rem => (Opcode::Rem { signed: s }, vec![a, b]),
                    TBinOp::Shl => (Opcode::Shl, vec![a, b]),
                    TBinOp::Shr => (Opcode::Shr { arith: s }, vec![a, b]),
                    TBinOp::And | TBinOp::LAnd => (Opcode::And, vec![a, b]),
                    TBinOp::Or | TBinOp::LOr => (Opcode::Or, vec![a, b]),
                    TBinOp::Xor => (Opcode::Xor, vec![a, b]),
                    TBinOp::Eq => (Opcode::Eq, vec![a, b]),
                    TBinOp::Ne => (Opcode::Ne, vec![a, b]),
                    TBinOp::Lt => (Opcode::Lt { signed: s }, vec![a, b]),
                    TBinOp::Le => (Opcode::Le { signed: s }, vec![a, b]),
                    TBinOp::Gt => (Opcode::Lt { signed: s }, vec![b, a]),
                    TBinOp::Ge => (Opcode::Le { signed: s }, vec![b, a]),
                };
                self.emit_v(opc, args, w, pos)
            }
            TExprKind::Select(c, x, y) => {
                let c = self.expr(env, c)?;
                let a = self.expr(env, x)?;
                let b = self.expr(env, y)?;
                self.emit_v(Opcode::Mux, vec![c, a, b], w, pos)
            }
            TExprKind::Convert(x) => {
                let a = self.expr(env, x)?;
                self.convert(a, x.ty, e.ty, pos)
            }
            TExprKind::Call { func, args } => self.call(env, *func, args),
        }
    }

    fn convert(&mut self, a: ValueId, from: ScalarType, to: ScalarType, pos: Pos) -> LResult<ValueId> {
        let (fw, tw) = (from.width(), to.width());
        if to == ScalarType::Bool {
            if fw == 1 {
                return Ok(a);
            }
            let z = self.g.konst(0, fw);
            return self.emit_v(Opcode::Ne, vec![a, z], 1, pos);
        }
        if fw == tw {
            Ok(a)
        } else if fw < tw {
            self.emit_v(Opcode::Ext { signed: from.signed() }, vec![a], tw, pos)
        } else {
            self.emit_v(Opcode::Trunc, vec![a], tw, pos)
        }
    }

    /// Multiplication; products wider than the DSP width become a sum of
    /// half-width digit products, each computed at the native width.
    fn mul(&mut self, a: ValueId, b: ValueId, w: u8, pos: Pos) -> LResult<ValueId> {
        let n = self.opts.dsp_native_width;
        if w <= n || n < 2 {
            return self.emit_v(Opcode::Mul, vec![a, b], w, pos);
        }
        let d = n / 2;
        let k = w.div_ceil(d);
        let digits = |x: ValueId, this: &mut Self| -> LResult<Vec<ValueId>> {
            let mut out = Vec::new();
            for i in 0..k {
                let shifted = if i == 0 {
                    x
                } else {
                    let amt = this.g.konst((d * i) as u64, w);
                    this.emit_v(Opcode::Shr { arith: false }, vec![x, amt], w, pos)?
                };
                let t = this.emit_v(Opcode::Trunc, vec![shifted], d, pos)?;
                out.push(this.emit_v(Opcode::Ext { signed: false }, vec![t], n, pos)?);
            }
            Ok(out)
        };
        let da = digits(a, self)?;
        let db = digits(b, self)?;
        let mut acc: Option<ValueId> = None;
        for i in 0..k {
            for j in 0..(k - i) {
                let p = self.emit_v(Opcode::Mul, vec![da[i as usize], db[j as usize]], n, pos)?;
                let mut pw = self.emit_v(Opcode::Ext { signed: false }, vec![p], w, pos)?;
                let sh = d as u64 * (i + j) as u64;
                if sh > 0 {
                    let amt = self.g.konst(sh, w);
                    pw = self.emit_v(Opcode::Shl, vec![pw, amt], w, pos)?;
                }
                acc = Some(match acc {
                    None => pw,
                    Some(s) => self.emit_v(Opcode::Add, vec![s, pw], w, pos)?,
                });
            }
        }
        Ok(acc.unwrap())
    }

    fn call(&mut self, env: &Env<'p>, func: FuncId, args: &'p [TArg]) -> LResult<ValueId> {
        let callee = self.prog.function(func);
        let mut cenv = Env::new(callee);
        // evaluate arguments in the caller
        let mut scalars = Vec::new();
        for (a, &pv) in args.iter().zip(&callee.params) {
            match a {
                TArg::Scalar(x) => scalars.push((pv, self.expr(env, x)?)),
                TArg::Array(v) => {
                    cenv.arrays.insert(pv, env.arrays[v]);
                }
            }
        }
        let inst = self.instances.entry(callee.name.clone()).or_insert(0);
        let prefix = format!("{}{}", callee.name, inst);
        *inst += 1;
        self.declare_locals(&mut cenv, Some(&prefix));
        self.bind_scalars(&mut cenv);
        let cur = self.cur;
        for (pv, v) in scalars {
            let key = cenv.vars[&pv];
            self.write_var(key, cur, v);
        }
        let ret_key = callee.ret.map(|t| self.new_var(t.width()));
        let cont = self.new_block();
        cenv.ret = Some((ret_key, cont));
        self.stmts(&cenv, &callee.body)?;
        if let Some(k) = ret_key {
            let z = self.g.konst(0, self.var_width[k as usize]);
            let cur = self.cur;
            self.write_var(k, cur, z);
        }
        self.jump(self.cur, cont);
        self.seal(cont);
        self.cur = cont;
        Ok(match ret_key {
            Some(k) => self.read_var(k, cont),
            // void calls only appear as statements; the value is unused
            None => self.g.konst(0, 1),
        })
    }

    fn bind_scalars(&mut self, env: &mut Env<'p>) {
        for (i, def) in env.func.vars.iter().enumerate() {
            if let VarType::Scalar(t) = def.ty {
                if let Entry::Vacant(e) = env.vars.entry(VarId(i as u32)) {
                    e.insert(self.new_var(t.width()));
                }
            }
        }
    }

    /// Drops unreachable blocks, removes trivial phis, merges phi lists and
    /// renumbers the graph.
    fn finish(&mut self) {
        let g = &mut self.g;
        let reachable: HashSet<BlockId> = g.reverse_postorder().into_iter().collect();
        for b in 0..g.blocks.len() {
            let bid = BlockId(b as u32);
            if !reachable.contains(&bid) {
                continue;
            }
            let preds = g.blocks[b].preds.clone();
            let keep: Vec<usize> = (0..preds.len()).filter(|&i| reachable.contains(&preds[i])).collect();
            if keep.len() != preds.len() {
                g.blocks[b].preds = keep.iter().map(|&i| preds[i]).collect();
                for &phi in &self.phis[b] {
                    let args = g.ops[phi.0 as usize].args.clone();
                    g.ops[phi.0 as usize].args = keep.iter().map(|&i| args[i]).collect();
                }
            }
        }
        // trivial phi removal to fixpoint
        let mut repl: HashMap<ValueId, ValueId> = HashMap::new();
        fn resolve(repl: &HashMap<ValueId, ValueId>, mut v: ValueId) -> ValueId {
            while let Some(&n) = repl.get(&v) {
                v = n;
            }
            v
        }
        let mut dead: HashSet<OpId> = HashSet::new();
        loop {
            let mut changed = false;
            for b in 0..g.blocks.len() {
                if !reachable.contains(&BlockId(b as u32)) {
                    continue;
                }
                for &phi in &self.phis[b] {
                    if dead.contains(&phi) {
                        continue;
                    }
                    let me = g.ops[phi.0 as usize].result.unwrap();
                    let mut same: Option<ValueId> = None;
                    let mut trivial = true;
                    for &a in &g.ops[phi.0 as usize].args {
                        let a = resolve(&repl, a);
                        if a == me || Some(a) == same {
                            continue;
                        }
                        if same.is_some() {
                            trivial = false;
                            break;
                        }
                        same = Some(a);
                    }
                    if trivial {
                        let w = g.values[me.0 as usize].width;
                        let target = match same {
                            Some(s) => s,
                            None => g.konst(0, w),
                        };
                        repl.insert(me, target);
                        dead.insert(phi);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
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
        for b in 0..g.blocks.len() {
            let mut ops: Vec<OpId> = self.phis[b].iter().copied().filter(|p| !dead.contains(p)).collect();
            ops.extend(g.blocks[b].ops.iter().copied());
            g.blocks[b].ops = ops;
        }
        g.compact();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check, SourceUnit};

    fn lower(src: &str) -> Cdfg {
        let p = check(&SourceUnit::new("t.c", src), "f").unwrap();
        lower_to_cdfg(&p).unwrap()
    }

    fn count(g: &Cdfg, pred: impl Fn(Opcode) -> bool) -> usize {
        g.blocks.iter().flat_map(|b| &b.ops).filter(|&&o| pred(g.op(o).opcode)).count()
    }

    #[test]
    fn add_of_inputs() {
        let g = lower("int f(int a, int b){return a+b;}");
        assert_eq!(g.op_count(), 1);
        assert_eq!(g.blocks.len(), 1);
        assert_eq!(g.op(OpId(0)).opcode, Opcode::Add);
        assert!(matches!(g.blocks[0].term, Terminator::Return(Some(_))));
        assert_eq!(g.values.iter().filter(|v| matches!(v.def, ValueDef::Input(_))).count(), 2);
    }

    #[test]
    fn loop_header_has_two_phis() {
        let g = lower("int f(int* x){int s = 0; for (int i = 0; i < 4; i++) s += x[i]; return s;}");
        let header = g.block_ids().find(|&b| g.block(b).preds.len() == 2).expect("loop header");
        let phis = g.block(header).ops.iter().filter(|&&o| g.op(o).opcode == Opcode::Phi).count();
        assert_eq!(phis, 2);
        assert_eq!(count(&g, |o| matches!(o, Opcode::Load { .. })), 1);
    }

    #[test]
    fn calls_are_inlined_per_site() {
        let g = lower("int sq(int x){return x*x;} int inc(int x){return x+1;} int f(int a){return sq(a) + sq(inc(a));}");
        assert_eq!(count(&g, |o| o == Opcode::Mul), 2);
        assert_eq!(count(&g, |o| o == Opcode::Add), 2);
    }

    #[test]
    fn wide_multiply_decomposed() {
        let g = lower("int64_t f(int64_t a, int64_t b){return a*b;}");
        let muls: Vec<_> = g
            .blocks
            .iter()
            .flat_map(|b| &b.ops)
            .filter(|&&o| g.op(o).opcode == Opcode::Mul)
            .collect();
        assert_eq!(muls.len(), 10);
        assert!(muls.iter().all(|&&o| g.width(g.result(o)) == 32));
    }

    #[test]
    fn inline_budget() {
        let p = check(&SourceUnit::new("t.c", "int f(int a){return a+a+a+a+a;}"), "f").unwrap();
        let e = lower_with(
            &p,
            LowerOptions {
                inline_budget: 2,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert_eq!(e.to_string(), "program too large after inlining (budget 2 ops)");
    }

    #[test]
    fn local_arrays_become_onchip_objects() {
        let g = lower("int f(int* p){int t[16]; t[0] = p[0]; return t[0];}");
        assert_eq!(g.mems.len(), 2);
        assert_eq!(g.mems[0].backing, Backing::Axi(0));
        assert_eq!(g.mems[1].backing, Backing::OnChip);
        assert_eq!(g.mems[1].local_len(), Some(16));
    }
}
