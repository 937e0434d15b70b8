// SPDX-License-Identifier: Apache-2.0

//! Type checking: resolves names, assigns a type to every expression, inserts
//! explicit conversions, and verifies the call graph is acyclic.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::{self, BinOp, Expr, ExprKind, Init, LValue, Program, Stmt, StmtKind};
use super::typed::*;
use super::types::{Diagnostic, Pos, ScalarType};
use crate::semantics::{mask, resize};

/// Upper bound on the element count of a local array.
pub const MAX_ARRAY_LEN: i128 = 1 << 16;

pub fn typecheck(prog: &Program, top: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
    let path = prog.path.as_str();
    let mut sigs: HashMap<&str, (FuncId, &ast::Function)> = HashMap::new();
    let mut diags = Vec::new();
    for (i, f) in prog.functions.iter().enumerate() {
        if sigs.insert(&f.name, (FuncId(i as u32), f)).is_some() {
            diags.push(Diagnostic::error(path, f.pos, format!("redefinition of function '{}'", f.name)));
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    if !sigs.contains_key(top) {
        let pos = Pos::new(1, 1);
        return Err(vec![Diagnostic::error(path, pos, format!("top function not found: {top}"))]);
    }

    let mut functions = Vec::new();
    let mut calls: Vec<BTreeSet<u32>> = Vec::new();
    for f in &prog.functions {
        let mut cx = FnChecker {
            path,
            sigs: &sigs,
            vars: Vec::new(),
            params: Vec::new(),
            scopes: vec![HashMap::new()],
            ret: f.ret,
            calls: BTreeSet::new(),
            written: HashSet::new(),
            diags: Vec::new(),
        };
        match cx.function(f) {
            Ok(def) => {
                functions.push(def);
                calls.push(cx.calls);
            }
            Err(d) => diags.push(d),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    if let Some(cycle) = find_cycle(&calls) {
        let names: Vec<&str> = cycle.iter().map(|&i| prog.functions[i as usize].name.as_str()).collect();
        let first = &prog.functions[cycle[0] as usize];
        return Err(vec![Diagnostic::error(
            path,
            first.pos,
            format!("recursive call cycle: {}", names.join(" -> ")),
        )]);
    }
    Ok(TypedProgram {
        functions,
        top: top.to_string(),
    })
}

/// Returns the functions along one call cycle (first element repeated at the end
/// only for cycles longer than one).
fn find_cycle(calls: &[BTreeSet<u32>]) -> Option<Vec<u32>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    fn dfs(n: u32, calls: &[BTreeSet<u32>], mark: &mut [Mark], stack: &mut Vec<u32>) -> Option<Vec<u32>> {
        mark[n as usize] = Mark::Grey;
        stack.push(n);
        for &m in &calls[n as usize] {
            match mark[m as usize] {
                Mark::Grey => {
                    let start = stack.iter().position(|&x| x == m).unwrap();
                    let mut cyc = stack[start..].to_vec();
                    if cyc.len() > 1 {
                        cyc.push(m);
                    }
                    return Some(cyc);
                }
                Mark::White => {
                    if let Some(c) = dfs(m, calls, mark, stack) {
                        return Some(c);
                    }
                }
                Mark::Black => {}
            }
        }
        stack.pop();
        mark[n as usize] = Mark::Black;
        None
    }
    let mut mark = vec![Mark::White; calls.len()];
    for n in 0..calls.len() as u32 {
        if mark[n as usize] == Mark::White {
            let mut stack = Vec::new();
            if let Some(c) = dfs(n, calls, &mut mark, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}

/// Sign- or zero-extends `bits` of type `from` to 64 bits.
pub fn extend(bits: u64, from: ScalarType) -> u64 {
    resize(bits, from.width(), from.signed(), 64)
}

/// Converts a constant between scalar types with MiniC conversion rules.
pub fn convert_const(bits: u64, from: ScalarType, to: ScalarType) -> u64 {
    if to == ScalarType::Bool {
        return (bits & mask(from.width()) != 0) as u64;
    }
    extend(bits, from) & mask(to.width())
}

/// Arithmetic view of a type: `bool` participates as `u8`.
fn arith(t: ScalarType) -> ScalarType {
    if t == ScalarType::Bool {
        ScalarType::U8
    } else {
        t
    }
}

/// Both operands widen to the wider type; equal widths with mixed signedness are unsigned.
pub fn common_type(a: ScalarType, b: ScalarType) -> ScalarType {
    let (a, b) = (arith(a), arith(b));
    if a.width() != b.width() {
        return if a.width() > b.width() { a } else { b };
    }
    if a.signed() && b.signed() {
        a
    } else {
        ScalarType::from_parts(a.width(), false)
    }
}

pub fn convert(e: TExpr, to: ScalarType) -> TExpr {
    if e.ty == to {
        return e;
    }
    if let TExprKind::Const(c) = e.kind {
        return TExpr {
            kind: TExprKind::Const(convert_const(c, e.ty, to)),
            ty: to,
            pos: e.pos,
        };
    }
    let pos = e.pos;
    TExpr {
        kind: TExprKind::Convert(Box::new(e)),
        ty: to,
        pos,
    }
}

struct FnChecker<'a> {
    path: &'a str,
    sigs: &'a HashMap<&'a str, (FuncId, &'a ast::Function)>,
    vars: Vec<VarDef>,
    params: Vec<VarId>,
    scopes: Vec<HashMap<String, VarId>>,
    ret: Option<ScalarType>,
    calls: BTreeSet<u32>,
    written: HashSet<VarId>,
    diags: Vec<Diagnostic>,
}

type CResult<T> = Result<T, Diagnostic>;

impl<'a> FnChecker<'a> {
    fn err<T>(&self, pos: Pos, msg: impl Into<String>) -> CResult<T> {
        Err(Diagnostic::error(self.path, pos, msg))
    }

    fn declare(&mut self, name: &str, ty: VarType, init: Option<Vec<u64>>, pos: Pos) -> CResult<VarId> {
        if self.scopes.last().unwrap().contains_key(name) {
            return self.err(pos, format!("redeclaration of '{name}'"));
        }
        if self.sigs.contains_key(name) {
            return self.err(pos, format!("'{name}' shadows a function"));
        }
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarDef {
            name: name.to_string(),
            ty,
            init,
            read_only: false,
        });
        self.scopes.last_mut().unwrap().insert(name.to_string(), id);
        Ok(id)
    }

    fn lookup(&self, name: &str, pos: Pos) -> CResult<VarId> {
        for s in self.scopes.iter().rev() {
            if let Some(&v) = s.get(name) {
                return Ok(v);
            }
        }
        self.err(pos, format!("undefined identifier: {name}"))
    }

    fn function(&mut self, f: &ast::Function) -> CResult<FunctionDef> {
        for p in &f.params {
            let ty = if p.is_array {
                VarType::ArrayRef(p.ty)
            } else {
                VarType::Scalar(p.ty)
            };
            if self.scopes[0].contains_key(&p.name) {
                return self.err(p.pos, format!("duplicate parameter name '{}'", p.name));
            }
            let id = self.declare(&p.name, ty, None, p.pos)?;
            self.params.push(id);
        }
        self.scopes.push(HashMap::new());
        let body = self.stmts(&f.body)?;
        self.scopes.pop();
        if let Some(d) = self.diags.first() {
            return Err(d.clone());
        }
        let mut vars = std::mem::take(&mut self.vars);
        for (i, v) in vars.iter_mut().enumerate() {
            if matches!(v.ty, VarType::Array { .. }) && !self.written.contains(&VarId(i as u32)) && v.init.is_some() {
                v.read_only = true;
            }
        }
        Ok(FunctionDef {
            name: f.name.clone(),
            params: std::mem::take(&mut self.params),
            vars,
            body,
            ret: f.ret,
            pos: f.pos,
        })
    }

    fn stmts(&mut self, ss: &[Stmt]) -> CResult<Vec<TStmt>> {
        let mut out = Vec::new();
        for s in ss {
            self.stmt(s, &mut out)?;
        }
        Ok(out)
    }

    fn scoped(&mut self, ss: &[Stmt]) -> CResult<Vec<TStmt>> {
        self.scopes.push(HashMap::new());
        let r = self.stmts(ss);
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, s: &Stmt, out: &mut Vec<TStmt>) -> CResult<()> {
        match &s.kind {
            StmtKind::Decl { name, ty, array_len, init } => match array_len {
                None => {
                    let value = match init {
                        None => TExpr {
                            kind: TExprKind::Const(0),
                            ty: *ty,
                            pos: s.pos,
                        },
                        Some(Init::Scalar(e)) => {
                            let e = self.expr(e)?;
                            convert(e, *ty)
                        }
                        Some(Init::List(_)) => return self.err(s.pos, format!("type mismatch: initializer list for scalar '{name}'")),
                    };
                    // the initializer is checked before the name comes into scope
                    let var = self.declare(name, VarType::Scalar(*ty), None, s.pos)?;
                    out.push(TStmt::Assign { var, value });
                }
                Some(len_expr) => {
                    let len = match const_eval(len_expr) {
                        Some(n) if (1..=MAX_ARRAY_LEN).contains(&n) => n as u32,
                        Some(n) => return self.err(len_expr.pos, format!("array bound out of range: {n}")),
                        None => return self.err(len_expr.pos, "array bound not a constant"),
                    };
                    let init_vals = match init {
                        None => None,
                        Some(Init::List(items)) => {
                            if items.len() > len as usize {
                                return self.err(s.pos, format!("too many initializers for '{name}'"));
                            }
                            let mut vals = vec![0u64; len as usize];
                            for (i, it) in items.iter().enumerate() {
                                let v = match const_eval(it) {
                                    Some(v) => v,
                                    None => return self.err(it.pos, "array initializer not a constant"),
                                };
                                vals[i] = convert_const(v as u64, ScalarType::I64, *ty);
                            }
                            Some(vals)
                        }
                        Some(Init::Scalar(_)) => return self.err(s.pos, format!("type mismatch: scalar initializer for array '{name}'")),
                    };
                    let has_init = init_vals.is_some();
                    let var = self.declare(name, VarType::Array { elem: *ty, len }, init_vals, s.pos)?;
                    if has_init {
                        out.push(TStmt::InitArray { array: var });
                    }
                }
            },
            StmtKind::Assign { target, op, value } => {
                let value = self.expr(value)?;
                self.assign(target, *op, value, s.pos, out)?;
            }
            StmtKind::IncDec { target, inc } => {
                let one = TExpr {
                    kind: TExprKind::Const(1),
                    ty: ScalarType::I32,
                    pos: s.pos,
                };
                let op = if *inc { BinOp::Add } else { BinOp::Sub };
                self.assign(target, Some(op), one, s.pos, out)?;
            }
            StmtKind::Expr(e) => {
                let ExprKind::Call(name, args) = &e.kind else {
                    return self.err(s.pos, "expression statement must be a call");
                };
                let call = self.call(name, args, e.pos, true)?;
                out.push(TStmt::Call(call));
            }
            StmtKind::If { cond, then, els } => {
                let cond = self.cond(cond)?;
                let then = self.scoped(then)?;
                let els = match els {
                    Some(e) => self.scoped(e)?,
                    None => Vec::new(),
                };
                out.push(TStmt::If { cond, then, els });
            }
            StmtKind::While { cond, body } => {
                let cond = self.cond(cond)?;
                let body = self.scoped(body)?;
                out.push(TStmt::While { cond, body });
            }
            StmtKind::For { init, cond, step, body } => {
                self.scopes.push(HashMap::new());
                let r = (|| {
                    let mut pre = Vec::new();
                    if let Some(i) = init {
                        self.stmt(i, &mut pre)?;
                    }
                    let cond = match cond {
                        Some(c) => self.cond(c)?,
                        None => TExpr {
                            kind: TExprKind::Const(1),
                            ty: ScalarType::Bool,
                            pos: s.pos,
                        },
                    };
                    let mut body = self.scoped(body)?;
                    if let Some(st) = step {
                        self.stmt(st, &mut body)?;
                    }
                    pre.push(TStmt::While { cond, body });
                    Ok(pre)
                })();
                self.scopes.pop();
                out.extend(r?);
            }
            StmtKind::Block(b) => {
                let b = self.scoped(b)?;
                out.extend(b);
            }
            StmtKind::Return(v) => {
                let v = match (v, self.ret) {
                    (None, None) => None,
                    (Some(e), Some(t)) => Some(convert(self.expr(e)?, t)),
                    (None, Some(_)) => return self.err(s.pos, "missing return value"),
                    (Some(_), None) => return self.err(s.pos, "return value in void function"),
                };
                out.push(TStmt::Return(v));
            }
        }
        Ok(())
    }

    fn assign(&mut self, target: &LValue, op: Option<BinOp>, value: TExpr, pos: Pos, out: &mut Vec<TStmt>) -> CResult<()> {
        match target {
            LValue::Var(name) => {
                let var = self.lookup(name, pos)?;
                let VarType::Scalar(ty) = self.vars[var.0 as usize].ty else {
                    return self.err(pos, format!("type mismatch: cannot assign to array '{name}'"));
                };
                let value = match op {
                    None => value,
                    Some(op) => {
                        let cur = TExpr {
                            kind: TExprKind::Var(var),
                            ty,
                            pos,
                        };
                        self.binary(op, cur, value, pos)?
                    }
                };
                out.push(TStmt::Assign {
                    var,
                    value: convert(value, ty),
                });
            }
            LValue::Index(name, idx) => {
                let array = self.lookup(name, pos)?;
                let vt = self.vars[array.0 as usize].ty;
                if !vt.is_array() {
                    return self.err(pos, format!("type mismatch: '{name}' is not an array"));
                }
                let elem = vt.elem();
                self.written.insert(array);
                let index = convert(self.expr(idx)?, ScalarType::U32);
                let value = match op {
                    None => value,
                    Some(op) => {
                        let cur = TExpr {
                            kind: TExprKind::Load {
                                array,
                                index: Box::new(index.clone()),
                            },
                            ty: elem,
                            pos,
                        };
                        self.binary(op, cur, value, pos)?
                    }
                };
                out.push(TStmt::Store {
                    array,
                    index,
                    value: convert(value, elem),
                });
            }
        }
        Ok(())
    }

    fn cond(&mut self, e: &Expr) -> CResult<TExpr> {
        let e = self.expr(e)?;
        Ok(convert(e, ScalarType::Bool))
    }

    fn expr(&mut self, e: &Expr) -> CResult<TExpr> {
        let pos = e.pos;
        match &e.kind {
            ExprKind::Int(lit) => {
                let v = lit.value;
                let ty = if lit.unsigned {
                    if v <= u32::MAX as u64 && !lit.long {
                        ScalarType::U32
                    } else {
                        ScalarType::U64
                    }
                } else if lit.long {
                    if v <= i64::MAX as u64 {
                        ScalarType::I64
                    } else {
                        ScalarType::U64
                    }
                } else if v <= i32::MAX as u64 {
                    ScalarType::I32
                } else if lit.hex && v <= u32::MAX as u64 {
                    ScalarType::U32
                } else if v <= i64::MAX as u64 {
                    ScalarType::I64
                } else {
                    ScalarType::U64
                };
                Ok(TExpr {
                    kind: TExprKind::Const(v),
                    ty,
                    pos,
                })
            }
            ExprKind::Var(name) => {
                let v = self.lookup(name, pos)?;
                match self.vars[v.0 as usize].ty {
                    VarType::Scalar(ty) => Ok(TExpr {
                        kind: TExprKind::Var(v),
                        ty,
                        pos,
                    }),
                    _ => self.err(pos, format!("type mismatch: array '{name}' used as a scalar")),
                }
            }
            ExprKind::Index(name, idx) => {
                let array = self.lookup(name, pos)?;
                let vt = self.vars[array.0 as usize].ty;
                if !vt.is_array() {
                    return self.err(pos, format!("type mismatch: '{name}' is not an array"));
                }
                let index = convert(self.expr(idx)?, ScalarType::U32);
                Ok(TExpr {
                    kind: TExprKind::Load {
                        array,
                        index: Box::new(index),
                    },
                    ty: vt.elem(),
                    pos,
                })
            }
            ExprKind::Unary(op, x) => {
                let x = self.expr(x)?;
                let op = TUnOp::from_ast(*op);
                let ty = match op {
                    TUnOp::LNot => ScalarType::Bool,
                    _ => arith(x.ty),
                };
                let x = match op {
                    TUnOp::LNot => convert(x, ScalarType::Bool),
                    _ => convert(x, ty),
                };
                Ok(fold(TExpr {
                    kind: TExprKind::Unary(op, Box::new(x)),
                    ty,
                    pos,
                }))
            }
            ExprKind::Binary(op, l, r) => {
                let l = self.expr(l)?;
                let r = self.expr(r)?;
                self.binary(*op, l, r, pos)
            }
            ExprKind::Ternary(c, a, b) => {
                let c = self.cond(c)?;
                let a = self.expr(a)?;
                let b = self.expr(b)?;
                let ty = if a.ty == b.ty { a.ty } else { common_type(a.ty, b.ty) };
                Ok(TExpr {
                    kind: TExprKind::Select(Box::new(c), Box::new(convert(a, ty)), Box::new(convert(b, ty))),
                    ty,
                    pos,
                })
            }
            ExprKind::Call(name, args) => self.call(name, args, pos, false),
            ExprKind::Cast(ty, x) => {
                let x = self.expr(x)?;
                Ok(convert(x, *ty))
            }
        }
    }

    fn binary(&mut self, op: BinOp, l: TExpr, r: TExpr, pos: Pos) -> CResult<TExpr> {
        let top = TBinOp::from_ast(op);
        let (l, r, ty) = match op {
            BinOp::Shl | BinOp::Shr => {
                let lt = arith(l.ty);
                let rt = arith(r.ty);
                (convert(l, lt), convert(r, rt), lt)
            }
            BinOp::LAnd | BinOp::LOr => (convert(l, ScalarType::Bool), convert(r, ScalarType::Bool), ScalarType::Bool),
            BinOp::And | BinOp::Or | BinOp::Xor if l.ty == ScalarType::Bool && r.ty == ScalarType::Bool => (l, r, ScalarType::Bool),
            _ => {
                let c = common_type(l.ty, r.ty);
                let res = if op.is_comparison() { ScalarType::Bool } else { c };
                (convert(l, c), convert(r, c), res)
            }
        };
        Ok(fold(TExpr {
            kind: TExprKind::Binary(top, Box::new(l), Box::new(r)),
            ty,
            pos,
        }))
    }

    fn call(&mut self, name: &str, args: &[Expr], pos: Pos, as_stmt: bool) -> CResult<TExpr> {
        let Some(&(fid, f)) = self.sigs.get(name) else {
            if matches!(name, "malloc" | "calloc" | "realloc" | "free") {
                return self.err(pos, "unsupported construct: dynamic allocation");
            }
            return self.err(pos, format!("undefined identifier: {name}"));
        };
        if f.params.len() != args.len() {
            return self.err(
                pos,
                format!("type mismatch: '{}' expects {} arguments, got {}", name, f.params.len(), args.len()),
            );
        }
        if f.ret.is_none() && !as_stmt {
            return self.err(pos, format!("type mismatch: void function '{name}' used as a value"));
        }
        let mut targs = Vec::new();
        for (p, a) in f.params.iter().zip(args) {
            if p.is_array {
                let ExprKind::Var(an) = &a.kind else {
                    return self.err(a.pos, format!("type mismatch: parameter '{}' expects an array", p.name));
                };
                let av = self.lookup(an, a.pos)?;
                let vt = self.vars[av.0 as usize].ty;
                if !vt.is_array() || vt.elem() != p.ty {
                    return self.err(a.pos, format!("type mismatch: parameter '{}' expects {}[]", p.name, p.ty));
                }
                // the callee may write through the reference
                self.written.insert(av);
                targs.push(TArg::Array(av));
            } else {
                let e = self.expr(a)?;
                targs.push(TArg::Scalar(convert(e, p.ty)));
            }
        }
        self.calls.insert(fid.0);
        Ok(TExpr {
            kind: TExprKind::Call { func: fid, args: targs },
            ty: f.ret.unwrap_or(ScalarType::Bool),
            pos,
        })
    }
}

/// Folds operators over constant operands so that literal arithmetic in the
/// typed tree stays compact.
fn fold(e: TExpr) -> TExpr {
    use crate::semantics::{eval_binary, eval_unary};
    match &e.kind {
        TExprKind::Unary(op, x) => {
            if let TExprKind::Const(c) = x.kind {
                return TExpr {
                    kind: TExprKind::Const(eval_unary(*op, c, x.ty)),
                    ty: e.ty,
                    pos: e.pos,
                };
            }
        }
        TExprKind::Binary(op, l, r) => {
            if let (TExprKind::Const(a), TExprKind::Const(b)) = (&l.kind, &r.kind) {
                return TExpr {
                    kind: TExprKind::Const(eval_binary(*op, *a, *b, l.ty, r.ty)),
                    ty: e.ty,
                    pos: e.pos,
                };
            }
        }
        _ => {}
    }
    e
}

/// Evaluates an integer constant expression (array bounds and initializers).
pub fn const_eval(e: &Expr) -> Option<i128> {
    Some(match &e.kind {
        ExprKind::Int(l) => l.value as i128,
        ExprKind::Unary(ast::UnOp::Neg, x) => -const_eval(x)?,
        ExprKind::Unary(ast::UnOp::BitNot, x) => !const_eval(x)?,
        ExprKind::Cast(_, x) => const_eval(x)?,
        ExprKind::Binary(op, l, r) => {
            let (a, b) = (const_eval(l)?, const_eval(r)?);
            match op {
                BinOp::Add => a.checked_add(b)?,
                BinOp::Sub => a.checked_sub(b)?,
                BinOp::Mul => a.checked_mul(b)?,
                BinOp::Div => a.checked_div(b)?,
                BinOp::Rem => a.checked_rem(b)?,
                BinOp::Shl if (0..64).contains(&b) => a.checked_shl(b as u32)?,
                BinOp::Shr if (0..64).contains(&b) => a >> b,
                BinOp::And => a & b,
                BinOp::Or => a | b,
                BinOp::Xor => a ^ b,
                _ => return None,
            }
        }
        _ => return None,
    })
}

/// Verifies the typing discipline of a checked program: operands of every
/// operator agree with the rules the checker applies.
pub fn verify_types(p: &TypedProgram) -> Result<(), String> {
    fn expr(f: &FunctionDef, p: &TypedProgram, e: &TExpr) -> Result<(), String> {
        match &e.kind {
            TExprKind::Const(c) => {
                if *c & !mask(e.ty.width()) != 0 {
                    return Err(format!("constant {c:#x} exceeds {}", e.ty));
                }
            }
            TExprKind::Var(v) => {
                if f.var(*v).ty != VarType::Scalar(e.ty) {
                    return Err(format!("variable {} typed {}", f.var(*v).name, e.ty));
                }
            }
            TExprKind::Load { array, index } => {
                expr(f, p, index)?;
                if index.ty != ScalarType::U32 || f.var(*array).ty.elem() != e.ty {
                    return Err("load typing".into());
                }
            }
            TExprKind::Unary(op, x) => {
                expr(f, p, x)?;
                let ok = match op {
                    TUnOp::LNot => x.ty == ScalarType::Bool && e.ty == ScalarType::Bool,
                    _ => x.ty == e.ty,
                };
                if !ok {
                    return Err("unary typing".into());
                }
            }
            TExprKind::Binary(op, l, r) => {
                expr(f, p, l)?;
                expr(f, p, r)?;
                let ok = match op {
                    TBinOp::Shl | TBinOp::Shr => l.ty == e.ty,
                    TBinOp::Eq | TBinOp::Ne | TBinOp::Lt | TBinOp::Le | TBinOp::Gt | TBinOp::Ge => l.ty == r.ty && e.ty == ScalarType::Bool,
                    _ => l.ty == r.ty && l.ty == e.ty,
                };
                if !ok {
                    return Err(format!("binary {op:?} typing"));
                }
            }
            TExprKind::Select(c, a, b) => {
                expr(f, p, c)?;
                expr(f, p, a)?;
                expr(f, p, b)?;
                if c.ty != ScalarType::Bool || a.ty != e.ty || b.ty != e.ty {
                    return Err("select typing".into());
                }
            }
            TExprKind::Convert(x) => expr(f, p, x)?,
            TExprKind::Call { func, args } => {
                let callee = p.function(*func);
                for (a, (_, pt)) in args.iter().zip(callee.param_types()) {
                    match (a, pt) {
                        (TArg::Scalar(x), ParamType::Scalar(t)) => {
                            expr(f, p, x)?;
                            if x.ty != t {
                                return Err("argument typing".into());
                            }
                        }
                        (TArg::Array(v), ParamType::ArrayRef(t)) => {
                            if f.var(*v).ty.elem() != t {
                                return Err("array argument typing".into());
                            }
                        }
                        _ => return Err("argument kind".into()),
                    }
                }
            }
        }
        Ok(())
    }
    fn stmts(f: &FunctionDef, p: &TypedProgram, ss: &[TStmt]) -> Result<(), String> {
        for s in ss {
            match s {
                TStmt::Assign { var, value } => {
                    expr(f, p, value)?;
                    if f.var(*var).ty != VarType::Scalar(value.ty) {
                        return Err("assign typing".into());
                    }
                }
                TStmt::Store { array, index, value } => {
                    expr(f, p, index)?;
                    expr(f, p, value)?;
                    if f.var(*array).ty.elem() != value.ty || index.ty != ScalarType::U32 {
                        return Err("store typing".into());
                    }
                }
                TStmt::InitArray { .. } => {}
                TStmt::If { cond, then, els } => {
                    expr(f, p, cond)?;
                    stmts(f, p, then)?;
                    stmts(f, p, els)?;
                }
                TStmt::While { cond, body } => {
                    expr(f, p, cond)?;
                    if cond.ty != ScalarType::Bool {
                        return Err("condition typing".into());
                    }
                    stmts(f, p, body)?;
                }
                TStmt::Call(e) => expr(f, p, e)?,
                TStmt::Return(v) => {
                    if let Some(v) = v {
                        expr(f, p, v)?;
                        if Some(v.ty) != f.ret {
                            return Err("return typing".into());
                        }
                    }
                }
            }
        }
        Ok(())
    }
    for f in &p.functions {
        stmts(f, p, &f.body).map_err(|e| format!("{}: {}", f.name, e))?;
    }
    Ok(())
}
