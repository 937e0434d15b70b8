// SPDX-License-Identifier: Apache-2.0

//! Golden reference interpreter over the typed program.

use crate::frontend::typed::*;
use crate::frontend::types::ScalarType;
use crate::semantics::{eval_binary, eval_unary, mask, resize};

use super::memory::MemoryImage;
use super::SimError;

/// Default bound on evaluated statements and expressions.
pub const DEFAULT_STEP_BUDGET: u64 = 100_000_000;

/// Value supplied for one top-level parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgValue {
    Scalar(u64),
    /// Base byte address of an array parameter within the memory of `bundle`.
    Array {
        bundle: u32,
        base: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpResult {
    /// Width-masked return value; `None` for void functions.
    pub ret: Option<u64>,
    /// Number of divisions or remainders evaluated with a zero divisor.
    pub div_by_zero: u64,
    pub steps: u64,
}

#[derive(Debug, Clone, Copy)]
enum ArrRef {
    Local { frame: usize, var: VarId },
    Ext { bundle: u32, base: u32 },
}

#[derive(Debug, Clone)]
enum Slot {
    Scalar(u64),
    Array(Vec<u64>),
    Ref(ArrRef),
}

enum Flow {
    Normal,
    Return(Option<u64>),
}

struct Interp<'a> {
    prog: &'a TypedProgram,
    mems: &'a mut [MemoryImage],
    frames: Vec<Vec<Slot>>,
    steps: u64,
    budget: u64,
    div_by_zero: u64,
}

pub fn interpret(prog: &TypedProgram, args: &[ArgValue], mems: &mut [MemoryImage]) -> Result<InterpResult, SimError> {
    interpret_with_budget(prog, args, mems, DEFAULT_STEP_BUDGET)
}

pub fn interpret_with_budget(
    prog: &TypedProgram,
    args: &[ArgValue],
    mems: &mut [MemoryImage],
    budget: u64,
) -> Result<InterpResult, SimError> {
    let top = prog.top_function();
    if args.len() != top.params.len() {
        return Err(SimError::Vector(format!(
            "expected {} arguments, got {}",
            top.params.len(),
            args.len()
        )));
    }
    let mut slots = Vec::new();
    for (&a, (name, pt)) in args.iter().zip(top.param_types()) {
        slots.push(match (a, pt) {
            (ArgValue::Scalar(v), ParamType::Scalar(t)) => Slot::Scalar(v & mask(t.width())),
            (ArgValue::Array { bundle, base }, ParamType::ArrayRef(_)) => {
                if bundle as usize >= mems.len() {
                    return Err(SimError::Vector(format!("no memory for bundle {bundle}")));
                }
                Slot::Ref(ArrRef::Ext { bundle, base })
            }
            _ => return Err(SimError::Vector(format!("argument kind mismatch for '{name}'"))),
        });
    }
    let mut it = Interp {
        prog,
        mems,
        frames: Vec::new(),
        steps: 0,
        budget,
        div_by_zero: 0,
    };
    let ret = it.call(top, slots)?;
    Ok(InterpResult {
        ret,
        div_by_zero: it.div_by_zero,
        steps: it.steps,
    })
}

impl<'a> Interp<'a> {
    fn tick(&mut self) -> Result<(), SimError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(SimError::StepBudget(self.budget));
        }
        Ok(())
    }

    fn call(&mut self, f: &'a FunctionDef, params: Vec<Slot>) -> Result<Option<u64>, SimError> {
        let mut slots = params;
        for v in f.locals() {
            slots.push(match v.ty {
                VarType::Scalar(_) => Slot::Scalar(0),
                VarType::Array { len, .. } => Slot::Array(v.init.clone().unwrap_or_else(|| vec![0; len as usize])),
                VarType::ArrayRef(_) => unreachable!("locals are never references"),
            });
        }
        self.frames.push(slots);
        let flow = self.stmts(f, &f.body);
        self.frames.pop();
        match flow? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(f.ret.map(|_| 0)),
        }
    }

    fn frame(&mut self) -> &mut Vec<Slot> {
        self.frames.last_mut().unwrap()
    }

    fn stmts(&mut self, f: &'a FunctionDef, ss: &'a [TStmt]) -> Result<Flow, SimError> {
        for s in ss {
            if let Flow::Return(v) = self.stmt(f, s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, f: &'a FunctionDef, s: &'a TStmt) -> Result<Flow, SimError> {
        self.tick()?;
        match s {
            TStmt::Assign { var, value } => {
                let v = self.expr(f, value)?;
                self.frame()[var.0 as usize] = Slot::Scalar(v);
            }
            TStmt::Store { array, index, value } => {
                let i = self.expr(f, index)?;
                let v = self.expr(f, value)?;
                let r = self.array_ref(*array);
                self.store(f, r, *array, i, v)?;
            }
            TStmt::InitArray { array } => {
                let init = f.var(*array).init.clone().expect("initializer present");
                self.frame()[array.0 as usize] = Slot::Array(init);
            }
            TStmt::If { cond, then, els } => {
                let c = self.expr(f, cond)?;
                return self.stmts(f, if c != 0 { then } else { els });
            }
            TStmt::While { cond, body } => loop {
                self.tick()?;
                if self.expr(f, cond)? == 0 {
                    break;
                }
                if let Flow::Return(v) = self.stmts(f, body)? {
                    return Ok(Flow::Return(v));
                }
            },
            TStmt::Call(e) => {
                self.expr(f, e)?;
            }
            TStmt::Return(v) => {
                let v = match v {
                    Some(e) => Some(self.expr(f, e)?),
                    None => None,
                };
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn array_ref(&self, var: VarId) -> ArrRef {
        let fi = self.frames.len() - 1;
        match &self.frames[fi][var.0 as usize] {
            Slot::Array(_) => ArrRef::Local { frame: fi, var },
            Slot::Ref(r) => *r,
            Slot::Scalar(_) => unreachable!("typecheck guarantees an array"),
        }
    }

    fn load(&mut self, elem: ScalarType, r: ArrRef, name: &str, i: u64) -> Result<u64, SimError> {
        match r {
            ArrRef::Local { frame, var } => {
                let Slot::Array(data) = &self.frames[frame][var.0 as usize] else {
                    unreachable!()
                };
                data.get(i as usize)
                    .copied()
                    .ok_or_else(|| SimError::OutOfBounds(name.to_string(), i))
            }
            ArrRef::Ext { bundle, base } => {
                let n = elem.bytes() as u32;
                let addr = base.wrapping_add((i as u32).wrapping_mul(n));
                Ok(self.mems[bundle as usize].read(addr, n) & mask(elem.width()))
            }
        }
    }

    fn store(&mut self, f: &FunctionDef, r: ArrRef, array: VarId, i: u64, v: u64) -> Result<(), SimError> {
        let elem = f.var(array).ty.elem();
        match r {
            ArrRef::Local { frame, var } => {
                let Slot::Array(data) = &mut self.frames[frame][var.0 as usize] else {
                    unreachable!()
                };
                match data.get_mut(i as usize) {
                    Some(slot) => *slot = v,
                    None => return Err(SimError::OutOfBounds(f.var(array).name.clone(), i)),
                }
            }
            ArrRef::Ext { bundle, base } => {
                let n = elem.bytes() as u32;
                let addr = base.wrapping_add((i as u32).wrapping_mul(n));
                self.mems[bundle as usize].write(addr, n, v);
            }
        }
        Ok(())
    }

    fn expr(&mut self, f: &'a FunctionDef, e: &'a TExpr) -> Result<u64, SimError> {
        self.tick()?;
        Ok(match &e.kind {
            TExprKind::Const(c) => *c,
            TExprKind::Var(v) => match self.frame()[v.0 as usize] {
                Slot::Scalar(x) => x,
                _ => unreachable!("scalar variable"),
            },
            TExprKind::Load { array, index } => {
                let i = self.expr(f, index)?;
                let r = self.array_ref(*array);
                self.load(e.ty, r, &f.var(*array).name, i)?
            }
            TExprKind::Unary(op, x) => {
                let a = self.expr(f, x)?;
                eval_unary(*op, a, x.ty)
            }
            TExprKind::Binary(op, l, r) => {
                // operands are evaluated eagerly, including for && and ||
                let a = self.expr(f, l)?;
                let b = self.expr(f, r)?;
                if matches!(op, TBinOp::Div | TBinOp::Rem) && b & mask(r.ty.width()) == 0 {
                    self.div_by_zero += 1;
                }
                eval_binary(*op, a, b, l.ty, r.ty)
            }
            TExprKind::Select(c, a, b) => {
                let c = self.expr(f, c)?;
                let x = self.expr(f, a)?;
                let y = self.expr(f, b)?;
                if c != 0 {
                    x
                } else {
                    y
                }
            }
            TExprKind::Convert(x) => {
                let v = self.expr(f, x)?;
                if e.ty == ScalarType::Bool {
                    (v & mask(x.ty.width()) != 0) as u64
                } else {
                    resize(v, x.ty.width(), x.ty.signed(), e.ty.width())
                }
            }
            TExprKind::Call { func, args } => {
                let callee = self.prog.function(*func);
                let mut slots = Vec::with_capacity(args.len());
                for a in args {
                    slots.push(match a {
                        TArg::Scalar(x) => Slot::Scalar(self.expr(f, x)?),
                        TArg::Array(v) => Slot::Ref(self.array_ref(*v)),
                    });
                }
                self.call(callee, slots)?.unwrap_or(0)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{check, SourceUnit};

    fn prog(src: &str) -> TypedProgram {
        check(&SourceUnit::new("t.c", src), "f").unwrap()
    }

    #[test]
    fn dot_product() {
        let p = prog("int f(int* a, int* b, int n){int s = 0; for (int i = 0; i < n; i++) s += a[i]*b[i]; return s;}");
        let mut mem = MemoryImage::new();
        for (i, v) in [1u64, 2, 3].iter().enumerate() {
            mem.write(i as u32 * 4, 4, *v);
        }
        for (i, v) in [4u64, 5, 6].iter().enumerate() {
            mem.write(0x100 + i as u32 * 4, 4, *v);
        }
        let args = [
            ArgValue::Array { bundle: 0, base: 0 },
            ArgValue::Array { bundle: 0, base: 0x100 },
            ArgValue::Scalar(3),
        ];
        let r = interpret(&p, &args, std::slice::from_mut(&mut mem)).unwrap();
        assert_eq!(r.ret, Some(32));
    }

    #[test]
    fn wraps_at_int_max() {
        let p = prog("int f(int a){return a + 1;}");
        let r = interpret(&p, &[ArgValue::Scalar(i32::MAX as u64)], &mut []).unwrap();
        assert_eq!(r.ret, Some(0x8000_0000));
    }

    #[test]
    fn infinite_loop_hits_budget() {
        let p = prog("int f(){while(1); return 0;}");
        let e = interpret_with_budget(&p, &[], &mut [], 10_000).unwrap_err();
        assert!(e.to_string().contains("possible non-termination"));
    }

    #[test]
    fn division_by_zero_is_defined_and_flagged() {
        let p = prog("uint8_t f(uint8_t a, uint8_t b){return a / b;}");
        let r = interpret(&p, &[ArgValue::Scalar(9), ArgValue::Scalar(0)], &mut []).unwrap();
        assert_eq!(r.ret, Some(0xff));
        assert_eq!(r.div_by_zero, 1);
    }

    #[test]
    fn callee_writes_through_reference() {
        let p = prog("void g(int* x, int v){x[1] = v;} int f(){int t[2]; g(t, 7); return t[1];}");
        let r = interpret(&p, &[], &mut []).unwrap();
        assert_eq!(r.ret, Some(7));
    }

    #[test]
    fn missing_return_yields_zero() {
        let p = prog("int f(int a){if (a) return 3;}");
        assert_eq!(interpret(&p, &[ArgValue::Scalar(0)], &mut []).unwrap().ret, Some(0));
    }
}
