// SPDX-License-Identifier: Apache-2.0

//! Checked program representation.

use serde::{Deserialize, Serialize};

use super::ast::{BinOp, UnOp};
use super::types::{Pos, ScalarType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FuncId(pub u32);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypedProgram {
    pub functions: Vec<FunctionDef>,
    pub top: String,
}

impl TypedProgram {
    pub fn top_function(&self) -> &FunctionDef {
        self.functions
            .iter()
            .find(|f| f.name == self.top)
            .expect("top function present after typecheck")
    }

    pub fn function(&self, id: FuncId) -> &FunctionDef {
        &self.functions[id.0 as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamType {
    Scalar(ScalarType),
    /// Reference to an externally sized array, byte addressed.
    ArrayRef(ScalarType),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarType {
    Scalar(ScalarType),
    ArrayRef(ScalarType),
    Array { elem: ScalarType, len: u32 },
}

impl VarType {
    pub fn elem(self) -> ScalarType {
        match self {
            VarType::Scalar(t) | VarType::ArrayRef(t) | VarType::Array { elem: t, .. } => t,
        }
    }

    pub fn is_array(self) -> bool {
        !matches!(self, VarType::Scalar(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarDef {
    pub name: String,
    pub ty: VarType,
    /// Constant initializer of a local array, padded to its length.
    pub init: Option<Vec<u64>>,
    /// A local array whose only contents come from its initializer.
    pub read_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub name: String,
    /// Parameter variables, in declaration order. They are the first entries of `vars`.
    pub params: Vec<VarId>,
    pub vars: Vec<VarDef>,
    pub body: Vec<TStmt>,
    pub ret: Option<ScalarType>,
    pub pos: Pos,
}

impl FunctionDef {
    pub fn var(&self, v: VarId) -> &VarDef {
        &self.vars[v.0 as usize]
    }

    pub fn param_types(&self) -> impl Iterator<Item = (&str, ParamType)> + '_ {
        self.params.iter().map(|&v| {
            let d = self.var(v);
            let t = match d.ty {
                VarType::Scalar(t) => ParamType::Scalar(t),
                VarType::ArrayRef(t) => ParamType::ArrayRef(t),
                VarType::Array { .. } => unreachable!("array parameters are references"),
            };
            (d.name.as_str(), t)
        })
    }

    /// Non-parameter variables.
    pub fn locals(&self) -> &[VarDef] {
        &self.vars[self.params.len()..]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TExpr {
    pub kind: TExprKind,
    pub ty: ScalarType,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TBinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    And,
    Or,
    Xor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    LAnd,
    LOr,
}

impl TBinOp {
    pub fn from_ast(op: BinOp) -> TBinOp {
        match op {
            BinOp::Add => TBinOp::Add,
            BinOp::Sub => TBinOp::Sub,
            BinOp::Mul => TBinOp::Mul,
            BinOp::Div => TBinOp::Div,
            BinOp::Rem => TBinOp::Rem,
            BinOp::Shl => TBinOp::Shl,
            BinOp::Shr => TBinOp::Shr,
            BinOp::And => TBinOp::And,
            BinOp::Or => TBinOp::Or,
            BinOp::Xor => TBinOp::Xor,
            BinOp::Eq => TBinOp::Eq,
            BinOp::Ne => TBinOp::Ne,
            BinOp::Lt => TBinOp::Lt,
            BinOp::Le => TBinOp::Le,
            BinOp::Gt => TBinOp::Gt,
            BinOp::Ge => TBinOp::Ge,
            BinOp::LAnd => TBinOp::LAnd,
            BinOp::LOr => TBinOp::LOr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TUnOp {
    Neg,
    BitNot,
    LNot,
}

impl TUnOp {
    pub fn from_ast(op: UnOp) -> TUnOp {
        match op {
            UnOp::Neg => TUnOp::Neg,
            UnOp::BitNot => TUnOp::BitNot,
            UnOp::LNot => TUnOp::LNot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TArg {
    Scalar(TExpr),
    Array(VarId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TExprKind {
    /// Constant bit pattern, already masked to the node type.
    Const(u64),
    Var(VarId),
    Load {
        array: VarId,
        index: Box<TExpr>,
    },
    Unary(TUnOp, Box<TExpr>),
    /// For all operators except shifts both operands have the same type.
    /// Comparisons and logical operators produce `bool`.
    Binary(TBinOp, Box<TExpr>, Box<TExpr>),
    Select(Box<TExpr>, Box<TExpr>, Box<TExpr>),
    /// Conversion from the operand type to the node type: extension by the operand's
    /// signedness, truncation, reinterpretation, or `!= 0` when converting to bool.
    Convert(Box<TExpr>),
    Call {
        func: FuncId,
        args: Vec<TArg>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TStmt {
    Assign {
        var: VarId,
        value: TExpr,
    },
    Store {
        array: VarId,
        index: TExpr,
        value: TExpr,
    },
    /// Initializes a local array from its constant initializer at this point.
    InitArray {
        array: VarId,
    },
    If {
        cond: TExpr,
        then: Vec<TStmt>,
        els: Vec<TStmt>,
    },
    While {
        cond: TExpr,
        body: Vec<TStmt>,
    },
    Call(TExpr),
    Return(Option<TExpr>),
}
