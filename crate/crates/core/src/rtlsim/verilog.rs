// SPDX-License-Identifier: Apache-2.0

//! Two-state interpreter for the synthesizable Verilog subset the backend
//! emits: one ANSI-style module with `wire`/`reg`/memory/`integer`
//! declarations, `localparam`, continuous assignments, `always @(posedge clk)`
//! and `initial` blocks with `if`, `case`, `for`, blocking and non-blocking
//! assignments. Expressions follow the standard sizing and signedness rules.
//! Uninitialized registers start at zero.

use std::collections::HashMap;

use super::SimError;

fn err(msg: impl Into<String>) -> SimError {
    SimError::Verilog(msg.into())
}

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Num { v: u128, w: Option<u32>, signed: bool },
    Sys(String),
    Str(String),
    P(&'static str),
}

const PUNCT: &[&str] = &[
    "<<<", ">>>", "===", "!==", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "~^", "^~", "(", ")", "[", "]", "{", "}", ";", ",", ":",
    "?", "=", "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "@", "#", ".",
];

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, SimError> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut line = 1;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i];
        if c == b'\n' {
            line += 1;
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if src[i..].starts_with("//") {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
        } else if src[i..].starts_with("/*") {
            let end = src[i + 2..]
                .find("*/")
                .ok_or_else(|| err(format!("line {line}: unterminated comment")))?;
            line += src[i..i + 2 + end].matches('\n').count();
            i += end + 4;
        } else if c == b'"' {
            let end = src[i + 1..]
                .find('"')
                .ok_or_else(|| err(format!("line {line}: unterminated string")))?;
            out.push((Tok::Str(src[i + 1..i + 1 + end].into()), line));
            i += end + 2;
        } else if c.is_ascii_alphabetic() || c == b'_' || c == b'$' {
            let s = i;
            i += 1;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'$') {
                i += 1;
            }
            let w = &src[s..i];
            out.push((if c == b'$' { Tok::Sys(w.into()) } else { Tok::Id(w.into()) }, line));
        } else if c.is_ascii_digit() || c == b'\'' {
            let s = i;
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'_') {
                i += 1;
            }
            let size: Option<u32> = if s == i {
                None
            } else {
                Some(
                    src[s..i]
                        .replace('_', "")
                        .parse()
                        .map_err(|_| err(format!("line {line}: bad number")))?,
                )
            };
            if i < b.len() && b[i] == b'\'' {
                i += 1;
                let signed = i < b.len() && (b[i] == b's' || b[i] == b'S');
                if signed {
                    i += 1;
                }
                let radix = match b.get(i).map(|c| c.to_ascii_lowercase()) {
                    Some(b'd') => 10,
                    Some(b'h') => 16,
                    Some(b'b') => 2,
                    Some(b'o') => 8,
                    _ => return Err(err(format!("line {line}: bad base"))),
                };
                i += 1;
                let s2 = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                    i += 1;
                }
                let digits = src[s2..i].replace('_', "");
                let v = u128::from_str_radix(&digits, radix).map_err(|_| err(format!("line {line}: bad literal '{digits}'")))?;
                out.push((
                    Tok::Num {
                        v,
                        w: Some(size.unwrap_or(32)),
                        signed,
                    },
                    line,
                ));
            } else {
                out.push((
                    Tok::Num {
                        v: size.unwrap() as u128,
                        w: None,
                        signed: true,
                    },
                    line,
                ));
            }
        } else {
            let p = PUNCT
                .iter()
                .find(|p| src[i..].starts_with(**p))
                .ok_or_else(|| err(format!("line {line}: unexpected character '{}'", c as char)))?;
            out.push((Tok::P(p), line));
            i += p.len();
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------- syntax

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UnOp {
    Neg,
    Not,
    LNot,
    RedAnd,
    RedOr,
    RedXor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    And,
    Or,
    Xor,
    Xnor,
    Shl,
    Shr,
    AShl,
    AShr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    LAnd,
    LOr,
}

#[derive(Debug, Clone)]
enum Ast {
    Num { v: u128, w: Option<u32>, signed: bool },
    Id(String),
    Index(String, Box<Ast>),
    Part(String, Box<Ast>, Box<Ast>),
    Un(UnOp, Box<Ast>),
    Bin(BinOp, Box<Ast>, Box<Ast>),
    Tern(Box<Ast>, Box<Ast>, Box<Ast>),
    Concat(Vec<Ast>),
    Repl(Box<Ast>, Vec<Ast>),
    Signed(Box<Ast>),
    Unsigned(Box<Ast>),
}

#[derive(Debug, Clone)]
enum SAst {
    Block(Vec<SAst>),
    If(Ast, Box<SAst>, Option<Box<SAst>>),
    Case(Ast, Vec<(Vec<Ast>, SAst)>, Option<Box<SAst>>),
    Assign { lhs: String, idx: Option<Ast>, rhs: Ast, nb: bool },
    For(Box<SAst>, Ast, Box<SAst>, Box<SAst>),
    ReadMem(String, String),
    Nop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Wire,
    Reg,
    Integer,
}

#[derive(Debug, Clone)]
struct Decl {
    name: String,
    width: u32,
    kind: VarKind,
    depth: Option<u32>,
    port: Option<bool>,
}

/// `(name, optional [msb:lsb] range, value)` of a constant parameter.
type Param = (String, Option<(Ast, Ast)>, Ast);

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    /// Constant-foldable parameters, in declaration order.
    params: Vec<Param>,
    decls: Vec<Decl>,
    assigns: Vec<(String, Ast)>,
    always: Vec<SAst>,
    initial: Vec<SAst>,
    name: String,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.1)
    }

    fn fail<T>(&self, msg: &str) -> Result<T, SimError> {
        Err(err(format!("line {}: {msg}, found {:?}", self.line(), self.peek())))
    }

    fn is_p(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Tok::P(q)) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Some(Tok::Id(q)) if q == k)
    }

    fn eat_p(&mut self, p: &str) -> bool {
        if self.is_p(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_p(&mut self, p: &str) -> Result<(), SimError> {
        if self.eat_p(p) {
            Ok(())
        } else {
            self.fail(&format!("expected '{p}'"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), SimError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.fail(&format!("expected '{k}'"))
        }
    }

    fn ident(&mut self) -> Result<String, SimError> {
        match self.peek() {
            Some(Tok::Id(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("expected identifier"),
        }
    }

    /// `[msb:lsb]` with constant bounds, as a width.
    fn opt_range(&mut self) -> Result<Option<(Ast, Ast)>, SimError> {
        if !self.eat_p("[") {
            return Ok(None);
        }
        let h = self.expr()?;
        self.expect_p(":")?;
        let l = self.expr()?;
        self.expect_p("]")?;
        Ok(Some((h, l)))
    }

    fn const_width(&self, r: &Option<(Ast, Ast)>) -> Result<u32, SimError> {
        match r {
            None => Ok(1),
            Some((h, l)) => {
                let (h, l) = (self.const_eval(h)?, self.const_eval(l)?);
                if l != 0 || h >= 128 {
                    return Err(err(format!("unsupported range [{h}:{l}]")));
                }
                Ok(h as u32 + 1)
            }
        }
    }

    fn const_eval(&self, a: &Ast) -> Result<u128, SimError> {
        Ok(match a {
            Ast::Num { v, .. } => *v,
            Ast::Id(n) => {
                let (_, _, e) = self
                    .params
                    .iter()
                    .rev()
                    .find(|p| &p.0 == n)
                    .ok_or_else(|| err(format!("'{n}' is not a constant")))?;
                self.const_eval(e)?
            }
            Ast::Bin(op, x, y) => {
                let (x, y) = (self.const_eval(x)?, self.const_eval(y)?);
                match op {
                    BinOp::Add => x.wrapping_add(y),
                    BinOp::Sub => x.wrapping_sub(y),
                    BinOp::Mul => x.wrapping_mul(y),
                    _ => return Err(err("unsupported constant expression")),
                }
            }
            _ => return Err(err("unsupported constant expression")),
        })
    }

    fn module(&mut self) -> Result<(), SimError> {
        self.expect_kw("module")?;
        self.name = self.ident()?;
        self.expect_p("(")?;
        if !self.eat_p(")") {
            loop {
                let out = if self.eat_kw("input") {
                    false
                } else if self.eat_kw("output") {
                    true
                } else {
                    return self.fail("expected port direction");
                };
                let kind = if self.eat_kw("reg") {
                    VarKind::Reg
                } else {
                    self.eat_kw("wire");
                    VarKind::Wire
                };
                let r = self.opt_range()?;
                let width = self.const_width(&r)?;
                let name = self.ident()?;
                self.decls.push(Decl {
                    name,
                    width,
                    kind,
                    depth: None,
                    port: Some(out),
                });
                if self.eat_p(")") {
                    break;
                }
                self.expect_p(",")?;
            }
        }
        self.expect_p(";")?;
        while !self.eat_kw("endmodule") {
            if self.peek().is_none() {
                return self.fail("missing endmodule");
            }
            self.item()?;
        }
        Ok(())
    }

    fn item(&mut self) -> Result<(), SimError> {
        if self.eat_kw("localparam") || self.eat_kw("parameter") {
            let r = self.opt_range()?;
            loop {
                let n = self.ident()?;
                self.expect_p("=")?;
                let e = self.expr()?;
                self.params.push((n, r.clone(), e));
                if !self.eat_p(",") {
                    break;
                }
            }
            self.expect_p(";")
        } else if self.is_kw("wire") || self.is_kw("reg") || self.is_kw("integer") {
            let kind = match self.ident()?.as_str() {
                "wire" => VarKind::Wire,
                "reg" => VarKind::Reg,
                _ => VarKind::Integer,
            };
            let r = if kind == VarKind::Integer { None } else { self.opt_range()? };
            let width = if kind == VarKind::Integer { 32 } else { self.const_width(&r)? };
            loop {
                let name = self.ident()?;
                let mut depth = None;
                if self.eat_p("[") {
                    let lo = self.expr()?;
                    self.expect_p(":")?;
                    let hi = self.expr()?;
                    self.expect_p("]")?;
                    let (lo, hi) = (self.const_eval(&lo)?, self.const_eval(&hi)?);
                    if lo != 0 {
                        return Err(err("memories must start at index 0"));
                    }
                    depth = Some(hi as u32 + 1);
                }
                if self.eat_p("=") {
                    let e = self.expr()?;
                    self.assigns.push((name.clone(), e));
                }
                self.decls.push(Decl {
                    name,
                    width,
                    kind,
                    depth,
                    port: None,
                });
                if !self.eat_p(",") {
                    break;
                }
            }
            self.expect_p(";")
        } else if self.eat_kw("assign") {
            let n = self.ident()?;
            self.expect_p("=")?;
            let e = self.expr()?;
            self.assigns.push((n, e));
            self.expect_p(";")
        } else if self.eat_kw("always") {
            self.expect_p("@")?;
            self.expect_p("(")?;
            self.expect_kw("posedge")?;
            let clk = self.ident()?;
            if clk != "clk" {
                return self.fail("only 'clk' may clock always blocks");
            }
            self.expect_p(")")?;
            let s = self.stmt()?;
            self.always.push(s);
            Ok(())
        } else if self.eat_kw("initial") {
            let s = self.stmt()?;
            self.initial.push(s);
            Ok(())
        } else {
            self.fail("unsupported module item")
        }
    }

    fn stmt(&mut self) -> Result<SAst, SimError> {
        if self.eat_kw("begin") {
            let mut v = Vec::new();
            while !self.eat_kw("end") {
                v.push(self.stmt()?);
            }
            Ok(SAst::Block(v))
        } else if self.eat_kw("if") {
            self.expect_p("(")?;
            let c = self.expr()?;
            self.expect_p(")")?;
            let t = self.stmt()?;
            let e = if self.eat_kw("else") { Some(Box::new(self.stmt()?)) } else { None };
            Ok(SAst::If(c, Box::new(t), e))
        } else if self.eat_kw("case") {
            self.expect_p("(")?;
            let sel = self.expr()?;
            self.expect_p(")")?;
            let mut arms = Vec::new();
            let mut default = None;
            while !self.eat_kw("endcase") {
                if self.eat_kw("default") {
                    self.eat_p(":");
                    default = Some(Box::new(self.stmt()?));
                    continue;
                }
                let mut labels = vec![self.expr()?];
                while self.eat_p(",") {
                    labels.push(self.expr()?);
                }
                self.expect_p(":")?;
                arms.push((labels, self.stmt()?));
            }
            Ok(SAst::Case(sel, arms, default))
        } else if self.eat_kw("for") {
            self.expect_p("(")?;
            let init = self.assign_stmt()?;
            self.expect_p(";")?;
            let cond = self.expr()?;
            self.expect_p(";")?;
            let step = self.assign_stmt()?;
            self.expect_p(")")?;
            let body = self.stmt()?;
            Ok(SAst::For(Box::new(init), cond, Box::new(step), Box::new(body)))
        } else if matches!(self.peek(), Some(Tok::Sys(s)) if s == "$readmemh") {
            self.pos += 1;
            self.expect_p("(")?;
            let Some(Tok::Str(file)) = self.peek().cloned() else {
                return self.fail("expected file name");
            };
            self.pos += 1;
            self.expect_p(",")?;
            let mem = self.ident()?;
            self.expect_p(")")?;
            self.expect_p(";")?;
            Ok(SAst::ReadMem(file, mem))
        } else if self.eat_p(";") {
            Ok(SAst::Nop)
        } else {
            let s = self.assign_stmt()?;
            self.expect_p(";")?;
            Ok(s)
        }
    }

    fn assign_stmt(&mut self) -> Result<SAst, SimError> {
        let lhs = self.ident()?;
        let idx = if self.eat_p("[") {
            let e = self.expr()?;
            self.expect_p("]")?;
            Some(e)
        } else {
            None
        };
        let nb = if self.eat_p("<=") {
            true
        } else if self.eat_p("=") {
            false
        } else {
            return self.fail("expected assignment");
        };
        let rhs = self.expr()?;
        Ok(SAst::Assign { lhs, idx, rhs, nb })
    }

    fn expr(&mut self) -> Result<Ast, SimError> {
        let c = self.binary(0)?;
        if self.eat_p("?") {
            let t = self.expr()?;
            self.expect_p(":")?;
            let f = self.expr()?;
            return Ok(Ast::Tern(Box::new(c), Box::new(t), Box::new(f)));
        }
        Ok(c)
    }

    fn binop(&self) -> Option<(BinOp, u8)> {
        let Some(Tok::P(p)) = self.peek() else { return None };
        Some(match *p {
            "||" => (BinOp::LOr, 1),
            "&&" => (BinOp::LAnd, 2),
            "|" => (BinOp::Or, 3),
            "^" => (BinOp::Xor, 4),
            "~^" | "^~" => (BinOp::Xnor, 4),
            "&" => (BinOp::And, 5),
            "==" | "===" => (BinOp::Eq, 6),
            "!=" | "!==" => (BinOp::Ne, 6),
            "<" => (BinOp::Lt, 7),
            "<=" => (BinOp::Le, 7),
            ">" => (BinOp::Gt, 7),
            ">=" => (BinOp::Ge, 7),
            "<<" => (BinOp::Shl, 8),
            ">>" => (BinOp::Shr, 8),
            "<<<" => (BinOp::AShl, 8),
            ">>>" => (BinOp::AShr, 8),
            "+" => (BinOp::Add, 9),
            "-" => (BinOp::Sub, 9),
            "*" => (BinOp::Mul, 10),
            "/" => (BinOp::Div, 10),
            "%" => (BinOp::Mod, 10),
            _ => return None,
        })
    }

    fn binary(&mut self, min: u8) -> Result<Ast, SimError> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.binop() {
            if prec < min {
                break;
            }
            self.pos += 1;
            let rhs = self.binary(prec + 1)?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ast, SimError> {
        let op = match self.peek() {
            Some(Tok::P("-")) => Some(UnOp::Neg),
            Some(Tok::P("~")) => Some(UnOp::Not),
            Some(Tok::P("!")) => Some(UnOp::LNot),
            Some(Tok::P("&")) => Some(UnOp::RedAnd),
            Some(Tok::P("|")) => Some(UnOp::RedOr),
            Some(Tok::P("^")) => Some(UnOp::RedXor),
            Some(Tok::P("+")) => {
                self.pos += 1;
                return self.unary();
            }
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            return Ok(Ast::Un(op, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Ast, SimError> {
        match self.peek().cloned() {
            Some(Tok::Num { v, w, signed }) => {
                self.pos += 1;
                Ok(Ast::Num { v, w, signed })
            }
            Some(Tok::Sys(s)) => {
                self.pos += 1;
                self.expect_p("(")?;
                let e = self.expr()?;
                self.expect_p(")")?;
                match s.as_str() {
                    "$signed" => Ok(Ast::Signed(Box::new(e))),
                    "$unsigned" => Ok(Ast::Unsigned(Box::new(e))),
                    _ => self.fail("unsupported system function"),
                }
            }
            Some(Tok::Id(n)) => {
                self.pos += 1;
                if self.eat_p("[") {
                    let a = self.expr()?;
                    let r = if self.eat_p(":") {
                        let b = self.expr()?;
                        Ast::Part(n, Box::new(a), Box::new(b))
                    } else {
                        Ast::Index(n, Box::new(a))
                    };
                    self.expect_p("]")?;
                    Ok(r)
                } else {
                    Ok(Ast::Id(n))
                }
            }
            Some(Tok::P("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_p(")")?;
                Ok(e)
            }
            Some(Tok::P("{")) => {
                self.pos += 1;
                let first = self.expr()?;
                if self.eat_p("{") {
                    let mut parts = vec![self.expr()?];
                    while self.eat_p(",") {
                        parts.push(self.expr()?);
                    }
                    self.expect_p("}")?;
                    self.expect_p("}")?;
                    return Ok(Ast::Repl(Box::new(first), parts));
                }
                let mut parts = vec![first];
                while self.eat_p(",") {
                    parts.push(self.expr()?);
                }
                self.expect_p("}")?;
                Ok(Ast::Concat(parts))
            }
            _ => self.fail("expected expression"),
        }
    }
}

// ---------------------------------------------------------------- elaboration

#[derive(Debug, Clone)]
enum Kind {
    Const(u128),
    Var(usize),
    Bit(usize, Box<Expr>),
    Part(usize, u32),
    Elem(usize, Box<Expr>),
    Un(UnOp, Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Tern(Box<Expr>, Box<Expr>, Box<Expr>),
    Concat(Vec<Expr>),
    Repl(u32, Box<Expr>),
    /// `$signed`/`$unsigned`: the operand keeps its own type.
    Cast(Box<Expr>),
}

/// Expression with its self-determined width and signedness.
#[derive(Debug, Clone)]
struct Expr {
    k: Kind,
    w: u32,
    s: bool,
}

#[derive(Debug, Clone)]
enum Lhs {
    Var(usize),
    Bit(usize, Expr),
    Elem(usize, Expr),
}

#[derive(Debug, Clone)]
enum Stmt {
    Block(Vec<Stmt>),
    If(Expr, Box<Stmt>, Option<Box<Stmt>>),
    Case(Expr, Vec<(Vec<Expr>, Stmt)>, Option<Box<Stmt>>),
    Assign(Lhs, Expr, bool),
    For(Box<Stmt>, Expr, Box<Stmt>, Box<Stmt>),
    ReadMem(String, usize),
    Nop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub width: u32,
    pub output: bool,
}

#[derive(Debug, Clone)]
struct Var {
    name: String,
    width: u32,
    signed: bool,
}

/// An elaborated module ready for simulation.
#[derive(Debug, Clone)]
pub struct VModule {
    pub name: String,
    pub ports: Vec<Port>,
    vars: Vec<Var>,
    names: HashMap<String, usize>,
    arrays: Vec<(String, u32, u32)>,
    array_names: HashMap<String, usize>,
    /// Continuous assignments in dependency order.
    assigns: Vec<(usize, Expr)>,
    always: Vec<Stmt>,
    initial: Vec<Stmt>,
}

fn wmask(w: u32) -> u128 {
    if w >= 128 {
        u128::MAX
    } else {
        (1u128 << w) - 1
    }
}

fn extend(v: u128, from: u32, to: u32, signed: bool) -> u128 {
    let v = v & wmask(from);
    if signed && from > 0 && from < 128 && (v >> (from - 1)) & 1 == 1 {
        (v | !wmask(from)) & wmask(to)
    } else {
        v & wmask(to)
    }
}

struct Elab<'a> {
    p: &'a Parser,
    vars: Vec<Var>,
    names: HashMap<String, usize>,
    arrays: Vec<(String, u32, u32)>,
    array_names: HashMap<String, usize>,
}

impl Elab<'_> {
    fn param(&self, n: &str) -> Option<Result<Expr, SimError>> {
        let (_, r, e) = self.p.params.iter().rev().find(|p| p.0 == n)?;
        Some((|| {
            let v = self.p.const_eval(e)?;
            let (w, s) = match r {
                Some(_) => (self.p.const_width(r)?, false),
                None => {
                    let x = self.expr(e)?;
                    (x.w, x.s)
                }
            };
            Ok(Expr {
                k: Kind::Const(v & wmask(w)),
                w,
                s,
            })
        })())
    }

    fn var(&self, n: &str) -> Result<usize, SimError> {
        self.names
            .get(n)
            .copied()
            .ok_or_else(|| err(format!("undeclared identifier '{n}'")))
    }

    fn expr(&self, a: &Ast) -> Result<Expr, SimError> {
        Ok(match a {
            Ast::Num { v, w, signed } => {
                let w = w.unwrap_or(32);
                Expr {
                    k: Kind::Const(v & wmask(w)),
                    w,
                    s: *signed,
                }
            }
            Ast::Id(n) => {
                if let Some(p) = self.param(n) {
                    return p;
                }
                let i = self.var(n)?;
                Expr {
                    k: Kind::Var(i),
                    w: self.vars[i].width,
                    s: self.vars[i].signed,
                }
            }
            Ast::Index(n, i) => {
                let ix = self.expr(i)?;
                if let Some(&m) = self.array_names.get(n) {
                    Expr {
                        k: Kind::Elem(m, Box::new(ix)),
                        w: self.arrays[m].1,
                        s: false,
                    }
                } else {
                    Expr {
                        k: Kind::Bit(self.var(n)?, Box::new(ix)),
                        w: 1,
                        s: false,
                    }
                }
            }
            Ast::Part(n, h, l) => {
                let (h, l) = (self.p.const_eval(h)? as u32, self.p.const_eval(l)? as u32);
                if h < l {
                    return Err(err(format!("reversed part select {n}[{h}:{l}]")));
                }
                Expr {
                    k: Kind::Part(self.var(n)?, l),
                    w: h - l + 1,
                    s: false,
                }
            }
            Ast::Un(op, x) => {
                let x = self.expr(x)?;
                let (w, s) = match op {
                    UnOp::Neg | UnOp::Not => (x.w, x.s),
                    _ => (1, false),
                };
                Expr {
                    k: Kind::Un(*op, Box::new(x)),
                    w,
                    s,
                }
            }
            Ast::Bin(op, x, y) => {
                let (x, y) = (self.expr(x)?, self.expr(y)?);
                let (w, s) = match op {
                    BinOp::Shl | BinOp::Shr | BinOp::AShl | BinOp::AShr => (x.w, x.s),
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne | BinOp::LAnd | BinOp::LOr => (1, false),
                    _ => (x.w.max(y.w), x.s && y.s),
                };
                Expr {
                    k: Kind::Bin(*op, Box::new(x), Box::new(y)),
                    w,
                    s,
                }
            }
            Ast::Tern(c, t, f) => {
                let (c, t, f) = (self.expr(c)?, self.expr(t)?, self.expr(f)?);
                let (w, s) = (t.w.max(f.w), t.s && f.s);
                Expr {
                    k: Kind::Tern(Box::new(c), Box::new(t), Box::new(f)),
                    w,
                    s,
                }
            }
            Ast::Concat(v) => {
                let v: Vec<Expr> = v.iter().map(|x| self.expr(x)).collect::<Result<_, _>>()?;
                let w = v.iter().map(|x| x.w).sum();
                if w > 128 {
                    return Err(err("concatenation wider than 128 bits"));
                }
                Expr {
                    k: Kind::Concat(v),
                    w,
                    s: false,
                }
            }
            Ast::Repl(n, v) => {
                let n = self.p.const_eval(n)? as u32;
                let inner = self.expr(&Ast::Concat(v.clone()))?;
                let w = n * inner.w;
                if w > 128 || n == 0 {
                    return Err(err("unsupported replication"));
                }
                Expr {
                    k: Kind::Repl(n, Box::new(inner)),
                    w,
                    s: false,
                }
            }
            Ast::Signed(x) | Ast::Unsigned(x) => {
                let x = self.expr(x)?;
                Expr {
                    w: x.w,
                    s: matches!(a, Ast::Signed(_)),
                    k: Kind::Cast(Box::new(x)),
                }
            }
        })
    }

    fn stmt(&self, s: &SAst) -> Result<Stmt, SimError> {
        Ok(match s {
            SAst::Block(v) => Stmt::Block(v.iter().map(|x| self.stmt(x)).collect::<Result<_, _>>()?),
            SAst::If(c, t, e) => Stmt::If(
                self.expr(c)?,
                Box::new(self.stmt(t)?),
                match e {
                    Some(e) => Some(Box::new(self.stmt(e)?)),
                    None => None,
                },
            ),
            SAst::Case(sel, arms, d) => Stmt::Case(
                self.expr(sel)?,
                arms.iter()
                    .map(|(ls, st)| Ok((ls.iter().map(|l| self.expr(l)).collect::<Result<_, SimError>>()?, self.stmt(st)?)))
                    .collect::<Result<_, SimError>>()?,
                match d {
                    Some(d) => Some(Box::new(self.stmt(d)?)),
                    None => None,
                },
            ),
            SAst::Assign { lhs, idx, rhs, nb } => {
                let l = match idx {
                    None => Lhs::Var(self.var(lhs)?),
                    Some(i) => match self.array_names.get(lhs) {
                        Some(&m) => Lhs::Elem(m, self.expr(i)?),
                        None => Lhs::Bit(self.var(lhs)?, self.expr(i)?),
                    },
                };
                Stmt::Assign(l, self.expr(rhs)?, *nb)
            }
            SAst::For(i, c, st, b) => Stmt::For(
                Box::new(self.stmt(i)?),
                self.expr(c)?,
                Box::new(self.stmt(st)?),
                Box::new(self.stmt(b)?),
            ),
            SAst::ReadMem(f, m) => Stmt::ReadMem(
                f.clone(),
                *self.array_names.get(m).ok_or_else(|| err(format!("'{m}' is not a memory")))?,
            ),
            SAst::Nop => Stmt::Nop,
        })
    }
}

fn reads(e: &Expr, out: &mut Vec<usize>) {
    match &e.k {
        Kind::Var(i) | Kind::Part(i, _) => out.push(*i),
        Kind::Bit(i, x) => {
            out.push(*i);
            reads(x, out);
        }
        Kind::Elem(_, x) | Kind::Un(_, x) | Kind::Repl(_, x) | Kind::Cast(x) => reads(x, out),
        Kind::Bin(_, x, y) => {
            reads(x, out);
            reads(y, out);
        }
        Kind::Tern(c, t, f) => {
            reads(c, out);
            reads(t, out);
            reads(f, out);
        }
        Kind::Concat(v) => v.iter().for_each(|x| reads(x, out)),
        Kind::Const(_) => {}
    }
}

impl VModule {
    pub fn parse(src: &str) -> Result<VModule, SimError> {
        let mut p = Parser {
            toks: lex(src)?,
            pos: 0,
            params: Vec::new(),
            decls: Vec::new(),
            assigns: Vec::new(),
            always: Vec::new(),
            initial: Vec::new(),
            name: String::new(),
        };
        p.module()?;
        if p.pos != p.toks.len() {
            return p.fail("text after endmodule");
        }
        let mut el = Elab {
            p: &p,
            vars: Vec::new(),
            names: HashMap::new(),
            arrays: Vec::new(),
            array_names: HashMap::new(),
        };
        let mut ports = Vec::new();
        for d in &p.decls {
            if el.names.contains_key(&d.name) || el.array_names.contains_key(&d.name) {
                return Err(err(format!("'{}' declared twice", d.name)));
            }
            if let Some(depth) = d.depth {
                el.array_names.insert(d.name.clone(), el.arrays.len());
                el.arrays.push((d.name.clone(), d.width, depth));
                continue;
            }
            if let Some(out) = d.port {
                ports.push(Port {
                    name: d.name.clone(),
                    width: d.width,
                    output: out,
                });
            }
            el.names.insert(d.name.clone(), el.vars.len());
            el.vars.push(Var {
                name: d.name.clone(),
                width: d.width,
                signed: d.kind == VarKind::Integer,
            });
        }
        let mut assigns = Vec::new();
        let mut driver: HashMap<usize, usize> = HashMap::new();
        for (n, a) in &p.assigns {
            let v = el.var(n)?;
            if driver.insert(v, assigns.len()).is_some() {
                return Err(err(format!("'{n}' has multiple drivers")));
            }
            assigns.push((v, el.expr(a)?));
        }
        // dependency order; a cycle is a combinational loop
        let mut order = Vec::with_capacity(assigns.len());
        let mut mark = vec![0u8; assigns.len()];
        fn visit(
            i: usize,
            a: &[(usize, Expr)],
            drv: &HashMap<usize, usize>,
            mark: &mut [u8],
            order: &mut Vec<usize>,
        ) -> Result<(), SimError> {
            match mark[i] {
                2 => return Ok(()),
                1 => return Err(SimError::CombLoop),
                _ => {}
            }
            mark[i] = 1;
            let mut deps = Vec::new();
            reads(&a[i].1, &mut deps);
            for d in deps {
                if let Some(&j) = drv.get(&d) {
                    visit(j, a, drv, mark, order)?;
                }
            }
            mark[i] = 2;
            order.push(i);
            Ok(())
        }
        for i in 0..assigns.len() {
            visit(i, &assigns, &driver, &mut mark, &mut order)?;
        }
        let sorted = order.into_iter().map(|i| assigns[i].clone()).collect();
        let always = p.always.iter().map(|s| el.stmt(s)).collect::<Result<_, _>>()?;
        let initial = p.initial.iter().map(|s| el.stmt(s)).collect::<Result<_, _>>()?;
        let Elab {
            vars,
            names,
            arrays,
            array_names,
            ..
        } = el;
        Ok(VModule {
            name: p.name.clone(),
            ports,
            vars,
            names,
            arrays,
            array_names,
            assigns: sorted,
            always,
            initial,
        })
    }

    /// Parses the module called `name` out of a multi-module source.
    pub fn parse_named(src: &str, name: &str) -> Result<VModule, SimError> {
        let start = src
            .match_indices("module ")
            .map(|(i, _)| i)
            .find(|&i| {
                (i == 0 || src.as_bytes()[i - 1] == b'\n') && src[i + 7..].trim_start().starts_with(name) && {
                    let rest = &src[i + 7..].trim_start()[name.len()..];
                    rest.starts_with([' ', '(', ';', '\n'])
                }
            })
            .ok_or_else(|| err(format!("no module '{name}'")))?;
        let end = src[start..]
            .find("endmodule")
            .ok_or_else(|| err(format!("module '{name}' has no endmodule")))?;
        VModule::parse(&src[start..start + end + "endmodule".len()])
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn array_count(&self) -> usize {
        self.arrays.len()
    }
}

// ---------------------------------------------------------------- simulation

/// Simulation state of one module instance.
#[derive(Debug, Clone)]
pub struct VSim<'m> {
    m: &'m VModule,
    files: HashMap<String, String>,
    vals: Vec<u128>,
    mems: Vec<Vec<u128>>,
    pending: Vec<(Lhs2, u128)>,
}

#[derive(Debug, Clone, Copy)]
enum Lhs2 {
    Var(usize),
    Bit(usize, u32),
    Elem(usize, u64),
}

const FOR_LIMIT: u64 = 1 << 24;

impl<'m> VSim<'m> {
    /// Instantiates the module and runs its `initial` blocks.
    pub fn new(m: &'m VModule) -> Result<VSim<'m>, SimError> {
        VSim::with_files(m, HashMap::new())
    }

    /// As [`VSim::new`], resolving `$readmemh` file names through `files`.
    pub fn with_files(m: &'m VModule, files: HashMap<String, String>) -> Result<VSim<'m>, SimError> {
        let mut s = VSim {
            m,
            files,
            vals: vec![0; m.vars.len()],
            mems: m.arrays.iter().map(|a| vec![0; a.2 as usize]).collect(),
            pending: Vec::new(),
        };
        for st in &m.initial {
            s.exec(st)?;
        }
        s.flush();
        Ok(s)
    }

    pub fn set(&mut self, name: &str, v: u128) -> Result<(), SimError> {
        let i = *self.m.names.get(name).ok_or_else(|| err(format!("no signal '{name}'")))?;
        self.vals[i] = v & wmask(self.m.vars[i].width);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<u128, SimError> {
        let i = *self.m.names.get(name).ok_or_else(|| err(format!("no signal '{name}'")))?;
        Ok(self.vals[i])
    }

    pub fn memory(&self, name: &str) -> Option<&[u128]> {
        self.m.array_names.get(name).map(|&i| self.mems[i].as_slice())
    }

    /// Propagates continuous assignments.
    pub fn settle(&mut self) {
        for (v, e) in &self.m.assigns {
            let w = self.m.vars[*v].width;
            let x = self.eval(e, w.max(e.w), e.s);
            self.vals[*v] = x & wmask(w);
        }
    }

    /// Rising clock edge: runs every `always` block against the settled
    /// values, then commits non-blocking updates.
    pub fn posedge(&mut self) -> Result<(), SimError> {
        for st in &self.m.always {
            self.exec(st)?;
        }
        self.flush();
        Ok(())
    }

    fn flush(&mut self) {
        for (l, v) in std::mem::take(&mut self.pending) {
            self.store(l, v);
        }
    }

    fn store(&mut self, l: Lhs2, v: u128) {
        match l {
            Lhs2::Var(i) => self.vals[i] = v & wmask(self.m.vars[i].width),
            Lhs2::Bit(i, b) => {
                if b < self.m.vars[i].width {
                    self.vals[i] = (self.vals[i] & !(1 << b)) | ((v & 1) << b);
                }
            }
            Lhs2::Elem(m, a) => {
                let w = self.m.arrays[m].1;
                if let Some(x) = self.mems[m].get_mut(a as usize) {
                    *x = v & wmask(w);
                }
            }
        }
    }

    fn exec(&mut self, s: &Stmt) -> Result<(), SimError> {
        match s {
            Stmt::Block(v) => {
                for x in v {
                    self.exec(x)?;
                }
            }
            Stmt::If(c, t, e) => {
                if self.truth(c) {
                    self.exec(t)?;
                } else if let Some(e) = e {
                    self.exec(e)?;
                }
            }
            Stmt::Case(sel, arms, d) => {
                for (labels, st) in arms {
                    for l in labels {
                        let w = sel.w.max(l.w);
                        let sg = sel.s && l.s;
                        if self.eval(sel, w, sg) == self.eval(l, w, sg) {
                            return self.exec(st);
                        }
                    }
                }
                if let Some(d) = d {
                    self.exec(d)?;
                }
            }
            Stmt::Assign(l, e, nb) => {
                let (target, w) = match l {
                    Lhs::Var(i) => (Lhs2::Var(*i), self.m.vars[*i].width),
                    Lhs::Bit(i, x) => (Lhs2::Bit(*i, self.eval_self(x).min(u32::MAX as u128) as u32), 1),
                    Lhs::Elem(m, x) => (Lhs2::Elem(*m, self.eval_self(x).min(u64::MAX as u128) as u64), self.m.arrays[*m].1),
                };
                let v = self.eval(e, w.max(e.w), e.s) & wmask(w);
                if *nb {
                    self.pending.push((target, v));
                } else {
                    self.store(target, v);
                }
            }
            Stmt::For(init, c, step, body) => {
                self.exec(init)?;
                let mut n = 0u64;
                while self.truth(c) {
                    self.exec(body)?;
                    self.exec(step)?;
                    n += 1;
                    if n > FOR_LIMIT {
                        return Err(err("for loop iteration limit exceeded"));
                    }
                }
            }
            Stmt::ReadMem(file, a) => {
                let text = self.files.get(file).ok_or_else(|| err(format!("$readmemh: no file '{file}'")))?;
                let w = self.m.arrays[*a].1;
                let words = text
                    .split_whitespace()
                    .filter(|t| !t.starts_with("//"))
                    .map(|t| u128::from_str_radix(&t.replace('_', ""), 16).map_err(|_| err(format!("$readmemh {file}: bad word '{t}'"))));
                for (k, v) in words.enumerate() {
                    let v = v?;
                    match self.mems[*a].get_mut(k) {
                        Some(x) => *x = v & wmask(w),
                        None => {
                            return Err(err(format!(
                                "$readmemh {file}: more words than memory '{}' holds",
                                self.m.arrays[*a].0
                            )))
                        }
                    }
                }
            }
            Stmt::Nop => {}
        }
        Ok(())
    }

    fn truth(&self, e: &Expr) -> bool {
        self.eval_self(e) != 0
    }

    fn eval_self(&self, e: &Expr) -> u128 {
        self.eval(e, e.w, e.s)
    }

    /// Value of `e` in a context of width `w` and signedness `s`.
    fn eval(&self, e: &Expr, w: u32, s: bool) -> u128 {
        let m = wmask(w);
        match &e.k {
            Kind::Const(v) => extend(*v, e.w, w, s),
            Kind::Var(i) => extend(self.vals[*i], e.w, w, s),
            Kind::Bit(i, x) => {
                let b = self.eval_self(x);
                if b < self.m.vars[*i].width as u128 {
                    (self.vals[*i] >> b) & 1
                } else {
                    0
                }
            }
            Kind::Part(i, l) => (self.vals[*i] >> l) & wmask(e.w),
            Kind::Elem(a, x) => {
                let ix = self.eval_self(x);
                let v = self.mems[*a]
                    .get(ix as usize)
                    .copied()
                    .filter(|_| ix < usize::MAX as u128)
                    .unwrap_or(0);
                v & m
            }
            Kind::Cast(x) => extend(self.eval_self(x), e.w, w, s),
            Kind::Un(op, x) => match op {
                UnOp::Neg => self.eval(x, w, s).wrapping_neg() & m,
                UnOp::Not => !self.eval(x, w, s) & m,
                UnOp::LNot => (self.eval_self(x) == 0) as u128,
                UnOp::RedAnd => (self.eval_self(x) == wmask(x.w)) as u128,
                UnOp::RedOr => (self.eval_self(x) != 0) as u128,
                UnOp::RedXor => (self.eval_self(x).count_ones() & 1) as u128,
            },
            Kind::Bin(op, x, y) => match op {
                BinOp::Add => self.eval(x, w, s).wrapping_add(self.eval(y, w, s)) & m,
                BinOp::Sub => self.eval(x, w, s).wrapping_sub(self.eval(y, w, s)) & m,
                BinOp::Mul => self.eval(x, w, s).wrapping_mul(self.eval(y, w, s)) & m,
                BinOp::Div | BinOp::Mod => {
                    let (a, b) = (self.eval(x, w, s), self.eval(y, w, s));
                    if b == 0 {
                        m
                    } else if s {
                        let sh = 128 - w;
                        let (a, b) = (((a << sh) as i128) >> sh, ((b << sh) as i128) >> sh);
                        let r = if *op == BinOp::Div { a.wrapping_div(b) } else { a.wrapping_rem(b) };
                        r as u128 & m
                    } else if *op == BinOp::Div {
                        a / b
                    } else {
                        a % b
                    }
                }
                BinOp::And => self.eval(x, w, s) & self.eval(y, w, s),
                BinOp::Or => self.eval(x, w, s) | self.eval(y, w, s),
                BinOp::Xor => self.eval(x, w, s) ^ self.eval(y, w, s),
                BinOp::Xnor => !(self.eval(x, w, s) ^ self.eval(y, w, s)) & m,
                BinOp::Shl | BinOp::AShl | BinOp::Shr | BinOp::AShr => {
                    let a = self.eval(x, w, s);
                    let n = self.eval(y, y.w, false);
                    match op {
                        BinOp::Shl | BinOp::AShl => {
                            if n >= w as u128 {
                                0
                            } else {
                                (a << n) & m
                            }
                        }
                        BinOp::AShr if s => {
                            let neg = w > 0 && (a >> (w - 1)) & 1 == 1;
                            let n = n.min(w as u128) as u32;
                            let r = if n >= 128 { 0 } else { a >> n };
                            if neg {
                                (r | !(wmask(w) >> n.min(127))) & m
                            } else {
                                r
                            }
                        }
                        _ => {
                            if n >= 128 {
                                0
                            } else {
                                a >> n
                            }
                        }
                    }
                }
                BinOp::LAnd => (self.truth(x) && self.truth(y)) as u128,
                BinOp::LOr => (self.truth(x) || self.truth(y)) as u128,
                cmp => {
                    let cw = x.w.max(y.w);
                    let cs = x.s && y.s;
                    let (a, b) = (self.eval(x, cw, cs), self.eval(y, cw, cs));
                    let ord = if cs {
                        let sh = 128 - cw;
                        (((a << sh) as i128) >> sh).cmp(&(((b << sh) as i128) >> sh))
                    } else {
                        a.cmp(&b)
                    };
                    use std::cmp::Ordering::*;
                    (match cmp {
                        BinOp::Lt => ord == Less,
                        BinOp::Le => ord != Greater,
                        BinOp::Gt => ord == Greater,
                        BinOp::Ge => ord != Less,
                        BinOp::Eq => ord == Equal,
                        _ => ord != Equal,
                    }) as u128
                }
            },
            Kind::Tern(c, t, f) => {
                if self.truth(c) {
                    self.eval(t, w, s)
                } else {
                    self.eval(f, w, s)
                }
            }
            Kind::Concat(v) => {
                let mut acc = 0u128;
                for x in v {
                    acc = if x.w >= 128 { 0 } else { acc << x.w } | self.eval_self(x);
                }
                acc & m
            }
            Kind::Repl(n, x) => {
                let v = self.eval_self(x);
                let mut acc = 0u128;
                for _ in 0..*n {
                    acc = if x.w >= 128 { 0 } else { acc << x.w } | v;
                }
                acc & m
            }
        }
    }

    /// Names of all scalar signals, for diagnostics.
    pub fn signal_names(&self) -> impl Iterator<Item = &str> {
        self.m.vars.iter().map(|v| v.name.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(src: &str) -> VModule {
        VModule::parse(src).unwrap()
    }

    #[test]
    fn counter_counts() {
        let m = sim("module c (input wire clk, input wire rst, output wire [3:0] q);
               reg [3:0] n;
               assign q = n;
               always @(posedge clk) begin
                 if (rst) n <= 4'd0; else n <= n + 4'd1;
               end
             endmodule");
        let mut s = VSim::new(&m).unwrap();
        s.set("rst", 1).unwrap();
        s.settle();
        s.posedge().unwrap();
        s.set("rst", 0).unwrap();
        for _ in 0..18 {
            s.settle();
            s.posedge().unwrap();
        }
        s.settle();
        assert_eq!(s.get("q").unwrap(), 2);
    }

    #[test]
    fn sizing_and_signedness() {
        let m = sim(
            "module t (input wire [7:0] a, input wire [7:0] b, output wire [15:0] sum, output wire lt, output wire slt,
                       output wire [7:0] sra, output wire [15:0] cat, output wire [7:0] neg);
               wire [7:0] x = a;
               assign sum = x + b;
               assign lt = a < b;
               assign slt = $signed(a) < $signed(b);
               assign sra = $unsigned($signed(a) >>> 2);
               assign cat = {a[3:0], {2{b[1:0]}}, 4'd0};
               assign neg = -a;
             endmodule",
        );
        let mut s = VSim::new(&m).unwrap();
        s.set("a", 0xf0).unwrap();
        s.set("b", 0x20).unwrap();
        s.settle();
        assert_eq!(s.get("sum").unwrap(), 0x110);
        assert_eq!(s.get("lt").unwrap(), 0);
        assert_eq!(s.get("slt").unwrap(), 1);
        assert_eq!(s.get("sra").unwrap(), 0xfc);
        assert_eq!(s.get("cat").unwrap(), 0x0000);
        assert_eq!(s.get("neg").unwrap(), 0x10);
        s.set("b", 0x23).unwrap();
        s.settle();
        assert_eq!(s.get("cat").unwrap(), 0x0f0);
    }

    #[test]
    fn memories_read_first() {
        let m = sim(
            "module r (input wire clk, input wire we, input wire [1:0] a, input wire [7:0] d, output wire [7:0] q);
               reg [7:0] mem [0:3];
               reg [7:0] qr;
               assign q = qr;
               integer i;
               initial begin
                 for (i = 0; i < 4; i = i + 1) mem[i] = 8'd7;
               end
               always @(posedge clk) begin
                 if (we) mem[a] <= d;
                 qr <= mem[a];
               end
             endmodule",
        );
        let mut s = VSim::new(&m).unwrap();
        s.set("we", 1).unwrap();
        s.set("a", 2).unwrap();
        s.set("d", 9).unwrap();
        s.settle();
        s.posedge().unwrap();
        s.settle();
        assert_eq!(s.get("q").unwrap(), 7);
        s.set("we", 0).unwrap();
        s.posedge().unwrap();
        s.settle();
        assert_eq!(s.get("q").unwrap(), 9);
        assert_eq!(s.memory("mem").unwrap(), &[7, 7, 9, 7]);
    }

    #[test]
    fn comb_loop_rejected() {
        let e = VModule::parse("module l (input wire a); wire x; wire y; assign x = y & a; assign y = x; endmodule").unwrap_err();
        assert_eq!(e, SimError::CombLoop);
    }

    #[test]
    fn syntax_errors_have_lines() {
        let e = VModule::parse("module m (input wire a);\n  assign = a;\nendmodule").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}
