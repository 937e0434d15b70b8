// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for MiniC.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::types::{Diagnostic, Pos, ScalarType, SourceUnit};

/// Parses a source unit into an untyped tree.
pub fn parse_program(src: &SourceUnit) -> Result<Program, Vec<Diagnostic>> {
    let toks = tokenize(&src.path, &src.text).map_err(|d| vec![d])?;
    let mut p = Parser {
        path: &src.path,
        toks,
        idx: 0,
    };
    let mut functions = Vec::new();
    while !p.at_eof() {
        functions.push(p.function().map_err(|d| vec![d])?);
    }
    Ok(Program {
        path: src.path.clone(),
        functions,
    })
}

struct Parser<'a> {
    path: &'a str,
    toks: Vec<Token>,
    idx: usize,
}

type PResult<T> = Result<T, Diagnostic>;

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "do", "switch", "case", "break", "continue", "goto", "struct", "union", "typedef", "enum", "static", "extern", "sizeof", "volatile",
    "register", "auto", "inline",
];

enum TypeSpec {
    Void,
    Scalar(ScalarType),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.idx + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.idx].pos
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn err<T>(&self, pos: Pos, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::error(self.path, pos, msg))
    }

    fn unexpected<T>(&self) -> PResult<T> {
        let what = match self.peek() {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int { value, .. } => format!("'{value}'"),
            Tok::Float => return self.err(self.pos(), "unsupported construct: float literal"),
            Tok::Punct(p) => format!("'{p}'"),
            Tok::Eof => "end of input".to_string(),
        };
        self.err(self.pos(), format!("syntax error: unexpected token {what}"))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            let found = self.unexpected::<()>().unwrap_err();
            self.err(found.pos, format!("{}, expected '{p}'", found.message))
        }
    }

    fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == k)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.advance();
                Ok(s)
            }
            Tok::Ident(s) if UNSUPPORTED_KEYWORDS.contains(&s.as_str()) => self.err(self.pos(), format!("unsupported construct: {s}")),
            _ => self.unexpected(),
        }
    }

    fn at_type_start(&self) -> bool {
        matches!(self.peek(), Tok::Ident(s) if is_type_word(s))
    }

    /// Parses a type specifier sequence such as `unsigned int` or `const uint8_t`.
    fn type_spec(&mut self) -> PResult<TypeSpec> {
        let pos = self.pos();
        let mut words: Vec<String> = Vec::new();
        while let Tok::Ident(s) = self.peek().clone() {
            if !is_type_word(&s) {
                break;
            }
            if s == "float" || s == "double" {
                return self.err(self.pos(), format!("unsupported type: {s}"));
            }
            self.advance();
            if s != "const" {
                words.push(s);
            }
        }
        let joined: Vec<&str> = words.iter().map(String::as_str).collect();
        let ty = match joined.as_slice() {
            ["void"] => return Ok(TypeSpec::Void),
            ["bool"] | ["_Bool"] => ScalarType::Bool,
            ["char"] | ["signed", "char"] | ["int8_t"] => ScalarType::I8,
            ["unsigned", "char"] | ["uint8_t"] => ScalarType::U8,
            ["short"] | ["short", "int"] | ["signed", "short"] | ["int16_t"] => ScalarType::I16,
            ["unsigned", "short"] | ["unsigned", "short", "int"] | ["uint16_t"] => ScalarType::U16,
            ["int"] | ["signed"] | ["signed", "int"] | ["int32_t"] => ScalarType::I32,
            ["unsigned"] | ["unsigned", "int"] | ["uint32_t"] => ScalarType::U32,
            ["long"] | ["long", "long"] | ["long", "int"] | ["long", "long", "int"] | ["signed", "long"] | ["int64_t"] => ScalarType::I64,
            ["unsigned", "long"] | ["unsigned", "long", "long"] | ["uint64_t"] => ScalarType::U64,
            [] => return self.unexpected(),
            _ => return self.err(pos, format!("unsupported type: {}", joined.join(" "))),
        };
        Ok(TypeSpec::Scalar(ty))
    }

    fn scalar_type(&mut self, what: &str) -> PResult<ScalarType> {
        let pos = self.pos();
        match self.type_spec()? {
            TypeSpec::Scalar(t) => Ok(t),
            TypeSpec::Void => self.err(pos, format!("void is not allowed as {what} type")),
        }
    }

    fn function(&mut self) -> PResult<Function> {
        let pos = self.pos();
        if let Tok::Ident(s) = self.peek() {
            if UNSUPPORTED_KEYWORDS.contains(&s.as_str()) {
                return self.err(pos, format!("unsupported construct: {s}"));
            }
        }
        if !self.at_type_start() {
            return self.unexpected();
        }
        let ret = match self.type_spec()? {
            TypeSpec::Void => None,
            TypeSpec::Scalar(t) => Some(t),
        };
        if self.is_punct("*") {
            return self.err(self.pos(), "unsupported construct: pointer return type");
        }
        let name = self.ident()?;
        if !self.is_punct("(") {
            return self.err(pos, "unsupported construct: global variable");
        }
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if self.is_keyword("void") && matches!(self.peek_at(1), Tok::Punct(")")) {
            self.advance();
        }
        if !self.is_punct(")") {
            loop {
                params.push(self.param()?);
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        if self.is_punct(";") {
            return self.err(self.pos(), "unsupported construct: function declaration without body");
        }
        let body = self.block()?;
        Ok(Function {
            name,
            ret,
            params,
            body,
            pos,
        })
    }

    fn param(&mut self) -> PResult<ParamDecl> {
        let pos = self.pos();
        let ty = self.scalar_type("parameter")?;
        let mut is_array = false;
        if self.eat_punct("*") {
            is_array = true;
            if self.is_punct("*") {
                return self.err(self.pos(), "unsupported construct: pointer to pointer");
            }
            // `T* const p`
            while self.is_keyword("const") {
                self.advance();
            }
        }
        if self.is_punct("(") {
            return self.err(self.pos(), "unsupported construct: function pointer");
        }
        let name = self.ident()?;
        if self.eat_punct("[") {
            if is_array {
                return self.err(self.pos(), "unsupported construct: pointer to array");
            }
            // an explicit extent on a parameter is accepted and ignored
            if !self.is_punct("]") {
                self.expr()?;
            }
            self.expect_punct("]")?;
            is_array = true;
        }
        Ok(ParamDecl { name, ty, is_array, pos })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_punct("{")?;
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if self.at_eof() {
                return self.unexpected();
            }
            self.stmt_into(&mut out)?;
        }
        self.advance();
        Ok(out)
    }

    fn single_stmt(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        self.stmt_into(&mut out)?;
        Ok(out)
    }

    /// Body of `if`/`while`/`for`: a block, or a single statement wrapped into one.
    fn body(&mut self) -> PResult<Vec<Stmt>> {
        if self.is_punct("{") {
            self.block()
        } else {
            self.single_stmt()
        }
    }

    fn stmt_into(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        let pos = self.pos();
        if self.is_punct("{") {
            let b = self.block()?;
            out.push(Stmt {
                kind: StmtKind::Block(b),
                pos,
            });
            return Ok(());
        }
        if self.eat_punct(";") {
            out.push(Stmt {
                kind: StmtKind::Block(Vec::new()),
                pos,
            });
            return Ok(());
        }
        if let Tok::Ident(kw) = self.peek().clone() {
            match kw.as_str() {
                "if" => {
                    self.advance();
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    let then = self.body()?;
                    let els = if self.is_keyword("else") {
                        self.advance();
                        Some(self.body()?)
                    } else {
                        None
                    };
                    out.push(Stmt {
                        kind: StmtKind::If { cond, then, els },
                        pos,
                    });
                    return Ok(());
                }
                "while" => {
                    self.advance();
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    let body = self.body()?;
                    out.push(Stmt {
                        kind: StmtKind::While { cond, body },
                        pos,
                    });
                    return Ok(());
                }
                "for" => {
                    self.advance();
                    self.expect_punct("(")?;
                    let init = if self.eat_punct(";") {
                        None
                    } else {
                        let mut v = Vec::new();
                        if self.at_type_start() {
                            self.decl_into(&mut v)?;
                        } else {
                            v.push(self.simple_stmt()?);
                            self.expect_punct(";")?;
                        }
                        if v.len() != 1 {
                            return self.err(pos, "unsupported construct: multiple declarations in for-init");
                        }
                        Some(Box::new(v.pop().unwrap()))
                    };
                    let cond = if self.is_punct(";") { None } else { Some(self.expr()?) };
                    self.expect_punct(";")?;
                    let step = if self.is_punct(")") {
                        None
                    } else {
                        Some(Box::new(self.simple_stmt()?))
                    };
                    self.expect_punct(")")?;
                    let body = self.body()?;
                    out.push(Stmt {
                        kind: StmtKind::For { init, cond, step, body },
                        pos,
                    });
                    return Ok(());
                }
                "return" => {
                    self.advance();
                    let value = if self.is_punct(";") { None } else { Some(self.expr()?) };
                    self.expect_punct(";")?;
                    out.push(Stmt {
                        kind: StmtKind::Return(value),
                        pos,
                    });
                    return Ok(());
                }
                "else" => return self.unexpected(),
                k if UNSUPPORTED_KEYWORDS.contains(&k) => {
                    return self.err(pos, format!("unsupported construct: {k}"));
                }
                k if is_type_word(k) => return self.decl_into(out),
                _ => {}
            }
        }
        let s = self.simple_stmt()?;
        self.expect_punct(";")?;
        out.push(s);
        Ok(())
    }

    /// `T a = e, b[4] = {..};`
    fn decl_into(&mut self, out: &mut Vec<Stmt>) -> PResult<()> {
        let ty = self.scalar_type("variable")?;
        loop {
            let pos = self.pos();
            if self.is_punct("*") {
                return self.err(pos, "unsupported construct: pointer variable");
            }
            let name = self.ident()?;
            let array_len = if self.eat_punct("[") {
                if self.is_punct("]") {
                    return self.err(self.pos(), "array bound not a constant: missing extent");
                }
                let e = self.expr()?;
                self.expect_punct("]")?;
                Some(e)
            } else {
                None
            };
            let init = if self.eat_punct("=") {
                if self.eat_punct("{") {
                    let mut items = Vec::new();
                    if !self.is_punct("}") {
                        loop {
                            items.push(self.expr()?);
                            if !self.eat_punct(",") || self.is_punct("}") {
                                break;
                            }
                        }
                    }
                    self.expect_punct("}")?;
                    Some(Init::List(items))
                } else {
                    Some(Init::Scalar(self.expr()?))
                }
            } else {
                None
            };
            out.push(Stmt {
                kind: StmtKind::Decl { name, ty, array_len, init },
                pos,
            });
            if !self.eat_punct(",") {
                break;
            }
        }
        self.expect_punct(";")
    }

    /// Assignment, increment/decrement, or call statement (without the `;`).
    fn simple_stmt(&mut self) -> PResult<Stmt> {
        let pos = self.pos();
        if self.is_punct("++") || self.is_punct("--") {
            let inc = self.is_punct("++");
            self.advance();
            let target = self.lvalue()?;
            return Ok(Stmt {
                kind: StmtKind::IncDec { target, inc },
                pos,
            });
        }
        if self.is_punct("*") {
            return self.err(pos, "unsupported construct: pointer dereference");
        }
        let is_call = matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Punct("("));
        if is_call {
            let e = self.expr()?;
            return Ok(Stmt {
                kind: StmtKind::Expr(e),
                pos,
            });
        }
        let target = self.lvalue()?;
        let op = match self.peek() {
            Tok::Punct("=") => None,
            Tok::Punct("+=") => Some(BinOp::Add),
            Tok::Punct("-=") => Some(BinOp::Sub),
            Tok::Punct("*=") => Some(BinOp::Mul),
            Tok::Punct("/=") => Some(BinOp::Div),
            Tok::Punct("%=") => Some(BinOp::Rem),
            Tok::Punct("&=") => Some(BinOp::And),
            Tok::Punct("|=") => Some(BinOp::Or),
            Tok::Punct("^=") => Some(BinOp::Xor),
            Tok::Punct("<<=") => Some(BinOp::Shl),
            Tok::Punct(">>=") => Some(BinOp::Shr),
            Tok::Punct("++") | Tok::Punct("--") => {
                let inc = self.is_punct("++");
                self.advance();
                return Ok(Stmt {
                    kind: StmtKind::IncDec { target, inc },
                    pos,
                });
            }
            _ => return self.unexpected(),
        };
        self.advance();
        let value = self.expr()?;
        Ok(Stmt {
            kind: StmtKind::Assign { target, op, value },
            pos,
        })
    }

    fn lvalue(&mut self) -> PResult<LValue> {
        let name = self.ident()?;
        if self.eat_punct("[") {
            let idx = self.expr()?;
            self.expect_punct("]")?;
            if self.is_punct("[") {
                return self.err(self.pos(), "unsupported construct: multi-dimensional array");
            }
            Ok(LValue::Index(name, idx))
        } else {
            Ok(LValue::Var(name))
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let cond = self.binary(1)?;
        if self.is_punct("?") {
            let pos = cond.pos;
            self.advance();
            let a = self.expr()?;
            self.expect_punct(":")?;
            let b = self.expr()?;
            return Ok(Expr {
                kind: ExprKind::Ternary(Box::new(cond), Box::new(a), Box::new(b)),
                pos,
            });
        }
        if self.is_punct("=") {
            return self.err(self.pos(), "unsupported construct: assignment inside expression");
        }
        Ok(cond)
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let op = match self.peek() {
            Tok::Punct(p) => match *p {
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                "%" => BinOp::Rem,
                "<<" => BinOp::Shl,
                ">>" => BinOp::Shr,
                "&" => BinOp::And,
                "|" => BinOp::Or,
                "^" => BinOp::Xor,
                "&&" => BinOp::LAnd,
                "||" => BinOp::LOr,
                "==" => BinOp::Eq,
                "!=" => BinOp::Ne,
                "<" => BinOp::Lt,
                "<=" => BinOp::Le,
                ">" => BinOp::Gt,
                ">=" => BinOp::Ge,
                _ => return None,
            },
            _ => return None,
        };
        Some(op)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            let pos = lhs.pos;
            self.advance();
            let rhs = self.binary(prec + 1)?;
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        let op = match self.peek() {
            Tok::Punct("-") => Some(UnOp::Neg),
            Tok::Punct("~") => Some(UnOp::BitNot),
            Tok::Punct("!") => Some(UnOp::LNot),
            Tok::Punct("+") => {
                self.advance();
                return self.unary();
            }
            Tok::Punct("&") => return self.err(pos, "unsupported construct: address-of"),
            Tok::Punct("*") => return self.err(pos, "unsupported construct: pointer dereference"),
            Tok::Punct("++") | Tok::Punct("--") => return self.err(pos, "unsupported construct: increment inside expression"),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let e = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Unary(op, Box::new(e)),
                pos,
            });
        }
        // cast
        if self.is_punct("(") {
            if let Tok::Ident(s) = self.peek_at(1) {
                if is_type_word(s) {
                    self.advance();
                    let ty = self.scalar_type("cast")?;
                    if self.is_punct("*") {
                        return self.err(self.pos(), "unsupported construct: pointer cast");
                    }
                    self.expect_punct(")")?;
                    let e = self.unary()?;
                    return Ok(Expr {
                        kind: ExprKind::Cast(ty, Box::new(e)),
                        pos,
                    });
                }
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int {
                value,
                unsigned,
                long,
                hex,
            } => {
                self.advance();
                Ok(Expr {
                    kind: ExprKind::Int(IntLit {
                        value,
                        unsigned,
                        long,
                        hex,
                    }),
                    pos,
                })
            }
            Tok::Float => self.err(pos, "unsupported construct: float literal"),
            Tok::Punct("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.advance();
                Ok(Expr {
                    kind: ExprKind::Cast(
                        ScalarType::Bool,
                        Box::new(Expr {
                            kind: ExprKind::Int(IntLit {
                                value: (s == "true") as u64,
                                unsigned: false,
                                long: false,
                                hex: false,
                            }),
                            pos,
                        }),
                    ),
                    pos,
                })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    return Ok(Expr {
                        kind: ExprKind::Call(name, args),
                        pos,
                    });
                }
                if self.eat_punct("[") {
                    let idx = self.expr()?;
                    self.expect_punct("]")?;
                    if self.is_punct("[") {
                        return self.err(self.pos(), "unsupported construct: multi-dimensional array");
                    }
                    return Ok(Expr {
                        kind: ExprKind::Index(name, Box::new(idx)),
                        pos,
                    });
                }
                if self.is_punct("++") || self.is_punct("--") {
                    return self.err(self.pos(), "unsupported construct: increment inside expression");
                }
                if self.is_punct(".") || self.is_punct("->") {
                    return self.err(self.pos(), "unsupported construct: member access");
                }
                Ok(Expr {
                    kind: ExprKind::Var(name),
                    pos,
                })
            }
            _ => self.unexpected(),
        }
    }
}

fn is_type_word(s: &str) -> bool {
    matches!(
        s,
        "int"
            | "unsigned"
            | "signed"
            | "char"
            | "short"
            | "long"
            | "bool"
            | "_Bool"
            | "void"
            | "const"
            | "float"
            | "double"
            | "int8_t"
            | "int16_t"
            | "int32_t"
            | "int64_t"
            | "uint8_t"
            | "uint16_t"
            | "uint32_t"
            | "uint64_t"
    )
}

fn is_reserved(s: &str) -> bool {
    is_type_word(s) || UNSUPPORTED_KEYWORDS.contains(&s) || matches!(s, "if" | "else" | "while" | "for" | "return" | "true" | "false")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Program, Vec<Diagnostic>> {
        parse_program(&SourceUnit::new("t.c", s))
    }

    #[test]
    fn minimal_function() {
        let p = parse("int f(){return 5;}").unwrap();
        assert_eq!(p.functions.len(), 1);
        let f = &p.functions[0];
        assert_eq!(f.name, "f");
        assert_eq!(f.ret, Some(ScalarType::I32));
        match &f.body[0].kind {
            StmtKind::Return(Some(Expr {
                kind: ExprKind::Int(lit), ..
            })) => assert_eq!(lit.value, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scalar_and_array_reference_params() {
        let p = parse("int f(int a, int* b){return a+b[0];}").unwrap();
        let f = &p.functions[0];
        assert_eq!(f.params.len(), 2);
        assert!(!f.params[0].is_array);
        assert!(f.params[1].is_array);
        let q = parse("int f(int a, int b[]){return a+b[0];}").unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn float_type_rejected_with_position() {
        let err = parse("float f(){return 1.0;}").unwrap_err();
        assert_eq!(err[0].message, "unsupported type: float");
        assert_eq!(err[0].pos.line, 1);
        assert_eq!(err[0].to_string(), "t.c:1:1: error: unsupported type: float");
    }

    #[test]
    fn rejects_unsupported_constructs() {
        for src in [
            "int f(int a){int* p; return 0;}",
            "int f(int a){return &a;}",
            "int f(int* a){return *a;}",
            "int f(){return 1.5;}",
            "int g; int f(){return 0;}",
            "int f(){ do { } while(1); return 0; }",
            "struct s; int f(){return 0;}",
            "int f(int (*g)(int)){return 0;}",
            "#include <stdio.h>\nint f(){return 0;}",
            "int f(){ int x; x = 1 = 2; return x; }",
        ] {
            let err = parse(src).unwrap_err();
            assert!(!err.is_empty(), "{src}");
        }
    }

    #[test]
    fn precedence_and_ternary() {
        let p = parse("int f(int a,int b){return a+b*2<<1 == 3 ? a : b;}").unwrap();
        match &p.functions[0].body[0].kind {
            StmtKind::Return(Some(Expr {
                kind: ExprKind::Ternary(c, _, _),
                ..
            })) => match &c.kind {
                ExprKind::Binary(BinOp::Eq, l, _) => match &l.kind {
                    ExprKind::Binary(BinOp::Shl, ll, _) => {
                        assert!(matches!(ll.kind, ExprKind::Binary(BinOp::Add, _, _)))
                    }
                    other => panic!("{other:?}"),
                },
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn statements() {
        let src = "void f(uint8_t* x, int n){ int s = 0, t[4] = {1,2}; for(int i=0;i<n;i++){ s += x[i]; t[i&3]++; } if (s) s = 1; else { s--; } while(n) n = n - 1; }";
        let p = parse(src).unwrap();
        assert_eq!(p.functions[0].ret, None);
        assert_eq!(p.functions[0].body.len(), 5);
    }
}
