// SPDX-License-Identifier: Apache-2.0

//! MiniC front-end: lexing, parsing and type checking.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod typeck;
pub mod typed;
pub mod types;

pub use parser::parse_program;
pub use typeck::typecheck;
pub use typed::TypedProgram;
pub use types::{Diagnostic, ScalarType, Severity, SourceUnit};

/// Parses and type-checks `src`, selecting `top` for synthesis.
pub fn check(src: &SourceUnit, top: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
    let prog = parse_program(src)?;
    typecheck(&prog, top)
}
