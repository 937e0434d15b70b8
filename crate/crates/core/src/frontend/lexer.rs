// SPDX-License-Identifier: Apache-2.0

//! Tokenizer for MiniC.

use super::types::{Diagnostic, Pos};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int {
        value: u64,
        unsigned: bool,
        long: bool,
        hex: bool,
    },
    /// A float literal; kept as a token so the parser can reject it with a position.
    Float,
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const PUNCTS: &[&str] = &[
    "<<=", ">>=", "&&", "||", "==", "!=", "<=", ">=", "<<", ">>", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "->", "+",
    "-", "*", "/", "%", "&", "|", "^", "~", "!", "<", ">", "=", "?", ":", ";", ",", "(", ")", "{", "}", "[", "]", ".",
];

pub fn tokenize(path: &str, text: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        ($n:expr) => {{
            for _ in 0..$n {
                if bytes[i] == b'\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                i += 1;
            }
        }};
    }

    while i < bytes.len() {
        let c = bytes[i];
        let pos = Pos::new(line, col);
        if c.is_ascii_whitespace() {
            bump!(1);
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                bump!(1);
            }
            continue;
        }
        if c == b'/' && bytes.get(i + 1) == Some(&b'*') {
            bump!(2);
            loop {
                if i + 1 >= bytes.len() {
                    return Err(Diagnostic::error(path, pos, "unterminated comment"));
                }
                if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                    bump!(2);
                    break;
                }
                bump!(1);
            }
            continue;
        }
        if c == b'#' {
            return Err(Diagnostic::error(path, pos, "unsupported construct: preprocessor directive"));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                bump!(1);
            }
            out.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                pos,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let start = i;
            let hex = c == b'0' && matches!(bytes.get(i + 1), Some(b'x') | Some(b'X'));
            if hex {
                bump!(2);
                while i < bytes.len() && bytes[i].is_ascii_hexdigit() {
                    bump!(1);
                }
            } else {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    bump!(1);
                }
                if i < bytes.len() && (bytes[i] == b'.' || bytes[i] == b'e' || bytes[i] == b'E') {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.') {
                        bump!(1);
                    }
                    out.push(Token { tok: Tok::Float, pos });
                    continue;
                }
            }
            let digits = &text[start..i];
            let mut unsigned = false;
            let mut long = false;
            let mut float_suffix = false;
            while i < bytes.len() {
                match bytes[i] {
                    b'u' | b'U' => unsigned = true,
                    b'l' | b'L' => long = true,
                    b'f' | b'F' if !hex => float_suffix = true,
                    _ => break,
                }
                bump!(1);
            }
            if float_suffix {
                out.push(Token { tok: Tok::Float, pos });
                continue;
            }
            let value = if hex {
                u64::from_str_radix(&digits[2..], 16)
            } else {
                digits.parse::<u64>()
            }
            .map_err(|_| Diagnostic::error(path, pos, format!("invalid integer literal '{digits}'")))?;
            out.push(Token {
                tok: Tok::Int {
                    value,
                    unsigned,
                    long,
                    hex,
                },
                pos,
            });
            continue;
        }
        if c == b'\'' {
            // character literal
            let (value, len) = match (bytes.get(i + 1), bytes.get(i + 2), bytes.get(i + 3)) {
                (Some(b'\\'), Some(e), Some(b'\'')) => {
                    let v = match e {
                        b'n' => b'\n',
                        b't' => b'\t',
                        b'r' => b'\r',
                        b'0' => 0,
                        b'\\' => b'\\',
                        b'\'' => b'\'',
                        _ => return Err(Diagnostic::error(path, pos, "unsupported escape sequence")),
                    };
                    (v, 4)
                }
                (Some(&ch), Some(b'\''), _) if ch != b'\\' => (ch, 3),
                _ => return Err(Diagnostic::error(path, pos, "malformed character literal")),
            };
            bump!(len);
            out.push(Token {
                tok: Tok::Int {
                    value: value as u64,
                    unsigned: false,
                    long: false,
                    hex: false,
                },
                pos,
            });
            continue;
        }
        if c == b'"' {
            return Err(Diagnostic::error(path, pos, "unsupported construct: string literal"));
        }
        let rest = &text[i..];
        match PUNCTS.iter().find(|p| rest.starts_with(**p)) {
            Some(p) => {
                bump!(p.len());
                out.push(Token { tok: Tok::Punct(p), pos });
            }
            None => {
                let ch = rest.chars().next().unwrap_or('?');
                return Err(Diagnostic::error(path, pos, format!("bad character '{ch}'")));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_basic_function() {
        let toks = tokenize("t.c", "int f(){return 0x1F+5u;}").unwrap();
        assert_eq!(toks[0].tok, Tok::Ident("int".into()));
        assert!(toks.iter().any(|t| matches!(t.tok, Tok::Int { value: 31, hex: true, .. })));
        assert!(toks.iter().any(|t| matches!(
            t.tok,
            Tok::Int {
                value: 5,
                unsigned: true,
                ..
            }
        )));
    }

    #[test]
    fn float_literal_is_a_float_token() {
        let toks = tokenize("t.c", "return 1.0;").unwrap();
        assert_eq!(toks[1].tok, Tok::Float);
        let toks = tokenize("t.c", "x = 2.5f;").unwrap();
        assert_eq!(toks[2].tok, Tok::Float);
        assert_eq!(toks[3].tok, Tok::Punct(";"));
    }

    #[test]
    fn bad_character_reports_position() {
        let err = tokenize("t.c", "int f()\n{ @ }").unwrap_err();
        assert_eq!(err.pos.line, 2);
        assert_eq!(err.pos.col, 3);
        assert!(err.message.contains("bad character"));
    }

    #[test]
    fn char_literals_and_comments() {
        let toks = tokenize("t.c", "/* c */ 'A' // x\n '\\n'").unwrap();
        assert_eq!(toks.len(), 3);
        assert!(matches!(toks[0].tok, Tok::Int { value: 65, .. }));
        assert!(matches!(toks[1].tok, Tok::Int { value: 10, .. }));
    }
}
