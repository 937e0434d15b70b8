// SPDX-License-Identifier: Apache-2.0

//! Sectioned configuration files.
//!
//! ```text
//! file    := section*
//! section := IDENT '{' item* '}'
//! item    := [IDENT ':'] IDENT ['(' [arg {',' arg}] ')'] ['=' value] ';'
//! arg     := [IDENT '='] value
//! value   := WORD | "quoted string"
//! ```
//!
//! `#` starts a comment running to the end of the line. A WORD is a run of
//! letters, digits and `_ . - + / ~`. The tool configuration uses the
//! sections `tool`, `interface`, `constraints` and `delays`; target
//! descriptors use a single `target` section. Unknown sections and keys are
//! rejected.

use std::path::PathBuf;

use thiserror::Error;

use crate::axi::{DelayConfig, InterfaceConfig};
use crate::charlib::model::ns_to_ps;
use crate::charlib::TargetDescriptor;
use crate::hls::{Constraints, FsmEncoding};
use crate::pipeline::HlsOptions;

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "HLS_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct ConfigError {
    pub line: u32,
    pub msg: String,
}

fn cerr(line: u32, msg: impl Into<String>) -> ConfigError {
    ConfigError { line, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub label: Option<String>,
    pub key: String,
    pub args: Option<Vec<(Option<String>, String)>>,
    pub value: Option<String>,
    pub line: u32,
}

impl Item {
    /// The value of a `key = value;` item.
    pub fn scalar(&self) -> Result<&str, ConfigError> {
        match (&self.label, &self.args, &self.value) {
            (None, None, Some(v)) => Ok(v),
            _ => Err(cerr(self.line, format!("expected '{} = value;'", self.key))),
        }
    }

    pub fn num<T: std::str::FromStr>(&self) -> Result<T, ConfigError> {
        let v = self.scalar()?;
        parse_num(v).ok_or_else(|| cerr(self.line, format!("bad number '{v}' for {}", self.key)))
    }

    /// Named argument lookup.
    pub fn arg(&self, name: &str) -> Option<&str> {
        self.args
            .as_ref()?
            .iter()
            .find(|(k, _)| k.as_deref() == Some(name))
            .map(|(_, v)| v.as_str())
    }

    /// Rejects named arguments outside `allowed` and any positional ones.
    pub fn check_args(&self, allowed: &[&str]) -> Result<(), ConfigError> {
        for (k, _) in self.args.iter().flatten() {
            match k {
                Some(k) if allowed.contains(&k.as_str()) => {}
                Some(k) => return Err(cerr(self.line, format!("unknown argument '{k}' to {}", self.key))),
                None => return Err(cerr(self.line, format!("{} takes named arguments only", self.key))),
            }
        }
        Ok(())
    }
}

/// Decimal, `0x` hex or negative integers.
pub fn parse_num<T: std::str::FromStr>(s: &str) -> Option<T> {
    if let Some(h) = s.strip_prefix("0x") {
        return u64::from_str_radix(&h.replace('_', ""), 16).ok()?.to_string().parse().ok();
    }
    s.replace('_', "").parse().ok()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub name: String,
    pub items: Vec<Item>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Punct(char),
}

fn lex(text: &str) -> Result<Vec<(Tok, u32)>, ConfigError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut it = text.chars().peekable();
    let word = |c: char| c.is_ascii_alphanumeric() || "_.-+/~".contains(c);
    while let Some(c) = it.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            '#' => {
                while it.peek().is_some_and(|&c| c != '\n') {
                    it.next();
                }
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match it.next() {
                        Some('"') => break,
                        Some('\n') | None => return Err(cerr(line, "unterminated string")),
                        Some(c) => s.push(c),
                    }
                }
                out.push((Tok::Word(s), line));
            }
            '{' | '}' | '(' | ')' | ',' | ';' | ':' | '=' => out.push((Tok::Punct(c), line)),
            c if word(c) => {
                let mut s = c.to_string();
                while let Some(&d) = it.peek().filter(|&&d| word(d)) {
                    s.push(d);
                    it.next();
                }
                out.push((Tok::Word(s), line));
            }
            c => return Err(cerr(line, format!("unexpected character '{c}'"))),
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<(Tok, u32)>,
    i: usize,
}

impl P {
    fn line(&self) -> u32 {
        self.toks.get(self.i).or(self.toks.last()).map_or(1, |t| t.1)
    }
    fn peek_punct(&self, c: char) -> bool {
        matches!(self.toks.get(self.i), Some((Tok::Punct(p), _)) if *p == c)
    }
    fn punct(&mut self, c: char) -> Result<(), ConfigError> {
        if self.peek_punct(c) {
            self.i += 1;
            Ok(())
        } else {
            Err(cerr(self.line(), format!("expected '{c}'")))
        }
    }
    fn word(&mut self) -> Result<String, ConfigError> {
        match self.toks.get(self.i) {
            Some((Tok::Word(w), _)) => {
                self.i += 1;
                Ok(w.clone())
            }
            _ => Err(cerr(self.line(), "expected a name or value")),
        }
    }
}

pub fn parse_sections(text: &str) -> Result<Vec<Section>, ConfigError> {
    let mut p = P { toks: lex(text)?, i: 0 };
    let mut out = Vec::new();
    while p.i < p.toks.len() {
        let line = p.line();
        let name = p.word()?;
        p.punct('{')?;
        let mut items = Vec::new();
        while !p.peek_punct('}') {
            let line = p.line();
            let mut key = p.word()?;
            let mut label = None;
            if p.peek_punct(':') {
                p.i += 1;
                label = Some(key);
                key = p.word()?;
            }
            let mut args = None;
            if p.peek_punct('(') {
                p.i += 1;
                let mut v = Vec::new();
                while !p.peek_punct(')') {
                    let a = p.word()?;
                    if p.peek_punct('=') {
                        p.i += 1;
                        v.push((Some(a), p.word()?));
                    } else {
                        v.push((None, a));
                    }
                    if !p.peek_punct(')') {
                        p.punct(',')?;
                    }
                }
                p.i += 1;
                args = Some(v);
            }
            let mut value = None;
            if p.peek_punct('=') {
                p.i += 1;
                value = Some(p.word()?);
            }
            p.punct(';')?;
            items.push(Item {
                label,
                key,
                args,
                value,
                line,
            });
        }
        p.i += 1;
        out.push(Section { name, items, line });
    }
    Ok(out)
}

/// Everything one tool invocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ToolConfig {
    pub top: String,
    pub clock_ps: u32,
    pub margin_ps: u32,
    pub max_stages: u8,
    pub target_path: Option<PathBuf>,
    pub library_path: Option<PathBuf>,
    pub iface: InterfaceConfig,
    pub constraints: Constraints,
    pub opt_level: u8,
    pub encoding: FsmEncoding,
    pub delays: Vec<DelayConfig>,
    pub out_dir: PathBuf,
}

/// The delay sets used when a configuration names none.
pub const DEFAULT_DELAYS: [DelayConfig; 3] = [DelayConfig::new(0, 0, 0), DelayConfig::new(5, 2, 3), DelayConfig::new(17, 1, 9)];

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            top: "main".into(),
            clock_ps: 10_000,
            margin_ps: 0,
            max_stages: 2,
            target_path: None,
            library_path: None,
            iface: InterfaceConfig::default(),
            constraints: Constraints::default(),
            opt_level: 1,
            encoding: FsmEncoding::Binary,
            delays: DEFAULT_DELAYS.to_vec(),
            out_dir: PathBuf::from("hls_out"),
        }
    }
}

fn clock(item: &Item) -> Result<u32, ConfigError> {
    let v = item.scalar()?;
    let ns: f64 = v.parse().map_err(|_| cerr(item.line, format!("bad clock period '{v}'")))?;
    if !(ns > 0.0 && ns.is_finite()) {
        return Err(cerr(item.line, "clock period must be positive"));
    }
    Ok(ns_to_ps(ns).max(1))
}

impl ToolConfig {
    /// Parses a configuration; sections absent from `text` keep defaults.
    pub fn parse(text: &str) -> Result<ToolConfig, ConfigError> {
        let mut c = ToolConfig::default();
        c.apply(&parse_sections(text)?)?;
        Ok(c)
    }

    /// Overlays `sections` onto `self`.
    pub fn apply(&mut self, sections: &[Section]) -> Result<(), ConfigError> {
        for s in sections {
            match s.name.as_str() {
                "tool" => self.tool(s)?,
                "interface" => self.interface(s)?,
                "constraints" => {
                    for it in &s.items {
                        self.constraints.entries.insert(it.key.clone(), it.num()?);
                    }
                }
                "delays" => {
                    self.delays.clear();
                    for it in &s.items {
                        if it.key != "set" || it.label.is_some() || it.value.is_some() {
                            return Err(cerr(it.line, format!("unknown delays item '{}'; expected set(R, G, W)", it.key)));
                        }
                        let v: Vec<u32> = it
                            .args
                            .iter()
                            .flatten()
                            .map(|(k, v)| if k.is_none() { parse_num(v) } else { None })
                            .collect::<Option<_>>()
                            .ok_or_else(|| cerr(it.line, "delays must be non-negative integers"))?;
                        match v[..] {
                            [r, g, w] => self.delays.push(DelayConfig::new(r, g, w)),
                            _ => return Err(cerr(it.line, "expected set(R, G, W)")),
                        }
                    }
                    if self.delays.is_empty() {
                        return Err(cerr(s.line, "delays section names no delay set"));
                    }
                }
                other => return Err(cerr(s.line, format!("unknown section '{other}'"))),
            }
        }
        Ok(())
    }

    fn tool(&mut self, s: &Section) -> Result<(), ConfigError> {
        for it in &s.items {
            match it.key.as_str() {
                "top" => self.top = it.scalar()?.to_string(),
                "clock_ns" => self.clock_ps = clock(it)?,
                "margin_ns" => {
                    let v = it.scalar()?;
                    let ns: f64 = v.parse().map_err(|_| cerr(it.line, format!("bad margin '{v}'")))?;
                    if !(ns >= 0.0 && ns.is_finite()) {
                        return Err(cerr(it.line, "margin must be non-negative"));
                    }
                    self.margin_ps = ns_to_ps(ns);
                }
                "max_stages" => self.max_stages = it.num()?,
                "target" => self.target_path = Some(it.scalar()?.into()),
                "library" => self.library_path = Some(it.scalar()?.into()),
                "opt_level" => {
                    self.opt_level = it.num()?;
                    if self.opt_level > 1 {
                        return Err(cerr(it.line, "opt_level must be 0 or 1"));
                    }
                }
                "fsm_encoding" => {
                    self.encoding = parse_encoding(it.scalar()?).ok_or_else(|| cerr(it.line, "fsm_encoding must be binary or onehot"))?
                }
                "out" => self.out_dir = it.scalar()?.into(),
                k => return Err(cerr(it.line, format!("unknown key '{k}' in section tool"))),
            }
        }
        Ok(())
    }

    fn interface(&mut self, s: &Section) -> Result<(), ConfigError> {
        for it in &s.items {
            match (it.label.as_deref(), it.key.as_str()) {
                (Some(p), "axi") => {
                    it.check_args(&["bundle"])?;
                    let b = it
                        .arg("bundle")
                        .and_then(parse_num)
                        .ok_or_else(|| cerr(it.line, "axi() needs bundle=N"))?;
                    self.iface.assign.push((p.to_string(), b));
                }
                (None, "share") => {
                    let names: Vec<String> = it
                        .args
                        .iter()
                        .flatten()
                        .map(|(k, v)| if k.is_none() { Some(v.clone()) } else { None })
                        .collect::<Option<_>>()
                        .ok_or_else(|| cerr(it.line, "share() takes parameter names"))?;
                    if names.len() < 2 {
                        return Err(cerr(it.line, "share() needs at least two parameters"));
                    }
                    self.iface.shares.push(names);
                }
                (None, "bus_width") => self.iface.bus_width = it.num()?,
                (_, k) => return Err(cerr(it.line, format!("unknown key '{k}' in section interface"))),
            }
        }
        Ok(())
    }

    /// The output directory after the environment override.
    pub fn resolved_out_dir(&self) -> PathBuf {
        match std::env::var_os(OUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.out_dir.clone(),
        }
    }

    pub fn hls_options(&self) -> HlsOptions {
        HlsOptions {
            top: self.top.clone(),
            clock_ps: self.clock_ps,
            margin_ps: self.margin_ps,
            max_stages: self.max_stages,
            constraints: self.constraints.clone(),
            iface: Some(self.iface.clone()),
            encoding: self.encoding,
            opt_level: self.opt_level,
        }
    }
}

pub fn parse_encoding(s: &str) -> Option<FsmEncoding> {
    match s {
        "binary" => Some(FsmEncoding::Binary),
        "onehot" | "one-hot" => Some(FsmEncoding::OneHot),
        _ => None,
    }
}

/// Parses a `target { … }` descriptor; omitted keys keep the defaults.
pub fn parse_target(text: &str) -> Result<TargetDescriptor, ConfigError> {
    let secs = parse_sections(text)?;
    let mut t = TargetDescriptor::default();
    if secs.len() != 1 || secs[0].name != "target" {
        return Err(cerr(secs.first().map_or(1, |s| s.line), "expected exactly one 'target' section"));
    }
    for it in &secs[0].items {
        match it.key.as_str() {
            "name" => t.name = it.scalar()?.to_string(),
            "lut_capacity" => t.lut_capacity = it.num()?,
            "dsp_native_width" => t.dsp_native_width = it.num()?,
            "ram_ports_per_block" => t.ram_ports_per_block = it.num()?,
            "host_clock_mhz" => t.host_clock_mhz = it.num()?,
            k => return Err(cerr(it.line, format!("unknown key '{k}' in section target"))),
        }
    }
    if t.name.is_empty() || !t.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(cerr(secs[0].line, format!("target name '{}' must be alphanumeric", t.name)));
    }
    if t.ram_ports_per_block == 0 || t.dsp_native_width == 0 {
        return Err(cerr(secs[0].line, "ram_ports_per_block and dsp_native_width must be positive"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
# everything at once
tool {
  top = vadd;
  clock_ns = 6.67;
  fsm_encoding = onehot;
  library = "libs/ng ultra.xml";
  opt_level = 0;
  out = build/vadd;
}
interface { a: axi(bundle=0); share(b, c); bus_width = 64; }
constraints { mul = 1; add32 = 2; }
delays { set(0,0,0); set(5, 2, 3); }
"#;

    #[test]
    fn full_config() {
        let c = ToolConfig::parse(FULL).unwrap();
        assert_eq!(c.top, "vadd");
        assert_eq!(c.clock_ps, 6670);
        assert_eq!(c.encoding, FsmEncoding::OneHot);
        assert_eq!(c.library_path, Some(PathBuf::from("libs/ng ultra.xml")));
        assert_eq!(c.opt_level, 0);
        assert_eq!(c.iface.assign, vec![("a".to_string(), 0)]);
        assert_eq!(c.iface.shares, vec![vec!["b".to_string(), "c".to_string()]]);
        assert_eq!(c.iface.bus_width, 64);
        assert_eq!(c.constraints.entries.get("add32"), Some(&2));
        assert_eq!(c.delays, vec![DelayConfig::new(0, 0, 0), DelayConfig::new(5, 2, 3)]);
        assert_eq!(c.out_dir, PathBuf::from("build/vadd"));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        for (text, line) in [
            ("tool { frob = 1; }", 1),
            ("tool {\n clock_ns = 0; }", 2),
            ("tool { clock_ns = -1; }", 1),
            ("widgets { }", 1),
            ("interface { share(a); }", 1),
            ("interface { a: axi(port=1); }", 1),
            ("delays { set(1,2); }", 1),
            ("tool { top = x }", 1),
            ("tool {\n\n top = \"x; }", 3),
            ("tool { fsm_encoding = gray; }", 1),
        ] {
            let e = ToolConfig::parse(text).unwrap_err();
            assert_eq!(e.line, line, "{text}: {e}");
        }
    }

    #[test]
    fn target_descriptor() {
        let t = parse_target("target { name = other_fpga; lut_capacity = 1000; }").unwrap();
        assert_eq!(t.name, "other_fpga");
        assert_eq!(t.lut_capacity, 1000);
        assert_eq!(t.dsp_native_width, 32);
        assert!(parse_target("target { colour = red; }").is_err());
        assert!(parse_target("tool { }").is_err());
    }

    #[test]
    fn numbers() {
        assert_eq!(parse_num::<u32>("0x1f"), Some(31));
        assert_eq!(parse_num::<i64>("-5"), Some(-5));
        assert_eq!(parse_num::<u32>("1_000"), Some(1000));
        assert_eq!(parse_num::<u8>("300"), None);
    }
}
