// SPDX-License-Identifier: Apache-2.0

//! Benchmark kernels and their seeded test-vector generators.
//!
//! Each entry lives in `corpus/<tag>/<name>/` as `kernel.c`, `vectors.cfg`
//! and `expected/`. `vectors.cfg` uses the configuration grammar of
//! [`crate::config`] with the sections `kernel`, `args` and optionally
//! `interface`:
//!
//! ```text
//! kernel { top = fir; tags = dsp; }
//! interface { share(a, b); }
//! args {
//!   x: array(len = 24, min = -100, max = 100, offset = 2);
//!   y: array(len = 24, output = 1);
//!   n: scalar(min = 0, max = 24);
//! }
//! ```
//!
//! Array parameter `k` (declaration order) is placed at
//! `0x1000 * (k + 1) + offset` in the memory of its bundle; `len` counts
//! elements. `sorted = 1` sorts the generated elements ascending. Every
//! array with `output = 1` is a designated output range.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::axi::{infer_interfaces, InterfaceConfig, InterfaceSpec};
use crate::config::{parse_sections, ConfigError, ToolConfig};
use crate::frontend::typed::ParamType;
use crate::frontend::{check, SourceUnit, TypedProgram};
use crate::rtlsim::{interpret, ArgValue, MemoryImage, OutputRange, TestVector};
use crate::semantics::mask;

pub const TAGS: [&str; 4] = ["vision", "dsp", "ai", "control"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("{entry}: vectors.cfg {0}", entry = .1)]
    Config(ConfigError, String),
    #[error("{0}: {1}")]
    Spec(String, String),
    #[error("{0}: {1}")]
    Io(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgSpec {
    Scalar {
        name: String,
        min: i64,
        max: i64,
    },
    Array {
        name: String,
        len: u32,
        min: i64,
        max: i64,
        offset: u32,
        output: bool,
        sorted: bool,
    },
}

impl ArgSpec {
    pub fn name(&self) -> &str {
        match self {
            ArgSpec::Scalar { name, .. } | ArgSpec::Array { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub tags: Vec<String>,
    pub top: String,
    pub source: String,
    pub iface: InterfaceConfig,
    pub args: Vec<ArgSpec>,
    /// Directory the entry was loaded from, if any.
    pub dir: Option<PathBuf>,
}

/// Where each parameter lives once interfaces are inferred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    /// Per parameter: width and signedness of the scalar or element type.
    pub params: Vec<(String, ParamType)>,
    /// Per parameter: `(bundle, base)` for arrays.
    pub places: Vec<Option<(u32, u32)>>,
    pub bundles: usize,
}

fn to_i64(it: &crate::config::Item, key: &str, default: i64) -> Result<i64, ConfigError> {
    match it.arg(key) {
        None => Ok(default),
        Some(v) => crate::config::parse_num(v).ok_or_else(|| ConfigError {
            line: it.line,
            msg: format!("bad {key} '{v}'"),
        }),
    }
}

impl CorpusEntry {
    pub fn parse(name: &str, source: &str, cfg: &str) -> Result<CorpusEntry, CorpusError> {
        CorpusEntry::parse_inner(name, source, cfg, None)
    }

    /// As [`CorpusEntry::parse`] for a stand-alone vectors file, where the
    /// `kernel` section is optional and `top` is the default top.
    pub fn parse_vectors(top: &str, source: &str, cfg: &str) -> Result<CorpusEntry, CorpusError> {
        CorpusEntry::parse_inner(top, source, cfg, Some(top))
    }

    fn parse_inner(name: &str, source: &str, cfg: &str, top: Option<&str>) -> Result<CorpusEntry, CorpusError> {
        let wrap = |e: ConfigError| CorpusError::Config(e, name.to_string());
        let secs = parse_sections(cfg).map_err(wrap)?;
        let mut e = CorpusEntry {
            name: name.to_string(),
            tags: Vec::new(),
            top: String::new(),
            source: source.to_string(),
            iface: InterfaceConfig::default(),
            args: Vec::new(),
            dir: None,
        };
        for s in &secs {
            match s.name.as_str() {
                "kernel" => {
                    for it in &s.items {
                        match it.key.as_str() {
                            "top" => e.top = it.scalar().map_err(wrap)?.to_string(),
                            "tags" => {
                                for t in it.scalar().map_err(wrap)?.split('+') {
                                    if !TAGS.contains(&t) {
                                        return Err(wrap(ConfigError {
                                            line: it.line,
                                            msg: format!("unknown tag '{t}'"),
                                        }));
                                    }
                                    e.tags.push(t.to_string());
                                }
                            }
                            k => {
                                return Err(wrap(ConfigError {
                                    line: it.line,
                                    msg: format!("unknown key '{k}' in section kernel"),
                                }))
                            }
                        }
                    }
                }
                "interface" => {
                    let mut t = ToolConfig::default();
                    t.apply(std::slice::from_ref(s)).map_err(wrap)?;
                    e.iface = t.iface;
                }
                "args" => {
                    for it in &s.items {
                        let bad = |msg: String| wrap(ConfigError { line: it.line, msg });
                        let name = it.label.clone().ok_or_else(|| bad(format!("expected 'name: {}(...)'", it.key)))?;
                        let arg = match it.key.as_str() {
                            "scalar" => {
                                it.check_args(&["min", "max", "value"]).map_err(wrap)?;
                                let v = to_i64(it, "value", 0).map_err(wrap)?;
                                let (min, max) = (to_i64(it, "min", v).map_err(wrap)?, to_i64(it, "max", v).map_err(wrap)?);
                                ArgSpec::Scalar { name, min, max }
                            }
                            "array" => {
                                it.check_args(&["len", "min", "max", "offset", "output", "sorted"]).map_err(wrap)?;
                                let len = to_i64(it, "len", 0).map_err(wrap)?;
                                if !(1..=1 << 16).contains(&len) {
                                    return Err(bad("array len must be in 1..=65536".into()));
                                }
                                ArgSpec::Array {
                                    name,
                                    len: len as u32,
                                    min: to_i64(it, "min", 0).map_err(wrap)?,
                                    max: to_i64(it, "max", 0).map_err(wrap)?,
                                    offset: to_i64(it, "offset", 0).map_err(wrap)?.clamp(0, 0xfff) as u32,
                                    output: to_i64(it, "output", 0).map_err(wrap)? != 0,
                                    sorted: to_i64(it, "sorted", 0).map_err(wrap)? != 0,
                                }
                            }
                            k => return Err(bad(format!("unknown argument kind '{k}'"))),
                        };
                        let (ArgSpec::Scalar { min, max, .. } | ArgSpec::Array { min, max, .. }) = &arg;
                        if min > max {
                            return Err(bad(format!("empty range {min}..={max}")));
                        }
                        e.args.push(arg);
                    }
                }
                other => {
                    return Err(wrap(ConfigError {
                        line: s.line,
                        msg: format!("unknown section '{other}'"),
                    }))
                }
            }
        }
        if let Some(t) = top {
            if e.top.is_empty() {
                e.top = t.to_string();
            }
            if e.tags.is_empty() {
                e.tags.push("control".into());
            }
        }
        if e.top.is_empty() {
            return Err(CorpusError::Spec(name.into(), "kernel section names no top".into()));
        }
        if e.tags.is_empty() {
            return Err(CorpusError::Spec(name.into(), "kernel section names no tags".into()));
        }
        Ok(e)
    }

    pub fn unit(&self) -> SourceUnit {
        SourceUnit::new(format!("{}/kernel.c", self.name), self.source.clone())
    }

    pub fn program(&self) -> Result<TypedProgram, CorpusError> {
        check(&self.unit(), &self.top)
            .map_err(|d| CorpusError::Spec(self.name.clone(), d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")))
    }

    pub fn interfaces(&self, prog: &TypedProgram) -> Result<InterfaceSpec, CorpusError> {
        infer_interfaces(prog, Some(&self.iface)).map_err(|e| CorpusError::Spec(self.name.clone(), e.to_string()))
    }

    /// Checks the argument list against the kernel signature and places arrays.
    pub fn layout(&self) -> Result<Layout, CorpusError> {
        let prog = self.program()?;
        let spec = self.interfaces(&prog)?;
        let params: Vec<(String, ParamType)> = prog.top_function().param_types().map(|(n, t)| (n.to_string(), t)).collect();
        let bad = |m: String| CorpusError::Spec(self.name.clone(), m);
        if params.len() != self.args.len() {
            return Err(bad(format!(
                "{} arguments described, kernel takes {}",
                self.args.len(),
                params.len()
            )));
        }
        let mut places = Vec::new();
        for (k, ((pn, pt), a)) in params.iter().zip(&self.args).enumerate() {
            if pn != a.name() {
                return Err(bad(format!("argument {k} is '{pn}', vectors.cfg says '{}'", a.name())));
            }
            places.push(match (pt, a) {
                (ParamType::Scalar(_), ArgSpec::Scalar { .. }) => None,
                (ParamType::ArrayRef(t), ArgSpec::Array { offset, len, .. }) => {
                    if offset + len * t.bytes() as u32 > 0x1000 {
                        return Err(bad(format!("'{pn}' does not fit in its 4 KiB slot")));
                    }
                    let b = spec.bundle_of(pn).ok_or_else(|| bad(format!("'{pn}' has no bundle")))?;
                    Some((b, 0x1000 * (k as u32 + 1) + offset))
                }
                _ => return Err(bad(format!("'{pn}' is described with the wrong kind"))),
            });
        }
        Ok(Layout {
            params,
            places,
            bundles: spec.bundles.len(),
        })
    }

    /// `n` vectors, reproducible from `seed`.
    pub fn generate_vectors(&self, seed: u64, n: usize) -> Result<Vec<TestVector>, CorpusError> {
        let l = self.layout()?;
        Ok(generate_with(self, &l, seed, n))
    }
}

fn draw(rng: &mut ChaCha8Rng, min: i64, max: i64) -> i64 {
    rng.gen_range(min..=max)
}

/// Vector generation against a precomputed layout.
pub fn generate_with(e: &CorpusEntry, l: &Layout, seed: u64, n: usize) -> Vec<TestVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut v = TestVector {
                args: Vec::new(),
                mems: vec![MemoryImage::new(); l.bundles],
                outputs: Vec::new(),
            };
            for ((a, (_, pt)), place) in e.args.iter().zip(&l.params).zip(&l.places) {
                match (a, place) {
                    (ArgSpec::Scalar { min, max, .. }, _) => {
                        let w = match pt {
                            ParamType::Scalar(t) | ParamType::ArrayRef(t) => t.width(),
                        };
                        v.args.push(ArgValue::Scalar(draw(&mut rng, *min, *max) as u64 & mask(w)));
                    }
                    (
                        ArgSpec::Array {
                            name,
                            len,
                            min,
                            max,
                            output,
                            sorted,
                            ..
                        },
                        Some((bundle, base)),
                    ) => {
                        let t = match pt {
                            ParamType::Scalar(t) | ParamType::ArrayRef(t) => *t,
                        };
                        let eb = t.bytes() as u32;
                        let mut vals: Vec<i64> = (0..*len).map(|_| draw(&mut rng, *min, *max)).collect();
                        if *sorted {
                            vals.sort_unstable();
                        }
                        let m = &mut v.mems[*bundle as usize];
                        for (i, x) in vals.iter().enumerate() {
                            m.write(base + i as u32 * eb, eb, *x as u64 & mask(8 * eb as u8));
                        }
                        v.args.push(ArgValue::Array {
                            bundle: *bundle,
                            base: *base,
                        });
                        if *output {
                            v.outputs.push(OutputRange {
                                name: name.clone(),
                                bundle: *bundle,
                                base: *base,
                                len: len * eb,
                            });
                        }
                    }
                    (ArgSpec::Array { .. }, None) => unreachable!("layout places every array"),
                }
            }
            v
        })
        .collect()
}

/// Reference results for `vectors`, one line per vector:
/// `v<k> ret=<value|void> <output>=<hex bytes> ...`.
pub fn expected_text(prog: &TypedProgram, vectors: &[TestVector]) -> Result<String, String> {
    let mut s = String::new();
    for (k, v) in vectors.iter().enumerate() {
        let mut mems = v.mems.clone();
        let r = interpret(prog, &v.args, &mut mems).map_err(|e| e.to_string())?;
        s.push_str(&format!("v{k} ret={}", r.ret.map_or("void".into(), |x| x.to_string())));
        for o in &v.outputs {
            let bytes: String = (0..o.len)
                .map(|i| format!("{:02x}", mems[o.bundle as usize].read_u8(o.base + i)))
                .collect();
            s.push_str(&format!(" {}={bytes}", o.name));
        }
        s.push('\n');
    }
    Ok(s)
}

/// Seed and count of the vectors recorded under `expected/`.
pub const EXPECTED_SEED: u64 = 1;
pub const EXPECTED_COUNT: usize = 3;
pub const EXPECTED_FILE: &str = "expected/seed1.txt";

macro_rules! builtin {
    ($($tag:literal / $name:literal),* $(,)?) => {
        const BUILTIN: &[(&str, &str, &str, &str, &str)] = &[$((
            $tag,
            $name,
            include_str!(concat!("../../corpus/", $tag, "/", $name, "/kernel.c")),
            include_str!(concat!("../../corpus/", $tag, "/", $name, "/vectors.cfg")),
            include_str!(concat!("../../corpus/", $tag, "/", $name, "/expected/seed1.txt")),
        )),*];
    };
}

builtin!(
    "vision" / "conv3x3",
    "vision" / "sobel",
    "vision" / "histogram",
    "dsp" / "fir",
    "dsp" / "crc32",
    "dsp" / "sat_acc",
    "dsp" / "base64",
    "ai" / "dense_relu",
    "ai" / "maxpool",
    "control" / "bubble_sort",
    "control" / "bsearch",
    "control" / "prefix_sum",
    "control" / "matmul",
    "control" / "gcd",
    "control" / "popcount",
    "control" / "dot",
    "control" / "memcpy",
    "control" / "rle",
    "control" / "fib",
    "control" / "parity",
);

/// The corpus compiled into the tool, in `<tag>/<name>` order of listing.
pub fn builtin() -> Vec<CorpusEntry> {
    BUILTIN
        .iter()
        .map(|(tag, name, src, cfg, _)| {
            let mut e = CorpusEntry::parse(name, src, cfg).expect("built-in corpus entry parses");
            e.dir = Some(PathBuf::from(format!("corpus/{tag}/{name}")));
            e
        })
        .collect()
}

/// The recorded expected results of a built-in entry.
pub fn builtin_expected(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|b| b.1 == name).map(|b| b.4)
}

/// Loads every `<tag>/<name>/` entry under `root`, sorted by name.
pub fn load_dir(root: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let io = |p: &Path, e: std::io::Error| CorpusError::Io(p.display().to_string(), e.to_string());
    let mut out = Vec::new();
    let mut tags: Vec<_> = std::fs::read_dir(root)
        .map_err(|e| io(root, e))?
        .collect::<Result<_, _>>()
        .map_err(|e| io(root, e))?;
    tags.sort_by_key(|d| d.file_name());
    for t in tags.iter().filter(|d| d.path().is_dir()) {
        let mut names: Vec<_> = std::fs::read_dir(t.path())
            .map_err(|e| io(&t.path(), e))?
            .collect::<Result<_, _>>()
            .map_err(|e| io(&t.path(), e))?;
        names.sort_by_key(|d| d.file_name());
        for n in names.iter().filter(|d| d.path().join("kernel.c").is_file()) {
            let dir = n.path();
            let src = std::fs::read_to_string(dir.join("kernel.c")).map_err(|e| io(&dir, e))?;
            let cfg = std::fs::read_to_string(dir.join("vectors.cfg")).map_err(|e| io(&dir, e))?;
            let mut e = CorpusEntry::parse(&n.file_name().to_string_lossy(), &src, &cfg)?;
            let tag = t.file_name().to_string_lossy().to_string();
            if !e.tags.contains(&tag) {
                return Err(CorpusError::Spec(e.name, format!("stored under '{tag}' but not tagged with it")));
            }
            e.dir = Some(dir);
            out.push(e);
        }
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(cfg: &str) -> CorpusEntry {
        CorpusEntry::parse("t", "int t(int* a, int n, char* o) { return n; }", cfg).unwrap()
    }

    const CFG: &str = "kernel { top = t; tags = control; }
args { a: array(len = 4, min = -5, max = 5, offset = 2); n: scalar(min = 1, max = 9); o: array(len = 3, output = 1); }";

    #[test]
    fn deterministic_and_in_range() {
        let e = entry(CFG);
        let a = e.generate_vectors(1, 3).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a, e.generate_vectors(1, 3).unwrap());
        assert_ne!(a, e.generate_vectors(2, 3).unwrap());
        for v in &a {
            let ArgValue::Array { bundle, base } = v.args[0] else { panic!() };
            assert_eq!(base, 0x1002);
            for i in 0..4 {
                let x = v.mems[bundle as usize].read(base + 4 * i, 4) as u32 as i32;
                assert!((-5..=5).contains(&x));
            }
            let ArgValue::Scalar(n) = v.args[1] else { panic!() };
            assert!((1..=9).contains(&n));
            assert_eq!(v.outputs.len(), 1);
            assert_eq!(v.outputs[0].len, 3);
            assert_eq!(v.outputs[0].base, 0x3000);
        }
    }

    #[test]
    fn zero_range_gives_zero_vectors() {
        let e = entry("kernel { top = t; tags = control; } args { a: array(len = 4); n: scalar(value = 0); o: array(len = 2); }");
        for v in e.generate_vectors(9, 4).unwrap() {
            assert!(v.mems.iter().all(|m| m.iter().next().is_none()));
            assert_eq!(v.args[1], ArgValue::Scalar(0));
        }
    }

    #[test]
    fn malformed_entries_rejected() {
        for cfg in [
            "kernel { top = t; tags = bogus; }",
            "kernel { top = t; tags = dsp; } args { a: array(len = 0); }",
            "kernel { top = t; tags = dsp; } args { a: array(len = 2, min = 3, max = 1); }",
            "kernel { top = t; tags = dsp; } args { a: vector(len = 2); }",
            "kernel { tags = dsp; }",
            "kernel { top = t; tags = dsp; } extras { }",
        ] {
            assert!(CorpusEntry::parse("t", "int t() { return 0; }", cfg).is_err(), "{cfg}");
        }
        let e = CorpusEntry::parse(
            "t",
            "int t(int* a, int n, char* o) { return n; }",
            "kernel { top = t; tags = dsp; } args { n: scalar(); }",
        )
        .unwrap();
        assert!(e.layout().is_err());
    }

    #[test]
    fn builtin_covers_every_tag() {
        let b = builtin();
        assert!(b.len() >= 20);
        for t in TAGS {
            assert!(b.iter().any(|e| e.tags.iter().any(|x| x == t)), "{t}");
        }
    }
}
