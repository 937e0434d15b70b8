// SPDX-License-Identifier: Apache-2.0

//! The emitted Verilog, run in the in-repo interpreter, must agree cycle for
//! cycle with the FSMD simulator and value for value with the reference
//! interpreter.

use hls_core::axi::{DelayConfig, SlaveFault};
use hls_core::backend::emit_verilog;
use hls_core::charlib::ComponentLibrary;
use hls_core::frontend::SourceUnit;
use hls_core::hls::FsmEncoding;
use hls_core::pipeline::{synthesize, Design, HlsOptions};
use hls_core::rtlsim::{interpret, run_cosim, run_verilog, ArgValue, CosimConfig, MemoryImage};

fn design(src: &str, clock_ps: u32, encoding: FsmEncoding) -> Design {
    let opts = HlsOptions {
        top: "f".into(),
        clock_ps,
        encoding,
        ..Default::default()
    };
    synthesize(&SourceUnit::new("k.c", src), &ComponentLibrary::default_library(), &opts).unwrap()
}

/// Runs both simulators on copies of `mems` and asserts they agree.
fn three_way(d: &Design, args: &[ArgValue], mems: &[MemoryImage], cfg: &CosimConfig) -> u64 {
    let text = emit_verilog(&d.fsmd);
    let mut m1 = mems.to_vec();
    let mut m2 = mems.to_vec();
    let mut m3 = mems.to_vec();
    let a = run_cosim(&d.fsmd, args, &mut m1, cfg).unwrap();
    let b = run_verilog(&text, args, &mut m2, cfg).unwrap_or_else(|e| panic!("{e}\n{text}"));
    assert_eq!(
        (a.ret, a.cycles, a.error_response),
        (b.ret, b.cycles, b.error_response),
        "\n{}",
        d.fsmd.dump()
    );
    assert_eq!(m1, m2);
    if cfg.slave_fault.is_none() {
        let r = interpret(&d.prog, args, &mut m3).unwrap();
        assert_eq!(r.ret, a.ret);
        assert_eq!(m3, m1);
    }
    a.cycles
}

const SCALAR: [&str; 6] = [
    "int f(int a, int b) { int s = 0; for (int i = 0; i < 10; i++) s += a * i - b; return s; }",
    "int f(int a, int b) { while (b != 0) { int t = b; b = a % b; a = t; } return a; }",
    "long f(int a, int b) { return (long)a * b + (a / (b | 1)) - (a >> 3) + (b << (a & 7)); }",
    "int f(int a, int b) { int x[8]; for (int i = 0; i < 8; i++) x[i] = a + i * b; int s = 0; for (int i = 7; i >= 0; i--) s = s * 3 + x[i]; return s; }",
    "char f(char a, short b) { unsigned char u = a; return (char)(u / 3 + b % 5 + (a < b)); }",
    "unsigned f(unsigned a, int b) { unsigned long p = (unsigned long)a * (unsigned long)a; return (unsigned)(p >> 17) ^ (unsigned)(b >> 2) ^ (a >> (b & 31)); }",
];

#[test]
fn scalar_kernels_agree() {
    for clock in [2500, 4000, 10_000] {
        for src in SCALAR {
            let d = design(src, clock, FsmEncoding::Binary);
            for (a, b) in [(7u64, 3u64), (-5i64 as u64, 12), (100, 0), (0xffff_ffff, 0x8000_0000)] {
                three_way(&d, &[ArgValue::Scalar(a), ArgValue::Scalar(b)], &[], &CosimConfig::default());
            }
        }
    }
}

#[test]
fn one_hot_matches_binary() {
    for src in SCALAR {
        let bin = design(src, 4000, FsmEncoding::Binary);
        let hot = design(src, 4000, FsmEncoding::OneHot);
        let args = [ArgValue::Scalar(1234), ArgValue::Scalar(-77i64 as u64)];
        assert_eq!(
            three_way(&bin, &args, &[], &CosimConfig::default()),
            three_way(&hot, &args, &[], &CosimConfig::default())
        );
    }
}

const VADD: &str = "void f(int* a, int* b, int* c, int n) { for (int i = 0; i < n; i++) c[i] = a[i] + b[i]; }";
const MIXED: &str = "long f(short* p, char* q, long* r, int n) {
    long s = 0;
    for (int i = 0; i < n; i++) { s += p[i] * q[i]; r[i] = s + q[i]; p[i] = (short)(p[i] >> 1); }
    return s;
}";

fn images(len: u32, bases: &[u32]) -> Vec<MemoryImage> {
    bases
        .iter()
        .enumerate()
        .map(|(k, &b)| {
            let mut m = MemoryImage::new();
            for i in 0..len * 8 {
                m.write_u8(b + i, (i * 37 + k as u32 * 11) as u8);
            }
            m
        })
        .collect()
}

#[test]
fn axi_kernels_agree_under_delays() {
    for delays in [DelayConfig::new(0, 0, 0), DelayConfig::new(5, 2, 3), DelayConfig::new(17, 1, 9)] {
        let cfg = CosimConfig::with_delays(delays);
        let d = design(VADD, 10_000, FsmEncoding::Binary);
        let bases = [0x100, 0x202, 0xff8];
        let args: Vec<ArgValue> = bases
            .iter()
            .enumerate()
            .map(|(k, &base)| ArgValue::Array { bundle: k as u32, base })
            .chain([ArgValue::Scalar(8)])
            .collect();
        three_way(&d, &args, &images(8, &bases), &cfg);
        let d = design(MIXED, 4000, FsmEncoding::Binary);
        let bases = [0xff9, 0x33, 0x7ffd];
        let args: Vec<ArgValue> = bases
            .iter()
            .enumerate()
            .map(|(k, &base)| ArgValue::Array { bundle: k as u32, base })
            .chain([ArgValue::Scalar(6)])
            .collect();
        three_way(&d, &args, &images(8, &bases), &cfg);
    }
}

#[test]
fn slave_errors_reach_the_port() {
    let d = design(VADD, 10_000, FsmEncoding::Binary);
    let cfg = CosimConfig {
        slave_fault: Some(SlaveFault::SlvErr),
        ..Default::default()
    };
    let bases = [0x100, 0x200, 0x300];
    let args: Vec<ArgValue> = bases
        .iter()
        .enumerate()
        .map(|(k, &base)| ArgValue::Array { bundle: k as u32, base })
        .chain([ArgValue::Scalar(2)])
        .collect();
    three_way(&d, &args, &images(2, &bases), &cfg);
}

#[test]
fn emission_is_deterministic() {
    for src in SCALAR.iter().chain([&VADD, &MIXED]) {
        let d = design(src, 4000, FsmEncoding::Binary);
        assert_eq!(emit_verilog(&d.fsmd), emit_verilog(&d.fsmd));
        let text = emit_verilog(&d.fsmd);
        assert_eq!(text.matches("// dual-port RAM").count(), d.fsmd.rams.len());
        assert_eq!(text.matches(": begin\n").count(), d.fsmd.states.len());
    }
}
