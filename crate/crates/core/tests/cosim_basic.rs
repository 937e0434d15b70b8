// SPDX-License-Identifier: Apache-2.0

//! Cycle simulation against the reference interpreter on small kernels.

use hls_core::axi::{DelayConfig, SlaveFault};
use hls_core::charlib::ComponentLibrary;
use hls_core::frontend::SourceUnit;
use hls_core::pipeline::{synthesize, Design, HlsOptions};
use hls_core::rtlsim::{cosim_equiv, run_cosim, ArgValue, CosimConfig, MemoryImage, TestVector};

fn design(src: &str, clock_ps: u32) -> Design {
    let opts = HlsOptions {
        top: "f".into(),
        clock_ps,
        ..Default::default()
    };
    synthesize(&SourceUnit::new("k.c", src), &ComponentLibrary::default_library(), &opts).unwrap()
}

const DELAYS: [DelayConfig; 3] = [DelayConfig::new(0, 0, 0), DelayConfig::new(5, 2, 3), DelayConfig::new(17, 1, 9)];

#[test]
fn constant_return_three_cycles() {
    let d = design("int f() { return 42; }", 10_000);
    let r = run_cosim(&d.fsmd, &[], &mut [], &CosimConfig::default()).unwrap();
    assert_eq!((r.ret, r.cycles), (Some(42), 3));
}

#[test]
fn scalar_kernels_match() {
    let srcs = [
        "int f(int a, int b) { int s = 0; for (int i = 0; i < 10; i++) s += a * i - b; return s; }",
        "int f(int a, int b) { while (b != 0) { int t = b; b = a % b; a = t; } return a; }",
        "long f(int a, int b) { return (long)a * b + (a / (b | 1)) - (a >> 3) + (b << (a & 7)); }",
        "int f(int a, int b) { int x[8]; for (int i = 0; i < 8; i++) x[i] = a + i * b; int s = 0; for (int i = 7; i >= 0; i--) s = s * 3 + x[i]; return s; }",
        "char f(char a, short b) { unsigned char u = a; return (char)(u / 3 + b % 5 + (a < b)); }",
    ];
    for clock in [2500, 4000, 10_000] {
        for src in srcs {
            let d = design(src, clock);
            for (a, b) in [(7u64, 3u64), (-5i64 as u64, 12), (100, 0), (0xffff_ffff, 0x8000_0000)] {
                let v = TestVector {
                    args: vec![ArgValue::Scalar(a), ArgValue::Scalar(b)],
                    ..Default::default()
                };
                let verdict = cosim_equiv(&d.prog, &d.fsmd, &v, &CosimConfig::default()).unwrap();
                assert!(verdict.pass, "{src} @ {clock}: {:?}\n{}", verdict.mismatches, d.fsmd.dump());
                assert!(verdict.cycles > 3);
            }
        }
    }
}

const VADD: &str = "void f(int* a, int* b, int* c, int n) { for (int i = 0; i < n; i++) c[i] = a[i] + b[i]; }";

fn vadd_vector() -> TestVector {
    let mut m = vec![MemoryImage::new(), MemoryImage::new(), MemoryImage::new()];
    for i in 0..8u32 {
        m[0].write(0x100 + 4 * i, 4, (i * 3) as u64);
        m[1].write(0x202 + 4 * i, 4, (1000 - i) as u64);
    }
    TestVector {
        args: vec![
            ArgValue::Array { bundle: 0, base: 0x100 },
            ArgValue::Array { bundle: 1, base: 0x202 },
            ArgValue::Array { bundle: 2, base: 0xff8 },
            ArgValue::Scalar(8),
        ],
        mems: m,
        outputs: Vec::new(),
    }
}

#[test]
fn axi_kernel_delay_invariant() {
    let d = design(VADD, 10_000);
    let mut cycles = Vec::new();
    for delays in DELAYS {
        let verdict = cosim_equiv(&d.prog, &d.fsmd, &vadd_vector(), &CosimConfig::with_delays(delays)).unwrap();
        assert!(verdict.pass, "{delays:?}: {:?}", verdict.mismatches);
        cycles.push(verdict.cycles);
    }
    assert!(cycles[1] > cycles[0], "{cycles:?}");
}

#[test]
fn slverr_is_flagged() {
    let d = design(VADD, 10_000);
    let cfg = CosimConfig {
        slave_fault: Some(SlaveFault::SlvErr),
        ..Default::default()
    };
    let mut v = vadd_vector();
    let r = run_cosim(&d.fsmd, &v.args, &mut v.mems, &cfg).unwrap();
    assert!(r.error_response);
}

#[test]
fn trace_is_deterministic_and_complete() {
    let d = design(VADD, 10_000);
    let cfg = CosimConfig {
        trace: true,
        delays: DELAYS[1],
        ..Default::default()
    };
    let run = || {
        let mut v = vadd_vector();
        run_cosim(&d.fsmd, &v.args, &mut v.mems, &cfg).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    assert_eq!(a.trace.len() as u64, a.cycles);
}
