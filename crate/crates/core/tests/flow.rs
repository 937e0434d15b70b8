// SPDX-License-Identifier: Apache-2.0

//! End-to-end tool flows.

use std::path::PathBuf;

use hls_core::config::ToolConfig;
use hls_core::corpus::builtin;
use hls_core::flow::{compile, run_testbench_dir, sweep, verify, CompileOptions, SweepOptions, VerifyReport};
use hls_core::frontend::SourceUnit;
use hls_core::pipeline::ToolError;

const VADD: &str = "void vadd(int* a, int* b, int* c, int n) { for (int i = 0; i < n; i++) c[i] = a[i] + b[i]; }";

fn cfg(top: &str, clock_ps: u32) -> ToolConfig {
    ToolConfig {
        top: top.into(),
        clock_ps,
        ..Default::default()
    }
}

#[test]
fn compile_vadd_manifest() {
    let c = compile(&cfg("vadd", 10_000), &SourceUnit::new("vadd.c", VADD), &CompileOptions::default()).unwrap();
    let names = c.artifacts.names();
    assert!(names.len() >= 5, "{names:?}");
    for n in [
        "vadd.v",
        "vadd_tb.v",
        "vadd.report",
        "synth_ng_ultra.script",
        "testbench.json",
        "manifest.txt",
    ] {
        assert!(names.iter().any(|x| x == n), "{n} missing from {names:?}");
    }
    let manifest: Vec<&str> = c.artifacts.file("manifest.txt").unwrap().lines().collect();
    assert_eq!(manifest, names.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(hls_core::hls::report::parse_report(c.artifacts.file("vadd.report").unwrap()).is_ok());
    assert!(!names.iter().any(|n| n.ends_with(".dot")));
    let c = compile(
        &cfg("vadd", 10_000),
        &SourceUnit::new("vadd.c", VADD),
        &CompileOptions {
            dump_cdfg: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(c.artifacts.file("vadd.cdfg.dot").unwrap().starts_with("digraph"));
}

#[test]
fn compile_errors() {
    let e = compile(&cfg("vadd", 100), &SourceUnit::new("vadd.c", VADD), &CompileOptions::default())
        .err()
        .unwrap();
    assert!(e.to_string().contains("unschedulable operation"), "{e}");
    let mut c = cfg("vadd", 10_000);
    c.library_path = Some(PathBuf::from("/nonexistent/lib.xml"));
    let e = compile(&c, &SourceUnit::new("vadd.c", "int vadd( {"), &CompileOptions::default())
        .err()
        .unwrap();
    assert!(matches!(e, ToolError::Config(_)), "library errors come before parsing: {e}");
    let e = compile(
        &cfg("vadd", 10_000),
        &SourceUnit::new("vadd.c", "int vadd( {"),
        &CompileOptions::default(),
    )
    .err()
    .unwrap();
    assert!(matches!(e, ToolError::Frontend(_)));
}

#[test]
fn verify_corpus_entry_and_on_disk_testbench() {
    let e = builtin().into_iter().find(|e| e.name == "memcpy").unwrap();
    let mut c = cfg(&e.top, 4000);
    c.iface = e.iface.clone();
    let vs = e.generate_vectors(5, 4).unwrap();
    let (out, report) = verify(&c, &e.unit(), &vs).unwrap();
    assert!(report.pass, "{}", report.to_text());
    assert_eq!(report.cosim.len(), 4 * 3);
    assert_eq!(report.testbench.len(), 3);
    let parsed: VerifyReport = serde_json::from_str(out.artifacts.file("verdict.json").unwrap()).unwrap();
    assert_eq!(parsed, report);
    // cycle counts grow with the memory delays
    let cyc: Vec<u64> = report.testbench.iter().map(|t| t.cycles).collect();
    assert!(cyc[0] < cyc[1] && cyc[1] < cyc[2], "{cyc:?}");

    let dir = tempfile::tempdir().unwrap();
    out.artifacts.write_to(dir.path()).unwrap();
    let ok = run_testbench_dir(dir.path()).unwrap();
    assert!(ok.pass, "{:?}", ok.messages);
    let p = dir.path().join("expected_dst.hex");
    let mut lines: Vec<String> = std::fs::read_to_string(&p).unwrap().lines().map(String::from).collect();
    let k = (0..lines.len()).find(|&k| lines[k] != "00").unwrap_or(0);
    lines[k] = if lines[k] == "ff" { "fe".into() } else { "ff".into() };
    std::fs::write(&p, lines.join("\n") + "\n").unwrap();
    let bad = run_testbench_dir(dir.path()).unwrap();
    assert!(!bad.pass);
    assert!(bad.messages[0].contains(&format!("byte offset {k}:")), "{:?}", bad.messages);
}

#[test]
fn verify_needs_vectors() {
    let e = verify(&cfg("vadd", 10_000), &SourceUnit::new("vadd.c", VADD), &[]).err().unwrap();
    assert_eq!(e.to_string(), "no test vectors");
}

#[test]
fn sweep_sorted_and_deterministic() {
    let mut entries: Vec<_> = builtin()
        .into_iter()
        .filter(|e| ["gcd", "crc32", "matmul"].contains(&e.name.as_str()))
        .collect();
    entries.reverse();
    let o = SweepOptions {
        clocks_ps: vec![10_000, 4000],
        vectors: 3,
        ..Default::default()
    };
    let a = sweep(&entries, &ToolConfig::default(), &o).unwrap();
    assert!(a.pass, "{}", a.to_text());
    let keys: Vec<(String, u32)> = a.rows.iter().map(|r| (r.kernel.clone(), r.clock_ps)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys.len(), 6);
    assert_eq!(a, sweep(&entries, &ToolConfig::default(), &o).unwrap());
}
