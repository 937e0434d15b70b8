// SPDX-License-Identifier: Apache-2.0

//! Runs the `minihls` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const VADD: &str = "void vadd(int* a, int* b, int* c, int n) { for (int i = 0; i < n; i++) c[i] = a[i] + b[i]; }";
const VADD_VECTORS: &str = "args {
  a: array(len = 8, min = -100, max = 100, offset = 1);
  b: array(len = 8, min = -100, max = 100);
  c: array(len = 8, output = 1, offset = 2);
  n: scalar(min = 0, max = 8);
}";

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus")
}

fn minihls(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_minihls"));
    c.args(args).env_remove("HLS_OUT_DIR");
    if let Some(d) = env_out {
        c.env("HLS_OUT_DIR", d);
    }
    c.output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn setup() -> (tempfile::TempDir, String, String) {
    let d = tempfile::tempdir().unwrap();
    let src = d.path().join("vadd.c");
    std::fs::write(&src, VADD).unwrap();
    let vec = d.path().join("vadd.vectors");
    std::fs::write(&vec, VADD_VECTORS).unwrap();
    (d, src.display().to_string(), vec.display().to_string())
}

#[test]
fn compile_writes_outputs_and_report() {
    let (d, src, _) = setup();
    let out = d.path().join("out");
    let o = minihls(
        &[
            "compile",
            &src,
            "--clock-ns",
            "10",
            "--report",
            "--dump-cdfg",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(text(&o.stdout).starts_with("report 1\ntop vadd\nclock_ps 10000\n"));
    let manifest = std::fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.lines().count() >= 5);
    for f in manifest.lines() {
        assert!(out.join(f).is_file(), "{f}");
    }
    assert!(out.join("vadd.cdfg.dot").is_file());
}

#[test]
fn compile_errors_exit_2() {
    let (d, src, _) = setup();
    let out = d.path().join("out");
    let o = minihls(&["compile", &src, "--clock-ns", "0.1", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("unschedulable operation"), "{}", text(&o.stderr));
    assert!(!out.exists(), "nothing written on failure");

    let cfg = d.path().join("bad.cfg");
    std::fs::write(&cfg, "tool { top = vadd; library = /no/such/lib.xml; }").unwrap();
    let o = minihls(&["compile", &src, "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("config error"), "{}", text(&o.stderr));

    std::fs::write(&cfg, "tool { top = vadd; colour = red; }").unwrap();
    let o = minihls(&["compile", &src, "--config", cfg.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("unknown key 'colour'"));

    let o = minihls(&["compile", &src, "--constrain", "mul"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_then_cosim_detects_broken_expectation() {
    let (d, src, vec) = setup();
    let out = d.path().join("v");
    let o = minihls(
        &[
            "verify",
            &src,
            "--vectors",
            &vec,
            "--count",
            "5",
            "--clock-ns",
            "4",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}{}", text(&o.stdout), text(&o.stderr));
    let stdout = text(&o.stdout);
    let ok = |kind: &str| stdout.lines().filter(|l| l.starts_with(kind) && l.contains(" PASS ")).count();
    assert_eq!((ok("cosim "), ok("testbench ")), (5 * 3, 3), "{stdout}");
    assert!(stdout.ends_with("\nPASS\n"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);

    let o = minihls(&["cosim", "--out", out.to_str().unwrap()], None);
    assert!(o.status.success());
    assert!(text(&o.stdout).starts_with("PASS"));

    let p = out.join("expected_c.hex");
    let mut lines: Vec<String> = std::fs::read_to_string(&p).unwrap().lines().map(String::from).collect();
    lines[3] = if lines[3] == "5a" { "a5".into() } else { "5a".into() };
    std::fs::write(&p, lines.join("\n") + "\n").unwrap();
    let o = minihls(&["cosim", "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stdout).contains("c byte offset 3:"), "{}", text(&o.stdout));
}

#[test]
fn verify_without_vectors_fails() {
    let (d, src, _) = setup();
    let o = minihls(&["verify", &src, "--out", d.path().join("x").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("no test vectors"));
    let (_, src, vec) = setup();
    let o = minihls(&["verify", &src, "--vectors", &vec, "--count", "0"], Some(d.path()));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn out_dir_from_environment() {
    let (d, src, _) = setup();
    let env_out = d.path().join("env_out");
    let o = minihls(&["compile", &src], Some(&env_out));
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(env_out.join("vadd.v").is_file());
}

#[test]
fn charlib_build_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let t = d.path().join("t.target");
    std::fs::write(&t, "target { name = small_fpga; lut_capacity = 20000; }").unwrap();
    let o = minihls(
        &[
            "charlib",
            "build",
            "--target",
            t.to_str().unwrap(),
            "--widths",
            "8,32",
            "--clocks-ns",
            "4,10",
            "--out",
            d.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", text(&o.stderr));
    let lib = hls_core::charlib::import_xml(&std::fs::read_to_string(d.path().join("library.xml")).unwrap()).unwrap();
    assert_eq!(lib.target.name, "small_fpga");
    assert!(lib.records.keys().all(|(i, _)| i.width != 16 && i.width != 64));
    // the library drives a compile
    let src = d.path().join("k.c");
    std::fs::write(&src, "int k(int a, int b) { return a * b + a; }").unwrap();
    let cfg = d.path().join("k.cfg");
    std::fs::write(
        &cfg,
        format!(
            "tool {{ top = k; clock_ns = 4; library = \"{}\"; }}",
            d.path().join("library.xml").display()
        ),
    )
    .unwrap();
    let out = d.path().join("o");
    let o = minihls(
        &[
            "compile",
            src.to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert!(out.join("synth_small_fpga.script").is_file());
}

#[test]
fn sweep_over_directory_corpus() {
    let d = tempfile::tempdir().unwrap();
    for (tag, name) in [("control", "gcd"), ("dsp", "crc32")] {
        let dst = d.path().join("c").join(tag).join(name);
        std::fs::create_dir_all(&dst).unwrap();
        for f in ["kernel.c", "vectors.cfg"] {
            std::fs::copy(corpus().join(tag).join(name).join(f), dst.join(f)).unwrap();
        }
    }
    let out = d.path().join("s");
    let o = minihls(
        &[
            "sweep",
            "--corpus",
            d.path().join("c").to_str().unwrap(),
            "--clocks-ns",
            "4,10",
            "--vectors",
            "3",
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    );
    assert!(o.status.success(), "{}{}", text(&o.stdout), text(&o.stderr));
    let rows: Vec<String> = text(&o.stdout).lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("crc32 4000 ") && rows[3].starts_with("gcd 10000 "), "{rows:?}");
    assert!(out.join("sweep.json").is_file());
}
