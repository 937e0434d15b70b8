// SPDX-License-Identifier: Apache-2.0

//! Backend synthesis script template. The dialect is generic: one command
//! per line, in the order create project, add sources, set top, constrain
//! the clock, synthesize, place, route, report timing. Only the two lines
//! naming the target depend on it.

use std::fmt::Write;

use crate::charlib::TargetDescriptor;

use super::BackendError;

/// Script for `files` (manifest order) with `top` clocked at `clock_ps`.
pub fn emit_synthesis_script(target: &TargetDescriptor, files: &[String], top: &str, clock_ps: u32) -> Result<String, BackendError> {
    if files.is_empty() {
        return Err(BackendError::EmptyManifest);
    }
    if clock_ps == 0 {
        return Err(BackendError::Config("clock period must be positive".into()));
    }
    let ns = clock_ps as f64 / 1000.0;
    let mhz = 1.0e6 / clock_ps as f64;
    let mut s = String::new();
    let _ = writeln!(s, "# backend flow template: logic synthesis, place, route, timing analysis");
    let _ = writeln!(s, "# generic stand-in dialect; not executed by this tool");
    let _ = writeln!(s, "target {}", target.name);
    let _ = writeln!(s, "create_project {top}_{}", target.name);
    for f in files.iter().filter(|f| f.ends_with(".v") && !f.ends_with("_tb.v")) {
        let _ = writeln!(s, "add_file {f}");
    }
    let _ = writeln!(s, "set_top {top}");
    let _ = writeln!(s, "create_clock -name clk -period {} -frequency_mhz {}", trim(ns), trim(mhz));
    let _ = writeln!(s, "synthesize");
    let _ = writeln!(s, "place");
    let _ = writeln!(s, "route");
    let _ = writeln!(s, "report_timing");
    Ok(s)
}

/// Shortest decimal form with at most three fractional digits.
fn trim(x: f64) -> String {
    let s = format!("{x:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_ns_is_100_mhz() {
        let s = emit_synthesis_script(&TargetDescriptor::default(), &["f.v".into()], "f", 10_000).unwrap();
        assert!(s.contains("-frequency_mhz 100\n"), "{s}");
        assert!(s.contains("-period 10 "));
        let s = emit_synthesis_script(&TargetDescriptor::default(), &["f.v".into()], "f", 6670).unwrap();
        assert!(s.contains("-period 6.67 -frequency_mhz 149.925"), "{s}");
    }

    #[test]
    fn empty_manifest_rejected() {
        assert_eq!(
            emit_synthesis_script(&TargetDescriptor::default(), &[], "f", 10_000),
            Err(BackendError::EmptyManifest)
        );
    }

    #[test]
    fn targets_differ_only_in_target_lines() {
        let files = vec!["f.v".to_string(), "f_tb.v".into(), "mem_0.hex".into()];
        let a = emit_synthesis_script(&TargetDescriptor::default(), &files, "f", 4000).unwrap();
        let other = TargetDescriptor {
            name: "other_fpga".into(),
            ..TargetDescriptor::default()
        };
        let b = emit_synthesis_script(&other, &files, "f", 4000).unwrap();
        let diff: Vec<_> = a.lines().zip(b.lines()).filter(|(x, y)| x != y).collect();
        assert_eq!(diff.len(), 2);
        assert!(diff.iter().all(|(x, _)| x.contains("ng_ultra")));
        assert_eq!(a.lines().count(), b.lines().count());
    }
}
