// SPDX-License-Identifier: Apache-2.0

//! Corpus fixtures: the directory tree, the compiled-in copy and the
//! recorded expected results agree, and every kernel verifies.
//!
//! Set `HLS_BLESS=1` to rewrite `expected/` from the reference interpreter.

use std::path::Path;

use hls_core::axi::DelayConfig;
use hls_core::charlib::ComponentLibrary;
use hls_core::corpus::{builtin, builtin_expected, expected_text, load_dir, EXPECTED_COUNT, EXPECTED_FILE, EXPECTED_SEED};
use hls_core::pipeline::{synthesize, HlsOptions};
use hls_core::rtlsim::{cosim_equiv, CosimConfig};

fn root() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus"))
}

#[test]
fn directory_matches_builtin() {
    let mut disk = load_dir(root()).unwrap();
    let mut built = builtin();
    for e in disk.iter_mut().chain(built.iter_mut()) {
        e.dir = None;
    }
    built.sort_by(|a, b| a.name.cmp(&b.name));
    assert_eq!(disk, built);
}

#[test]
fn expected_files_match_interpreter() {
    let bless = std::env::var_os("HLS_BLESS").is_some();
    for e in builtin() {
        let prog = e.program().unwrap();
        let v = e.generate_vectors(EXPECTED_SEED, EXPECTED_COUNT).unwrap();
        let text = expected_text(&prog, &v).unwrap();
        if bless {
            std::fs::write(
                Path::new(env!("CARGO_MANIFEST_DIR"))
                    .join(e.dir.as_ref().unwrap())
                    .join(EXPECTED_FILE),
                &text,
            )
            .unwrap();
        } else {
            assert_eq!(builtin_expected(&e.name).unwrap(), text, "{}", e.name);
        }
    }
}

#[test]
fn every_kernel_verifies() {
    let lib = ComponentLibrary::default_library();
    for e in builtin() {
        let opts = HlsOptions {
            top: e.top.clone(),
            clock_ps: 10_000,
            iface: Some(e.iface.clone()),
            ..Default::default()
        };
        let d = synthesize(&e.unit(), &lib, &opts).unwrap_or_else(|err| panic!("{}: {err}", e.name));
        for v in e.generate_vectors(3, 4).unwrap() {
            for delays in [DelayConfig::new(0, 0, 0), DelayConfig::new(5, 2, 3)] {
                let r = cosim_equiv(&d.prog, &d.fsmd, &v, &CosimConfig::with_delays(delays)).unwrap();
                assert!(r.pass, "{}: {:?}", e.name, r.mismatches);
            }
        }
    }
}
