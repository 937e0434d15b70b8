// SPDX-License-Identifier: Apache-2.0

//! Library persistence and selection properties.

mod common;

use common::library;
use hls_core::charlib::model::ps_to_ns_text;
use hls_core::charlib::*;
use hls_core::middle::OpClass;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, .. ProptestConfig::default() })]

    #[test]
    fn xml_round_trip(lib in library()) {
        let text = export_xml(&lib);
        prop_assert_eq!(import_xml(&text).unwrap(), lib);
    }
}

/// 20 clock periods from 0.25 ns to 12 ns.
fn clock_grid() -> Vec<u32> {
    (0..20).map(|i| 250 + i * 618).collect()
}

#[test]
fn per_stage_delay_non_increasing_in_stages() {
    let lib = ComponentLibrary::default_library();
    for (&(inst, clk), r) in &lib.records {
        if inst.stages > 0 {
            let prev = Instance {
                stages: inst.stages - 1,
                ..inst
            };
            assert!(lib.records[&(prev, clk)].delay_ps >= r.delay_ps, "{inst:?}");
        }
    }
}

#[test]
fn lookup_latency_non_increasing_in_clock() {
    let lib = ComponentLibrary::default_library();
    for op in OpClass::ALL {
        for w in [1u8, 8, 16, 32, 64] {
            let mut last = u32::MAX;
            for clk in clock_grid() {
                let lat = match lookup(&lib, op, w, LookupParams::at(clk)) {
                    Ok(r) => {
                        assert!(r.delay_ps <= clk, "{op} {w} at {}", ps_to_ns_text(clk));
                        r.latency
                    }
                    Err(_) => u32::MAX,
                };
                assert!(lat <= last, "{op}{w}: latency rose at {}", ps_to_ns_text(clk));
                last = lat;
            }
        }
    }
}

#[test]
fn build_and_lookup_deterministic() {
    let a = ComponentLibrary::default_library();
    let b = ComponentLibrary::default_library();
    assert_eq!(export_xml(&a), export_xml(&b));
    for clk in clock_grid() {
        for op in OpClass::ALL {
            assert_eq!(
                lookup(&a, op, 32, LookupParams::at(clk)).ok(),
                lookup(&b, op, 32, LookupParams::at(clk)).ok()
            );
        }
    }
}
