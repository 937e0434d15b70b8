// SPDX-License-Identifier: Apache-2.0

//! Scheduling and register-allocation properties against brute-force oracles.

mod common;

use common::{graph, kernel, optimal_steps};
use hls_core::charlib::{ComponentLibrary, LookupParams};
use hls_core::hls::{allocate, bind, build_fsmd, left_edge, max_overlap, schedule_list, validate_schedule, Constraints};
use hls_core::middle::{BlockId, OpClass};
use proptest::prelude::*;

const CLOCKS: [u32; 5] = [2000, 2500, 4000, 6670, 10_000];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn list_schedule_near_optimal(src in kernel(), ck in 0usize..5, limits in prop::collection::vec(1u32..=2, 6)) {
        let g = graph(&src);
        let lib = ComponentLibrary::default_library();
        let mut c = Constraints::default();
        for (cls, n) in [OpClass::Add, OpClass::Sub, OpClass::Mul, OpClass::Bitop].iter().zip(&limits) {
            c = c.with(cls.name(), *n);
        }
        let a = allocate(&g, &c, &lib, LookupParams::at(CLOCKS[ck])).unwrap();
        let s = schedule_list(&g, &a).unwrap();
        prop_assert!(validate_schedule(&g, &a, &s).is_empty());
        prop_assert!(g.ops.len() <= 8);
        let got = s.steps[0];
        let opt = optimal_steps(&g, &a, BlockId(0), got);
        prop_assert!(got <= opt + 1, "list {} optimal {}\n{}", got, opt, src);
    }

    #[test]
    fn unconstrained_schedule_optimal(src in kernel(), ck in 0usize..5) {
        let g = graph(&src);
        let lib = ComponentLibrary::default_library();
        let mut c = Constraints::default();
        for cls in OpClass::ALL {
            if !matches!(cls, OpClass::LoadPort | OpClass::StorePort) {
                c = c.with(cls.name(), g.ops.len() as u32);
            }
        }
        let a = allocate(&g, &c, &lib, LookupParams::at(CLOCKS[ck])).unwrap();
        let s = schedule_list(&g, &a).unwrap();
        let got = s.steps[0];
        prop_assert_eq!(got, optimal_steps(&g, &a, BlockId(0), got), "{}", src);
    }

    #[test]
    fn left_edge_is_minimal(iv in prop::collection::vec((0u64..40, 0u64..12), 0..40)) {
        let iv: Vec<(u64, u64)> = iv.into_iter().map(|(s, l)| (s, s + l)).collect();
        let regs = left_edge(&iv);
        let n = regs.iter().copied().max().map_or(0, |m| m + 1);
        // brute force: count coverage at every point
        let brute = (0..=52u64).map(|p| iv.iter().filter(|&&(lo, hi)| lo <= p && p <= hi).count()).max().unwrap_or(0);
        prop_assert_eq!(n, brute);
        prop_assert_eq!(max_overlap(&iv), brute);
        for i in 0..iv.len() {
            for j in i + 1..iv.len() {
                if regs[i] == regs[j] {
                    prop_assert!(iv[i].1 < iv[j].0 || iv[j].1 < iv[i].0);
                }
            }
        }
    }

    #[test]
    fn deterministic_dumps(src in kernel(), ck in 0usize..5) {
        let run = || {
            let g = graph(&src);
            let lib = ComponentLibrary::default_library();
            let a = allocate(&g, &Constraints::default(), &lib, LookupParams::at(CLOCKS[ck])).unwrap();
            let s = schedule_list(&g, &a).unwrap();
            let b = bind(&g, &s, &a).unwrap();
            let f = build_fsmd(&g, &s, &b, &a).unwrap();
            (s.dump(&g), format!("{:?}", b), f.dump())
        };
        prop_assert_eq!(run(), run());
    }
}

/// Register counts on real loop kernels equal the liveness bound per width.
#[test]
fn bound_registers_minimal_per_width() {
    let srcs = [
        "int f(int n) { int s = 0; for (int i = 0; i < n; i++) s += i * i; return s; }",
        "long f(int* a, int n) { long s = 0; short m = 0; for (int i = 0; i < n; i++) { s += a[i]; m ^= (short)i; } return s + m; }",
        "int f(int a, int b) { while (b != 0) { int t = b; b = a % b; a = t; } return a; }",
    ];
    let lib = ComponentLibrary::default_library();
    for src in srcs {
        let g = graph(src);
        let a = allocate(&g, &Constraints::default(), &lib, LookupParams::at(10_000)).unwrap();
        let s = schedule_list(&g, &a).unwrap();
        assert!(validate_schedule(&g, &a, &s).is_empty());
        let b = bind(&g, &s, &a).unwrap();
        let mut widths: Vec<u8> = b.regs.clone();
        widths.sort();
        widths.dedup();
        for w in widths {
            let iv: Vec<(u64, u64)> = b
                .lifetimes
                .iter()
                .filter(|(v, _, _)| g.width(*v) == w)
                .map(|&(_, lo, hi)| (lo, hi))
                .collect();
            let n = b.regs.iter().filter(|&&x| x == w).count();
            assert_eq!(n, max_overlap(&iv), "{src} width {w}");
        }
    }
}
