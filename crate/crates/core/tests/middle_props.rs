// SPDX-License-Identifier: Apache-2.0

//! Property tests for lowering and optimization against the reference interpreter.

use hls_core::frontend::{check, SourceUnit};
use hls_core::middle::{analyze_loops, eval_cdfg, lower_to_cdfg, optimize, validate, Cdfg};
use hls_core::rtlsim::{interpret, ArgValue, MemoryImage};
use proptest::prelude::*;

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("a".to_string()),
        Just("b".to_string()),
        (0u32..300).prop_map(|c| c.to_string()),
        Just("c".to_string()),
    ]
}

fn expr() -> impl Strategy<Value = String> {
    leaf().prop_recursive(4, 24, 2, |inner| {
        let bin = prop_oneof![
            Just("+"),
            Just("-"),
            Just("*"),
            Just("/"),
            Just("%"),
            Just("<<"),
            Just(">>"),
            Just("&"),
            Just("|"),
            Just("^"),
            Just("=="),
            Just("!="),
            Just("<"),
            Just("<="),
            Just(">"),
            Just(">="),
            Just("&&"),
            Just("||"),
        ];
        let cast = prop_oneof![Just("uint8_t"), Just("int8_t"), Just("int16_t"), Just("uint16_t"), Just("bool")];
        prop_oneof![
            (inner.clone(), bin, inner.clone()).prop_map(|(l, o, r)| format!("({l} {o} {r})")),
            (cast, inner.clone()).prop_map(|(t, x)| format!("(({t}){x})")),
            (prop_oneof![Just("-"), Just("~"), Just("!")], inner.clone()).prop_map(|(o, x)| format!("({o}{x})")),
            (inner.clone(), inner.clone(), inner).prop_map(|(c, x, y)| format!("({c} ? {x} : {y})")),
        ]
    })
}

/// Small programs over two 8-bit inputs with a loop and a branch.
fn program() -> impl Strategy<Value = String> {
    (expr(), expr(), expr(), 0u32..4).prop_map(|(e1, e2, e3, n)| {
        format!(
            "uint8_t f(uint8_t a, int8_t b) {{
                int16_t c = 3;
                uint8_t acc = 0;
                for (uint8_t i = 0; i < {n}; i++) {{ c = (int16_t)({e1}); acc += (uint8_t)c; }}
                if ({e2}) {{ acc ^= (uint8_t)({e3}); }}
                return acc + (uint8_t)c;
            }}"
        )
    })
}

fn run_both(src: &str, inputs: &[(u64, u64)]) {
    let p = check(&SourceUnit::new("p.c", src), "f").unwrap();
    let g0 = lower_to_cdfg(&p).unwrap();
    validate(&g0).unwrap();
    let g1 = optimize(&g0, 1);
    validate(&g1).unwrap_or_else(|e| panic!("{e}\n{}", g1.dump()));
    assert_eq!(optimize(&g1, 1), g1, "optimize is not idempotent");
    for &(a, b) in inputs {
        let args = [ArgValue::Scalar(a), ArgValue::Scalar(b)];
        let r = interpret(&p, &args, &mut []).unwrap();
        let r0 = eval_cdfg(&g0, &args, &mut [], 1 << 20).unwrap();
        let r1 = eval_cdfg(&g1, &args, &mut [], 1 << 20).unwrap();
        assert_eq!(r.ret, r0.ret, "lowering changed semantics at a={a} b={b}\n{src}");
        assert_eq!(r.ret, r1.ret, "optimize changed semantics at a={a} b={b}\n{src}\n{}", g1.dump());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, .. ProptestConfig::default() })]

    /// Exhaustive over all 8-bit input pairs, so narrowing can never drop a bit
    /// that some input needs.
    #[test]
    fn optimize_preserves_semantics_exhaustive_8bit(src in program()) {
        let all: Vec<(u64, u64)> = (0..256u64).flat_map(|a| (0..256u64).step_by(3).map(move |b| (a, b))).collect();
        run_both(&src, &all);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, .. ProptestConfig::default() })]

    #[test]
    fn optimize_preserves_semantics_random(src in program(), inputs in prop::collection::vec((0u64..256, 0u64..256), 16)) {
        run_both(&src, &inputs);
    }

    #[test]
    fn wide_programs(e in expr(), x in any::<u64>(), y in any::<u64>()) {
        let src = format!("int64_t f(int64_t a, uint32_t b) {{ int64_t c = a * (int64_t)b; return (int64_t)({e}) * c; }}");
        let p = check(&SourceUnit::new("p.c", &src), "f").unwrap();
        let g0 = lower_to_cdfg(&p).unwrap();
        let g1 = optimize(&g0, 1);
        validate(&g1).unwrap();
        let args = [ArgValue::Scalar(x), ArgValue::Scalar(y & 0xffff_ffff)];
        let r = interpret(&p, &args, &mut []).unwrap();
        prop_assert_eq!(r.ret, eval_cdfg(&g1, &args, &mut [], 1 << 20).unwrap().ret);
    }
}

#[test]
fn memory_semantics_preserved() {
    let src = "void f(uint16_t* x, uint8_t* y, int n) {
        uint8_t t[8] = {1, 2, 3, 4, 5, 6, 7, 8};
        for (int i = 0; i < n; i++) { x[i] = x[i] * 3 + t[i & 7]; y[i + 1] = (uint8_t)x[i]; }
    }";
    let p = check(&SourceUnit::new("m.c", src), "f").unwrap();
    let g1 = optimize(&lower_to_cdfg(&p).unwrap(), 1);
    let mut base = MemoryImage::new();
    for i in 0..64u32 {
        base.write_u8(i, (i * 37 % 251) as u8);
    }
    let args = [
        ArgValue::Array { bundle: 0, base: 1 },
        ArgValue::Array { bundle: 1, base: 3 },
        ArgValue::Scalar(9),
    ];
    let mut m1 = vec![base.clone(), base.clone()];
    let mut m2 = m1.clone();
    interpret(&p, &args, &mut m1).unwrap();
    eval_cdfg(&g1, &args, &mut m2, 1 << 20).unwrap();
    assert_eq!(m1, m2);
}

/// Loop depth by brute force: a block lies in the loop of header `h` when some
/// simple cycle through `h` contains it and every block on that cycle is
/// dominated by `h`.
fn brute_depths(g: &Cdfg) -> Vec<u32> {
    let n = g.blocks.len();
    let succ = g.successors();
    let reach_from = |s: usize, banned: &[bool]| {
        let mut seen = vec![false; n];
        let mut st = vec![s];
        while let Some(x) = st.pop() {
            for t in &succ[x] {
                let t = t.0 as usize;
                if !seen[t] && !banned[t] {
                    seen[t] = true;
                    st.push(t);
                }
            }
        }
        seen
    };
    // dominance by removal: h dominates b iff b unreachable from entry without h
    let entry = g.entry.0 as usize;
    let reachable = {
        let mut r = reach_from(entry, &vec![false; n]);
        r[entry] = true;
        r
    };
    let dom = |h: usize, b: usize| {
        if h == b {
            return true;
        }
        let mut banned = vec![false; n];
        banned[h] = true;
        if h == entry {
            return true;
        }
        !reach_from(entry, &banned)[b] && b != entry
    };
    let mut depth = vec![0u32; n];
    for h in 0..n {
        if !reachable[h] {
            continue;
        }
        // blocks dominated by h that reach h and are reachable from h within the dominated region
        let mut banned = vec![false; n];
        for x in 0..n {
            banned[x] = !reachable[x] || !dom(h, x);
        }
        let fwd = reach_from(h, &banned);
        if !fwd[h] {
            continue;
        }
        for b in 0..n {
            if b == h || (fwd[b] && reach_from(b, &banned)[h]) {
                depth[b] += 1;
            }
        }
    }
    depth
}

#[test]
fn loop_depths_match_brute_force() {
    let srcs = [
        "int f(int n){int s=0; for(int i=0;i<n;i++){ for(int j=0;j<n;j++){ s+=j; } } return s;}",
        "int f(int n){int s=0; while(s<n){ if (s & 1) { while (s < 3*n) s += 2; } s++; } return s;}",
        "int f(int n){int s=0; for(int i=0;i<n;i++){ for(int j=0;j<i;j++){ for(int k=0;k<j;k++) s+=k; } s--; } return s;}",
        "int f(int n){return n*2;}",
    ];
    for src in srcs {
        let g = lower_to_cdfg(&check(&SourceUnit::new("l.c", src), "f").unwrap()).unwrap();
        let li = analyze_loops(&g).unwrap();
        assert_eq!(li.depth, brute_depths(&g), "{src}\n{}", g.dump());
        for &(_, h) in &li.back_edges {
            assert!(g.block(h).preds.len() >= 2);
        }
    }
}
