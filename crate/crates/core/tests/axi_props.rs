// SPDX-License-Identifier: Apache-2.0

//! Byte-exactness of access planning and of the controller/slave pair.

mod common;

use common::{hw_access, mask};
use hls_core::axi::plan::{perform_read, perform_write, plan_access, ByteMemory};
use hls_core::axi::{DelayConfig, Issue};
use hls_core::rtlsim::MemoryImage;
use proptest::prelude::*;

fn width() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![1u32, 2, 4, 8])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn write_then_read_is_exact(addr in 0u32..0x3000, bytes in width(), value in any::<u64>(), bus in prop::sample::select(vec![4u32, 8]), noise in any::<u64>()) {
        let mut mem = ByteMemory::default();
        // surround the target with known bytes
        for j in 0..24u64 {
            mem.bytes.insert((addr as u64).saturating_sub(8) + j, (noise >> (j % 8 * 8)) as u8);
        }
        let before = mem.clone();
        perform_write(&mut mem, addr, bytes, value, bus);
        prop_assert_eq!(perform_read(&mem, addr, bytes, bus), value & mask(bytes));
        for (a, b) in &before.bytes {
            if *a < addr as u64 || *a >= addr as u64 + bytes as u64 {
                prop_assert_eq!(mem.read(*a), *b);
            }
        }
        for t in plan_access(false, addr, bytes, bus).iter().chain(plan_access(true, addr, bytes, bus).iter()) {
            prop_assert!(!t.crosses_page());
            prop_assert!(t.len >= 1 && t.size <= bus);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn controller_matches_oracle(addr in 0u32..0x2100, bytes in width(), value in any::<u64>(), bus in prop::sample::select(vec![4u32, 8]),
                                 d in (0u32..4, 0u32..3, 0u32..4)) {
        let d = DelayConfig::new(d.0, d.1, d.2);
        let mut hw = MemoryImage::new();
        let mut oracle = ByteMemory::default();
        for j in 0..32u32 {
            let a = addr.saturating_sub(12) + j;
            hw.write_u8(a, (a * 7 + 3) as u8);
            oracle.bytes.insert(a as u64, (a * 7 + 3) as u8);
        }
        hw_access(&mut hw, bus, d, Issue { write: true, addr, bytes, wdata: value });
        perform_write(&mut oracle, addr, bytes, value, bus);
        for j in 0..32u32 {
            let a = addr.saturating_sub(12) + j;
            prop_assert_eq!(hw.read_u8(a), oracle.read(a as u64));
        }
        let got = hw_access(&mut hw, bus, d, Issue { write: false, addr, bytes, wdata: 0 });
        prop_assert_eq!(got & mask(bytes), value & mask(bytes));
    }
}
