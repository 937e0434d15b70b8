// SPDX-License-Identifier: Apache-2.0

//! Sparse byte-addressed memory image.

use std::collections::BTreeMap;

/// Byte-addressed memory; unwritten bytes read as zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MemoryImage {
    bytes: BTreeMap<u32, u8>,
}

impl MemoryImage {
    pub fn new() -> MemoryImage {
        MemoryImage::default()
    }

    pub fn from_bytes(base: u32, data: &[u8]) -> MemoryImage {
        let mut m = MemoryImage::new();
        m.write_bytes(base, data);
        m
    }

    pub fn read_u8(&self, addr: u32) -> u8 {
        self.bytes.get(&addr).copied().unwrap_or(0)
    }

    pub fn write_u8(&mut self, addr: u32, v: u8) {
        if v == 0 {
            self.bytes.remove(&addr);
        } else {
            self.bytes.insert(addr, v);
        }
    }

    /// Little-endian read of `n` bytes (n ≤ 8); addresses wrap at 2^32.
    pub fn read(&self, addr: u32, n: u32) -> u64 {
        (0..n).fold(0u64, |acc, i| acc | (self.read_u8(addr.wrapping_add(i)) as u64) << (8 * i))
    }

    pub fn write(&mut self, addr: u32, n: u32, v: u64) {
        for i in 0..n {
            self.write_u8(addr.wrapping_add(i), (v >> (8 * i)) as u8);
        }
    }

    pub fn read_bytes(&self, addr: u32, len: u32) -> Vec<u8> {
        (0..len).map(|i| self.read_u8(addr.wrapping_add(i))).collect()
    }

    pub fn write_bytes(&mut self, addr: u32, data: &[u8]) {
        for (i, &b) in data.iter().enumerate() {
            self.write_u8(addr.wrapping_add(i as u32), b);
        }
    }

    /// Nonzero bytes in address order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u8)> + '_ {
        self.bytes.iter().map(|(&a, &b)| (a, b))
    }

    /// One past the highest nonzero address, or 0 for an empty image.
    pub fn extent(&self) -> u64 {
        self.bytes.keys().next_back().map(|&a| a as u64 + 1).unwrap_or(0)
    }
}
