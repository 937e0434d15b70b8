// SPDX-License-Identifier: Apache-2.0

//! Splitting a scalar access into AXI4 transactions.
//!
//! Aligned accesses no wider than the bus become one narrow beat. Anything
//! else is covered by full-width beats from the first to the last bus word,
//! split into separate bursts at 4 KiB boundaries.

use serde::{Deserialize, Serialize};

pub const PAGE: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Resp {
    Okay,
    SlvErr,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiTransaction {
    pub write: bool,
    /// Start address of the burst.
    pub addr: u32,
    /// Bytes per beat.
    pub size: u32,
    /// Beats, at least one.
    pub len: u32,
    /// Per-beat byte strobes over the bus lanes; writes and reads alike mark
    /// the bytes of the access carried by the beat.
    pub strobes: Vec<u64>,
}

impl AxiTransaction {
    /// Address of beat `k` of an incrementing burst.
    pub fn beat_addr(&self, k: u32) -> u64 {
        let aligned = self.addr as u64 & !(self.size as u64 - 1);
        if k == 0 {
            self.addr as u64
        } else {
            aligned + k as u64 * self.size as u64
        }
    }

    pub fn crosses_page(&self) -> bool {
        let last = self.beat_addr(self.len - 1) + self.size as u64 - 1;
        self.addr as u64 / PAGE != last / PAGE
    }
}

/// Plans an access of `bytes` at `addr` on a bus of `bus_bytes` lanes.
pub fn plan_access(write: bool, addr: u32, bytes: u32, bus_bytes: u32) -> Vec<AxiTransaction> {
    assert!(matches!(bytes, 1 | 2 | 4 | 8) && matches!(bus_bytes, 4 | 8));
    let a = addr as u64;
    let bb = bus_bytes as u64;
    let lane_mask = |lo: u64, hi: u64| -> u64 { ((1u64 << (hi - lo)) - 1) << lo };
    if a.is_multiple_of(bytes as u64) && bytes <= bus_bytes {
        let lane = a % bb;
        return vec![AxiTransaction {
            write,
            addr,
            size: bytes,
            len: 1,
            strobes: vec![lane_mask(lane, lane + bytes as u64)],
        }];
    }
    let end = a + bytes as u64; // exclusive
    let first = a & !(bb - 1);
    let last = (end - 1) & !(bb - 1);
    let mut out = Vec::new();
    let mut w = first;
    while w <= last {
        let page_last = (w | (PAGE - 1)) & !(bb - 1);
        let stop = last.min(page_last);
        let mut strobes = Vec::new();
        let mut x = w;
        while x <= stop {
            let lo = a.max(x) - x;
            let hi = end.min(x + bb) - x;
            strobes.push(lane_mask(lo, hi));
            x += bb;
        }
        out.push(AxiTransaction {
            write,
            addr: w as u32,
            size: bus_bytes,
            len: strobes.len() as u32,
            strobes,
        });
        w = stop + bb;
    }
    out
}

/// Byte-addressed memory used as the reference for access planning.
#[derive(Debug, Clone, Default)]
pub struct ByteMemory {
    pub bytes: std::collections::BTreeMap<u64, u8>,
}

impl ByteMemory {
    pub fn read(&self, a: u64) -> u8 {
        self.bytes.get(&a).copied().unwrap_or(0)
    }

    /// Bus word at a bus-aligned address, little endian.
    pub fn word(&self, a: u64, bus_bytes: u32) -> u64 {
        (0..bus_bytes as u64).fold(0, |acc, j| acc | (self.read(a + j) as u64) << (8 * j))
    }

    /// Applies a write beat through its strobes.
    pub fn write_beat(&mut self, a: u64, bus_bytes: u32, data: u64, strobe: u64) {
        for j in 0..bus_bytes as u64 {
            if strobe >> j & 1 == 1 {
                self.bytes.insert(a + j, (data >> (8 * j)) as u8);
            }
        }
    }
}

/// Executes a planned write: value bytes are placed on their lanes.
pub fn perform_write(mem: &mut ByteMemory, addr: u32, bytes: u32, value: u64, bus_bytes: u32) {
    let bb = bus_bytes as u64;
    for t in plan_access(true, addr, bytes, bus_bytes) {
        for k in 0..t.len {
            let word = t.beat_addr(k) & !(bb - 1);
            let mut data = 0u64;
            for j in 0..bb {
                let byte_addr = word + j;
                if byte_addr >= addr as u64 && byte_addr < addr as u64 + bytes as u64 {
                    data |= ((value >> (8 * (byte_addr - addr as u64))) & 0xff) << (8 * j);
                }
            }
            mem.write_beat(word, bus_bytes, data, t.strobes[k as usize]);
        }
    }
}

/// Executes a planned read by merging the strobed lanes of every beat.
pub fn perform_read(mem: &ByteMemory, addr: u32, bytes: u32, bus_bytes: u32) -> u64 {
    let bb = bus_bytes as u64;
    let mut v = 0u64;
    for t in plan_access(false, addr, bytes, bus_bytes) {
        for k in 0..t.len {
            let word = t.beat_addr(k) & !(bb - 1);
            let data = mem.word(word, bus_bytes);
            for j in 0..bb {
                if t.strobes[k as usize] >> j & 1 == 1 {
                    let pos = word + j - addr as u64;
                    v |= ((data >> (8 * j)) & 0xff) << (8 * pos);
                }
            }
        }
    }
    v
}
