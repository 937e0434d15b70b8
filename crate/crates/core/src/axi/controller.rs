// SPDX-License-Identifier: Apache-2.0

//! Register-level model of the AXI4 master controller.
//!
//! The emitted Verilog implements exactly this machine; the model is the
//! reference both simulators share. One transaction is outstanding at a time.
//! An access latches `addr = base + off`, then walks the bursts produced by
//! [`plan_access`](super::plan::plan_access): AR then R beats for reads, AW
//! then W beats then B for writes, once per 4 KiB page.

use serde::{Deserialize, Serialize};

/// Master-driven channel signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MasterOut {
    pub arvalid: bool,
    pub araddr: u32,
    pub arlen: u8,
    pub arsize: u8,
    pub rready: bool,
    pub awvalid: bool,
    pub awaddr: u32,
    pub awlen: u8,
    pub awsize: u8,
    pub wvalid: bool,
    pub wdata: u64,
    pub wstrb: u8,
    pub wlast: bool,
    pub bready: bool,
}

/// Slave-driven channel signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SlaveOut {
    pub arready: bool,
    pub rvalid: bool,
    pub rdata: u64,
    pub rresp: u8,
    pub rlast: bool,
    pub awready: bool,
    pub wready: bool,
    pub bvalid: bool,
    pub bresp: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CtlState {
    Idle = 0,
    Ar = 1,
    R = 2,
    Aw = 3,
    W = 4,
    B = 5,
}

/// A request from the FSM, accepted only while idle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub write: bool,
    pub addr: u32,
    pub bytes: u32,
    pub wdata: u64,
}

/// Most bus words an access of at most 8 bytes can touch.
pub fn max_beats(bus_bytes: u32) -> u32 {
    if bus_bytes == 4 {
        3
    } else {
        2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiController {
    pub bus_bytes: u32,
    pub st: CtlState,
    /// Start address of the current burst.
    pub caddr: u32,
    /// Bus word holding the access's last byte.
    pub clast: u32,
    pub cbeats: u32,
    pub csize: u32,
    pub narrow: bool,
    pub acc: u128,
    pub cshift: u32,
    pub wdat: u128,
    pub wstb: u32,
    pub rdata: u64,
    /// Sticky SLVERR flag.
    pub err: bool,
    /// Fault injection: issue bursts across 4 KiB pages.
    pub no_split: bool,
}

impl AxiController {
    pub fn new(bus_bytes: u32) -> AxiController {
        AxiController {
            bus_bytes,
            st: CtlState::Idle,
            caddr: 0,
            clast: 0,
            cbeats: 0,
            csize: bus_bytes,
            narrow: false,
            acc: 0,
            cshift: 0,
            wdat: 0,
            wstb: 0,
            rdata: 0,
            err: false,
            no_split: false,
        }
    }

    fn acc_bits(&self) -> u32 {
        max_beats(self.bus_bytes) * self.bus_bytes * 8
    }

    fn page_last(&self, a: u32) -> u32 {
        (a | 0xfff) & !(self.bus_bytes - 1)
    }

    /// Beats of the burst starting at `a`.
    fn burst_beats(&self, a: u32, narrow: bool, clast: u32) -> u32 {
        if narrow {
            return 1;
        }
        let stop = if self.no_split { clast } else { clast.min(self.page_last(a)) };
        (stop.wrapping_sub(a) / self.bus_bytes) + 1
    }

    /// More bursts follow the current one.
    fn more(&self) -> bool {
        !self.narrow && !self.no_split && self.clast > self.page_last(self.caddr)
    }

    pub fn busy(&self) -> bool {
        self.st != CtlState::Idle
    }

    pub fn outputs(&self) -> MasterOut {
        let lg = self.csize.trailing_zeros() as u8;
        let mut m = MasterOut::default();
        match self.st {
            CtlState::Idle => {}
            CtlState::Ar => {
                m.arvalid = true;
                m.araddr = self.caddr;
                m.arlen = (self.cbeats - 1) as u8;
                m.arsize = lg;
            }
            CtlState::R => m.rready = true,
            CtlState::Aw => {
                m.awvalid = true;
                m.awaddr = self.caddr;
                m.awlen = (self.cbeats - 1) as u8;
                m.awsize = lg;
            }
            CtlState::W => {
                m.wvalid = true;
                m.wdata = (self.wdat as u64) & mask_bytes(self.bus_bytes);
                m.wstrb = (self.wstb & ((1 << self.bus_bytes) - 1)) as u8;
                m.wlast = self.cbeats == 1;
            }
            CtlState::B => m.bready = true,
        }
        m
    }

    /// Clock edge. `issue` is honoured only in the idle state.
    pub fn clock(&mut self, issue: Option<Issue>, s: &SlaveOut) {
        let bb = self.bus_bytes;
        match self.st {
            CtlState::Idle => {
                let Some(i) = issue else { return };
                let first = i.addr & !(bb - 1);
                let last = i.addr.wrapping_add(i.bytes - 1) & !(bb - 1);
                let narrow = i.addr % i.bytes == 0 && i.bytes <= bb;
                let total = last.wrapping_sub(first) / bb + 1;
                let lane = i.addr - first;
                self.narrow = narrow;
                self.caddr = if narrow { i.addr } else { first };
                self.csize = if narrow { i.bytes } else { bb };
                self.clast = last;
                self.cbeats = self.burst_beats(self.caddr, narrow, last);
                self.cshift = self.acc_bits() - total * bb * 8 + lane * 8;
                self.wdat = (i.wdata as u128 & mask_bytes(i.bytes) as u128) << (lane * 8);
                self.wstb = ((1u32 << i.bytes) - 1) << lane;
                self.acc = 0;
                self.st = if i.write { CtlState::Aw } else { CtlState::Ar };
            }
            CtlState::Ar => {
                if s.arready {
                    self.st = CtlState::R;
                }
            }
            CtlState::R => {
                if s.rvalid {
                    let w = self.acc_bits();
                    let beat = (s.rdata & mask_bytes(bb)) as u128;
                    self.acc = (self.acc >> (bb * 8)) | (beat << (w - bb * 8));
                    self.err |= s.rresp != 0;
                    if self.cbeats == 1 {
                        if self.more() {
                            self.next_burst();
                            self.st = CtlState::Ar;
                        } else {
                            self.rdata = (self.acc >> self.cshift) as u64;
                            self.st = CtlState::Idle;
                        }
                    } else {
                        self.cbeats -= 1;
                    }
                }
            }
            CtlState::Aw => {
                if s.awready {
                    self.st = CtlState::W;
                }
            }
            CtlState::W => {
                if s.wready {
                    self.wdat >>= bb * 8;
                    self.wstb >>= bb;
                    if self.cbeats == 1 {
                        self.st = CtlState::B;
                    } else {
                        self.cbeats -= 1;
                    }
                }
            }
            CtlState::B => {
                if s.bvalid {
                    self.err |= s.bresp != 0;
                    if self.more() {
                        self.next_burst();
                        self.st = CtlState::Aw;
                    } else {
                        self.st = CtlState::Idle;
                    }
                }
            }
        }
    }

    fn next_burst(&mut self) {
        self.caddr = self.page_last(self.caddr).wrapping_add(self.bus_bytes);
        self.cbeats = self.burst_beats(self.caddr, false, self.clast);
    }
}

pub fn mask_bytes(n: u32) -> u64 {
    if n >= 8 {
        u64::MAX
    } else {
        (1u64 << (8 * n)) - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axi::plan::plan_access;

    /// Drives the controller with an always-ready slave and records bursts.
    fn bursts(i: Issue, bb: u32) -> Vec<(u32, u8, u8, Vec<u8>)> {
        let mut c = AxiController::new(bb);
        let mut out = Vec::new();
        let ready = SlaveOut {
            arready: true,
            rvalid: true,
            awready: true,
            wready: true,
            bvalid: true,
            ..Default::default()
        };
        c.clock(Some(i), &SlaveOut::default());
        for _ in 0..40 {
            let m = c.outputs();
            if m.arvalid {
                out.push((m.araddr, m.arlen, m.arsize, Vec::new()));
            }
            if m.awvalid {
                out.push((m.awaddr, m.awlen, m.awsize, Vec::new()));
            }
            if m.wvalid {
                out.last_mut().unwrap().3.push(m.wstrb);
            }
            c.clock(None, &ready);
            if !c.busy() {
                break;
            }
        }
        out
    }

    #[test]
    fn bursts_follow_plan() {
        for bb in [4u32, 8] {
            for bytes in [1u32, 2, 4, 8] {
                for addr in [0x100u32, 0x101, 0x102, 0x103, 0x105, 0xffa, 0xffd, 0xfff] {
                    for write in [false, true] {
                        let got = bursts(
                            Issue {
                                write,
                                addr,
                                bytes,
                                wdata: 0,
                            },
                            bb,
                        );
                        let want: Vec<(u32, u8, u8, Vec<u8>)> = plan_access(write, addr, bytes, bb)
                            .into_iter()
                            .map(|t| {
                                let st = if write {
                                    t.strobes.iter().map(|&s| s as u8).collect()
                                } else {
                                    Vec::new()
                                };
                                (t.addr, (t.len - 1) as u8, t.size.trailing_zeros() as u8, st)
                            })
                            .collect();
                        assert_eq!(got, want, "bb {bb} bytes {bytes} addr {addr:#x} write {write}");
                    }
                }
            }
        }
    }
}
