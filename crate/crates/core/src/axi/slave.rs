// SPDX-License-Identifier: Apache-2.0

//! Behavioural AXI4 slave memory with configurable delays.
//!
//! Address and write-data readiness come `gap` cycles after the master starts
//! waiting; the first read beat arrives `read_latency` cycles after the
//! address handshake and later beats `gap` cycles after the previous one; the
//! write response comes `write_latency` cycles after the last data beat.

use serde::{Deserialize, Serialize};

use crate::rtlsim::MemoryImage;

use super::controller::{MasterOut, SlaveOut};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DelayConfig {
    pub read_latency: u32,
    pub gap: u32,
    pub write_latency: u32,
}

impl DelayConfig {
    pub const fn new(r: u32, g: u32, w: u32) -> DelayConfig {
        DelayConfig {
            read_latency: r,
            gap: g,
            write_latency: w,
        }
    }
}

impl std::str::FromStr for DelayConfig {
    type Err = String;

    /// `R,G,W` with non-negative integers.
    fn from_str(s: &str) -> Result<Self, String> {
        let v: Vec<u32> = s
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| format!("bad delay '{x}'")))
            .collect::<Result<_, _>>()?;
        match v[..] {
            [r, g, w] => Ok(DelayConfig::new(r, g, w)),
            _ => Err(format!("expected R,G,W, got '{s}'")),
        }
    }
}

/// Misbehaviours used to exercise the protocol monitor and error paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlaveFault {
    /// Every response carries SLVERR.
    SlvErr,
    /// One extra read beat after the burst ends.
    ExtraRBeat,
    /// RLAST is never asserted.
    MissingRlast,
    /// The write response is sent twice.
    DoubleB,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiSlave {
    pub bus_bytes: u32,
    pub delays: DelayConfig,
    pub fault: Option<SlaveFault>,
    ar_wait: u32,
    rd_active: bool,
    raddr: u32,
    rsize: u32,
    rbeats: u32,
    rcount: u32,
    extra_r: bool,
    aw_wait: u32,
    wr_phase: u8, // 0 idle, 1 data, 2 response
    waddr: u32,
    wsize: u32,
    wbeats: u32,
    wcount: u32,
    extra_b: bool,
}

impl AxiSlave {
    pub fn new(bus_bytes: u32, delays: DelayConfig) -> AxiSlave {
        AxiSlave {
            bus_bytes,
            delays,
            fault: None,
            ar_wait: 0,
            rd_active: false,
            raddr: 0,
            rsize: 0,
            rbeats: 0,
            rcount: 0,
            extra_r: false,
            aw_wait: 0,
            wr_phase: 0,
            waddr: 0,
            wsize: 0,
            wbeats: 0,
            wcount: 0,
            extra_b: false,
        }
    }

    fn resp(&self) -> u8 {
        if self.fault == Some(SlaveFault::SlvErr) {
            2
        } else {
            0
        }
    }

    fn word(&self, mem: &MemoryImage, a: u32) -> u64 {
        let base = a & !(self.bus_bytes - 1);
        (0..self.bus_bytes).fold(0, |acc, j| acc | (mem.read_u8(base.wrapping_add(j)) as u64) << (8 * j))
    }

    /// Signals driven during the current cycle.
    pub fn outputs(&self, mem: &MemoryImage) -> SlaveOut {
        let g = self.delays.gap;
        let rvalid = (self.rd_active && self.rcount == 0) || self.extra_r;
        let mut rlast = self.rd_active && self.rbeats == 1;
        if self.fault == Some(SlaveFault::MissingRlast) {
            rlast = false;
        }
        SlaveOut {
            arready: !self.rd_active && !self.extra_r && self.ar_wait >= g,
            rvalid,
            rdata: if rvalid { self.word(mem, self.raddr) } else { 0 },
            rresp: if rvalid { self.resp() } else { 0 },
            rlast: rlast || self.extra_r,
            awready: self.wr_phase == 0 && self.aw_wait >= g,
            wready: self.wr_phase == 1 && self.wcount == 0,
            bvalid: self.wr_phase == 2 && self.wcount == 0,
            bresp: if self.wr_phase == 2 { self.resp() } else { 0 },
        }
    }

    /// Clock edge given this cycle's master and slave signals.
    pub fn clock(&mut self, m: &MasterOut, mem: &mut MemoryImage) {
        let s = self.outputs(mem);
        let g = self.delays.gap;
        // read address / data
        if self.extra_r {
            if m.rready {
                self.extra_r = false;
            }
        } else if self.rd_active {
            if self.rcount > 0 {
                self.rcount -= 1;
            } else if m.rready {
                self.rbeats -= 1;
                self.raddr = (self.raddr & !(self.rsize - 1)).wrapping_add(self.rsize);
                self.rcount = g;
                if self.rbeats == 0 {
                    self.rd_active = false;
                    self.extra_r = self.fault == Some(SlaveFault::ExtraRBeat);
                }
            }
        } else if m.arvalid {
            if s.arready {
                self.rd_active = true;
                self.raddr = m.araddr;
                self.rsize = 1 << m.arsize;
                self.rbeats = m.arlen as u32 + 1;
                self.rcount = self.delays.read_latency;
                self.ar_wait = 0;
            } else {
                self.ar_wait += 1;
            }
        } else {
            self.ar_wait = 0;
        }
        // write address / data / response
        match self.wr_phase {
            0 => {
                if m.awvalid {
                    if s.awready {
                        self.wr_phase = 1;
                        self.waddr = m.awaddr;
                        self.wsize = 1 << m.awsize;
                        self.wbeats = m.awlen as u32 + 1;
                        self.wcount = g;
                        self.aw_wait = 0;
                    } else {
                        self.aw_wait += 1;
                    }
                } else {
                    self.aw_wait = 0;
                }
            }
            1 => {
                if self.wcount > 0 {
                    if m.wvalid {
                        self.wcount -= 1;
                    }
                } else if m.wvalid {
                    let base = self.waddr & !(self.bus_bytes - 1);
                    for j in 0..self.bus_bytes {
                        if m.wstrb >> j & 1 == 1 {
                            mem.write_u8(base.wrapping_add(j), (m.wdata >> (8 * j)) as u8);
                        }
                    }
                    self.waddr = (self.waddr & !(self.wsize - 1)).wrapping_add(self.wsize);
                    self.wbeats -= 1;
                    self.wcount = g;
                    if self.wbeats == 0 {
                        self.wr_phase = 2;
                        self.wcount = self.delays.write_latency;
                        self.extra_b = self.fault == Some(SlaveFault::DoubleB);
                    }
                }
            }
            _ => {
                if self.wcount > 0 {
                    self.wcount -= 1;
                } else if m.bready || self.extra_b {
                    if self.extra_b && m.bready {
                        self.extra_b = false;
                    } else {
                        self.wr_phase = 0;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axi::controller::{AxiController, Issue};

    fn run(issue: Issue, d: DelayConfig, mem: &mut MemoryImage) -> (u64, u32) {
        let mut c = AxiController::new(4);
        let mut s = AxiSlave::new(4, d);
        let mut cycles = 0;
        let mut pending = Some(issue);
        loop {
            let so = s.outputs(mem);
            let mo = c.outputs();
            c.clock(pending.take(), &so);
            s.clock(&mo, mem);
            cycles += 1;
            if !c.busy() {
                return (c.rdata, cycles);
            }
            assert!(cycles < 1000);
        }
    }

    #[test]
    fn unaligned_write_then_read() {
        for d in [DelayConfig::new(0, 0, 0), DelayConfig::new(5, 2, 3), DelayConfig::new(17, 1, 9)] {
            let mut mem = MemoryImage::new();
            run(
                Issue {
                    write: true,
                    addr: 0xffd,
                    bytes: 8,
                    wdata: 0x1122_3344_5566_7788,
                },
                d,
                &mut mem,
            );
            let (v, _) = run(
                Issue {
                    write: false,
                    addr: 0xffd,
                    bytes: 8,
                    wdata: 0,
                },
                d,
                &mut mem,
            );
            assert_eq!(v, 0x1122_3344_5566_7788);
            assert_eq!(mem.read_u8(0xffd), 0x88);
            assert_eq!(mem.read_u8(0x1004), 0x11);
            assert_eq!(mem.read_u8(0x1005), 0);
        }
    }

    #[test]
    fn delays_cost_cycles() {
        let mut mem = MemoryImage::new();
        let i = Issue {
            write: false,
            addr: 0x40,
            bytes: 4,
            wdata: 0,
        };
        let (_, fast) = run(i, DelayConfig::default(), &mut mem);
        let (_, slow) = run(i, DelayConfig::new(5, 2, 3), &mut mem);
        assert!(slow > fast);
    }

    #[test]
    fn parse_delays() {
        assert_eq!("5,2,3".parse::<DelayConfig>().unwrap(), DelayConfig::new(5, 2, 3));
        assert!("5,2".parse::<DelayConfig>().is_err());
    }
}
