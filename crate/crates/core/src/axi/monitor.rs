// SPDX-License-Identifier: Apache-2.0

//! Per-bundle AXI4 protocol checker, fed one cycle at a time.

use super::controller::{MasterOut, SlaveOut};
use super::plan::PAGE;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub cycle: u64,
    pub msg: String,
}

/// What the master did with the response channels in a cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Sampling {
    pub r_captured: bool,
    pub b_captured: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ProtocolMonitor {
    prev: Option<(MasterOut, SlaveOut)>,
    cycle: u64,
    /// Beats left in the open read burst.
    read: Option<u32>,
    /// Beats left in the open write burst; `Some(0)` awaits the response.
    write: Option<u32>,
    pub violations: Vec<Violation>,
}

fn crosses(addr: u32, len: u8, size: u8) -> bool {
    let sz = 1u64 << size;
    let start = addr as u64;
    let last = (start & !(sz - 1)) + len as u64 * sz + sz - 1;
    start / PAGE != last / PAGE
}

impl ProtocolMonitor {
    pub fn new() -> ProtocolMonitor {
        ProtocolMonitor::default()
    }

    fn flag(&mut self, msg: impl Into<String>) {
        self.violations.push(Violation {
            cycle: self.cycle,
            msg: msg.into(),
        });
    }

    pub fn observe(&mut self, m: &MasterOut, s: &SlaveOut, smp: Sampling) {
        if let Some((pm, ps)) = self.prev {
            if pm.arvalid && !ps.arready && (!m.arvalid || (m.araddr, m.arlen, m.arsize) != (pm.araddr, pm.arlen, pm.arsize)) {
                self.flag("AR changed before handshake");
            }
            if pm.awvalid && !ps.awready && (!m.awvalid || (m.awaddr, m.awlen, m.awsize) != (pm.awaddr, pm.awlen, pm.awsize)) {
                self.flag("AW changed before handshake");
            }
            if pm.wvalid && !ps.wready && (!m.wvalid || (m.wdata, m.wstrb, m.wlast) != (pm.wdata, pm.wstrb, pm.wlast)) {
                self.flag("W changed before handshake");
            }
            if ps.rvalid && !pm.rready && (!s.rvalid || (s.rdata, s.rresp, s.rlast) != (ps.rdata, ps.rresp, ps.rlast)) {
                self.flag("R changed before handshake");
            }
            if ps.bvalid && !pm.bready && (!s.bvalid || s.bresp != ps.bresp) {
                self.flag("B changed before handshake");
            }
        }
        if smp.r_captured && !(s.rvalid && m.rready) {
            self.flag("read data sampled without valid and ready");
        }
        if smp.b_captured && !(s.bvalid && m.bready) {
            self.flag("write response sampled without valid and ready");
        }
        if s.rvalid && self.read.is_none() {
            self.flag("read response without transaction");
        }
        if s.bvalid && self.write != Some(0) {
            self.flag("write response without transaction");
        }
        if m.arvalid && s.arready {
            if self.read.is_some() {
                self.flag("second outstanding read");
            }
            if crosses(m.araddr, m.arlen, m.arsize) {
                self.flag(format!("read burst at {:#x} crosses a 4 KiB boundary", m.araddr));
            }
            self.read = Some(m.arlen as u32 + 1);
        }
        if m.rready && s.rvalid {
            if let Some(n) = self.read {
                if s.rlast != (n == 1) {
                    self.flag("RLAST does not mark the final beat");
                }
                self.read = (n > 1).then_some(n - 1);
            }
        }
        if m.awvalid && s.awready {
            if self.write.is_some() {
                self.flag("second outstanding write");
            }
            if crosses(m.awaddr, m.awlen, m.awsize) {
                self.flag(format!("write burst at {:#x} crosses a 4 KiB boundary", m.awaddr));
            }
            self.write = Some(m.awlen as u32 + 1);
        }
        if m.wvalid && s.wready {
            match self.write {
                Some(n) if n > 0 => {
                    if m.wlast != (n == 1) {
                        self.flag("WLAST does not mark the final beat");
                    }
                    self.write = Some(n - 1);
                }
                _ => self.flag("write data without transaction"),
            }
        }
        if m.bready && s.bvalid && self.write == Some(0) {
            self.write = None;
        }
        self.prev = Some((*m, *s));
        self.cycle += 1;
    }

    /// Reports transactions still waiting for a response.
    pub fn finish(&mut self) -> Vec<Violation> {
        if self.read.is_some() {
            self.flag("read transaction without complete response");
        }
        if self.write.is_some() {
            self.flag("write transaction without response");
        }
        std::mem::take(&mut self.violations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axi::controller::{AxiController, Issue};
    use crate::axi::slave::{AxiSlave, DelayConfig, SlaveFault};
    use crate::rtlsim::MemoryImage;

    #[derive(Clone, Copy, PartialEq)]
    enum MasterFault {
        DropValid,
        AddrGlitch,
        SampleEarly,
    }

    fn run(issues: &[Issue], d: DelayConfig, sf: Option<SlaveFault>, mf: Option<MasterFault>, no_split: bool) -> Vec<Violation> {
        let mut mem = MemoryImage::new();
        let mut c = AxiController::new(4);
        c.no_split = no_split;
        let mut s = AxiSlave::new(4, d);
        s.fault = sf;
        let mut mon = ProtocolMonitor::new();
        let mut q = issues.iter().copied();
        let mut pending = q.next();
        let mut fired = false;
        let mut prev_wait = false;
        for _ in 0..400 {
            let so = s.outputs(&mem);
            let mut mo = c.outputs();
            let mut smp = Sampling {
                r_captured: mo.rready && so.rvalid,
                b_captured: mo.bready && so.bvalid,
            };
            if !fired {
                match mf {
                    Some(MasterFault::DropValid) if prev_wait => {
                        mo.arvalid = false;
                        fired = true;
                    }
                    Some(MasterFault::AddrGlitch) if prev_wait => {
                        mo.araddr ^= 4;
                        fired = true;
                    }
                    Some(MasterFault::SampleEarly) if mo.rready && !so.rvalid => {
                        smp.r_captured = true;
                        fired = true;
                    }
                    _ => {}
                }
            }
            prev_wait = mo.arvalid && !so.arready;
            mon.observe(&mo, &so, smp);
            let idle = !c.busy();
            c.clock(if idle { pending } else { None }, &so);
            if idle && pending.is_some() {
                pending = q.next();
            }
            s.clock(&mo, &mut mem);
        }
        mon.finish()
    }

    fn rw(addr: u32) -> Vec<Issue> {
        vec![
            Issue {
                write: true,
                addr,
                bytes: 4,
                wdata: 0xdead_beef,
            },
            Issue {
                write: false,
                addr,
                bytes: 4,
                wdata: 0,
            },
        ]
    }

    #[test]
    fn clean_traffic_has_no_violations() {
        for d in [DelayConfig::new(0, 0, 0), DelayConfig::new(5, 2, 3), DelayConfig::new(17, 1, 9)] {
            for a in [0x100, 0x102, 0xffe] {
                assert!(run(&rw(a), d, None, None, false).is_empty());
            }
        }
    }

    #[test]
    fn injected_faults_are_caught() {
        let d = DelayConfig::new(2, 2, 2);
        let cases: Vec<(&str, Vec<Violation>)> = vec![
            ("drop valid", run(&rw(0x100), d, None, Some(MasterFault::DropValid), false)),
            ("addr glitch", run(&rw(0x100), d, None, Some(MasterFault::AddrGlitch), false)),
            ("sample early", run(&rw(0x100), d, None, Some(MasterFault::SampleEarly), false)),
            ("no split", run(&rw(0xffe), d, None, None, true)),
            ("extra beat", run(&rw(0x100), d, Some(SlaveFault::ExtraRBeat), None, false)),
            ("missing rlast", run(&rw(0x100), d, Some(SlaveFault::MissingRlast), None, false)),
            ("double b", run(&rw(0x100), d, Some(SlaveFault::DoubleB), None, false)),
        ];
        for (name, v) in cases {
            assert!(!v.is_empty(), "{name} not detected");
        }
    }
}
