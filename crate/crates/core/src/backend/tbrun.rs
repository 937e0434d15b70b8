// SPDX-License-Identifier: Apache-2.0

//! Executes a generated testbench in the in-repo interpreter: the design
//! module and every slave module come from the emitted text, the memory
//! images and expected values from the emitted files. Only the stimulus
//! sequence (reset, start, wait for done, compare) is carried out here.

use std::collections::HashMap;

use crate::rtlsim::{SimError, VModule, VSim};

use super::hexfile::from_hex;
use super::testbench::Testbench;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TbOutcome {
    pub pass: bool,
    /// Cycles from the first cycle with `start` high to `done`, inclusive.
    pub cycles: u64,
    /// The lines the testbench would print.
    pub messages: Vec<String>,
}

const M2S: [&str; 14] = [
    "ARVALID", "ARADDR", "ARLEN", "ARSIZE", "RREADY", "AWVALID", "AWADDR", "AWLEN", "AWSIZE", "WVALID", "WDATA", "WSTRB", "WLAST", "BREADY",
];
const S2M: [&str; 9] = [
    "ARREADY", "RVALID", "RDATA", "RRESP", "RLAST", "AWREADY", "WREADY", "BVALID", "BRESP",
];

/// Runs `tb` against the design text `design`.
pub fn run_testbench(design: &str, tb: &Testbench) -> Result<TbOutcome, SimError> {
    let dut_m = VModule::parse_named(design, &tb.top)?;
    let files: HashMap<String, String> = tb.files.iter().cloned().collect();
    let slave_ms = tb
        .slaves
        .iter()
        .map(|s| VModule::parse_named(&tb.text, &s.module))
        .collect::<Result<Vec<_>, _>>()?;
    let mut dut = VSim::new(&dut_m)?;
    let mut slaves = slave_ms
        .iter()
        .map(|m| VSim::with_files(m, files.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    for (n, v) in &tb.args {
        dut.set(n, *v as u128)?;
    }
    let clock = |dut: &mut VSim, slaves: &mut [VSim], rst: u128, start: u128| -> Result<(bool, Option<u128>), SimError> {
        dut.set("rst", rst)?;
        dut.set("start", start)?;
        for s in slaves.iter_mut() {
            s.set("rst", rst)?;
            s.settle();
        }
        for (sv, w) in slaves.iter().zip(&tb.slaves) {
            for p in S2M {
                dut.set(&format!("m_axi_{}_{p}", w.bundle), sv.get(p)?)?;
            }
        }
        dut.settle();
        for (sv, w) in slaves.iter_mut().zip(&tb.slaves) {
            for p in M2S {
                sv.set(p, dut.get(&format!("m_axi_{}_{p}", w.bundle))?)?;
            }
            sv.settle();
        }
        let done = dut.get("done")? != 0;
        let ret = dut.get("ret").ok();
        dut.posedge()?;
        for s in slaves.iter_mut() {
            s.posedge()?;
        }
        Ok((done, ret))
    };
    clock(&mut dut, &mut slaves, 1, 0)?;
    let mut cycles = 0u64;
    let ret = loop {
        if cycles >= tb.cycle_budget {
            return Ok(TbOutcome {
                pass: false,
                cycles,
                messages: vec![format!("FAIL: no done after {} cycles", tb.cycle_budget)],
            });
        }
        let (done, ret) = clock(&mut dut, &mut slaves, 0, 1)?;
        cycles += 1;
        if done {
            break ret;
        }
    };
    let mut messages = Vec::new();
    let mut errors = 0u64;
    if let (Some(exp), Some(got)) = (tb.expected_ret, ret) {
        if got as u64 != exp {
            messages.push(format!("FAIL: return value {got}, expected {exp}"));
            errors += 1;
        }
    }
    for c in &tb.checks {
        let (si, w) = tb
            .slaves
            .iter()
            .enumerate()
            .find(|(_, s)| s.bundle == c.bundle)
            .expect("slave for check");
        let text = files
            .get(&c.file)
            .ok_or_else(|| SimError::Vector(format!("missing file {}", c.file)))?;
        let exp = from_hex(text, 0).map_err(|e| SimError::Vector(format!("{}: {e}", c.file)))?;
        let mem = slaves[si]
            .memory("mem")
            .ok_or_else(|| SimError::Verilog("slave has no memory 'mem'".into()))?;
        let off = c.base.wrapping_sub(w.base) as usize;
        for k in 0..c.len as usize {
            let want = exp.read_u8(k as u32);
            let got = mem.get(off + k).copied().unwrap_or(0) as u8;
            if want != got {
                if errors == 0 {
                    messages.push(format!("FAIL: {} byte offset {k}: expected {want:02x}, got {got:02x}", c.name));
                }
                errors += 1;
            }
        }
    }
    if errors == 0 {
        messages.push(format!("PASS: {cycles} cycles"));
    } else {
        messages.push(format!("FAIL: {errors} mismatches"));
    }
    Ok(TbOutcome {
        pass: errors == 0,
        cycles,
        messages,
    })
}
