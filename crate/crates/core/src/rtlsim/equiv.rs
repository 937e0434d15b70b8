// SPDX-License-Identifier: Apache-2.0

//! Equivalence of the reference interpreter and the cycle simulator.

use crate::frontend::TypedProgram;
use crate::hls::Fsmd;

use super::cosim::{run_cosim, CosimConfig};
use super::interp::{interpret, ArgValue};
use super::memory::MemoryImage;
use super::SimError;

/// A memory range whose final contents are checked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputRange {
    pub name: String,
    pub bundle: u32,
    pub base: u32,
    pub len: u32,
}

/// Inputs for one run: arguments, one memory image per bundle, and the
/// output ranges to compare.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TestVector {
    pub args: Vec<ArgValue>,
    pub mems: Vec<MemoryImage>,
    pub outputs: Vec<OutputRange>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub pass: bool,
    pub mismatches: Vec<String>,
    pub cycles: u64,
    pub expected_ret: Option<u64>,
    pub expected_mems: Vec<MemoryImage>,
    pub error_response: bool,
}

/// PASS iff both executions agree on the return value and, byte for byte,
/// on every memory image (the designated output ranges included).
pub fn cosim_equiv(prog: &TypedProgram, f: &Fsmd, v: &TestVector, cfg: &CosimConfig) -> Result<Verdict, SimError> {
    let mut gold = v.mems.clone();
    let want = interpret(prog, &v.args, &mut gold)?;
    let mut hw = v.mems.clone();
    let got = run_cosim(f, &v.args, &mut hw, cfg)?;
    let mut mismatches = Vec::new();
    if want.ret != got.ret {
        mismatches.push(format!("return value: expected {:?}, got {:?}", want.ret, got.ret));
    }
    for o in &v.outputs {
        let (e, g) = (&gold[o.bundle as usize], &hw[o.bundle as usize]);
        for k in 0..o.len {
            let a = o.base.wrapping_add(k);
            if e.read_u8(a) != g.read_u8(a) {
                mismatches.push(format!(
                    "{}[{k}] at {a:#x}: expected {:#04x}, got {:#04x}",
                    o.name,
                    e.read_u8(a),
                    g.read_u8(a)
                ));
                break;
            }
        }
    }
    for (b, (e, g)) in gold.iter().zip(&hw).enumerate() {
        if e != g {
            let diff = e.iter().chain(g.iter()).map(|(a, _)| a).find(|&a| e.read_u8(a) != g.read_u8(a));
            mismatches.push(format!("memory of bundle {b} differs at {:#x}", diff.unwrap_or(0)));
        }
    }
    Ok(Verdict {
        pass: mismatches.is_empty(),
        mismatches,
        cycles: got.cycles,
        expected_ret: want.ret,
        expected_mems: gold,
        error_response: got.error_response,
    })
}
