// SPDX-License-Identifier: Apache-2.0

//! Component configurations and the analytical timing/area model.
//!
//! All times are integer picoseconds so that records compare exactly and
//! round-trip through decimal text without loss.

use serde::{Deserialize, Serialize};

use crate::middle::OpClass;

use super::target::TargetDescriptor;
use super::CharlibError;

/// Upper bound on pipeline register cuts accepted by enumeration.
pub const MAX_ENUM_STAGES: u8 = 8;

/// One configuration of a component template: class, operand width, and
/// pipeline register cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Instance {
    pub opcode: OpClass,
    pub width: u8,
    pub stages: u8,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Resources {
    pub lut: u32,
    pub dsp: u32,
    pub ram: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Record {
    pub inst: Instance,
    pub clock_ps: u32,
    /// Combinational delay of one stage (or one cycle of a sequential unit).
    pub delay_ps: u32,
    pub latency: u32,
    pub ii: u32,
    pub res: Resources,
    pub feasible: bool,
}

impl Record {
    /// Sequential units iterate internally; their latency is not from pipelining.
    pub fn is_sequential(&self) -> bool {
        matches!(self.inst.opcode, OpClass::Div | OpClass::Mod)
    }
}

pub fn is_legal(inst: Instance) -> bool {
    if !(1..=64).contains(&inst.width) || inst.stages > MAX_ENUM_STAGES {
        return false;
    }
    match inst.opcode {
        OpClass::Div | OpClass::Mod | OpClass::Ext | OpClass::LoadPort | OpClass::StorePort => inst.stages == 0,
        _ => true,
    }
}

/// Cartesian product of widths and stage counts, filtered by legality.
pub fn enumerate_configurations(opcode: OpClass, widths: &[u8], stages: &[u8]) -> Result<Vec<Instance>, CharlibError> {
    let mut out = Vec::new();
    for &width in widths {
        for &s in stages {
            let inst = Instance { opcode, width, stages: s };
            if is_legal(inst) {
                out.push(inst);
            }
        }
    }
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(CharlibError::NoLegalConfigurations(opcode.name().to_string()));
    }
    Ok(out)
}

/// Source of base delays and areas for characterization.
pub trait TimingAreaModel: Sync {
    fn name(&self) -> &str;
    /// Unpipelined delay, or per-cycle delay for sequential units.
    fn base_delay_ps(&self, opcode: OpClass, width: u8) -> Option<u32>;
    fn resources(&self, inst: Instance, target: &TargetDescriptor) -> Resources;
}

/// `delay = a + b·w` per class, in picoseconds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coeffs: Vec<(OpClass, u32, u32)>,
}

impl Default for LinearModel {
    fn default() -> Self {
        LinearModel {
            coeffs: vec![
                (OpClass::Add, 500, 50),
                (OpClass::Sub, 500, 50),
                (OpClass::Cmp, 500, 50),
                (OpClass::Mul, 1000, 90),
                (OpClass::Div, 500, 50),
                (OpClass::Mod, 500, 50),
                (OpClass::Bitop, 300, 10),
                (OpClass::Shl, 400, 20),
                (OpClass::Shr, 400, 20),
                (OpClass::Mux, 200, 10),
                (OpClass::LoadPort, 600, 0),
                (OpClass::StorePort, 600, 0),
                (OpClass::Ext, 0, 0),
            ],
        }
    }
}

impl TimingAreaModel for LinearModel {
    fn name(&self) -> &str {
        "linear"
    }

    fn base_delay_ps(&self, opcode: OpClass, width: u8) -> Option<u32> {
        self.coeffs.iter().find(|c| c.0 == opcode).map(|&(_, a, b)| a + b * width as u32)
    }

    fn resources(&self, inst: Instance, target: &TargetDescriptor) -> Resources {
        let w = inst.width as u32;
        match inst.opcode {
            OpClass::Mul if inst.width <= target.dsp_native_width => Resources { lut: 0, dsp: 1, ram: 0 },
            OpClass::Mul => Resources {
                lut: (w * w).div_ceil(2),
                dsp: 0,
                ram: 0,
            },
            OpClass::Div | OpClass::Mod => Resources {
                lut: 2 * w,
                dsp: 0,
                ram: 0,
            },
            OpClass::Ext | OpClass::LoadPort | OpClass::StorePort => Resources::default(),
            _ => Resources { lut: w, dsp: 0, ram: 0 },
        }
    }
}

/// One record per clock period; infeasible records are kept and marked.
pub fn characterize(
    inst: Instance,
    clocks_ps: &[u32],
    model: &dyn TimingAreaModel,
    target: &TargetDescriptor,
) -> Result<Vec<Record>, CharlibError> {
    let base = model
        .base_delay_ps(inst.opcode, inst.width)
        .ok_or_else(|| CharlibError::NoModelEntry(inst.opcode.name().to_string()))?;
    let (delay, latency, ii) = match inst.opcode {
        OpClass::Div | OpClass::Mod => (base, inst.width as u32, inst.width as u32),
        OpClass::LoadPort => (base, 1, 1),
        _ => (base.div_ceil(inst.stages as u32 + 1), inst.stages as u32, 1),
    };
    let res = model.resources(inst, target);
    Ok(clocks_ps
        .iter()
        .map(|&clock_ps| Record {
            inst,
            clock_ps,
            delay_ps: delay,
            latency,
            ii,
            res,
            feasible: delay <= clock_ps,
        })
        .collect())
}

/// Converts a period in nanoseconds to picoseconds, rounding to nearest.
pub fn ns_to_ps(ns: f64) -> u32 {
    (ns * 1000.0).round() as u32
}

/// Formats picoseconds as nanoseconds with three decimals.
pub fn ps_to_ns_text(ps: u32) -> String {
    format!("{}.{:03}", ps / 1000, ps % 1000)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(op: OpClass, w: u8, p: u8, clock: u32) -> Record {
        characterize(
            Instance {
                opcode: op,
                width: w,
                stages: p,
            },
            &[clock],
            &LinearModel::default(),
            &TargetDescriptor::default(),
        )
        .unwrap()[0]
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_configurations(OpClass::Add, &[8, 32], &[0]).unwrap().len(), 2);
        assert_eq!(enumerate_configurations(OpClass::Mul, &[16, 32], &[0, 1, 2]).unwrap().len(), 6);
        assert!(matches!(
            enumerate_configurations(OpClass::Div, &[32], &[1]),
            Err(CharlibError::NoLegalConfigurations(_))
        ));
    }

    #[test]
    fn model_values() {
        let a = rec(OpClass::Add, 32, 0, 10_000);
        assert_eq!((a.delay_ps, a.latency, a.feasible), (2100, 0, true));
        let m = rec(OpClass::Mul, 32, 0, 10_000);
        assert_eq!((m.delay_ps, m.latency, m.res.dsp, m.res.lut), (3880, 0, 1, 0));
        let m1 = rec(OpClass::Mul, 32, 1, 2000);
        assert_eq!((m1.delay_ps, m1.latency, m1.feasible), (1940, 1, true));
        let d = rec(OpClass::Div, 16, 0, 2000);
        assert_eq!((d.delay_ps, d.latency, d.ii), (1300, 16, 16));
        assert_eq!(rec(OpClass::Mul, 64, 0, 10_000).res.lut, 2048);
    }

    #[test]
    fn decimal_text() {
        assert_eq!(ps_to_ns_text(2100), "2.100");
        assert_eq!(ps_to_ns_text(6670), "6.670");
        assert_eq!(ns_to_ps(6.67), 6670);
    }
}
