// SPDX-License-Identifier: Apache-2.0

//! Characterized component library and record selection.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::middle::OpClass;

use super::model::*;
use super::target::TargetDescriptor;
use super::CharlibError;

/// Library key: configuration plus characterization clock.
pub type RecordKey = (Instance, u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentLibrary {
    pub target: TargetDescriptor,
    pub records: BTreeMap<RecordKey, Record>,
}

/// Knobs for building the default library.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildSpec {
    pub widths: Vec<u8>,
    pub max_stages: u8,
    pub clocks_ps: Vec<u32>,
}

impl Default for BuildSpec {
    fn default() -> Self {
        BuildSpec {
            widths: vec![1, 8, 16, 32, 64],
            max_stages: 2,
            clocks_ps: vec![2000, 4000, 6670, 10_000],
        }
    }
}

/// Selection constraints for [`lookup`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupParams {
    pub clock_ps: u32,
    pub margin_ps: u32,
    pub max_stages: u8,
}

impl LookupParams {
    pub fn at(clock_ps: u32) -> LookupParams {
        LookupParams {
            clock_ps,
            margin_ps: 0,
            max_stages: 2,
        }
    }
}

impl ComponentLibrary {
    pub fn new(target: TargetDescriptor) -> ComponentLibrary {
        ComponentLibrary {
            target,
            records: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, r: Record) -> Result<(), CharlibError> {
        let key = (r.inst, r.clock_ps);
        if self.records.insert(key, r).is_some() {
            return Err(CharlibError::DuplicateKey(key_string(&key)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Characterizes every legal configuration in parallel; records are merged
    /// in key order, independent of completion order.
    pub fn build(target: TargetDescriptor, model: &dyn TimingAreaModel, spec: &BuildSpec) -> Result<ComponentLibrary, CharlibError> {
        let stages: Vec<u8> = (0..=spec.max_stages).collect();
        let mut insts = Vec::new();
        for op in OpClass::ALL {
            insts.extend(enumerate_configurations(op, &spec.widths, &stages)?);
        }
        let chunks: Vec<Result<Vec<Record>, CharlibError>> = insts
            .par_iter()
            .map(|&i| characterize(i, &spec.clocks_ps, model, &target))
            .collect();
        let mut lib = ComponentLibrary::new(target);
        for c in chunks {
            for r in c? {
                lib.insert(r)?;
            }
        }
        Ok(lib)
    }

    pub fn default_library() -> ComponentLibrary {
        ComponentLibrary::build(TargetDescriptor::default(), &LinearModel::default(), &BuildSpec::default())
            .expect("default library builds")
    }

    /// Smallest characterized width that covers `width` for `opcode`.
    pub fn covering_width(&self, opcode: OpClass, width: u8) -> Option<u8> {
        self.records
            .keys()
            .filter(|(i, _)| i.opcode == opcode && i.width >= width)
            .map(|(i, _)| i.width)
            .min()
    }
}

pub fn key_string(k: &RecordKey) -> String {
    format!("{}/{}/p{}/{}ns", k.0.opcode, k.0.width, k.0.stages, ps_to_ns_text(k.1))
}

/// Selects the implementation of `opcode` at `width` for a clock period.
///
/// Widths round up to the next characterized width. Delays do not depend on the
/// characterization clock, so feasibility is re-derived at the requested period
/// minus the setup margin. Among feasible configurations the policy prefers
/// minimal latency, then fewer DSPs, fewer LUTs and fewer stages.
pub fn lookup(lib: &ComponentLibrary, opcode: OpClass, width: u8, params: LookupParams) -> Result<Record, CharlibError> {
    let cw = lib
        .covering_width(opcode, width)
        .ok_or_else(|| CharlibError::NotCharacterized(format!("{opcode}{width}")))?;
    let budget = params.clock_ps.saturating_sub(params.margin_ps);
    let mut best: Option<Record> = None;
    let mut seen = None;
    for (&(inst, _), r) in lib.records.range(
        (
            Instance {
                opcode,
                width: cw,
                stages: 0,
            },
            0,
        )..,
    ) {
        if inst.opcode != opcode || inst.width != cw {
            break;
        }
        if seen == Some(inst) || inst.stages > params.max_stages {
            continue;
        }
        seen = Some(inst);
        if r.delay_ps > budget {
            continue;
        }
        let cand = Record {
            clock_ps: params.clock_ps,
            feasible: true,
            ..*r
        };
        let rank = |x: &Record| (x.latency, x.res.dsp, x.res.lut, x.inst.stages);
        if best.as_ref().is_none_or(|b| rank(&cand) < rank(b)) {
            best = Some(cand);
        }
    }
    best.ok_or_else(|| CharlibError::Unschedulable {
        op: format!("{opcode}{width}"),
        clock: ps_to_ns_text(params.clock_ps),
    })
}
