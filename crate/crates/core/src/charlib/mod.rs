// SPDX-License-Identifier: Apache-2.0

//! Component characterization: configuration enumeration, an analytical
//! timing/area model, clock-aware record selection and XML persistence.

pub mod library;
pub mod model;
pub mod target;
pub mod xml;

pub use library::{lookup, BuildSpec, ComponentLibrary, LookupParams};
pub use model::{characterize, enumerate_configurations, Instance, LinearModel, Record, Resources, TimingAreaModel};
pub use target::TargetDescriptor;
pub use xml::{export_xml, import_xml};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CharlibError {
    #[error("no legal configurations for {0}")]
    NoLegalConfigurations(String),
    #[error("model has no entry for opcode {0}")]
    NoModelEntry(String),
    #[error("unschedulable operation at clock period {clock} ns: {op}")]
    Unschedulable { op: String, clock: String },
    #[error("library has no record for {0}")]
    NotCharacterized(String),
    #[error("duplicate record key {0}")]
    DuplicateKey(String),
    #[error("library schema violation: {0}")]
    Schema(String),
}
