// SPDX-License-Identifier: Apache-2.0

//! AXI4 master interfaces: inference, access planning, controller and slave
//! models, and a protocol monitor.

pub mod controller;
pub mod iface;
pub mod monitor;
pub mod plan;
pub mod slave;

pub use controller::{AxiController, Issue, MasterOut, SlaveOut};
pub use iface::{apply_interfaces, infer_interfaces, BundleSpec, IfaceParam, InterfaceConfig, InterfaceSpec, ParamIface};
pub use monitor::{ProtocolMonitor, Sampling, Violation};
pub use plan::{plan_access, AxiTransaction, Resp};
pub use slave::{AxiSlave, DelayConfig, SlaveFault};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AxiError {
    #[error("interface config: {0}")]
    Config(String),
}

use crate::hls::fsmd::{BundleCtl, Fsmd};

/// Adds one controller per bundle of the interface; a design without
/// external memories is returned unchanged.
pub fn attach_controllers(mut f: Fsmd, spec: &InterfaceSpec) -> Fsmd {
    f.bundles = spec
        .bundles
        .iter()
        .map(|b| BundleCtl {
            id: b.id,
            data_width: b.data_width,
        })
        .collect();
    f
}
