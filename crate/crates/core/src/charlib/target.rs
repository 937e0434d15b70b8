// SPDX-License-Identifier: Apache-2.0

//! Device descriptor.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetDescriptor {
    pub name: String,
    pub lut_capacity: u64,
    /// Widest multiply that maps onto a single DSP block.
    pub dsp_native_width: u8,
    pub ram_ports_per_block: u8,
    /// Host processor clock; documentation only.
    pub host_clock_mhz: u32,
}

impl Default for TargetDescriptor {
    fn default() -> Self {
        TargetDescriptor {
            name: "ng_ultra".into(),
            lut_capacity: 550_000,
            dsp_native_width: 32,
            ram_ports_per_block: 2,
            host_clock_mhz: 600,
        }
    }
}
