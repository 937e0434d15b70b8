// SPDX-License-Identifier: Apache-2.0

//! RTL emission: Verilog, testbench, memory images and synthesis scripts.

pub mod hexfile;
pub mod script;
pub mod tbrun;
pub mod testbench;
pub mod verilog;

use std::path::Path;

use thiserror::Error;

use crate::axi::InterfaceSpec;
use crate::charlib::TargetDescriptor;
use crate::hls::Fsmd;
use crate::rtlsim::TestVector;

pub use crate::axi::DelayConfig;
pub use hexfile::{from_hex, hex_len, to_hex};
pub use script::emit_synthesis_script;
pub use tbrun::{run_testbench, TbOutcome};
pub use testbench::{emit_testbench, Expected, OutputCheck, SlaveWindow, Testbench};
pub use verilog::{emit_verilog, mangle, ports, PortInfo};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("empty file manifest")]
    EmptyManifest,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("test vector error: {0}")]
    Vector(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Every generated file, in manifest order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub top: String,
    pub files: Vec<(String, String)>,
    pub testbench: Option<Testbench>,
}

impl Artifacts {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_str())
    }

    pub fn names(&self) -> Vec<String> {
        self.files.iter().map(|f| f.0.clone()).collect()
    }

    /// Adds or replaces a file, keeping `manifest.txt` last and current.
    pub fn insert(&mut self, name: &str, text: String) {
        self.files.retain(|f| f.0 != name && f.0 != "manifest.txt");
        self.files.push((name.to_string(), text));
        let mut manifest: String = self.files.iter().map(|f| format!("{}\n", f.0)).collect();
        manifest.push_str("manifest.txt\n");
        self.files.push(("manifest.txt".into(), manifest));
    }

    /// Writes every file into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<(), BackendError> {
        std::fs::create_dir_all(dir).map_err(|e| BackendError::Io(format!("{}: {e}", dir.display())))?;
        for (name, text) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| BackendError::Io(format!("{}: {e}", p.display())))?;
        }
        Ok(())
    }
}

/// Emits the design, an optional self-checking testbench with its memory
/// files, one synthesis script per target and `manifest.txt`.
pub fn emit_all(
    f: &Fsmd,
    spec: &InterfaceSpec,
    vector: Option<(&TestVector, &Expected)>,
    delays: DelayConfig,
    targets: &[TargetDescriptor],
) -> Result<Artifacts, BackendError> {
    let top = mangle(&f.name);
    let mut files = vec![(format!("{top}.v"), emit_verilog(f))];
    let testbench = match vector {
        Some((v, exp)) => {
            let tb = emit_testbench(f, spec, v, exp, delays)?;
            files.push((format!("{top}_tb.v"), tb.text.clone()));
            files.extend(tb.files.iter().cloned());
            Some(tb)
        }
        None => None,
    };
    let names: Vec<String> = files.iter().map(|f| f.0.clone()).collect();
    for t in targets {
        files.push((
            format!("synth_{}.script", t.name),
            emit_synthesis_script(t, &names, &top, f.clock_ps)?,
        ));
    }
    let mut manifest: String = files.iter().map(|f| format!("{}\n", f.0)).collect();
    manifest.push_str("manifest.txt\n");
    files.push(("manifest.txt".into(), manifest));
    Ok(Artifacts { top, files, testbench })
}
