// SPDX-License-Identifier: Apache-2.0

//! Self-checking testbench: drives reset and start, applies scalar
//! arguments, attaches one behavioural AXI slave memory per bundle, waits for
//! `done` and compares the return value and designated output ranges against
//! expected-value files.
//!
//! Each slave is its own module written in the synthesizable subset, so the
//! in-repo interpreter runs the same slave text an external simulator would.
//! Only the top-level stimulus block uses simulation-only constructs.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::axi::{DelayConfig, InterfaceSpec, ParamIface};
use crate::hls::Fsmd;
use crate::rtlsim::{ArgValue, MemoryImage, TestVector};
use crate::semantics::mask;

use super::hexfile::to_hex;
use super::verilog::{axi_ports, mangle};
use super::BackendError;

/// Largest slave memory window, in bytes.
pub const MAX_WINDOW: u32 = 1 << 24;

/// Golden results the testbench checks against.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expected {
    pub ret: Option<u64>,
    /// Final memory image per bundle.
    pub mems: Vec<MemoryImage>,
}

/// The byte window a slave memory models, `[base, base + size)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlaveWindow {
    pub bundle: u32,
    pub module: String,
    pub base: u32,
    pub size: u32,
    pub data_width: u32,
    pub file: String,
}

/// One designated output range and its expected-value file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputCheck {
    pub name: String,
    pub bundle: u32,
    pub base: u32,
    pub len: u32,
    pub file: String,
}

/// A testbench plus the plan needed to re-run it from its files; the plan
/// serializes without the file contents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Testbench {
    pub top: String,
    #[serde(skip)]
    pub text: String,
    /// Auxiliary files `(name, contents)`, sorted by name.
    #[serde(skip)]
    pub files: Vec<(String, String)>,
    /// Argument port values in port order.
    pub args: Vec<(String, u64)>,
    pub expected_ret: Option<u64>,
    pub slaves: Vec<SlaveWindow>,
    pub checks: Vec<OutputCheck>,
    pub delays: DelayConfig,
    pub cycle_budget: u64,
}

impl Testbench {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_str())
    }
}

fn window(bundle: u32, v: &TestVector, exp: &Expected, bus_bytes: u32) -> Result<(u32, u32), BackendError> {
    let mut addrs: Vec<u64> = Vec::new();
    let b = bundle as usize;
    addrs.extend(v.mems.get(b).into_iter().flat_map(|m| m.iter().map(|(a, _)| a as u64)));
    addrs.extend(exp.mems.get(b).into_iter().flat_map(|m| m.iter().map(|(a, _)| a as u64)));
    for o in v.outputs.iter().filter(|o| o.bundle == bundle) {
        addrs.push(o.base as u64);
        addrs.push(o.base as u64 + o.len.max(1) as u64 - 1);
    }
    for a in &v.args {
        if let ArgValue::Array { bundle: ab, base } = a {
            if *ab == bundle {
                addrs.push(*base as u64);
            }
        }
    }
    let bb = bus_bytes as u64;
    let lo = addrs.iter().min().copied().unwrap_or(0) & !(bb - 1);
    let hi = (addrs.iter().max().copied().unwrap_or(0) + bb) & !(bb - 1);
    let size = hi - lo;
    if size > MAX_WINDOW as u64 {
        return Err(BackendError::Vector(format!(
            "bundle {bundle} touches {size} bytes; the testbench memory holds at most {MAX_WINDOW}"
        )));
    }
    Ok((lo as u32, size as u32))
}

/// Testbench text plus memory-image and expected-value files.
pub fn emit_testbench(
    f: &Fsmd,
    spec: &InterfaceSpec,
    v: &TestVector,
    exp: &Expected,
    delays: DelayConfig,
) -> Result<Testbench, BackendError> {
    let top = mangle(&f.name);
    if v.args.len() < f.args.len() {
        return Err(BackendError::Vector(format!(
            "missing vector for parameter '{}'",
            f.args[v.args.len()].name
        )));
    }
    if v.args.len() > f.args.len() {
        return Err(BackendError::Vector(format!(
            "{} arguments given, '{}' takes {}",
            v.args.len(),
            f.name,
            f.args.len()
        )));
    }
    let mut args = Vec::new();
    for (p, a) in f.args.iter().zip(&v.args) {
        let val = match (a, p.pointer) {
            (ArgValue::Scalar(x), false) => x & mask(p.width),
            (ArgValue::Array { base, .. }, true) => *base as u64,
            _ => return Err(BackendError::Vector(format!("argument kind mismatch for '{}'", p.name))),
        };
        args.push((format!("arg_{}", mangle(&p.name)), val));
    }
    let mut files = Vec::new();
    let mut slaves = Vec::new();
    for b in &f.bundles {
        if v.mems.len() <= b.id as usize {
            return Err(BackendError::Vector(format!("missing memory image for bundle {}", b.id)));
        }
        let (base, size) = window(b.id, v, exp, b.data_width / 8)?;
        let file = format!("mem_{}.hex", b.id);
        files.push((file.clone(), to_hex(&v.mems[b.id as usize], base, size)));
        slaves.push(SlaveWindow {
            bundle: b.id,
            module: format!("{top}_axi_slave{}", b.id),
            base,
            size,
            data_width: b.data_width,
            file,
        });
    }
    let mut checks = Vec::new();
    for o in &v.outputs {
        let Some(m) = exp.mems.get(o.bundle as usize) else {
            return Err(BackendError::Vector(format!("no expected image for output '{}'", o.name)));
        };
        if !slaves.iter().any(|s| s.bundle == o.bundle) {
            return Err(BackendError::Vector(format!(
                "output '{}' names bundle {}, which the design does not use",
                o.name, o.bundle
            )));
        }
        let file = format!("expected_{}.hex", mangle(&o.name));
        files.push((file.clone(), to_hex(m, o.base, o.len)));
        checks.push(OutputCheck {
            name: o.name.clone(),
            bundle: o.bundle,
            base: o.base,
            len: o.len,
            file,
        });
    }
    files.sort();
    let budget = crate::rtlsim::DEFAULT_CYCLE_BUDGET;
    let mut t = String::new();
    let _ = writeln!(t, "// Self-checking testbench for {top}.");
    let _ = writeln!(
        t,
        "// Slave delays: read latency {}, gap {}, write latency {} cycles.",
        delays.read_latency, delays.gap, delays.write_latency
    );
    for p in &spec.params {
        if let ParamIface::AxiMaster { bundle } = p.kind {
            let _ = writeln!(t, "// Parameter {} is served by AXI bundle {bundle}.", p.name);
        }
    }
    let _ = writeln!(t, "`timescale 1ns / 1ps");
    let _ = writeln!(t, "module {top}_tb;");
    let half = f.clock_ps as f64 / 2000.0;
    let _ = writeln!(t, "  reg clk = 1'b0;\n  reg rst = 1'b1;\n  reg start = 1'b0;");
    let _ = writeln!(t, "  always #{half} clk = ~clk;");
    let _ = writeln!(t, "  wire done;\n  wire axi_error;");
    if let Some(w) = f.ret_width {
        let _ = writeln!(t, "  wire [{}:0] ret;", w - 1);
    }
    for b in &f.bundles {
        for p in axi_ports(b.id, b.data_width) {
            if p.width == 1 {
                let _ = writeln!(t, "  wire {};", p.name);
            } else {
                let _ = writeln!(t, "  wire [{}:0] {};", p.width - 1, p.name);
            }
        }
    }
    let mut conns = vec![
        ".clk(clk)".to_string(),
        ".rst(rst)".into(),
        ".start(start)".into(),
        ".done(done)".into(),
    ];
    for ((name, val), p) in args.iter().zip(&f.args) {
        conns.push(format!(".{name}({}'d{val})", p.width));
    }
    if f.ret_width.is_some() {
        conns.push(".ret(ret)".into());
    }
    conns.push(".axi_error(axi_error)".into());
    for b in &f.bundles {
        for p in axi_ports(b.id, b.data_width) {
            conns.push(format!(".{0}({0})", p.name));
        }
    }
    let _ = writeln!(t, "  {top} dut (\n    {}\n  );", conns.join(",\n    "));
    for s in &slaves {
        let px = format!("m_axi_{}_", s.bundle);
        let c: Vec<String> = std::iter::once(".clk(clk), .rst(rst)".to_string())
            .chain(
                axi_ports(s.bundle, s.data_width)
                    .into_iter()
                    .filter(|p| !p.name.ends_with("BURST") && !p.name.ends_with("ID"))
                    .map(|p| format!(".{}({})", &p.name[px.len()..], p.name)),
            )
            .collect();
        let _ = writeln!(t, "  {} slave{} (\n    {}\n  );", s.module, s.bundle, c.join(",\n    "));
        let _ = writeln!(t, "  assign {px}RID = 1'b0;\n  assign {px}BID = 1'b0;");
    }
    for c in &checks {
        let _ = writeln!(t, "  reg [7:0] exp_{} [0:{}];", mangle(&c.name), c.len.max(1) - 1);
    }
    let _ = writeln!(t, "  integer cycles;\n  integer errors;\n  integer k;");
    let _ = writeln!(t, "  initial begin");
    for c in &checks {
        let _ = writeln!(t, "    $readmemh(\"{}\", exp_{});", c.file, mangle(&c.name));
    }
    let _ = writeln!(t, "    cycles = 0;\n    errors = 0;");
    let _ = writeln!(t, "    @(negedge clk);\n    @(negedge clk);\n    rst = 1'b0;\n    start = 1'b1;");
    let _ = writeln!(t, "    @(posedge clk);\n    cycles = 1;");
    let _ = writeln!(t, "    while (!done) begin");
    let _ = writeln!(t, "      @(posedge clk);\n      cycles = cycles + 1;");
    let _ = writeln!(
        t,
        "      if (cycles > {budget}) begin\n        $display(\"FAIL: no done after {budget} cycles\");\n        $finish;\n      end"
    );
    let _ = writeln!(t, "    end");
    if let (Some(w), Some(r)) = (f.ret_width, exp.ret) {
        let _ = writeln!(t, "    if (ret !== {w}'d{r}) begin");
        let _ = writeln!(
            t,
            "      $display(\"FAIL: return value %0d, expected {r}\", ret);\n      errors = errors + 1;\n    end"
        );
    }
    for c in &checks {
        let s = slaves.iter().find(|s| s.bundle == c.bundle).expect("slave");
        let off = c.base.wrapping_sub(s.base);
        let n = mangle(&c.name);
        let _ = writeln!(t, "    for (k = 0; k < {}; k = k + 1) begin", c.len);
        let _ = writeln!(t, "      if (slave{}.mem[{off} + k] !== exp_{n}[k]) begin", c.bundle);
        let _ = writeln!(
            t,
            "        if (errors == 0) $display(\"FAIL: {} byte offset %0d: expected %h, got %h\", k, exp_{n}[k], slave{}.mem[{off} + k]);",
            c.name, c.bundle
        );
        let _ = writeln!(t, "        errors = errors + 1;\n      end\n    end");
    }
    let _ = writeln!(t, "    if (errors == 0) $display(\"PASS: %0d cycles\", cycles);");
    let _ = writeln!(t, "    else $display(\"FAIL: %0d mismatches\", errors);");
    let _ = writeln!(t, "    $finish;\n  end\nendmodule");
    for s in &slaves {
        t.push('\n');
        t.push_str(&slave_module(s, delays));
    }
    Ok(Testbench {
        top,
        text: t,
        files,
        args,
        expected_ret: exp.ret,
        slaves,
        checks,
        delays,
        cycle_budget: budget,
    })
}

/// Behavioural AXI4 slave memory, cycle-equivalent to the simulator's slave
/// model, in the synthesizable subset.
pub fn slave_module(s: &SlaveWindow, d: DelayConfig) -> String {
    let dw = s.data_width;
    let bb = dw / 8;
    let amask = format!("32'd{}", !(bb - 1));
    let mut t = String::new();
    let _ = writeln!(
        t,
        "// AXI4 slave memory for bundle {}: bytes [{:#x}, {:#x}).",
        s.bundle,
        s.base,
        s.base as u64 + s.size as u64
    );
    let _ = writeln!(t, "module {} (", s.module);
    let ports = [
        ("input", 1, "clk"),
        ("input", 1, "rst"),
        ("input", 1, "ARVALID"),
        ("output", 1, "ARREADY"),
        ("input", 32, "ARADDR"),
        ("input", 8, "ARLEN"),
        ("input", 3, "ARSIZE"),
        ("output", 1, "RVALID"),
        ("input", 1, "RREADY"),
        ("output", dw, "RDATA"),
        ("output", 2, "RRESP"),
        ("output", 1, "RLAST"),
        ("input", 1, "AWVALID"),
        ("output", 1, "AWREADY"),
        ("input", 32, "AWADDR"),
        ("input", 8, "AWLEN"),
        ("input", 3, "AWSIZE"),
        ("input", 1, "WVALID"),
        ("output", 1, "WREADY"),
        ("input", dw, "WDATA"),
        ("input", bb, "WSTRB"),
        ("input", 1, "WLAST"),
        ("output", 1, "BVALID"),
        ("input", 1, "BREADY"),
        ("output", 2, "BRESP"),
    ];
    let pl: Vec<String> = ports
        .iter()
        .map(|(d, w, n)| {
            if *w == 1 {
                format!("  {d} wire {n}")
            } else {
                format!("  {d} wire [{}:0] {n}", w - 1)
            }
        })
        .collect();
    t.push_str(&pl.join(",\n"));
    t.push_str("\n);\n");
    let _ = writeln!(t, "  localparam [31:0] RL = 32'd{};", d.read_latency);
    let _ = writeln!(t, "  localparam [31:0] GAP = 32'd{};", d.gap);
    let _ = writeln!(t, "  localparam [31:0] WL = 32'd{};", d.write_latency);
    let _ = writeln!(t, "  localparam [31:0] BASE = 32'd{};", s.base);
    let _ = writeln!(t, "  localparam [31:0] SIZE = 32'd{};", s.size);
    let _ = writeln!(t, "  reg [7:0] mem [0:{}];", s.size - 1);
    let _ = writeln!(t, "  initial $readmemh(\"{}\", mem);", s.file);
    for r in [
        "ar_wait", "raddr", "rsize", "rbeats", "rcount", "aw_wait", "waddr", "wsize", "wbeats", "wcount",
    ] {
        let _ = writeln!(t, "  reg [31:0] {r};");
    }
    let _ = writeln!(t, "  reg rd_active;\n  reg [1:0] wr_phase;");
    let _ = writeln!(t, "  wire [31:0] rword = (raddr & {amask}) - BASE;");
    let _ = writeln!(t, "  wire [31:0] wword = (waddr & {amask}) - BASE;");
    let mut bytes = Vec::new();
    for j in (0..bb).rev() {
        let _ = writeln!(t, "  wire [31:0] ri{j} = rword + 32'd{j};");
        let _ = writeln!(t, "  wire [7:0] rb{j} = ri{j} < SIZE ? mem[ri{j}] : 8'd0;");
        let _ = writeln!(t, "  wire [31:0] wi{j} = wword + 32'd{j};");
        bytes.push(format!("rb{j}"));
    }
    let _ = writeln!(t, "  assign ARREADY = ~rd_active & ar_wait >= GAP;");
    let _ = writeln!(t, "  assign RVALID = rd_active & rcount == 32'd0;");
    let _ = writeln!(t, "  assign RDATA = RVALID ? {{{}}} : {dw}'d0;", bytes.join(", "));
    let _ = writeln!(t, "  assign RRESP = 2'd0;");
    let _ = writeln!(t, "  assign RLAST = rd_active & rbeats == 32'd1;");
    let _ = writeln!(t, "  assign AWREADY = wr_phase == 2'd0 & aw_wait >= GAP;");
    let _ = writeln!(t, "  assign WREADY = wr_phase == 2'd1 & wcount == 32'd0;");
    let _ = writeln!(t, "  assign BVALID = wr_phase == 2'd2 & wcount == 32'd0;");
    let _ = writeln!(t, "  assign BRESP = 2'd0;");
    let _ = writeln!(t, "  always @(posedge clk) begin");
    let _ = writeln!(t, "    if (rst) begin\n      rd_active <= 1'b0;\n      ar_wait <= 32'd0;\n      wr_phase <= 2'd0;\n      aw_wait <= 32'd0;\n    end else begin");
    let _ = writeln!(t, "      if (rd_active) begin");
    let _ = writeln!(t, "        if (rcount != 32'd0) rcount <= rcount - 32'd1;");
    let _ = writeln!(t, "        else if (RREADY) begin");
    let _ = writeln!(
        t,
        "          rbeats <= rbeats - 32'd1;\n          raddr <= (raddr & ~(rsize - 32'd1)) + rsize;\n          rcount <= GAP;"
    );
    let _ = writeln!(t, "          if (rbeats == 32'd1) rd_active <= 1'b0;\n        end");
    let _ = writeln!(t, "      end else if (ARVALID) begin");
    let _ = writeln!(t, "        if (ARREADY) begin");
    let _ = writeln!(
        t,
        "          rd_active <= 1'b1;\n          raddr <= ARADDR;\n          rsize <= 32'd1 << ARSIZE;"
    );
    let _ = writeln!(
        t,
        "          rbeats <= {{24'd0, ARLEN}} + 32'd1;\n          rcount <= RL;\n          ar_wait <= 32'd0;"
    );
    let _ = writeln!(t, "        end else ar_wait <= ar_wait + 32'd1;");
    let _ = writeln!(t, "      end else ar_wait <= 32'd0;");
    let _ = writeln!(t, "      case (wr_phase)");
    let _ = writeln!(t, "        2'd0: if (AWVALID) begin");
    let _ = writeln!(t, "          if (AWREADY) begin");
    let _ = writeln!(
        t,
        "            wr_phase <= 2'd1;\n            waddr <= AWADDR;\n            wsize <= 32'd1 << AWSIZE;"
    );
    let _ = writeln!(
        t,
        "            wbeats <= {{24'd0, AWLEN}} + 32'd1;\n            wcount <= GAP;\n            aw_wait <= 32'd0;"
    );
    let _ = writeln!(t, "          end else aw_wait <= aw_wait + 32'd1;");
    let _ = writeln!(t, "        end else aw_wait <= 32'd0;");
    let _ = writeln!(t, "        2'd1: if (wcount != 32'd0) begin");
    let _ = writeln!(t, "          if (WVALID) wcount <= wcount - 32'd1;");
    let _ = writeln!(t, "        end else if (WVALID) begin");
    for j in 0..bb {
        let _ = writeln!(
            t,
            "          if (WSTRB[{j}] & (wi{j} < SIZE)) mem[wi{j}] <= WDATA[{}:{}];",
            8 * j + 7,
            8 * j
        );
    }
    let _ = writeln!(
        t,
        "          waddr <= (waddr & ~(wsize - 32'd1)) + wsize;\n          wbeats <= wbeats - 32'd1;\n          wcount <= GAP;"
    );
    let _ = writeln!(
        t,
        "          if (wbeats == 32'd1) begin\n            wr_phase <= 2'd2;\n            wcount <= WL;\n          end"
    );
    let _ = writeln!(t, "        end");
    let _ = writeln!(t, "        default: if (wcount != 32'd0) wcount <= wcount - 32'd1;");
    let _ = writeln!(t, "        else if (BREADY) wr_phase <= 2'd0;");
    let _ = writeln!(t, "      endcase\n    end\n  end\nendmodule");
    t
}
