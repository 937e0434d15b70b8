// SPDX-License-Identifier: Apache-2.0

//! Verilog emission for an FSMD.
//!
//! The output is one flat module in a restricted Verilog-2001 subset:
//! `wire` declarations with initializers, `reg` and memory declarations,
//! `localparam`, `always @(posedge clk)` blocks with `if`/`case` and
//! non-blocking assignments, and `initial` blocks for RAM contents.
//! Every expression is width-consistent: operands are explicitly widened or
//! truncated to the width of the result, so self-determined and
//! context-determined evaluation agree.

use std::collections::HashMap;
use std::fmt::Write;

use crate::hls::fsmd::{Edge, FsmEncoding, Fsmd, MemTarget, Next, StateKind, Wire};
use crate::hls::kind_name;
use crate::middle::eval::apply;
use crate::middle::{OpClass, Opcode};
use crate::semantics::mask;

use crate::axi::controller::max_beats;

const KEYWORDS: &[&str] = &[
    "always",
    "and",
    "assign",
    "begin",
    "buf",
    "case",
    "casex",
    "casez",
    "default",
    "defparam",
    "disable",
    "edge",
    "else",
    "end",
    "endcase",
    "endfunction",
    "endmodule",
    "endtask",
    "event",
    "for",
    "force",
    "forever",
    "fork",
    "function",
    "if",
    "initial",
    "inout",
    "input",
    "integer",
    "join",
    "localparam",
    "module",
    "nand",
    "negedge",
    "nor",
    "not",
    "or",
    "output",
    "parameter",
    "posedge",
    "real",
    "reg",
    "repeat",
    "signed",
    "supply0",
    "supply1",
    "task",
    "time",
    "tri",
    "wait",
    "wand",
    "while",
    "wire",
    "wor",
    "xnor",
    "xor",
    "generate",
    "endgenerate",
    "genvar",
    "logic",
    "bit",
    "byte",
    "int",
    "void",
];

/// Legal identifier for a source name: characters outside `[A-Za-z0-9_]`
/// become `_`, a leading digit gets a `_` prefix and keywords get a `_v`
/// suffix.
pub fn mangle(name: &str) -> String {
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, '_');
    }
    if KEYWORDS.contains(&s.as_str()) {
        s.push_str("_v");
    }
    s
}

pub fn state_name(k: StateKind) -> String {
    match k {
        StateKind::Idle => "S_IDLE".into(),
        StateKind::Exec(s) => format!("S_E{s}"),
        StateKind::Wait(s) => format!("S_W{s}"),
        StateKind::Done => "S_DONE".into(),
    }
}

fn range(w: u32) -> String {
    format!("[{}:0]", w - 1)
}

fn konst(bits: u64, width: u8) -> String {
    format!("{}'d{}", width, bits & mask(width))
}

fn parse_konst(s: &str) -> Option<u64> {
    let (_, v) = s.split_once("'d")?;
    v.parse().ok()
}

/// Splits `wire [..] x = e;` declarations into a bare declaration and a
/// continuous assignment so nets may be used before their driver appears.
fn split_nets(decls: &str) -> (String, String) {
    let mut d = String::new();
    let mut a = String::new();
    for line in decls.lines() {
        match line.strip_prefix("  wire ").and_then(|r| r.split_once(" = ")) {
            Some((lhs, rhs)) => {
                let name = lhs.rsplit(' ').next().unwrap_or(lhs);
                let _ = writeln!(d, "  wire {lhs};");
                let _ = writeln!(a, "  assign {name} = {rhs}");
            }
            None => {
                d.push_str(line);
                d.push('\n');
            }
        }
    }
    (d, a)
}

/// Port list of an emitted module, used by harnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PortInfo {
    pub name: String,
    pub width: u32,
    pub output: bool,
}

/// AXI port names of a bundle: `m_axi_<bundle>_<CHANNEL><FIELD>`.
pub fn axi_ports(bundle: u32, data_width: u32) -> Vec<PortInfo> {
    let p = |n: &str, w: u32, o: bool| PortInfo {
        name: format!("m_axi_{bundle}_{n}"),
        width: w,
        output: o,
    };
    vec![
        p("ARVALID", 1, true),
        p("ARREADY", 1, false),
        p("ARADDR", 32, true),
        p("ARLEN", 8, true),
        p("ARSIZE", 3, true),
        p("ARBURST", 2, true),
        p("ARID", 1, true),
        p("RVALID", 1, false),
        p("RREADY", 1, true),
        p("RDATA", data_width, false),
        p("RRESP", 2, false),
        p("RLAST", 1, false),
        p("RID", 1, false),
        p("AWVALID", 1, true),
        p("AWREADY", 1, false),
        p("AWADDR", 32, true),
        p("AWLEN", 8, true),
        p("AWSIZE", 3, true),
        p("AWBURST", 2, true),
        p("AWID", 1, true),
        p("WVALID", 1, true),
        p("WREADY", 1, false),
        p("WDATA", data_width, true),
        p("WSTRB", data_width / 8, true),
        p("WLAST", 1, true),
        p("BVALID", 1, false),
        p("BREADY", 1, true),
        p("BRESP", 2, false),
        p("BID", 1, false),
    ]
}

pub fn ports(f: &Fsmd) -> Vec<PortInfo> {
    let mut v = vec![
        PortInfo {
            name: "clk".into(),
            width: 1,
            output: false,
        },
        PortInfo {
            name: "rst".into(),
            width: 1,
            output: false,
        },
        PortInfo {
            name: "start".into(),
            width: 1,
            output: false,
        },
        PortInfo {
            name: "done".into(),
            width: 1,
            output: true,
        },
    ];
    for a in &f.args {
        v.push(PortInfo {
            name: format!("arg_{}", mangle(&a.name)),
            width: a.width as u32,
            output: false,
        });
    }
    if let Some(w) = f.ret_width {
        v.push(PortInfo {
            name: "ret".into(),
            width: w as u32,
            output: true,
        });
    }
    v.push(PortInfo {
        name: "axi_error".into(),
        width: 1,
        output: true,
    });
    for b in &f.bundles {
        v.extend(axi_ports(b.id, b.data_width));
    }
    v
}

struct Emitter<'a> {
    f: &'a Fsmd,
    decls: String,
    body: String,
    tmps: HashMap<String, String>,
    ntmp: usize,
}

impl Emitter<'_> {
    /// Declares (or reuses) a wire holding `expr`.
    fn tmp(&mut self, width: u8, expr: String) -> String {
        let key = format!("{width}:{expr}");
        if let Some(n) = self.tmps.get(&key) {
            return n.clone();
        }
        let n = format!("t{}", self.ntmp);
        self.ntmp += 1;
        let _ = writeln!(self.decls, "  wire {} {n} = {expr};", range(width as u32));
        self.tmps.insert(key, n.clone());
        n
    }

    /// Identifier or sized constant for a wire.
    fn wire(&mut self, w: &Wire) -> String {
        match w {
            Wire::Const { bits, width } => konst(*bits, *width),
            Wire::Arg(i) => format!("a_{i}"),
            Wire::Reg(r) => format!("r{r}"),
            Wire::Fu(u) => format!("fu{u}_y"),
            Wire::Ram { mem, port } => format!("m{}_q{}", self.f.ram_index(*mem).expect("ram"), port),
            Wire::Axi(b) => format!("axi_q{}", self.bundle_index(*b)),
            Wire::Free { op, args, width } => {
                let from = self.f.wire_width(&args[0]);
                let consts: Option<Vec<u64>> = args
                    .iter()
                    .map(|a| match a {
                        Wire::Const { bits, width } => Some(bits & mask(*width)),
                        _ => None,
                    })
                    .collect();
                if let Some(vals) = consts {
                    let aw: Vec<u8> = args.iter().map(|a| self.f.wire_width(a)).collect();
                    return konst(apply(*op, &vals, &aw, *width), *width);
                }
                let a = self.wire(&args[0]);
                match op {
                    Opcode::Ext { signed } => self.fit(a, from, *width, *signed),
                    Opcode::Trunc => self.fit(a, from, *width, false),
                    Opcode::Shl | Opcode::Shr { .. } => {
                        let a = self.fit(a, from, *width, false);
                        let Wire::Const { bits, width: aw } = &args[1] else {
                            panic!("free shift needs a constant amount")
                        };
                        let amt = bits & mask(*aw);
                        let e = match op {
                            Opcode::Shl => format!("{a} << {amt}"),
                            Opcode::Shr { arith: false } => format!("{a} >> {amt}"),
                            _ => format!("$unsigned($signed({a}) >>> {amt})"),
                        };
                        self.tmp(*width, e)
                    }
                    _ => panic!("{} is not a wiring operator", op.mnemonic()),
                }
            }
        }
    }

    /// Resizes an identifier or constant.
    fn fit(&mut self, a: String, from: u8, to: u8, signed: bool) -> String {
        if from == to {
            a
        } else if let Some(v) = parse_konst(&a) {
            let v = if signed { crate::semantics::sext(v, from) as u64 } else { v };
            konst(v, to)
        } else if from > to {
            let a = self.named(a, from);
            self.tmp(to, format!("{a}[{}:0]", to - 1))
        } else {
            let a = self.named(a, from);
            let fill = if signed { format!("{a}[{}]", from - 1) } else { "1'b0".into() };
            self.tmp(to, format!("{{{{{}{{{fill}}}}}, {a}}}", to - from))
        }
    }

    /// Constants cannot be bit-selected; give them a name.
    fn named(&mut self, a: String, w: u8) -> String {
        if a.contains('\'') {
            self.tmp(w, a)
        } else {
            a
        }
    }

    fn bundle_index(&self, id: u32) -> usize {
        self.f.bundles.iter().position(|b| b.id == id).expect("bundle")
    }

    /// `st_a ? e_a : st_b ? e_b : 0` over per-step alternatives.
    fn mux(alts: &[(u32, String)], width: u32) -> String {
        let mut s = String::new();
        for (step, e) in alts {
            let _ = write!(s, "st_{step} ? {e} : ");
        }
        let _ = write!(s, "{width}'d0");
        s
    }

    fn or_steps(steps: &[u32]) -> String {
        if steps.is_empty() {
            "1'b0".into()
        } else {
            steps.iter().map(|s| format!("st_{s}")).collect::<Vec<_>>().join(" | ")
        }
    }
}

fn fu_expr(op: Opcode, i: &[String]) -> String {
    match op {
        Opcode::Add => format!("{} + {}", i[0], i[1]),
        Opcode::Sub => format!("{} - {}", i[0], i[1]),
        Opcode::Mul => format!("{} * {}", i[0], i[1]),
        Opcode::And => format!("{} & {}", i[0], i[1]),
        Opcode::Or => format!("{} | {}", i[0], i[1]),
        Opcode::Xor => format!("{} ^ {}", i[0], i[1]),
        Opcode::Shl => format!("{} << {}", i[0], i[1]),
        Opcode::Shr { arith: false } => format!("{} >> {}", i[0], i[1]),
        Opcode::Shr { arith: true } => format!("$unsigned($signed({}) >>> {})", i[0], i[1]),
        Opcode::Eq => format!("{} == {}", i[0], i[1]),
        Opcode::Ne => format!("{} != {}", i[0], i[1]),
        Opcode::Lt { signed: true } => format!("$signed({}) < $signed({})", i[0], i[1]),
        Opcode::Lt { signed: false } => format!("{} < {}", i[0], i[1]),
        Opcode::Le { signed: true } => format!("$signed({}) <= $signed({})", i[0], i[1]),
        Opcode::Le { signed: false } => format!("{} <= {}", i[0], i[1]),
        Opcode::Mux => format!("{} ? {} : {}", i[0], i[1], i[2]),
        _ => panic!("{} has no combinational unit", op.mnemonic()),
    }
}

/// Emits the design as Verilog text; identical inputs give identical text.
pub fn emit_verilog(f: &Fsmd) -> String {
    let mut e = Emitter {
        f,
        decls: String::new(),
        body: String::new(),
        tmps: HashMap::new(),
        ntmp: 0,
    };
    let top = mangle(&f.name);
    let nstates = f.states.len();
    let sw = match f.encoding {
        FsmEncoding::Binary => usize::BITS - (nstates - 1).max(1).leading_zeros(),
        FsmEncoding::OneHot => nstates as u32,
    };
    let code = |i: usize| -> String {
        match f.encoding {
            FsmEncoding::Binary => format!("{sw}'d{i}"),
            FsmEncoding::OneHot => {
                let mut b = vec!['0'; nstates];
                b[nstates - 1 - i] = '1';
                format!("{sw}'b{}", b.into_iter().collect::<String>())
            }
        }
    };
    let mut head = String::new();
    let _ = writeln!(head, "// {top}: generated FSMD, {} states, {} steps", nstates, f.steps.len());
    let _ = writeln!(head, "module {top} (");
    let plist: Vec<String> = ports(f)
        .iter()
        .map(|p| {
            let dir = if p.output { "output wire" } else { "input wire" };
            if p.width == 1 {
                format!("  {dir} {}", p.name)
            } else {
                format!("  {dir} {} {}", range(p.width), p.name)
            }
        })
        .collect();
    head.push_str(&plist.join(",\n"));
    head.push_str("\n);\n");
    for (i, k) in f.states.iter().enumerate() {
        let _ = writeln!(e.decls, "  localparam {} {} = {};", range(sw), state_name(*k), code(i));
    }
    let _ = writeln!(e.decls, "  reg {} state;", range(sw));
    for (i, a) in f.args.iter().enumerate() {
        let _ = writeln!(e.decls, "  reg {} a_{i};", range(a.width as u32));
    }
    for (i, w) in f.regs.iter().enumerate() {
        let _ = writeln!(e.decls, "  reg {} r{i};", range(*w as u32));
    }
    if let Some(w) = f.ret_width {
        let _ = writeln!(e.decls, "  reg {} ret_r;", range(w as u32));
        let _ = writeln!(e.body, "  assign ret = ret_r;");
    }
    let _ = writeln!(e.body, "  assign done = state == S_DONE;");
    // step decode
    for (s, st) in f.steps.iter().enumerate() {
        let mut d = format!("state == S_E{s}");
        if st.has_axi() {
            let _ = write!(d, " | state == S_W{s}");
        }
        let _ = writeln!(e.decls, "  wire st_{s} = {d};");
    }
    // AXI controllers come first: adv depends on their busy flags
    let mut adv_terms = Vec::new();
    for (s, st) in f.steps.iter().enumerate() {
        if st.has_axi() {
            let idle: Vec<String> = st.bundles().iter().map(|b| format!("~c{}_busy", e.bundle_index(*b))).collect();
            adv_terms.push(format!("(state == S_W{s} & {})", idle.join(" & ")));
        } else {
            adv_terms.push(format!("state == S_E{s}"));
        }
    }
    if adv_terms.is_empty() {
        adv_terms.push("1'b0".into());
    }
    let _ = writeln!(e.decls, "  wire adv = {};", adv_terms.join(" | "));
    emit_fus(&mut e);
    emit_rams(&mut e);
    emit_axi(&mut e);
    emit_fsm(&mut e);
    let (decls, assigns) = split_nets(&e.decls);
    let mut out = head;
    out.push_str(&decls);
    out.push_str(&assigns);
    out.push_str(&e.body);
    out.push_str("endmodule\n");
    out
}

fn emit_fus(e: &mut Emitter) {
    let f = e.f;
    for (u, unit) in f.fus.iter().enumerate() {
        let _ = writeln!(
            e.decls,
            "  // fu{u}: {}{}",
            kind_name(unit.kind),
            if unit.dsp { " (dsp)" } else { "" }
        );
        let issues: Vec<(u32, Opcode, Vec<Wire>)> = f
            .steps
            .iter()
            .enumerate()
            .filter_map(|(s, st)| st.fu_ops.iter().find(|o| o.fu == u).map(|o| (s as u32, o.func, o.args.clone())))
            .collect();
        for (k, &iw) in unit.in_widths.iter().enumerate() {
            let alts: Vec<(u32, String)> = issues
                .iter()
                .map(|(s, _, args)| {
                    let w = e.wire(&args[k]);
                    (*s, e.fit(w, f.wire_width(&args[k]), iw, false))
                })
                .collect();
            let m = Emitter::mux(&alts, iw as u32);
            let _ = writeln!(e.decls, "  wire {} fu{u}_i{k} = {m};", range(iw as u32));
        }
        let ins: Vec<String> = (0..unit.in_widths.len()).map(|k| format!("fu{u}_i{k}")).collect();
        let ow = unit.out_width() as u32;
        if unit.is_divider() {
            emit_divider(e, u, unit.kind.width as u32, unit.kind.opcode == OpClass::Mod, &issues);
            continue;
        }
        let alts: Vec<(u32, String)> = issues.iter().map(|(s, op, _)| (*s, format!("({})", fu_expr(*op, &ins)))).collect();
        let _ = writeln!(e.decls, "  wire {} fu{u}_c = {};", range(ow), Emitter::mux(&alts, ow));
        if unit.latency == 0 {
            let _ = writeln!(e.decls, "  wire {} fu{u}_y = fu{u}_c;", range(ow));
        } else {
            let p = unit.latency;
            for k in 0..p {
                let _ = writeln!(e.decls, "  reg {} fu{u}_p{k};", range(ow));
            }
            let _ = writeln!(e.decls, "  wire {} fu{u}_y = fu{u}_p{};", range(ow), p - 1);
            let _ = writeln!(e.body, "  always @(posedge clk) begin\n    if (adv) begin");
            let _ = writeln!(e.body, "      fu{u}_p0 <= fu{u}_c;");
            for k in 1..p {
                let _ = writeln!(e.body, "      fu{u}_p{k} <= fu{u}_p{};", k - 1);
            }
            let _ = writeln!(e.body, "    end\n  end");
        }
    }
}

/// Iterative restoring divider: one quotient bit per step, the first in the
/// issuing step.
fn emit_divider(e: &mut Emitter, u: usize, w: u32, rem: bool, issues: &[(u32, Opcode, Vec<Wire>)]) {
    let go: Vec<u32> = issues.iter().map(|(s, _, _)| *s).collect();
    let sg: Vec<u32> = issues
        .iter()
        .filter(|(_, op, _)| matches!(op, Opcode::Div { signed: true } | Opcode::Rem { signed: true }))
        .map(|(s, _, _)| *s)
        .collect();
    let p = format!("fu{u}");
    let r = range(w);
    let r1 = range(w + 1);
    let d = &mut e.decls;
    let _ = writeln!(d, "  wire {p}_go = {};", Emitter::or_steps(&go));
    let _ = writeln!(d, "  wire {p}_sg = {};", Emitter::or_steps(&sg));
    let _ = writeln!(d, "  wire {p}_an = {p}_sg & {p}_i0[{}];", w - 1);
    let _ = writeln!(d, "  wire {p}_bn = {p}_sg & {p}_i1[{}];", w - 1);
    let _ = writeln!(d, "  wire {r} {p}_aa = {p}_an ? -{p}_i0 : {p}_i0;");
    let _ = writeln!(d, "  wire {r} {p}_ba = {p}_bn ? -{p}_i1 : {p}_i1;");
    let _ = writeln!(d, "  reg {r1} {p}_r;");
    let _ = writeln!(d, "  reg {r} {p}_q;");
    let _ = writeln!(d, "  reg {r} {p}_b;");
    let _ = writeln!(d, "  reg {r} {p}_a;");
    let _ = writeln!(d, "  reg {p}_nq;");
    let _ = writeln!(d, "  reg {p}_nr;");
    let _ = writeln!(d, "  reg {p}_z;");
    // one iteration from (R, Q, B): shift in the next dividend bit, subtract if possible
    for (tag, first, qq, bb) in [
        ("s", true, format!("{p}_aa"), format!("{p}_ba")),
        ("k", false, format!("{p}_q"), format!("{p}_b")),
    ] {
        if first {
            let _ = writeln!(d, "  wire {r1} {p}_{tag}sh = {{{w}'d0, {qq}[{}]}};", w - 1);
        } else {
            let _ = writeln!(d, "  wire {r1} {p}_{tag}sh = {{{p}_r[{}:0], {qq}[{}]}};", w - 1, w - 1);
        }
        let _ = writeln!(d, "  wire {r1} {p}_{tag}bx = {{1'b0, {bb}}};");
        let _ = writeln!(d, "  wire {p}_{tag}ge = {p}_{tag}sh >= {p}_{tag}bx;");
        let _ = writeln!(
            d,
            "  wire {r1} {p}_{tag}rn = {p}_{tag}ge ? {p}_{tag}sh - {p}_{tag}bx : {p}_{tag}sh;"
        );
        if w == 1 {
            let _ = writeln!(d, "  wire {r} {p}_{tag}qn = {p}_{tag}ge;");
        } else {
            let _ = writeln!(d, "  wire {r} {p}_{tag}qn = {{{qq}[{}:0], {p}_{tag}ge}};", w - 2);
        }
    }
    let _ = writeln!(d, "  wire {r} {p}_rl = {p}_r[{}:0];", w - 1);
    let out = if rem {
        format!("{p}_z ? {p}_a : ({p}_nr ? -{p}_rl : {p}_rl)")
    } else {
        format!("{p}_z ? {{{w}{{1'b1}}}} : ({p}_nq ? -{p}_q : {p}_q)")
    };
    let _ = writeln!(d, "  wire {r} {p}_y = {out};");
    let b = &mut e.body;
    let _ = writeln!(b, "  always @(posedge clk) begin\n    if (adv) begin\n      if ({p}_go) begin");
    let _ = writeln!(
        b,
        "        {p}_r <= {p}_srn;\n        {p}_q <= {p}_sqn;\n        {p}_b <= {p}_ba;\n        {p}_a <= {p}_i0;"
    );
    let _ = writeln!(
        b,
        "        {p}_nq <= {p}_an ^ {p}_bn;\n        {p}_nr <= {p}_an;\n        {p}_z <= {p}_i1 == {w}'d0;"
    );
    let _ = writeln!(
        b,
        "      end else begin\n        {p}_r <= {p}_krn;\n        {p}_q <= {p}_kqn;\n      end\n    end\n  end"
    );
}

fn emit_rams(e: &mut Emitter) {
    let f = e.f;
    for (ri, ram) in f.rams.iter().enumerate() {
        let w = ram.width as u32;
        let ab = ram.addr_bits() as u32;
        let _ = writeln!(
            e.decls,
            "  // dual-port RAM {}: {} x {} bits, synchronous read-first, registered output",
            mangle(&ram.name),
            ram.depth,
            w
        );
        let _ = writeln!(e.decls, "  reg {} m{ri} [0:{}];", range(w), ram.depth - 1);
        for port in 0..2u8 {
            let _ = writeln!(e.decls, "  reg {} m{ri}_q{port};", range(w));
            let mut en = Vec::new();
            let mut we = Vec::new();
            let mut addr = Vec::new();
            let mut data = Vec::new();
            for (s, st) in f.steps.iter().enumerate() {
                for m in &st.mem_ops {
                    if m.target == (MemTarget::Ram { mem: ram.mem, port }) {
                        en.push(s as u32);
                        let a = e.wire(&m.addr);
                        addr.push((s as u32, e.fit(a, f.wire_width(&m.addr), ab as u8, false)));
                        if let Some(dw) = &m.data {
                            we.push(s as u32);
                            let d = e.wire(dw);
                            data.push((s as u32, e.fit(d, f.wire_width(dw), ram.width, false)));
                        }
                    }
                }
            }
            if en.is_empty() {
                continue;
            }
            let d = &mut e.decls;
            let _ = writeln!(d, "  wire m{ri}_en{port} = {};", Emitter::or_steps(&en));
            let _ = writeln!(d, "  wire m{ri}_we{port} = {};", Emitter::or_steps(&we));
            let _ = writeln!(d, "  wire {} m{ri}_a{port} = {};", range(ab), Emitter::mux(&addr, ab));
            let _ = writeln!(d, "  wire {} m{ri}_d{port} = {};", range(w), Emitter::mux(&data, w));
            let b = &mut e.body;
            let _ = writeln!(b, "  always @(posedge clk) begin\n    if (adv & m{ri}_en{port}) begin");
            let _ = writeln!(b, "      if (m{ri}_we{port}) m{ri}[m{ri}_a{port}] <= m{ri}_d{port};");
            let _ = writeln!(b, "      m{ri}_q{port} <= m{ri}[m{ri}_a{port}];\n    end\n  end");
        }
        let b = &mut e.body;
        let _ = writeln!(b, "  integer m{ri}_i;\n  initial begin");
        let _ = writeln!(
            b,
            "    for (m{ri}_i = 0; m{ri}_i < {}; m{ri}_i = m{ri}_i + 1) m{ri}[m{ri}_i] = {w}'d0;",
            ram.depth
        );
        for (k, v) in ram.init.iter().enumerate() {
            if *v != 0 {
                let _ = writeln!(b, "    m{ri}[{k}] = {};", konst(*v, ram.width));
            }
        }
        let _ = writeln!(b, "  end");
    }
}

fn emit_axi(e: &mut Emitter) {
    let f = e.f;
    let mut err_terms = Vec::new();
    for (bi, bun) in f.bundles.iter().enumerate() {
        let id = bun.id;
        let bw = bun.data_width;
        let bb = bw / 8;
        let lg = bb.trailing_zeros();
        let accw = max_beats(bb) * bw;
        let sbw = max_beats(bb) * bb;
        let px = format!("m_axi_{id}_");
        let c = format!("c{bi}");
        let mut go = Vec::new();
        let mut we = Vec::new();
        let mut ld = Vec::new();
        let mut addr = Vec::new();
        let mut bytes = Vec::new();
        let mut wd = Vec::new();
        for (s, st) in f.steps.iter().enumerate() {
            for m in &st.mem_ops {
                let MemTarget::Axi { bundle, base } = m.target else { continue };
                if bundle != id {
                    continue;
                }
                let s = s as u32;
                go.push(format!("state == S_E{s}"));
                let off = e.wire(&m.addr);
                let ow = f.wire_width(&m.addr);
                let off = e.fit(off, ow, 32, false);
                let a = e.tmp(32, format!("a_{base} + {off}"));
                addr.push((s, a));
                bytes.push((s, format!("4'd{}", m.bytes)));
                if let Some(dw) = &m.data {
                    we.push(s);
                    let dv = e.wire(dw);
                    let dv = e.fit(dv, f.wire_width(dw), 64, false);
                    wd.push((s, dv));
                } else {
                    ld.push(s);
                }
            }
        }
        err_terms.push(format!("{c}_err"));
        let d = &mut e.decls;
        let _ = writeln!(d, "  // AXI4 master controller for bundle {id} ({bw}-bit data)");
        let _ = writeln!(d, "  wire {c}_go = {};", if go.is_empty() { "1'b0".into() } else { go.join(" | ") });
        let _ = writeln!(d, "  wire {c}_we = {};", Emitter::or_steps(&we));
        let _ = writeln!(d, "  wire {c}_ld = {};", Emitter::or_steps(&ld));
        let _ = writeln!(d, "  wire [31:0] {c}_addr = {};", Emitter::mux(&addr, 32));
        let _ = writeln!(d, "  wire [3:0] {c}_bytes = {};", Emitter::mux(&bytes, 4));
        let _ = writeln!(d, "  wire [63:0] {c}_wd = {};", Emitter::mux(&wd, 64));
        for (n, w) in [
            ("st", 3),
            ("caddr", 32),
            ("clast", 32),
            ("cbeats", 8),
            ("csize", 4),
            ("cshift", 8),
            ("rdata", 64),
        ] {
            let _ = writeln!(d, "  reg {} {c}_{n};", range(w));
        }
        let _ = writeln!(d, "  reg {c}_narrow;\n  reg {c}_err;");
        let _ = writeln!(
            d,
            "  reg {} {c}_acc;\n  reg {} {c}_wdat;\n  reg {} {c}_wstb;",
            range(accw),
            range(accw),
            range(sbw)
        );
        let _ = writeln!(d, "  reg [63:0] axi_q{bi};");
        let _ = writeln!(d, "  wire {c}_busy = {c}_st != 3'd0;");
        // issue-time address arithmetic
        let amask = format!("32'd{}", !(bb - 1));
        let _ = writeln!(d, "  wire [31:0] {c}_first = {c}_addr & {amask};");
        let _ = writeln!(d, "  wire [31:0] {c}_lastb = {c}_addr + {{28'd0, {c}_bytes}} - 32'd1;");
        let _ = writeln!(d, "  wire [31:0] {c}_last = {c}_lastb & {amask};");
        let _ = writeln!(d, "  wire [31:0] {c}_lane = {c}_addr & 32'd{};", bb - 1);
        let _ = writeln!(d, "  wire [31:0] {c}_bm1 = {{28'd0, {c}_bytes}} - 32'd1;");
        let _ = writeln!(d, "  wire {c}_nar = ({c}_addr & {c}_bm1) == 32'd0 & {c}_bytes <= 4'd{bb};");
        let _ = writeln!(d, "  wire [31:0] {c}_fpl = ({c}_first | 32'd4095) & {amask};");
        let _ = writeln!(d, "  wire [31:0] {c}_fstop = {c}_last < {c}_fpl ? {c}_last : {c}_fpl;");
        let _ = writeln!(
            d,
            "  wire [31:0] {c}_nb0 = {c}_nar ? 32'd1 : (({c}_fstop - {c}_first) >> {lg}) + 32'd1;"
        );
        let _ = writeln!(d, "  wire [31:0] {c}_total = (({c}_last - {c}_first) >> {lg}) + 32'd1;");
        let _ = writeln!(
            d,
            "  wire [31:0] {c}_shift = 32'd{accw} - ({c}_total << {}) + ({c}_lane << 3);",
            lg + 3
        );
        let _ = writeln!(
            d,
            "  wire [63:0] {c}_bmask = {c}_bytes == 4'd8 ? 64'hffffffffffffffff : (64'd1 << ({{60'd0, {c}_bytes}} << 3)) - 64'd1;"
        );
        let _ = writeln!(d, "  wire [63:0] {c}_wdm = {c}_wd & {c}_bmask;");
        let _ = writeln!(d, "  wire {} {c}_wdx = {{{}'d0, {c}_wdm}};", range(accw), accw - 64);
        let _ = writeln!(d, "  wire {} {c}_stb = ({sbw}'d1 << {c}_bytes) - {sbw}'d1;", range(sbw));
        // burst bookkeeping
        let _ = writeln!(d, "  wire [31:0] {c}_pl = ({c}_caddr | 32'd4095) & {amask};");
        let _ = writeln!(d, "  wire {c}_more = ~{c}_narrow & {c}_clast > {c}_pl;");
        let _ = writeln!(d, "  wire [31:0] {c}_next = {c}_pl + 32'd{bb};");
        let _ = writeln!(d, "  wire [31:0] {c}_npl = ({c}_next | 32'd4095) & {amask};");
        let _ = writeln!(d, "  wire [31:0] {c}_nstop = {c}_clast < {c}_npl ? {c}_clast : {c}_npl;");
        let _ = writeln!(d, "  wire [31:0] {c}_nnb = (({c}_nstop - {c}_next) >> {lg}) + 32'd1;");
        let _ = writeln!(d, "  wire {} {c}_rbeat = {{{px}RDATA, {}'d0}};", range(accw), accw - bw);
        let _ = writeln!(d, "  wire {} {c}_accn = ({c}_acc >> {bw}) | {c}_rbeat;", range(accw));
        let _ = writeln!(d, "  wire {} {c}_accs = {c}_accn >> {c}_cshift;", range(accw));
        let _ = writeln!(
            d,
            "  wire [2:0] {c}_lsz = {c}_csize == 4'd8 ? 3'd3 : {c}_csize == 4'd4 ? 3'd2 : {c}_csize == 4'd2 ? 3'd1 : 3'd0;"
        );
        let b = &mut e.body;
        let _ = writeln!(b, "  assign {px}ARVALID = {c}_st == 3'd1;");
        let _ = writeln!(b, "  assign {px}ARADDR = {c}_caddr;");
        let _ = writeln!(b, "  assign {px}ARLEN = {c}_cbeats - 8'd1;");
        let _ = writeln!(b, "  assign {px}ARSIZE = {c}_lsz;");
        let _ = writeln!(b, "  assign {px}ARBURST = 2'b01;");
        let _ = writeln!(b, "  assign {px}ARID = 1'b0;");
        let _ = writeln!(b, "  assign {px}RREADY = {c}_st == 3'd2;");
        let _ = writeln!(b, "  assign {px}AWVALID = {c}_st == 3'd3;");
        let _ = writeln!(b, "  assign {px}AWADDR = {c}_caddr;");
        let _ = writeln!(b, "  assign {px}AWLEN = {c}_cbeats - 8'd1;");
        let _ = writeln!(b, "  assign {px}AWSIZE = {c}_lsz;");
        let _ = writeln!(b, "  assign {px}AWBURST = 2'b01;");
        let _ = writeln!(b, "  assign {px}AWID = 1'b0;");
        let _ = writeln!(b, "  assign {px}WVALID = {c}_st == 3'd4;");
        let _ = writeln!(b, "  assign {px}WDATA = {c}_wdat[{}:0];", bw - 1);
        let _ = writeln!(b, "  assign {px}WSTRB = {c}_wstb[{}:0];", bb - 1);
        let _ = writeln!(b, "  assign {px}WLAST = {c}_cbeats == 8'd1;");
        let _ = writeln!(b, "  assign {px}BREADY = {c}_st == 3'd5;");
        let _ = writeln!(b, "  always @(posedge clk) begin");
        let _ = writeln!(b, "    if (adv & {c}_ld) axi_q{bi} <= {c}_rdata;");
        let _ = writeln!(
            b,
            "    if (rst) begin\n      {c}_st <= 3'd0;\n      {c}_err <= 1'b0;\n    end else begin\n      case ({c}_st)"
        );
        let _ = writeln!(b, "        3'd0: if ({c}_go) begin");
        let _ = writeln!(b, "          {c}_narrow <= {c}_nar;");
        let _ = writeln!(b, "          {c}_caddr <= {c}_nar ? {c}_addr : {c}_first;");
        let _ = writeln!(b, "          {c}_csize <= {c}_nar ? {c}_bytes : 4'd{bb};");
        let _ = writeln!(b, "          {c}_clast <= {c}_last;");
        let _ = writeln!(b, "          {c}_cbeats <= {c}_nb0[7:0];");
        let _ = writeln!(b, "          {c}_cshift <= {c}_shift[7:0];");
        let _ = writeln!(b, "          {c}_wdat <= {c}_wdx << ({c}_lane << 3);");
        let _ = writeln!(b, "          {c}_wstb <= {c}_stb << {c}_lane;");
        let _ = writeln!(b, "          {c}_acc <= {accw}'d0;");
        let _ = writeln!(b, "          {c}_st <= {c}_we ? 3'd3 : 3'd1;");
        let _ = writeln!(b, "        end");
        let _ = writeln!(b, "        3'd1: if ({px}ARREADY) {c}_st <= 3'd2;");
        let _ = writeln!(b, "        3'd2: if ({px}RVALID) begin");
        let _ = writeln!(b, "          {c}_acc <= {c}_accn;");
        let _ = writeln!(b, "          if ({px}RRESP != 2'd0) {c}_err <= 1'b1;");
        let _ = writeln!(b, "          if ({c}_cbeats == 8'd1) begin");
        let _ = writeln!(b, "            if ({c}_more) begin\n              {c}_caddr <= {c}_next;\n              {c}_cbeats <= {c}_nnb[7:0];\n              {c}_st <= 3'd1;");
        let _ = writeln!(
            b,
            "            end else begin\n              {c}_rdata <= {c}_accs[63:0];\n              {c}_st <= 3'd0;\n            end"
        );
        let _ = writeln!(b, "          end else {c}_cbeats <= {c}_cbeats - 8'd1;");
        let _ = writeln!(b, "        end");
        let _ = writeln!(b, "        3'd3: if ({px}AWREADY) {c}_st <= 3'd4;");
        let _ = writeln!(b, "        3'd4: if ({px}WREADY) begin");
        let _ = writeln!(b, "          {c}_wdat <= {c}_wdat >> {bw};");
        let _ = writeln!(b, "          {c}_wstb <= {c}_wstb >> {bb};");
        let _ = writeln!(b, "          if ({c}_cbeats == 8'd1) {c}_st <= 3'd5;");
        let _ = writeln!(b, "          else {c}_cbeats <= {c}_cbeats - 8'd1;");
        let _ = writeln!(b, "        end");
        let _ = writeln!(b, "        3'd5: if ({px}BVALID) begin");
        let _ = writeln!(b, "          if ({px}BRESP != 2'd0) {c}_err <= 1'b1;");
        let _ = writeln!(b, "          if ({c}_more) begin\n            {c}_caddr <= {c}_next;\n            {c}_cbeats <= {c}_nnb[7:0];\n            {c}_st <= 3'd3;");
        let _ = writeln!(b, "          end else {c}_st <= 3'd0;");
        let _ = writeln!(b, "        end");
        let _ = writeln!(b, "        default: {c}_st <= 3'd0;");
        let _ = writeln!(b, "      endcase\n    end\n  end");
    }
    let err = if err_terms.is_empty() {
        "1'b0".to_string()
    } else {
        err_terms.join(" | ")
    };
    let _ = writeln!(e.body, "  assign axi_error = {err};");
}

fn emit_fsm(e: &mut Emitter) {
    let f = e.f;
    let mut arms = String::new();
    for k in &f.states {
        let mut a = String::new();
        match *k {
            StateKind::Idle => {
                let _ = writeln!(a, "          if (start) begin");
                for (i, p) in f.args.iter().enumerate() {
                    let _ = writeln!(a, "            a_{i} <= arg_{};", mangle(&p.name));
                }
                let _ = writeln!(a, "            state <= S_E{};\n          end", f.entry);
            }
            StateKind::Done => {
                let _ = writeln!(a, "          state <= S_IDLE;");
            }
            StateKind::Exec(s) if f.steps[s as usize].has_axi() => {
                let _ = writeln!(a, "          state <= S_W{s};");
            }
            StateKind::Exec(s) | StateKind::Wait(s) => {
                let wait = matches!(k, StateKind::Wait(_));
                let ind = if wait {
                    let _ = writeln!(a, "          if (adv) begin");
                    "            "
                } else {
                    "          "
                };
                let st = &f.steps[s as usize];
                for (r, w) in &st.reg_writes {
                    a.push_str(&assign_reg(e, *r, w, ind));
                }
                match &st.next {
                    Next::Goto(ed) => a.push_str(&edge(e, ed, ind)),
                    Next::Branch { cond, then, els } => {
                        let c = e.wire(cond);
                        let c = e.fit(c, f.wire_width(cond), 1, false);
                        let inner = format!("{ind}  ");
                        let _ = writeln!(a, "{ind}if ({c}) begin");
                        a.push_str(&edge(e, then, &inner));
                        let _ = writeln!(a, "{ind}end else begin");
                        a.push_str(&edge(e, els, &inner));
                        let _ = writeln!(a, "{ind}end");
                    }
                    Next::Return(v) => {
                        if let (Some(v), Some(rw)) = (v, f.ret_width) {
                            let x = e.wire(v);
                            let x = e.fit(x, f.wire_width(v), rw, false);
                            let _ = writeln!(a, "{ind}ret_r <= {x};");
                        }
                        let _ = writeln!(a, "{ind}state <= S_DONE;");
                    }
                }
                if wait {
                    let _ = writeln!(a, "          end");
                }
            }
        }
        let _ = write!(arms, "        {}: begin\n{a}        end\n", state_name(*k));
    }
    let b = &mut e.body;
    let _ = writeln!(b, "  always @(posedge clk) begin");
    let _ = writeln!(b, "    if (rst) begin\n      state <= S_IDLE;");
    for (r, w) in f.regs.iter().enumerate() {
        let _ = writeln!(b, "      r{r} <= {w}'d0;");
    }
    if let Some(w) = f.ret_width {
        let _ = writeln!(b, "      ret_r <= {w}'d0;");
    }
    let _ = writeln!(b, "    end else begin\n      case (state)");
    b.push_str(&arms);
    let _ = writeln!(b, "        default: state <= S_IDLE;\n      endcase\n    end\n  end");
}

fn assign_reg(e: &mut Emitter, r: usize, w: &Wire, ind: &str) -> String {
    let v = e.wire(w);
    let v = e.fit(v, e.f.wire_width(w), e.f.regs[r], false);
    format!("{ind}r{r} <= {v};\n")
}

fn edge(e: &mut Emitter, ed: &Edge, ind: &str) -> String {
    let mut t = String::new();
    for (r, w) in &ed.copies {
        t.push_str(&assign_reg(e, *r, w, ind));
    }
    let _ = writeln!(t, "{ind}state <= S_E{};", ed.to);
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mangling() {
        assert_eq!(mangle("reg"), "reg_v");
        assert_eq!(mangle("vadd"), "vadd");
        assert_eq!(mangle("9x"), "_9x");
    }
}
