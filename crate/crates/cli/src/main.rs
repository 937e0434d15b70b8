// SPDX-License-Identifier: Apache-2.0

//! `minihls`: MiniC to Verilog high-level synthesis.
//!
//! Exit status: 0 on success, 1 when verification ran and failed, 2 on any
//! error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hls_core::axi::DelayConfig;
use hls_core::charlib::{export_xml, BuildSpec, ComponentLibrary, LinearModel};
use hls_core::config::{parse_encoding, ToolConfig};
use hls_core::corpus::{builtin, load_dir, CorpusEntry};
use hls_core::flow::{self, CompileOptions, SweepOptions};
use hls_core::frontend::SourceUnit;
use hls_core::rtlsim::TestVector;

#[derive(Parser)]
#[command(name = "minihls", version, about = "MiniC to Verilog high-level synthesis")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize a kernel: Verilog, testbench, memory images, scripts, report.
    Compile {
        #[command(flatten)]
        common: Common,
        /// Print the synthesis report.
        #[arg(long)]
        report: bool,
        /// Also write the optimized CDFG as Graphviz.
        #[arg(long)]
        dump_cdfg: bool,
    },
    /// Compile, then co-simulate against the reference interpreter.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Number of vectors to generate from the vectors file.
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Component library operations.
    Charlib {
        #[command(subcommand)]
        cmd: CharlibCmd,
    },
    /// Re-run the testbench stored in an output directory.
    Cosim {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile and verify a corpus at several clock periods in parallel.
    Sweep {
        /// Corpus root (`<tag>/<name>/`); the built-in corpus when absent.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Clock periods in ns, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 6.67, 10.0])]
        clocks_ns: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        vectors: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Delay set R,G,W (repeatable); replaces the configured sets.
        #[arg(long)]
        delays: Vec<DelayConfig>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CharlibCmd {
    /// Characterize every configuration and write `library.xml`.
    Build {
        /// Target descriptor file.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [1u8, 8, 16, 32, 64])]
        widths: Vec<u8>,
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 6.67, 10.0])]
        clocks_ns: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        max_stages: u8,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// MiniC source file.
    src: PathBuf,
    /// Configuration file (sections tool, interface, constraints, delays).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Top-level function; defaults to the configured top or the file stem.
    #[arg(long)]
    top: Option<String>,
    #[arg(long)]
    clock_ns: Option<f64>,
    /// Resource cap KEY=N, e.g. mul=1 or add32=2 (repeatable).
    #[arg(long, value_name = "KEY=N")]
    constrain: Vec<String>,
    /// binary or onehot.
    #[arg(long)]
    fsm_encoding: Option<String>,
    /// Vector description file (the `args` section of a corpus entry).
    #[arg(long)]
    vectors: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Delay set R,G,W (repeatable); replaces the configured sets.
    #[arg(long)]
    delays: Vec<DelayConfig>,
    /// Output directory; overrides HLS_OUT_DIR and the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

type Res<T> = Result<T, String>;

fn read(p: &Path) -> Res<String> {
    std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn load_config(path: Option<&Path>) -> Res<ToolConfig> {
    match path {
        Some(p) => ToolConfig::parse(&read(p)?).map_err(|e| format!("{}: {e}", p.display())),
        None => Ok(ToolConfig::default()),
    }
}

fn out_dir(cfg: &ToolConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.unwrap_or_else(|| cfg.resolved_out_dir())
}

fn clock_ps(ns: f64) -> Res<u32> {
    if ns > 0.0 && ns.is_finite() {
        Ok(hls_core::charlib::model::ns_to_ps(ns).max(1))
    } else {
        Err(format!("clock period must be positive, got {ns}"))
    }
}

/// Configuration with command-line overrides applied, plus the source.
fn setup(c: &Common) -> Res<(ToolConfig, SourceUnit)> {
    let mut cfg = load_config(c.config.as_deref())?;
    if let Some(t) = &c.top {
        cfg.top = t.clone();
    } else if c.config.is_none() {
        cfg.top = c.src.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    }
    if let Some(ns) = c.clock_ns {
        cfg.clock_ps = clock_ps(ns)?;
    }
    for kv in &c.constrain {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--constrain expects KEY=N, got '{kv}'"))?;
        let n: u32 = v.trim().parse().map_err(|_| format!("--constrain {kv}: bad count"))?;
        cfg.constraints.entries.insert(k.trim().to_string(), n);
    }
    if let Some(e) = &c.fsm_encoding {
        cfg.encoding = parse_encoding(e).ok_or_else(|| format!("--fsm-encoding must be binary or onehot, got '{e}'"))?;
    }
    if !c.delays.is_empty() {
        cfg.delays = c.delays.clone();
    }
    // library problems surface before the source is even read
    if let Some(p) = &cfg.library_path {
        if !p.is_file() {
            return Err(format!("config error: library file {} not found", p.display()));
        }
    }
    let text = read(&c.src)?;
    Ok((cfg, SourceUnit::new(c.src.display().to_string(), text)))
}

fn vectors(c: &Common, cfg: &ToolConfig, src: &SourceUnit, n: usize) -> Res<Vec<TestVector>> {
    let Some(p) = &c.vectors else { return Ok(Vec::new()) };
    let mut e = CorpusEntry::parse_vectors(&cfg.top, &src.text, &read(p)?).map_err(|e| format!("{}: {e}", p.display()))?;
    e.iface = cfg.iface.clone();
    e.generate_vectors(c.seed, n).map_err(|e| e.to_string())
}

fn write(a: &hls_core::backend::Artifacts, dir: &Path) -> Res<()> {
    a.write_to(dir).map_err(|e| e.to_string())?;
    eprintln!("wrote {} files to {}", a.files.len(), dir.display());
    Ok(())
}

fn run(cli: Cli) -> Res<bool> {
    match cli.cmd {
        Cmd::Compile { common, report, dump_cdfg } => {
            let (cfg, src) = setup(&common)?;
            let vector = vectors(&common, &cfg, &src, 1)?.into_iter().next();
            let c = flow::compile(&cfg, &src, &CompileOptions { dump_cdfg, vector }).map_err(|e| e.to_string())?;
            write(&c.artifacts, &out_dir(&cfg, common.out.clone()))?;
            if report {
                print!("{}", c.design.report.to_text());
            }
            Ok(true)
        }
        Cmd::Verify { common, count } => {
            let (cfg, src) = setup(&common)?;
            let vs = vectors(&common, &cfg, &src, count)?;
            let (c, r) = flow::verify(&cfg, &src, &vs).map_err(|e| e.to_string())?;
            write(&c.artifacts, &out_dir(&cfg, common.out.clone()))?;
            print!("{}", r.to_text());
            Ok(r.pass)
        }
        Cmd::Charlib {
            cmd:
                CharlibCmd::Build {
                    target,
                    widths,
                    clocks_ns,
                    max_stages,
                    out,
                },
        } => {
            let cfg = ToolConfig {
                target_path: target,
                ..Default::default()
            };
            let t = flow::load_target(&cfg).map_err(|e| e.to_string())?;
            let spec = BuildSpec {
                widths,
                max_stages,
                clocks_ps: clocks_ns.iter().map(|&ns| clock_ps(ns)).collect::<Res<_>>()?,
            };
            let lib = ComponentLibrary::build(t, &LinearModel::default(), &spec).map_err(|e| e.to_string())?;
            let dir = out_dir(&cfg, out);
            std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let p = dir.join("library.xml");
            std::fs::write(&p, export_xml(&lib)).map_err(|e| format!("{}: {e}", p.display()))?;
            eprintln!("wrote {} records to {}", lib.len(), p.display());
            Ok(true)
        }
        Cmd::Cosim { out } => {
            let dir = out_dir(&ToolConfig::default(), out);
            let o = flow::run_testbench_dir(&dir).map_err(|e| e.to_string())?;
            for m in &o.messages {
                println!("{m}");
            }
            Ok(o.pass)
        }
        Cmd::Sweep {
            corpus,
            clocks_ns,
            vectors,
            seed,
            config,
            delays,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let entries = match &corpus {
                Some(d) => load_dir(d).map_err(|e| e.to_string())?,
                None => builtin(),
            };
            let mut o = SweepOptions {
                clocks_ps: clocks_ns.iter().map(|&ns| clock_ps(ns)).collect::<Res<_>>()?,
                delays: cfg.delays.clone(),
                vectors,
                seed,
            };
            if !delays.is_empty() {
                o.delays = delays;
            }
            let r = flow::sweep(&entries, &cfg, &o).map_err(|e| e.to_string())?;
            let dir = out_dir(&cfg, out);
            std::fs::create_dir_all(&dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            let json = serde_json::to_string_pretty(&r).expect("sweep report serializes");
            for (name, text) in [("sweep.json", json + "\n"), ("sweep.txt", r.to_text())] {
                let p = dir.join(name);
                std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            print!("{}", r.to_text());
            Ok(r.pass)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
