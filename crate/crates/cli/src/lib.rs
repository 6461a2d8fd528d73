//! Command-line front end: parses flags, runs one verification and emits its report.

mod commands;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use atomdyn::{Error, VerificationReport};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "atomdyn", version, about = "Exact verification of the atom hierarchy model")]
pub struct Cli {
    /// Output format; tables default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write `<command>.<ext>` here instead of printing to stdout.
    #[arg(long, global = true, env = "ATOMDYN_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for the data-parallel kernels.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub workers: u16,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
            Self::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureCheck {
    Invariance,
    Mixing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleName {
    Zero,
    Stream,
}

/// Inclusive range written `a..b` or `a..=b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LRange {
    pub start: u32,
    pub end: u32,
}

impl FromStr for LRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once("..")
            .ok_or_else(|| format!("expected a..b, got {s:?}"))?;
        let b = b.strip_prefix('=').unwrap_or(b);
        let start: u32 = a.trim().parse().map_err(|e| format!("bad start {a:?}: {e}"))?;
        let end: u32 = b.trim().parse().map_err(|e| format!("bad end {b:?}: {e}"))?;
        if start == 0 || start > end {
            return Err(format!("need 1 <= start <= end, got {start}..{end}"));
        }
        Ok(Self { start, end })
    }
}

/// An atom written `gen:index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AtomArg {
    pub gen: u32,
    pub index: u64,
}

impl FromStr for AtomArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (g, i) = s
            .split_once(':')
            .ok_or_else(|| format!("expected gen:index, got {s:?}"))?;
        Ok(Self {
            gen: g.parse().map_err(|e| format!("bad generation {g:?}: {e}"))?,
            index: i.parse().map_err(|e| format!("bad index {i:?}: {e}"))?,
        })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate a generation and check every atom axiom.
    VerifyAtoms {
        #[arg(long)]
        gen: u32,
    },
    /// Count (l+1)-paths of n-atoms, in total or between two atoms.
    Paths {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: u32,
        /// Index of the first atom.
        #[arg(long, requires = "to")]
        from: Option<u64>,
        /// Index of the last atom.
        #[arg(long, requires = "from")]
        to: Option<u64>,
        /// Largest path count that is also enumerated one by one.
        #[arg(long, default_value_t = atomdyn::paths::DEFAULT_PATH_BUDGET, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
    },
    /// Check invariance of the cylinder measure or the mixing product law.
    Measure {
        #[arg(long, value_enum)]
        check: MeasureCheck,
        #[arg(long)]
        n: u32,
        /// Inclusive range of l, e.g. 3..7.
        #[arg(long, required_if_eq("check", "mixing"))]
        lrange: Option<LRange>,
    },
    /// Partition entropy H(n, l) for l = 0..=lmax.
    Entropy {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        lmax: u32,
    },
    /// Verify the label permutation θ at generation n.
    Theta {
        #[arg(long)]
        n: u32,
        /// Emit the full table instead of the check records.
        #[arg(long)]
        export: bool,
        /// Use the deliberately broken slot rule, to see the checks fail.
        #[arg(long, hide = true)]
        mutant: bool,
    },
    /// Verify the nested box layout and optionally draw it.
    Layout {
        #[arg(long)]
        gen: u32,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Generation whose edges are drawn as arrows.
        #[arg(long)]
        arrows: Option<u32>,
    },
    /// Build a period-p tower and check its measure.
    Tower {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        gen: u32,
    },
    /// Good sequence of tower measures converging to a periodic one.
    Converge {
        #[arg(long)]
        levels: u32,
        #[arg(long)]
        p: u32,
        /// Thresholds reported with the first level below each.
        #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3])]
        eps: Vec<f64>,
    },
    /// Follow a coded point through several steps of the map.
    Orbit {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = RuleName::Zero)]
        rule: RuleName,
        /// Child choices for the stream rule, cycled.
        #[arg(long, value_delimiter = ',', required_if_eq("rule", "stream"))]
        choices: Vec<u64>,
        /// Starting atom as gen:index; the root by default.
        #[arg(long)]
        start: Option<AtomArg>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::VerifyAtoms { .. } => "verify-atoms",
            Self::Paths { .. } => "paths",
            Self::Measure { .. } => "measure",
            Self::Entropy { .. } => "entropy",
            Self::Theta { .. } => "theta",
            Self::Layout { .. } => "layout",
            Self::Tower { .. } => "tower",
            Self::Converge { .. } => "converge",
            Self::Orbit { .. } => "orbit",
        }
    }
}

/// A rectangular result with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Everything one subcommand produced.
#[derive(Debug)]
pub struct Run {
    pub params: Value,
    pub summary: String,
    pub report: VerificationReport,
    pub data: Value,
    pub table: Option<Table>,
    pub svg: Option<String>,
    pub default_format: Format,
}

impl Run {
    fn document(&self, command: &str) -> Value {
        json!({
            "command": command,
            "params": self.params,
            "passed": self.report.passed(),
            "summary": self.summary,
            "records": self.report.records,
            "data": self.data,
        })
    }
}

fn records_table(report: &VerificationReport) -> Table {
    Table {
        header: vec!["name", "params", "expected", "actual", "pass", "elapsed_ms"],
        rows: report
            .records
            .iter()
            .map(|r| {
                vec![
                    r.name.clone(),
                    r.params.to_string(),
                    r.expected.clone(),
                    r.actual.clone(),
                    r.pass.to_string(),
                    format!("{:.3}", r.elapsed_ms),
                ]
            })
            .collect(),
    }
}

fn to_csv(t: &Table) -> Result<String, Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn render(run: &Run, command: &str, format: Format) -> Result<String, String> {
    match format {
        Format::Json => serde_json::to_string_pretty(&run.document(command))
            .map(|s| s + "\n")
            .map_err(|e| e.to_string()),
        Format::Csv => {
            let table = run.table.clone().unwrap_or_else(|| records_table(&run.report));
            to_csv(&table).map_err(|e| e.to_string())
        }
        Format::Svg => run
            .svg
            .clone()
            .ok_or_else(|| format!("{command} has no svg output")),
    }
}

fn exit_for(e: &Error) -> i32 {
    match e {
        Error::Falsified(_) => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
        }
    };
    // Fails only if a pool already exists, in which case that pool is used.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers as usize)
        .build_global();

    let name = cli.command.name();
    let run = match commands::execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("atomdyn {name}: {e}");
            return exit_for(&e);
        }
    };
    let format = cli.format.unwrap_or(run.default_format);
    let text = match render(&run, name, format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("atomdyn {name}: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cli.out_dir {
        Some(dir) => fs::create_dir_all(dir)
            .and_then(|_| {
                let path = dir.join(format!("{name}.{}", format.ext()));
                fs::write(&path, &text).map(|_| eprintln!("wrote {}", path.display()))
            }),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("atomdyn {name}: {e}");
        return EXIT_USAGE;
    }

    let total = run.report.records.len();
    let passed = run.report.records.iter().filter(|r| r.pass).count();
    eprintln!("atomdyn {name}: {} ({passed}/{total} checks passed)", run.summary);
    for r in run.report.records.iter().filter(|r| !r.pass) {
        eprintln!("FAIL {} {} expected={} actual={}", r.name, r.params, r.expected, r.actual);
    }
    if run.report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
