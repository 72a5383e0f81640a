//! Command-line front end for [`crate::pipeline::compute_esd`].

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde_json::ser::{Formatter, Serializer};
use serde_json::{json, Value};

use crate::curve::{load_curve, Curve};
use crate::dp::DpConfig;
use crate::pipeline::{compute_esd, row_major, PipelineConfig, RegistrationResult, Scheme};
use crate::samples::Samples;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum YesNo {
    Yes,
    No,
}

impl From<YesNo> for bool {
    fn from(v: YesNo) -> bool {
        v == YesNo::Yes
    }
}

/// Elastic shape distance and registration of two curves.
#[derive(Debug, Parser)]
#[command(name = "esd", version)]
pub struct CliOptions {
    /// First curve file.
    #[arg(long, value_name = "PATH")]
    pub curve1: PathBuf,
    /// Second curve file.
    #[arg(long, value_name = "PATH")]
    pub curve2: PathBuf,
    /// Override closedness detection for the first curve.
    #[arg(long, value_enum)]
    pub closed1: Option<YesNo>,
    /// Override closedness detection for the second curve.
    #[arg(long, value_enum)]
    pub closed2: Option<YesNo>,
    /// Use the FFT rotation search (both curves must be closed).
    #[arg(long)]
    pub fft: bool,
    /// Also try the second curve traversed backwards.
    #[arg(long)]
    pub both_directions: bool,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub itop: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub layrs: u64,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub lstrp: u64,
    /// Keep every N-th node as a starting point.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,
    /// Reparametrize the first curve, one DP run per starting point.
    #[arg(long)]
    pub procedure1: bool,
    /// Prefix for plot data files.
    #[arg(long, value_name = "PREFIX")]
    pub out: Option<PathBuf>,
    /// Write `<prefix>.curve1.dat`, `<prefix>.curve2.dat`, `<prefix>.gamma.dat`.
    #[arg(long)]
    pub plots: bool,
}

impl CliOptions {
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            itop: self.itop as usize,
            dp: DpConfig {
                layrs: self.layrs as usize,
                lstrp: self.lstrp as usize,
            },
            use_fft: self.fft,
            try_both_directions: self.both_directions,
            stride: self.stride as usize,
            scheme: if self.procedure1 {
                Scheme::Procedure1
            } else {
                Scheme::Procedure2
            },
            ..PipelineConfig::default()
        }
    }
}

/// Writes floats with 17 significant digits so values round-trip exactly.
struct RoundTripFloats;

impl Formatter for RoundTripFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_json_string(v: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, RoundTripFloats);
    serde::Serialize::serialize(v, &mut ser).expect("serializing a json value cannot fail");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn result_document(r: &RegistrationResult, wall_time_ms: f64) -> Value {
    json!({
        "distance": r.distance,
        "energy": r.energy,
        "t0": r.t0,
        "rotation": row_major(r.rotation.matrix()),
        "gamma": r.gamma.gamma(),
        "direction_reversed": r.direction_reversed,
        "curves_swapped": r.curves_swapped,
        "iterations": r.iterations,
        "wall_time_ms": wall_time_ms,
    })
}

fn load(path: &Path, closed: Option<YesNo>) -> Result<Curve, String> {
    let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
    load_curve(file, closed.map(bool::from)).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_rows<'a>(path: &Path, rows: impl Iterator<Item = Vec<f64>> + 'a) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn samples_rows(s: &Samples) -> impl Iterator<Item = Vec<f64>> + '_ {
    s.iter().map(<[f64]>::to_vec)
}

pub fn write_plot_files(prefix: &Path, r: &RegistrationResult) -> io::Result<()> {
    write_rows(&with_suffix(prefix, ".curve1.dat"), samples_rows(&r.registered_curve1))?;
    write_rows(&with_suffix(prefix, ".curve2.dat"), samples_rows(&r.registered_curve2))?;
    let gamma = r
        .partition
        .iter()
        .zip(r.gamma.gamma())
        .map(|(t, g)| vec![*t, *g]);
    write_rows(&with_suffix(prefix, ".gamma.dat"), gamma)
}

/// Runs the tool on `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let opts = match CliOptions::try_parse_from(args) {
        Ok(o) => o,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let started = Instant::now();
    let curves = load(&opts.curve1, opts.closed1).and_then(|a| Ok((a, load(&opts.curve2, opts.closed2)?)));
    let (c1, c2) = match curves {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("esd: {msg}");
            return EXIT_INPUT;
        }
    };
    let result = match compute_esd(&c1, &c2, &opts.pipeline_config()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("esd: {e}");
            return if e.is_input_error() { EXIT_INPUT } else { EXIT_NUMERIC };
        }
    };
    let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
    if opts.plots {
        let prefix = opts.out.clone().unwrap_or_else(|| PathBuf::from("esd"));
        if let Err(e) = write_plot_files(&prefix, &result) {
            eprintln!("esd: {}: {e}", prefix.display());
            return EXIT_INPUT;
        }
    }
    println!("{}", to_json_string(&result_document(&result, wall_time_ms)));
    EXIT_OK
}
