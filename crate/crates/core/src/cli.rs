//! The `ndkern` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or parse error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::array::{ArrayHandle, ElemType};
use crate::dispatch::{self, chunked_from_dense, Value};
use crate::io::{load_path, save_path};
use crate::random::{Distribution, Generator, SeedSequence};
use crate::ufunc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Results with at most this many elements are printed in full.
pub const FULL_PRINT_LIMIT: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "ndkern", version, about = "Inspect, reduce and generate .ndar arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print element type, shape, strides and element count.
    Info {
        file: PathBuf,
        /// Emit {elem_type, shape, strides, count} as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Sum over the given axes (all axes if none).
    Sum {
        file: PathBuf,
        #[arg(long = "axis")]
        axes: Vec<usize>,
    },
    /// Write an array of random draws.
    Random(RandomArgs),
    /// Compare a dense mean with the chunked backend's mean.
    DispatchDemo {
        #[arg(long, value_parser = parse_shape)]
        shape: ShapeArg,
        #[arg(long)]
        chunks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Timing comparisons.
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DistName {
    Normal,
    Exponential,
    Uniform,
    Integers,
}

#[derive(Debug, Args)]
struct RandomArgs {
    dist: DistName,
    #[arg(long, value_parser = parse_shape)]
    shape: ShapeArg,
    #[arg(long)]
    seed: u64,
    #[arg(long, allow_hyphen_values = true)]
    low: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    high: Option<i64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Bench {
    /// Contiguous reduction kernel vs per-index lookup sum.
    Reduce {
        #[arg(long, default_value_t = 10_000_000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        iters: usize,
    },
}

/// Comma-separated extents, e.g. `100,4`.
#[derive(Debug, Clone)]
struct ShapeArg(Vec<usize>);

fn parse_shape(s: &str) -> Result<ShapeArg, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(ShapeArg(Vec::new()));
    }
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid extent {part:?} in shape {s:?}"))
        })
        .collect::<Result<_, _>>()
        .map(ShapeArg)
}

#[derive(Debug, Serialize)]
pub struct Info {
    pub elem_type: ElemType,
    pub shape: Vec<usize>,
    pub strides: Vec<isize>,
    pub count: usize,
}

impl Info {
    pub fn of(a: &ArrayHandle) -> Info {
        Info {
            elem_type: a.elem_type(),
            shape: a.dims().to_vec(),
            strides: a.strides().steps().to_vec(),
            count: a.element_count(),
        }
    }
}

/// Best-of-`iters` timings for the two summation paths.
#[derive(Debug, Clone, Copy)]
pub struct ReduceBench {
    pub n: usize,
    pub kernel: Duration,
    pub lookup: Duration,
    pub kernel_sum: f64,
    pub lookup_sum: f64,
}

impl ReduceBench {
    pub fn ratio(&self) -> f64 {
        self.lookup.as_secs_f64() / self.kernel.as_secs_f64().max(1e-12)
    }
}

pub fn bench_reduce(n: usize, iters: usize) -> crate::Result<ReduceBench> {
    let a = ArrayHandle::from_f64((0..n).map(|i| (i % 1024) as f64 * 0.5).collect(), [n])?;
    let iters = iters.max(1);
    let mut kernel = Duration::MAX;
    let mut lookup = Duration::MAX;
    let mut kernel_sum = 0.0;
    let mut lookup_sum = 0.0;
    for _ in 0..iters {
        let t = Instant::now();
        kernel_sum = std::hint::black_box(ufunc::sum(&a, None)?).item()?.as_f64();
        kernel = kernel.min(t.elapsed());
        let t = Instant::now();
        lookup_sum = std::hint::black_box(ufunc::sum_by_index_lookup(&a)?);
        lookup = lookup.min(t.elapsed());
    }
    Ok(ReduceBench { n, kernel, lookup, kernel_sum, lookup_sum })
}

/// Dense mean, chunked mean, and their absolute difference.
pub fn dispatch_demo(shape: &[usize], chunks: usize, seed: u64) -> crate::Result<(f64, f64, f64)> {
    if shape.is_empty() {
        return Err(crate::ArrayError::Argument("dispatch-demo needs at least one dimension".into()));
    }
    if chunks == 0 {
        return Err(crate::ArrayError::Argument("chunk count must be positive".into()));
    }
    let mut g = Generator::from_seed_sequence(&SeedSequence::from_seed(seed));
    let a = g.sample_array(Distribution::Uniform, shape.to_vec())?;
    let chunk_len = shape[0].div_ceil(chunks).max(1);
    let chunked = Value::foreign(chunked_from_dense(&a, chunk_len)?);
    let dense = dispatch::mean(&Value::Dense(a), None)?.to_dense()?.item()?.as_f64();
    let via_chunks = dispatch::mean(&chunked, None)?.to_dense()?.item()?.as_f64();
    Ok((dense, via_chunks, (dense - via_chunks).abs()))
}

fn format_values(a: &ArrayHandle) -> String {
    let items: Vec<String> = a.to_scalars().iter().map(ToString::to_string).collect();
    format!("[{}]", items.join(", "))
}

fn summarize(a: &ArrayHandle) -> String {
    let values = a.to_scalars();
    let head: Vec<String> = values[..5].iter().map(ToString::to_string).collect();
    let tail: Vec<String> = values[values.len() - 5..].iter().map(ToString::to_string).collect();
    let f = a.to_f64_vec();
    let min = f.iter().copied().fold(f64::INFINITY, f64::min);
    let max = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!(
        "[{}, ..., {}]\ncount: {}\nmin: {min}\nmax: {max}",
        head.join(", "),
        tail.join(", "),
        values.len()
    )
}

enum Failure {
    Usage(String),
    Data(String),
}

impl<E: std::fmt::Display> From<E> for Failure
where
    E: Into<Box<dyn std::error::Error>>,
{
    fn from(e: E) -> Failure {
        Failure::Data(e.to_string())
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Info { file, json } => {
            let a = load_path(&file)?;
            let info = Info::of(&a);
            if json {
                writeln!(out, "{}", serde_json::to_string(&info)?)?;
            } else {
                writeln!(out, "elem_type: {}", a.elem_type())?;
                writeln!(out, "shape: {}", a.shape())?;
                writeln!(out, "strides: {}", a.strides())?;
                writeln!(out, "count: {}", info.count)?;
            }
        }
        Command::Sum { file, axes } => {
            let a = load_path(&file)?;
            let axes = (!axes.is_empty()).then_some(axes.as_slice());
            let s = ufunc::sum(&a, axes)?;
            writeln!(out, "shape: {}", s.shape())?;
            if s.element_count() <= FULL_PRINT_LIMIT {
                writeln!(out, "{}", format_values(&s))?;
            } else {
                writeln!(out, "{}", summarize(&s))?;
            }
        }
        Command::Random(args) => {
            let dist = match args.dist {
                DistName::Normal => Distribution::Normal,
                DistName::Exponential => Distribution::Exponential,
                DistName::Uniform => Distribution::Uniform,
                DistName::Integers => match (args.low, args.high) {
                    (Some(low), Some(high)) => Distribution::Integers { low, high },
                    _ => return Err(Failure::Usage("random integers needs --low and --high".into())),
                },
            };
            let mut g = Generator::from_seed_sequence(&SeedSequence::from_seed(args.seed));
            let a = g.sample_array(dist, args.shape.0)?;
            save_path(&a, &args.out)?;
            writeln!(out, "wrote {} {} array of shape {} to {}", a.element_count(), a.elem_type(), a.shape(), args.out.display())?;
        }
        Command::DispatchDemo { shape, chunks, seed } => {
            let (dense, chunked, diff) = dispatch_demo(&shape.0, chunks, seed)?;
            writeln!(out, "dense mean:   {dense}")?;
            writeln!(out, "chunked mean: {chunked}")?;
            writeln!(out, "abs diff:     {diff:e}")?;
        }
        Command::Bench(Bench::Reduce { n, iters }) => {
            let b = bench_reduce(n, iters)?;
            let per = |d: Duration| d.as_nanos() as f64 / b.n.max(1) as f64;
            writeln!(out, "n: {}", b.n)?;
            writeln!(out, "kernel: {:?} ({:.3} ns/elem)", b.kernel, per(b.kernel))?;
            writeln!(out, "lookup: {:?} ({:.3} ns/elem)", b.lookup, per(b.lookup))?;
            writeln!(out, "ratio: {:.2}", b.ratio())?;
        }
    }
    Ok(())
}

/// Parses `argv` (program name first) and runs one command.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
    }
}
