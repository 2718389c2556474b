//! `hoszp` command-line tool.
//!
//! Raw inputs are headerless little-endian `f32`/`f64` files whose shape is
//! given with `--dims AxBxC`. Compressed inputs are `.hsz` streams. Passing
//! `--dims` to `op` or `stats` marks the inputs as raw; they are then
//! compressed on the fly with `--eps`.

mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hoszp::codec::{compress_with_bound, reconstruct};
use hoszp::distsim::{simulate, Aggregation, SimScenario};
use hoszp::homops::oracle::{reduction_scale, relative_difference};
use hoszp::homops::{homomorphic_apply, moments, oracle_apply, Op, Outcome, Shortcut};
use hoszp::model::{parse_dims, DEFAULT_BLOCK_LEN};
use hoszp::synth::smooth_field;
use hoszp::{compress, decompress, deserialize, serialize, CompressedStream, DType, ErrorBound, QuantParams, RawArray};

use report::{Cell, Format, Row, Table};

/// Relative tolerance for reductions under `--verify`.
const REDUCTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "hoszp", version, about = "Error-bounded lossy compression with arithmetic on compressed data")]
struct Cli {
    /// Worker threads; falls back to HOSZP_THREADS, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a raw field into an .hsz stream.
    Compress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        codec: CodecArgs,
        /// Decompress again and check the error bound.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value_t)]
        report: Format,
    },
    /// Expand an .hsz stream back to a raw field.
    Decompress {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        report: Format,
    },
    /// Apply an operation to compressed operands.
    Op {
        /// neg, sadd, ssub, smul, add, sub, mul, mean, var, std, cov, ssim
        name: String,
        #[command(flatten)]
        operands: Operands,
        /// Where to write the resulting stream.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Also run decompress/operate/recompress and compare.
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value_t)]
        report: Format,
    },
    /// Compute a statistic (mean, var, std, cov, ssim).
    Stats {
        name: String,
        #[command(flatten)]
        operands: Operands,
        #[arg(long)]
        verify: bool,
        #[arg(long, value_enum, default_value_t)]
        report: Format,
    },
    /// Time every operation against its oracle on one field.
    Bench {
        /// Raw field to use instead of a synthetic one (needs --dims).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Second operand for binary operations; defaults to a second synthetic field or to --input.
        #[arg(long)]
        input2: Option<PathBuf>,
        #[command(flatten)]
        codec: CodecArgs,
        /// Comma-separated operation names.
        #[arg(long, value_delimiter = ',', default_values_t = Op::NAMES.iter().map(|s| s.to_string()))]
        ops: Vec<String>,
        /// Scalar for sadd/ssub/smul.
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        scalar: f64,
        /// Timed runs per path; the fastest counts.
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        report: Format,
    },
    /// Simulated gather-and-sum over many nodes.
    Distsim {
        #[arg(long, default_value_t = 16)]
        nodes: usize,
        /// Per-node chunk shape.
        #[arg(long, default_value = "64x64x64")]
        dims: Dims,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_BLOCK_LEN)]
        block_len: usize,
        #[arg(long, default_value = "f32")]
        dtype: DTypeArg,
        #[arg(long, value_enum, default_value_t = AggregationArg::Fused)]
        aggregation: AggregationArg,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        latency_ns_per_byte: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t)]
        report: Format,
    },
}

#[derive(Debug, Args)]
struct CodecArgs {
    #[arg(long)]
    dims: Option<Dims>,
    #[arg(long, default_value = "f32")]
    dtype: DTypeArg,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum, default_value_t = EpsMode::Abs)]
    eps_mode: EpsMode,
    #[arg(long, default_value_t = DEFAULT_BLOCK_LEN)]
    block_len: usize,
}

#[derive(Debug, Args)]
struct Operands {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    input2: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    scalar: Option<f64>,
    #[command(flatten)]
    codec: CodecArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EpsMode {
    Abs,
    Rel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AggregationArg {
    Fused,
    Pairwise,
}

#[derive(Debug, Clone)]
struct Dims(Vec<usize>);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_dims(s).map(Dims).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, Copy)]
struct DTypeArg(DType);

impl FromStr for DTypeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(DTypeArg).map_err(|e: hoszp::Error| e.to_string())
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(PathBuf, std::io::Error),
    Codec(hoszp::Error),
    Mismatch(String),
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "Usage",
            Failure::Io(..) => "Io",
            Failure::Codec(e) => e.kind(),
            Failure::Mismatch(_) => "VerifyMismatch",
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(..) => 3,
            Failure::Codec(_) => 4,
            Failure::Mismatch(_) => 5,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Mismatch(m) => f.write_str(m),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Codec(e) => write!(f, "{e}"),
        }
    }
}

impl From<hoszp::Error> for Failure {
    fn from(e: hoszp::Error) -> Self {
        Failure::Codec(e)
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write(path: &Path, bytes: &[u8]) -> Res<()> {
    std::fs::write(path, bytes).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn timed<T>(f: impl FnOnce() -> hoszp::Result<T>) -> Res<(T, f64)> {
    let t = Instant::now();
    let r = f()?;
    Ok((r, t.elapsed().as_secs_f64()))
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> hoszp::Result<T>) -> Res<(T, f64)> {
    let (mut out, mut best) = timed(&mut f)?;
    for _ in 1..reps {
        let (r, t) = timed(&mut f)?;
        (out, best) = (r, best.min(t));
    }
    Ok((out, best))
}

impl CodecArgs {
    fn read_raw(&self, path: &Path) -> Res<RawArray> {
        let dims = self.dims.as_ref().ok_or_else(|| Failure::Usage("raw input needs --dims".into()))?;
        Ok(RawArray::from_le_bytes(&read(path)?, dims.0.clone(), self.dtype.0)?)
    }

    fn bound(&self) -> Res<ErrorBound> {
        let eps = self.eps.ok_or_else(|| Failure::Usage("compressing needs --eps".into()))?;
        Ok(match self.eps_mode {
            EpsMode::Abs => ErrorBound::Abs(eps),
            EpsMode::Rel => ErrorBound::Rel(eps),
        })
    }
}

impl Operands {
    /// Loads the operands as streams. Raw inputs share the bound resolved
    /// against the first one so that they stay compatible.
    fn load(&self, arity: usize) -> Res<Vec<CompressedStream>> {
        let paths: Vec<&PathBuf> = std::iter::once(&self.input).chain(&self.input2).collect();
        if paths.len() != arity {
            return Err(Failure::Usage(format!("expected {arity} input(s), got {}", paths.len())));
        }
        if self.codec.dims.is_none() {
            return paths.iter().map(|p| Ok(deserialize(&read(p)?)?)).collect();
        }
        let mut bound = self.codec.bound()?;
        let mut out = Vec::new();
        for p in paths {
            let raw = self.codec.read_raw(p)?;
            let s = compress_with_bound(&raw, bound, self.codec.block_len)?;
            bound = ErrorBound::Abs(s.params().eps());
            out.push(s);
        }
        Ok(out)
    }
}

fn value_range(streams: &[&CompressedStream]) -> Res<f64> {
    let mut range = 0f64;
    for s in streams {
        let m = moments(s, Shortcut::On)?;
        let (w, dt) = (s.params().bin_width(), s.params().dtype());
        range = range.max(reconstruct(m.max_bin, w, dt) - reconstruct(m.min_bin, w, dt));
    }
    Ok(range)
}

/// Runs `op` on both paths and checks agreement.
fn verified_row(op: Op, streams: &[&CompressedStream], reps: usize) -> Res<(Row, Outcome)> {
    let (h, t_homo) = best_of(reps, || homomorphic_apply(op, streams))?;
    let (o, t_oracle) = best_of(reps, || oracle_apply(op, streams))?;
    let diff = hoszp::homops::oracle::outcome_difference(&h, &o)?;
    let mut row = base_row(op, streams, &h, t_homo);
    row.t_oracle_s = Some(t_oracle);
    row.max_abs_diff = Some(diff);
    let ok = match (&h, &o) {
        (Outcome::Value(a), Outcome::Value(b)) => {
            relative_difference(*a, *b, reduction_scale(op, value_range(streams)?)) <= REDUCTION_TOLERANCE
        }
        _ => diff == 0.0,
    };
    if !ok {
        row.mismatch = Some(format!("{op}: homomorphic and oracle results differ by {diff}"));
    }
    Ok((row, h))
}

fn base_row(op: Op, streams: &[&CompressedStream], out: &Outcome, t_homo: f64) -> Row {
    let raw_bytes = streams.iter().map(|s| s.params().raw_bytes() as u64).sum();
    let bytes_in = streams.iter().map(|s| s.serialized_len() as u64).sum();
    let cr = match out {
        Outcome::Stream(s) => s.compression_ratio(),
        Outcome::Value(_) => raw_bytes as f64 / bytes_in as f64,
    };
    Row {
        op: op.to_string(),
        bytes_in,
        raw_bytes,
        cr,
        t_homo_s: t_homo,
        t_oracle_s: None,
        max_abs_diff: None,
        extra: vec![out.value().into()],
        mismatch: None,
    }
}

fn apply(op: Op, streams: &[&CompressedStream], verify: bool) -> Res<(Row, Outcome)> {
    if verify {
        return verified_row(op, streams, 1);
    }
    let (h, t) = timed(|| homomorphic_apply(op, streams))?;
    Ok((base_row(op, streams, &h, t), h))
}

fn run_op(name: &str, operands: &Operands, output: Option<&Path>, verify: bool, stats_only: bool) -> Res<Table> {
    let op = Op::parse(name, operands.scalar).map_err(|e| Failure::Usage(e.to_string()))?;
    if stats_only && op.is_compression_as_output() {
        return Err(Failure::Usage(format!("`{name}` is not a statistic; use `op`")));
    }
    let streams = operands.load(op.arity())?;
    let refs: Vec<&CompressedStream> = streams.iter().collect();
    let (row, outcome) = apply(op, &refs, verify)?;
    if let Some(path) = output {
        match &outcome {
            Outcome::Stream(s) => write(path, &serialize(s)?)?,
            Outcome::Value(v) => write(path, format!("{v}\n").as_bytes())?,
        }
    }
    let mut t = Table::new(&["value"]);
    t.rows.push(row);
    Ok(t)
}

fn run_compress(input: &Path, output: Option<&Path>, codec: &CodecArgs, verify: bool) -> Res<Table> {
    let raw = codec.read_raw(input)?;
    let bound = codec.bound()?;
    let (s, t) = timed(|| compress_with_bound(&raw, bound, codec.block_len))?;
    let bytes = serialize(&s)?;
    if let Some(path) = output {
        write(path, &bytes)?;
    }
    let (mut t_check, mut diff, mut mismatch) = (None, None, None);
    if verify {
        let (back, td) = timed(|| decompress(&s))?;
        let d = raw.max_abs_diff(&back);
        let eps = s.params().eps();
        // an f32 reconstruction may land one rounding step past eps
        let slack = match raw.dtype() {
            DType::F32 => raw.values().iter().fold(0f64, |m, v| m.max(v.abs())) * f32::EPSILON as f64,
            DType::F64 => 0.0,
        };
        if d > eps + slack {
            mismatch = Some(format!("max error {d} exceeds eps {eps}"));
        }
        (t_check, diff) = (Some(td), Some(d));
    }
    let mut table = Table::new(&["eps", "t_decompress_s"]);
    table.rows.push(Row {
        op: "compress".into(),
        bytes_in: s.params().raw_bytes() as u64,
        raw_bytes: s.params().raw_bytes() as u64,
        cr: s.compression_ratio(),
        t_homo_s: t,
        t_oracle_s: None,
        max_abs_diff: diff,
        extra: vec![Cell::Num(s.params().eps()), t_check.into()],
        mismatch,
    });
    Ok(table)
}

fn run_decompress(input: &Path, output: Option<&Path>) -> Res<Table> {
    let bytes = read(input)?;
    let s = deserialize(&bytes)?;
    let (raw, t) = timed(|| decompress(&s))?;
    if let Some(path) = output {
        write(path, &raw.to_le_bytes())?;
    }
    let mut table = Table::new(&["eps"]);
    table.rows.push(Row {
        op: "decompress".into(),
        bytes_in: bytes.len() as u64,
        raw_bytes: s.params().raw_bytes() as u64,
        cr: s.compression_ratio(),
        t_homo_s: t,
        t_oracle_s: None,
        max_abs_diff: None,
        extra: vec![Cell::Num(s.params().eps())],
        mismatch: None,
    });
    Ok(table)
}

struct BenchArgs<'a> {
    input: Option<&'a Path>,
    input2: Option<&'a Path>,
    codec: &'a CodecArgs,
    ops: &'a [String],
    scalar: f64,
    reps: usize,
    seed: u64,
}

fn run_bench(b: &BenchArgs) -> Res<Table> {
    let ops: Vec<Op> = b
        .ops
        .iter()
        .map(|n| Op::parse(n.trim(), Some(b.scalar)).map_err(|e| Failure::Usage(e.to_string())))
        .collect::<Res<_>>()?;
    let (ra, rb) = match b.input {
        Some(p) => {
            let a = b.codec.read_raw(p)?;
            let second = b.input2.map(|q| b.codec.read_raw(q)).transpose()?;
            (a.clone(), second.unwrap_or(a))
        }
        None => {
            let dims = b.codec.dims.as_ref().map_or_else(|| vec![128, 128, 128], |d| d.0.clone());
            let dt = b.codec.dtype.0;
            (smooth_field(&dims, dt, b.seed)?, smooth_field(&dims, dt, b.seed + 1)?)
        }
    };
    let eps = b.codec.eps.unwrap_or(1e-2);
    let eps = match b.codec.eps_mode {
        EpsMode::Abs => ErrorBound::Abs(eps),
        EpsMode::Rel => ErrorBound::Rel(eps),
    }
    .resolve(&ra)?;
    let params = QuantParams::new(eps, ra.dims().to_vec(), b.codec.block_len, ra.dtype())?;
    let (sa, t_compress) = timed(|| compress(&ra, &params))?;
    let sb = compress(&rb, &params)?;
    let mut table = Table::new(&["value"]);
    table.rows.push(Row {
        op: "compress".into(),
        bytes_in: params.raw_bytes() as u64,
        raw_bytes: params.raw_bytes() as u64,
        cr: sa.compression_ratio(),
        t_homo_s: t_compress,
        t_oracle_s: None,
        max_abs_diff: None,
        extra: vec![Cell::Empty],
        mismatch: None,
    });
    for op in ops {
        let operands: Vec<&CompressedStream> = [&sa, &sb][..op.arity()].to_vec();
        table.rows.push(verified_row(op, &operands, b.reps)?.0);
    }
    Ok(table)
}

#[allow(clippy::too_many_arguments)]
fn run_distsim(
    nodes: usize,
    dims: &Dims,
    eps: f64,
    block_len: usize,
    dtype: DType,
    aggregation: AggregationArg,
    reps: usize,
    latency: u64,
    seed: u64,
) -> Res<Table> {
    let (aggregation, label) = match aggregation {
        AggregationArg::Fused => (Aggregation::Fused, "fused"),
        AggregationArg::Pairwise => (Aggregation::Pairwise, "pairwise"),
    };
    let scn = SimScenario {
        node_count: nodes,
        dims: dims.0.clone(),
        eps,
        block_len,
        dtype,
        repetitions: reps,
        latency_ns_per_byte: latency,
        aggregation,
        seed,
    };
    let r = simulate(&scn)?;
    let raw_bytes = (nodes * dims.0.iter().product::<usize>() * dtype.size()) as u64;
    let mut table = Table::new(&["node_count", "eps"]);
    table.rows.push(Row {
        op: format!("distsim-{label}"),
        bytes_in: r.bytes_aggregated,
        raw_bytes,
        cr: raw_bytes as f64 / r.bytes_aggregated as f64,
        t_homo_s: r.t_homomorphic,
        t_oracle_s: Some(r.t_traditional),
        max_abs_diff: None,
        extra: vec![Cell::Int(r.node_count as u64), Cell::Num(r.eps)],
        mismatch: (!r.identical).then(|| "homomorphic and traditional aggregates differ".into()),
    });
    Ok(table)
}

fn init_threads(flag: Option<usize>) -> Res<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("HOSZP_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| Failure::Usage(format!("HOSZP_THREADS=`{v}` is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Res<(Table, Format)> {
    init_threads(cli.threads)?;
    Ok(match cli.command {
        Command::Compress { input, output, codec, verify, report } => {
            (run_compress(&input, output.as_deref(), &codec, verify)?, report)
        }
        Command::Decompress { input, output, report } => (run_decompress(&input, output.as_deref())?, report),
        Command::Op { name, operands, output, verify, report } => {
            (run_op(&name, &operands, output.as_deref(), verify, false)?, report)
        }
        Command::Stats { name, operands, verify, report } => (run_op(&name, &operands, None, verify, true)?, report),
        Command::Bench { input, input2, codec, ops, scalar, reps, seed, report } => {
            let b = BenchArgs {
                input: input.as_deref(),
                input2: input2.as_deref(),
                codec: &codec,
                ops: &ops,
                scalar,
                reps: reps.max(1),
                seed,
            };
            (run_bench(&b)?, report)
        }
        Command::Distsim {
            nodes,
            dims,
            eps,
            block_len,
            dtype,
            aggregation,
            reps,
            latency_ns_per_byte,
            seed,
            report,
        } => {
            (run_distsim(nodes, &dims, eps, block_len, dtype.0, aggregation, reps, latency_ns_per_byte, seed)?, report)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((table, format)) => {
            print!("{}", table.render(format));
            let failures: Vec<&String> = table.rows.iter().filter_map(|r| r.mismatch.as_ref()).collect();
            if failures.is_empty() {
                return ExitCode::SUCCESS;
            }
            for m in &failures {
                let e = Failure::Mismatch(m.to_string());
                eprintln!("error[{}]: {e}", e.kind());
            }
            ExitCode::from(5)
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::from(e.code())
        }
    }
}
