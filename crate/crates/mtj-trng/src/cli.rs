// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mtj_trng_core::markov::{lag1_autocorrelation, predicted_entropy, steady_state};
use mtj_trng_core::system::BenchSetup;
use mtj_trng_core::{generate_bitstream, EntropyReport, FlipProbs, Variant};
use serde::Serialize;
use serde_json::json;

use crate::bitfile::{read_bits, write_bits, Format};
use crate::config::{RunConfig, CONFIG_ENV};
use crate::error::{io_err, Error, Result};
use crate::nist::{run_nist_suite, text_report};
use crate::sweep::{run_sweep, write_csv, Axis};

/// Exit status for usage errors: bad flags, malformed config, missing inputs.
pub const EXIT_USAGE: i32 = 1;
/// Exit status for failures while running a valid command.
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mtj-trng",
    version,
    about = "STT-MTJ true random number generator model"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Worker threads for sweeps, benchmarks and the NIST battery.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a bitstream file and its metadata.
    Generate(GenerateArgs),
    /// Run the entropy estimators and the NIST battery on a bitstream file.
    Test(TestArgs),
    /// Closed-form Markov predictions for a grid of switching probabilities.
    Analyze(AnalyzeArgs),
    /// Voltage, temperature or process-variation sweep to CSV.
    Sweep(SweepArgs),
    /// Option-pricing benchmark across RNG backends.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub variant: Option<Variant>,
    #[arg(long)]
    pub bits: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to the output extension (.txt is ASCII, otherwise packed).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Metadata JSON path; defaults to `<out>.json`.
    #[arg(long)]
    pub meta: Option<PathBuf>,
    #[arg(long)]
    pub temperature_k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub voltage_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Use only the first N bits (packed files carry padding to a byte).
    #[arg(long)]
    pub bits: Option<usize>,
    #[arg(long)]
    pub groups: Option<usize>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// P→AP switching probabilities.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p1: Vec<f64>,
    /// AP→P switching probabilities.
    #[arg(long, value_delimiter = ',', required = true)]
    pub p2: Vec<f64>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Option<Axis>,
    #[arg(long, value_delimiter = ',')]
    pub variants: Vec<Variant>,
    #[arg(long)]
    pub bits_per_point: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Path counts, e.g. 100,1000,10000.
    #[arg(long, value_delimiter = ',')]
    pub paths: Vec<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path; `.json` writes JSON, anything else CSV. Stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        use mtj_trng_core::Error as M;
        match self {
            Error::Config { .. } | Error::BadBitstream { .. } | Error::Invalid(_) => EXIT_USAGE,
            Error::Io { source, .. } if source.kind() == io::ErrorKind::NotFound => EXIT_USAGE,
            Error::Model(M::InvalidParameter { .. } | M::InvalidRange) => EXIT_USAGE,
            Error::Nist(crate::nist::NistError::UnevenGroups { .. }) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

/// Parse `argv` and run. Returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::Invalid("--jobs must be >= 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Generate(a) => generate(&config, a),
        Command::Test(a) => test(&config, a),
        Command::Analyze(a) => analyze(a),
        Command::Sweep(a) => sweep(&config, a),
        Command::Bench(a) => bench(&config, a),
    })
}

/// Seed from the flag, then the config; otherwise drawn from OS entropy and
/// echoed on stderr so the run can be repeated.
fn resolve_seed(flag: Option<u64>, config: &RunConfig) -> u64 {
    flag.or(config.seed).unwrap_or_else(|| {
        let seed = rand::random();
        eprintln!("seed: {seed}");
        seed
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

fn default_meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn generate(config: &RunConfig, a: GenerateArgs) -> Result<()> {
    let mut gen_cfg = config.generator.clone();
    if let Some(v) = a.variant {
        gen_cfg.variant = v;
    }
    let mut env = config.environment;
    if let Some(t) = a.temperature_k {
        env.temperature_k = t;
    }
    if let Some(v) = a.voltage_rate {
        env.v_variation_rate = v;
    }
    let seed = resolve_seed(a.seed, config);
    let format = a
        .format
        .or(config.format)
        .unwrap_or_else(|| Format::from_path(&a.out));
    let stream = generate_bitstream(&gen_cfg, env, a.bits, seed)?;
    write_bits(&a.out, &stream.bits, format)?;
    let meta = json!({
        "stream": stream,
        "format": format,
        "environment": env,
        "throughput": gen_cfg.throughput_report(),
        "cost": gen_cfg.cost_report(),
        "entropy": EntropyReport::of(&stream.bits),
    });
    let meta_path = a.meta.unwrap_or_else(|| default_meta_path(&a.out));
    let mut w = create(&meta_path)?;
    serde_json::to_writer_pretty(&mut w, &meta)?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(io_err(&meta_path))?;
    println!(
        "{} bits of {} (seed {}) in {} cycles, {:.6e} ns simulated -> {}",
        stream.n_bits,
        stream.variant,
        seed,
        stream.n_cycles,
        stream.simulated_time_ns,
        a.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TestReport<'a> {
    input: &'a Path,
    groups: usize,
    entropy: EntropyReport,
    nist: &'a [crate::nist::TestResult],
}

fn test(config: &RunConfig, a: TestArgs) -> Result<()> {
    let format = a
        .format
        .or(config.format)
        .unwrap_or_else(|| Format::from_path(&a.input));
    let bits = read_bits(&a.input, format, a.bits)?;
    let groups = a.groups.unwrap_or(config.nist_groups);
    let entropy = EntropyReport::of(&bits);
    let results = run_nist_suite(&bits, groups, &config.nist)?;
    println!(
        "{} bits, p_one {:.6}, Shannon {:.6}, min-entropy {:.6}\n",
        entropy.n_bits, entropy.p_one, entropy.shannon, entropy.min_entropy
    );
    print!("{}", text_report(&results));
    if let Some(path) = &a.json {
        let mut w = create(path)?;
        let report = TestReport {
            input: &a.input,
            groups,
            entropy,
            nist: &results,
        };
        serde_json::to_writer_pretty(&mut w, &report)?;
        writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct Analysis {
    p1: f64,
    p2: f64,
    p_out_1: f64,
    lag1: f64,
    shannon: f64,
    min_entropy: f64,
    xor_p_one: f64,
    xor_shannon: f64,
    xor_min_entropy: f64,
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let mut rows = Vec::new();
    for &p1 in &a.p1 {
        for &p2 in &a.p2 {
            let fp = FlipProbs::new(p1, p2)?;
            let single = predicted_entropy(fp, false)?;
            let xor = predicted_entropy(fp, true)?;
            rows.push(Analysis {
                p1,
                p2,
                p_out_1: steady_state(fp)?.p_out_1,
                lag1: lag1_autocorrelation(fp)?,
                shannon: single.shannon,
                min_entropy: single.min_entropy,
                xor_p_one: xor.p_one,
                xor_shannon: xor.shannon,
                xor_min_entropy: xor.min_entropy,
            });
        }
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
        return Ok(());
    }
    println!(
        "{:>6} {:>6} {:>9} {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}",
        "p1", "p2", "p_out_1", "lag1", "shannon", "min_ent", "xor_p1", "xor_sh", "xor_min"
    );
    for r in rows {
        println!(
            "{:>6.3} {:>6.3} {:>9.6} {:>8.4} {:>9.6} {:>9.6} {:>9.6} {:>9.6} {:>9.6}",
            r.p1,
            r.p2,
            r.p_out_1,
            r.lag1,
            r.shannon,
            r.min_entropy,
            r.xor_p_one,
            r.xor_shannon,
            r.xor_min_entropy
        );
    }
    Ok(())
}

fn sweep(config: &RunConfig, a: SweepArgs) -> Result<()> {
    let mut spec = config.sweep.clone();
    spec.generator = config.generator.clone();
    if let Some(axis) = a.axis {
        spec.axis = axis;
    }
    if !a.variants.is_empty() {
        spec.variants = a.variants;
    }
    if let Some(n) = a.bits_per_point {
        spec.bits_per_point = n;
    }
    if let Some(n) = a.samples {
        spec.n_samples = n;
    }
    spec.seed = resolve_seed(a.seed, config);
    let points = run_sweep(&spec)?;
    match &a.out {
        Some(path) => {
            let f = File::create(path).map_err(io_err(path))?;
            write_csv(f, &points)?;
        }
        None => write_csv(io::stdout().lock(), &points)?,
    }
    Ok(())
}

fn bench(config: &RunConfig, a: BenchArgs) -> Result<()> {
    let s = &config.bench;
    let setup = BenchSetup {
        option: s.option,
        costs: s.costs,
        pipeline: s.pipeline,
        backends: [s.trng, s.stdlib, s.boost],
        trng: config.generator.with_variant(Variant::RhsTrng),
    };
    let grid = if a.paths.is_empty() {
        s.paths.clone()
    } else {
        a.paths
    };
    if grid.is_empty() || grid.contains(&0) {
        return Err(Error::Invalid("path counts must be >= 1".into()));
    }
    let seed = resolve_seed(a.seed, config);
    let records = crate::bench::run_bench(&setup, &grid, seed)?;
    let json_out = a
        .out
        .as_ref()
        .is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let write = |w: &mut dyn Write| -> Result<()> {
        if json_out {
            serde_json::to_writer_pretty(&mut *w, &json!({ "seed": seed, "rows": records }))?;
            writeln!(w).map_err(io_err("<json>"))?;
            Ok(())
        } else {
            crate::bench::write_csv(w, &records)
        }
    };
    match &a.out {
        Some(path) => {
            let mut f = create(path)?;
            write(&mut f)?;
            f.flush().map_err(io_err(path))?;
        }
        None => write(&mut io::stdout().lock())?,
    }
    Ok(())
}
