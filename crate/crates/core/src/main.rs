use clap::{Args, Parser, Subcommand};
use fhc::channel::complex_gaussian;
use fhc::compression::{
    bussgang_estimate, compress, decompress, optimize_delta, sqnr, CodecError, CompressionConfig, CompressionMethod,
};
use fhc::iq::{samples_from_le_f32, samples_to_le_f32, PrbBlock, Sample, SUBCARRIERS_PER_PRB};
use fhc::sim::{metadata_path, run_sweep, write_metadata, CsvSink, SimConfig, SimError};
use fhc::wire::{fronthaul_load, pack_sections, unpack_sections, WireFormat};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fhc", version, about = "Fronthaul IQ compression and D-MIMO BLER simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BLER sweep described by a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// CSV destination; overrides `output` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// SQNR and Bussgang statistics of a codec on Gaussian PRBs.
    Sqnr {
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long, default_value_t = 10_000)]
        blocks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Mean sample power relative to full scale.
        #[arg(long, default_value_t = -18.0, allow_negative_numbers = true)]
        power_dbfs: f64,
    },
    /// Compress a raw IQ file into back-to-back wire sections.
    Compress {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inverse of `compress`.
    Decompress {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        codec: CodecArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fronthaul payload bits for one slot.
    Load {
        #[arg(long)]
        prb: u64,
        #[arg(long)]
        symbols: u64,
        #[arg(long)]
        antennas: u64,
        #[arg(long)]
        bits: u8,
    },
}

#[derive(Args)]
struct CodecArgs {
    /// bfp, bs, mulaw, uniform or none.
    #[arg(long)]
    method: String,
    #[arg(long)]
    bits: u8,
    /// Block-scaling lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// mu-law curvature.
    #[arg(long)]
    mu: Option<f64>,
    /// Uniform step; optimized for the input power when absent.
    #[arg(long)]
    delta: Option<f64>,
}

impl CodecArgs {
    fn config(&self) -> Result<CompressionConfig, CliError> {
        let method: CompressionMethod = self.method.parse().map_err(config_err)?;
        let mut cfg = CompressionConfig::new(method, self.bits);
        if let Some(l) = self.lambda {
            cfg.lambda = l;
        }
        if let Some(mu) = self.mu {
            cfg.mu = mu;
        }
        cfg.delta = self.delta;
        cfg.validate().map_err(config_err)?;
        Ok(cfg)
    }
}

enum CliError {
    Config(String),
    Runtime(String),
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<CodecError> for CliError {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::InvalidConfig(_) => config_err(e),
            other => runtime_err(other),
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("FHC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!("FHC_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

fn simulate(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> Result<(), CliError> {
    let mut cfg = SimConfig::from_file(&config)?;
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    let out = out
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::Config("no output path: pass --out or set `output`".into()))?;
    let threads = threads_from_env()?;
    let file = std::fs::File::create(&out).map_err(|e| runtime_err(format!("{}: {e}", out.display())))?;
    let mut sink = CsvSink::new(file, &cfg)?;
    let label = cfg.codec_label();
    let n_points = cfg.snr_points.len();
    let mut done = 0;
    let result = run_sweep(&cfg, threads, |p| {
        done += 1;
        let (lo, hi) = p.interval();
        eprintln!(
            "[{done}/{n_points}] {label} {:>7.2} dB  {:>4}/{:<5} bler {:.4} [{lo:.4}, {hi:.4}]",
            p.tx_snr_db,
            p.tb_errors,
            p.tb_total,
            p.bler()
        );
        sink.write_point(p)
    })?;
    write_metadata(&metadata_path(&out), &result.metadata)?;
    Ok(())
}

fn run_sqnr(args: CodecArgs, blocks: usize, seed: u64, power_dbfs: f64) -> Result<(), CliError> {
    if blocks == 0 {
        return Err(CliError::Config("--blocks must be at least 1".into()));
    }
    let mut cfg = args.config()?;
    let power = 10f64.powf(power_dbfs / 10.0);
    if cfg.method == CompressionMethod::Uniform && cfg.delta.is_none() {
        cfg.delta = Some(optimize_delta(cfg.m_bits, power)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut original = Vec::with_capacity(blocks * SUBCARRIERS_PER_PRB);
    let mut rebuilt = Vec::with_capacity(blocks * SUBCARRIERS_PER_PRB);
    for _ in 0..blocks {
        let mut b = PrbBlock::ZERO;
        for s in b.samples.iter_mut() {
            *s = complex_gaussian(&mut rng) * power.sqrt();
        }
        let rec = decompress(&compress(&b, &cfg)?)?;
        original.extend_from_slice(&b.samples);
        rebuilt.extend_from_slice(&rec.samples);
    }
    let stats = bussgang_estimate(&original, &rebuilt)?;
    println!("method        {}", cfg.method);
    println!("m_bits        {}", cfg.m_bits);
    if let Some(d) = cfg.delta.filter(|_| cfg.method == CompressionMethod::Uniform) {
        println!("step          {d:.6e}");
    }
    println!("blocks        {blocks}");
    println!("sqnr_db       {:.4}", sqnr(&original, &rebuilt)?);
    println!("alpha         {:.6}", stats.alpha);
    println!("distortion    {:.6e}", stats.distortion_power);
    println!("cross_corr    {:.3e}", stats.cross_corr);
    Ok(())
}

fn read(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| runtime_err(format!("{}: {e}", path.display())))
}

fn write(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| runtime_err(format!("{}: {e}", path.display())))
}

fn run_compress(input: PathBuf, args: CodecArgs, out: PathBuf) -> Result<(), CliError> {
    let mut cfg = args.config()?;
    let samples = samples_from_le_f32(&read(&input)?).map_err(runtime_err)?;
    if samples.len() % SUBCARRIERS_PER_PRB != 0 {
        return Err(runtime_err(format!(
            "{} samples is not a whole number of {SUBCARRIERS_PER_PRB}-sample PRBs",
            samples.len()
        )));
    }
    if cfg.method == CompressionMethod::Uniform && cfg.delta.is_none() {
        let power = samples.iter().map(Sample::norm_sqr).sum::<f64>() / samples.len().max(1) as f64;
        let delta = optimize_delta(cfg.m_bits, power.max(f64::MIN_POSITIVE))?;
        eprintln!("uniform step {delta:e} (pass --delta {delta:e} to decompress)");
        cfg.delta = Some(delta);
    }
    let blocks = samples
        .chunks_exact(SUBCARRIERS_PER_PRB)
        .map(|c| compress(&PrbBlock::from_slice(c).expect("12 samples"), &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    write(&out, &pack_sections(&blocks).map_err(runtime_err)?)?;
    eprintln!("{} PRBs, {} bytes", blocks.len(), blocks.len() * WireFormat::from_config(&cfg).section_bytes());
    Ok(())
}

fn run_decompress(input: PathBuf, args: CodecArgs, out: PathBuf) -> Result<(), CliError> {
    let cfg = args.config()?;
    if cfg.method == CompressionMethod::Uniform && cfg.delta.is_none() {
        return Err(CliError::Config("uniform sections carry no step; pass --delta".into()));
    }
    let bytes = read(&input)?;
    let blocks = unpack_sections(&bytes, &WireFormat::from_config(&cfg)).map_err(runtime_err)?;
    let mut samples = Vec::with_capacity(blocks.len() * SUBCARRIERS_PER_PRB);
    for cb in &blocks {
        samples.extend_from_slice(&decompress(cb)?.samples);
    }
    write(&out, &samples_to_le_f32(&samples))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, seed } => simulate(config, out, seed),
        Command::Sqnr { codec, blocks, seed, power_dbfs } => run_sqnr(codec, blocks, seed, power_dbfs),
        Command::Compress { input, codec, out } => run_compress(input, codec, out),
        Command::Decompress { input, codec, out } => run_decompress(input, codec, out),
        Command::Load { prb, symbols, antennas, bits } => {
            if !(1..=16).contains(&bits) {
                return Err(CliError::Config(format!("--bits must be in 1..=16, got {bits}")));
            }
            println!("{}", fronthaul_load(prb, symbols, antennas, bits));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
