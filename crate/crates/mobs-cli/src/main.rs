//! `mobs` — key exchange over matrices of bit strings, plus the
//! experiments around it: parameter/key generation, shared-key
//! derivation, exhaustive power-dynamics searches, the telescoping
//! attack, and zero-bit statistics.
//!
//! Exit codes: 0 success, 1 usage error, 2 bad or incompatible data,
//! 3 internal failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use mobs::codec::{MatrixEnvelope, ParamsEnvelope, SharedKeyEnvelope};
use mobs::stats::{BisectionConfig, ExperimentConfig};
use mobs::{BigUint, BoolMatrix, ParamSpec, ProtocolParams};

#[derive(Parser)]
#[command(name = "mobs", version, about = "Key exchange over matrices of bit strings")]
struct Cli {
    /// Worker threads for parallel subcommands (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a parameter file (public matrix and permutation)
    Params(ParamsArgs),
    /// Generate a private exponent and its public value
    Keygen(KeygenArgs),
    /// Derive the shared key from a private exponent and a peer value
    Derive(DeriveArgs),
    /// Run a complete in-process exchange and verify both sides agree
    Selftest(SelftestArgs),
    /// Exhaustive saturation search and orbit experiments
    Dynamics(DynamicsArgs),
    /// Telescoping attack against a published exchange
    Attack(AttackArgs),
    /// Zero-bit statistics of the shared key
    Stats(StatsArgs),
    /// Time one full exchange at the default parameters
    Bench(BenchArgs),
}

#[derive(Args, Clone, Copy)]
struct SizeArgs {
    /// Matrix dimension
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Entry bit length (and permutation degree)
    #[arg(long, default_value_t = 381)]
    k: usize,
    /// Probability of a 1 bit in the public matrix
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Bit length of private exponents
    #[arg(long = "exponent-bits", default_value_t = 500)]
    exponent_bits: usize,
}

impl SizeArgs {
    fn spec(&self) -> ParamSpec {
        ParamSpec {
            n: self.n,
            k: self.k,
            p: self.p,
            exponent_bits: self.exponent_bits,
        }
    }
}

#[derive(Args)]
struct ParamsArgs {
    #[command(flatten)]
    size: SizeArgs,
    /// Seed for reproducible generation (default: OS entropy)
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (default: params.json in the output directory)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KeygenArgs {
    /// Parameter file
    #[arg(long)]
    params: PathBuf,
    /// Seed for reproducible keys (default: OS entropy)
    #[arg(long)]
    seed: Option<u64>,
    /// Public value output (default: public.json)
    #[arg(long)]
    public_out: Option<PathBuf>,
    /// Private exponent output (default: private.exp, mode 0600)
    #[arg(long)]
    private_out: Option<PathBuf>,
}

#[derive(Args)]
struct DeriveArgs {
    /// Parameter file
    #[arg(long)]
    params: PathBuf,
    /// Own private exponent file
    #[arg(long)]
    private: PathBuf,
    /// Peer public value file
    #[arg(long)]
    peer_public: PathBuf,
    /// Shared key output (default: shared.json)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long)]
    seed: Option<u64>,
    /// Also demo the matrix-power-only warm-up exchange. It is insecure
    /// (powers of a matrix stabilize almost immediately); for study only.
    #[arg(long)]
    warmup_insecure: bool,
}

#[derive(Args)]
struct DynamicsArgs {
    /// Dimension of the single-bit matrices, 2..=5
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Witness CSV output (default: stdout)
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Sample random matrices and histogram their distinct-power counts
    /// instead of searching exhaustively
    #[arg(long)]
    histogram: bool,
    /// Samples for --histogram
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Bit probability for --histogram
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AttackArgs {
    /// Parameter file
    #[arg(long)]
    params: PathBuf,
    /// Public value file to attack
    #[arg(long)]
    public: PathBuf,
    /// Per-slice CSV output (default: stdout)
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also scan permutations for candidates of the form sigma(M);
    /// feasible only at toy degrees
    #[arg(long)]
    conjugate_filter: bool,
    /// Permutations examined before the scan gives up
    #[arg(long, default_value_t = 10_000)]
    budget: u64,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    size: SizeArgs,
    /// Exchanges per measured point
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sweep grid as lo:hi:count
    #[arg(long, default_value = "0.50:0.60:11", conflicts_with = "points")]
    grid: String,
    /// Explicit comma-separated probabilities instead of a grid
    #[arg(long)]
    points: Option<String>,
    /// Bisect for the probability that balances the key bits, instead of
    /// sweeping
    #[arg(long)]
    find_balanced: bool,
    /// Sweep CSV output (default: stdout)
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    if let Some(jobs) = cli.jobs {
        if let Err(err) = mobs::configure_workers(jobs) {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

/// 2 for anything wrong with inputs or files, 3 otherwise.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<mobs::Error>().is_some()
            || cause.downcast_ref::<std::io::Error>().is_some()
        {
            return 2;
        }
    }
    3
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Params(args) => cmd_params(args),
        Command::Keygen(args) => cmd_keygen(args),
        Command::Derive(args) => cmd_derive(args),
        Command::Selftest(args) => cmd_selftest(args),
        Command::Dynamics(args) => cmd_dynamics(args),
        Command::Attack(args) => cmd_attack(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

/// Default output location: MOBS_OUT_DIR when set, else the working
/// directory.
fn out_path(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        std::env::var_os("MOBS_OUT_DIR")
            .map(PathBuf::from)
            .unwrap_or_default()
            .join(default_name)
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_params(path: &Path) -> Result<ProtocolParams> {
    Ok(ParamsEnvelope::from_json(&read_text(path)?)?.to_params()?)
}

fn load_matrix(path: &Path) -> Result<BoolMatrix> {
    Ok(MatrixEnvelope::from_json(&read_text(path)?)?.to_matrix()?)
}

/// CSV either to a file or to stdout.
fn emit_csv(out: Option<PathBuf>, default_name: &str, csv: &str, to_stdout: bool) -> Result<()> {
    if to_stdout {
        print!("{csv}");
        Ok(())
    } else {
        let path = out_path(out, default_name);
        write_text(&path, csv)?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }
}

fn cmd_params(args: ParamsArgs) -> Result<()> {
    let mut rng = mobs::rng_from_seed(args.seed);
    let params = ProtocolParams::generate(args.size.spec(), &mut rng)?;
    let path = out_path(args.out, "params.json");
    write_text(&path, &ParamsEnvelope::from_params(&params).to_json())?;
    println!(
        "wrote {} (n={}, k={}, matrix bits={}, permutation order={})",
        path.display(),
        params.spec.n,
        params.spec.k,
        params.matrix().total_bits(),
        params.perm().order()
    );
    Ok(())
}

fn cmd_keygen(args: KeygenArgs) -> Result<()> {
    let params = load_params(&args.params)?;
    let mut rng = mobs::rng_from_seed(args.seed);
    let pair = mobs::keygen(&params, &mut rng)?;

    let private_path = out_path(args.private_out, "private.exp");
    write_private(&private_path, &pair.private_exponent().to_string())?;

    let public_path = out_path(args.public_out, "public.json");
    write_text(
        &public_path,
        &MatrixEnvelope::from_matrix(pair.public_value()).to_json(),
    )?;
    println!(
        "wrote {} and {}",
        public_path.display(),
        private_path.display()
    );
    Ok(())
}

fn write_private(path: &Path, exponent: &str) -> Result<()> {
    let mut options = fs::OpenOptions::new();
    options.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::OpenOptionsExt;
        options.mode(0o600);
    }
    let mut file = options
        .open(path)
        .with_context(|| format!("writing {}", path.display()))?;
    writeln!(file, "{exponent}")?;
    Ok(())
}

fn cmd_derive(args: DeriveArgs) -> Result<()> {
    let params = load_params(&args.params)?;
    let exponent_text = read_text(&args.private)?;
    let exponent = BigUint::parse_bytes(exponent_text.trim().as_bytes(), 10)
        .ok_or_else(|| mobs::Error::Codec {
            offset: 0,
            reason: "private exponent file is not a decimal integer".to_string(),
        })?;
    let peer = load_matrix(&args.peer_public)?;

    let own = mobs::keygen_with_exponent(&params, exponent)?;
    let shared = mobs::derive_shared(&params, &own, &peer)?;

    let envelope = SharedKeyEnvelope {
        matrix: MatrixEnvelope::from_matrix(shared.matrix()),
        sha256: shared.digest_hex(),
    };
    let path = out_path(args.out, "shared.json");
    write_text(&path, &envelope.to_json())?;
    println!("sha256 {}", shared.digest_hex());
    Ok(())
}

fn cmd_selftest(args: SelftestArgs) -> Result<()> {
    let mut rng = mobs::rng_from_seed(args.seed);
    let params = ProtocolParams::generate(args.size.spec(), &mut rng)?;
    let alice = mobs::keygen(&params, &mut rng)?;
    let bob = mobs::keygen(&params, &mut rng)?;
    let ka = mobs::derive_shared(&params, &alice, bob.public_value())?;
    let kb = mobs::derive_shared(&params, &bob, alice.public_value())?;
    let matched = ka == kb;
    println!("K match: {matched}");
    if matched {
        println!("sha256 {}", ka.digest_hex());
    }

    if args.warmup_insecure {
        // matrix-power-only exchange; the pair (M^a, M^b) leaks fast
        // because powers of M stabilize after a handful of steps
        println!("warm-up exchange (INSECURE, for study only):");
        let m = params.matrix();
        let a = alice.private_exponent();
        let b = bob.private_exponent();
        let shared_a = m.pow(b).pow(a);
        let shared_b = m.pow(a).pow(b);
        println!("  warm-up K match: {}", shared_a == shared_b);
    }

    if !matched {
        bail!("shared keys disagree");
    }
    Ok(())
}

fn cmd_dynamics(args: DynamicsArgs) -> Result<()> {
    if args.histogram {
        let hist = mobs::dynamics::distinct_power_histogram(args.n, args.p, args.samples, args.seed)?;
        let mut csv = String::from("distinct_powers,count\n");
        for (distinct, count) in &hist {
            csv.push_str(&format!("{distinct},{count}\n"));
        }
        return emit_csv(args.out.clone(), "histogram.csv", &csv, args.out.is_none());
    }

    let progress_needed = args.n >= 5;
    let last_percent = std::sync::atomic::AtomicU64::new(u64::MAX);
    let progress = |done: u64, total: u64| {
        let percent = done * 100 / total;
        if last_percent.swap(percent, std::sync::atomic::Ordering::Relaxed) != percent {
            eprint!("\rsearching: {percent:3}%");
            let _ = std::io::stderr().flush();
        }
    };
    let result = mobs::dynamics::saturation_search_with_progress(
        args.n,
        progress_needed.then_some(&progress as &(dyn Fn(u64, u64) + Sync)),
    )?;
    if progress_needed {
        eprintln!();
    }
    eprintln!(
        "n={} s_max={} witnesses={}",
        result.n,
        result.s_max,
        result.witness_count()
    );
    emit_csv(
        args.out.clone(),
        "witnesses.csv",
        &result.to_csv(),
        args.out.is_none(),
    )
}

fn cmd_attack(args: AttackArgs) -> Result<()> {
    let params = load_params(&args.params)?;
    let public = load_matrix(&args.public)?;
    let instance = mobs::attack::telescoping_instance(&params, &public)?;
    let solutions = mobs::attack::solve_slicewise(&instance)?;

    let mut csv = String::from("slice,solutions\n");
    for (j, slice) in solutions.per_slice.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", j + 1, slice.len()));
    }
    emit_csv(args.out.clone(), "slices.csv", &csv, args.out.is_none())?;
    println!("total_count {}", solutions.total_count);

    if args.conjugate_filter {
        let report = mobs::attack::conjugate_filter(
            &instance,
            params.matrix(),
            &solutions,
            args.budget,
        )?;
        println!(
            "conjugate filter: examined {} of {}! permutations, complete: {}",
            report.examined,
            params.spec.k,
            report.complete
        );
        for sigma in &report.matches {
            let images: Vec<String> =
                sigma.images().iter().map(|i| (i + 1).to_string()).collect();
            println!("  match sigma -> [{}]", images.join(" "));
        }
        if !report.complete {
            println!("  budget exhausted; results are partial");
        }
    }
    Ok(())
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be lo:hi:count, got {text:?}");
    }
    let lo: f64 = parts[0].parse().context("grid lo")?;
    let hi: f64 = parts[1].parse().context("grid hi")?;
    let count: usize = parts[2].parse().context("grid count")?;
    if count < 2 || hi <= lo {
        bail!("grid needs hi > lo and count >= 2");
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let config = ExperimentConfig {
        n: args.size.n,
        k: args.size.k,
        exponent_bits: args.size.exponent_bits,
        trials: args.trials,
        seed: args.seed,
    };

    if args.find_balanced {
        let balanced = mobs::stats::find_balanced_p(&config, &BisectionConfig::default())?;
        println!("balanced_p {balanced:.4}");
        return Ok(());
    }

    let grid = match &args.points {
        Some(points) => points
            .split(',')
            .map(|p| p.trim().parse::<f64>().context("parsing --points"))
            .collect::<Result<Vec<f64>>>()?,
        None => parse_grid(&args.grid)?,
    };
    let sweep = mobs::stats::sweep_p(&config, &grid)?;
    let mut csv = String::from("p,trials,mean_zero_ratio,std_dev\n");
    for point in &sweep {
        csv.push_str(&format!(
            "{},{},{:.6},{:.6}\n",
            point.p, point.trials, point.mean_zero_ratio, point.std_dev
        ));
    }
    emit_csv(args.out.clone(), "sweep.csv", &csv, args.out.is_none())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut rng = mobs::rng_from_seed(args.seed);
    let spec = args.size.spec();

    let t0 = Instant::now();
    let params = ProtocolParams::generate(spec, &mut rng)?;
    let t_params = t0.elapsed();

    let t1 = Instant::now();
    let alice = mobs::keygen(&params, &mut rng)?;
    let t_keygen_a = t1.elapsed();

    let t2 = Instant::now();
    let bob = mobs::keygen(&params, &mut rng)?;
    let t_keygen_b = t2.elapsed();

    let t3 = Instant::now();
    let ka = mobs::derive_shared(&params, &alice, bob.public_value())?;
    let t_derive_a = t3.elapsed();

    let t4 = Instant::now();
    let kb = mobs::derive_shared(&params, &bob, alice.public_value())?;
    let t_derive_b = t4.elapsed();

    if ka != kb {
        bail!("shared keys disagree");
    }
    let exchange = t_keygen_a + t_keygen_b + t_derive_a + t_derive_b;
    println!("parameter generation: {t_params:?}");
    println!("keygen (alice):       {t_keygen_a:?}");
    println!("keygen (bob):         {t_keygen_b:?}");
    println!("derive (alice):       {t_derive_a:?}");
    println!("derive (bob):         {t_derive_b:?}");
    println!("full exchange:        {exchange:?}");
    Ok(())
}
