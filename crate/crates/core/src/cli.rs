//! Command-line front end: `map`, `verify`, `simulate`.
//!
//! Exit codes: 0 ok, 1 usage, 2 mapping/config error, 3 I/O, 4 verification
//! mismatch.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::emitters::{check_connection_list, load_mapping, write_output_tree, UtilizationReport, CONNECTIONS_FILE};
use crate::error::Error;
use crate::ir::{load_weights, parse_network, NetworkSpec, Tensor, WeightStore};
use crate::mapper::{map_network, CoreSpec};
use crate::simcore::{run_snn, verify, Activation, LifParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAPPING: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "neuromap", version, about = "Map CNN/MLP/SNN layers onto crossbar cores and verify the result")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choose tiles, allocate cores, and write the artifact tree.
    Map(MapArgs),
    /// Re-run inference from a map output directory and compare with the dense oracle.
    Verify(VerifyArgs),
    /// Rate-coded spiking simulation on the mapped cores.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Network manifest (JSON).
    #[arg(long)]
    pub network: PathBuf,
    /// Raw little-endian f32 weight blob.
    #[arg(long)]
    pub weights: PathBuf,
    /// Weight manifest (JSON).
    #[arg(long = "weights-manifest")]
    pub weights_manifest: PathBuf,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Core geometry: axon (word line) and neuron (bit line) capacity.
    #[arg(long, num_args = 2, value_names = ["AXONS", "NEURONS"], required = true)]
    pub core: Vec<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Directory written by `map`.
    #[arg(long)]
    pub out: PathBuf,
    /// Input tensor CSV (row-major, channel-minor).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
    #[arg(long, default_value = "linear", value_parser = ["linear", "relu"])]
    pub activation: String,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, num_args = 2, value_names = ["AXONS", "NEURONS"], required = true)]
    pub core: Vec<usize>,
    /// Input firing rates per pixel, CSV in [0, 1].
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for `spikes.csv`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub timesteps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Membrane time constant (s).
    #[arg(long = "tau-m", default_value_t = 20e-3)]
    pub tau_m: f32,
    /// Integration step (s).
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f32,
    #[arg(long, default_value_t = 1.0)]
    pub resistance: f32,
    #[arg(long = "u-rest", default_value_t = 0.0, allow_negative_numbers = true)]
    pub u_rest: f32,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub threshold: f32,
    #[arg(long = "u-reset", default_value_t = 0.0, allow_negative_numbers = true)]
    pub u_reset: f32,
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, e: impl std::fmt::Display) -> Failure {
    Failure {
        code,
        message: e.to_string(),
    }
}

fn classify(e: Error) -> Failure {
    let code = match e {
        Error::Io { .. } | Error::Artifact { .. } => EXIT_IO,
        _ => EXIT_MAPPING,
    };
    fail(code, e)
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| classify(Error::io(path, e)))
}

fn load_model(args: &ModelArgs) -> Result<(NetworkSpec, WeightStore<f32>), Failure> {
    let spec = parse_network(&read(&args.network)?).map_err(classify)?;
    let blob = read(&args.weights)?;
    let manifest = read(&args.weights_manifest)?;
    let weights = load_weights(&spec, &blob, &manifest).map_err(classify)?;
    Ok((spec, weights))
}

fn core_spec(dims: &[usize]) -> Result<CoreSpec, Failure> {
    CoreSpec::new(dims[0], dims[1]).map_err(|e| fail(EXIT_USAGE, e))
}

fn read_tensor(path: &Path, spec: &NetworkSpec) -> Result<Tensor<f32>, Failure> {
    let text = String::from_utf8(read(path)?).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?;
    Tensor::parse_csv(spec.shape(0), &text).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))
}

pub fn cmd_map(args: &MapArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let core = core_spec(&args.core)?;
    let (spec, weights) = load_model(&args.model)?;
    let result = map_network(&spec, &weights, core).map_err(classify)?;
    write_output_tree(&result, &args.out).map_err(classify)?;

    let report = UtilizationReport::from_mapping(&result);
    let io = |e: std::io::Error| fail(EXIT_IO, e);
    writeln!(stdout, "core {core}").map_err(io)?;
    for l in &report.layers {
        writeln!(stdout, "layer {}: [{},{}] x {} cores ({})", l.layer, l.axons, l.neurons, l.cores, l.notes)
            .map_err(io)?;
    }
    writeln!(stdout, "total cores: {}", report.total_cores).map_err(io)?;
    Ok(())
}

pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (spec, weights) = load_model(&args.model)?;
    let activation: Activation = args.activation.parse().map_err(|e| fail(EXIT_USAGE, e))?;
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(fail(EXIT_USAGE, "tolerance must be ≥ 0"));
    }
    let mapping = load_mapping::<f32>(&spec, &args.out).map_err(|e| fail(EXIT_IO, e))?;
    let links_path = args.out.join(CONNECTIONS_FILE);
    let links = fs::read_to_string(&links_path).map_err(|e| fail(EXIT_IO, format!("{}: {e}", links_path.display())))?;
    let input = read_tensor(&args.input, &spec)?;

    let io = |e: std::io::Error| fail(EXIT_IO, e);
    if let Some(diff) = check_connection_list(&mapping, &links) {
        writeln!(stdout, "FAIL connections.csv disagrees with core dumps: {diff}").map_err(io)?;
        return Err(fail(EXIT_MISMATCH, "connection list mismatch"));
    }
    let report = verify(&mapping, &spec, &weights, &input, activation, args.tolerance).map_err(classify)?;
    writeln!(stdout, "{report}").map_err(io)?;
    for l in &report.layers {
        writeln!(
            stdout,
            "layer {}: maxdev={:.3e} {}",
            l.layer,
            l.max_deviation,
            if l.passed { "ok" } else { "MISMATCH" }
        )
        .map_err(io)?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(fail(EXIT_MISMATCH, report))
    }
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let core = core_spec(&args.core)?;
    let lif = LifParams {
        tau_m: args.tau_m,
        resistance: args.resistance,
        u_rest: args.u_rest,
        u_threshold: args.threshold,
        u_reset: args.u_reset,
        dt: args.dt,
    };
    lif.validate().map_err(classify)?;
    let (spec, weights) = load_model(&args.model)?;
    let rates = read_tensor(&args.input, &spec)?;
    let result = map_network(&spec, &weights, core).map_err(classify)?;
    let counts = run_snn(&result, &lif, &rates, args.timesteps as usize, args.seed).map_err(classify)?;

    fs::create_dir_all(&args.out).map_err(|e| classify(Error::io(&args.out, e)))?;
    let path = args.out.join("spikes.csv");
    fs::write(&path, counts.to_csv()).map_err(|e| classify(Error::io(&path, e)))?;
    writeln!(stdout, "{} output spikes over {} steps -> {}", counts.total(), args.timesteps, path.display())
        .map_err(|e| fail(EXIT_IO, e))?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match &cli.command {
        Command::Map(a) => cmd_map(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
