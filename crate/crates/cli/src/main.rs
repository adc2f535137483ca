mod config;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use cscb_core::experiments::{
    convergence_csv, decode_dictionary, encode_dictionary, generate_substitute_dictionary, prepare_deconv_input,
    run_deconv, run_synthetic, standin_image, DeconvSpec, SyntheticSpec, SYNTHETIC_LAMBDA, SYNTHETIC_RHO,
};
use cscb_core::io::{decode_pgm, encode_array, encode_pgm, fmt_f64, BitDepth, CsvTable};
use cscb_core::solver::{default_rho, DEFAULT_LAMBDA};
use cscb_core::{make_init_y1, CscError, InitStrategy, SignalGrid, SolverConfig};

use config::ConfigFile;
use output::{write_atomic, RunManifest};

/// Error reported on stderr as a single `error[kind]: message` line.
#[derive(Debug)]
pub struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    fn new(kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new("io", message)
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("config", message)
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self::new("invalid", message)
    }

    /// Prefixes the message with the file or value it concerns.
    fn context(self, what: impl fmt::Display) -> Self {
        Self {
            kind: self.kind,
            message: format!("{what}: {}", self.message),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line = self.message.replace(['\n', '\r'], " ");
        write!(f, "error[{}]: {}", self.kind, one_line)
    }
}

impl From<CscError> for CliError {
    fn from(e: CscError) -> Self {
        let kind = match e {
            CscError::InvalidArgument(_) => "invalid",
            CscError::Parse { .. } => "parse",
            CscError::Io(_) => "io",
        };
        Self::new(kind, e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "cscb", version, about = "Convolutional sparse coding with boundary handling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthetic boundary diagnostic on a 160x160 padded test image.
    Synthetic(SyntheticArgs),
    /// Gaussian-blur deconvolution with a blurred dictionary.
    Deconv(DeconvArgs),
    /// Write the generated multiscale dictionary to a file.
    GenDict(GenDictArgs),
}

#[derive(Args)]
struct SyntheticArgs {
    /// Initialization of the y1 split variable: zero, zeropad or symext.
    #[arg(long)]
    init: Option<InitStrategy>,
    /// Iterations [default: 100 for symext, 500 otherwise].
    #[arg(long)]
    iters: Option<usize>,
    /// Sparsity weight [default: 0.003].
    #[arg(long)]
    lambda: Option<f64>,
    /// Penalty parameter [default: 5].
    #[arg(long)]
    rho: Option<f64>,
    /// Output directory [default: $CSCB_OUT_DIR/synthetic-<init>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file with defaults for the options above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct DeconvArgs {
    /// Binary PGM reference image [default: built-in 512x512 stand-in].
    #[arg(long)]
    image: Option<PathBuf>,
    /// Dictionary file in CSCB1 form, one top-left anchored filter per plane.
    #[arg(long, conflicts_with = "gen_dict")]
    dict: Option<PathBuf>,
    /// Use the generated multiscale dictionary (the default without --dict).
    #[arg(long)]
    gen_dict: bool,
    /// Comma-separated initializations [default: zeropad,symext].
    #[arg(long)]
    init: Option<String>,
    /// Iterations per initialization [default: 500].
    #[arg(long)]
    iters: Option<usize>,
    /// Noise seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Side of a centred square crop of the reference image.
    #[arg(long)]
    crop: Option<usize>,
    /// Sparsity weight [default: 0.01].
    #[arg(long)]
    lambda: Option<f64>,
    /// Penalty parameter [default: 10 lambda + 0.1].
    #[arg(long)]
    rho: Option<f64>,
    /// Side of the Gaussian blur kernel; 1 gives an impulse [default: 7].
    #[arg(long)]
    blur_size: Option<usize>,
    /// Standard deviation of the blur kernel [default: 1].
    #[arg(long)]
    blur_sigma: Option<f64>,
    /// Standard deviation of the additive Gaussian noise [default: 0.01].
    #[arg(long)]
    noise_sigma: Option<f64>,
    /// Output directory [default: $CSCB_OUT_DIR/deconv].
    #[arg(long)]
    out: Option<PathBuf>,
    /// key = value file with defaults for the options above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct GenDictArgs {
    /// Destination file.
    #[arg(long)]
    out: PathBuf,
}

const SYNTHETIC_KEYS: &[&str] = &["init", "iters", "lambda", "rho", "out"];
const DECONV_KEYS: &[&str] = &[
    "image",
    "dict",
    "init",
    "iters",
    "seed",
    "crop",
    "lambda",
    "rho",
    "blur_size",
    "blur_sigma",
    "noise_sigma",
    "out",
];

fn out_root() -> PathBuf {
    std::env::var_os("CSCB_OUT_DIR").map_or_else(|| PathBuf::from("cscb-out"), PathBuf::from)
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))
}

fn pgm16(g: &SignalGrid) -> Vec<u8> {
    encode_pgm(g, BitDepth::Sixteen)
}

fn cmd_synthetic(args: SyntheticArgs) -> Result<(), CliError> {
    let file = ConfigFile::load(args.config.as_deref(), SYNTHETIC_KEYS)?;
    let init = file.resolve(args.init, "init", InitStrategy::ZeroPad)?;
    let default_iters = if init == InitStrategy::SymmetricExtend { 100 } else { 500 };
    let iters = file.resolve(args.iters, "iters", default_iters)?;
    let lambda = file.resolve(args.lambda, "lambda", SYNTHETIC_LAMBDA)?;
    let rho = file.resolve(args.rho, "rho", SYNTHETIC_RHO)?;
    let out = file.resolve(args.out, "out", out_root().join(format!("synthetic-{init}")))?;

    let mut manifest = RunManifest::new("synthetic", &out)?;
    if let Some(p) = &args.config {
        manifest.input(p, &read_input(p)?);
    }
    manifest.config("init", init.name());
    manifest.config("iters", iters);
    manifest.config("lambda", lambda);
    manifest.config("rho", rho);

    let cfg = SolverConfig {
        lambda,
        rho,
        max_iter: iters,
        init_strategy: init,
        probes: None,
    };
    let run = manifest.phase("solve", || run_synthetic(&SyntheticSpec::default(), init, &cfg))?;

    let start = Instant::now();
    let c = &run.components;
    manifest.write("cross_section.csv", run.cross_section.to_csv().as_str().as_bytes())?;
    manifest.write("convergence.csv", convergence_csv(&run.records).as_str().as_bytes())?;
    manifest.write("probes.csv", run.probes_csv().as_str().as_bytes())?;
    let planes = [run.problem.padded.clone(), c.reconstruction.clone(), c.smooth.clone(), c.edge.clone()];
    manifest.write("components.cscb", &encode_array(&planes)?)?;
    manifest.write("reference.pgm", &pgm16(&run.problem.padded))?;
    manifest.write("reconstruction.pgm", &pgm16(&c.reconstruction))?;
    manifest.write("smooth.pgm", &pgm16(&c.smooth))?;
    manifest.write("edge.pgm", &pgm16(&c.edge))?;
    manifest.record_phase("write", start);
    manifest.finish()
}

fn parse_inits(text: &str) -> Result<Vec<InitStrategy>, CliError> {
    let mut inits = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let s: InitStrategy = part.parse().map_err(|e: CscError| CliError::from(e).context("--init"))?;
        if inits.contains(&s) {
            return Err(CliError::invalid(format!("--init lists '{s}' twice")));
        }
        inits.push(s);
    }
    if inits.is_empty() {
        return Err(CliError::invalid("--init needs at least one initialization"));
    }
    Ok(inits)
}

fn psnr_label(s: InitStrategy) -> &'static str {
    match s {
        InitStrategy::Zero => "csc-zero",
        InitStrategy::ZeroPad => "csc-zp",
        InitStrategy::SymmetricExtend => "csc-se",
    }
}

fn centre_crop(img: &SignalGrid, size: usize) -> Result<SignalGrid, CliError> {
    if size == 0 || size > img.rows() || size > img.cols() {
        return Err(CliError::invalid(format!(
            "--crop {size} does not fit the {}x{} image",
            img.rows(),
            img.cols()
        )));
    }
    Ok(img.crop((img.rows() - size) / 2, (img.cols() - size) / 2, size, size)?)
}

fn cmd_deconv(args: DeconvArgs) -> Result<(), CliError> {
    let file = ConfigFile::load(args.config.as_deref(), DECONV_KEYS)?;
    let image: Option<PathBuf> = file.resolve_opt(args.image, "image")?;
    let dict_path: Option<PathBuf> = if args.gen_dict { None } else { file.resolve_opt(args.dict, "dict")? };
    let inits = parse_inits(&file.resolve(args.init, "init", "zeropad,symext".to_string())?)?;
    let iters = file.resolve(args.iters, "iters", 500usize)?;
    let seed = file.resolve(args.seed, "seed", 0u64)?;
    let crop: Option<usize> = file.resolve_opt(args.crop, "crop")?;
    let lambda = file.resolve(args.lambda, "lambda", DEFAULT_LAMBDA)?;
    let rho = file.resolve(args.rho, "rho", default_rho(lambda))?;
    let defaults = DeconvSpec::default();
    let blur_size = file.resolve(args.blur_size, "blur_size", defaults.blur_size)?;
    let blur_sigma = file.resolve(args.blur_sigma, "blur_sigma", defaults.blur_sigma)?;
    let noise_sigma = file.resolve(args.noise_sigma, "noise_sigma", defaults.noise_sigma)?;
    let out = file.resolve(args.out, "out", out_root().join("deconv"))?;

    let mut manifest = RunManifest::new("deconv", &out)?;
    if let Some(p) = &args.config {
        manifest.input(p, &read_input(p)?);
    }
    let reference = match &image {
        Some(p) => {
            let bytes = read_input(p)?;
            manifest.input(p, &bytes);
            decode_pgm(&bytes).map_err(|e| CliError::from(e).context(p.display()))?
        }
        None => standin_image(512)?,
    };
    let reference = match crop {
        Some(n) => centre_crop(&reference, n)?,
        None => reference,
    };
    let dict = match &dict_path {
        Some(p) => {
            let bytes = read_input(p)?;
            manifest.input(p, &bytes);
            decode_dictionary(&bytes).map_err(|e| CliError::from(e).context(p.display()))?
        }
        None => generate_substitute_dictionary(&DeconvSpec::default())?,
    };

    manifest.config("image", image.as_ref().map_or("stand-in".to_string(), |p| p.display().to_string()));
    manifest.config("dict", dict_path.as_ref().map_or("generated".to_string(), |p| p.display().to_string()));
    manifest.config("init", inits.iter().map(|s| s.name()).collect::<Vec<_>>().join(","));
    manifest.config("iters", iters);
    manifest.config("seed", seed);
    manifest.config("crop", crop);
    manifest.config("lambda", lambda);
    manifest.config("rho", rho);
    manifest.config("blur_size", blur_size);
    manifest.config("blur_sigma", blur_sigma);
    manifest.config("noise_sigma", noise_sigma);

    let spec = DeconvSpec {
        noise_seed: seed,
        blur_size,
        blur_sigma,
        noise_sigma,
        ..defaults
    };
    let input = manifest.phase("prepare", || prepare_deconv_input(&reference, &spec))?;
    // fail before any artifact is written if an initialization cannot be built
    for &init in &inits {
        make_init_y1(init, &input.blurred, input.pad)?;
    }
    manifest.write("blurred.pgm", &pgm16(&input.blurred))?;
    manifest.write("blurred.cscb", &encode_array(std::slice::from_ref(&input.blurred))?)?;

    let mut table = CsvTable::new(&["method", "psnr_db"]);
    table.push_row(["test".to_string(), fmt_f64(input.test_psnr)]);
    for init in inits {
        let cfg = SolverConfig {
            lambda,
            rho,
            max_iter: iters,
            init_strategy: init,
            probes: None,
        };
        let result = manifest.phase(&format!("solve-{init}"), || run_deconv(&input, &dict, &cfg))?;
        manifest.write(&format!("estimate_{init}.pgm"), &pgm16(&result.estimate))?;
        manifest.write(&format!("estimate_{init}.cscb"), &encode_array(std::slice::from_ref(&result.estimate))?)?;
        manifest.write(&format!("convergence_{init}.csv"), convergence_csv(&result.records).as_str().as_bytes())?;
        table.push_row([psnr_label(init).to_string(), fmt_f64(result.psnr)]);
    }
    manifest.write("psnr.csv", table.as_str().as_bytes())?;
    manifest.finish()
}

fn cmd_gen_dict(args: GenDictArgs) -> Result<(), CliError> {
    let dict = generate_substitute_dictionary(&DeconvSpec::default())?;
    write_atomic(&args.out, &encode_dictionary(&dict)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid usage");
            eprintln!("{}", CliError::new("usage", first.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Synthetic(a) => cmd_synthetic(a),
        Command::Deconv(a) => cmd_deconv(a),
        Command::GenDict(a) => cmd_gen_dict(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::FAILURE
        }
    }
}
