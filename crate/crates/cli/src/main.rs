//! `rbf-restore` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical or
//! unrestorable input.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbf_restore::harness::{max_half_width_from_side, parse_intensity_unit, DEFAULT_AMF_MAX_WINDOW};
use rbf_restore::{
    inject, read_pgm_file, run_benchmark, write_pgm_file, BenchmarkSpec, EpsilonWindow, Error, Method, NoiseParams,
    QualityReport, RestorationConfig, SsimMode,
};

#[derive(Parser, Debug)]
#[command(
    name = "rbf-restore",
    version,
    about = "Salt-and-pepper noise removal by RBF interpolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Corrupt a clean PGM with salt-and-pepper noise.
    Inject(InjectArgs),
    /// Restore a noisy PGM.
    Restore(RestoreArgs),
    /// Compare a test PGM against a reference PGM.
    Metrics(MetricsArgs),
    /// Run a benchmark sweep and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct InjectArgs {
    input: PathBuf,
    output: PathBuf,
    /// Noise density in percent, split evenly between salt and pepper.
    #[arg(long, conflicts_with_all = ["p", "q"], required_unless_present_any = ["p", "q"])]
    density: Option<f64>,
    /// Salt (255) probability.
    #[arg(long)]
    p: Option<f64>,
    /// Pepper (0) probability.
    #[arg(long)]
    q: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct Tunables {
    /// Smoothing distance decay.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Constant c in eps = c * sqrt(n) / w.
    #[arg(long = "epsilon-coeff", default_value_t = 0.8)]
    epsilon_coeff: f64,
    /// How w is measured in the shape parameter: side or area.
    #[arg(long = "epsilon-window", default_value = "area")]
    epsilon_window: String,
    /// Unit of the exponential transform: normalized, raw or a number.
    #[arg(long = "intensity-unit", default_value = "normalized")]
    intensity_unit: String,
    /// Largest window side (odd). For pm/pm-ws 0 means unbounded; for amf it
    /// is the maximum adaptive window.
    #[arg(long = "max-window")]
    max_window: Option<usize>,
}

impl Tunables {
    fn restoration(&self, smoothing: bool) -> Result<RestorationConfig, Error> {
        let epsilon_window: EpsilonWindow = self.epsilon_window.parse()?;
        let cfg = RestorationConfig {
            alpha: self.alpha,
            epsilon_coefficient: self.epsilon_coeff,
            smoothing_enabled: smoothing,
            max_half_width: max_half_width_from_side(self.max_window.unwrap_or(0))?,
            epsilon_window,
            intensity_unit: parse_intensity_unit(&self.intensity_unit)?,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct RestoreArgs {
    input: PathBuf,
    output: PathBuf,
    /// pm, pm-ws, med or amf.
    #[arg(long, default_value = "pm")]
    method: String,
    #[command(flatten)]
    tunables: Tunables,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    reference: PathBuf,
    test: PathBuf,
    /// windowed or global.
    #[arg(long = "ssim-mode", default_value = "windowed")]
    ssim_mode: String,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Spec file of key = value lines; command-line flags override it.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Clean PGM images.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    images: Vec<PathBuf>,
    /// Densities in percent.
    #[arg(long, value_delimiter = ',')]
    densities: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Subset of pm, pm-ws, med, amf.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// CSV destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long = "ssim-mode")]
    ssim_mode: Option<String>,
    #[arg(long = "amf-max-window")]
    amf_max_window: Option<usize>,
    /// Unit of the exponential transform: normalized, raw or a number.
    #[arg(long = "intensity-unit")]
    intensity_unit: Option<String>,
    /// Run tuples one at a time (cleaner runtimes).
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::Io(_) | Error::Pgm { .. } => Failure::Io(err.to_string()),
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::Io(err.to_string())
    }
}

fn run_inject(args: InjectArgs) -> Result<(), Failure> {
    let params = match args.density {
        Some(d) => NoiseParams::symmetric(d, args.seed)?,
        None => NoiseParams::new(args.p.unwrap_or(0.0), args.q.unwrap_or(0.0), args.seed)?,
    };
    let clean = read_pgm_file(&args.input)?;
    let noisy = inject(&clean, &params)?;
    write_pgm_file(&args.output, &noisy)?;
    Ok(())
}

fn run_restore(args: RestoreArgs) -> Result<(), Failure> {
    let method: Method = args.method.parse()?;
    let cfg = args.tunables.restoration(method == Method::Pm)?;
    let amf_window = match method {
        Method::Amf => args.tunables.max_window.unwrap_or(DEFAULT_AMF_MAX_WINDOW),
        _ => DEFAULT_AMF_MAX_WINDOW,
    };
    let noisy = read_pgm_file(&args.input)?;
    let restored = method.apply(&noisy, &cfg, amf_window)?;
    write_pgm_file(&args.output, &restored)?;
    Ok(())
}

fn run_metrics(args: MetricsArgs) -> Result<(), Failure> {
    let mode: SsimMode = args.ssim_mode.parse()?;
    let reference = read_pgm_file(&args.reference)?;
    let test = read_pgm_file(&args.test)?;
    let report = QualityReport::compute(&reference, &test, mode)?;
    println!("mse={:.6}", report.mse);
    if report.psnr.is_infinite() {
        println!("psnr_db=inf");
    } else {
        println!("psnr_db={:.4}", report.psnr);
    }
    println!("ssim={:.6}", report.ssim);
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    let mut spec = match &args.spec {
        Some(path) => BenchmarkSpec::from_file_unvalidated(path)?,
        None => BenchmarkSpec::default(),
    };
    if !args.images.is_empty() {
        spec.images = args.images.clone();
    }
    if let Some(d) = args.densities {
        spec.densities = d;
    }
    if let Some(s) = args.seeds {
        spec.seeds = s;
    }
    if let Some(m) = args.methods {
        spec.methods = m.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    }
    if let Some(o) = args.output {
        spec.output = Some(o);
    }
    if let Some(mode) = args.ssim_mode {
        spec.ssim_mode = mode.parse()?;
    }
    if let Some(w) = args.amf_max_window {
        spec.amf_max_window = w;
    }
    if let Some(u) = args.intensity_unit {
        spec.restoration.intensity_unit = parse_intensity_unit(&u)?;
    }
    if args.sequential {
        spec.parallel = false;
    }
    spec.validate()?;

    let report = run_benchmark(&spec)?;
    let csv = report.to_csv();
    match &spec.output {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Inject(a) => run_inject(a),
        Command::Restore(a) => run_restore(a),
        Command::Metrics(a) => run_metrics(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
