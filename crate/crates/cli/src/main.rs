use clap::{Args, Parser, Subcommand};
use formxray_cli::config::{Command, ExperimentConfig, GridConfig};
use formxray_cli::run;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "formxray", version, about = "Numerical experiments for the k-plane transform of differential forms")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Exhaustive ∨/∧ adjointness and projection identities.
    VerifyAlgebra(Opts),
    /// Fourier intertwining of d, δ and the half-Laplacians on a grid.
    VerifyIntertwine(Opts),
    /// Forward transform of a Gaussian against its closed form.
    GaussianForward(Opts),
    /// Dual transform of e^{-|ξ|²}v and the I± asymptotics.
    DualExample(Opts),
    /// R*R against the r^{-k}Π convolution.
    ConvolutionCheck(Opts),
    /// Transform of the r^{-k}Π kernel acting on a grid field.
    KernelFtCheck(Opts),
    /// Fourier transforms of homogeneous harmonic functions, paired with a Gaussian.
    SteinCheck(Opts),
    /// Round trip α → R*Rα → α through the inversion multiplier.
    Invert(Opts),
    /// The even-codimension differential inversion formula.
    InvertEven(Opts),
    /// Pairing of a current with a form, rebuilt from projections.
    ReconstructCurrent(Opts),
    /// Seminorm decay of the transform of an algebraically decaying form.
    DecayCheck(Opts),
    /// Monte Carlo average of restrictions over a point stabilizer.
    StabilizerAverage(Opts),
}

/// Flags shared by all subcommands; unset flags take the subcommand's defaults.
#[derive(Args)]
struct Opts {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Grid half width.
    #[arg(long = "L")]
    half_width: Option<f64>,
    /// Grid points per axis.
    #[arg(long = "N")]
    points: Option<usize>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    planes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    pad: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    /// Chain file (JSON) for reconstruct-current.
    #[arg(long)]
    current: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a CSV profile for plotting.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// JSON-lines dump of transform samples.
    #[arg(long)]
    dump: Option<PathBuf>,
}

impl Sub {
    fn split(self) -> (Command, Opts) {
        match self {
            Sub::VerifyAlgebra(o) => (Command::VerifyAlgebra, o),
            Sub::VerifyIntertwine(o) => (Command::VerifyIntertwine, o),
            Sub::GaussianForward(o) => (Command::GaussianForward, o),
            Sub::DualExample(o) => (Command::DualExample, o),
            Sub::ConvolutionCheck(o) => (Command::ConvolutionCheck, o),
            Sub::KernelFtCheck(o) => (Command::KernelFtCheck, o),
            Sub::SteinCheck(o) => (Command::SteinCheck, o),
            Sub::Invert(o) => (Command::Invert, o),
            Sub::InvertEven(o) => (Command::InvertEven, o),
            Sub::ReconstructCurrent(o) => (Command::ReconstructCurrent, o),
            Sub::DecayCheck(o) => (Command::DecayCheck, o),
            Sub::StabilizerAverage(o) => (Command::StabilizerAverage, o),
        }
    }
}

fn configure(command: Command, o: Opts) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(command);
    c.n = o.n.unwrap_or(c.n);
    c.k = o.k.unwrap_or(c.k);
    c.p = o.p.unwrap_or(c.p);
    c.lambda = o.lambda.unwrap_or(c.lambda);
    c.grid = GridConfig {
        half_width: o.half_width.unwrap_or(c.grid.half_width),
        points: o.points.unwrap_or(c.grid.points),
    };
    c.order = o.order.unwrap_or(c.order);
    c.samples = o.samples.unwrap_or(c.samples);
    c.planes = o.planes.unwrap_or(c.planes);
    c.seed = o.seed.unwrap_or(c.seed);
    c.tol = o.tol.unwrap_or(c.tol);
    c.pad = o.pad.unwrap_or(c.pad);
    c.s = o.s.unwrap_or(c.s);
    c.current = o.current;
    c.outputs.report = o.out;
    c.outputs.csv = o.csv;
    c.outputs.dump = o.dump;
    c
}

fn set_threads() -> Result<(), String> {
    let Ok(value) = std::env::var("FORMXRAY_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.parse().map_err(|_| format!("FORMXRAY_THREADS must be a positive integer, got {value:?}"))?;
    if threads == 0 {
        return Err("FORMXRAY_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = set_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (command, opts) = cli.command.split();
    let cfg = configure(command, opts);
    match run(&cfg) {
        Ok(report) => {
            if cfg.outputs.report.is_none() {
                println!("{}", report.to_json());
            }
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {:e} > {:e}", c.name, c.value, c.tolerance);
            }
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
