use serde::Serialize;
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyAlgebra,
    VerifyIntertwine,
    GaussianForward,
    DualExample,
    ConvolutionCheck,
    KernelFtCheck,
    SteinCheck,
    Invert,
    InvertEven,
    ReconstructCurrent,
    DecayCheck,
    StabilizerAverage,
}

impl Command {
    pub const ALL: [Command; 12] = [
        Command::VerifyAlgebra,
        Command::VerifyIntertwine,
        Command::GaussianForward,
        Command::DualExample,
        Command::ConvolutionCheck,
        Command::KernelFtCheck,
        Command::SteinCheck,
        Command::Invert,
        Command::InvertEven,
        Command::ReconstructCurrent,
        Command::DecayCheck,
        Command::StabilizerAverage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify-algebra",
            Command::VerifyIntertwine => "verify-intertwine",
            Command::GaussianForward => "gaussian-forward",
            Command::DualExample => "dual-example",
            Command::ConvolutionCheck => "convolution-check",
            Command::KernelFtCheck => "kernel-ft-check",
            Command::SteinCheck => "stein-check",
            Command::Invert => "invert",
            Command::InvertEven => "invert-even",
            Command::ReconstructCurrent => "reconstruct-current",
            Command::DecayCheck => "decay-check",
            Command::StabilizerAverage => "stabilizer-average",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// JSON-lines dump of transform samples (`gaussian-forward` only).
    pub dump: Option<PathBuf>,
}

/// Everything one run depends on. Two runs with equal configs produce equal
/// reports apart from `wall_time_s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub lambda: f64,
    pub grid: GridConfig,
    /// Sphere-rule exactness degree, or the Gauss–Legendre count where no
    /// sphere rule is involved.
    pub order: usize,
    /// Random trials, points, Monte Carlo samples or polygon edges.
    pub samples: usize,
    /// Haar planes used when no deterministic rule exists for `(n, k)`.
    pub planes: usize,
    pub seed: u64,
    pub tol: f64,
    /// Domain extension factor for inversion.
    pub pad: usize,
    /// Decay exponent for `decay-check`.
    pub s: f64,
    /// Chain file for `reconstruct-current`; the unit circle when absent.
    pub current: Option<PathBuf>,
    pub outputs: Outputs,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl ExperimentConfig {
    /// The configuration each acceptance tolerance is stated for.
    pub fn defaults(command: Command) -> Self {
        let mut c = Self {
            command,
            n: 3,
            k: 2,
            p: 1,
            lambda: 1.0,
            grid: GridConfig { half_width: 8.0, points: 64 },
            order: 40,
            samples: 20,
            planes: 20000,
            seed: 1,
            tol: 1e-6,
            pad: 1,
            s: 3.0,
            current: None,
            outputs: Outputs::default(),
        };
        match command {
            Command::VerifyAlgebra => {
                c.n = 5;
                c.samples = 100;
                c.tol = 1e-12;
            }
            Command::VerifyIntertwine => {}
            Command::GaussianForward => c.samples = 50,
            Command::DualExample => {
                c.order = 60;
                c.tol = 1e-3;
            }
            Command::ConvolutionCheck => c.tol = 1e-2,
            Command::KernelFtCheck => c.tol = 1e-3,
            Command::SteinCheck => c.tol = 1e-4,
            Command::Invert => {
                c.pad = 2;
                c.tol = 0.03;
            }
            Command::InvertEven => {
                c.k = 1;
                c.p = 0;
                c.tol = 1e-3;
                c.pad = 2;
            }
            Command::ReconstructCurrent => {
                c.grid = GridConfig { half_width: 6.0, points: 48 };
                c.order = 24;
                c.samples = 256;
                c.tol = 0.05;
            }
            Command::DecayCheck => {
                c.samples = 8;
                c.tol = 1.0;
            }
            Command::StabilizerAverage => {
                c.n = 4;
                c.samples = 10000;
                c.tol = 3.0;
            }
        }
        c
    }

    /// Rejects configurations the chosen command cannot run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let (n, k, p) = (self.n, self.k, self.p);
        if n == 0 || n > 8 {
            return bad(format!("n = {n} is outside 1..=8"));
        }
        if !(self.tol > 0.0) {
            return bad("tolerance must be positive");
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be positive");
        }
        if self.grid.points < 4 || self.grid.points % 2 != 0 || !(self.grid.half_width > 0.0) {
            return bad("grid needs an even point count >= 4 and a positive half width");
        }
        if self.samples == 0 || self.order == 0 || self.pad == 0 || self.planes == 0 {
            return bad("samples, order, pad and planes must be positive");
        }
        let planar = || -> Result<(), ConfigError> {
            if k == 0 || k >= n {
                return bad(format!("need 0 < k < n, got k = {k}, n = {n}"));
            }
            if p > k {
                return bad(format!("need p <= k, got p = {p}, k = {k}"));
            }
            Ok(())
        };
        let only_321 = |what: &str| -> Result<(), ConfigError> {
            if (n, k, p) != (3, 2, 1) {
                return bad(format!("{what} is defined for n = 3, k = 2, p = 1"));
            }
            Ok(())
        };
        match self.command {
            Command::VerifyAlgebra => {}
            Command::VerifyIntertwine => {
                if p > n {
                    return bad(format!("p = {p} exceeds n = {n}"));
                }
            }
            Command::GaussianForward | Command::ConvolutionCheck => planar()?,
            Command::DualExample | Command::KernelFtCheck => only_321(self.command.name())?,
            Command::SteinCheck => {
                if n != 3 {
                    return bad("stein-check uses harmonic polynomials on R^3");
                }
            }
            Command::Invert | Command::InvertEven => {
                planar()?;
                if p == k {
                    return bad("inversion needs p < k");
                }
                if self.command == Command::InvertEven && (n - k) % 2 != 0 {
                    return bad(format!("codimension {} is odd", n - k));
                }
            }
            Command::ReconstructCurrent => {
                if (n, k) != (3, 2) {
                    return bad("reconstruct-current uses the S^2 hyperplane rule, n = 3, k = 2");
                }
                if p >= k {
                    return bad("reconstruction needs p < k");
                }
            }
            Command::DecayCheck => {
                planar()?;
                if self.s < n as f64 {
                    return bad(format!("decay exponent s = {} is below n = {n}", self.s));
                }
                if self.samples < 2 {
                    return bad("decay-check needs at least two radii");
                }
            }
            Command::StabilizerAverage => planar()?,
        }
        Ok(())
    }
}
