//! Run configuration: a TOML document, or a builtin name with optional
//! parameters such as `cosine(0.05, 2)`.

use std::fmt;
use std::path::{Path, PathBuf};

use muskat_core::curve::DEFAULT_DELTA_RHO;
use muskat_core::dynamics::PaperParams;
use muskat_core::evolve::{Direction, RedistributionPolicy, StepController};
use muskat_core::quadrature::QuadratureSpec;
use serde::{Deserialize, Serialize};

/// Snapshot times of the two-bump experiment.
pub const PAPER_TIMES: [f64; 5] = [0.0, 3.46e-4, 7.66e-4, 1.04e-3, 1.84e-3];

/// A configuration problem: exits with the config-error code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    TwoPhase,
    PeriodicGraph,
    RealLine,
    Contour,
    Galerkin,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::TwoPhase => "two-phase",
            Self::PeriodicGraph => "periodic-graph",
            Self::RealLine => "real-line",
            Self::Contour => "contour",
            Self::Galerkin => "galerkin",
        }
    }
}

/// Initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    /// the two-bump datum; its parameters live in `[paper]`
    PaperTwoPhase,
    Flat,
    /// `ε cos(kα)` (on the real line: not allowed)
    Cosine { epsilon: f64, k: u32 },
    /// `ε exp(-(x/σ)²)`
    Gaussian { epsilon: f64, sigma: f64 },
    /// a snapshot file of the configured problem
    File { path: PathBuf },
}

impl InitialData {
    fn default_problem(&self) -> ProblemKind {
        match self {
            Self::PaperTwoPhase => ProblemKind::TwoPhase,
            Self::Gaussian { .. } => ProblemKind::RealLine,
            _ => ProblemKind::PeriodicGraph,
        }
    }
}

/// Density coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Density {
    /// `Δρ` of the real-line, contour and Galerkin problems
    pub delta_rho: f64,
    /// coefficient of the single periodic graph (`Δρ/4π`)
    pub rho_bar: f64,
    /// coefficients of the upper and lower interface of two-phase runs
    pub rho_bar_1: f64,
    pub rho_bar_2: f64,
}

impl Default for Density {
    fn default() -> Self {
        let p = PaperParams::default();
        Self { delta_rho: DEFAULT_DELTA_RHO, rho_bar: 1.0, rho_bar_1: p.rho_bar_1, rho_bar_2: p.rho_bar_2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub initial: InitialData,
    /// node count
    pub n: usize,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub output_dir: PathBuf,
    /// seed of randomized checks; recorded for reproducibility
    pub seed: u64,
    pub direction: Direction,
    pub stop_on_turnover: bool,
    pub max_steps: Option<usize>,
    /// half-width `L` of the truncated real line
    pub half_width: f64,
    /// retained modes of the Galerkin problem (0: a quarter of `n`)
    pub galerkin_modes: usize,
    pub density: Density,
    pub paper: PaperParams,
    pub controller: StepController,
    pub quadrature: QuadratureSpec,
    /// node redistribution after accepted steps (graph problems); absent: none
    pub redistribution: Option<RedistributionPolicy>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::PeriodicGraph,
            initial: InitialData::Flat,
            n: 64,
            t_end: 0.01,
            snapshot_times: Vec::new(),
            output_dir: PathBuf::from("muskat-run"),
            seed: 0,
            direction: Direction::Forward,
            stop_on_turnover: false,
            max_steps: None,
            half_width: 20.0,
            galerkin_modes: 0,
            density: Density::default(),
            paper: PaperParams::default(),
            controller: StepController::default(),
            quadrature: QuadratureSpec::default(),
            redistribution: None,
        }
    }
}

fn evenly(t_end: f64, k: usize) -> Vec<f64> {
    (0..=k).map(|i| t_end * i as f64 / k as f64).collect()
}

/// Split `name(a, b)` into the name and its arguments.
fn call_syntax(spec: &str) -> Result<(&str, Vec<f64>), ConfigError> {
    let spec = spec.trim();
    let Some(open) = spec.find('(') else {
        return Ok((spec, Vec::new()));
    };
    let Some(body) = spec[open + 1..].strip_suffix(')') else {
        return bad(format!("`{spec}`: missing closing parenthesis"));
    };
    let args = body
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| ConfigError(format!("`{spec}`: argument {:?} is not a number", s.trim()))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((spec[..open].trim(), args))
}

impl RunConfig {
    /// The configuration of a builtin experiment.
    pub fn builtin(spec: &str) -> Result<Self, ConfigError> {
        let (name, args) = call_syntax(spec)?;
        let arg = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
        let max_args = |k: usize| if args.len() > k { bad(format!("`{name}` takes at most {k} arguments")) } else { Ok(()) };
        let mut c = RunConfig { output_dir: PathBuf::from(name), ..Default::default() };
        match name {
            "paper-two-phase" => {
                max_args(0)?;
                c.problem = ProblemKind::TwoPhase;
                c.initial = InitialData::PaperTwoPhase;
                c.n = 512;
                c.t_end = 2.5e-3;
                c.snapshot_times = PAPER_TIMES.to_vec();
            }
            "flat" => {
                max_args(0)?;
                c.snapshot_times = evenly(c.t_end, 4);
            }
            "cosine" => {
                max_args(2)?;
                let k = arg(1, 1.0);
                if k < 1.0 || k.fract() != 0.0 {
                    return bad(format!("cosine: wavenumber {k} must be a positive integer"));
                }
                c.initial = InitialData::Cosine { epsilon: arg(0, 0.1), k: k as u32 };
                c.n = 128;
                c.t_end = 0.1;
                c.snapshot_times = evenly(c.t_end, 10);
            }
            "gaussian" => {
                max_args(2)?;
                c.problem = ProblemKind::RealLine;
                c.initial = InitialData::Gaussian { epsilon: arg(0, 0.1), sigma: arg(1, 1.0) };
                c.n = 256;
                c.t_end = 0.1;
                c.snapshot_times = evenly(c.t_end, 10);
            }
            _ => return bad(format!("unknown builtin `{name}` (paper-two-phase, flat, cosine(eps,k), gaussian(eps,sigma))")),
        }
        c.validate()?;
        Ok(c)
    }

    /// Parse a TOML document. The problem defaults to the natural one for
    /// the initial data.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
        let mut c: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        if !table.contains_key("problem") {
            c.problem = c.initial.default_problem();
        }
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    /// A path to a TOML file, or a builtin.
    pub fn resolve(arg: &str) -> Result<Self, ConfigError> {
        let path = Path::new(arg);
        if path.is_file() {
            Self::from_file(path)
        } else if arg.ends_with(".toml") {
            bad(format!("{arg}: no such file"))
        } else {
            Self::builtin(arg)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    pub fn galerkin_modes(&self) -> usize {
        if self.galerkin_modes == 0 {
            self.n / 4
        } else {
            self.galerkin_modes
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 8 {
            return bad(format!("n = {}: need at least 8 nodes", self.n));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end = {}: must be finite and nonnegative", self.t_end));
        }
        for w in self.snapshot_times.windows(2) {
            if w[1] <= w[0] {
                return bad(format!("snapshot_times: {} does not follow {}", w[1], w[0]));
            }
        }
        if self.snapshot_times.iter().any(|&t| !(0.0..=self.t_end).contains(&t)) {
            return bad(format!("snapshot_times: all times must lie in [0, t_end = {}]", self.t_end));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return bad("half_width: must be positive");
        }
        let d = &self.density;
        if !(d.delta_rho.is_finite() && d.rho_bar.is_finite() && d.rho_bar_1.is_finite() && d.rho_bar_2.is_finite()) {
            return bad("density: coefficients must be finite");
        }
        self.controller.validate().map_err(|e| ConfigError(format!("controller: {e}")))?;
        self.quadrature.validate().map_err(|e| ConfigError(format!("quadrature: {e}")))?;
        if self.problem == ProblemKind::Galerkin && (self.galerkin_modes() == 0 || 4 * self.galerkin_modes() > self.n) {
            return bad(format!("galerkin_modes = {}: needs 1 <= modes <= n / 4 (n = {})", self.galerkin_modes(), self.n));
        }
        if self.redistribution.is_some() && !matches!(self.problem, ProblemKind::TwoPhase | ProblemKind::PeriodicGraph) {
            return bad(format!("redistribution: only graph problems on the circle are redistributed, not {}", self.problem.name()));
        }
        if self.stop_on_turnover && !matches!(self.problem, ProblemKind::Contour | ProblemKind::Galerkin) {
            return bad("stop_on_turnover: only contour problems can turn over");
        }
        use InitialData::*;
        use ProblemKind::*;
        match (&self.initial, self.problem) {
            (PaperTwoPhase, TwoPhase) | (Flat, _) | (File { .. }, _) => {}
            (PaperTwoPhase, p) => return bad(format!("initial: paper-two-phase needs problem = \"two-phase\", not {}", p.name())),
            (Cosine { .. }, RealLine) => return bad("initial: cosine data do not decay on the real line; use gaussian"),
            (Cosine { epsilon, .. } | Gaussian { epsilon, .. }, _) if !epsilon.is_finite() => return bad("initial: epsilon must be finite"),
            (Cosine { k: 0, .. }, _) => return bad("initial: k must be at least 1"),
            (Gaussian { sigma, .. }, _) if !(*sigma > 0.0 && sigma.is_finite()) => return bad("initial: sigma must be positive"),
            _ => {}
        }
        if let File { path } = &self.initial {
            if !path.is_file() {
                return bad(format!("initial: file {} does not exist", path.display()));
            }
        }
        if self.problem == TwoPhase && !matches!(self.initial, PaperTwoPhase) && self.density.rho_bar_1 == 0.0 && self.density.rho_bar_2 == 0.0 {
            return bad("density: a two-phase run needs a nonzero coefficient");
        }
        Ok(())
    }

    /// Paper parameters with the configured densities.
    pub fn paper_params(&self) -> PaperParams {
        PaperParams { rho_bar_1: self.density.rho_bar_1, rho_bar_2: self.density.rho_bar_2, ..self.paper }
    }
}

/// The graph profile of the builtin analytic data at `x`.
pub fn profile(initial: &InitialData, x: f64) -> f64 {
    match *initial {
        InitialData::Cosine { epsilon, k } => epsilon * (k as f64 * x).cos(),
        InitialData::Gaussian { epsilon, sigma } => epsilon * (-(x / sigma).powi(2)).exp(),
        _ => 0.0,
    }
}

/// Levels of the two flat interfaces used for non-paper two-phase data.
pub const TWO_PHASE_LEVELS: (f64, f64) = (0.5, -0.5);
