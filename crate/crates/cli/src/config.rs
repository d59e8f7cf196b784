//! Run configuration. Every block has defaults; [`RunConfig::materialize`] fills the
//! command-specific grid, potential and evolution settings so the persisted copy is complete.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nlslab::evolution::Scheme;
use nlslab::groundstate::OptimizerSettings;
use nlslab::picard::{PicardConfig, ScanSettings};
use nlslab::spacetime::{NormConfig, TrilinearBands};
use nlslab::{EvolveConfig, GridSpec, PotentialSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Randomize,
    Taildiag,
    Evolve,
    Norms,
    Trilinear,
    Picard,
    Groundstate,
    Mcurve,
    Stability,
    Asstability,
    Perturb,
    Report,
}

impl Command {
    pub const ALL: [Command; 12] = [
        Command::Randomize,
        Command::Taildiag,
        Command::Evolve,
        Command::Norms,
        Command::Trilinear,
        Command::Picard,
        Command::Groundstate,
        Command::Mcurve,
        Command::Stability,
        Command::Asstability,
        Command::Perturb,
        Command::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Randomize => "randomize",
            Command::Taildiag => "taildiag",
            Command::Evolve => "evolve",
            Command::Norms => "norms",
            Command::Trilinear => "trilinear",
            Command::Picard => "picard",
            Command::Groundstate => "groundstate",
            Command::Mcurve => "mcurve",
            Command::Stability => "stability",
            Command::Asstability => "asstability",
            Command::Perturb => "perturb",
            Command::Report => "report",
        }
    }

    pub fn parse(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn default_grid(self) -> GridSpec {
        let g = match self {
            Command::Evolve => GridSpec::new(2, 64, 8.0),
            Command::Picard | Command::Perturb => GridSpec::new(4, 16, 2.0 * PI),
            Command::Groundstate | Command::Mcurve | Command::Stability | Command::Asstability => {
                GridSpec::new(3, 48, 8.0 * PI)
            }
            _ => GridSpec::new(2, 32, 2.0 * PI),
        };
        g.expect("default grids are valid")
    }

    fn default_evolve(self) -> Option<EvolveConfig> {
        match self {
            Command::Evolve => Some(EvolveConfig::cubic(1e-3).with_snapshot_every(100)),
            Command::Stability | Command::Asstability => Some(
                EvolveConfig::mixed(0.025, 2.5, true).with_scheme(Scheme::Yoshida4).with_snapshot_every(8),
            ),
            _ => None,
        }
    }
}

/// Serializable potential description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialParams {
    Zero,
    /// The admissible well used by default in the given dimension.
    DefaultWell,
    GaussianWell { depth: f64, width: f64 },
    TruncatedInversePower { strength: f64, exponent: f64, cutoff: f64 },
    /// Samples read from an NLSF file; the real parts are used.
    Tabulated { path: PathBuf },
}

impl PotentialParams {
    pub fn to_spec(&self, grid: &GridSpec) -> CliResult<PotentialSpec> {
        Ok(match self {
            PotentialParams::Zero => PotentialSpec::Zero,
            PotentialParams::DefaultWell => PotentialSpec::default_well(grid.dim()),
            PotentialParams::GaussianWell { depth, width } => PotentialSpec::GaussianWell { depth: *depth, width: *width },
            PotentialParams::TruncatedInversePower { strength, exponent, cutoff } => {
                PotentialSpec::TruncatedInversePower { strength: *strength, exponent: *exponent, cutoff: *cutoff }
            }
            PotentialParams::Tabulated { path } => {
                let mut file = std::fs::File::open(path)?;
                let (field, _) = nlslab::spectral::read_snapshot(&mut file)?;
                if field.grid() != grid {
                    return Err(CliError::Validation("tabulated potential grid differs from the run grid".into()));
                }
                PotentialSpec::tabulated(field)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomizeBlock {
    pub width: f64,
    pub amplitude: f64,
    pub sobolev_indices: Vec<f64>,
}

impl Default for RandomizeBlock {
    fn default() -> Self {
        RandomizeBlock { width: 0.5, amplitude: 1.0, sobolev_indices: vec![0.0, 0.5, 1.0] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailNorm {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TailBlock {
    pub width: f64,
    pub samples: usize,
    pub horizon: f64,
    pub dt: f64,
    pub norm: TailNorm,
    /// Thresholds as empirical quantiles between these bounds.
    pub quantile_range: (f64, f64),
    pub thresholds: usize,
    pub moment_exponents: Vec<f64>,
    pub moment_samples: usize,
    pub moment_terms: usize,
}

impl Default for TailBlock {
    fn default() -> Self {
        TailBlock {
            width: 0.5,
            samples: 500,
            horizon: 0.5,
            dt: 1.0 / 64.0,
            norm: TailNorm::Y,
            quantile_range: (0.5, 0.95),
            thresholds: 8,
            moment_exponents: vec![2.0, 4.0, 8.0, 16.0],
            moment_samples: 10_000,
            moment_terms: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveBlock {
    pub horizon: f64,
    pub amplitude: f64,
    pub width: f64,
    /// Phase gradient along the first axis.
    pub velocity: f64,
}

impl Default for EvolveBlock {
    fn default() -> Self {
        EvolveBlock { horizon: 1.0, amplitude: 0.5, width: 1.0, velocity: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryBlock {
    pub width: f64,
    pub horizon: f64,
    pub dt: f64,
}

impl Default for TrajectoryBlock {
    fn default() -> Self {
        TrajectoryBlock { width: 0.3, horizon: 0.5, dt: 1.0 / 64.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrilinearBlock {
    pub width: f64,
    pub horizon: f64,
    pub dt: f64,
    pub bands: TrilinearBands,
    pub cases: Vec<u8>,
    /// Axis of the lateral output norm, 1-based.
    pub ell: usize,
}

impl Default for TrilinearBlock {
    fn default() -> Self {
        TrilinearBlock {
            width: 0.3,
            horizon: 0.5,
            dt: 1.0 / 64.0,
            bands: TrilinearBands { n: 4.0, n1: 8.0, n2: 4.0, n3: 2.0 },
            cases: (1..=8).collect(),
            ell: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardBlock {
    /// Width of the deterministic datum `v0`.
    pub datum_width: f64,
    /// Width of the profile randomized into the forcing datum.
    pub forcing_width: f64,
    /// When set, both data are scaled so the gate equals this fraction of `delta`.
    pub gate_fraction: Option<f64>,
    pub datum_scale: f64,
    pub forcing_scale: f64,
    pub scan: bool,
    pub scan_settings: ScanSettings,
}

impl Default for PicardBlock {
    fn default() -> Self {
        PicardBlock {
            datum_width: 1.0,
            forcing_width: 0.6,
            gate_fraction: Some(0.09),
            datum_scale: 1.0,
            forcing_scale: 1.0,
            scan: false,
            scan_settings: ScanSettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOverride {
    pub sobolev_s: f64,
    pub gn_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundStateBlock {
    pub q: f64,
    pub include_critical: bool,
    /// Explicit mass; otherwise `mass_fraction * a0`.
    pub mass: Option<f64>,
    pub mass_fraction: f64,
    pub optimizer: OptimizerSettings,
    /// Skips the constant estimation.
    pub constants: Option<ConstantsOverride>,
    pub starts: usize,
}

impl Default for GroundStateBlock {
    fn default() -> Self {
        GroundStateBlock {
            q: 2.5,
            include_critical: true,
            mass: None,
            mass_fraction: 0.25,
            optimizer: OptimizerSettings::default(),
            constants: None,
            starts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MCurveBlock {
    /// Masses as fractions of `a0`.
    pub fractions: Vec<f64>,
    pub starts: usize,
}

impl Default for MCurveBlock {
    fn default() -> Self {
        MCurveBlock { fractions: vec![0.05, 0.1, 0.15, 0.2, 0.25], starts: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityBlock {
    pub delta: f64,
    pub samples: usize,
    pub horizon: f64,
    pub budget_factor: f64,
    pub stop_on_exit: bool,
    /// Also trace the unperturbed standing wave.
    pub standing_wave: bool,
}

impl Default for StabilityBlock {
    fn default() -> Self {
        StabilityBlock { delta: 1e-3, samples: 20, horizon: 10.0, budget_factor: 10.0, stop_on_exit: true, standing_wave: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlmostSureBlock {
    pub s: f64,
    pub delta: f64,
    pub samples: usize,
    pub horizon: f64,
    pub budget_factor: f64,
    pub stop_on_exit: bool,
}

impl Default for AlmostSureBlock {
    fn default() -> Self {
        AlmostSureBlock { s: 0.6, delta: 1e-3, samples: 50, horizon: 10.0, budget_factor: 10.0, stop_on_exit: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbBlock {
    pub datum_width: f64,
    pub datum_scale: f64,
    pub forcing_width: f64,
    /// Forcing scales to compare; each yields one row.
    pub forcing_scale: f64,
    pub halvings: usize,
}

impl Default for PerturbBlock {
    fn default() -> Self {
        PerturbBlock { datum_width: 1.0, datum_scale: 0.02, forcing_width: 0.6, forcing_scale: 0.02, halvings: 2 }
    }
}

/// Full run configuration. Unknown keys are rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub potential: Option<PotentialParams>,
    #[serde(default)]
    pub norms: NormConfig,
    #[serde(default)]
    pub evolve: Option<EvolveConfig>,
    #[serde(default)]
    pub picard: PicardConfig,
    #[serde(default)]
    pub randomize: RandomizeBlock,
    #[serde(default)]
    pub taildiag: TailBlock,
    #[serde(default)]
    pub evolution: EvolveBlock,
    #[serde(default)]
    pub trajectory: TrajectoryBlock,
    #[serde(default)]
    pub trilinear: TrilinearBlock,
    #[serde(default)]
    pub picard_run: PicardBlock,
    #[serde(default)]
    pub groundstate: GroundStateBlock,
    #[serde(default)]
    pub mcurve: MCurveBlock,
    #[serde(default)]
    pub stability: StabilityBlock,
    #[serde(default)]
    pub asstability: AlmostSureBlock,
    #[serde(default)]
    pub perturb: PerturbBlock,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("nlslab-out")
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config parses")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fills the command-specific defaults.
    pub fn materialize(mut self, command: Command) -> Self {
        if self.grid.is_none() {
            self.grid = Some(command.default_grid());
        }
        if self.potential.is_none() {
            self.potential = Some(match command {
                Command::Randomize | Command::Taildiag => PotentialParams::Zero,
                _ => PotentialParams::DefaultWell,
            });
        }
        if self.evolve.is_none() {
            self.evolve = command.default_evolve();
        }
        self
    }

    pub fn grid(&self) -> GridSpec {
        self.grid.expect("materialized config")
    }

    pub fn potential_spec(&self) -> CliResult<PotentialSpec> {
        self.potential.clone().unwrap_or(PotentialParams::DefaultWell).to_spec(&self.grid())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
