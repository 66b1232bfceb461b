//! Run configuration: one JSON file fully determines a run.
//!
//! Unknown keys are rejected everywhere. See the README for the schema.

use std::path::PathBuf;

use advdiff_core::contour::AccuracyProfile;
use advdiff_core::control::Precision;
use advdiff_core::direct::{BcKind, IbvpSpec};
use advdiff_core::transforms::{BoundarySignal, InitialData};
use advdiff_core::{ProblemParams, Robin};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Direct,
    Control,
    Roots,
    Verify,
    Sweep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub problem: ProblemBlock,
    #[serde(default)]
    pub numerics: NumericsBlock,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub control: Option<ControlBlock>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Problem definition: explicit parameters or a named scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemBlock {
    Custom {
        d0: f64,
        k0: f64,
        length: f64,
        alpha: RobinValue,
        beta: RobinValue,
        #[serde(default)]
        bc: Option<BcName>,
        #[serde(default)]
        initial: Option<InitialSpec>,
        #[serde(default)]
        left: Option<SignalSpec>,
        #[serde(default)]
        right: Option<SignalSpec>,
    },
    /// Constant-flux infiltration into the Rehovot sand column; `flux` in
    /// cm/s, times in minutes.
    Braester {
        #[serde(default = "default_braester_flux")]
        flux: f64,
    },
    /// Rainfall at rate `rate` on a quasi-linear soil of depth `length`.
    Philip {
        #[serde(default = "default_philip_rate")]
        rate: f64,
        #[serde(default = "default_philip_length")]
        length: f64,
    },
}

fn default_braester_flux() -> f64 {
    0.3e-3
}

fn default_philip_rate() -> f64 {
    1.6
}

fn default_philip_length() -> f64 {
    1.0
}

/// A Robin coefficient, or the string `"neumann"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RobinValue {
    Coefficient(f64),
    Named(NeumannTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeumannTag {
    Neumann,
}

impl From<RobinValue> for Robin {
    fn from(v: RobinValue) -> Robin {
        match v {
            RobinValue::Coefficient(c) => Robin::Coefficient(c),
            RobinValue::Named(NeumannTag::Neumann) => Robin::Neumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcName {
    RobinRobin,
    RobinDirichlet,
    DirichletDirichlet,
    NeumannNeumann,
}

impl From<BcName> for BcKind {
    fn from(b: BcName) -> BcKind {
        match b {
            BcName::RobinRobin => BcKind::RobinRobin,
            BcName::RobinDirichlet => BcKind::RobinDirichlet,
            BcName::DirichletDirichlet => BcKind::DirichletDirichlet,
            BcName::NeumannNeumann => BcKind::NeumannNeumann,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    PiecewiseStep { height: f64, split: f64 },
    HalfCosine,
    FullSine,
    ExpSine { rate: f64, mode: u32 },
    Constant { value: f64 },
    Tabulated { points: Vec<(f64, f64)> },
    Sum { terms: Vec<WeightedInitial> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedInitial {
    pub weight: f64,
    pub initial: InitialSpec,
}

impl InitialSpec {
    pub fn to_core(&self) -> InitialData {
        match self {
            InitialSpec::PiecewiseStep { height, split } => InitialData::PiecewiseStep { height: *height, split: *split },
            InitialSpec::HalfCosine => InitialData::HalfCosine,
            InitialSpec::FullSine => InitialData::FullSine,
            InitialSpec::ExpSine { rate, mode } => InitialData::ExpSine { rate: *rate, mode: *mode },
            InitialSpec::Constant { value } => InitialData::Constant(*value),
            InitialSpec::Tabulated { points } => InitialData::Tabulated(points.clone()),
            InitialSpec::Sum { terms } => InitialData::combine(terms.iter().map(|t| (t.weight, t.initial.to_core()))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SignalSpec {
    Constant { value: f64 },
    SineSeries { coeffs: Vec<f64>, tau: f64, t_final: f64 },
}

impl SignalSpec {
    pub fn to_core(&self) -> BoundarySignal {
        match self {
            SignalSpec::Constant { value } => BoundarySignal::Constant(*value),
            SignalSpec::SineSeries { coeffs, tau, t_final } => {
                BoundarySignal::SineSeries { coeffs: coeffs.clone(), tau: *tau, t_final: *t_final }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Fast,
    #[default]
    Default,
    Paper,
}

impl ProfileName {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fast" => Some(ProfileName::Fast),
            "default" => Some(ProfileName::Default),
            "paper" => Some(ProfileName::Paper),
            _ => None,
        }
    }

    pub fn profile(self) -> AccuracyProfile {
        match self {
            ProfileName::Fast => AccuracyProfile::fast(),
            ProfileName::Default => AccuracyProfile::standard(),
            ProfileName::Paper => AccuracyProfile::paper(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecisionName {
    Double,
    Extended,
}

/// Accuracy profile by name plus optional per-field overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsBlock {
    #[serde(default)]
    pub profile: ProfileName,
    /// Control assembly arithmetic; `paper` defaults to extended.
    #[serde(default)]
    pub precision: Option<PrecisionName>,
    pub ray_angle: Option<f64>,
    pub panels: Option<usize>,
    pub order: Option<usize>,
    pub grading: Option<f64>,
    pub rel_quad_tol: Option<f64>,
    pub s_cap: Option<f64>,
    pub clearance: Option<f64>,
    pub offset: Option<f64>,
    pub max_refinements: Option<usize>,
    pub max_panel_phase: Option<f64>,
    pub decay_exponent: Option<f64>,
}

impl NumericsBlock {
    pub fn accuracy(&self) -> AccuracyProfile {
        let mut p = self.profile.profile();
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f { p.$f = v; })*};
        }
        set!(ray_angle, panels, order, grading, rel_quad_tol, s_cap, clearance, offset, max_refinements, max_panel_phase, decay_exponent);
        p
    }

    pub fn precision(&self) -> Precision {
        match (self.precision, self.profile) {
            (Some(PrecisionName::Double), _) => Precision::Double,
            (Some(PrecisionName::Extended), _) | (None, ProfileName::Paper) => Precision::Extended,
            (None, _) => Precision::Double,
        }
    }
}

/// Evaluation grid. `xs` or `x_count` (uniform on `[0, L]` inclusive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    #[serde(default)]
    pub xs: Option<Vec<f64>>,
    #[serde(default)]
    pub x_count: Option<usize>,
    pub ts: Vec<f64>,
}

impl GridBlock {
    pub fn xs(&self, length: f64) -> Result<Vec<f64>, CliError> {
        match (&self.xs, self.x_count) {
            (Some(xs), None) if !xs.is_empty() => Ok(xs.clone()),
            (None, Some(n)) if n >= 2 => Ok((0..n).map(|i| length * i as f64 / (n - 1) as f64).collect()),
            _ => Err(CliError::Config("grid needs a nonempty `xs` or `x_count` >= 2, not both".into())),
        }
    }
}

/// How the collocation system is solved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SolveSpec {
    #[default]
    Exact,
    Delta(f64),
    /// Discrepancy level bisected so the verified error hits this value.
    TargetError(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlBlock {
    pub t_final: f64,
    #[serde(default)]
    pub tau: f64,
    pub n: usize,
    #[serde(default)]
    pub solve: SolveSpec,
    /// Coefficients to check (`verify` only).
    #[serde(default)]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default = "default_series_points")]
    pub series_points: usize,
}

fn default_series_points() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub ns: Vec<usize>,
    pub t_finals: Vec<f64>,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub solve: SolveSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Prepended to every file name.
    #[serde(default)]
    pub prefix: String,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: default_out_dir(), prefix: String::new() }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Block presence per command; numeric validity is left to the core.
    pub fn validate(&self) -> Result<(), CliError> {
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(CliError::Config(what.into())) };
        let custom = matches!(self.problem, ProblemBlock::Custom { .. });
        match self.command {
            Command::Direct => need(self.grid.is_some(), "`direct` needs a `grid` block"),
            Command::Roots => Ok(()),
            Command::Control => {
                need(custom, "`control` needs a custom problem")?;
                need(self.control.is_some(), "`control` needs a `control` block")
            }
            Command::Verify => {
                need(custom, "`verify` needs a custom problem")?;
                need(self.control.as_ref().is_some_and(|c| c.coeffs.is_some()), "`verify` needs `control.coeffs`")
            }
            Command::Sweep => {
                need(custom, "`sweep` needs a custom problem")?;
                need(self.sweep.is_some(), "`sweep` needs a `sweep` block")
            }
        }
    }
}

impl ProblemBlock {
    pub fn params(&self) -> Result<ProblemParams, CliError> {
        let p = match self {
            ProblemBlock::Custom { d0, k0, length, alpha, beta, .. } => {
                ProblemParams::new(*d0, *k0, *length, Robin::from(*alpha), Robin::from(*beta))
            }
            ProblemBlock::Braester { .. } => advdiff_core::direct::rehovot_params(),
            ProblemBlock::Philip { length, .. } => advdiff_core::direct::philip_params(*length),
        };
        p.map_err(CliError::from_setup)
    }

    pub fn initial(&self) -> InitialData {
        match self {
            ProblemBlock::Custom { initial: Some(i), .. } => i.to_core(),
            _ => InitialData::zero(),
        }
    }

    /// Full IBVP for a custom problem; the boundary family is inferred from
    /// `alpha` and `beta` unless given.
    pub fn ibvp(&self) -> Result<IbvpSpec, CliError> {
        let ProblemBlock::Custom { bc, left, right, .. } = self else {
            return Err(CliError::Config("preset problems have no free IBVP".into()));
        };
        let params = self.params()?;
        let kind = match bc {
            Some(b) => BcKind::from(*b),
            None => IbvpSpec::infer_kind(&params).map_err(CliError::from_setup)?,
        };
        let sig = |s: &Option<SignalSpec>| s.as_ref().map(SignalSpec::to_core).unwrap_or_default();
        IbvpSpec::new(params, self.initial(), sig(left), sig(right), kind).map_err(CliError::from_setup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX1: &str = r#"{
        "command": "control",
        "problem": {"type": "custom", "d0": 1.0, "k0": 0.5, "length": 1.0, "alpha": 1.0, "beta": 0.0,
                    "initial": {"type": "piecewise_step", "height": 1.0, "split": 0.5}},
        "control": {"t_final": 1.0, "n": 2}
    }"#;

    #[test]
    fn parses_control_config_with_defaults() {
        let cfg = RunConfig::from_json(EX1).unwrap();
        assert_eq!(cfg.command, Command::Control);
        let c = cfg.control.unwrap();
        assert_eq!((c.n, c.tau, c.solve, c.series_points), (2, 0.0, SolveSpec::Exact, 201));
        assert_eq!(cfg.numerics.profile, ProfileName::Default);
        assert_eq!(cfg.output.dir, PathBuf::from("out"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = EX1.replacen("\"n\": 2", "\"n\": 2, \"extra\": 1", 1);
        assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Config(_))));
        let bad = EX1.replacen("\"beta\": 0.0", "\"beta\": 0.0, \"gamma\": 1", 1);
        assert!(matches!(RunConfig::from_json(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn missing_blocks_are_config_errors() {
        let no_grid = r#"{"command": "direct", "problem": {"type": "braester"}}"#;
        assert!(matches!(RunConfig::from_json(no_grid), Err(CliError::Config(_))));
        let preset_control = r#"{"command": "control", "problem": {"type": "philip"}, "control": {"t_final": 1, "n": 2}}"#;
        assert!(matches!(RunConfig::from_json(preset_control), Err(CliError::Config(_))));
    }

    #[test]
    fn solve_spec_forms() {
        let s: SolveSpec = serde_json::from_str("\"exact\"").unwrap();
        assert_eq!(s, SolveSpec::Exact);
        let s: SolveSpec = serde_json::from_str("{\"delta\": 0.01}").unwrap();
        assert_eq!(s, SolveSpec::Delta(0.01));
        let s: SolveSpec = serde_json::from_str("{\"target_error\": 0.005}").unwrap();
        assert_eq!(s, SolveSpec::TargetError(0.005));
    }

    #[test]
    fn floats_parse_exactly() {
        let vals = [-0.11510744959404673, 0.1 + 0.2, 1e-300, 6.02214076e23, -0.02667947300573713];
        let list: Vec<String> = vals.iter().map(f64::to_string).collect();
        let text = format!("{{\"t_final\": 1, \"n\": 4, \"coeffs\": [{}]}}", list.join(", "));
        let c: ControlBlock = serde_json::from_str(&text).unwrap();
        let bits: Vec<u64> = c.coeffs.unwrap().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, vals.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn robin_value_accepts_neumann() {
        let v: RobinValue = serde_json::from_str("\"neumann\"").unwrap();
        assert_eq!(Robin::from(v), Robin::Neumann);
        let v: RobinValue = serde_json::from_str("0.25").unwrap();
        assert_eq!(Robin::from(v), Robin::Coefficient(0.25));
    }

    #[test]
    fn overrides_and_precision() {
        let n = NumericsBlock { profile: ProfileName::Fast, panels: Some(7), ..Default::default() };
        assert_eq!(n.accuracy().panels, 7);
        assert_eq!(n.precision(), Precision::Double);
        let n = NumericsBlock { profile: ProfileName::Paper, ..Default::default() };
        assert_eq!(n.precision(), Precision::Extended);
        let n = NumericsBlock { profile: ProfileName::Paper, precision: Some(PrecisionName::Double), ..Default::default() };
        assert_eq!(n.precision(), Precision::Double);
    }

    #[test]
    fn grid_needs_exactly_one_x_source() {
        let g = GridBlock { xs: None, x_count: Some(3), ts: vec![1.0] };
        assert_eq!(g.xs(2.0).unwrap(), vec![0.0, 1.0, 2.0]);
        let g = GridBlock { xs: Some(vec![0.5]), x_count: Some(3), ts: vec![1.0] };
        assert!(g.xs(2.0).is_err());
        let g = GridBlock { xs: None, x_count: None, ts: vec![1.0] };
        assert!(g.xs(2.0).is_err());
    }

    #[test]
    fn presets_have_their_parameters() {
        let p = ProblemBlock::Philip { rate: 1.6, length: 0.05 }.params().unwrap();
        assert_eq!((p.d0, p.k0, p.length), (0.5, 1.0, 0.05));
        let p = ProblemBlock::Braester { flux: 3e-4 }.params().unwrap();
        assert_eq!(p.length, 60.0);
        assert!(ProblemBlock::Braester { flux: 3e-4 }.ibvp().is_err());
    }
}
