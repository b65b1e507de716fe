use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::analysis::{lq_design, LqDesign, DEFAULT_BAND, PENDULUM_Q, PENDULUM_R};
use crate::controller::{
    CloudController, ControllerConfig, DeltaMode, GeneralController, Mode, OutputMode, RuleGrid, Shape,
};
use crate::error::{Error, Result};
use crate::plant::{
    linearize_pendulum, make_lti_from_tf, Control, GivenLinearSystem, LtiPlant, Observation, Pendulum,
    PendulumParams, Plant, SimConfig, StateFeedback, ZeroController,
};

/// Cloud used by `gen-cloud`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloudSpec {
    pub ex: f64,
    pub en1: f64,
    pub en2: f64,
    pub he: f64,
    pub drops: usize,
}

impl Default for CloudSpec {
    fn default() -> Self {
        Self {
            ex: 0.0,
            en1: 1.0,
            en2: 1.0,
            he: 0.05,
            drops: 3000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PlantSpec {
    Pendulum(PendulumParams),
    /// Transfer function, coefficients highest power first, with input
    /// dead time in seconds.
    Lti {
        num: Vec<f64>,
        den: Vec<f64>,
        #[serde(default)]
        delay: f64,
    },
    /// The fixed two-state linear model; the control input drives the
    /// disturbance channel.
    GivenLinear,
}

/// Canonical two-input cloud controller parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloudControllerSpec {
    pub j: i32,
    pub l: f64,
    pub h: f64,
    pub he: f64,
    pub ke: f64,
    pub kde: f64,
    pub ku: f64,
    pub drops: usize,
    pub mode: Mode,
    pub output: OutputMode,
    pub delta: DeltaMode,
}

impl Default for CloudControllerSpec {
    fn default() -> Self {
        Self {
            j: 2,
            l: 1.0,
            h: 1.0,
            he: 0.01,
            ke: 1.0,
            kde: 1.0,
            ku: 1.0,
            drops: 3000,
            mode: Mode::Stochastic,
            output: OutputMode::Positional,
            delta: DeltaMode::Difference,
        }
    }
}

impl CloudControllerSpec {
    pub fn to_config(&self, shape: Shape) -> Result<ControllerConfig> {
        let mut cfg = ControllerConfig::canonical(self.j, self.l, self.h, self.he, self.ke, self.kde, self.ku)?;
        cfg.drops = self.drops;
        cfg.mode = self.mode;
        cfg.output = self.output;
        cfg.delta = self.delta;
        cfg.shape = shape;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneralControllerSpec {
    pub grid: RuleGrid,
    pub ke: f64,
    pub kde: f64,
    pub ku: f64,
    pub drops: usize,
    pub mode: Mode,
    pub delta: DeltaMode,
}

impl Default for GeneralControllerSpec {
    fn default() -> Self {
        Self {
            grid: RuleGrid::default(),
            ke: 1.0,
            kde: 1.0,
            ku: 1.0,
            drops: 3000,
            mode: Mode::Stochastic,
            delta: DeltaMode::Difference,
        }
    }
}

/// Diagonal state weight and scalar input weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LqSpec {
    pub q: Vec<f64>,
    pub r: f64,
}

impl Default for LqSpec {
    fn default() -> Self {
        Self {
            q: PENDULUM_Q.to_vec(),
            r: PENDULUM_R,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ControllerSpec {
    Triangle(CloudControllerSpec),
    Normal(CloudControllerSpec),
    General(GeneralControllerSpec),
    /// Full-state feedback regulating to the origin.
    Lq(LqSpec),
    Zero,
}

impl ControllerSpec {
    pub fn label(&self) -> &'static str {
        match self {
            ControllerSpec::Triangle(_) => "triangle",
            ControllerSpec::Normal(_) => "normal",
            ControllerSpec::General(_) => "general",
            ControllerSpec::Lq(_) => "lq",
            ControllerSpec::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeSpec {
    /// Points per axis of the certification grid.
    pub grid: usize,
}

impl Default for DecomposeSpec {
    fn default() -> Self {
        Self { grid: 101 }
    }
}

/// The LQ baseline used by `compare`; the cloud controllers come from
/// `[controller]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSpec {
    pub lq: LqSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsSpec {
    pub band: f64,
}

impl Default for MetricsSpec {
    fn default() -> Self {
        Self { band: DEFAULT_BAND }
    }
}

/// One experiment file. Every section is optional; each subcommand checks
/// for the sections it needs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the CLI flag or environment wins over this.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub metrics: MetricsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloud: Option<CloudSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<PlantSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controller: Option<ControllerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decompose: Option<DecomposeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSpec>,
}

const PRESETS: [(&str, &str); 6] = [
    ("paper-pendulum", include_str!("../../presets/paper-pendulum.toml")),
    ("paper-lti", include_str!("../../presets/paper-lti.toml")),
    ("zero-pendulum", include_str!("../../presets/zero-pendulum.toml")),
    ("decompose", include_str!("../../presets/decompose.toml")),
    ("gen-cloud", include_str!("../../presets/gen-cloud.toml")),
    ("given-linear", include_str!("../../presets/given-linear.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// Text of a bundled preset.
pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().replace('\n', " ")))
    }

    /// Reads a config file; a bare preset name resolves to the bundled copy
    /// when no such file exists.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::from_toml(&text)
                .map_err(|e| Error::Config(format!("{}: {}", path.display(), strip_prefix(&e)))),
            Err(err) => match path.to_str().and_then(preset) {
                Some(text) => Self::from_toml(text),
                None => Err(Error::Io(format!("{}: {err}", path.display()))),
            },
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = preset(name).ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
        Self::from_toml(text)
    }

    /// The config with defaults filled, as written next to the outputs.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn require_plant(&self) -> Result<&PlantSpec> {
        self.plant.as_ref().ok_or_else(|| missing("plant"))
    }

    pub fn require_controller(&self) -> Result<&ControllerSpec> {
        self.controller.as_ref().ok_or_else(|| missing("controller"))
    }

    pub fn require_sim(&self) -> Result<&SimConfig> {
        self.sim.as_ref().ok_or_else(|| missing("sim"))
    }
}

fn missing(section: &str) -> Error {
    Error::Config(format!("missing [{section}] section"))
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

/// A plant instantiated from a [`PlantSpec`].
#[derive(Debug, Clone)]
pub enum BuiltPlant {
    Pendulum(Pendulum),
    Lti(LtiPlant),
    Given(GivenLinearSystem),
}

impl PlantSpec {
    pub fn build(&self) -> Result<BuiltPlant> {
        Ok(match self {
            PlantSpec::Pendulum(p) => BuiltPlant::Pendulum(Pendulum::new(*p)?),
            PlantSpec::Lti { num, den, delay } => BuiltPlant::Lti(make_lti_from_tf(num, den, *delay)?),
            PlantSpec::GivenLinear => BuiltPlant::Given(GivenLinearSystem::new()),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            PlantSpec::Pendulum(_) => "pendulum",
            PlantSpec::Lti { .. } => "lti",
            PlantSpec::GivenLinear => "given-linear",
        }
    }
}

impl BuiltPlant {
    fn inner(&self) -> &dyn Plant {
        match self {
            BuiltPlant::Pendulum(p) => p,
            BuiltPlant::Lti(p) => p,
            BuiltPlant::Given(p) => p,
        }
    }

    /// `(A, B)` of the model the LQ baseline is designed on.
    pub fn linear_model(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        match self {
            BuiltPlant::Pendulum(p) => {
                let (a, b) = linearize_pendulum(&p.params);
                Ok((a, DMatrix::from_column_slice(2, 1, b.as_slice())))
            }
            BuiltPlant::Lti(p) => Ok((p.a.clone(), DMatrix::from_column_slice(p.b.len(), 1, p.b.as_slice()))),
            BuiltPlant::Given(_) => Err(Error::Config(
                "the given linear system has no control input; LQ needs a pendulum or lti plant".into(),
            )),
        }
    }

    pub fn is_pendulum(&self) -> bool {
        matches!(self, BuiltPlant::Pendulum(_))
    }
}

impl Plant for BuiltPlant {
    fn state_dim(&self) -> usize {
        self.inner().state_dim()
    }

    fn derivative(&self, x: &[f64], u: f64) -> Result<Vec<f64>> {
        self.inner().derivative(x, u)
    }

    fn output(&self, x: &[f64]) -> f64 {
        self.inner().output(x)
    }

    fn state_labels(&self) -> Vec<String> {
        self.inner().state_labels()
    }

    fn feedthrough(&self) -> f64 {
        self.inner().feedthrough()
    }

    fn delay(&self) -> f64 {
        self.inner().delay()
    }
}

/// A controller instantiated from a [`ControllerSpec`].
#[derive(Debug, Clone)]
pub enum BuiltController {
    Cloud(Box<CloudController>),
    General(Box<GeneralController>),
    Feedback(StateFeedback, Box<LqDesign>),
    Zero(ZeroController),
}

pub fn lq_for(plant: &BuiltPlant, spec: &LqSpec) -> Result<LqDesign> {
    let (a, b) = plant.linear_model()?;
    let n = a.nrows();
    if spec.q.len() != n {
        return Err(Error::invalid(
            "q",
            format!("expected {n} diagonal weights, got {}", spec.q.len()),
        ));
    }
    let q = DMatrix::from_diagonal(&DVector::from_column_slice(&spec.q));
    let r = DMatrix::from_element(1, 1, spec.r);
    lq_design(&a, &b, &q, &r)
}

impl ControllerSpec {
    pub fn build(&self, plant: &BuiltPlant, seed: u64) -> Result<BuiltController> {
        Ok(match self {
            ControllerSpec::Triangle(c) => {
                BuiltController::Cloud(Box::new(CloudController::new(c.to_config(Shape::Triangle)?, seed)?))
            }
            ControllerSpec::Normal(c) => {
                BuiltController::Cloud(Box::new(CloudController::new(c.to_config(Shape::Normal)?, seed)?))
            }
            ControllerSpec::General(g) => BuiltController::General(Box::new(GeneralController::new(
                g.grid.rules()?,
                g.ke,
                g.kde,
                g.ku,
                g.grid.l,
                g.drops,
                g.mode,
                g.delta,
                seed,
            )?)),
            ControllerSpec::Lq(spec) => {
                let design = lq_for(plant, spec)?;
                let k = design.k.iter().copied().collect();
                BuiltController::Feedback(StateFeedback { k }, Box::new(design))
            }
            ControllerSpec::Zero => BuiltController::Zero(ZeroController),
        })
    }
}

impl Control for BuiltController {
    fn control(&mut self, obs: &Observation) -> Result<f64> {
        match self {
            BuiltController::Cloud(c) => c.control(obs),
            BuiltController::General(c) => c.control(obs),
            BuiltController::Feedback(c, _) => c.control(obs),
            BuiltController::Zero(c) => c.control(obs),
        }
    }
}
