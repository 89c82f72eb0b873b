//! Experiment configuration.
//!
//! A configuration file is TOML. It names a built-in scenario or gives an inline
//! table (optionally layered over a built-in one through `base`), plus seeds,
//! sweep axes and an output directory:
//!
//! ```toml
//! seeds = [1, 2, 3]
//! out_dir = "out"
//!
//! [scenario]
//! base = "uav-free-1"
//! weights.gamma = 0.0
//!
//! [[sweep]]
//! param = "controller.samples"
//! values = [100, 1000]
//! ```
//!
//! Parameters are addressed by dotted paths into the scenario table, with list
//! elements addressed by index (`missions.1.target`).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::controller::{ControllerParams, NoiseCovariance};
use crate::cost::{Aabb, Mission, MissionSet, ObstacleSet, SquareMatrix};
use crate::dynamics::{DynamicsModel, ModeId, ModeParams};
use crate::error::{Error, Result};
use crate::sim::{AbortPlan, AbortPolicy, Scenario};
use crate::weights::{DistanceMetric, WeightLawParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    DoubleIntegrator,
    SimpleCar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub id: ModeId,
    pub input_scale: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelName,
    /// Simple car only.
    pub wheelbase: f64,
    /// Simple car only; the double integrator has a fixed step.
    pub dt: f64,
    pub modes: Vec<ModeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionConfig {
    pub target: Vec<f64>,
    /// Diagonal of the state weight.
    pub q: Vec<f64>,
    /// Diagonal of the input weight.
    pub r: Vec<f64>,
    pub mode: ModeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub penalty: f64,
    pub boxes: Vec<BoxConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub samples: usize,
    pub horizon: usize,
    pub temperature: f64,
    /// Diagonal of the sampling covariance.
    pub noise_variance: Vec<f64>,
    pub control_cost: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub gamma: f64,
    pub temperature: f64,
    pub metric: MetricName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricName {
    Position,
    FullState,
}

impl From<MetricName> for DistanceMetric {
    fn from(m: MetricName) -> Self {
        match m {
            MetricName::Position => DistanceMetric::Position,
            MetricName::FullState => DistanceMetric::FullState,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbortConfig {
    pub step: usize,
    pub mode: ModeId,
    #[serde(default)]
    pub policy: AbortPolicy,
}

/// Serializable scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub model: ModelConfig,
    /// Primary mission first.
    pub missions: Vec<MissionConfig>,
    pub obstacles: ObstacleConfig,
    pub controller: ControllerConfig,
    pub weights: WeightConfig,
    pub initial_state: Vec<f64>,
    pub max_steps: usize,
    pub completion_tol: f64,
    pub execution_noise: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abort: Option<AbortConfig>,
}

fn cfg(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{path}: {msg}"))
}

impl ScenarioConfig {
    /// Checks every constraint and assembles the runnable scenario.
    pub fn build(&self, seed: u64) -> Result<Scenario<f64>> {
        let c = &self.controller;
        if c.samples < 1 {
            return Err(cfg("controller.samples", format!("sample count K must be >= 1, got {}", c.samples)));
        }
        if c.horizon < 2 {
            return Err(cfg("controller.horizon", format!("horizon N must be >= 2, got {}", c.horizon)));
        }
        if !(c.temperature > 0.0) {
            return Err(cfg("controller.temperature", "must be > 0"));
        }
        if c.noise_variance.len() != 2 || c.noise_variance.iter().any(|&v| !(v > 0.0)) {
            return Err(cfg("controller.noise_variance", "needs two positive entries"));
        }
        if self.missions.is_empty() {
            return Err(cfg("missions", "needs at least the primary mission"));
        }

        let base = match self.model.kind {
            ModelName::DoubleIntegrator => DynamicsModel::double_integrator(),
            ModelName::SimpleCar => DynamicsModel::simple_car(self.model.wheelbase, self.model.dt).map_err(|e| cfg("model", e))?,
        };
        let modes = self.model.modes.iter().map(|m| ModeParams { mode_id: m.id, input_scale: m.input_scale.clone() }).collect();
        let model = base.with_modes(modes).map_err(|e| cfg("model.modes", e))?;
        let (nx, nu) = (model.state_dim(), model.input_dim());

        let mut missions = Vec::with_capacity(self.missions.len());
        for (i, m) in self.missions.iter().enumerate() {
            if m.target.len() != nx {
                return Err(cfg(&format!("missions.{i}.target"), format!("expected {nx} entries, got {}", m.target.len())));
            }
            if m.q.len() != nx || m.q.iter().any(|&v| !(v >= 0.0)) {
                return Err(cfg(&format!("missions.{i}.q"), format!("expected {nx} nonnegative entries")));
            }
            if m.r.len() != nu || m.r.iter().any(|&v| !(v >= 0.0)) {
                return Err(cfg(&format!("missions.{i}.r"), format!("expected {nu} nonnegative entries")));
            }
            model.mode(m.mode).map_err(|e| cfg(&format!("missions.{i}.mode"), e))?;
            missions.push(
                Mission::new(m.target.clone(), nu)
                    .with_weights(SquareMatrix::diagonal(&m.q), SquareMatrix::diagonal(&m.r))
                    .with_mode(m.mode),
            );
        }
        let missions = MissionSet::new(missions, nx, nu).map_err(|e| cfg("missions", e))?;

        let mut boxes = Vec::with_capacity(self.obstacles.boxes.len());
        for (i, b) in self.obstacles.boxes.iter().enumerate() {
            boxes.push(Aabb::new(b.min, b.max).map_err(|e| cfg(&format!("obstacles.boxes.{i}"), e))?);
        }
        let obstacles = ObstacleSet::new(boxes, self.obstacles.penalty).map_err(|e| cfg("obstacles.penalty", e))?;

        let noise = NoiseCovariance::from_matrix(&SquareMatrix::diagonal(&c.noise_variance))
            .map_err(|e| cfg("controller.noise_variance", e))?;
        let mut controller = ControllerParams::new(c.samples, c.horizon, missions.alternatives(), noise, c.temperature, seed)
            .map_err(|e| cfg("controller", e))?;
        controller.control_cost = c.control_cost;

        let weights = WeightLawParams::new(self.weights.gamma, self.weights.temperature, self.weights.metric.into())
            .map_err(|e| cfg("weights", e))?;

        if self.initial_state.len() != nx {
            return Err(cfg("initial_state", format!("expected {nx} entries, got {}", self.initial_state.len())));
        }
        if self.max_steps < 1 {
            return Err(cfg("max_steps", "must be >= 1"));
        }
        if !(self.completion_tol > 0.0) {
            return Err(cfg("completion_tol", "must be > 0"));
        }
        if !(self.execution_noise >= 0.0) {
            return Err(cfg("execution_noise", "must be >= 0"));
        }
        let abort = self.abort.as_ref().map(|a| AbortPlan { step: a.step, mode: a.mode, policy: a.policy });
        let scenario = Scenario {
            model,
            missions,
            obstacles,
            controller,
            weights,
            initial_state: self.initial_state.clone(),
            max_steps: self.max_steps,
            completion_tol: self.completion_tol,
            abort,
            execution_noise: self.execution_noise,
        };
        scenario.validate().map_err(|e| match e {
            Error::Config(msg) if msg.starts_with("abort") => cfg("abort", msg),
            other => other,
        })?;
        Ok(scenario)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("scenario serializes")
    }

    pub fn from_value(v: Value) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_value(v)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes to TOML")
    }
}

const PRIMARY: [f64; 4] = [10.0, 10.0, 0.0, 0.0];

fn uav(name: &str, alternatives: &[[f64; 2]], horizon: usize) -> ScenarioConfig {
    let mut targets = vec![PRIMARY.to_vec()];
    targets.extend(alternatives.iter().map(|p| vec![p[0], p[1], 0.0, 0.0]));
    ScenarioConfig {
        name: name.to_string(),
        model: ModelConfig {
            kind: ModelName::DoubleIntegrator,
            wheelbase: 0.2,
            dt: 0.1,
            modes: vec![ModeConfig { id: 0, input_scale: vec![1.0, 1.0] }, ModeConfig { id: 1, input_scale: vec![0.6, 0.6] }],
        },
        missions: targets.into_iter().map(|t| MissionConfig { q: vec![1.0; t.len()], target: t, r: vec![1.0, 1.0], mode: 0 }).collect(),
        obstacles: ObstacleConfig { penalty: 1e4, boxes: Vec::new() },
        controller: ControllerConfig { samples: 1000, horizon, temperature: 0.5, noise_variance: vec![1.0, 1.0], control_cost: false },
        weights: WeightConfig { gamma: 0.66, temperature: 1.0, metric: MetricName::Position },
        initial_state: vec![0.0; 4],
        max_steps: 400,
        completion_tol: 0.5,
        execution_noise: 0.0,
        abort: None,
    }
}

fn obstacle_boxes() -> Vec<BoxConfig> {
    vec![BoxConfig { min: [3.0, 2.0], max: [5.0, 4.5] }, BoxConfig { min: [6.0, 5.5], max: [8.0, 8.0] }]
}

/// Names of the shipped scenarios.
pub const SCENARIOS: [&str; 5] = ["uav-free-1", "uav-free-2", "uav-opposite", "uav-obstacles", "ugv-obstacles"];

pub fn builtin_scenario(name: &str) -> Result<ScenarioConfig> {
    let sc = match name {
        "uav-free-1" => uav(name, &[[2.0, 6.0], [8.0, 6.0]], 10),
        "uav-free-2" => uav(name, &[[2.0, 8.0], [6.0, 12.0]], 10),
        "uav-opposite" => uav(name, &[[-4.0, -4.0], [-4.0, 8.0]], 10),
        "uav-obstacles" => {
            let mut sc = uav(name, &[[2.0, 6.0], [6.0, 12.0]], 20);
            sc.obstacles.boxes = obstacle_boxes();
            sc
        }
        "ugv-obstacles" => {
            let mut sc = uav(name, &[[2.0, 6.0], [6.0, 12.0]], 10);
            sc.model.kind = ModelName::SimpleCar;
            for m in &mut sc.missions {
                m.target.truncate(3);
                m.q.truncate(3);
            }
            sc.initial_state = vec![0.0; 3];
            sc.controller.samples = 10_000;
            sc.obstacles.boxes = obstacle_boxes();
            sc.max_steps = 600;
            sc
        }
        other => {
            return Err(Error::Config(format!("unknown scenario {other:?}; available: {}", SCENARIOS.join(", "))));
        }
    };
    Ok(sc)
}

/// One-line summary per shipped scenario.
pub fn scenario_summaries() -> Vec<(String, String)> {
    SCENARIOS
        .iter()
        .map(|&name| {
            let sc = builtin_scenario(name).expect("shipped");
            let targets: Vec<String> = sc.missions.iter().map(|m| format!("{:?}", &m.target[..2])).collect();
            let summary = format!(
                "{:?} N={} K={} gamma={} targets={} boxes={}",
                sc.model.kind,
                sc.controller.horizon,
                sc.controller.samples,
                sc.weights.gamma,
                targets.join(" "),
                sc.obstacles.boxes.len()
            );
            (name.to_string(), summary)
        })
        .collect()
}

/// Documented reference of every scenario parameter with the defaults of `uav-free-1`.
pub fn defaults_reference() -> String {
    const DOCS: [(&str, &str); 24] = [
        ("name", "label used for output files and stats groups"),
        ("model.kind", "double-integrator (state px,py,vx,vy; input ax,ay; dt 0.1) or simple-car (state px,py,heading; input speed,steering)"),
        ("model.wheelbase", "simple car wheelbase L"),
        ("model.dt", "simple car time step"),
        ("model.modes", "operating modes; each scales the commanded input channel-wise"),
        ("missions", "targets; the first is the primary mission, the rest are alternatives"),
        ("missions.N.target", "target state p"),
        ("missions.N.q", "diagonal state weight Q"),
        ("missions.N.r", "diagonal input weight R"),
        ("missions.N.mode", "mode the mission's horizons are predicted under"),
        ("obstacles.penalty", "stage cost added while the position is inside a box"),
        ("obstacles.boxes", "axis-aligned boxes {min = [x, y], max = [x, y]}"),
        ("controller.samples", "K, perturbed plans per step (>= 1)"),
        ("controller.horizon", "N, prediction horizon (>= 2)"),
        ("controller.temperature", "lambda, sample softmax temperature (> 0)"),
        ("controller.noise_variance", "diagonal of the sampling covariance"),
        ("controller.control_cost", "add the lambda u'S^-1 e term to sample scores"),
        ("weights.gamma", "share of weight available to alternatives, in [0, 1)"),
        ("weights.temperature", "softmax temperature of the distance-driven desired weights (> 0)"),
        ("weights.metric", "position or full-state"),
        ("initial_state", "x0"),
        ("max_steps", "closed-loop step limit"),
        ("completion_tol", "a mission is complete once the distance to its target is <= this"),
        ("execution_noise", "std of Gaussian noise added to executed inputs (0 = off)"),
    ];
    let mut out = String::from("# Scenario parameters\n#\n");
    for (key, doc) in DOCS {
        out.push_str(&format!("#   {key:<26} {doc}\n"));
    }
    out.push_str("#   abort                      optional {step, mode, policy = min-cost | nearest}\n#\n");
    out.push_str("# Experiment keys: scenario, seeds, out_dir, [[sweep]] {param, values}\n\n");
    out.push_str(&builtin_scenario("uav-free-1").expect("shipped").to_toml());
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub param: String,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub sweeps: Vec<SweepAxis>,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Worker threads for run orchestration; `None` uses all cores.
    pub workers: Option<usize>,
}

/// One point of the sweep cross product.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub label: String,
    pub scenario: ScenarioConfig,
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    scenario: toml::Value,
    #[serde(default = "default_seeds")]
    seeds: Vec<u64>,
    #[serde(default = "default_out_dir")]
    out_dir: PathBuf,
    #[serde(default)]
    sweep: Vec<RawSweep>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    param: String,
    values: Vec<toml::Value>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    /// `file:line` of the first line assigning the last segment of `param`.
    fn locate(&self, param: &str) -> String {
        let key = param.rsplit('.').find(|s| s.parse::<usize>().is_err()).unwrap_or(param);
        let line = self.text.lines().position(|l| {
            let l = l.trim_start();
            l.starts_with('#').then_some(false).unwrap_or_else(|| {
                l.split(['=', ' ']).next().is_some_and(|lhs| lhs == key || lhs.ends_with(&format!(".{key}")))
                    || l.contains(&format!("\"{param}\""))
            })
        });
        match line {
            Some(n) => format!("{}:{}", self.path.display(), n + 1),
            None => self.path.display().to_string(),
        }
    }

    fn error(&self, param: &str, msg: impl std::fmt::Display) -> Error {
        Error::Parse { path: self.path.to_path_buf(), message: format!("{} ({}): {msg}", param, self.locate(param)) }
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

/// Parses configuration text; `path` is only used for error messages.
pub fn parse_config_str(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let src = Source { path, text };
    let raw: RawExperiment = toml::from_str(text).map_err(|e| {
        let at = e.span().map(|s| text[..s.start].lines().count().max(1));
        Error::Parse {
            path: path.to_path_buf(),
            message: match at {
                Some(line) => format!("line {line}: {}", e.message()),
                None => e.message().to_string(),
            },
        }
    })?;
    let scenario_value = match &raw.scenario {
        toml::Value::String(name) => builtin_scenario(name).map_err(|e| src.error("scenario", e))?.to_value(),
        toml::Value::Table(t) => {
            let mut inline = to_json(&toml::Value::Table(t.clone()));
            let base = inline.as_object_mut().and_then(|o| o.remove("base"));
            match base {
                Some(Value::String(name)) => {
                    let mut v = builtin_scenario(&name).map_err(|e| src.error("scenario.base", e))?.to_value();
                    merge(&mut v, inline);
                    v
                }
                Some(_) => return Err(src.error("scenario.base", "must be a scenario name")),
                None => inline,
            }
        }
        _ => return Err(src.error("scenario", "must be a scenario name or a table")),
    };
    let scenario = ScenarioConfig::from_value(scenario_value).map_err(|e| {
        let msg = e.to_string();
        let field = msg.split('`').nth(1).unwrap_or("scenario").to_string();
        src.error(&field, msg)
    })?;
    scenario.build(0).map_err(|e| {
        let msg = e.to_string();
        let param = msg.trim_start_matches("configuration error: ").split(':').next().unwrap_or("scenario").to_string();
        src.error(&param, msg)
    })?;

    let mut sweeps = Vec::with_capacity(raw.sweep.len());
    for axis in raw.sweep {
        if axis.values.is_empty() {
            return Err(src.error(&axis.param, "sweep needs at least one value"));
        }
        let values: Vec<Value> = axis.values.iter().map(to_json).collect();
        for v in &values {
            apply_override(&scenario, &axis.param, v.clone())
                .and_then(|s| s.build(0))
                .map_err(|e| src.error(&axis.param, format!("sweep value {v}: {e}")))?;
        }
        sweeps.push(SweepAxis { param: axis.param, values });
    }
    if raw.seeds.is_empty() {
        return Err(src.error("seeds", "needs at least one seed"));
    }
    Ok(ExperimentConfig { scenario, sweeps, seeds: raw.seeds, out_dir: raw.out_dir, workers: None })
}

/// Experiment over one named scenario with defaults everywhere else.
pub fn named_experiment(name: &str) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        scenario: builtin_scenario(name)?,
        sweeps: Vec::new(),
        seeds: default_seeds(),
        out_dir: default_out_dir(),
        workers: None,
    })
}

fn to_json(v: &toml::Value) -> Value {
    serde_json::to_value(v).expect("TOML values map onto JSON")
}

fn merge(dst: &mut Value, src: Value) {
    match (dst, src) {
        (Value::Object(d), Value::Object(s)) => {
            for (k, v) in s {
                match d.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        d.insert(k, v);
                    }
                }
            }
        }
        (d, s) => *d = s,
    }
}

/// Parses the right-hand side of `key=value` as a TOML value, falling back to a bare string.
pub fn parse_value(text: &str) -> Value {
    #[derive(Deserialize)]
    struct Wrapper {
        v: toml::Value,
    }
    match toml::from_str::<Wrapper>(&format!("v = {text}")) {
        Ok(w) => to_json(&w.v),
        Err(_) => Value::String(text.to_string()),
    }
}

/// Copy of `scenario` with the dotted `param` set to `value`.
pub fn apply_override(scenario: &ScenarioConfig, param: &str, value: Value) -> Result<ScenarioConfig> {
    let mut root = scenario.to_value();
    set_path(&mut root, param, value)?;
    ScenarioConfig::from_value(root).map_err(|e| Error::Config(format!("{param}: {e}")))
}

fn set_path(root: &mut Value, param: &str, value: Value) -> Result<()> {
    // the optional abort table is created on demand; its schema is checked on deserialization
    let open = param == "abort" || param.starts_with("abort.");
    if open {
        root.as_object_mut().expect("table").entry("abort").or_insert(Value::Null);
    }
    let mut slot = root;
    for seg in param.split('.') {
        let fresh = slot.is_null();
        if fresh {
            *slot = Value::Object(Default::default());
        }
        slot = match slot {
            Value::Object(map) => {
                if !fresh && !open && !map.contains_key(seg) {
                    return Err(Error::Config(format!("{param}: unknown parameter")));
                }
                map.entry(seg.to_string()).or_insert(Value::Null)
            }
            Value::Array(items) => {
                let len = items.len();
                let idx: usize = seg.parse().map_err(|_| Error::Config(format!("{param}: {seg:?} is not a list index")))?;
                items.get_mut(idx).ok_or_else(|| Error::Config(format!("{param}: index {idx} out of range ({len} entries)")))?
            }
            _ => return Err(Error::Config(format!("{param}: {seg:?} does not name a field"))),
        };
    }
    *slot = value;
    Ok(())
}

impl ExperimentConfig {
    /// Applies `key=value` overrides in order and re-validates.
    pub fn with_overrides(mut self, overrides: &[(String, Value)]) -> Result<Self> {
        let mut root = self.scenario.to_value();
        for (key, value) in overrides {
            set_path(&mut root, key, value.clone())?;
        }
        self.scenario = ScenarioConfig::from_value(root).map_err(|e| Error::Config(format!("override: {e}")))?;
        self.scenario.build(0)?;
        for axis in &self.sweeps {
            for v in &axis.values {
                apply_override(&self.scenario, &axis.param, v.clone())?.build(0)?;
            }
        }
        Ok(self)
    }

    /// Cross product of sweep values (first axis slowest) times seeds.
    pub fn runs(&self) -> Result<Vec<RunSpec>> {
        let mut points: Vec<(Vec<String>, ScenarioConfig)> = vec![(Vec::new(), self.scenario.clone())];
        for axis in &self.sweeps {
            let mut next = Vec::with_capacity(points.len() * axis.values.len());
            for (labels, sc) in &points {
                for v in &axis.values {
                    let mut labels = labels.clone();
                    labels.push(format!("{}={}", axis.param, compact(v)));
                    next.push((labels, apply_override(sc, &axis.param, v.clone())?));
                }
            }
            points = next;
        }
        let mut runs = Vec::with_capacity(points.len() * self.seeds.len());
        for (labels, sc) in points {
            let label = if labels.is_empty() { sc.name.clone() } else { labels.join(",") };
            for &seed in &self.seeds {
                runs.push(RunSpec { label: label.clone(), scenario: sc.clone(), seed });
            }
        }
        Ok(runs)
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
