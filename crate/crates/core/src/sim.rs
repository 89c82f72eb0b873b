//! Closed-loop simulation: receding-horizon execution, mission completion, abort
//! injection and trace statistics.

use std::collections::HashMap;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::controller::{sample_stream, Controller, ControllerParams, ControllerState, StepDiagnostics};
use crate::cost::{MissionSet, ObstacleSet};
use crate::dynamics::{DynamicsModel, ModeId};
use crate::error::{Error, Result};
use crate::multi_horizon::MultiHorizonInput;
use crate::num::Real;
use crate::weights::{DistanceMetric, WeightLawParams, WeightVector};

/// `d(x, p) ≤ eps` under `metric`.
pub fn is_completed<T: Real>(x: &[T], p: &[T], metric: DistanceMetric, eps: T) -> bool {
    metric.distance(x, p) <= eps
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortPolicy {
    /// Alternative with the lowest branch-average cost of the current plan.
    #[default]
    MinCost,
    /// Alternative whose target is closest.
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbortPlan {
    pub step: usize,
    /// Mode the vehicle switches to.
    pub mode: ModeId,
    pub policy: AbortPolicy,
}

#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub model: DynamicsModel<T>,
    pub missions: MissionSet<T>,
    pub obstacles: ObstacleSet<T>,
    pub controller: ControllerParams<T>,
    pub weights: WeightLawParams<T>,
    pub initial_state: Vec<T>,
    pub max_steps: usize,
    pub completion_tol: T,
    pub abort: Option<AbortPlan>,
    /// Standard deviation of Gaussian noise added to each executed input channel.
    pub execution_noise: T,
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps < 1 {
            return Err(Error::Config("max_steps must be >= 1".into()));
        }
        if !(self.completion_tol > T::zero()) {
            return Err(Error::Config("completion_tol must be > 0".into()));
        }
        if !(self.execution_noise >= T::zero()) {
            return Err(Error::Config("execution_noise must be >= 0".into()));
        }
        self.model.check_state(&self.initial_state).map_err(|e| Error::Config(format!("initial_state: {e}")))?;
        if let Some(abort) = &self.abort {
            if abort.step >= self.max_steps {
                return Err(Error::Config(format!(
                    "abort step {} is beyond the last control step {}",
                    abort.step,
                    self.max_steps - 1
                )));
            }
            if self.missions.alternatives() == 0 {
                return Err(Error::Config("abort needs at least one alternative mission".into()));
            }
            self.model.mode(abort.mode).map_err(|e| Error::Config(format!("abort mode: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord<T> {
    pub state: Vec<T>,
    pub input: Vec<T>,
    pub alpha: Vec<T>,
    pub cost_mean: T,
    pub cost_std: T,
    pub step_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Completed(usize),
    MaxSteps,
    /// Aborted, then reached the chosen alternative.
    AbortedCompleted(usize),
    /// Aborted toward the given alternative but ran out of steps.
    AbortedMaxSteps(usize),
}

impl Termination {
    pub fn is_completed(self) -> bool {
        matches!(self, Termination::Completed(_) | Termination::AbortedCompleted(_))
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Completed(i) => write!(f, "completed({i})"),
            Termination::MaxSteps => write!(f, "max_steps"),
            Termination::AbortedCompleted(i) => write!(f, "aborted->completed({i})"),
            Termination::AbortedMaxSteps(i) => write!(f, "aborted->max_steps({i})"),
        }
    }
}

impl std::str::FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Contract(format!("unknown termination {s:?}"));
        if s == "max_steps" {
            return Ok(Termination::MaxSteps);
        }
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let i: usize = rest.strip_suffix(')').and_then(|v| v.parse().ok()).ok_or_else(bad)?;
        match head {
            "completed" => Ok(Termination::Completed(i)),
            "aborted->completed" => Ok(Termination::AbortedCompleted(i)),
            "aborted->max_steps" => Ok(Termination::AbortedMaxSteps(i)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbortRecord {
    pub step: usize,
    pub mode: ModeId,
    pub mission: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedLoopTrace<T> {
    pub records: Vec<StepRecord<T>>,
    pub final_state: Vec<T>,
    pub termination: Termination,
    pub abort: Option<AbortRecord>,
    /// Fingerprint of the resolved configuration; empty when run outside an experiment.
    pub config_hash: String,
}

impl<T: Real> ClosedLoopTrace<T> {
    /// Visited states `x_0 .. x_T` including the final one.
    pub fn states(&self) -> impl Iterator<Item = &[T]> {
        self.records.iter().map(|r| r.state.as_slice()).chain(std::iter::once(self.final_state.as_slice()))
    }
}

#[derive(Debug, Clone)]
pub struct ClosedLoopRun<T> {
    pub trace: ClosedLoopTrace<T>,
    pub diagnostics: Vec<StepDiagnostics<T>>,
}

struct Fallback<T> {
    controller: Controller<T>,
    mission: usize,
}

pub fn run_closed_loop<T: Real>(scenario: &Scenario<T>) -> Result<ClosedLoopRun<T>>
where
    StandardNormal: Distribution<T>,
{
    scenario.validate()?;
    let controller = Controller::new(
        scenario.controller.clone(),
        scenario.model.clone(),
        scenario.missions.clone(),
        scenario.obstacles.clone(),
        scenario.weights,
    )?;
    let metric = scenario.weights.metric;
    let tol = scenario.completion_tol;
    let missions = &scenario.missions;

    let mut x = scenario.initial_state.clone();
    let mut state = controller.initial_state(&x);
    let mut mode = missions.get(0).mode;
    let mut fallback: Option<Fallback<T>> = None;
    let mut abort = None;
    let mut records = Vec::new();
    let mut diagnostics = Vec::new();
    let mut termination = None;

    for t in 0..scenario.max_steps {
        let active = fallback.as_ref().map_or(0, |f| f.mission);
        if is_completed(&x, &missions.get(active).target, metric, tol) {
            termination = Some(finished(&fallback, active));
            break;
        }
        if let Some(plan) = scenario.abort.filter(|a| a.step == t) {
            let mission = match plan.policy {
                AbortPolicy::MinCost => {
                    let j = controller.predicted_costs(&x, &state)?;
                    argmin(&j[1..]) + 1
                }
                AbortPolicy::Nearest => {
                    let d: Vec<T> = missions.iter().skip(1).map(|m| metric.distance(&x, &m.target)).collect();
                    argmin(&d) + 1
                }
            };
            let (ctrl, warm) = fallback_controller(scenario, &state, mission, plan.mode, t)?;
            state = warm;
            fallback = Some(Fallback { controller: ctrl, mission });
            mode = plan.mode;
            abort = Some(AbortRecord { step: t, mode: plan.mode, mission });
        }

        let out = match &fallback {
            Some(f) => f.controller.step(&x, &state)?,
            None => controller.step(&x, &state)?,
        };
        let alpha = match &fallback {
            Some(f) => one_hot(missions.len(), f.mission),
            None => out.diagnostics.alpha.0.clone(),
        };
        let mut applied = out.input.clone();
        if scenario.execution_noise > T::zero() {
            let mut rng = sample_stream(scenario.controller.seed, t as u64, u64::MAX);
            for u in applied.iter_mut() {
                let z: T = StandardNormal.sample(&mut rng);
                *u += scenario.execution_noise * z;
            }
        }
        records.push(StepRecord {
            state: x.clone(),
            input: applied.clone(),
            alpha,
            cost_mean: out.diagnostics.cost_mean,
            cost_std: out.diagnostics.cost_std,
            step_seconds: out.diagnostics.elapsed.as_secs_f64(),
        });
        x = scenario.model.step(&x, &applied, mode)?;
        state = out.state;
        diagnostics.push(out.diagnostics);
    }

    let termination = termination.unwrap_or_else(|| {
        let active = fallback.as_ref().map_or(0, |f| f.mission);
        if is_completed(&x, &missions.get(active).target, metric, tol) {
            finished(&fallback, active)
        } else if fallback.is_some() {
            Termination::AbortedMaxSteps(active)
        } else {
            Termination::MaxSteps
        }
    });
    Ok(ClosedLoopRun {
        trace: ClosedLoopTrace { records, final_state: x, termination, abort, config_hash: String::new() },
        diagnostics,
    })
}

fn finished<T>(fallback: &Option<Fallback<T>>, active: usize) -> Termination {
    if fallback.is_some() {
        Termination::AbortedCompleted(active)
    } else {
        Termination::Completed(active)
    }
}

/// Single-mission controller toward alternative `mission`, warm-started from the
/// branch that aborts right now.
fn fallback_controller<T: Real>(
    scenario: &Scenario<T>,
    state: &ControllerState<T>,
    mission: usize,
    mode: ModeId,
    step: usize,
) -> Result<(Controller<T>, ControllerState<T>)>
where
    StandardNormal: Distribution<T>,
{
    let target = scenario.missions.get(mission).clone().with_mode(mode);
    let missions = MissionSet::new(vec![target], scenario.model.state_dim(), scenario.model.input_dim())?;
    let mut params = scenario.controller.clone();
    params.alternatives = 0;
    let weights = WeightLawParams::new(T::zero(), scenario.weights.temperature, scenario.weights.metric)?;
    let ctrl = Controller::new(params, scenario.model.clone(), missions, scenario.obstacles.clone(), weights)?;
    let branch = state.inputs.branch_view(mission, 0)?.to_vec();
    let inputs = MultiHorizonInput::from_parts(&branch, &[])?;
    Ok((ctrl, ControllerState { inputs, alpha: WeightVector::primary_only(1), step: step as u64 }))
}

fn one_hot<T: Real>(len: usize, i: usize) -> Vec<T> {
    let mut v = vec![T::zero(); len];
    v[i] = T::one();
    v
}

fn argmin<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

/// Aggregates of one trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub steps: usize,
    pub completed: bool,
    pub cost_mean: f64,
    pub cost_std: f64,
    pub step_seconds: f64,
    pub frequency_hz: f64,
    pub path_length: f64,
    /// Closest approach to each alternative target.
    pub min_distance: Vec<f64>,
}

pub fn summarize<T: Real>(trace: &ClosedLoopTrace<T>, alternatives: &[Vec<T>], metric: DistanceMetric) -> TraceSummary {
    let steps = trace.records.len();
    let mean = |f: &dyn Fn(&StepRecord<T>) -> f64| {
        if steps == 0 {
            f64::NAN
        } else {
            trace.records.iter().map(f).sum::<f64>() / steps as f64
        }
    };
    let step_seconds = mean(&|r| r.step_seconds);
    let states: Vec<&[T]> = trace.states().collect();
    let path_length = states
        .windows(2)
        .map(|w| DistanceMetric::Position.distance(w[0], w[1]).to_f64().unwrap_or(f64::NAN))
        .sum();
    let min_distance = alternatives
        .iter()
        .map(|p| {
            states
                .iter()
                .map(|x| metric.distance(x, p).to_f64().unwrap_or(f64::NAN))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    TraceSummary {
        steps,
        completed: trace.termination.is_completed(),
        cost_mean: mean(&|r| r.cost_mean.to_f64().unwrap_or(f64::NAN)),
        cost_std: mean(&|r| r.cost_std.to_f64().unwrap_or(f64::NAN)),
        step_seconds,
        frequency_hz: 1.0 / step_seconds,
        path_length,
        min_distance,
    }
}

/// Per-group means of [`TraceSummary`] fields.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRow {
    pub group: String,
    pub runs: usize,
    pub completed: usize,
    pub steps: f64,
    pub cost_mean: f64,
    pub cost_std: f64,
    pub step_seconds: f64,
    pub frequency_hz: f64,
    pub path_length: f64,
    pub min_distance: Vec<f64>,
}

/// Groups traces by label, in order of first appearance, and averages their summaries.
pub fn analyze<T: Real>(
    traces: &[(String, &ClosedLoopTrace<T>)],
    alternatives: &[Vec<T>],
    metric: DistanceMetric,
) -> Result<Vec<StatsRow>> {
    if traces.is_empty() {
        return Err(Error::Contract("analyze needs at least one trace".into()));
    }
    let mut order: Vec<&str> = Vec::new();
    let mut groups: HashMap<&str, Vec<TraceSummary>> = HashMap::new();
    for (label, trace) in traces {
        let entry = groups.entry(label.as_str()).or_insert_with(|| {
            order.push(label.as_str());
            Vec::new()
        });
        entry.push(summarize(trace, alternatives, metric));
    }
    Ok(order.into_iter().map(|label| aggregate(label, &groups[label])).collect())
}

fn aggregate(label: &str, runs: &[TraceSummary]) -> StatsRow {
    let mean = |f: &dyn Fn(&TraceSummary) -> f64| {
        let vals: Vec<f64> = runs.iter().map(f).filter(|v| !v.is_nan()).collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let alts = runs.first().map_or(0, |r| r.min_distance.len());
    StatsRow {
        group: label.to_string(),
        runs: runs.len(),
        completed: runs.iter().filter(|r| r.completed).count(),
        steps: mean(&|r| r.steps as f64),
        cost_mean: mean(&|r| r.cost_mean),
        cost_std: mean(&|r| r.cost_std),
        step_seconds: mean(&|r| r.step_seconds),
        frequency_hz: mean(&|r| r.frequency_hz),
        path_length: mean(&|r| r.path_length),
        min_distance: (0..alts).map(|i| mean(&|r| r.min_distance[i])).collect(),
    }
}
