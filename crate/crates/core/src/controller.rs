//! Sampling-based optimizer over the multi-horizon input.
//!
//! Each step shifts the previous plan, reschedules the mission weights against the
//! shifted plan, perturbs every stored input with Gaussian noise, scores the `K`
//! perturbed plans by the weighted cost vector and moves the plan by the
//! softmax-weighted average of the noise.
//!
//! Noise for sample `q` at step `t` comes from its own ChaCha stream keyed by
//! `(seed, t)` with stream id `q`, so results do not depend on how samples are
//! spread over worker threads.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::cost::{cholesky, cost_vector, cost_vector_into, tail_cost_vector, CostScratch, MissionSet, ObstacleSet, SquareMatrix};
use crate::dynamics::DynamicsModel;
use crate::error::{Error, Result};
use crate::multi_horizon::{expand, expand_into, resolve_scales, Layout, MultiHorizonInput, MultiHorizonTrajectory};
use crate::num::{dot, Real};
use crate::weights::{desired_weights, gibbs, update_weights, WeightLawParams, WeightVector};

/// Sampling covariance stored as its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCovariance<T> {
    dim: usize,
    factor: Vec<T>,
    precision: Option<SquareMatrix<T>>,
}

impl<T: Real> NoiseCovariance<T> {
    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(&SquareMatrix::identity(dim)).expect("identity is positive definite")
    }

    pub fn from_matrix(sigma: &SquareMatrix<T>) -> Result<Self> {
        if !sigma.is_symmetric() {
            return Err(Error::Config("noise covariance must be symmetric".into()));
        }
        let factor =
            cholesky(sigma).ok_or_else(|| Error::Config("noise covariance must be positive definite".into()))?;
        let precision = Some(invert_from_factor(&factor, sigma.dim()));
        Ok(Self { dim: sigma.dim(), factor, precision })
    }

    /// Degenerate zero covariance: every sample equals the shifted plan.
    pub fn zero(dim: usize) -> Self {
        Self { dim, factor: vec![T::zero(); dim * dim], precision: None }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Lower-triangular factor `L` with `Σ = LLᵀ`, row-major.
    pub fn factor(&self) -> &[T] {
        &self.factor
    }

    #[inline]
    fn colour(&self, z: &[T], out: &mut [T]) {
        let n = self.dim;
        for r in 0..n {
            let mut acc = T::zero();
            for c in 0..=r {
                acc += self.factor[r * n + c] * z[c];
            }
            out[r] = acc;
        }
    }
}

fn invert_from_factor<T: Real>(l: &[T], n: usize) -> SquareMatrix<T> {
    // solve L Lᵀ X = I column by column
    let mut rows = vec![vec![T::zero(); n]; n];
    for col in 0..n {
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut s = if i == col { T::one() } else { T::zero() };
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        for i in 0..n {
            rows[i][col] = x[i];
        }
    }
    SquareMatrix::from_rows(&rows).expect("square")
}

#[derive(Debug, Clone)]
pub struct ControllerParams<T> {
    /// `K`, perturbed plans per step.
    pub samples: usize,
    /// `N`.
    pub horizon: usize,
    /// `m`.
    pub alternatives: usize,
    pub noise: NoiseCovariance<T>,
    /// Softmax temperature `λ`.
    pub temperature: T,
    pub seed: u64,
    /// Dedicated thread count for sample evaluation; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
    /// Adds `λ Σ ûᵀΣ⁻¹ε` to every sample score.
    pub control_cost: bool,
}

impl<T: Real> ControllerParams<T> {
    pub fn new(samples: usize, horizon: usize, alternatives: usize, noise: NoiseCovariance<T>, temperature: T, seed: u64) -> Result<Self> {
        let params = Self { samples, horizon, alternatives, noise, temperature, seed, workers: None, control_cost: false };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Config("sample count K must be >= 1".into()));
        }
        if !(self.temperature > T::zero()) {
            return Err(Error::Config(format!("temperature must be > 0, got {}", self.temperature)));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        Layout::new(self.horizon, self.alternatives)?;
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.horizon, self.alternatives).expect("validated")
    }
}

/// Deterministic random stream for sample `sample` of control step `step`.
pub fn sample_stream(seed: u64, step: u64, sample: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&step.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(sample);
    rng
}

/// `K` flat noise vectors in the multi-horizon storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBatch<T> {
    samples: usize,
    per_sample: usize,
    data: Vec<T>,
}

impl<T: Real> NoiseBatch<T> {
    pub fn from_samples(samples: Vec<Vec<T>>) -> Result<Self> {
        let per_sample = samples.first().map_or(0, Vec::len);
        if samples.iter().any(|s| s.len() != per_sample) {
            return Err(Error::Contract("noise samples must share one length".into()));
        }
        Ok(Self { samples: samples.len(), per_sample, data: samples.concat() })
    }

    pub fn zeros(samples: usize, per_sample: usize) -> Self {
        Self { samples, per_sample, data: vec![T::zero(); samples * per_sample] }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Scalars per sample.
    pub fn sample_len(&self) -> usize {
        self.per_sample
    }

    pub fn sample(&self, q: usize) -> &[T] {
        &self.data[q * self.per_sample..(q + 1) * self.per_sample]
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }
}

/// Draws `K` noise vectors of `elements` vectors each for control step `step`.
pub fn sample_noise<T: Real>(noise: &NoiseCovariance<T>, samples: usize, elements: usize, seed: u64, step: u64) -> NoiseBatch<T>
where
    StandardNormal: Distribution<T>,
{
    let d = noise.dim();
    let per_sample = elements * d;
    let mut data = vec![T::zero(); samples * per_sample];
    if per_sample > 0 {
        data.par_chunks_mut(per_sample).enumerate().for_each(|(q, chunk)| {
            let mut rng = sample_stream(seed, step, q as u64);
            let mut z = vec![T::zero(); d];
            for out in chunk.chunks_mut(d) {
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(&mut rng);
                }
                noise.colour(&z, out);
            }
        });
    }
    NoiseBatch { samples, per_sample, data }
}

/// Softmax of `−cost/λ` shifted by the smallest cost.
pub fn softmax_weights<T: Real>(costs: &[T], temperature: T) -> Vec<T> {
    gibbs(costs, temperature)
}

/// `Û + Σ_q w_q ε_q`, summed in ascending `q`.
pub fn mppi_update<T: Real>(u_hat: &MultiHorizonInput<T>, noises: &NoiseBatch<T>, weights: &[T]) -> Result<MultiHorizonInput<T>> {
    if weights.len() != noises.samples() || noises.sample_len() != u_hat.as_flat().len() {
        return Err(Error::Contract(format!(
            "update needs {} weights for {} samples of length {}",
            weights.len(),
            noises.samples(),
            u_hat.as_flat().len()
        )));
    }
    let mut correction = vec![T::zero(); u_hat.as_flat().len()];
    for (q, &w) in weights.iter().enumerate() {
        if w == T::zero() {
            continue;
        }
        for (acc, &e) in correction.iter_mut().zip(noises.sample(q)) {
            *acc += w * e;
        }
    }
    let mut out = u_hat.clone();
    for (u, c) in out.as_flat_mut().iter_mut().zip(correction) {
        *u += c;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerState<T> {
    /// Optimized plan of the previous step.
    pub inputs: MultiHorizonInput<T>,
    pub alpha: WeightVector<T>,
    /// Index of the next control step; keys the noise streams.
    pub step: u64,
}

#[derive(Debug, Clone)]
pub struct StepDiagnostics<T> {
    pub alpha_desired: WeightVector<T>,
    pub alpha_prev: WeightVector<T>,
    pub alpha: WeightVector<T>,
    /// `Ĵ − F̂` of the shifted previous plan, the descent direction of the weight update.
    pub descent: Vec<T>,
    pub cost_mean: T,
    pub cost_std: T,
    pub elapsed: Duration,
    /// Horizons simulated (primary plus every branch) across all samples.
    pub rollouts: usize,
    /// Dynamics evaluations across all samples.
    pub simulated_steps: usize,
}

#[derive(Debug, Clone)]
pub struct StepOutput<T> {
    pub input: Vec<T>,
    pub state: ControllerState<T>,
    pub diagnostics: StepDiagnostics<T>,
}

struct Scratch<T> {
    inputs: MultiHorizonInput<T>,
    traj: MultiHorizonTrajectory<T>,
    costs: CostScratch<T>,
    j: Vec<T>,
}

/// One iteration of the multi-horizon optimizer from measured state `x_t`.
#[allow(clippy::too_many_arguments)]
pub fn step_3m<T: Real>(
    x_t: &[T],
    ctrl: &ControllerState<T>,
    params: &ControllerParams<T>,
    model: &DynamicsModel<T>,
    missions: &MissionSet<T>,
    obstacles: &ObstacleSet<T>,
    weight_law: &WeightLawParams<T>,
) -> Result<StepOutput<T>>
where
    StandardNormal: Distribution<T>,
{
    let started = Instant::now();
    check_consistency(params, model, missions)?;
    model.check_state(x_t)?;
    if ctrl.inputs.layout() != params.layout() || ctrl.alpha.len() != missions.len() {
        return Err(Error::Contract("controller state does not match the controller parameters".into()));
    }
    let modes = missions.modes();
    let layout = params.layout();

    let alpha_desired = desired_weights(x_t, missions, weight_law);
    let u_hat = ctrl.inputs.shift();

    let predicted = expand(model, x_t, &u_hat, &modes)?;
    let j_hat = cost_vector(&predicted, &u_hat, missions, obstacles)?;
    let f_hat = tail_cost_vector(&predicted, &u_hat, missions, obstacles)?;
    let alpha = update_weights(&ctrl.alpha, &alpha_desired, &j_hat, &f_hat)?;

    let elements = u_hat.element_count();
    let noises = sample_noise(&params.noise, params.samples, elements, params.seed, ctrl.step);

    let scales = resolve_scales(model, &u_hat, &modes)?;
    let control_term = match (&params.noise.precision, params.control_cost) {
        (Some(p), true) => Some(p),
        _ => None,
    };
    let scored: Vec<(T, usize)> = (0..params.samples)
        .into_par_iter()
        .map_init(
            || Scratch {
                inputs: u_hat.clone(),
                traj: MultiHorizonTrajectory::zeros(layout, model.state_dim()),
                costs: CostScratch::default(),
                j: vec![T::zero(); missions.len()],
            },
            |s, q| {
                let eps = noises.sample(q);
                for ((dst, &base), &e) in s.inputs.as_flat_mut().iter_mut().zip(u_hat.as_flat()).zip(eps) {
                    *dst = base + e;
                }
                expand_into(model, x_t, &s.inputs, &scales, &mut s.traj);
                cost_vector_into(&s.traj, &s.inputs, missions, obstacles, &mut s.costs, &mut s.j);
                let mut score = dot(&alpha.0, &s.j);
                if let Some(precision) = control_term {
                    score += params.temperature * control_cost(precision, u_hat.as_flat(), eps);
                }
                (score, s.traj.simulated_steps())
            },
        )
        .collect();
    let costs: Vec<T> = scored.iter().map(|(c, _)| *c).collect();
    let simulated_steps = scored.iter().map(|(_, n)| n).sum();

    let weights = softmax_weights(&costs, params.temperature);
    let inputs = mppi_update(&u_hat, &noises, &weights)?;
    let input = inputs.primary_input(0).to_vec();

    let k = T::from_count(costs.len());
    let cost_mean = costs.iter().copied().sum::<T>() / k;
    let cost_std = (costs.iter().map(|&c| (c - cost_mean) * (c - cost_mean)).sum::<T>() / k).sqrt();

    let diagnostics = StepDiagnostics {
        alpha_desired,
        alpha_prev: ctrl.alpha.clone(),
        descent: j_hat.sub(&f_hat).0,
        alpha: alpha.clone(),
        cost_mean,
        cost_std,
        elapsed: started.elapsed(),
        rollouts: params.samples * (1 + layout.alternatives() * layout.branches()),
        simulated_steps,
    };
    Ok(StepOutput { input, state: ControllerState { inputs, alpha, step: ctrl.step + 1 }, diagnostics })
}

fn control_cost<T: Real>(precision: &SquareMatrix<T>, u: &[T], eps: &[T]) -> T {
    let d = precision.dim();
    let mut total = T::zero();
    for (uk, ek) in u.chunks(d).zip(eps.chunks(d)) {
        for r in 0..d {
            for c in 0..d {
                total += uk[r] * precision.get(r, c) * ek[c];
            }
        }
    }
    total
}

fn check_consistency<T: Real>(params: &ControllerParams<T>, model: &DynamicsModel<T>, missions: &MissionSet<T>) -> Result<()> {
    params.validate()?;
    if missions.alternatives() != params.alternatives {
        return Err(Error::Config(format!(
            "{} alternative missions configured but the controller expects {}",
            missions.alternatives(),
            params.alternatives
        )));
    }
    if params.noise.dim() != model.input_dim() {
        return Err(Error::Config(format!(
            "noise covariance is {0}x{0}, model input dimension is {1}",
            params.noise.dim(),
            model.input_dim()
        )));
    }
    for m in missions.iter() {
        model.mode(m.mode)?;
        if m.target.len() != model.state_dim() {
            return Err(Error::Config("mission target dimension does not match the model state".into()));
        }
    }
    Ok(())
}

/// Owns the problem definition and, optionally, a dedicated worker pool.
#[derive(Clone)]
pub struct Controller<T> {
    params: ControllerParams<T>,
    model: DynamicsModel<T>,
    missions: MissionSet<T>,
    obstacles: ObstacleSet<T>,
    weight_law: WeightLawParams<T>,
    pool: Option<Arc<rayon::ThreadPool>>,
}

impl<T: Real> Controller<T>
where
    StandardNormal: Distribution<T>,
{
    pub fn new(
        params: ControllerParams<T>,
        model: DynamicsModel<T>,
        missions: MissionSet<T>,
        obstacles: ObstacleSet<T>,
        weight_law: WeightLawParams<T>,
    ) -> Result<Self> {
        check_consistency(&params, &model, &missions)?;
        let pool = match params.workers {
            Some(n) => Some(Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?,
            )),
            None => None,
        };
        Ok(Self { params, model, missions, obstacles, weight_law, pool })
    }

    pub fn params(&self) -> &ControllerParams<T> {
        &self.params
    }

    pub fn model(&self) -> &DynamicsModel<T> {
        &self.model
    }

    pub fn missions(&self) -> &MissionSet<T> {
        &self.missions
    }

    pub fn obstacles(&self) -> &ObstacleSet<T> {
        &self.obstacles
    }

    pub fn weight_law(&self) -> &WeightLawParams<T> {
        &self.weight_law
    }

    /// Zero initial plan with weights set to their desired value at `x0`.
    pub fn initial_state(&self, x0: &[T]) -> ControllerState<T> {
        let inputs =
            MultiHorizonInput::zeros(self.params.horizon, self.params.alternatives, self.model.input_dim()).expect("validated");
        ControllerState { inputs, alpha: desired_weights(x0, &self.missions, &self.weight_law), step: 0 }
    }

    pub fn step(&self, x_t: &[T], state: &ControllerState<T>) -> Result<StepOutput<T>> {
        let run = || step_3m(x_t, state, &self.params, &self.model, &self.missions, &self.obstacles, &self.weight_law);
        match &self.pool {
            Some(pool) => pool.install(run),
            None => run(),
        }
    }

    /// Cost vector of the shifted plan of `state` re-simulated from `x_t`.
    pub fn predicted_costs(&self, x_t: &[T], state: &ControllerState<T>) -> Result<Vec<T>> {
        let u_hat = state.inputs.shift();
        let traj = expand(&self.model, x_t, &u_hat, &self.missions.modes())?;
        Ok(cost_vector(&traj, &u_hat, &self.missions, &self.obstacles)?.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{mission_cost, Mission};
    use crate::weights::DistanceMetric;

    fn uav_problem(samples: usize, horizon: usize, gamma: f64, noise: NoiseCovariance<f64>) -> Controller<f64> {
        let missions = MissionSet::new(
            [[10.0, 10.0, 0.0, 0.0], [2.0, 6.0, 0.0, 0.0]].iter().map(|t| Mission::new(t.to_vec(), 2)).collect(),
            4,
            2,
        )
        .unwrap();
        let params = ControllerParams::new(samples, horizon, 1, noise, 0.5, 7).unwrap();
        Controller::new(
            params,
            DynamicsModel::double_integrator(),
            missions,
            ObstacleSet::none(),
            WeightLawParams::new(gamma, 1.0, DistanceMetric::Position).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn noise_statistics_identity_covariance() {
        let batch = sample_noise(&NoiseCovariance::<f64>::identity(2), 500, 100, 3, 0);
        let xs = batch.as_flat();
        let n = xs.len() as f64;
        assert_eq!(xs.len(), 100_000);
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 4.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
        let pairs = xs.chunks(2);
        let cov = pairs.map(|p| p[0] * p[1]).sum::<f64>() / (n / 2.0);
        assert!(cov.abs() < 4.0 / (n / 2.0).sqrt(), "cov {cov}");
    }

    #[test]
    fn correlated_noise_follows_covariance() {
        let sigma = SquareMatrix::from_rows(&[vec![2.0, 0.6], vec![0.6, 0.5]]).unwrap();
        let batch = sample_noise(&NoiseCovariance::from_matrix(&sigma).unwrap(), 2000, 50, 1, 4);
        let n = (batch.as_flat().len() / 2) as f64;
        let (mut s00, mut s01, mut s11) = (0.0, 0.0, 0.0);
        for p in batch.as_flat().chunks(2) {
            s00 += p[0] * p[0];
            s01 += p[0] * p[1];
            s11 += p[1] * p[1];
        }
        assert!((s00 / n - 2.0).abs() < 0.05 && (s01 / n - 0.6).abs() < 0.03 && (s11 / n - 0.5).abs() < 0.02);
        assert!(NoiseCovariance::from_matrix(&SquareMatrix::diagonal(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn noise_is_deterministic_across_pools() {
        let noise = NoiseCovariance::<f64>::identity(2);
        let a = sample_noise(&noise, 37, 12, 99, 5);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let b = pool.install(|| sample_noise(&noise, 37, 12, 99, 5));
        assert_eq!(a, b);
        // sample q is a function of (seed, step, q) alone
        let c = sample_noise(&noise, 5, 12, 99, 5);
        assert_eq!(a.sample(3), c.sample(3));
        assert_ne!(a.sample(3), sample_noise(&noise, 5, 12, 99, 6).sample(3));
    }

    #[test]
    fn softmax_examples() {
        assert_eq!(softmax_weights(&[3.0, 3.0, 3.0, 3.0], 0.5), vec![0.25; 4]);
        assert_eq!(softmax_weights(&[42.0], 0.5), vec![1.0]);
        let w = softmax_weights(&[0.0, 0.5], 0.5);
        let e = (-1.0f64).exp();
        assert!((w[0] - 1.0 / (1.0 + e)).abs() < 1e-15 && (w[1] - e / (1.0 + e)).abs() < 1e-15);
        assert!((w[0] - 0.7311).abs() < 1e-4);
        let shifted = softmax_weights(&[1e6, 1e6 + 0.5], 0.5);
        assert!((shifted[0] - w[0]).abs() < 1e-9);
    }

    #[test]
    fn mppi_update_examples() {
        let u = MultiHorizonInput::<f64>::from_parts(&[vec![1.0, 2.0], vec![3.0, 4.0]], &[vec![vec![vec![5.0, 6.0]]]]).unwrap();
        let e1 = vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6];
        let e2: Vec<f64> = e1.iter().map(|x| -x).collect();
        let batch = NoiseBatch::from_samples(vec![e1.clone(), e2]).unwrap();
        let degenerate = mppi_update(&u, &batch, &[1.0, 0.0]).unwrap();
        let want: Vec<f64> = u.as_flat().iter().zip(&e1).map(|(a, b)| a + b).collect();
        assert_eq!(degenerate.as_flat(), &want[..]);
        assert_eq!(mppi_update(&u, &batch, &[0.5, 0.5]).unwrap(), u);
        assert_eq!(mppi_update(&u, &NoiseBatch::zeros(3, 6), &[0.2, 0.3, 0.5]).unwrap(), u);
        assert!(mppi_update(&u, &batch, &[1.0]).is_err());
    }

    #[test]
    fn zero_noise_step_keeps_shifted_plan() {
        let ctrl = uav_problem(1, 3, 0.5, NoiseCovariance::zero(2));
        let mut state = ctrl.initial_state(&[0.0; 4]);
        state.inputs = MultiHorizonInput::from_parts(
            &[vec![1.0, 0.0], vec![0.5, 0.5], vec![0.0, 1.0]],
            &[vec![vec![vec![2.0, 2.0], vec![3.0, 3.0]], vec![vec![4.0, 4.0]]]],
        )
        .unwrap();
        let out = ctrl.step(&[0.0; 4], &state).unwrap();
        assert_eq!(out.state.inputs, state.inputs.shift());
        assert_eq!(out.input, vec![0.5, 0.5]);
        assert_eq!(out.diagnostics.cost_std, 0.0);
    }

    /// Single step on N = 2, m = 1 with K = 2 and known noise, recomputed by hand.
    #[test]
    fn single_step_matches_hand_computation() {
        let ctrl = uav_problem(2, 2, 0.5, NoiseCovariance::identity(2));
        let x0 = [0.0, 0.0, 0.0, 0.0];
        let state = ctrl.initial_state(&x0);
        let out = ctrl.step(&x0, &state).unwrap();

        // independent walk-through
        let model = DynamicsModel::<f64>::double_integrator();
        let none = ObstacleSet::none();
        let noise = sample_noise(&NoiseCovariance::identity(2), 2, 3, 7, 0);
        let alpha = &out.diagnostics.alpha.0;
        let mut scores = Vec::new();
        for q in 0..2 {
            let e = noise.sample(q);
            let primary = vec![vec![e[0], e[1]], vec![e[2], e[3]]];
            let branch = vec![vec![e[0], e[1]], vec![e[4], e[5]]];
            let j0 = mission_cost(ctrl.missions().get(0), &model.rollout(&x0, &primary, 0).unwrap(), &primary, &none).unwrap();
            let j1 = mission_cost(ctrl.missions().get(1), &model.rollout(&x0, &branch, 0).unwrap(), &branch, &none).unwrap();
            scores.push(alpha[0] * j0 + alpha[1] * j1);
        }
        let lo = scores[0].min(scores[1]);
        let w0 = (-(scores[0] - lo) / 0.5).exp();
        let w1 = (-(scores[1] - lo) / 0.5).exp();
        let (w0, w1) = (w0 / (w0 + w1), w1 / (w0 + w1));
        let u0 = [w0 * noise.sample(0)[0] + w1 * noise.sample(1)[0], w0 * noise.sample(0)[1] + w1 * noise.sample(1)[1]];
        assert!((out.input[0] - u0[0]).abs() < 1e-12 && (out.input[1] - u0[1]).abs() < 1e-12);
        assert!((out.diagnostics.cost_mean - (scores[0] + scores[1]) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn instrumentation_counts_every_simulated_step() {
        let ctrl = uav_problem(13, 6, 0.66, NoiseCovariance::identity(2));
        let out = ctrl.step(&[0.0; 4], &ctrl.initial_state(&[0.0; 4])).unwrap();
        assert_eq!(out.diagnostics.rollouts, 13 * (1 + 5));
        assert_eq!(out.diagnostics.simulated_steps, 13 * crate::multi_horizon::dims(6, 1).unwrap().input_count);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut a = uav_problem(64, 5, 0.66, NoiseCovariance::identity(2));
        let x0 = [0.0; 4];
        let mut params = a.params().clone();
        params.workers = Some(3);
        let b = Controller::new(params, a.model.clone(), a.missions.clone(), a.obstacles.clone(), a.weight_law).unwrap();
        let (mut sa, mut sb) = (a.initial_state(&x0), b.initial_state(&x0));
        for _ in 0..5 {
            let oa = a.step(&x0, &sa).unwrap();
            let ob = b.step(&x0, &sb).unwrap();
            assert_eq!(oa.input, ob.input);
            assert_eq!(oa.state, ob.state);
            sa = oa.state;
            sb = ob.state;
        }
        a.params.control_cost = true;
        assert!(a.step(&x0, &sa).is_ok());
    }

    #[test]
    fn rejects_inconsistent_setup() {
        assert!(ControllerParams::new(0, 10, 2, NoiseCovariance::<f64>::identity(2), 0.5, 0).is_err());
        assert!(ControllerParams::new(10, 1, 2, NoiseCovariance::<f64>::identity(2), 0.5, 0).is_err());
        assert!(ControllerParams::new(10, 10, 2, NoiseCovariance::<f64>::identity(2), 0.0, 0).is_err());
        let params = ControllerParams::new(10, 5, 2, NoiseCovariance::<f64>::identity(2), 0.5, 0).unwrap();
        let one = MissionSet::new(vec![Mission::new(vec![0.0; 4], 2)], 4, 2).unwrap();
        let law = WeightLawParams::new(0.5, 1.0, DistanceMetric::Position).unwrap();
        assert!(Controller::new(params, DynamicsModel::double_integrator(), one, ObstacleSet::none(), law).is_err());
    }
}
