//! Triangular multi-horizon inputs and the trajectories they generate.
//!
//! The primary horizon holds `N` inputs `u_0..u_{N-1}`. For every alternative
//! mission `i` and abort index `p` (the primary mission is abandoned after
//! `u_p`), a tail of `N-p-1` inputs completes an `N`-long branch. Only the
//! independent elements are stored, in one flat buffer ordered primary first,
//! then tails by mission, abort index and step. That ordering is also the
//! index convention for sampled noise.

use crate::dynamics::{DynamicsModel, ModeId};
use crate::error::{Error, Result};
use crate::num::Real;

/// Element counts (vectors, not scalars) of the input and state families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HorizonDims {
    pub input_count: usize,
    pub state_count: usize,
}

/// `N + m·N(N−1)/2` inputs and one more state.
pub fn dims(horizon: usize, alternatives: usize) -> Result<HorizonDims> {
    if horizon < 2 {
        return Err(Error::Config(format!("horizon must be at least 2, got {horizon}")));
    }
    let tails = alternatives * horizon * (horizon - 1) / 2;
    Ok(HorizonDims { input_count: horizon + tails, state_count: horizon + 1 + tails })
}

/// Index algebra of the triangular storage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    horizon: usize,
    alternatives: usize,
}

impl Layout {
    pub fn new(horizon: usize, alternatives: usize) -> Result<Self> {
        dims(horizon, alternatives)?;
        Ok(Self { horizon, alternatives })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn alternatives(&self) -> usize {
        self.alternatives
    }

    pub fn dims(&self) -> HorizonDims {
        dims(self.horizon, self.alternatives).expect("validated at construction")
    }

    /// Number of branches per alternative mission.
    pub fn branches(&self) -> usize {
        self.horizon - 1
    }

    fn per_mission(&self) -> usize {
        self.horizon * (self.horizon - 1) / 2
    }

    /// Length of the tail for abort index `p`.
    pub fn tail_len(&self, p: usize) -> usize {
        self.horizon - p - 1
    }

    /// Offset (in elements, past the shared block) of tail `(i, p)`.
    fn tail_offset(&self, mission: usize, p: usize) -> usize {
        let within = p * (self.horizon - 1) - p * p.saturating_sub(1) / 2;
        (mission - 1) * self.per_mission() + within
    }

    /// Flat element index of tail input `(i, p)` at absolute step `q`.
    pub fn tail_input_index(&self, mission: usize, p: usize, q: usize) -> usize {
        self.horizon + self.tail_offset(mission, p) + (q - p - 1)
    }

    pub fn check_branch(&self, mission: usize, p: usize) -> Result<()> {
        if mission == 0 || mission > self.alternatives || p + 2 > self.horizon {
            return Err(Error::Contract(format!(
                "branch ({mission}, {p}) out of range for N={}, m={}",
                self.horizon, self.alternatives
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiHorizonInput<T> {
    layout: Layout,
    input_dim: usize,
    data: Vec<T>,
}

impl<T: Real> MultiHorizonInput<T> {
    pub fn zeros(horizon: usize, alternatives: usize, input_dim: usize) -> Result<Self> {
        let layout = Layout::new(horizon, alternatives)?;
        let len = layout.dims().input_count * input_dim;
        Ok(Self { layout, input_dim, data: vec![T::zero(); len] })
    }

    /// Builds from nested parts: `tails[i-1][p]` is the tail for mission `i`, abort index `p`.
    pub fn from_parts(primary: &[Vec<T>], tails: &[Vec<Vec<Vec<T>>>]) -> Result<Self> {
        let horizon = primary.len();
        let input_dim = primary.first().map_or(0, Vec::len);
        let mut out = Self::zeros(horizon, tails.len(), input_dim)?;
        for (k, u) in primary.iter().enumerate() {
            if u.len() != input_dim {
                return Err(Error::dims("primary input", input_dim, u.len()));
            }
            out.primary_input_mut(k).copy_from_slice(u);
        }
        for (i, mission_tails) in tails.iter().enumerate() {
            if mission_tails.len() != horizon - 1 {
                return Err(Error::dims("tails per mission", horizon - 1, mission_tails.len()));
            }
            for (p, tail) in mission_tails.iter().enumerate() {
                if tail.len() != out.layout.tail_len(p) {
                    return Err(Error::dims("tail length", out.layout.tail_len(p), tail.len()));
                }
                for (j, u) in tail.iter().enumerate() {
                    if u.len() != input_dim {
                        return Err(Error::dims("tail input", input_dim, u.len()));
                    }
                    let idx = out.layout.tail_input_index(i + 1, p, p + 1 + j);
                    out.element_mut(idx).copy_from_slice(u);
                }
            }
        }
        Ok(out)
    }

    /// Wraps a flat buffer in the storage order described at module level.
    pub fn from_flat(layout: Layout, input_dim: usize, data: Vec<T>) -> Result<Self> {
        let expected = layout.dims().input_count * input_dim;
        if data.len() != expected {
            return Err(Error::dims("flat input buffer", expected, data.len()));
        }
        Ok(Self { layout, input_dim, data })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn horizon(&self) -> usize {
        self.layout.horizon
    }

    pub fn alternatives(&self) -> usize {
        self.layout.alternatives
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Number of stored input vectors.
    pub fn element_count(&self) -> usize {
        self.data.len() / self.input_dim
    }

    pub fn element(&self, idx: usize) -> &[T] {
        &self.data[idx * self.input_dim..(idx + 1) * self.input_dim]
    }

    fn element_mut(&mut self, idx: usize) -> &mut [T] {
        &mut self.data[idx * self.input_dim..(idx + 1) * self.input_dim]
    }

    /// The primary horizon as a flat `N·n_u` slice.
    pub fn primary(&self) -> &[T] {
        &self.data[..self.layout.horizon * self.input_dim]
    }

    pub fn primary_input(&self, k: usize) -> &[T] {
        self.element(k)
    }

    pub fn primary_input_mut(&mut self, k: usize) -> &mut [T] {
        assert!(k < self.layout.horizon);
        self.element_mut(k)
    }

    /// Tail `(i, p)` as a flat slice of `N-p-1` inputs.
    pub fn tail(&self, mission: usize, p: usize) -> Result<&[T]> {
        self.layout.check_branch(mission, p)?;
        let start = self.layout.tail_input_index(mission, p, p + 1) * self.input_dim;
        Ok(&self.data[start..start + self.layout.tail_len(p) * self.input_dim])
    }

    pub fn tail_mut(&mut self, mission: usize, p: usize) -> Result<&mut [T]> {
        self.layout.check_branch(mission, p)?;
        let start = self.layout.tail_input_index(mission, p, p + 1) * self.input_dim;
        let len = self.layout.tail_len(p) * self.input_dim;
        Ok(&mut self.data[start..start + len])
    }

    /// The `N`-long input sequence of branch `(i, p)`; its first `p+1` inputs are the primary ones.
    pub fn branch_view(&self, mission: usize, p: usize) -> Result<BranchView<'_, T>> {
        let tail = self.tail(mission, p)?;
        Ok(BranchView { primary: self.primary(), tail, abort: p, input_dim: self.input_dim })
    }

    /// Receding-horizon shift: drops the executed first input and appends a zero input to
    /// every view.
    ///
    /// In storage, the `p = 0` tails are dropped (their abort point has passed), every other
    /// tail moves from `p` to `p - 1` and gains a trailing zero, and a zero tail of length one
    /// appears at `p = N - 2`.
    pub fn shift(&self) -> Self {
        let mut out = Self {
            layout: self.layout,
            input_dim: self.input_dim,
            data: vec![T::zero(); self.data.len()],
        };
        let n = self.layout.horizon;
        let d = self.input_dim;
        out.data[..(n - 1) * d].copy_from_slice(&self.primary()[d..]);
        for i in 1..=self.layout.alternatives {
            for p in 0..n - 2 {
                let src = self.tail(i, p + 1).expect("in range");
                let dst = out.tail_mut(i, p).expect("in range");
                dst[..src.len()].copy_from_slice(src);
            }
        }
        out
    }

    /// Element-wise `self + scale · flat`.
    pub fn add_scaled_flat(&mut self, flat: &[T], scale: T) {
        debug_assert_eq!(flat.len(), self.data.len());
        for (a, &b) in self.data.iter_mut().zip(flat) {
            *a += scale * b;
        }
    }
}

/// Read-only view of one branch input sequence.
#[derive(Debug, Clone, Copy)]
pub struct BranchView<'a, T> {
    primary: &'a [T],
    tail: &'a [T],
    abort: usize,
    input_dim: usize,
}

impl<'a, T: Real> BranchView<'a, T> {
    pub fn len(&self) -> usize {
        self.primary.len() / self.input_dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn abort_index(&self) -> usize {
        self.abort
    }

    pub fn input(&self, k: usize) -> &'a [T] {
        let d = self.input_dim;
        if k <= self.abort {
            &self.primary[k * d..(k + 1) * d]
        } else {
            let j = k - self.abort - 1;
            &self.tail[j * d..(j + 1) * d]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a [T]> + '_ {
        (0..self.len()).map(move |k| self.input(k))
    }

    pub fn to_vec(&self) -> Vec<Vec<T>> {
        self.iter().map(<[T]>::to_vec).collect()
    }
}

/// States produced by expanding a [`MultiHorizonInput`]. Branch `(i, p)` shares
/// `x_0..x_{p+1}` with the primary trajectory; only the `N-p-1` later states are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiHorizonTrajectory<T> {
    layout: Layout,
    state_dim: usize,
    data: Vec<T>,
    simulated_steps: usize,
}

impl<T: Real> MultiHorizonTrajectory<T> {
    pub fn zeros(layout: Layout, state_dim: usize) -> Self {
        Self { layout, state_dim, data: vec![T::zero(); layout.dims().state_count * state_dim], simulated_steps: 0 }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// Number of stored state vectors.
    pub fn element_count(&self) -> usize {
        self.data.len() / self.state_dim
    }

    /// Dynamics evaluations performed by the last expansion.
    pub fn simulated_steps(&self) -> usize {
        self.simulated_steps
    }

    pub fn primary_state(&self, k: usize) -> &[T] {
        assert!(k <= self.layout.horizon);
        &self.data[k * self.state_dim..(k + 1) * self.state_dim]
    }

    fn tail_state_index(&self, mission: usize, p: usize, k: usize) -> usize {
        // tail states of (i, p) are x_{p+2}..x_N, laid out like the tail inputs
        self.layout.tail_input_index(mission, p, k - 1) + 1
    }

    fn slot(&self, idx: usize) -> &[T] {
        &self.data[idx * self.state_dim..(idx + 1) * self.state_dim]
    }

    /// State `k` (0..=N) of branch `(i, p)`.
    pub fn branch_state(&self, mission: usize, p: usize, k: usize) -> &[T] {
        if k <= p + 1 {
            self.primary_state(k)
        } else {
            self.slot(self.tail_state_index(mission, p, k))
        }
    }

    pub fn branch_view(&self, mission: usize, p: usize) -> Result<BranchStates<'_, T>> {
        self.layout.check_branch(mission, p)?;
        Ok(BranchStates { traj: self, mission, abort: p })
    }

    pub fn primary_states(&self) -> Vec<Vec<T>> {
        (0..=self.layout.horizon).map(|k| self.primary_state(k).to_vec()).collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BranchStates<'a, T> {
    traj: &'a MultiHorizonTrajectory<T>,
    mission: usize,
    abort: usize,
}

impl<'a, T: Real> BranchStates<'a, T> {
    pub fn len(&self) -> usize {
        self.traj.layout.horizon + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn state(&self, k: usize) -> &'a [T] {
        self.traj.branch_state(self.mission, self.abort, k)
    }

    pub fn to_vec(&self) -> Vec<Vec<T>> {
        (0..self.len()).map(|k| self.state(k).to_vec()).collect()
    }
}

/// Simulates every horizon of `inputs` from `x_t`. The primary horizon runs under
/// `modes[0]`, branches of mission `i` under `modes[i]`.
pub fn expand<T: Real>(
    model: &DynamicsModel<T>,
    x_t: &[T],
    inputs: &MultiHorizonInput<T>,
    modes: &[ModeId],
) -> Result<MultiHorizonTrajectory<T>> {
    let mut traj = MultiHorizonTrajectory::zeros(inputs.layout(), model.state_dim());
    let scales = resolve_scales(model, inputs, modes)?;
    model.check_state(x_t)?;
    if inputs.input_dim() != model.input_dim() {
        return Err(Error::dims("multi-horizon input", model.input_dim(), inputs.input_dim()));
    }
    expand_into(model, x_t, inputs, &scales, &mut traj);
    Ok(traj)
}

pub(crate) fn resolve_scales<'m, T: Real>(
    model: &'m DynamicsModel<T>,
    inputs: &MultiHorizonInput<T>,
    modes: &[ModeId],
) -> Result<Vec<&'m [T]>> {
    if modes.len() != inputs.alternatives() + 1 {
        return Err(Error::dims("mission mode map", inputs.alternatives() + 1, modes.len()));
    }
    modes.iter().map(|&m| model.input_scale(m)).collect()
}

/// Expansion into a preallocated trajectory; inputs are assumed validated.
pub(crate) fn expand_into<T: Real>(
    model: &DynamicsModel<T>,
    x_t: &[T],
    inputs: &MultiHorizonInput<T>,
    scales: &[&[T]],
    traj: &mut MultiHorizonTrajectory<T>,
) {
    let layout = inputs.layout();
    let n = layout.horizon;
    let nx = traj.state_dim;
    let mut steps = 0;
    traj.data[..nx].copy_from_slice(x_t);
    for k in 0..n {
        let (done, rest) = traj.data.split_at_mut((k + 1) * nx);
        model.step_unchecked(&done[k * nx..], inputs.element(k), scales[0], &mut rest[..nx]);
        steps += 1;
    }
    for i in 1..=layout.alternatives {
        for p in 0..n - 1 {
            // branch starts from the shared state x_{p+1}
            let mut current = layout.tail_input_index(i, p, p + 1) + 1;
            let first_in = layout.tail_input_index(i, p, p + 1);
            for j in 0..layout.tail_len(p) {
                let src_idx = if j == 0 { p + 1 } else { current - 1 };
                let dst_idx = current;
                let (lo, hi) = traj.data.split_at_mut(dst_idx * nx);
                let src = &lo[src_idx * nx..src_idx * nx + nx];
                model.step_unchecked(src, inputs.element(first_in + j), scales[i], &mut hi[..nx]);
                steps += 1;
                current += 1;
            }
        }
    }
    traj.simulated_steps = steps;
}
