//! Switched discrete-time vehicle models.
//!
//! A mode selects a per-channel scaling of the commanded input, which is how
//! degraded actuation (for example a lost engine) is represented.

use crate::error::{Error, Result};
use crate::num::Real;

pub type ModeId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeParams<T> {
    pub mode_id: ModeId,
    /// Multiplier applied to each input channel before it reaches the plant.
    pub input_scale: Vec<T>,
}

impl<T: Real> ModeParams<T> {
    pub fn nominal(mode_id: ModeId, input_dim: usize) -> Self {
        Self { mode_id, input_scale: vec![T::one(); input_dim] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind<T> {
    /// Planar double integrator, state `[px, py, vx, vy]`, input `[ax, ay]`,
    /// time step 0.1.
    DoubleIntegrator,
    /// Kinematic simple car, state `[px, py, heading]`, input `[speed, steering]`.
    SimpleCar { wheelbase: T, dt: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsModel<T> {
    kind: ModelKind<T>,
    modes: Vec<ModeParams<T>>,
}

impl<T: Real> DynamicsModel<T> {
    /// Double integrator with a single nominal mode 0.
    pub fn double_integrator() -> Self {
        Self { kind: ModelKind::DoubleIntegrator, modes: vec![ModeParams::nominal(0, 2)] }
    }

    /// Simple car with a single nominal mode 0.
    pub fn simple_car(wheelbase: T, dt: T) -> Result<Self> {
        if !(wheelbase > T::zero()) || !(dt > T::zero()) {
            return Err(Error::Config(format!(
                "simple car needs wheelbase > 0 and dt > 0 (got {wheelbase}, {dt})"
            )));
        }
        Ok(Self { kind: ModelKind::SimpleCar { wheelbase, dt }, modes: vec![ModeParams::nominal(0, 2)] })
    }

    /// Replaces the mode table.
    pub fn with_modes(mut self, modes: Vec<ModeParams<T>>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::Config("model needs at least one mode".into()));
        }
        for (i, mode) in modes.iter().enumerate() {
            if mode.input_scale.len() != self.input_dim() {
                return Err(Error::Config(format!(
                    "mode {}: input_scale has {} entries, model input dimension is {}",
                    mode.mode_id,
                    mode.input_scale.len(),
                    self.input_dim()
                )));
            }
            if mode.input_scale.iter().any(|s| !(*s >= T::zero())) {
                return Err(Error::Config(format!("mode {}: input_scale entries must be >= 0", mode.mode_id)));
            }
            if modes[..i].iter().any(|m| m.mode_id == mode.mode_id) {
                return Err(Error::Config(format!("duplicate mode id {}", mode.mode_id)));
            }
        }
        self.modes = modes;
        Ok(self)
    }

    pub fn kind(&self) -> ModelKind<T> {
        self.kind
    }

    pub fn modes(&self) -> &[ModeParams<T>] {
        &self.modes
    }

    pub fn state_dim(&self) -> usize {
        match self.kind {
            ModelKind::DoubleIntegrator => 4,
            ModelKind::SimpleCar { .. } => 3,
        }
    }

    pub fn input_dim(&self) -> usize {
        2
    }

    pub fn mode(&self, mode: ModeId) -> Result<&ModeParams<T>> {
        self.modes
            .iter()
            .find(|m| m.mode_id == mode)
            .ok_or_else(|| Error::Config(format!("unknown mode {mode}")))
    }

    /// Input scaling for `mode`, resolved once per rollout.
    pub fn input_scale(&self, mode: ModeId) -> Result<&[T]> {
        self.mode(mode).map(|m| m.input_scale.as_slice())
    }

    /// One step of the dynamics.
    pub fn step(&self, x: &[T], u: &[T], mode: ModeId) -> Result<Vec<T>> {
        self.check_state(x)?;
        self.check_input(u)?;
        let scale = self.input_scale(mode)?;
        let mut out = vec![T::zero(); self.state_dim()];
        self.step_unchecked(x, u, scale, &mut out);
        Ok(out)
    }

    /// Simulates `inputs` from `x0`; the result starts with `x0`.
    pub fn rollout(&self, x0: &[T], inputs: &[Vec<T>], mode: ModeId) -> Result<Vec<Vec<T>>> {
        self.check_state(x0)?;
        let scale = self.input_scale(mode)?;
        let mut states = Vec::with_capacity(inputs.len() + 1);
        states.push(x0.to_vec());
        for u in inputs {
            self.check_input(u)?;
            let mut next = vec![T::zero(); self.state_dim()];
            self.step_unchecked(states.last().unwrap(), u, scale, &mut next);
            states.push(next);
        }
        Ok(states)
    }

    pub(crate) fn check_state(&self, x: &[T]) -> Result<()> {
        if x.len() != self.state_dim() {
            return Err(Error::dims("state", self.state_dim(), x.len()));
        }
        Ok(())
    }

    pub(crate) fn check_input(&self, u: &[T]) -> Result<()> {
        if u.len() != self.input_dim() {
            return Err(Error::dims("input", self.input_dim(), u.len()));
        }
        Ok(())
    }

    /// Hot-path step; dimensions are the caller's responsibility.
    #[inline]
    pub(crate) fn step_unchecked(&self, x: &[T], u: &[T], scale: &[T], out: &mut [T]) {
        let u0 = scale[0] * u[0];
        let u1 = scale[1] * u[1];
        match self.kind {
            ModelKind::DoubleIntegrator => {
                // A = [[1,0,.1,0],[0,1,0,.1],[0,0,1,0],[0,0,0,1]], B = [[0,0],[0,0],[.1,0],[0,.1]]
                let dt = T::lit(0.1);
                out[0] = x[0] + dt * x[2];
                out[1] = x[1] + dt * x[3];
                out[2] = x[2] + dt * u0;
                out[3] = x[3] + dt * u1;
            }
            ModelKind::SimpleCar { wheelbase, dt } => {
                let (speed, steer) = (u0, u1);
                let heading = x[2];
                out[0] = x[0] + speed * heading.cos() * dt;
                out[1] = x[1] + speed * heading.sin() * dt;
                out[2] = heading + speed / wheelbase * steer.tan() * dt;
            }
        }
    }
}
