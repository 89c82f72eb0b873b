//! Multi-horizon multi-objective model predictive path integral control.
//!
//! The controller optimizes one input horizon toward a primary mission together
//! with a triangular family of virtual horizons toward alternative (backup)
//! missions, one branch for every possible abort point. Mission costs are
//! scalarized by a weight vector that is scheduled from distances to the
//! mission targets and constrained to keep the scalarized value decreasing.
//!
//! The numerical core is generic over the scalar type through [`Real`]; the
//! aliases at the crate root fix it to `f64`, which is what the simulation
//! harness and the command line tool use.

pub mod config;
pub mod controller;
pub mod cost;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod multi_horizon;
pub mod num;
pub mod sim;
pub mod trace;
pub mod weights;

pub use error::{Error, Result};
pub use num::Real;

pub type DynamicsModel = dynamics::DynamicsModel<f64>;
pub type ModeParams = dynamics::ModeParams<f64>;
pub type MultiHorizonInput = multi_horizon::MultiHorizonInput<f64>;
pub type MultiHorizonTrajectory = multi_horizon::MultiHorizonTrajectory<f64>;
pub type Mission = cost::Mission<f64>;
pub type MissionSet = cost::MissionSet<f64>;
pub type ObstacleSet = cost::ObstacleSet<f64>;
pub type CostVector = cost::CostVector<f64>;
pub type WeightVector = weights::WeightVector<f64>;
pub type WeightLawParams = weights::WeightLawParams<f64>;
pub type ControllerParams = controller::ControllerParams<f64>;
pub type ControllerState = controller::ControllerState<f64>;
pub type Controller = controller::Controller<f64>;
pub type NoiseBatch = controller::NoiseBatch<f64>;
pub type StepDiagnostics = controller::StepDiagnostics<f64>;
pub type Scenario = sim::Scenario<f64>;
pub type ClosedLoopTrace = sim::ClosedLoopTrace<f64>;
pub type ClosedLoopRun = sim::ClosedLoopRun<f64>;
