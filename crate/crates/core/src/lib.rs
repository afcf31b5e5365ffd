// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atmosphere;
pub mod error;
pub mod flight;
pub mod format;
pub mod run;
pub mod scenario;
pub mod tables;
pub mod thermal;
pub mod vehicle;

pub use atmosphere::{AirModel, AtmosphereState, StandardAtmosphere, Vacuum};
pub use error::{Error, Result};
pub use flight::{
    AscentResult, FiringSolution, FlightState, ImpactResult, LaunchCondition, TrajectoryRecord, TrajectorySeries,
};
pub use vehicle::{DragTable, ProjectileSpec, PropellantRecord, RocketSpec};
