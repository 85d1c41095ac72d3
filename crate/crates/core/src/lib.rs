//! Simulation laboratory for spatial SIR epidemics on a periodic square.
//!
//! * [`particle`]: agent-based Monte Carlo for the pairwise and crowd
//!   infection models, backed by the uniform grid in [`spatial`].
//! * [`kinetic`]: deterministic transport/relaxation/reaction solver for
//!   the mean-field densities `f(x, v; S|I|R)`.
//! * [`ode`]: SIR/SIRS equations, RK4 integration and final-size values.
//! * [`diagnostics`]: chaos index, mixing to uniform, epidemic summaries.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod init;
pub mod kinetic;
pub mod ode;
pub mod params;
pub mod particle;
pub mod rng;
pub mod series;
pub mod spatial;

pub use error::{Error, Result};
pub use geometry::{beta_from_params, torus_distance, torus_wrap, TorusPoint, UnitVelocity};
pub use init::{init_particles, init_point_mass, Particle};
pub use params::{InitialData, Label, Placement, SimParams};
pub use particle::{run_particle, Model, ParticleState, StepReport};
pub use rng::{RngStream, StreamTag};
pub use series::{FractionSample, FractionSeries};
