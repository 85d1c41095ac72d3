//! Agents and initial-condition builders.

use std::f64::consts::TAU;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::geometry::{torus_distance_sq, TorusPoint, UnitVelocity};
use crate::params::{rounded_count, InitialData, Label, Placement, SimParams};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    pub position: TorusPoint,
    pub velocity: UnitVelocity,
    pub label: Label,
}

/// Draws `N` agents with i.i.d. uniform positions and headings, then
/// assigns labels according to the placement rule.
pub fn init_particles(
    params: &SimParams,
    init: &InitialData,
    rng: &mut RngStream,
) -> Result<Vec<Particle>> {
    params.validate()?;
    init.validate()?;
    let side = params.side;
    let mut particles: Vec<Particle> = (0..params.n)
        .map(|_| {
            let x1 = (rng.uniform() * side).min(side.next_down());
            let x2 = (rng.uniform() * side).min(side.next_down());
            let velocity = UnitVelocity::from_angle(rng.uniform() * TAU);
            Particle { position: TorusPoint::from_wrapped(x1, x2), velocity, label: Label::S }
        })
        .collect();

    match init.placement {
        Placement::Homogeneous => {
            let n_i = rounded_count(params.n, init.i0);
            let n_r = rounded_count(params.n, init.r0);
            if n_i + n_r > params.n {
                return Err(Error::InitialData(format!(
                    "rounded counts I = {n_i}, R = {n_r} exceed N = {}",
                    params.n
                )));
            }
            let chosen = index::sample(rng, params.n, n_i + n_r);
            for (k, idx) in chosen.iter().enumerate() {
                particles[idx].label = if k < n_i { Label::I } else { Label::R };
            }
        }
        Placement::ConcentratedDisk => {
            let center = TorusPoint::from_wrapped(0.5 * side, 0.5 * side);
            let radius = init.disk_radius(side);
            let r2 = radius * radius;
            for p in &mut particles {
                if torus_distance_sq(p.position, center, side) < r2 {
                    p.label = Label::I;
                }
            }
        }
    }
    Ok(particles)
}

/// `N` susceptible agents stacked at the torus centre with uniform
/// headings: the point-mass start used for mixing runs.
pub fn init_point_mass(params: &SimParams, rng: &mut RngStream) -> Result<Vec<Particle>> {
    params.validate()?;
    let center = TorusPoint::from_wrapped(0.5 * params.side, 0.5 * params.side);
    Ok((0..params.n)
        .map(|_| Particle {
            position: center,
            velocity: UnitVelocity::from_angle(rng.uniform() * TAU),
            label: Label::S,
        })
        .collect())
}

/// Counts per label in `S, I, R` order.
pub fn label_counts(particles: &[Particle]) -> [usize; 3] {
    let mut counts = [0usize; 3];
    for p in particles {
        counts[p.label.index()] += 1;
    }
    counts
}
