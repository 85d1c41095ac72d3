//! Time-stepped Monte Carlo for the two agent-based epidemic models.
//!
//! Both models share free transport, rate-1 heading resampling and rate-γ
//! recovery. They differ in the infection mechanism:
//!
//! * [`Model::Pairwise`]: each unordered pair fires at rate `λ/N`; an
//!   `{I, S}` pair closer than `R` becomes `{I, I}`.
//! * [`Model::Crowd`]: each agent fires at rate `λ/N`; a firing infected
//!   agent infects every susceptible closer than `R`.
//!
//! A step of size `dt` applies, in order: transport, heading jumps,
//! infections (Poisson number of firings, applied sequentially), and
//! recoveries of the agents that were infected before the infection
//! substep.

use std::f64::consts::TAU;

use rand_distr::{Distribution, Geometric, Poisson};

use crate::error::{invalid, Result};
use crate::geometry::{torus_distance_sq, UnitVelocity};
use crate::init::{init_particles, label_counts, Particle};
use crate::params::{InitialData, Label, SimParams};
use crate::rng::{RngStream, StreamTag};
use crate::series::{FractionSample, FractionSeries};
use crate::spatial::SpatialIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    /// Binary infection of close `{I, S}` pairs ("Model 1").
    Pairwise,
    /// Crowd contagion around a firing infected agent ("Model 2").
    Crowd,
}

impl Model {
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Model::Pairwise),
            2 => Ok(Model::Crowd),
            other => Err(invalid("model", format!("unknown model id {other}, expected 1 or 2"))),
        }
    }

    pub fn id(self) -> u32 {
        match self {
            Model::Pairwise => 1,
            Model::Crowd => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleState {
    pub particles: Vec<Particle>,
    steps: u64,
    dt: f64,
}

impl ParticleState {
    pub fn new(particles: Vec<Particle>, dt: f64) -> Self {
        Self { particles, steps: 0, dt }
    }

    /// Elapsed time, computed from the step counter to avoid drift.
    pub fn time(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn counts(&self) -> [usize; 3] {
        label_counts(&self.particles)
    }

    pub fn fractions(&self) -> FractionSample {
        let c = self.counts();
        let n = self.particles.len() as f64;
        FractionSample { t: self.time(), s: c[0] as f64 / n, i: c[1] as f64 / n, r: c[2] as f64 / n }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    pub velocity_jumps: u64,
    pub recoveries: u64,
    pub infection_attempts: u64,
    pub infections: u64,
}

/// The three event streams a run draws from.
#[derive(Debug, Clone)]
pub struct EventStreams {
    pub motion: RngStream,
    pub recovery: RngStream,
    pub infection: RngStream,
}

impl EventStreams {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            motion: RngStream::tagged(seed, StreamTag::Motion),
            recovery: RngStream::tagged(seed, StreamTag::Recovery),
            infection: RngStream::tagged(seed, StreamTag::Infection),
        }
    }
}

/// Applies one pairwise attempt on `(i, j)`. Returns true if a
/// susceptible got infected.
pub fn attempt_pair_infection(
    particles: &mut [Particle],
    i: usize,
    j: usize,
    r0_radius: f64,
    side: f64,
) -> bool {
    let (a, b) = (particles[i].label, particles[j].label);
    let target = match (a, b) {
        (Label::I, Label::S) => j,
        (Label::S, Label::I) => i,
        _ => return false,
    };
    if torus_distance_sq(particles[i].position, particles[j].position, side) < r0_radius * r0_radius
    {
        particles[target].label = Label::I;
        true
    } else {
        false
    }
}

/// Fires agent `i` under the crowd rule. `index` must reflect the current
/// positions. Returns the number of newly infected agents.
pub fn fire_crowd_infection(
    particles: &mut [Particle],
    index: &SpatialIndex,
    i: usize,
    r0_radius: f64,
    scratch: &mut Vec<usize>,
) -> usize {
    if particles[i].label != Label::I {
        return 0;
    }
    scratch.clear();
    index.for_each_within(particles, particles[i].position, r0_radius, |k| {
        if particles[k].label == Label::S {
            scratch.push(k);
        }
    });
    for &k in scratch.iter() {
        particles[k].label = Label::I;
    }
    scratch.len()
}

/// Reusable per-run stepping machinery.
#[derive(Debug, Clone)]
pub struct Stepper {
    model: Model,
    params: SimParams,
    jump: Geometric,
    recover_prob: f64,
    firings: Option<Poisson<f64>>,
    index: SpatialIndex,
    infected: Vec<usize>,
    scratch: Vec<usize>,
}

impl Stepper {
    pub fn new(model: Model, params: &SimParams) -> Result<Self> {
        params.validate()?;
        let jump_prob = -(-params.dt).exp_m1();
        let jump = Geometric::new(jump_prob)
            .map_err(|e| invalid("dt", format!("heading-jump probability: {e}")))?;
        let mean_firings = match model {
            Model::Pairwise => params.lambda * (params.n as f64 - 1.0) * params.dt / 2.0,
            Model::Crowd => params.lambda * params.dt,
        };
        let firings = if mean_firings > 0.0 {
            Some(
                Poisson::new(mean_firings)
                    .map_err(|e| invalid("lambda", format!("firing count: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            model,
            params: *params,
            jump,
            recover_prob: -(-params.gamma * params.dt).exp_m1(),
            firings,
            index: SpatialIndex::new(params.r0_radius, params.side)?,
            infected: Vec::new(),
            scratch: Vec::new(),
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn step(&mut self, state: &mut ParticleState, streams: &mut EventStreams) -> StepReport {
        let mut report = StepReport::default();
        let p = &self.params;
        let ps = &mut state.particles[..];
        let n = ps.len();

        // transport
        for a in ps.iter_mut() {
            let (c, s) = a.velocity.components();
            a.position = a.position.translate(c * p.dt, s * p.dt, p.side);
        }

        // heading jumps, by geometric skipping over agents
        let mut k = self.jump.sample(&mut streams.motion) as usize;
        while k < n {
            ps[k].velocity = UnitVelocity::from_angle(streams.motion.uniform() * TAU);
            report.velocity_jumps += 1;
            k = k.saturating_add(1 + self.jump.sample(&mut streams.motion) as usize);
        }

        self.infected.clear();
        self.infected.extend((0..n).filter(|&k| ps[k].label == Label::I));

        if let Some(firings) = &self.firings {
            let rng = &mut streams.infection;
            let count = firings.sample(rng) as u64;
            report.infection_attempts = count;
            match self.model {
                Model::Pairwise if n >= 2 => {
                    for _ in 0..count {
                        let i = rng.index(n);
                        let mut j = rng.index(n - 1);
                        if j >= i {
                            j += 1;
                        }
                        if attempt_pair_infection(ps, i, j, p.r0_radius, p.side) {
                            report.infections += 1;
                        }
                    }
                }
                Model::Pairwise => {}
                Model::Crowd => {
                    let mut indexed = false;
                    for _ in 0..count {
                        let i = rng.index(n);
                        if ps[i].label != Label::I {
                            continue;
                        }
                        if !indexed {
                            self.index.rebuild(ps);
                            indexed = true;
                        }
                        report.infections += fire_crowd_infection(
                            ps,
                            &self.index,
                            i,
                            p.r0_radius,
                            &mut self.scratch,
                        ) as u64;
                    }
                }
            }
        }

        if self.recover_prob > 0.0 {
            for &k in &self.infected {
                if streams.recovery.uniform() < self.recover_prob {
                    ps[k].label = Label::R;
                    report.recoveries += 1;
                }
            }
        }

        state.steps += 1;
        report
    }
}

/// One pairwise-model step. Prefer [`Stepper`] in loops.
pub fn step_model1(
    state: &mut ParticleState,
    params: &SimParams,
    streams: &mut EventStreams,
) -> Result<StepReport> {
    Ok(Stepper::new(Model::Pairwise, params)?.step(state, streams))
}

/// One crowd-model step. Prefer [`Stepper`] in loops.
pub fn step_model2(
    state: &mut ParticleState,
    params: &SimParams,
    streams: &mut EventStreams,
) -> Result<StepReport> {
    Ok(Stepper::new(Model::Crowd, params)?.step(state, streams))
}

/// Sample grid `0, h, 2h, ...` up to `t_end`, with `h` a whole number of steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub sample_every: f64,
    pub steps_per_sample: u64,
    pub n_intervals: u64,
}

impl SampleGrid {
    pub fn new(t_end: f64, sample_every: f64, dt: f64) -> Result<Self> {
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(invalid("t_end", format!("must be > 0, got {t_end}")));
        }
        if !(sample_every >= dt) || !sample_every.is_finite() {
            return Err(invalid("sample_every", format!("must be >= dt = {dt}, got {sample_every}")));
        }
        let ratio = sample_every / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio {
            return Err(invalid(
                "sample_every",
                format!("must be an integer multiple of dt = {dt}, got {sample_every}"),
            ));
        }
        let n_intervals = (t_end / sample_every * (1.0 + 1e-12)).floor() as u64;
        Ok(Self { sample_every, steps_per_sample: steps as u64, n_intervals })
    }

    pub fn time(&self, k: u64) -> f64 {
        k as f64 * self.sample_every
    }
}

/// Runs `model` from freshly drawn initial data and records label
/// fractions on the sample grid.
pub fn run_particle(
    model: Model,
    params: &SimParams,
    init: &InitialData,
    t_end: f64,
    sample_every: f64,
) -> Result<FractionSeries> {
    run_particle_observed(model, params, init, t_end, sample_every, |_, _| {})
}

/// Like [`run_particle`], calling `observe` with the state at every sample
/// (including `t = 0`).
pub fn run_particle_observed(
    model: Model,
    params: &SimParams,
    init: &InitialData,
    t_end: f64,
    sample_every: f64,
    mut observe: impl FnMut(&ParticleState, &FractionSample),
) -> Result<FractionSeries> {
    let grid = SampleGrid::new(t_end, sample_every, params.dt)?;
    let mut stepper = Stepper::new(model, params)?;
    let particles = init_particles(params, init, &mut RngStream::tagged(params.seed, StreamTag::Init))?;
    let mut state = ParticleState::new(particles, params.dt);
    let mut streams = EventStreams::from_seed(params.seed);
    let mut series = FractionSeries::new();
    for k in 0..=grid.n_intervals {
        if k > 0 {
            for _ in 0..grid.steps_per_sample {
                stepper.step(&mut state, &mut streams);
            }
        }
        let mut sample = state.fractions();
        sample.t = grid.time(k);
        observe(&state, &sample);
        series.push(sample)?;
    }
    Ok(series)
}
