//! The three published parameter sets. All share `D = 500`,
//! `I(0) = π/100` and `β/γ = 0.54π`; they differ only in how fast the
//! epidemic runs and in the interaction radius.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::config::{Engine, ExperimentConfig, PlacementName};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Homog,
    Conc,
    Ode,
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            other => Err(format!("unknown preset `{other}` (expected fig1, fig2 or fig3)")),
        }
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "homog" => Ok(Variant::Homog),
            "conc" => Ok(Variant::Conc),
            "ode" => Ok(Variant::Ode),
            other => Err(format!("unknown variant `{other}` (expected homog, conc or ode)")),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Homog => "homog",
            Variant::Conc => "conc",
            Variant::Ode => "ode",
        })
    }
}

/// Constants shared by every variant of one figure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureParams {
    pub lambda: f64,
    pub r0_radius: f64,
    pub gamma: f64,
    /// Particle model shown in the figure.
    pub model: u32,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
}

pub const SIDE: f64 = 500.0;
pub const I0: f64 = PI / 100.0;

impl Figure {
    pub fn params(self) -> FigureParams {
        match self {
            Figure::Fig1 => FigureParams {
                lambda: 20.0,
                r0_radius: 15.0,
                gamma: 1.0 / 30.0,
                model: 1,
                n: 50_000,
                dt: 0.05,
                t_end: 600.0,
            },
            Figure::Fig2 => FigureParams {
                lambda: 2.0,
                r0_radius: 15.0 / 10f64.sqrt(),
                gamma: 1.0 / 3000.0,
                model: 2,
                n: 200_000,
                dt: 0.5,
                t_end: 60_000.0,
            },
            Figure::Fig3 => FigureParams {
                lambda: 200.0,
                r0_radius: 1.5,
                gamma: 1.0 / 300.0,
                model: 1,
                n: 60_000,
                dt: 0.05,
                t_end: 6000.0,
            },
        }
    }
}

/// Config for one leg of a figure. `model` overrides the figure's particle
/// model; fig3 shows both, with Model 2 at `N = 200000`.
pub fn preset(figure: Figure, variant: Variant, model: Option<u32>) -> ExperimentConfig {
    let p = figure.params();
    let model = model.unwrap_or(p.model);
    let n = if figure == Figure::Fig3 && model == 2 { 200_000 } else { p.n };
    let engine = match (variant, model) {
        (Variant::Ode, _) => Engine::Ode,
        (_, 2) => Engine::Particle2,
        _ => Engine::Particle1,
    };
    let placement = match variant {
        Variant::Conc => PlacementName::Concentrated,
        _ => PlacementName::Homogeneous,
    };
    let suffix = if model == p.model || variant == Variant::Ode { String::new() } else { format!("-model{model}") };
    ExperimentConfig {
        engine,
        n: (variant != Variant::Ode).then_some(n),
        side: SIDE,
        lambda: p.lambda,
        gamma: p.gamma,
        mu: 0.0,
        r0_radius: p.r0_radius,
        dt: p.dt,
        seed: 0,
        s0: None,
        i0: I0,
        r0: 0.0,
        placement,
        t_end: p.t_end,
        sample_every: Some(p.t_end / crate::config::DEFAULT_SAMPLES),
        ode_step: None,
        nx: None,
        nv: None,
        bx: None,
        bv: None,
        model: None,
        n_list: None,
        seed_list: None,
        output_dir: Some(PathBuf::from(format!("out/{figure}-{variant}{suffix}"))),
    }
}
