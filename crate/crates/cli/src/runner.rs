//! Engine dispatch and on-disk layout of a run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use simlab_core::diagnostics::{
    epidemic_summary, mixing_report, phase_histogram, tv_from_counts, ChaosEstimator, ChaosReport,
    KeyValueReport,
};
use simlab_core::kinetic::io::write_field;
use simlab_core::kinetic::{run_kinetic, KineticField, KineticGrid, KineticParams, KineticRunOptions, KineticSolver};
use simlab_core::ode::{integrate_sir_sampled, s_infinity, SirRates, SirState};
use simlab_core::particle::{run_particle_observed, EventStreams, SampleGrid, Stepper};
use simlab_core::{
    init_point_mass, FractionSample, FractionSeries, InitialData, Model, ParticleState, RngStream, SimParams,
    StreamTag,
};

use crate::config::{Engine, ExperimentConfig};
use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";
pub const FRACTIONS: &str = "fractions.csv";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub overwrite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub beta: f64,
    pub gamma: f64,
    pub beta_over_gamma: f64,
    /// Rate implied by the kinetic solver's discrete disk stencil.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discrete_beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// Effective config; `simlab run manifest.json` repeats the run.
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub derived: Derived,
    pub wall_time_seconds: f64,
    pub files: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

struct EngineOutput {
    files: Vec<(String, String)>,
    seeds: Vec<u64>,
    discrete_beta: Option<f64>,
}

/// Applies overrides, validates, runs the engine and writes results.
/// The manifest is written last, so a directory without one holds no
/// valid results.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<RunOutcome> {
    let mut cfg = config.clone();
    if let Some(seed) = options.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &options.output_dir {
        cfg.output_dir = Some(dir.clone());
    }
    cfg.validate()?;
    let dir = cfg
        .output_dir
        .clone()
        .ok_or_else(|| CliError::Config { path: "output_dir".into(), reason: "required (or pass --out)".into() })?;
    prepare_dir(&dir, options.overwrite)?;

    let started = Instant::now();
    let output = execute(&cfg)?;
    let mut files = Vec::with_capacity(output.files.len());
    for (name, contents) in &output.files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        files.push(name.clone());
    }
    let beta = simlab_core::beta_from_params(cfg.lambda, cfg.r0_radius, cfg.side);
    let manifest = RunManifest {
        tool: "simlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seeds: output.seeds,
        derived: Derived {
            beta,
            gamma: cfg.gamma,
            beta_over_gamma: if cfg.gamma > 0.0 { beta / cfg.gamma } else { f64::INFINITY },
            discrete_beta: output.discrete_beta,
        },
        wall_time_seconds: started.elapsed().as_secs_f64(),
        files,
        config: cfg,
    };
    write_manifest(&dir, &manifest)?;
    Ok(RunOutcome { dir, manifest })
}

fn prepare_dir(dir: &Path, overwrite: bool) -> Result<()> {
    let manifest = dir.join(MANIFEST);
    let occupied = manifest.exists() || dir.join(FRACTIONS).exists();
    if occupied && !overwrite {
        return Err(CliError::OutputExists(dir.to_path_buf()));
    }
    if manifest.exists() {
        fs::remove_file(&manifest).map_err(|e| CliError::io(&manifest, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let tmp = dir.join("manifest.json.tmp");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
    fs::write(&tmp, text).map_err(|e| CliError::io(&tmp, e))?;
    let dest = dir.join(MANIFEST);
    fs::rename(&tmp, &dest).map_err(|e| CliError::io(&dest, e))
}

fn execute(cfg: &ExperimentConfig) -> Result<EngineOutput> {
    let init = cfg.initial_data()?;
    let params = cfg.sim_params()?;
    let single = |files| EngineOutput { files, seeds: vec![cfg.seed], discrete_beta: None };
    match cfg.engine {
        Engine::Particle1 | Engine::Particle2 => {
            let series = run_particle_observed(cfg.model()?, &params, &init, cfg.t_end, cfg.sample_every(), |_, _| {})?;
            Ok(single(vec![
                (FRACTIONS.into(), series.to_csv()),
                ("summary.txt".into(), summary_text(&series, cfg.gamma)),
            ]))
        }
        Engine::Ode => {
            let series = run_ode(cfg, &init)?;
            let mut summary = summary_text(&series, cfg.gamma);
            if cfg.mu == 0.0 && cfg.gamma > 0.0 {
                if let Ok(s_inf) = s_infinity(params.beta() / cfg.gamma, init.s0, init.i0) {
                    let _ = writeln!(summary, "s_infinity = {s_inf}");
                }
            }
            Ok(EngineOutput { files: vec![(FRACTIONS.into(), series.to_csv()), ("summary.txt".into(), summary)], seeds: vec![], discrete_beta: None })
        }
        Engine::Kinetic => run_kinetic_engine(cfg, &init),
        Engine::Mixing => {
            let bins = cfg.bins()?;
            let run = run_mixing(&params, cfg.t_end, cfg.sample_every(), bins)?;
            let mut tv_csv = String::from("t,tv\n");
            for (t, v) in run.report.times.iter().zip(&run.report.tv) {
                let _ = writeln!(tv_csv, "{t},{v}");
            }
            Ok(single(vec![
                (FRACTIONS.into(), run.series.to_csv()),
                ("mixing.csv".into(), tv_csv),
                ("mixing.txt".into(), run.report.to_kv()),
            ]))
        }
        Engine::ChaosSweep => run_chaos_sweep(cfg, &init),
    }
}

/// Peak-time sample and the pair-correlation report taken there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosPoint {
    pub n: usize,
    pub seed: u64,
    pub peak: FractionSample,
    pub report: ChaosReport,
}

/// Runs one realisation, keeping the state at the first sample where `I`
/// is largest, and evaluates the pair-correlation index there.
pub fn chaos_at_peak(
    model: Model,
    params: &SimParams,
    init: &InitialData,
    t_end: f64,
    sample_every: f64,
) -> Result<(FractionSeries, ChaosPoint)> {
    let mut best: Option<(FractionSample, ParticleState)> = None;
    let series = run_particle_observed(model, params, init, t_end, sample_every, |state, sample| {
        if best.as_ref().is_none_or(|(b, _)| sample.i > b.i) {
            best = Some((*sample, state.clone()));
        }
    })?;
    let (peak, state) = best.expect("series has a t = 0 sample");
    let mut estimator = ChaosEstimator::new(params.r0_radius, params.side)?;
    let report = estimator.estimate_particles(&state.particles, peak.t)?;
    Ok((series, ChaosPoint { n: params.n, seed: params.seed, peak, report }))
}

fn run_chaos_sweep(cfg: &ExperimentConfig, init: &InitialData) -> Result<EngineOutput> {
    let model = cfg.model()?;
    let (ns, seeds) = cfg.sweep_axes();
    let jobs: Vec<(usize, u64)> = ns.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let results: Vec<(FractionSeries, ChaosPoint)> = jobs
        .par_iter()
        .map(|&(n, seed)| chaos_at_peak(model, &cfg.sim_params_for(n, seed), init, cfg.t_end, cfg.sample_every()))
        .collect::<Result<_>>()?;

    let mut csv = String::from("n,seed,peak_time,peak_i,observed,baseline,chi_corr\n");
    let mut files = Vec::new();
    for (series, p) in &results {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            p.n, p.seed, p.peak.t, p.peak.i, p.report.observed, p.report.baseline, p.report.index
        );
        files.push((format!("runs/n{}-seed{}.csv", p.n, p.seed), series.to_csv()));
    }
    let mut summary = String::new();
    for &n in &ns {
        let chis: Vec<f64> = results.iter().filter(|(_, p)| p.n == n).map(|(_, p)| p.report.index).collect();
        let k = chis.len() as f64;
        let mean = chis.iter().sum::<f64>() / k;
        let dev = chis.iter().map(|c| (c - 1.0).abs()).sum::<f64>() / k;
        let _ = writeln!(summary, "n{n}.mean_chi_corr = {mean}");
        let _ = writeln!(summary, "n{n}.mean_abs_chi_minus_1 = {dev}");
    }
    files.insert(0, ("chaos.csv".into(), csv));
    files.insert(1, ("chaos_summary.txt".into(), summary));
    Ok(EngineOutput { files, seeds, discrete_beta: None })
}

fn run_ode(cfg: &ExperimentConfig, init: &InitialData) -> Result<FractionSeries> {
    let beta = simlab_core::beta_from_params(cfg.lambda, cfg.r0_radius, cfg.side);
    let rates = SirRates { beta, gamma: cfg.gamma, mu: cfg.mu };
    Ok(integrate_sir_sampled(
        &SirState::new(init.s0, init.i0, init.r0),
        &rates,
        cfg.t_end,
        cfg.ode_step(),
        cfg.sample_every(),
    )?)
}

fn run_kinetic_engine(cfg: &ExperimentConfig, init: &InitialData) -> Result<EngineOutput> {
    let (nx, nv) = cfg.grid_shape()?;
    let grid = KineticGrid::new(nx, nv, cfg.side)?;
    let params = KineticParams { lambda: cfg.lambda, gamma: cfg.gamma, mu: cfg.mu, r0_radius: cfg.r0_radius, dt: cfg.dt };
    let mut solver = KineticSolver::new(grid, params)?;
    let field = KineticField::from_initial_data(grid, init)?;
    let options = KineticRunOptions { l1_target: Some(None), keep_snapshots: false };
    let run = run_kinetic(field, &mut solver, cfg.t_end, cfg.sample_every(), &options)?;

    let mut l1 = String::from("t,S,I,R\n");
    for (t, [s, i, r]) in &run.l1 {
        let _ = writeln!(l1, "{t},{s},{i},{r}");
    }
    let final_field = run.final_field.as_ref().expect("run keeps its final field");
    let t_final = run.series.last().map_or(0.0, |s| s.t);
    let mut dump = Vec::new();
    write_field(final_field, t_final, &mut dump).expect("writing to memory");
    let discrete_beta = solver.discrete_beta();
    let mut summary = summary_text(&run.series, cfg.gamma);
    let _ = writeln!(summary, "discrete_beta = {discrete_beta}");
    let _ = writeln!(summary, "stencil_cells = {}", solver.stencil().offsets.len());
    let _ = writeln!(summary, "final_mass = {}", final_field.mass());
    Ok(EngineOutput {
        files: vec![
            (FRACTIONS.into(), run.series.to_csv()),
            ("l1.csv".into(), l1),
            ("field_final.txt".into(), String::from_utf8(dump).expect("ascii dump")),
            ("summary.txt".into(), summary),
        ],
        seeds: vec![],
        discrete_beta: Some(discrete_beta),
    })
}

pub struct MixingRun {
    pub series: FractionSeries,
    pub report: simlab_core::diagnostics::MixingReport,
}

/// Random flight of `N` agents released from the torus centre; the
/// phase-space TV to uniform is recorded at every sample.
pub fn run_mixing(
    params: &SimParams,
    t_end: f64,
    sample_every: f64,
    bins: simlab_core::diagnostics::MixingBins,
) -> Result<MixingRun> {
    let grid = SampleGrid::new(t_end, sample_every, params.dt)?;
    let particles = init_point_mass(params, &mut RngStream::tagged(params.seed, StreamTag::Init))?;
    let mut state = ParticleState::new(particles, params.dt);
    let mut stepper = Stepper::new(Model::Pairwise, params)?;
    let mut streams = EventStreams::from_seed(params.seed);
    let mut series = FractionSeries::new();
    let (mut times, mut tv) = (Vec::new(), Vec::new());
    for k in 0..=grid.n_intervals {
        if k > 0 {
            for _ in 0..grid.steps_per_sample {
                stepper.step(&mut state, &mut streams);
            }
        }
        let t = grid.time(k);
        let mut sample = state.fractions();
        sample.t = t;
        series.push(sample)?;
        times.push(t);
        tv.push(tv_from_counts(&phase_histogram(&state.particles, params.side, bins))?);
    }
    Ok(MixingRun { series, report: mixing_report(times, tv, params.n, bins) })
}

/// Epidemic summary, or peak and terminal values when `I` has not died out.
fn summary_text(series: &FractionSeries, gamma: f64) -> String {
    match epidemic_summary(series, gamma) {
        Ok(s) => s.to_kv() + "extinct = true\n",
        Err(_) => {
            let mut out = String::new();
            if let (Some(peak), Some(last)) = (series.peak_infected(), series.last()) {
                let _ = writeln!(out, "peak_i = {}", peak.i);
                let _ = writeln!(out, "peak_time = {}", peak.t);
                let _ = writeln!(out, "final_s = {}", last.s);
                let _ = writeln!(out, "final_i = {}", last.i);
                let _ = writeln!(out, "final_r = {}", last.r);
            }
            out + "extinct = false\n"
        }
    }
}

/// Expands `n_list × seed_list` into one run per pair, each in its own
/// subdirectory `n<N>-seed<S>`, executed in parallel. A `chaos-sweep`
/// config already sweeps internally and runs once.
pub fn run_sweep(config: &ExperimentConfig, options: &RunOptions) -> Result<Vec<RunOutcome>> {
    if config.engine == Engine::ChaosSweep {
        return run_experiment(config, options).map(|o| vec![o]);
    }
    let base = options
        .output_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .ok_or_else(|| CliError::Config { path: "output_dir".into(), reason: "required (or pass --out)".into() })?;
    let (ns, seeds) = config.sweep_axes();
    let ns: Vec<Option<usize>> = if ns.is_empty() { vec![None] } else { ns.into_iter().map(Some).collect() };
    let jobs: Vec<(Option<usize>, u64)> = ns.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    jobs.par_iter()
        .map(|&(n, seed)| {
            let mut cfg = config.clone();
            cfg.n = n.or(cfg.n);
            cfg.seed = seed;
            cfg.n_list = None;
            cfg.seed_list = None;
            let name = match n {
                Some(n) => format!("n{n}-seed{seed}"),
                None => format!("seed{seed}"),
            };
            let opts = RunOptions { output_dir: Some(base.join(name)), seed: None, overwrite: options.overwrite };
            run_experiment(&cfg, &opts)
        })
        .collect()
}
