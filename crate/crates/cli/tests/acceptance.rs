//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! to stderr; the process exits non-zero if any criterion fails.
//!
//! `cargo test -p simlab-cli --test acceptance -- 1 6 8` runs a subset.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use simlab_cli::{chaos_at_peak, preset, run_mixing, Figure, Variant};
use simlab_core::diagnostics::{epidemic_summary, MixingBins};
use simlab_core::kinetic::{
    run_kinetic, KineticField, KineticGrid, KineticParams, KineticRunOptions, KineticSolver,
};
use simlab_core::ode::{integrate_sir, integrate_sir_sampled, s_infinity, SirRates, SirState};
use simlab_core::particle::{EventStreams, Stepper};
use simlab_core::{
    init_particles, run_particle, FractionSeries, InitialData, Label, Model, ParticleState, Placement, RngStream,
    SimParams, StreamTag,
};

const I0: f64 = PI / 100.0;
const RATIO: f64 = 0.54 * PI;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn fig1(n: usize, seed: u64) -> SimParams {
    SimParams { n, side: 500.0, lambda: 20.0, gamma: 1.0 / 30.0, mu: 0.0, r0_radius: 15.0, dt: 0.05, seed }
}

fn start() -> SirState {
    SirState::new(1.0 - I0, I0, 0.0)
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `(mean_b - mean_a) / SE` of the difference, with a zero SE mapped to
/// an infinite separation of the right sign.
fn separation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_sd(a);
    let (mb, sb) = mean_sd(b);
    let se = (sa * sa / a.len() as f64 + sb * sb / b.len() as f64).sqrt();
    let diff = mb - ma;
    if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

fn ensemble(model: Model, params: &SimParams, init: &InitialData, t_end: f64, every: f64, seeds: &[u64]) -> Vec<FractionSeries> {
    seeds
        .iter()
        .map(|&seed| run_particle(model, &SimParams { seed, ..*params }, init, t_end, every).unwrap())
        .collect()
}

fn uniform_kinetic_setup() -> (KineticSolver, KineticField) {
    let grid = KineticGrid::new(64, 16, 500.0).unwrap();
    let params = KineticParams { lambda: 20.0, gamma: 1.0 / 30.0, mu: 0.0, r0_radius: 15.0, dt: 0.01 };
    let solver = KineticSolver::new(grid, params).unwrap();
    let field = KineticField::from_initial_data(grid, &InitialData::seeded(I0, Placement::Homogeneous)).unwrap();
    (solver, field)
}

fn homogeneous_reduction() -> Verdict {
    let (mut solver, field) = uniform_kinetic_setup();
    let beta = solver.discrete_beta();
    let run = run_kinetic(field, &mut solver, 300.0, 1.5, &KineticRunOptions::default()).unwrap();
    let ode = integrate_sir_sampled(&start(), &SirRates::sir(beta, 1.0 / 30.0), 300.0, 0.01, 1.5).unwrap();
    let sup = run.series.sup_distance(&ode).unwrap();
    verdict(sup <= 1e-3, format!("kinetic 64x16 vs ODE(beta_discrete = {beta:.6}): sup = {sup:.3e} (<= 1e-3)"))
}

fn model1_matches_ode() -> Verdict {
    let runs = ensemble(Model::Pairwise, &fig1(20_000, 0), &InitialData::seeded(I0, Placement::Homogeneous), 600.0, 3.0, &[1, 2, 3, 4, 5]);
    let mean = FractionSeries::mean(&runs).unwrap();
    let ode = integrate_sir_sampled(&start(), &SirRates::sir(fig1(1, 0).beta(), 1.0 / 30.0), 600.0, 0.01, 3.0).unwrap();
    let sup = mean.sup_distance(&ode).unwrap();
    let peak = mean.peak_infected().unwrap();
    let ode_peak = ode.peak_infected().unwrap();
    verdict(
        sup <= 0.02,
        format!(
            "Model 1, N=20000, 5-seed mean vs ODE: sup = {sup:.4} (<= 0.02); peak I {:.4} at t={} vs ODE {:.4} at t={}",
            peak.i, peak.t, ode_peak.i, ode_peak.t
        ),
    )
}

fn concentrated_effect() -> Verdict {
    let params = fig1(50_000, 0);
    let seeds = [1, 2, 3, 4, 5];
    let collect = |placement| {
        let runs = ensemble(Model::Pairwise, &params, &InitialData::seeded(I0, placement), 600.0, 3.0, &seeds);
        let peaks: Vec<_> = runs.iter().map(|r| r.peak_infected().unwrap()).collect();
        (
            peaks.iter().map(|p| p.i).collect::<Vec<_>>(),
            peaks.iter().map(|p| p.t).collect::<Vec<_>>(),
            runs.iter().map(|r| r.last().unwrap().s).collect::<Vec<_>>(),
        )
    };
    let (hom_i, hom_t, hom_s) = collect(Placement::Homogeneous);
    let (con_i, con_t, con_s) = collect(Placement::ConcentratedDisk);
    let lower_peak = separation(&con_i, &hom_i);
    let later_peak = separation(&hom_t, &con_t);
    let larger_s = separation(&hom_s, &con_s);
    let ok = |z: f64| if z > 2.0 { "ok" } else { "FAIL" };
    verdict(
        lower_peak > 2.0 && later_peak > 2.0 && larger_s > 2.0,
        format!(
            "N=50000, 5 seeds: peak I hom {:.4} conc {:.4} ({:.1} SE, {}); peak t hom {:.1} conc {:.1} {:?} ({:.1} SE, {}); S(600) hom {:.4} conc {:.4} ({:.1} SE, {})",
            mean_sd(&hom_i).0, mean_sd(&con_i).0, lower_peak, ok(lower_peak),
            mean_sd(&hom_t).0, mean_sd(&con_t).0, con_t, later_peak, ok(later_peak),
            mean_sd(&hom_s).0, mean_sd(&con_s).0, larger_s, ok(larger_s),
        ),
    )
}

fn model2_deviation() -> Verdict {
    let params = fig1(20_000, 1);
    let sir_peak = |beta| {
        let ode = integrate_sir_sampled(&start(), &SirRates::sir(beta, params.gamma), 300.0, 0.01, 1.5).unwrap();
        ode.peak_infected().unwrap().i
    };
    let ode_peak = sir_peak(params.beta());
    let (solver, _) = uniform_kinetic_setup();
    let stencil_peak = sir_peak(solver.discrete_beta());
    let series = run_particle(Model::Crowd, &params, &InitialData::seeded(I0, Placement::Homogeneous), 600.0, 3.0).unwrap();
    let peak = series.peak_infected().unwrap();
    verdict(
        peak.i < 0.5 * ode_peak,
        format!(
            "Model 2, N=20000: peak I {:.4} at t={} vs half the SIR peak {:.4} (64-cell stencil beta would give {:.4}); final S {:.4}",
            peak.i,
            peak.t,
            0.5 * ode_peak,
            0.5 * stencil_peak,
            series.last().unwrap().s
        ),
    )
}

fn model2_slow_regime() -> Verdict {
    let cfg = preset(Figure::Fig2, Variant::Homog, None);
    let params = SimParams { n: 20_000, ..cfg.sim_params().unwrap() };
    assert_eq!(params.dt, 0.5);
    let every = cfg.sample_every();
    let seeds = [1, 2, 3];
    let hom = FractionSeries::mean(&ensemble(Model::Crowd, &params, &InitialData::seeded(I0, Placement::Homogeneous), cfg.t_end, every, &seeds)).unwrap();
    let con = FractionSeries::mean(&ensemble(Model::Crowd, &params, &InitialData::seeded(I0, Placement::ConcentratedDisk), cfg.t_end, every, &seeds)).unwrap();
    let ode = integrate_sir_sampled(&start(), &SirRates::sir(params.beta(), params.gamma), cfg.t_end, params.dt, every).unwrap();
    let vs_ode = hom.sup_distance(&ode).unwrap();
    let hom_con = hom.sup_distance(&con).unwrap();
    verdict(
        vs_ode <= 0.05 && hom_con <= 0.05,
        format!("Model 2, N=20000, dt=0.5, 3 seeds: hom vs ODE sup = {vs_ode:.4} (<= 0.05); hom vs conc sup = {hom_con:.4} (<= 0.05)"),
    )
}

fn ratio_and_rescaling() -> Verdict {
    let cfgs = [Figure::Fig1, Figure::Fig2, Figure::Fig3].map(|f| preset(f, Variant::Ode, None));
    let worst = cfgs
        .iter()
        .map(|c| {
            let r = simlab_core::beta_from_params(c.lambda, c.r0_radius, c.side) / c.gamma;
            ((r - RATIO) / RATIO).abs()
        })
        .fold(0.0, f64::max);
    let [c1, _, c3] = &cfgs;
    let solve = |c: &simlab_cli::ExperimentConfig| {
        let beta = simlab_core::beta_from_params(c.lambda, c.r0_radius, c.side);
        integrate_sir_sampled(&start(), &SirRates::sir(beta, c.gamma), c.t_end, c.ode_step(), c.sample_every()).unwrap()
    };
    let (a, b) = (solve(c1), solve(c3));
    let scale = c1.gamma / c3.gamma;
    let mut sup: f64 = 0.0;
    for (p, q) in a.samples().iter().zip(b.samples()) {
        assert!((q.t - scale * p.t).abs() <= 1e-9 * q.t.max(1.0));
        sup = sup.max((p.s - q.s).abs()).max((p.i - q.i).abs()).max((p.r - q.r).abs());
    }
    verdict(
        worst <= 1e-14 && sup <= 1e-6 && a.len() == b.len(),
        format!("beta/gamma relative error {worst:.1e} (<= 1e-14); fig1 vs fig3 under t -> {scale}t: sup = {sup:.2e} (<= 1e-6)"),
    )
}

fn conservation_suites() -> Verdict {
    let mut problems = Vec::new();
    for model in [Model::Pairwise, Model::Crowd] {
        for seed in 1..=3 {
            for placement in [Placement::Homogeneous, Placement::ConcentratedDisk] {
                let params = fig1(5000, seed);
                let ps = init_particles(&params, &InitialData::seeded(I0, placement), &mut RngStream::tagged(seed, StreamTag::Init)).unwrap();
                let mut state = ParticleState::new(ps, params.dt);
                let mut stepper = Stepper::new(model, &params).unwrap();
                let mut streams = EventStreams::from_seed(seed);
                let mut prev = state.counts();
                for _ in 0..12_000 {
                    stepper.step(&mut state, &mut streams);
                    let c = state.counts();
                    if c.iter().sum::<usize>() != params.n || c[Label::S.index()] > prev[0] || c[Label::R.index()] < prev[2] {
                        problems.push(format!("{model:?} seed {seed} at t={}", state.time()));
                        break;
                    }
                    prev = c;
                }
            }
        }
    }

    let grid = KineticGrid::new(16, 8, 500.0).unwrap();
    let kp = KineticParams { lambda: 20.0, gamma: 1.0 / 30.0, mu: 0.0, r0_radius: 15.0, dt: 0.01 };
    let init = KineticField::from_initial_data(grid, &InitialData::seeded(I0, Placement::ConcentratedDisk)).unwrap();
    let mut solver = KineticSolver::new(grid, kp).unwrap();
    let mut field = init.clone();
    let m0 = field.mass();
    let mut drift: f64 = 0.0;
    for _ in 0..100_000 {
        solver.step(&mut field);
        drift = drift.max(((field.mass() - m0) / m0).abs());
    }

    let mut full = init.clone();
    let mut flight = init.clone();
    let total = init.total_density();
    flight.data = [total, vec![0.0; grid.len()], vec![0.0; grid.len()]];
    for _ in 0..2000 {
        solver.step(&mut full);
        solver.random_flight_step(&mut flight);
    }
    let g = full.total_density();
    let scale = flight.max_value();
    let sum_err = g.iter().zip(&flight.data[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;

    verdict(
        problems.is_empty() && drift <= 1e-9 && sum_err <= 1e-12,
        format!(
            "particle S+I+R/monotonicity: {} (12 runs x 12000 steps); kinetic mass drift {drift:.1e} over 1e5 steps (<= 1e-9); sum-field vs random flight {sum_err:.1e} relative (<= 1e-12)",
            if problems.is_empty() { "ok".to_string() } else { problems.join(", ") }
        ),
    )
}

fn final_size() -> Verdict {
    let s_inf = s_infinity(RATIO, 1.0 - I0, I0).unwrap();
    let gamma = 1.0 / 30.0;
    let long = integrate_sir(&start(), &SirRates::sir(RATIO * gamma, gamma), 3.0e4, 0.05).unwrap();
    let gap = (long.last().s - s_inf).abs();
    let cfg = preset(Figure::Fig1, Variant::Ode, None);
    let series = integrate_sir_sampled(&start(), &SirRates::sir(RATIO * gamma, gamma), cfg.t_end, cfg.ode_step(), cfg.sample_every()).unwrap();
    let summary = epidemic_summary(&series, gamma).unwrap();
    verdict(
        gap <= 1e-4 && summary.residual <= 1e-4,
        format!(
            "s_infinity = {s_inf:.6}, |S(3e4) - s_infinity| = {gap:.1e} (<= 1e-4); summary residual {:.1e} (<= 1e-4)",
            summary.residual
        ),
    )
}

fn mixing() -> Verdict {
    let params = SimParams { n: 100_000, side: 10.0, lambda: 0.0, gamma: 0.0, mu: 0.0, r0_radius: 1.0, dt: 0.05, seed: 1 };
    let run = run_mixing(&params, 40.0, 1.0, MixingBins { bx: 20, bv: 8 }).unwrap();
    let rep = &run.report;
    let window: Vec<f64> = rep.tv.iter().copied().filter(|v| *v > 3.0 * rep.noise_floor).collect();
    let decreasing = window.len() >= 3 && window.windows(2).all(|w| w[1] <= w[0]);
    let at30 = rep.tv[rep.times.iter().position(|t| *t == 30.0).unwrap()];
    let rate = rep.rate.unwrap_or(0.0);
    verdict(
        decreasing && rate > 0.0 && at30 < 0.1,
        format!(
            "D=10, N=1e5, 20x20x8: TV decreasing over {} samples above 3x floor ({decreasing}); rate a = {rate:.3} (> 0); TV(30) = {at30:.4} (< 0.1); floor {:.4}",
            window.len(),
            rep.noise_floor
        ),
    )
}

fn chaos_trend() -> Verdict {
    let init = InitialData::seeded(I0, Placement::Homogeneous);
    let seeds: Vec<u64> = (1..=10).collect();
    let mut devs = Vec::new();
    for n in [2000, 8000, 32_000] {
        let d: Vec<f64> = seeds
            .iter()
            .map(|&s| (chaos_at_peak(Model::Pairwise, &fig1(n, s), &init, 600.0, 3.0).unwrap().1.report.index - 1.0).abs())
            .collect();
        devs.push((n, mean_sd(&d).0));
    }
    let trend = devs.windows(2).all(|w| w[1].1 <= w[0].1);
    let chis: Vec<f64> = seeds
        .iter()
        .map(|&s| chaos_at_peak(Model::Crowd, &fig1(20_000, s), &init, 600.0, 3.0).unwrap().1.report.index)
        .collect();
    let chi2 = mean_sd(&chis).0;
    let listed: Vec<String> = devs.iter().map(|(n, d)| format!("N={n}: {d:.4}")).collect();
    verdict(
        trend && chi2 > 1.5,
        format!(
            "Model 1 mean |chi-1| at peak {} (nonincreasing: {trend}); Model 2 N=20000 mean chi at peak {chi2:.3} (> 1.5, calibrated surrogate threshold)",
            listed.join(", ")
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "kinetic solver reduces to SIR for uniform data", homogeneous_reduction),
    (2, "Model 1 tracks SIR for homogeneous data", model1_matches_ode),
    (3, "concentrated start: lower, later peak and more susceptibles left", concentrated_effect),
    (4, "Model 2 far from SIR at the fast parameters", model2_deviation),
    (5, "Model 2 tracks SIR at the slow parameters", model2_slow_regime),
    (6, "shared beta/gamma and time rescaling across presets", ratio_and_rescaling),
    (7, "conservation and monotonicity", conservation_suites),
    (8, "final size relation", final_size),
    (9, "random flight mixes", mixing),
    (10, "pair-correlation trend", chaos_trend),
];

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, check) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        eprintln!("criterion {id:>2} {status}: {name} [{:.0}s] {}", started.elapsed().as_secs_f64(), v.detail);
        if !v.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        eprintln!("acceptance: all selected criteria pass");
        ExitCode::SUCCESS
    } else {
        eprintln!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
