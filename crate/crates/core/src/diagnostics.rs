//! Empirical checks of the mean-field limit: a pair-correlation index for
//! `{I, S}` pairs, total-variation mixing of the free random flight, and
//! per-run epidemic summaries.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::geometry::{torus_distance_sq, TorusPoint};
use crate::init::Particle;
use crate::params::Label;
use crate::particle::ParticleState;
use crate::spatial::SpatialIndex;

pub use crate::series::{FractionSample, FractionSeries};

/// Nodes per cell-offset class in the pair-probability quadrature.
pub const QUADRATURE_NODES: usize = 1 << 14;

/// Flat `key = value` rendering used for report files.
pub trait KeyValueReport {
    fn entries(&self) -> Vec<(&'static str, String)>;

    fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChaosReport {
    pub t: f64,
    /// Unordered `{I, S}` pairs closer than `R`.
    pub observed: u64,
    /// Expected count if labels were independent of position within cells.
    pub baseline: f64,
    pub index: f64,
}

impl KeyValueReport for ChaosReport {
    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("t", self.t.to_string()),
            ("observed_pairs", self.observed.to_string()),
            ("baseline_pairs", self.baseline.to_string()),
            ("chi_corr", self.index.to_string()),
        ]
    }
}

/// Additive recurrence in `[0,1)^4` with the generalized golden ratio.
fn kronecker_nodes(count: usize) -> impl Iterator<Item = [f64; 4]> {
    // root of x^5 = x + 1
    let mut phi = 1.2f64;
    for _ in 0..50 {
        phi -= (phi.powi(5) - phi - 1.0) / (5.0 * phi.powi(4) - 1.0);
    }
    let alpha = [1, 2, 3, 4].map(|k| phi.powi(-k).fract());
    (0..count).map(move |n| alpha.map(|a| (0.5 + n as f64 * a).fract()))
}

/// Pair-correlation estimator for one `(R, D)` geometry. Building it
/// computes the within-`R` probability for each neighbor cell offset once.
#[derive(Debug, Clone)]
pub struct ChaosEstimator {
    index: SpatialIndex,
    r0_radius: f64,
    side: f64,
    /// `(offset, p)` over the distinct neighbor offsets.
    table: Vec<((usize, usize), f64)>,
}

impl ChaosEstimator {
    pub fn new(r0_radius: f64, side: f64) -> Result<Self> {
        let index = SpatialIndex::new(r0_radius, side)?;
        let c = index.cell_side();
        let r2 = r0_radius * r0_radius;
        let n = index.cells_per_axis();
        let probability = |(di, dj): (usize, usize)| {
            let hits = kronecker_nodes(QUADRATURE_NODES)
                .filter(|u| {
                    let a = TorusPoint::from_wrapped(u[0] * c, u[1] * c);
                    let b = TorusPoint::new((di as f64 + u[2]) * c, (dj as f64 + u[3]) * c, side)
                        .expect("finite node");
                    torus_distance_sq(a, b, side) < r2
                })
                .count();
            hits as f64 / QUADRATURE_NODES as f64
        };
        let table = if n >= 3 {
            // three symmetry classes: same cell, edge neighbor, corner neighbor
            let classes = [probability((0, 0)), probability((0, 1)), probability((1, 1))];
            index
                .neighbor_offsets()
                .iter()
                .map(|&(di, dj)| ((di, dj), classes[usize::from(di != 0) + usize::from(dj != 0)]))
                .collect()
        } else {
            index.neighbor_offsets().iter().map(|&o| (o, probability(o))).collect()
        };
        Ok(Self { index, r0_radius, side, table })
    }

    /// Probability that uniform points in two cells at `offset` lie within `R`.
    pub fn pair_probability(&self, offset: (usize, usize)) -> f64 {
        self.table.iter().find(|(o, _)| *o == offset).map_or(0.0, |(_, p)| *p)
    }

    pub fn estimate(&mut self, state: &ParticleState) -> Result<ChaosReport> {
        self.estimate_particles(&state.particles, state.time())
    }

    pub fn estimate_particles(&mut self, particles: &[Particle], t: f64) -> Result<ChaosReport> {
        let has = |l: Label| particles.iter().any(|p| p.label == l);
        if !has(Label::I) || !has(Label::S) {
            return Err(Error::IndexUndefined("need at least one I and one S agent"));
        }
        self.index.rebuild(particles);
        let mut observed = 0u64;
        for p in particles.iter().filter(|p| p.label == Label::I) {
            self.index.for_each_within(particles, p.position, self.r0_radius, |k| {
                if particles[k].label == Label::S {
                    observed += 1;
                }
            });
        }
        let n = self.index.cells_per_axis();
        let mut n_i = vec![0u64; n * n];
        let mut n_s = vec![0u64; n * n];
        for p in particles {
            let (i, j) = self.index.cell_coords(p.position);
            match p.label {
                Label::I => n_i[self.index.cell_id(i, j)] += 1,
                Label::S => n_s[self.index.cell_id(i, j)] += 1,
                Label::R => {}
            }
        }
        let mut baseline = 0.0;
        for i in 0..n {
            for j in 0..n {
                let ni = n_i[self.index.cell_id(i, j)];
                if ni == 0 {
                    continue;
                }
                let mut acc = 0.0;
                for &((di, dj), p) in &self.table {
                    acc += n_s[self.index.cell_id((i + di) % n, (j + dj) % n)] as f64 * p;
                }
                baseline += ni as f64 * acc;
            }
        }
        // No I cell neighbors any S cell: supports are disjoint at scale R.
        let index = if baseline > 0.0 { observed as f64 / baseline } else { 0.0 };
        Ok(ChaosReport { t, observed, baseline, index })
    }

    pub fn side(&self) -> f64 {
        self.side
    }
}

/// One-shot pair-correlation index; build a [`ChaosEstimator`] for
/// repeated use.
pub fn pair_correlation_index(state: &ParticleState, r0_radius: f64, side: f64) -> Result<ChaosReport> {
    ChaosEstimator::new(r0_radius, side)?.estimate(state)
}

/// Histogram resolution: `bx × bx` spatial boxes times `bv` heading boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixingBins {
    pub bx: usize,
    pub bv: usize,
}

impl MixingBins {
    pub fn boxes(&self) -> usize {
        self.bx * self.bx * self.bv
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub times: Vec<f64>,
    pub tv: Vec<f64>,
    /// `√(boxes / N) / 2`, the scale of sampling noise in an empirical TV.
    pub noise_floor: f64,
    /// `-slope` of `log TV` over the samples with `TV > 3 × floor`,
    /// clamped at zero; `None` when fewer than three samples qualify.
    pub rate: Option<f64>,
}

impl KeyValueReport for MixingReport {
    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("samples", self.times.len().to_string()),
            ("noise_floor", self.noise_floor.to_string()),
            ("fit_threshold", (3.0 * self.noise_floor).to_string()),
            ("rate", self.rate.map_or("undefined".into(), |a| a.to_string())),
            ("tv_first", self.tv.first().map_or("undefined".into(), |v| v.to_string())),
            ("tv_last", self.tv.last().map_or("undefined".into(), |v| v.to_string())),
        ]
    }
}

/// Counts of `(x1, x2, θ)` over the box grid, index `(a·bx + b)·bv + c`.
pub fn phase_histogram(particles: &[Particle], side: f64, bins: MixingBins) -> Vec<u64> {
    let mut counts = vec![0u64; bins.boxes()];
    let bx = bins.bx as f64;
    let bv = bins.bv as f64;
    for p in particles {
        let a = ((p.position.x1 / side * bx) as usize).min(bins.bx - 1);
        let b = ((p.position.x2 / side * bx) as usize).min(bins.bx - 1);
        let c = ((p.velocity.angle() / TAU * bv) as usize).min(bins.bv - 1);
        counts[(a * bins.bx + b) * bins.bv + c] += 1;
    }
    counts
}

/// `½ Σ |p̂ − 1/B|` for a histogram of `B` boxes.
pub fn tv_from_counts(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if counts.is_empty() || total == 0 {
        return Err(Error::Empty("histogram"));
    }
    let u = 1.0 / counts.len() as f64;
    let n = total as f64;
    Ok(0.5 * counts.iter().map(|&c| (c as f64 / n - u).abs()).sum::<f64>())
}

pub fn tv_to_uniform(states: &[ParticleState], side: f64, bins: MixingBins) -> Result<MixingReport> {
    if bins.bx < 2 || bins.bv < 2 {
        return Err(invalid("bins", "need at least 2 boxes per axis"));
    }
    let first = states.first().ok_or(Error::Empty("state sequence"))?;
    if first.particles.is_empty() {
        return Err(Error::Empty("particles"));
    }
    let mut times = Vec::with_capacity(states.len());
    let mut tv = Vec::with_capacity(states.len());
    for st in states {
        times.push(st.time());
        tv.push(tv_from_counts(&phase_histogram(&st.particles, side, bins))?);
    }
    Ok(mixing_report(times, tv, first.particles.len(), bins))
}

/// Assembles a report from precomputed TV values, e.g. when snapshots are
/// reduced on the fly.
pub fn mixing_report(times: Vec<f64>, tv: Vec<f64>, n: usize, bins: MixingBins) -> MixingReport {
    let noise_floor = (bins.boxes() as f64 / n as f64).sqrt() / 2.0;
    let window: Vec<(f64, f64)> = times
        .iter()
        .zip(&tv)
        .filter(|(_, v)| **v > 3.0 * noise_floor)
        .map(|(t, v)| (*t, *v))
        .collect();
    let rate = fit_decay_rate(&window).ok().map(|a| a.max(0.0));
    MixingReport { times, tv, noise_floor, rate }
}

/// Least-squares exponential rate: `-slope` of `log y` against `t`.
pub fn fit_decay_rate(points: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| t.is_finite() && y.is_finite() && *y > 0.0)
        .map(|(t, y)| (*t, y.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::TooFewPoints(usable.len()));
    }
    let n = usable.len() as f64;
    let t_mean = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let l_mean = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in &usable {
        sxy += (t - t_mean) * (l - l_mean);
        sxx += (t - t_mean) * (t - t_mean);
    }
    if sxx == 0.0 {
        return Err(invalid("t", "all sample times coincide"));
    }
    Ok(-sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpidemicSummary {
    pub peak_i: f64,
    pub peak_time: f64,
    pub final_s: f64,
    pub final_r: f64,
    /// Trapezoidal `∫ I dt` over the series.
    pub delta: f64,
    /// `|R_end − R_0 − γ δ|`.
    pub residual: f64,
}

impl KeyValueReport for EpidemicSummary {
    fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("peak_i", self.peak_i.to_string()),
            ("peak_time", self.peak_time.to_string()),
            ("final_s", self.final_s.to_string()),
            ("final_r", self.final_r.to_string()),
            ("delta", self.delta.to_string()),
            ("residual", self.residual.to_string()),
        ]
    }
}

/// Infected fraction below which a series counts as extinct.
pub const EXTINCTION_LEVEL: f64 = 1e-3;

pub fn epidemic_summary(series: &FractionSeries, gamma: f64) -> Result<EpidemicSummary> {
    let samples = series.samples();
    let (first, last) = match (samples.first(), samples.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Empty("series")),
    };
    if !(last.i < EXTINCTION_LEVEL) {
        return Err(Error::NotExtinct(last.i));
    }
    let peak = series.peak_infected().expect("non-empty");
    let delta: f64 = samples.windows(2).map(|w| 0.5 * (w[0].i + w[1].i) * (w[1].t - w[0].t)).sum();
    Ok(EpidemicSummary {
        peak_i: peak.i,
        peak_time: peak.t,
        final_s: last.s,
        final_r: last.r,
        delta,
        residual: (last.r - first.r - gamma * delta).abs(),
    })
}
