//! SIR and SIRS compartment equations.
//!
//! `S' = -βIS + μR`, `I' = βIS - γI`, `R' = γI - μR`; `μ = 0` is plain SIR.
//! The vector field sums to zero, so `S + I + R` is conserved by any
//! Runge-Kutta scheme up to rounding.

use crate::error::{invalid, Error, Result};
use crate::series::{FractionSample, FractionSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirState {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl SirState {
    pub fn new(s: f64, i: f64, r: f64) -> Self {
        Self { t: 0.0, s, i, r }
    }

    pub fn total(&self) -> f64 {
        self.s + self.i + self.r
    }

    pub fn as_sample(&self) -> FractionSample {
        FractionSample { t: self.t, s: self.s, i: self.i, r: self.r }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirRates {
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl SirRates {
    pub fn sir(beta: f64, gamma: f64) -> Self {
        Self { beta, gamma, mu: 0.0 }
    }
}

pub fn sir_rhs(state: &SirState, rates: &SirRates) -> [f64; 3] {
    let infection = rates.beta * state.i * state.s;
    let recovery = rates.gamma * state.i;
    let reflux = rates.mu * state.r;
    [-infection + reflux, infection - recovery, recovery - reflux]
}

/// Samples of an RK4 trajectory, one per integrator step.
#[derive(Debug, Clone, PartialEq)]
pub struct SirSolution {
    pub samples: Vec<SirState>,
    pub h: f64,
}

impl SirSolution {
    pub fn last(&self) -> &SirState {
        self.samples.last().expect("solutions always hold the initial state")
    }

    /// Samples whose times fall on the grid `k·sample_every` (step size
    /// must divide `sample_every`).
    pub fn to_series(&self, sample_every: f64) -> Result<FractionSeries> {
        let stride = whole_steps(sample_every, self.h)?;
        let mut series = FractionSeries::new();
        for (k, s) in self.samples.iter().step_by(stride).enumerate() {
            let mut sample = s.as_sample();
            sample.t = k as f64 * sample_every;
            series.push(sample)?;
        }
        Ok(series)
    }
}

fn whole_steps(interval: f64, h: f64) -> Result<usize> {
    let ratio = interval / h;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio {
        return Err(invalid("sample_every", format!("{interval} is not a multiple of h = {h}")));
    }
    Ok(k as usize)
}

fn rk4_step(y: &SirState, rates: &SirRates, h: f64) -> SirState {
    let add = |base: &SirState, k: &[f64; 3], c: f64| SirState {
        t: base.t,
        s: base.s + c * k[0],
        i: base.i + c * k[1],
        r: base.r + c * k[2],
    };
    let k1 = sir_rhs(y, rates);
    let k2 = sir_rhs(&add(y, &k1, 0.5 * h), rates);
    let k3 = sir_rhs(&add(y, &k2, 0.5 * h), rates);
    let k4 = sir_rhs(&add(y, &k3, h), rates);
    let w = h / 6.0;
    SirState {
        t: y.t + h,
        s: y.s + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        i: y.i + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        r: y.r + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    }
}

/// Fixed-step RK4 from `init` to `t_end`, calling `visit` on every state
/// including the initial one. The last step is shortened to land on
/// `t_end`.
pub fn integrate_sir_with(
    init: &SirState,
    rates: &SirRates,
    t_end: f64,
    h: f64,
    mut visit: impl FnMut(&SirState),
) -> Result<SirState> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid("h", format!("must be > 0, got {h}")));
    }
    if !(t_end >= h) || !t_end.is_finite() {
        return Err(invalid("t_end", format!("must be >= h = {h}, got {t_end}")));
    }
    let t0 = init.t;
    let full = ((t_end - t0) / h * (1.0 + 1e-12)).floor() as u64;
    let mut y = *init;
    visit(&y);
    for k in 1..=full {
        y = rk4_step(&y, rates, h);
        y.t = t0 + k as f64 * h;
        check_finite(&y)?;
        visit(&y);
    }
    let rest = t_end - y.t;
    if rest > 1e-9 * h {
        y = rk4_step(&y, rates, rest);
        y.t = t_end;
        check_finite(&y)?;
        visit(&y);
    }
    Ok(y)
}

fn check_finite(y: &SirState) -> Result<()> {
    if y.s.is_finite() && y.i.is_finite() && y.r.is_finite() {
        Ok(())
    } else {
        Err(Error::BlowUp { t: y.t })
    }
}

pub fn integrate_sir(init: &SirState, rates: &SirRates, t_end: f64, h: f64) -> Result<SirSolution> {
    let mut samples = Vec::new();
    if h > 0.0 && t_end.is_finite() {
        samples.reserve(((t_end / h).ceil() as usize).min(1 << 24) + 2);
    }
    integrate_sir_with(init, rates, t_end, h, |y| samples.push(*y))?;
    Ok(SirSolution { samples, h })
}

/// Integrates and keeps only the samples on the `k·sample_every` grid.
pub fn integrate_sir_sampled(
    init: &SirState,
    rates: &SirRates,
    t_end: f64,
    h: f64,
    sample_every: f64,
) -> Result<FractionSeries> {
    let stride = whole_steps(sample_every, h)? as u64;
    let mut series = FractionSeries::new();
    let mut step = 0u64;
    let mut err = None;
    integrate_sir_with(init, rates, t_end, h, |y| {
        if step.is_multiple_of(stride) && err.is_none() {
            let mut sample = y.as_sample();
            sample.t = (step / stride) as f64 * sample_every;
            if let Err(e) = series.push(sample) {
                err = Some(e);
            }
        }
        step += 1;
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(series),
    }
}

/// Terminal susceptible fraction of SIR with `R(0) = 0`, from
/// `y e^{-y} = S0 r e^{-r}` with `y = r S∞`, taking the root in `(0, 1]`.
pub fn s_infinity(r: f64, s0: f64, i0: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid("r", format!("beta/gamma must be > 0, got {r}")));
    }
    if !(s0 >= 0.0) || !(i0 >= 0.0) {
        return Err(invalid("s0/i0", "fractions must be nonnegative"));
    }
    if (s0 + i0 - 1.0).abs() > 1e-12 {
        return Err(invalid("r0", format!("requires R(0) = 0, got S0 + I0 = {}", s0 + i0)));
    }
    if i0 == 0.0 {
        return Ok(s0);
    }
    let rhs = s0 * r * (-r).exp();
    let cap = (-1.0f64).exp();
    if rhs > cap {
        return Err(Error::NoRoot { rhs });
    }
    let f = |y: f64| y * (-y).exp() - rhs;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi) / r)
}

/// Trapezoidal `∫ I dt` over the solution samples. The tail must have
/// decayed below `1e-8`.
pub fn delta_integral(sol: &SirSolution) -> Result<f64> {
    let last = sol.last().i;
    if !(last < 1e-8) {
        return Err(Error::TailNotConverged { last, threshold: 1e-8 });
    }
    Ok(sol.samples.windows(2).map(|w| 0.5 * (w[0].i + w[1].i) * (w[1].t - w[0].t)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const I0: f64 = PI / 100.0;

    fn fig1_rates() -> SirRates {
        SirRates::sir(crate::geometry::beta_from_params(20.0, 15.0, 500.0), 1.0 / 30.0)
    }

    fn fig1_init() -> SirState {
        SirState::new(1.0 - I0, I0, 0.0)
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(sir_rhs(&SirState::new(1.0, 0.0, 0.0), &fig1_rates()), [0.0, 0.0, 0.0]);
        let d = sir_rhs(&SirState::new(0.968584, 0.0314159, 0.0), &SirRates::sir(0.0565487, 1.0 / 30.0));
        for (got, want) in d.iter().zip([-0.0017207, 0.0006735, 0.0010472]) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        let d = sir_rhs(&SirState::new(0.5, 0.0, 0.5), &SirRates { beta: 1.0, gamma: 1.0, mu: 0.1 });
        assert_eq!(d, [0.05, 0.0, -0.05]);
    }

    #[test]
    fn disease_free_is_fixed() {
        let sol = integrate_sir(&SirState::new(0.7, 0.0, 0.3), &fig1_rates(), 50.0, 0.1).unwrap();
        assert!(sol.samples.iter().all(|y| y.s == 0.7 && y.i == 0.0 && y.r == 0.3));
        let times: Vec<f64> = sol.samples.iter().map(|y| y.t).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*times.last().unwrap(), 50.0);
    }

    #[test]
    fn invalid_steps_rejected() {
        assert!(integrate_sir(&fig1_init(), &fig1_rates(), 1.0, 0.0).is_err());
        assert!(integrate_sir(&fig1_init(), &fig1_rates(), 0.05, 0.1).is_err());
        let blow = SirRates::sir(1e300, 0.0);
        assert!(matches!(
            integrate_sir(&SirState::new(0.5, 0.5, 0.0), &blow, 10.0, 1.0),
            Err(Error::BlowUp { .. })
        ));
    }

    #[test]
    fn rk4_refinement_ratio_is_sixteen() {
        let end = |h: f64| integrate_sir(&fig1_init(), &fig1_rates(), 120.0, h).unwrap().last().i;
        let (a, b, c) = (end(2.0), end(1.0), end(0.5));
        let ratio = (a - b) / (b - c);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn conservation_and_monotonicity() {
        let sol = integrate_sir(&fig1_init(), &fig1_rates(), 1000.0, 0.01).unwrap();
        assert!(sol.samples.len() > 100_000);
        for w in sol.samples.windows(2) {
            assert!((w[1].total() - w[0].total()).abs() <= 1e-12);
            assert!(w[1].s <= w[0].s && w[1].r >= w[0].r);
            assert!(w[1].s >= 0.0 && w[1].i >= 0.0 && w[1].r >= 0.0);
        }
        assert!((sol.last().total() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn s_infinity_edge_cases() {
        assert_eq!(s_infinity(3.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(s_infinity(0.4, 1.0, 0.0).unwrap(), 1.0);
        assert!(s_infinity(0.4, 0.8, 0.0).is_err());
        let tiny = s_infinity(1e-6, 0.9, 0.1).unwrap();
        assert!((tiny - 0.9).abs() < 1e-6);
        assert!(s_infinity(1.0, 0.8, 0.1).is_err());
        assert!(s_infinity(0.0, 0.9, 0.1).is_err());
    }

    #[test]
    fn s_infinity_matches_long_integration() {
        let r = 0.54 * PI;
        let s_inf = s_infinity(r, 1.0 - I0, I0).unwrap();
        let rates = SirRates::sir(r, 1.0);
        let last = *integrate_sir(&fig1_init(), &rates, 200.0, 0.01).unwrap().last();
        assert!((s_inf - last.s).abs() <= 1e-4, "{s_inf} vs {}", last.s);
        // frozen from the two agreeing oracles above
        assert!((s_inf - 0.290840).abs() < 1e-5, "{s_inf}");
    }

    #[test]
    fn s_infinity_random_consistency() {
        let mut rng = crate::rng::RngStream::new(2024, 0);
        for _ in 0..50 {
            let r = 0.5 + 4.5 * rng.uniform();
            let i0 = 0.001 + 0.2 * rng.uniform();
            let s_inf = s_infinity(r, 1.0 - i0, i0).unwrap();
            let rates = SirRates::sir(r, 1.0);
            // 10^4 / gamma with gamma = 1
            let mut end = SirState::new(0.0, 0.0, 0.0);
            integrate_sir_with(&SirState::new(1.0 - i0, i0, 0.0), &rates, 1e4, 0.1, |y| end = *y)
                .unwrap();
            assert!((s_inf - end.s).abs() <= 1e-4, "r={r} i0={i0}: {s_inf} vs {}", end.s);
        }
    }

    #[test]
    fn delta_for_no_epidemic_and_pure_decay() {
        let sol = integrate_sir(&SirState::new(1.0, 0.0, 0.0), &fig1_rates(), 10.0, 0.1).unwrap();
        assert_eq!(delta_integral(&sol).unwrap(), 0.0);
        let gamma = 0.5;
        let sol = integrate_sir(&SirState::new(0.0, 0.2, 0.8), &SirRates::sir(0.0, gamma), 60.0, 0.01)
            .unwrap();
        let delta = delta_integral(&sol).unwrap();
        assert!((delta - 0.2 / gamma).abs() < 1e-5, "{delta}");
    }

    #[test]
    fn delta_requires_converged_tail() {
        let sol = integrate_sir(&fig1_init(), &fig1_rates(), 100.0, 0.1).unwrap();
        assert!(matches!(delta_integral(&sol), Err(Error::TailNotConverged { .. })));
    }

    #[test]
    fn recovered_gain_equals_gamma_delta() {
        let rates = fig1_rates();
        let sol = integrate_sir(&fig1_init(), &rates, 1200.0, 0.05).unwrap();
        let delta = delta_integral(&sol).unwrap();
        let gained = sol.last().r - sol.samples[0].r;
        assert!((gained - rates.gamma * delta).abs() <= 1e-4);
        let s_inf = s_infinity(rates.beta / rates.gamma, 1.0 - I0, I0).unwrap();
        assert!((sol.last().s - s_inf).abs() <= 1e-4);
    }

    #[test]
    fn sirs_keeps_total() {
        let rates = SirRates { beta: 0.5, gamma: 0.1, mu: 0.05 };
        let sol = integrate_sir(&SirState::new(0.99, 0.01, 0.0), &rates, 500.0, 0.1).unwrap();
        assert!(sol.samples.iter().all(|y| (y.total() - 1.0).abs() < 1e-9));
        // endemic: infection persists
        assert!(sol.last().i > 0.01);
    }

    #[test]
    fn sampled_series_on_grid() {
        let series =
            integrate_sir_sampled(&fig1_init(), &fig1_rates(), 600.0, 0.01, 3.0).unwrap();
        assert_eq!(series.len(), 201);
        assert_eq!(series.samples()[200].t, 600.0);
        let full = integrate_sir(&fig1_init(), &fig1_rates(), 600.0, 0.01).unwrap();
        assert_eq!(full.to_series(3.0).unwrap(), series);
    }
}
