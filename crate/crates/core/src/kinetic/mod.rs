//! Deterministic solver for the kinetic SIR system on a periodic
//! `(x, θ)` grid.
//!
//! Each step is a Lie splitting of three exactly or unconditionally
//! stable substeps, in fixed order:
//!
//! 1. free transport `∂_t f + v·∇_x f = 0`, semi-Lagrangian with
//!    bilinear periodic interpolation per heading slice;
//! 2. velocity relaxation toward the angular mean at rate 1, solved in
//!    closed form;
//! 3. reactions `S → I` at rate `λ K(x)` with `K = χ_R * ρ_I` frozen over
//!    the step, then `I → R` at rate `γ`, then `R → S` at rate `μ`, each
//!    an exact exponential transfer.
//!
//! Every substep maps nonnegative fields to nonnegative fields, and the
//! reaction substep only moves mass between labels at a point, so the
//! label sum follows the pure random-flight dynamics.

mod grid;
pub mod io;

pub use grid::{field_fractions, uniform_from_fractions, KineticField, KineticGrid};

use crate::error::{invalid, Error, Result};
use crate::geometry::torus_distance_sq;
use crate::params::{Label, SimParams};
use crate::series::{FractionSample, FractionSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParams {
    pub lambda: f64,
    pub gamma: f64,
    pub mu: f64,
    pub r0_radius: f64,
    pub dt: f64,
}

impl KineticParams {
    pub fn from_sim(params: &SimParams) -> Self {
        Self {
            lambda: params.lambda,
            gamma: params.gamma,
            mu: params.mu,
            r0_radius: params.r0_radius,
            dt: params.dt,
        }
    }

    fn validate(&self, grid: &KineticGrid) -> Result<()> {
        for (field, v) in [("lambda", self.lambda), ("gamma", self.gamma), ("mu", self.mu)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.r0_radius > 0.0) || self.r0_radius >= 0.5 * grid.side {
            return Err(invalid(
                "r0_radius",
                format!("need 0 < r0_radius < D/2 = {}, got {}", 0.5 * grid.side, self.r0_radius),
            ));
        }
        Ok(())
    }
}

/// Cells whose center lies strictly within `R` of the origin cell's
/// center, as offsets modulo the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskStencil {
    pub offsets: Vec<(usize, usize)>,
    /// `#cells · Δx²`.
    pub area: f64,
}

impl DiskStencil {
    pub fn new(grid: &KineticGrid, r0_radius: f64) -> Self {
        let origin = grid.cell_center(0, 0);
        let r2 = r0_radius * r0_radius;
        let mut offsets = Vec::new();
        for i in 0..grid.nx {
            for j in 0..grid.nx {
                if torus_distance_sq(origin, grid.cell_center(i, j), grid.side) < r2 {
                    offsets.push((i, j));
                }
            }
        }
        let area = offsets.len() as f64 * grid.dx * grid.dx;
        Self { offsets, area }
    }

    /// `λ · area / D²`: the SIR rate the discrete stencil implies for
    /// spatially uniform data.
    pub fn discrete_beta(&self, lambda: f64, side: f64) -> f64 {
        lambda * self.area / (side * side)
    }
}

/// Backtrace of one heading slice: integer cell shift plus bilinear
/// weights, identical for every cell.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SliceShift {
    shift: (usize, usize),
    frac: (f64, f64),
}

impl SliceShift {
    fn new(grid: &KineticGrid, k: usize, dt: f64) -> Self {
        let (s, c) = grid.angle(k).sin_cos();
        let sx = c * dt / grid.dx;
        let sy = s * dt / grid.dx;
        let (fx, fy) = (sx.floor(), sy.floor());
        let n = grid.nx as i64;
        Self {
            shift: ((fx as i64).rem_euclid(n) as usize, (fy as i64).rem_euclid(n) as usize),
            frac: (sx - fx, sy - fy),
        }
    }
}

fn shift_slice(src: &[f64], dst: &mut [f64], nx: usize, sh: SliceShift) {
    let (ax, ay) = sh.frac;
    let w00 = (1.0 - ax) * (1.0 - ay);
    let w10 = ax * (1.0 - ay);
    let w01 = (1.0 - ax) * ay;
    let w11 = ax * ay;
    let col0: Vec<usize> = (0..nx).map(|j| (j + nx - sh.shift.1) % nx).collect();
    let col1: Vec<usize> = col0.iter().map(|&c| (c + nx - 1) % nx).collect();
    for i in 0..nx {
        let r0 = (i + nx - sh.shift.0) % nx;
        let r1 = (r0 + nx - 1) % nx;
        let row0 = &src[r0 * nx..(r0 + 1) * nx];
        let row1 = &src[r1 * nx..(r1 + 1) * nx];
        let out = &mut dst[i * nx..(i + 1) * nx];
        for j in 0..nx {
            let (c0, c1) = (col0[j], col1[j]);
            out[j] = w00 * row0[c0] + w10 * row1[c0] + w01 * row0[c1] + w11 * row1[c1];
        }
    }
}

/// Translates one `nx × nx` heading slice by `v_k · dt`: the new value at
/// each cell center is the bilinear periodic interpolation at the
/// backtraced foot point.
pub fn transport_slice(slice: &[f64], grid: &KineticGrid, k: usize, dt: f64) -> Vec<f64> {
    let mut out = vec![0.0; slice.len()];
    shift_slice(slice, &mut out, grid.nx, SliceShift::new(grid, k, dt));
    out
}

/// Closed-form rate-1 relaxation toward the angular mean `ρ / 2π`.
pub fn relax_velocity(field: &mut KineticField, dt: f64) {
    let grid = field.grid;
    let keep = (-dt).exp();
    let mix = -(-dt).exp_m1() * grid.dv / std::f64::consts::TAU;
    let cells = grid.cells();
    let mut rho = vec![0.0; cells];
    for data in field.data.iter_mut() {
        rho.iter_mut().for_each(|r| *r = 0.0);
        for slice in data.chunks_exact(cells) {
            for (r, v) in rho.iter_mut().zip(slice) {
                *r += v;
            }
        }
        // rho holds Σ_k f; the target ρ/2π equals Σ_k f · Δv / 2π
        for slice in data.chunks_exact_mut(cells) {
            for (v, r) in slice.iter_mut().zip(&rho) {
                *v = keep * *v + mix * r;
            }
        }
    }
}

/// Angular density `ρ(x) = Σ_k f(x, θ_k) Δv` of one label.
pub fn spatial_density(field: &KineticField, label: Label) -> Vec<f64> {
    let grid = field.grid;
    let cells = grid.cells();
    let mut rho = vec![0.0; cells];
    for slice in field.label(label).chunks_exact(cells) {
        for (r, v) in rho.iter_mut().zip(slice) {
            *r += v;
        }
    }
    rho.iter_mut().for_each(|r| *r *= grid.dv);
    rho
}

/// `K(x) = Σ_{stencil} ρ_I(x + o) Δx²`, the discrete `χ_R * ρ_I`.
pub fn infection_field(field: &KineticField, stencil: &DiskStencil) -> Vec<f64> {
    let grid = field.grid;
    let nx = grid.nx;
    let rho = spatial_density(field, Label::I);
    let area = grid.dx * grid.dx;
    let mut k_field = vec![0.0; grid.cells()];
    for i in 0..nx {
        for j in 0..nx {
            let mut acc = 0.0;
            for &(di, dj) in &stencil.offsets {
                acc += rho[((i + di) % nx) * nx + (j + dj) % nx];
            }
            k_field[i * nx + j] = acc * area;
        }
    }
    k_field
}

/// Exact exponential transfers `S → I → R → S` at every phase-space
/// point, with `K` frozen over the step.
pub fn react_step(field: &mut KineticField, k_field: &[f64], lambda: f64, gamma: f64, mu: f64, dt: f64) {
    let cells = field.grid.cells();
    let infect: Vec<f64> = k_field.iter().map(|k| -(-lambda * k * dt).exp_m1()).collect();
    let recover = -(-gamma * dt).exp_m1();
    let relapse = -(-mu * dt).exp_m1();
    let [fs, fi, fr] = &mut field.data;
    for ((s_slice, i_slice), r_slice) in
        fs.chunks_exact_mut(cells).zip(fi.chunks_exact_mut(cells)).zip(fr.chunks_exact_mut(cells))
    {
        for c in 0..cells {
            let (mut s, mut i, mut r) = (s_slice[c], i_slice[c], r_slice[c]);
            let d = s * infect[c];
            s -= d;
            i += d;
            let d = i * recover;
            i -= d;
            r += d;
            let d = r * relapse;
            r -= d;
            s += d;
            s_slice[c] = s;
            i_slice[c] = i;
            r_slice[c] = r;
        }
    }
}

/// Precomputed state for repeated steps on one grid.
#[derive(Debug, Clone)]
pub struct KineticSolver {
    grid: KineticGrid,
    params: KineticParams,
    stencil: DiskStencil,
    shifts: Vec<SliceShift>,
    scratch: Vec<f64>,
}

impl KineticSolver {
    pub fn new(grid: KineticGrid, params: KineticParams) -> Result<Self> {
        params.validate(&grid)?;
        let stencil = DiskStencil::new(&grid, params.r0_radius);
        let shifts = (0..grid.nv).map(|k| SliceShift::new(&grid, k, params.dt)).collect();
        Ok(Self { grid, params, stencil, shifts, scratch: vec![0.0; grid.cells()] })
    }

    pub fn grid(&self) -> &KineticGrid {
        &self.grid
    }

    pub fn params(&self) -> &KineticParams {
        &self.params
    }

    pub fn stencil(&self) -> &DiskStencil {
        &self.stencil
    }

    /// SIR rate matching the discrete stencil.
    pub fn discrete_beta(&self) -> f64 {
        self.stencil.discrete_beta(self.params.lambda, self.grid.side)
    }

    fn check_grid(&self, field: &KineticField) {
        assert_eq!(field.grid, self.grid, "field grid does not match solver grid");
    }

    /// Transport of all labels and headings.
    pub fn transport(&mut self, field: &mut KineticField) {
        self.check_grid(field);
        let cells = self.grid.cells();
        for data in field.data.iter_mut() {
            for (k, slice) in data.chunks_exact_mut(cells).enumerate() {
                shift_slice(slice, &mut self.scratch, self.grid.nx, self.shifts[k]);
                slice.copy_from_slice(&self.scratch);
            }
        }
    }

    /// Transport followed by relaxation: one step of the free random flight.
    pub fn random_flight_step(&mut self, field: &mut KineticField) {
        self.transport(field);
        relax_velocity(field, self.params.dt);
    }

    pub fn step(&mut self, field: &mut KineticField) {
        self.random_flight_step(field);
        let k_field = infection_field(field, &self.stencil);
        let p = self.params;
        react_step(field, &k_field, p.lambda, p.gamma, p.mu, p.dt);
    }
}

/// One full splitting step.
pub fn step_kinetic(field: &mut KineticField, solver: &mut KineticSolver) {
    solver.step(field)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KineticRunOptions {
    /// Record `‖f(·; a) − M·A∞‖_{L¹}` per label at each sample. `None`
    /// skips the record; `Some(None)` measures against the current
    /// fractions; `Some(Some(a))` against the given terminal fractions.
    pub l1_target: Option<Option<[f64; 3]>>,
    /// Keep a copy of the field at every sample.
    pub keep_snapshots: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KineticRun {
    pub series: FractionSeries,
    /// `(t, [L¹_S, L¹_I, L¹_R])`.
    pub l1: Vec<(f64, [f64; 3])>,
    pub snapshots: Vec<(f64, KineticField)>,
    pub final_field: Option<KineticField>,
}

/// `‖f(·; a) − M·targets[a]‖_{L¹}` for each label.
pub fn l1_to_uniform(field: &KineticField, targets: [f64; 3]) -> [f64; 3] {
    let m = field.grid.equilibrium_density();
    let vol = field.grid.cell_volume();
    [0, 1, 2].map(|a| {
        let g = m * targets[a];
        grid::neumaier_sum(field.data[a].iter().map(|v| (v - g).abs())) * vol
    })
}

/// Iterates the solver to `t_end`, sampling fractions every
/// `sample_every`. Aborts if the field turns negative beyond `-1e-12`
/// (relative to its peak) or the mass drifts by more than `1e-6`.
pub fn run_kinetic(
    init: KineticField,
    solver: &mut KineticSolver,
    t_end: f64,
    sample_every: f64,
    options: &KineticRunOptions,
) -> Result<KineticRun> {
    solver.check_grid(&init);
    let grid = crate::particle::SampleGrid::new(t_end, sample_every, solver.params.dt)?;
    let mut field = init;
    let mass0 = field.mass();
    let mut run = KineticRun::default();
    for k in 0..=grid.n_intervals {
        if k > 0 {
            for _ in 0..grid.steps_per_sample {
                solver.step(&mut field);
            }
        }
        let t = grid.time(k);
        let scale = field.max_value().max(f64::MIN_POSITIVE);
        let min = field.min_value();
        if min < -1e-12 * scale {
            return Err(Error::KineticAbort { t, reason: format!("negative density {min}") });
        }
        let [s, i, r] = field_fractions(&field);
        let drift = (s + i + r - mass0).abs();
        if drift > 1e-6 {
            return Err(Error::KineticAbort { t, reason: format!("mass drift {drift}") });
        }
        run.series.push(FractionSample { t, s, i, r })?;
        if let Some(target) = options.l1_target {
            run.l1.push((t, l1_to_uniform(&field, target.unwrap_or([s, i, r]))));
        }
        if options.keep_snapshots {
            run.snapshots.push((t, field.clone()));
        }
    }
    run.final_field = Some(field);
    Ok(run)
}
