use std::f64::consts::{PI, TAU};

use crate::error::{invalid, Error, Result};
use crate::geometry::{torus_distance_sq, TorusPoint};
use crate::params::{InitialData, Label, Placement};

/// Phase-space discretization: `nx × nx` square cells and `nv` headings
/// `θ_k = 2πk / nv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticGrid {
    pub nx: usize,
    pub nv: usize,
    pub side: f64,
    pub dx: f64,
    pub dv: f64,
}

impl KineticGrid {
    pub fn new(nx: usize, nv: usize, side: f64) -> Result<Self> {
        if nx < 4 {
            return Err(invalid("nx", format!("need at least 4 cells per axis, got {nx}")));
        }
        if nv < 4 {
            return Err(invalid("nv", format!("need at least 4 headings, got {nv}")));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(invalid("D", format!("must be > 0, got {side}")));
        }
        Ok(Self { nx, nv, side, dx: side / nx as f64, dv: TAU / nv as f64 })
    }

    pub fn cells(&self) -> usize {
        self.nx * self.nx
    }

    /// Values per label: `nv · nx²`.
    pub fn len(&self) -> usize {
        self.nv * self.cells()
    }

    pub fn angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.nv as f64
    }

    pub fn cell_center(&self, i: usize, j: usize) -> TorusPoint {
        TorusPoint::from_wrapped((i as f64 + 0.5) * self.dx, (j as f64 + 0.5) * self.dx)
    }

    /// Phase-space volume element `Δx² Δv`.
    pub fn cell_volume(&self) -> f64 {
        self.dx * self.dx * self.dv
    }

    /// Uniform equilibrium density `1 / (2π D²)`.
    pub fn equilibrium_density(&self) -> f64 {
        1.0 / (2.0 * PI * self.side * self.side)
    }
}

/// Densities `f(x, v; a)` for the three labels, laid out as
/// `[k][i][j]` (heading, first axis, second axis), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticField {
    pub grid: KineticGrid,
    pub data: [Vec<f64>; 3],
}

impl KineticField {
    pub fn zeros(grid: KineticGrid) -> Self {
        let n = grid.len();
        Self { grid, data: [vec![0.0; n], vec![0.0; n], vec![0.0; n]] }
    }

    #[inline]
    pub fn offset(&self, k: usize, i: usize, j: usize) -> usize {
        (k * self.grid.nx + i) * self.grid.nx + j
    }

    pub fn label(&self, label: Label) -> &[f64] {
        &self.data[label.index()]
    }

    pub fn label_mut(&mut self, label: Label) -> &mut [f64] {
        &mut self.data[label.index()]
    }

    /// Sum over labels, `Σ_a f(·; a)`.
    pub fn total_density(&self) -> Vec<f64> {
        (0..self.grid.len()).map(|n| self.data[0][n] + self.data[1][n] + self.data[2][n]).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mass(&self) -> f64 {
        let [s, i, r] = field_fractions(self);
        s + i + r
    }

    /// Builds the field matching particle initial data: homogeneous data
    /// gives constant densities; concentrated data labels every cell whose
    /// center lies in the centered disk of area `i0·D²` as infected.
    pub fn from_initial_data(grid: KineticGrid, init: &InitialData) -> Result<Self> {
        init.validate()?;
        match init.placement {
            Placement::Homogeneous => uniform_from_fractions(init.s0, init.i0, init.r0, grid),
            Placement::ConcentratedDisk => {
                let m = grid.equilibrium_density();
                let center = TorusPoint::from_wrapped(0.5 * grid.side, 0.5 * grid.side);
                let radius = init.disk_radius(grid.side);
                let mut field = Self::zeros(grid);
                for k in 0..grid.nv {
                    for i in 0..grid.nx {
                        for j in 0..grid.nx {
                            let inside = torus_distance_sq(grid.cell_center(i, j), center, grid.side)
                                < radius * radius;
                            let label = if inside { Label::I } else { Label::S };
                            let o = field.offset(k, i, j);
                            field.data[label.index()][o] = m;
                        }
                    }
                }
                Ok(field)
            }
        }
    }
}

/// Neumaier compensated sum.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Label fractions `∫ f(z; a) dz` by midpoint quadrature.
pub fn field_fractions(field: &KineticField) -> [f64; 3] {
    let vol = field.grid.cell_volume();
    [0, 1, 2].map(|a| neumaier_sum(field.data[a].iter().copied()) * vol)
}

/// Constant densities `fraction · M` with `M = 1 / (2π D²)`.
pub fn uniform_from_fractions(s: f64, i: f64, r: f64, grid: KineticGrid) -> Result<KineticField> {
    if [s, i, r].iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(invalid("fractions", "must be finite and nonnegative"));
    }
    if (s + i + r - 1.0).abs() > 1e-12 {
        return Err(Error::InitialData(format!("fractions sum to {}, expected 1", s + i + r)));
    }
    let m = grid.equilibrium_density();
    let n = grid.len();
    Ok(KineticField { grid, data: [vec![s * m; n], vec![i * m; n], vec![r * m; n]] })
}
