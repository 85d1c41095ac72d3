//! Uniform-grid bucketing of agent positions for fixed-radius queries.
//!
//! The cell side is `D / floor(D / R)`, so cells tile the torus exactly
//! and every disk of radius `R` touches at most the 3×3 block around its
//! center cell.

use crate::error::{invalid, Result};
use crate::geometry::{torus_distance_sq, TorusPoint};
use crate::init::Particle;

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    side: f64,
    cell: f64,
    cells_per_axis: usize,
    /// `starts[c]..starts[c + 1]` indexes `entries` for cell `c`.
    starts: Vec<usize>,
    entries: Vec<usize>,
    /// Distinct neighbor offsets in `{-1, 0, 1}²` modulo the grid size.
    offsets: Vec<(usize, usize)>,
}

impl SpatialIndex {
    /// Empty index for the given geometry; call [`rebuild`](Self::rebuild)
    /// to fill it.
    pub fn new(r0_radius: f64, side: f64) -> Result<Self> {
        if !(side > 0.0) || !side.is_finite() {
            return Err(invalid("D", format!("must be > 0, got {side}")));
        }
        if !(r0_radius > 0.0) || r0_radius >= 0.5 * side {
            return Err(invalid(
                "r0_radius",
                format!("need 0 < r0_radius < D/2 = {}, got {r0_radius}", 0.5 * side),
            ));
        }
        let cells_per_axis = (side / r0_radius).floor() as usize;
        let cell = side / cells_per_axis as f64;
        let n = cells_per_axis;
        let mut offsets = Vec::with_capacity(9);
        for di in [n - 1, 0, 1] {
            for dj in [n - 1, 0, 1] {
                let o = (di % n, dj % n);
                if !offsets.contains(&o) {
                    offsets.push(o);
                }
            }
        }
        Ok(Self {
            side,
            cell,
            cells_per_axis,
            starts: vec![0; n * n + 1],
            entries: Vec::new(),
            offsets,
        })
    }

    pub fn cell_side(&self) -> f64 {
        self.cell
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub(crate) fn neighbor_offsets(&self) -> &[(usize, usize)] {
        &self.offsets
    }

    #[inline]
    pub fn cell_coords(&self, p: TorusPoint) -> (usize, usize) {
        let n = self.cells_per_axis;
        let i = ((p.x1 / self.cell) as usize).min(n - 1);
        let j = ((p.x2 / self.cell) as usize).min(n - 1);
        (i, j)
    }

    #[inline]
    pub fn cell_id(&self, i: usize, j: usize) -> usize {
        i * self.cells_per_axis + j
    }

    pub fn bucket(&self, cell_id: usize) -> &[usize] {
        &self.entries[self.starts[cell_id]..self.starts[cell_id + 1]]
    }

    /// Counting-sort rebuild over the current positions.
    pub fn rebuild(&mut self, particles: &[Particle]) {
        let ncell = self.cells_per_axis * self.cells_per_axis;
        self.starts.clear();
        self.starts.resize(ncell + 1, 0);
        let ids: Vec<usize> = particles
            .iter()
            .map(|p| {
                let (i, j) = self.cell_coords(p.position);
                self.cell_id(i, j)
            })
            .collect();
        for &c in &ids {
            self.starts[c + 1] += 1;
        }
        for c in 0..ncell {
            self.starts[c + 1] += self.starts[c];
        }
        let mut cursor = self.starts.clone();
        self.entries.clear();
        self.entries.resize(particles.len(), 0);
        for (k, &c) in ids.iter().enumerate() {
            self.entries[cursor[c]] = k;
            cursor[c] += 1;
        }
    }

    /// Calls `visit` for every indexed agent strictly closer than `radius`
    /// to `center`. `radius` must not exceed the cell side.
    #[inline]
    pub fn for_each_within(
        &self,
        particles: &[Particle],
        center: TorusPoint,
        radius: f64,
        mut visit: impl FnMut(usize),
    ) {
        debug_assert!(radius <= self.cell);
        let r2 = radius * radius;
        let n = self.cells_per_axis;
        let (ci, cj) = self.cell_coords(center);
        for &(di, dj) in &self.offsets {
            let cell = self.cell_id((ci + di) % n, (cj + dj) % n);
            for &k in self.bucket(cell) {
                if torus_distance_sq(particles[k].position, center, self.side) < r2 {
                    visit(k);
                }
            }
        }
    }
}

/// Buckets all agents of `particles`.
pub fn build_index(particles: &[Particle], r0_radius: f64, side: f64) -> Result<SpatialIndex> {
    let mut index = SpatialIndex::new(r0_radius, side)?;
    index.rebuild(particles);
    Ok(index)
}

/// Indices at minimum-image distance strictly below `r0_radius`, ascending.
pub fn query_ball(
    index: &SpatialIndex,
    particles: &[Particle],
    center: TorusPoint,
    r0_radius: f64,
) -> Vec<usize> {
    let mut out = Vec::new();
    index.for_each_within(particles, center, r0_radius, |k| out.push(k));
    out.sort_unstable();
    out
}
