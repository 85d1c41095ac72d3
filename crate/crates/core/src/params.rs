//! Model constants, labels and initial-data descriptions.

use crate::error::{invalid, Result};

/// Epidemic compartment. The derived order `S < I < R` is the
/// serialization order everywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    S,
    I,
    R,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::S, Label::I, Label::R];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

/// All constants of a run. `mu` only enters the ODE and kinetic solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub n: usize,
    pub side: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub mu: f64,
    pub r0_radius: f64,
    pub dt: f64,
    pub seed: u64,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let finite = |field: &'static str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite, got {v}")))
            }
        };
        finite("D", self.side)?;
        finite("lambda", self.lambda)?;
        finite("gamma", self.gamma)?;
        finite("mu", self.mu)?;
        finite("r0_radius", self.r0_radius)?;
        finite("dt", self.dt)?;
        if self.n < 1 {
            return Err(invalid("N", "need at least one agent"));
        }
        if self.side <= 0.0 {
            return Err(invalid("D", format!("must be > 0, got {}", self.side)));
        }
        for (field, v) in [("lambda", self.lambda), ("gamma", self.gamma), ("mu", self.mu)] {
            if v < 0.0 {
                return Err(invalid(field, format!("must be >= 0, got {v}")));
            }
        }
        if self.r0_radius <= 0.0 {
            return Err(invalid("r0_radius", format!("must be > 0, got {}", self.r0_radius)));
        }
        if self.r0_radius >= 0.5 * self.side {
            return Err(invalid(
                "r0_radius",
                format!("must be < D/2 = {}, got {}", 0.5 * self.side, self.r0_radius),
            ));
        }
        if self.dt <= 0.0 {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        Ok(())
    }

    /// Rate of the homogeneous SIR reduction for these constants.
    pub fn beta(&self) -> f64 {
        crate::geometry::beta_from_params(self.lambda, self.r0_radius, self.side)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Infected and recovered agents drawn uniformly without replacement.
    Homogeneous,
    /// Everyone inside the centered disk of area `i0·D²` starts infected.
    ConcentratedDisk,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub s0: f64,
    pub i0: f64,
    pub r0: f64,
    pub placement: Placement,
}

impl InitialData {
    pub fn new(s0: f64, i0: f64, r0: f64, placement: Placement) -> Result<Self> {
        let init = Self { s0, i0, r0, placement };
        init.validate()?;
        Ok(init)
    }

    /// `I(0) = i0`, `R(0) = 0`, the rest susceptible.
    pub fn seeded(i0: f64, placement: Placement) -> Self {
        Self { s0: 1.0 - i0, i0, r0: 0.0, placement }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("s0", self.s0), ("i0", self.i0), ("r0", self.r0)] {
            if !v.is_finite() || v < 0.0 {
                return Err(invalid(field, format!("must be a finite fraction >= 0, got {v}")));
            }
        }
        let total = self.s0 + self.i0 + self.r0;
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("s0+i0+r0", format!("fractions must sum to 1, got {total}")));
        }
        if self.placement == Placement::ConcentratedDisk && self.r0 != 0.0 {
            return Err(invalid("r0", "concentrated placement requires r0 = 0"));
        }
        Ok(())
    }

    /// Radius of the concentrated disk: area `i0·D²`.
    pub fn disk_radius(&self, side: f64) -> f64 {
        (self.i0 * side * side / std::f64::consts::PI).sqrt()
    }
}

/// Round-half-up of `n·fraction`.
pub fn rounded_count(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction + 0.5).floor() as usize
}
