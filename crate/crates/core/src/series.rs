use crate::error::{invalid, Result};

/// One `(t, S, I, R)` sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionSample {
    pub t: f64,
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

/// Time-ordered compartment fractions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FractionSeries {
    samples: Vec<FractionSample>,
}

impl FractionSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_samples(samples: Vec<FractionSample>) -> Result<Self> {
        let mut series = Self::new();
        for s in samples {
            series.push(s)?;
        }
        Ok(series)
    }

    /// Appends a sample; times must be strictly increasing.
    pub fn push(&mut self, sample: FractionSample) -> Result<()> {
        if let Some(last) = self.samples.last() {
            if !(sample.t > last.t) {
                return Err(invalid(
                    "t",
                    format!("sample times must increase: {} after {}", sample.t, last.t),
                ));
            }
        }
        self.samples.push(sample);
        Ok(())
    }

    pub fn samples(&self) -> &[FractionSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&FractionSample> {
        self.samples.last()
    }

    /// `t,S,I,R` with a header row; floats use the shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,S,I,R\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{},{}\n", s.t, s.s, s.i, s.r));
        }
        out
    }

    /// Sup-norm distance over all three compartments, on samples at equal
    /// times. Mismatched grids are an error.
    pub fn sup_distance(&self, other: &FractionSeries) -> Result<f64> {
        if self.len() != other.len() {
            return Err(invalid("series", "sample counts differ"));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.samples.iter().zip(&other.samples) {
            if (a.t - b.t).abs() > 1e-9 * a.t.abs().max(1.0) {
                return Err(invalid("series", format!("sample times differ: {} vs {}", a.t, b.t)));
            }
            worst = worst.max((a.s - b.s).abs()).max((a.i - b.i).abs()).max((a.r - b.r).abs());
        }
        Ok(worst)
    }

    /// Pointwise mean of equally sampled series.
    pub fn mean(series: &[FractionSeries]) -> Result<FractionSeries> {
        let first = series.first().ok_or_else(|| invalid("series", "nothing to average"))?;
        let k = series.len() as f64;
        let mut out = Vec::with_capacity(first.len());
        for (idx, s0) in first.samples.iter().enumerate() {
            let mut acc = FractionSample { t: s0.t, s: 0.0, i: 0.0, r: 0.0 };
            for s in series {
                let x = s.samples.get(idx).ok_or_else(|| invalid("series", "lengths differ"))?;
                acc.s += x.s / k;
                acc.i += x.i / k;
                acc.r += x.r / k;
            }
            out.push(acc);
        }
        FractionSeries::from_samples(out)
    }

    /// Sample with the largest `I`; earliest on ties.
    pub fn peak_infected(&self) -> Option<FractionSample> {
        let mut best: Option<FractionSample> = None;
        for s in &self.samples {
            if best.is_none_or(|b| s.i > b.i) {
                best = Some(*s);
            }
        }
        best
    }
}
