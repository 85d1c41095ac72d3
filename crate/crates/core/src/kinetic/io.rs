//! Plain-text field snapshots.
//!
//! ```text
//! simlab-kinetic-field 1
//! nx 64
//! nv 16
//! side 500
//! time 12.5
//! labels S,I,R
//! order label,angle,x1,x2
//! data
//! <3·nv·nx² values, one per line>
//! ```
//!
//! Values run over labels in `S, I, R` order, then headings
//! `θ_k = 2πk/nv`, then the first spatial index, then the second, the
//! last varying fastest. Cell `(i, j)` is centered at
//! `((i + ½)Δx, (j + ½)Δx)`. Floats use the shortest round-trip form, so
//! a write/read cycle is lossless.

use std::io::{BufRead, Write};

use super::grid::{KineticField, KineticGrid};
use crate::error::{Error, Result};

const MAGIC: &str = "simlab-kinetic-field 1";

pub fn write_field(field: &KineticField, time: f64, out: &mut impl Write) -> std::io::Result<()> {
    let g = &field.grid;
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "nx {}", g.nx)?;
    writeln!(out, "nv {}", g.nv)?;
    writeln!(out, "side {}", g.side)?;
    writeln!(out, "time {time}")?;
    writeln!(out, "labels S,I,R")?;
    writeln!(out, "order label,angle,x1,x2")?;
    writeln!(out, "data")?;
    for v in field.data.iter().flatten() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<&'a str> {
    let line = line.ok_or_else(|| Error::Format(format!("missing `{key}` line")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| Error::Format(format!("expected `{key} <value>`, got `{line}`")))
}

fn parse<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Format(format!("bad {what}: `{s}`")))
}

/// Reads a snapshot back as `(time, field)`.
pub fn read_field(input: impl BufRead) -> Result<(f64, KineticField)> {
    let text: Vec<String> = input
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::Format(e.to_string()))?;
    let mut lines = text.iter().map(String::as_str);
    if lines.next() != Some(MAGIC) {
        return Err(Error::Format("missing magic line".into()));
    }
    let nx: usize = parse(header(lines.next(), "nx")?, "nx")?;
    let nv: usize = parse(header(lines.next(), "nv")?, "nv")?;
    let side: f64 = parse(header(lines.next(), "side")?, "side")?;
    let time: f64 = parse(header(lines.next(), "time")?, "time")?;
    if header(lines.next(), "labels")? != "S,I,R" {
        return Err(Error::Format("unsupported label order".into()));
    }
    if header(lines.next(), "order")? != "label,angle,x1,x2" {
        return Err(Error::Format("unsupported layout".into()));
    }
    if lines.next() != Some("data") {
        return Err(Error::Format("missing `data` line".into()));
    }
    let grid = KineticGrid::new(nx, nv, side)?;
    let mut field = KineticField::zeros(grid);
    let n = grid.len();
    for (k, slot) in field.data.iter_mut().flatten().enumerate() {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format(format!("expected {} values, got {k}", 3 * n)))?;
        *slot = parse(line, "value")?;
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(Error::Format("trailing data".into()));
    }
    Ok((time, field))
}
