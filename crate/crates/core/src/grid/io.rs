//! Raw field dumps and small CSV tables.
//!
//! A dump is a short text header followed by little-endian `f64` values in
//! row-major order:
//!
//! ```text
//! TVGRID 1
//! dim 2
//! shape 64 64
//! spacing 0.03125
//! origin -0.984375 -0.984375
//! kind scalar
//! encoding f64le
//! end
//! ```
//!
//! Indicator sets use `kind indicator` and store 0.0/1.0.

use super::{Grid, IndicatorSet, ScalarField};
use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

const MAGIC: &str = "TVGRID 1";

#[derive(Debug, Clone, PartialEq)]
pub enum Dump {
    Scalar(ScalarField),
    Indicator(IndicatorSet),
}

fn write_header(w: &mut impl Write, grid: &Grid, kind: &str) -> Result<()> {
    let join = |v: Vec<String>| v.join(" ");
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "dim {}", grid.dim())?;
    writeln!(w, "shape {}", join(grid.shape().iter().map(|n| n.to_string()).collect()))?;
    writeln!(w, "spacing {:e}", grid.spacing())?;
    writeln!(w, "origin {}", join(grid.origin().iter().map(|o| format!("{o:e}")).collect()))?;
    writeln!(w, "kind {kind}")?;
    writeln!(w, "encoding f64le")?;
    writeln!(w, "end")?;
    Ok(())
}

fn write_values(w: &mut impl Write, values: impl Iterator<Item = f64>) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_scalar(w: &mut impl Write, field: &ScalarField) -> Result<()> {
    write_header(w, field.grid(), "scalar")?;
    write_values(w, field.values().iter().copied())
}

pub fn write_indicator(w: &mut impl Write, set: &IndicatorSet) -> Result<()> {
    write_header(w, set.grid(), "indicator")?;
    write_values(w, set.mask().iter().map(|&b| if b { 1.0 } else { 0.0 }))
}

pub fn save_scalar(path: &Path, field: &ScalarField) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_scalar(&mut w, field)?;
    w.flush()?;
    Ok(())
}

pub fn save_indicator(path: &Path, set: &IndicatorSet) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_indicator(&mut w, set)?;
    w.flush()?;
    Ok(())
}

fn parse_list<T: std::str::FromStr>(rest: &str, what: &str) -> Result<Vec<T>> {
    rest.split_whitespace().map(|t| t.parse().map_err(|_| Error::Parse(format!("bad {what} entry '{t}'")))).collect()
}

pub fn read_dump(r: impl Read) -> Result<Dump> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(Error::Parse("missing TVGRID header".into()));
    }
    let (mut dim, mut shape, mut spacing, mut origin, mut kind) = (None, None, None, None, None);
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Parse("header not terminated".into()));
        }
        let l = line.trim_end();
        if l == "end" {
            break;
        }
        let (key, rest) = l.split_once(' ').unwrap_or((l, ""));
        match key {
            "dim" => dim = Some(rest.trim().parse::<usize>().map_err(|_| Error::Parse("bad dim".into()))?),
            "shape" => shape = Some(parse_list::<usize>(rest, "shape")?),
            "spacing" => spacing = Some(rest.trim().parse::<f64>().map_err(|_| Error::Parse("bad spacing".into()))?),
            "origin" => origin = Some(parse_list::<f64>(rest, "origin")?),
            "kind" => kind = Some(rest.trim().to_string()),
            "encoding" if rest.trim() == "f64le" => {}
            "encoding" => return Err(Error::Parse(format!("unsupported encoding '{rest}'"))),
            _ => return Err(Error::Parse(format!("unknown header key '{key}'"))),
        }
    }
    let missing = |k: &str| Error::Parse(format!("header lacks '{k}'"));
    let shape = shape.ok_or_else(|| missing("shape"))?;
    if dim.ok_or_else(|| missing("dim"))? != shape.len() {
        return Err(Error::Parse("dim disagrees with shape".into()));
    }
    let grid = Grid::new(shape, spacing.ok_or_else(|| missing("spacing"))?, origin.ok_or_else(|| missing("origin"))?)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::Parse(format!("expected {} value bytes, found {}", 8 * grid.len(), bytes.len())));
    }
    let values: Vec<f64> = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    match kind.as_deref() {
        Some("scalar") => Ok(Dump::Scalar(ScalarField::new(grid, values)?)),
        Some("indicator") => {
            if values.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::Parse("indicator dump holds values other than 0/1".into()));
            }
            Ok(Dump::Indicator(IndicatorSet::new(grid, values.iter().map(|&v| v == 1.0).collect())?))
        }
        Some(other) => Err(Error::Parse(format!("unknown kind '{other}'"))),
        None => Err(missing("kind")),
    }
}

pub fn load_dump(path: &Path) -> Result<Dump> {
    read_dump(std::fs::File::open(path)?)
}

/// One row of a level-set table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetRow {
    pub threshold: f64,
    pub perimeter: f64,
    pub volume: f64,
}

/// Writes `threshold,perimeter,volume` rows with a header line.
pub fn write_level_set_table(w: impl Write, rows: &[LevelSetRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["threshold", "perimeter", "volume"])?;
    for r in rows {
        out.write_record([r.threshold.to_string(), r.perimeter.to_string(), r.volume.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Level-set table of `u` at the given thresholds.
pub fn level_set_table(u: &ScalarField, thresholds: &[f64], mode: super::PerimeterMode) -> Vec<LevelSetRow> {
    thresholds
        .iter()
        .map(|&s| {
            let e = super::level_set(u, s);
            LevelSetRow { threshold: s, perimeter: super::perimeter(&e, mode), volume: e.volume() }
        })
        .collect()
}
