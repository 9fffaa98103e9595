//! Configuration-driven experiment harness behind the `tvlab` binary.

mod config;
mod counterexample;
mod critical;
mod drivers;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

pub use config::Config;
pub use counterexample::{
    counterexample_rows, counterexample_schedule, run_counterexample3d, CounterexampleParams, CounterexampleRow,
    ScheduleRow,
};
pub use critical::{converge_critical, run_converge_critical, run_param_sweep, scaled_noise, CriticalReport};
pub use drivers::{
    curvature_annulus, projection_demo, radon_bounds, run_curvature, run_projection_demo, run_radon_bounds,
    CurvatureReport, ProjectionPair, ProjectionReport, RadonReport,
};

use crate::error::{Error, Result};
use crate::grid::{io::save_scalar, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Counterexample3d,
    ConvergeCritical,
    ParamSweep,
    RadonBounds,
    ProjectionDemo,
    Curvature,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Counterexample3d,
        Experiment::ConvergeCritical,
        Experiment::ParamSweep,
        Experiment::RadonBounds,
        Experiment::ProjectionDemo,
        Experiment::Curvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Counterexample3d => "counterexample3d",
            Experiment::ConvergeCritical => "converge-critical",
            Experiment::ParamSweep => "param-sweep",
            Experiment::RadonBounds => "radon-bounds",
            Experiment::ProjectionDemo => "projection-demo",
            Experiment::Curvature => "curvature",
        }
    }

    /// Runs the experiment; `cfg` must not contain keys the experiment does not read.
    pub fn run(self, cfg: &Config, seed: u64) -> Result<RunOutput> {
        let out = match self {
            Experiment::Counterexample3d => run_counterexample3d(cfg)?,
            Experiment::ConvergeCritical => run_converge_critical(cfg, seed)?,
            Experiment::ParamSweep => run_param_sweep(cfg, seed)?,
            Experiment::RadonBounds => run_radon_bounds(cfg)?,
            Experiment::ProjectionDemo => run_projection_demo(cfg, seed)?,
            Experiment::Curvature => run_curvature(cfg)?,
        };
        cfg.ensure_consumed()?;
        Ok(out)
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown experiment {s:?}")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Plot-ready rows with a fixed header.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub table: Table,
    /// Named fields written to `fields/<name>.tvgrid`.
    pub fields: Vec<(String, ScalarField)>,
    /// Free-form lines appended to `meta.txt`.
    pub notes: Vec<String>,
    /// Whether every verdict came out as the experiment predicts.
    pub as_expected: bool,
}

/// Writes `results.csv`, `fields/` and `meta.txt` into `dir`.
pub fn write_outputs(dir: &Path, experiment: Experiment, cfg: &Config, seed: u64, out: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir.join("fields"))?;
    out.table.write_csv(std::fs::File::create(dir.join("results.csv"))?)?;
    for (name, field) in &out.fields {
        save_scalar(&dir.join("fields").join(format!("{name}.tvgrid")), field)?;
    }
    let mut meta = std::io::BufWriter::new(std::fs::File::create(dir.join("meta.txt"))?);
    writeln!(meta, "experiment = {experiment}")?;
    writeln!(meta, "seed = {seed}")?;
    writeln!(meta, "version = {} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))?;
    writeln!(meta, "as_expected = {}", out.as_expected)?;
    meta.write_all(cfg.resolved().as_bytes())?;
    for n in &out.notes {
        writeln!(meta, "# {n}")?;
    }
    meta.flush()?;
    Ok(())
}

pub(crate) fn fmt_f(x: f64) -> String {
    format!("{x:.10e}")
}

pub(crate) fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("nope".parse::<Experiment>().is_err());
    }

    #[test]
    fn table_columns() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["1".into(), "2".into()]);
        assert_eq!(t.column("b").unwrap(), vec!["2"]);
        assert!(t.column("c").is_none());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,2\n");
    }
}
