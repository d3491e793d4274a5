//! Parameter sweeps, run records and their CSV / JSON / SVG renderings.
//!
//! A sweep kind turns a [`Config`] into a per-point evaluator. [`run_sweep`]
//! evaluates it over the grid on a bounded worker pool and collects the rows in
//! grid order, so the record is the same whatever the thread count. Points that
//! fail are listed in the record instead of aborting the run.

mod bias;
mod kinds;
mod plot;

pub use bias::{find_optimal_bias, OptimalBias, BIAS_TOLERANCE, EFFICIENCY_BAND};
pub use kinds::{sweep_kind, sweep_kinds, Prepared, Sweep};
pub use plot::{axis_label, emit_plot, render_svg, PlotStyle};

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Config, Format};
use crate::error::{Error, Result};
use crate::flux::ChargeTruncation;
use crate::pulse::Quadrature;
use crate::units::{constants, UNIT_CONVENTION};

/// Environment variable bounding the worker pool.
pub const THREADS_ENV: &str = "DELTAQED_THREADS";

/// Fraction of failed points above which a run counts as failed.
pub const MAX_FAILED_FRACTION: f64 = 0.1;

/// A validated sweep: the kind is registered and echoed into the configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    kind: &'static dyn Sweep,
    config: Config,
}

impl PartialEq for dyn Sweep {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name()
    }
}

impl SweepSpec {
    pub fn new(kind: &str, mut config: Config) -> Result<Self> {
        let kind = sweep_kind(kind)?;
        config.sweep.kind = Some(kind.name().to_string());
        kind.abscissae(&config)?;
        Ok(SweepSpec { kind, config })
    }

    /// Kind taken from `[sweep] kind`.
    pub fn from_config(config: Config) -> Result<Self> {
        let kind = config
            .sweep
            .kind
            .clone()
            .ok_or_else(|| Error::Config("no sweep kind given (set [sweep] kind)".into()))?;
        Self::new(&kind, config)
    }

    pub fn kind(&self) -> &'static str {
        self.kind.name()
    }

    pub fn config(&self) -> &Config {
        &self.config
    }
}

/// Settings that fix a run beyond the configuration itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub software: String,
    pub constants: String,
    pub units: String,
    pub truncation: ChargeTruncation,
    pub eigensolver: String,
    pub quadrature: Quadrature,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub index: usize,
    pub x: f64,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: String,
    pub config: Config,
    pub provenance: Provenance,
    /// Scalars that belong to the run rather than to a grid point.
    pub summary: Vec<(String, f64)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub failures: Vec<Failure>,
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

pub fn run_sweep(spec: &SweepSpec) -> Result<RunRecord> {
    let config = &spec.config;
    let xs = spec.kind.abscissae(config)?;
    let pool = worker_pool()?;
    let (prepared, outcomes) = pool.install(|| -> Result<_> {
        let prepared = spec.kind.prepare(config)?;
        let outcomes: Vec<Result<Vec<f64>>> = xs
            .par_iter()
            .enumerate()
            .map(|(i, &x)| (prepared.eval)(i, x))
            .collect();
        Ok((prepared.summary, outcomes))
    })?;

    let columns: Vec<String> = spec.kind.columns().iter().map(|c| c.to_string()).collect();
    let mut rows = Vec::with_capacity(xs.len());
    let mut failures = Vec::new();
    for (index, (x, outcome)) in xs.iter().zip(outcomes).enumerate() {
        let checked = outcome.and_then(|row| {
            debug_assert_eq!(row.len(), columns.len());
            match row.iter().position(|v| !v.is_finite()) {
                Some(k) => Err(Error::InvalidGrid(format!("non-finite {}", columns[k]))),
                None => Ok(row),
            }
        });
        match checked {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(Failure {
                index,
                x: *x,
                message: e.to_string(),
            }),
        }
    }
    let trunc = config.truncation()?;
    Ok(RunRecord {
        kind: spec.kind().to_string(),
        config: config.clone(),
        provenance: Provenance {
            software: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            constants: constants::VERSION.to_string(),
            units: UNIT_CONVENTION.to_string(),
            truncation: trunc,
            eigensolver: config.circuit.eigensolver.clone(),
            quadrature: config.quadrature(),
            points: xs.len(),
        },
        summary: prepared,
        columns,
        rows,
        failures,
    })
}

const CONFIG_PREFIX: &str = "# config: ";

/// Shortest text that parses back to `v`, in exponent form outside [1e-4, 1e6).
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e6).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl RunRecord {
    pub fn failed_fraction(&self) -> f64 {
        if self.provenance.points == 0 {
            return 0.0;
        }
        self.failures.len() as f64 / self.provenance.points as f64
    }

    /// True when more than [`MAX_FAILED_FRACTION`] of the points failed.
    pub fn is_failed(&self) -> bool {
        self.failed_fraction() > MAX_FAILED_FRACTION
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Reruns the echoed configuration.
    pub fn replay(&self) -> Result<RunRecord> {
        run_sweep(&SweepSpec::new(&self.kind, self.config.clone())?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        let _ = writeln!(out, "# {} kind={}", p.software, self.kind);
        let _ = writeln!(out, "# constants: {}", p.constants);
        let _ = writeln!(out, "# units: {}", p.units);
        let _ = writeln!(
            out,
            "# truncation: n_p_max={} n_m_max={} eigensolver={}",
            p.truncation.n_p_max(),
            p.truncation.n_m_max(),
            p.eigensolver
        );
        let _ = writeln!(
            out,
            "# quadrature: span_widths={} points={}",
            p.quadrature.span, p.quadrature.points
        );
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary: {k}={}", format_value(*v));
        }
        let _ = writeln!(out, "# failures: {} of {}", self.failures.len(), p.points);
        for f in &self.failures {
            let _ = writeln!(out, "# failed: index={} x={} {}", f.index, f.x, f.message);
        }
        let config = serde_json::to_string(&self.config).expect("configuration serializes");
        let _ = writeln!(out, "{CONFIG_PREFIX}{config}");

        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_value(v))).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory write")).expect("ASCII table"));
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// Writes the table to `path`, or to standard output when `path` is `None`.
    pub fn write(&self, path: Option<&Path>, format: Format) -> Result<()> {
        let text = self.render(format);
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| Error::io(p, e)),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::io("<stdout>", e)),
        }
    }
}

/// The configuration echoed in the header of a CSV record.
pub fn config_from_csv(text: &str) -> Result<Config> {
    let line = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
        .ok_or_else(|| Error::Config("CSV record has no configuration header".into()))?;
    serde_json::from_str(line).map_err(|e| Error::Config(format!("configuration header: {e}")))
}

/// Reruns the sweep recorded in a CSV or JSON file and returns the new record.
pub fn replay_file(path: &Path) -> Result<RunRecord> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('{') {
        RunRecord::from_json(&text)?.replay()
    } else {
        run_sweep(&SweepSpec::from_config(config_from_csv(&text)?)?)
    }
}
