use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use deltaqed::config::{Config, Format};
use deltaqed::sweep::{emit_plot, run_sweep, PlotStyle, RunRecord, SweepSpec};
use deltaqed::{Error, Result};

/// Single-photon frequency conversion with a driven Δ-type emitter.
///
/// Frequencies are ordinary frequencies in GHz. Every flag has a
/// configuration-file key and the flag wins when both are given.
#[derive(Parser, Debug)]
#[command(name = "deltaqed", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Transmission spectrum against incident frequency.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Conversion of one Gaussian pulse: efficiency and output spectra.
    Pulse {
        #[command(flatten)]
        common: Common,
        /// Pulse width d in GHz ([pulse] width_ghz).
        #[arg(long, value_name = "GHZ")]
        width: Option<f64>,
    },
    /// Levels, matrix elements and decay rates of the flux-qubit emitter.
    Circuit {
        #[command(flatten)]
        common: Common,
        /// Reduced flux bias ([circuit] flux).
        #[arg(long, value_name = "F", conflicts_with = "sweep")]
        flux: Option<f64>,
        /// Sweep the flux over --grid ([circuit] sweep = true).
        #[arg(long)]
        sweep: bool,
    },
    /// Steady-state probe spectrum against Δ_p/Γ31 at fixed probe strength.
    Steady {
        #[command(flatten)]
        common: Common,
        /// Probe strength Ω_p/Γ31 ([drive] omega_p_over_g31).
        #[arg(long, value_name = "X")]
        omega_p_over_g31: Option<f64>,
    },
    /// Resonant steady-state transmission against Ω_p/Γ31.
    Saturation {
        #[command(flatten)]
        common: Common,
    },
    /// Any registered sweep kind.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Sweep kind ([sweep] kind): spectrum, pulse-width, pulse, flux,
        /// circuit, saturation, steady, optimal-bias.
        #[arg(long)]
        kind: Option<String>,
        /// Pulse width d in GHz ([pulse] width_ghz).
        #[arg(long, value_name = "GHZ")]
        width: Option<f64>,
        /// Reduced flux bias ([circuit] flux).
        #[arg(long, value_name = "F")]
        flux: Option<f64>,
        /// Probe strength Ω_p/Γ31 ([drive] omega_p_over_g31).
        #[arg(long, value_name = "X")]
        omega_p_over_g31: Option<f64>,
    },
    /// Flux bias maximizing the resonant conversion efficiency over the --grid window.
    OptimalBias {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output table; standard output when absent ([output] path).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Table format, csv or json ([output] format).
    #[arg(long, value_name = "FORMAT", value_parser = parse_format)]
    format: Option<Format>,
    /// SVG plot of the table ([output] plot).
    #[arg(long, value_name = "PATH")]
    plot: Option<PathBuf>,
    /// Conversion direction, down or up ([drive] direction).
    #[arg(long)]
    direction: Option<String>,
    /// Grid START:STOP:POINTS ([sweep] grid).
    #[arg(long, value_name = "START:STOP:POINTS")]
    grid: Option<String>,
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn load(&self) -> Result<Config> {
        let mut config = match &self.config {
            Some(path) => Config::load(path).map_err(|e| match e {
                Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
                other => other,
            })?,
            None => Config::default(),
        };
        if let Some(p) = &self.out {
            config.output.path = Some(p.clone());
        }
        if let Some(f) = self.format {
            config.output.format = f;
        }
        if let Some(p) = &self.plot {
            config.output.plot = Some(p.clone());
        }
        if let Some(d) = &self.direction {
            config.drive.direction = d.clone();
        }
        if let Some(g) = &self.grid {
            config.sweep.grid = Some(g.clone());
        }
        Ok(config)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Configuration with flags applied and the sweep kind to run.
fn resolve(command: Command) -> Result<(String, Config)> {
    Ok(match command {
        Command::Spectrum { common } => ("spectrum".into(), common.load()?),
        Command::Pulse { common, width } => {
            let mut c = common.load()?;
            set(&mut c.pulse.width_ghz, width);
            ("pulse".into(), c)
        }
        Command::Circuit { common, flux, sweep } => {
            let mut c = common.load()?;
            set(&mut c.circuit.flux, flux);
            if sweep {
                c.circuit.sweep = true;
            }
            let kind = if c.circuit.sweep { "flux" } else { "circuit" };
            (kind.into(), c)
        }
        Command::Steady {
            common,
            omega_p_over_g31,
        } => {
            let mut c = common.load()?;
            set(&mut c.drive.omega_p_over_g31, omega_p_over_g31);
            ("steady".into(), c)
        }
        Command::Saturation { common } => ("saturation".into(), common.load()?),
        Command::Sweep {
            common,
            kind,
            width,
            flux,
            omega_p_over_g31,
        } => {
            let mut c = common.load()?;
            if kind.is_some() {
                c.sweep.kind = kind;
            }
            set(&mut c.pulse.width_ghz, width);
            set(&mut c.circuit.flux, flux);
            set(&mut c.drive.omega_p_over_g31, omega_p_over_g31);
            let kind = c
                .sweep
                .kind
                .clone()
                .ok_or_else(|| Error::Config("no sweep kind given (use --kind or [sweep] kind)".into()))?;
            (kind, c)
        }
        Command::OptimalBias { common } => ("optimal-bias".into(), common.load()?),
    })
}

fn report(record: &RunRecord) {
    for (k, v) in &record.summary {
        eprintln!("{k} = {v}");
    }
    if !record.failures.is_empty() {
        eprintln!(
            "{} of {} points failed",
            record.failures.len(),
            record.provenance.points
        );
        for f in &record.failures {
            log::warn!("point {} (x = {}): {}", f.index, f.x, f.message);
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (kind, config) = resolve(cli.command)?;
    let spec = SweepSpec::new(&kind, config)?;
    let record = run_sweep(&spec)?;
    let out = &record.config.output;
    record.write(out.path.as_deref(), out.format)?;
    if let Some(path) = &out.plot {
        let style = PlotStyle::for_kind(&record.kind)
            .ok_or_else(|| Error::Config(format!("no plot layout for `{}`", record.kind)))?;
        if !record.rows.is_empty() {
            emit_plot(&record, &style, path)?;
        }
    }
    report(&record);
    Ok(if record.is_failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn circuit_sweep_flag_selects_flux_kind() {
        let cli = Cli::try_parse_from(["deltaqed", "circuit", "--sweep", "--grid", "0.4:0.6:3"]).unwrap();
        let (kind, config) = resolve(cli.command).unwrap();
        assert_eq!(kind, "flux");
        assert_eq!(config.sweep.grid.as_deref(), Some("0.4:0.6:3"));
        assert!(Cli::try_parse_from(["deltaqed", "circuit", "--sweep", "--flux", "0.5"]).is_err());
    }
}
