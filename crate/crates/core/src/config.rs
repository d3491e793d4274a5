//! Run configuration: a sectioned TOML document.
//!
//! All frequencies are ordinary frequencies in GHz, voltages in volts and the
//! line impedance in ohms. Every key has a default, so an empty document is a
//! valid configuration; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{
    decay_rates, diagonalize, eigensolver, ChargeTruncation, CircuitParams, Eigensolver, LossModel,
    QubitSpectrum, RealizedRates, DEFAULT_CHARGE_CUTOFF, DEFAULT_EIGENSOLVER,
};
use crate::lindblad::LindbladRates;
use crate::pulse::{Quadrature, DEFAULT_POINTS, DEFAULT_SPAN};
use crate::scattering::{channel, ConversionChannel, DriveField, EmitterRates, Transitions};
use crate::units::ghz;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub emitter: EmitterSection,
    pub drive: DriveSection,
    pub circuit: CircuitSection,
    pub pulse: PulseSection,
    pub sweep: SweepSection,
    pub loss: LossSection,
    pub output: OutputSection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitterSource {
    /// Rates and transition frequencies as given in `[emitter]`.
    #[default]
    Explicit,
    /// Rates and frequencies from diagonalizing `[circuit]`, losses from `[loss]`.
    Circuit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitterSection {
    pub source: EmitterSource,
    pub gamma_31_ghz: f64,
    pub gamma_21_ghz: f64,
    pub gamma_32_ghz: f64,
    /// γ2.
    pub loss_2_ghz: f64,
    /// Loss out of |3⟩ other than emission into the 3→2 line; γ3 adds Γ32 to it.
    pub intrinsic_loss_3_ghz: f64,
    pub omega_31_ghz: f64,
    pub omega_21_ghz: f64,
}

impl Default for EmitterSection {
    fn default() -> Self {
        EmitterSection {
            source: EmitterSource::Explicit,
            gamma_31_ghz: 0.118,
            gamma_21_ghz: 0.041,
            gamma_32_ghz: 0.0,
            loss_2_ghz: 0.0,
            intrinsic_loss_3_ghz: 0.0,
            omega_31_ghz: 20.318,
            omega_21_ghz: 17.033,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    /// Conversion channel, `down` or `up`.
    pub direction: String,
    /// Control detuning from ω32; the optimal drive when both this and
    /// `rabi_ghz` are absent.
    pub detuning_ghz: Option<f64>,
    pub rabi_ghz: Option<f64>,
    /// Probe strength Ω_p/Γ31 for steady-state runs.
    pub omega_p_over_g31: f64,
    /// Probe detuning Δ_p/Γ31 for saturation runs.
    pub delta_p_over_g31: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection {
            direction: "down".into(),
            detuning_ghz: None,
            rabi_ghz: None,
            omega_p_over_g31: 0.01,
            delta_p_over_g31: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitSection {
    pub alpha: f64,
    pub beta: f64,
    pub ej_over_h_ghz: f64,
    pub ej_over_ec: f64,
    pub impedance_ohm: f64,
    pub flux: f64,
    /// Charge cutoff applied to both n_p and n_m.
    pub charge_cutoff: usize,
    pub eigensolver: String,
    /// `circuit` command: sweep the flux over `[sweep].grid` instead of one point.
    pub sweep: bool,
}

impl Default for CircuitSection {
    fn default() -> Self {
        let p = CircuitParams::default();
        CircuitSection {
            alpha: p.alpha(),
            beta: p.beta(),
            ej_over_h_ghz: p.ej_over_h(),
            ej_over_ec: p.ej_over_ec(),
            impedance_ohm: p.impedance(),
            flux: p.flux(),
            charge_cutoff: DEFAULT_CHARGE_CUTOFF,
            eigensolver: DEFAULT_EIGENSOLVER.into(),
            sweep: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PulseSection {
    pub width_ghz: f64,
    /// Grid span in pulse widths.
    pub span_widths: f64,
    pub points: usize,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection {
            width_ghz: 0.005,
            span_widths: DEFAULT_SPAN,
            points: DEFAULT_POINTS,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub kind: Option<String>,
    /// `START:STOP:POINTS`.
    pub grid: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossSection {
    /// γ̃3/Γ31.
    pub intrinsic_3: f64,
    /// γ2/Γ21.
    pub intrinsic_2: f64,
}

impl Default for LossSection {
    fn default() -> Self {
        let l = LossModel::default();
        LossSection {
            intrinsic_3: l.intrinsic_3,
            intrinsic_2: l.intrinsic_2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format `{s}` (expected csv or json)"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// Table destination; standard output when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
    /// SVG plot destination.
    pub plot: Option<PathBuf>,
}

/// Uniform grid `START:STOP:POINTS`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidGrid("grid endpoints must be finite".into()));
        }
        if !(start < stop) {
            return Err(Error::InvalidGrid(format!("start {start} must be below stop {stop}")));
        }
        if points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {points}")));
        }
        Ok(Grid { start, stop, points })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::InvalidGrid(format!("`{s}` is not START:STOP:POINTS"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let start = parts[0].parse().map_err(|_| bad())?;
        let stop = parts[1].parse().map_err(|_| bad())?;
        let points = parts[2].parse().map_err(|_| bad())?;
        Grid::new(start, stop, points)
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.points - 1) as f64
    }

    /// Grid values; the last one is exactly `stop`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * k as f64 / n as f64
                }
            })
            .collect()
    }
}

/// Emitter seen by the scattering and master-equation models, in rad/s.
#[derive(Clone, Debug)]
pub struct Emitter {
    pub rates: EmitterRates,
    pub transitions: Transitions,
    pub gamma_32: f64,
    /// The diagonalized circuit when the emitter comes from `[circuit]`.
    pub circuit: Option<(CircuitParams, QubitSpectrum, RealizedRates)>,
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }

    pub fn circuit_params(&self) -> Result<CircuitParams> {
        let c = &self.circuit;
        CircuitParams::new(c.alpha, c.beta, c.ej_over_h_ghz, c.ej_over_ec, c.impedance_ohm, c.flux)
    }

    pub fn truncation(&self) -> Result<ChargeTruncation> {
        ChargeTruncation::new(self.circuit.charge_cutoff, self.circuit.charge_cutoff)
    }

    pub fn eigensolver(&self) -> Result<&'static dyn Eigensolver> {
        eigensolver(&self.circuit.eigensolver)
    }

    pub fn loss(&self) -> LossModel {
        LossModel {
            intrinsic_3: self.loss.intrinsic_3,
            intrinsic_2: self.loss.intrinsic_2,
        }
    }

    pub fn channel(&self) -> Result<&'static dyn ConversionChannel> {
        channel(&self.drive.direction)
    }

    pub fn quadrature(&self) -> Quadrature {
        Quadrature {
            span: self.pulse.span_widths,
            points: self.pulse.points,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        match &self.sweep.grid {
            Some(g) => Grid::parse(g),
            None => Err(Error::Config("no grid given (set [sweep] grid or --grid)".into())),
        }
    }

    pub fn emitter(&self) -> Result<Emitter> {
        match self.emitter.source {
            EmitterSource::Explicit => {
                let e = &self.emitter;
                if !(e.gamma_32_ghz >= 0.0) || !(e.intrinsic_loss_3_ghz >= 0.0) {
                    return Err(Error::invalid("emitter", "gamma_32_ghz and intrinsic_loss_3_ghz must be >= 0"));
                }
                Ok(Emitter {
                    rates: EmitterRates::from_ghz(
                        e.gamma_31_ghz,
                        e.gamma_21_ghz,
                        e.loss_2_ghz,
                        e.intrinsic_loss_3_ghz + e.gamma_32_ghz,
                    )?,
                    transitions: Transitions::from_ghz(e.omega_31_ghz, e.omega_21_ghz)?,
                    gamma_32: ghz(e.gamma_32_ghz),
                    circuit: None,
                })
            }
            EmitterSource::Circuit => {
                let params = self.circuit_params()?;
                let spectrum = diagonalize(&params, &self.truncation()?, self.eigensolver()?)?;
                let realized = decay_rates(&params, &spectrum);
                Ok(Emitter {
                    rates: realized.emitter_rates(&self.loss())?,
                    transitions: spectrum.transitions()?,
                    gamma_32: realized.gamma_32,
                    circuit: Some((params, spectrum, realized)),
                })
            }
        }
    }

    /// Control field: explicit when `rabi_ghz` is set, otherwise the optimal
    /// drive of the configured channel.
    pub fn drive(&self, emitter: &Emitter) -> Result<DriveField> {
        let d = &self.drive;
        match (d.detuning_ghz, d.rabi_ghz) {
            (None, None) => self.channel()?.optimal_drive(&emitter.rates)?.field(&emitter.transitions),
            (detuning, Some(rabi)) => {
                DriveField::detuned(&emitter.transitions, ghz(detuning.unwrap_or(0.0)), ghz(rabi))
            }
            (Some(_), None) => Err(Error::Config("[drive] detuning_ghz needs rabi_ghz".into())),
        }
    }

    pub fn lindblad_rates(&self, emitter: &Emitter) -> Result<LindbladRates> {
        LindbladRates::from_emitter(&emitter.rates, emitter.gamma_32)
    }
}
