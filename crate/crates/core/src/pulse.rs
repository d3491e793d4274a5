//! Finite-bandwidth single-photon pulses and their conversion efficiency.
//!
//! A pulse is a spectral amplitude ψ(ν) sampled on a uniform or non-uniform
//! frequency grid, normalized so that ∫dν |ψ|² = 1 under the trapezoid rule.
//! Scattering multiplies ψ pointwise by the elastic and converted amplitudes of
//! a [`ConversionChannel`]; the conversion efficiency is the integral of the
//! converted density.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scattering::{channel, ConversionChannel, DriveField, EmitterRates, Transitions};
use crate::units::ghz;

/// Default half-span of a Gaussian pulse grid is `DEFAULT_SPAN / 2` widths.
pub const DEFAULT_SPAN: f64 = 12.0;
/// 4096 trapezoid intervals; odd so that the center lies on the grid.
pub const DEFAULT_POINTS: usize = 4097;

const NORM_TOLERANCE: f64 = 1e-9;
const RENORM_WARN: f64 = 1e-3;

/// Normalized spectral amplitude on a frequency grid (rad/s).
#[derive(Clone, Debug, Serialize)]
pub struct SpectralPulse {
    grid: Vec<f64>,
    amplitude: Vec<Complex64>,
    weights: Vec<f64>,
    center: f64,
    width: Option<f64>,
}

fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for k in 0..n - 1 {
        let h = 0.5 * (grid[k + 1] - grid[k]);
        w[k] += h;
        w[k + 1] += h;
    }
    w
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {}", grid.len())));
    }
    if let Some(k) = grid.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!("non-finite frequency at index {k}")));
    }
    if let Some(k) = grid.windows(2).position(|p| !(p[1] > p[0])) {
        return Err(Error::InvalidGrid(format!(
            "frequencies must be strictly increasing (index {} to {})",
            k,
            k + 1
        )));
    }
    Ok(())
}

impl SpectralPulse {
    /// Wraps an amplitude that is already normalized to within 1e-9.
    pub fn new(grid: Vec<f64>, amplitude: Vec<Complex64>) -> Result<Self> {
        let pulse = Self::unchecked(grid, amplitude)?;
        let norm = pulse.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid("amplitude", format!("not normalized (norm {norm})")));
        }
        Ok(pulse)
    }

    /// Rescales an arbitrary nonzero amplitude to unit norm. Also returns the
    /// norm it had before rescaling.
    pub fn normalized(grid: Vec<f64>, amplitude: Vec<Complex64>) -> Result<(Self, f64)> {
        let mut pulse = Self::unchecked(grid, amplitude)?;
        let norm = pulse.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid("amplitude", format!("cannot normalize (norm {norm})")));
        }
        let s = 1.0 / norm.sqrt();
        pulse.amplitude.iter_mut().for_each(|a| *a *= s);
        Ok((pulse, norm))
    }

    fn unchecked(grid: Vec<f64>, amplitude: Vec<Complex64>) -> Result<Self> {
        check_grid(&grid)?;
        if grid.len() != amplitude.len() {
            return Err(Error::InvalidGrid(format!(
                "{} frequencies but {} amplitudes",
                grid.len(),
                amplitude.len()
            )));
        }
        let weights = trapezoid_weights(&grid);
        let total: f64 = weights.iter().sum();
        let center = grid
            .iter()
            .zip(&weights)
            .zip(&amplitude)
            .map(|((v, w), a)| v * w * a.norm_sqr())
            .sum::<f64>();
        let mass: f64 = weights.iter().zip(&amplitude).map(|(w, a)| w * a.norm_sqr()).sum();
        let center = if mass > 0.0 { center / mass } else { grid[0] + 0.5 * total };
        Ok(SpectralPulse {
            grid,
            amplitude,
            weights,
            center,
            width: None,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn amplitude(&self) -> &[Complex64] {
        &self.amplitude
    }

    /// Trapezoid weights of the grid.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nominal center frequency (the spectral mean for tabulated pulses).
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Nominal width d, for analytic pulses.
    pub fn width(&self) -> Option<f64> {
        self.width
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// ∫dν |ψ|².
    pub fn norm(&self) -> f64 {
        self.integrate(|_, a| a.norm_sqr())
    }

    /// Trapezoid integral of `f(ν, ψ(ν))`.
    pub fn integrate(&self, f: impl Fn(f64, Complex64) -> f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.amplitude)
            .zip(&self.weights)
            .map(|((&v, &a), &w)| w * f(v, a))
            .sum()
    }

    /// Reads a `nu_ghz, re_psi, im_psi` table. ψ is taken to be normalized
    /// against ordinary frequency in GHz; it is rescaled to the angular
    /// convention and renormalized, with a warning if that correction exceeds 1e-3.
    pub fn from_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            nu_ghz: f64,
            re_psi: f64,
            im_psi: f64,
        }
        let table_err = |message: String| Error::Table {
            path: path.to_path_buf(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(path)
            .map_err(|e| table_err(e.to_string()))?;
        let headers = reader.headers().map_err(|e| table_err(e.to_string()))?.clone();
        for col in ["nu_ghz", "re_psi", "im_psi"] {
            if !headers.iter().any(|h| h == col) {
                return Err(table_err(format!("missing column `{col}` in header")));
            }
        }
        let scale = 1.0 / (2.0 * PI * 1e9).sqrt();
        let mut grid = Vec::new();
        let mut amplitude = Vec::new();
        for (k, row) in reader.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| table_err(format!("row {}: {e}", k + 1)))?;
            grid.push(ghz(row.nu_ghz));
            amplitude.push(Complex64::new(row.re_psi, row.im_psi) * scale);
        }
        let (pulse, norm) =
            Self::normalized(grid, amplitude).map_err(|e| table_err(e.to_string()))?;
        if (norm - 1.0).abs() > RENORM_WARN {
            log::warn!(
                "{}: pulse norm was {norm:.6}, renormalized to 1",
                path.display()
            );
        }
        Ok(pulse)
    }
}

/// ψ(ν) = (2/(πd²))^{1/4} exp(−(ν−ν0)²/d²) on `points` uniform samples
/// spanning `span` widths around `center`, renormalized on the grid.
pub fn gaussian_pulse(center: f64, width: f64, span: f64, points: usize) -> Result<SpectralPulse> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::InvalidGrid(format!("pulse width must be positive, got {width}")));
    }
    if !(span >= 8.0) || !span.is_finite() {
        return Err(Error::InvalidGrid(format!("grid span must be at least 8 widths, got {span}")));
    }
    if points < 64 {
        return Err(Error::InvalidGrid(format!("need at least 64 points, got {points}")));
    }
    if !center.is_finite() {
        return Err(Error::InvalidGrid("pulse center must be finite".into()));
    }
    let half = 0.5 * span * width;
    let step = 2.0 * half / (points - 1) as f64;
    let peak = (2.0 / (PI * width * width)).powf(0.25);
    let grid: Vec<f64> = (0..points).map(|k| center - half + step * k as f64).collect();
    let amplitude = grid
        .iter()
        .map(|v| {
            let x = (v - center) / width;
            Complex64::new(peak * (-x * x).exp(), 0.0)
        })
        .collect();
    let (mut pulse, _) = SpectralPulse::normalized(grid, amplitude)?;
    pulse.center = center;
    pulse.width = Some(width);
    Ok(pulse)
}

/// Densities of the scattered photon and the conversion efficiency.
#[derive(Clone, Debug, Serialize)]
pub struct ScatteredPulse {
    pub channel: &'static str,
    /// Incident frequencies.
    pub grid: Vec<f64>,
    /// Frequencies of the converted component (incident grid shifted by ∓ω).
    pub shifted_grid: Vec<f64>,
    pub input: Vec<f64>,
    /// |T_elastic ψ|² on `grid`.
    pub elastic: Vec<f64>,
    /// |T_converted ψ|² on `shifted_grid`.
    pub inelastic: Vec<f64>,
    pub elastic_total: f64,
    pub efficiency: f64,
}

impl ScatteredPulse {
    /// Probability that the photon is still in the waveguide.
    pub fn total(&self) -> f64 {
        self.elastic_total + self.efficiency
    }
}

pub fn convert(
    channel: &dyn ConversionChannel,
    pulse: &SpectralPulse,
    rates: &EmitterRates,
    transitions: &Transitions,
    drive: &DriveField,
) -> ScatteredPulse {
    let shift = channel.frequency_shift(drive);
    let n = pulse.len();
    let mut input = Vec::with_capacity(n);
    let mut elastic = Vec::with_capacity(n);
    let mut inelastic = Vec::with_capacity(n);
    for (&nu, &psi) in pulse.grid.iter().zip(&pulse.amplitude) {
        let r = channel.scatter(nu, rates, transitions, drive);
        let p = psi.norm_sqr();
        input.push(p);
        elastic.push(channel.elastic(&r).norm_sqr() * p);
        inelastic.push(channel.converted(&r).norm_sqr() * p);
    }
    let dot = |d: &[f64]| d.iter().zip(&pulse.weights).map(|(a, w)| a * w).sum::<f64>();
    ScatteredPulse {
        channel: channel.name(),
        grid: pulse.grid.clone(),
        shifted_grid: pulse.grid.iter().map(|v| v + shift).collect(),
        elastic_total: dot(&elastic),
        efficiency: dot(&inelastic),
        input,
        elastic,
        inelastic,
    }
}

pub fn convert_down(
    pulse: &SpectralPulse,
    rates: &EmitterRates,
    transitions: &Transitions,
    drive: &DriveField,
) -> ScatteredPulse {
    convert(channel("down").expect("registered"), pulse, rates, transitions, drive)
}

pub fn convert_up(
    pulse: &SpectralPulse,
    rates: &EmitterRates,
    transitions: &Transitions,
    drive: &DriveField,
) -> ScatteredPulse {
    convert(channel("up").expect("registered"), pulse, rates, transitions, drive)
}

/// Quadrature settings for Gaussian pulses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub span: f64,
    pub points: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            span: DEFAULT_SPAN,
            points: DEFAULT_POINTS,
        }
    }
}

/// Efficiency of a resonant Gaussian pulse for each width, in input order.
pub fn efficiency_vs_width(
    channel: &dyn ConversionChannel,
    rates: &EmitterRates,
    transitions: &Transitions,
    drive: &DriveField,
    widths: &[f64],
    quadrature: Quadrature,
) -> Result<Vec<(f64, f64)>> {
    let center = channel.input_resonance(transitions);
    widths
        .par_iter()
        .map(|&d| {
            let pulse = gaussian_pulse(center, d, quadrature.span, quadrature.points)?;
            Ok((d, convert(channel, &pulse, rates, transitions, drive).efficiency))
        })
        .collect()
}
