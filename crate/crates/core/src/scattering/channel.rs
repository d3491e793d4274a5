use std::fmt::Debug;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::{
    optimal_drive_down, optimal_drive_up, resonant_efficiency_down, resonant_efficiency_up,
    scatter_down, scatter_up, solve_oracle_down, solve_oracle_up, DriveField, EmitterRates,
    OptimalDrive, ScatteringResult, Transitions,
};
use crate::error::Result;
use crate::registry::Registry;

/// A conversion direction: which waveguide mode carries the incident photon
/// and where the converted photon comes out.
pub trait ConversionChannel: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn scatter(
        &self,
        nu: f64,
        rates: &EmitterRates,
        transitions: &Transitions,
        drive: &DriveField,
    ) -> ScatteringResult;

    fn solve_oracle(
        &self,
        nu: f64,
        rates: &EmitterRates,
        transitions: &Transitions,
        drive: &DriveField,
    ) -> Result<ScatteringResult>;

    fn optimal_drive(&self, rates: &EmitterRates) -> Result<OptimalDrive>;

    fn resonant_efficiency(&self, rates: &EmitterRates) -> f64;

    /// Transition the incident photon is resonant with.
    fn input_resonance(&self, transitions: &Transitions) -> f64;

    /// Frequency added to a converted photon (−ω down, +ω up).
    fn frequency_shift(&self, drive: &DriveField) -> f64;

    fn elastic(&self, r: &ScatteringResult) -> Complex64;

    fn converted(&self, r: &ScatteringResult) -> Complex64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DownConversion;

#[derive(Debug, Clone, Copy, Default)]
pub struct UpConversion;

impl ConversionChannel for DownConversion {
    fn name(&self) -> &'static str {
        "down"
    }

    fn scatter(&self, nu: f64, r: &EmitterRates, t: &Transitions, d: &DriveField) -> ScatteringResult {
        scatter_down(nu, r, t, d)
    }

    fn solve_oracle(
        &self,
        nu: f64,
        r: &EmitterRates,
        t: &Transitions,
        d: &DriveField,
    ) -> Result<ScatteringResult> {
        solve_oracle_down(nu, r, t, d)
    }

    fn optimal_drive(&self, rates: &EmitterRates) -> Result<OptimalDrive> {
        optimal_drive_down(rates)
    }

    fn resonant_efficiency(&self, rates: &EmitterRates) -> f64 {
        resonant_efficiency_down(rates)
    }

    fn input_resonance(&self, transitions: &Transitions) -> f64 {
        transitions.omega_31()
    }

    fn frequency_shift(&self, drive: &DriveField) -> f64 {
        -drive.omega()
    }

    fn elastic(&self, r: &ScatteringResult) -> Complex64 {
        r.t_a
    }

    fn converted(&self, r: &ScatteringResult) -> Complex64 {
        r.t_b
    }
}

impl ConversionChannel for UpConversion {
    fn name(&self) -> &'static str {
        "up"
    }

    fn scatter(&self, nu: f64, r: &EmitterRates, t: &Transitions, d: &DriveField) -> ScatteringResult {
        scatter_up(nu, r, t, d)
    }

    fn solve_oracle(
        &self,
        nu: f64,
        r: &EmitterRates,
        t: &Transitions,
        d: &DriveField,
    ) -> Result<ScatteringResult> {
        solve_oracle_up(nu, r, t, d)
    }

    fn optimal_drive(&self, rates: &EmitterRates) -> Result<OptimalDrive> {
        optimal_drive_up(rates)
    }

    fn resonant_efficiency(&self, rates: &EmitterRates) -> f64 {
        resonant_efficiency_up(rates)
    }

    fn input_resonance(&self, transitions: &Transitions) -> f64 {
        transitions.omega_21()
    }

    fn frequency_shift(&self, drive: &DriveField) -> f64 {
        drive.omega()
    }

    fn elastic(&self, r: &ScatteringResult) -> Complex64 {
        r.t_b
    }

    fn converted(&self, r: &ScatteringResult) -> Complex64 {
        r.t_a
    }
}

/// All conversion directions, keyed by `down` / `up`.
pub fn channels() -> &'static Registry<dyn ConversionChannel> {
    static REGISTRY: OnceLock<Registry<dyn ConversionChannel>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn ConversionChannel> = Registry::new("conversion direction");
        reg.register("down", Box::new(DownConversion))
            .register("up", Box::new(UpConversion));
        reg
    })
}

pub fn channel(name: &str) -> Result<&'static dyn ConversionChannel> {
    channels().get(name)
}
