//! The registered sweep kinds.

use std::fmt::Debug;
use std::sync::{Arc, OnceLock};

use crate::config::{Config, Emitter};
use crate::error::{Error, Result};
use crate::flux::{
    check_convergence, decay_rates, flux_record, incident_voltage_for_rabi, voltage_for_rabi, FluxRecord,
};
use crate::lindblad::{
    photon_number, probe_response, weak_field_transmission, LindbladRates, ProbeDrive, SaturationRow,
};
use crate::pulse::{convert, gaussian_pulse};
use crate::registry::Registry;
use crate::scattering::detuning;
use super::find_optimal_bias;
use crate::units::{ghz, to_ghz};

type PointFn = Box<dyn Fn(usize, f64) -> Result<Vec<f64>> + Send + Sync>;

/// A sweep ready to run: the per-point evaluator, called with the grid index
/// and value, and run-level scalars.
pub struct Prepared {
    pub eval: PointFn,
    pub summary: Vec<(String, f64)>,
}

pub trait Sweep: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    /// Output columns; the first is the swept quantity.
    fn columns(&self) -> &'static [&'static str];

    /// Grid values, by default the configured `[sweep] grid`.
    fn abscissae(&self, config: &Config) -> Result<Vec<f64>> {
        Ok(config.grid()?.values())
    }

    fn prepare(&self, config: &Config) -> Result<Prepared>;
}

fn emitter_summary(e: &Emitter) -> Vec<(String, f64)> {
    [
        ("gamma_31_ghz", e.rates.gamma_31()),
        ("gamma_21_ghz", e.rates.gamma_21()),
        ("gamma_32_ghz", e.gamma_32),
        ("loss_2_ghz", e.rates.loss_2()),
        ("loss_3_ghz", e.rates.loss_3()),
        ("omega_31_ghz", e.transitions.omega_31()),
        ("omega_21_ghz", e.transitions.omega_21()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), to_ghz(v)))
    .collect()
}

fn check_physical(rows: Result<SaturationRow>) -> Result<SaturationRow> {
    let row = rows?;
    if !row.sanity.is_physical() {
        return Err(Error::Unphysical(format!("{:?}", row.sanity)));
    }
    Ok(row)
}

#[derive(Debug)]
struct Spectrum;

impl Sweep for Spectrum {
    fn name(&self) -> &'static str {
        "spectrum"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["nu_ghz", "re_ta", "im_ta", "abs2_ta", "abs2_tb", "sum"]
    }

    fn prepare(&self, config: &Config) -> Result<Prepared> {
        let em = config.emitter()?;
        let ch = config.channel()?;
        let drive = config.drive(&em)?;
        let mut summary = emitter_summary(&em);
        summary.push(("control_rabi_ghz".into(), to_ghz(drive.rabi())));
        summary.push(("control_detuning_ghz".into(), to_ghz(detuning(&drive, &em.transitions))));
        let (rates, tr) = (em.rates, em.transitions);
        Ok(Prepared {
            eval: Box::new(move |_, nu| {
                let r = ch.scatter(ghz(nu), &rates, &tr, &drive);
                let (t_a, t_b) = (ch.elastic(&r), ch.converted(&r));
                let (a, b) = (t_a.norm_sqr(), t_b.norm_sqr());
                Ok(vec![nu, t_a.re, t_a.im, a, b, a + b])
            }),
            summary,
        })
    }
}

#[derive(Debug)]
struct PulseWidth;

impl Sweep for PulseWidth {
    fn name(&self) -> &'static str {
        "pulse-width"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["width_ghz", "efficiency", "elastic", "total"]
    }

    fn prepare(&self, config: &Config) -> Result<Prepared> {
        let em = config.emitter()?;
        let ch = config.channel()?;
        let drive = config.drive(&em)?;
        let quad = config.quadrature();
        let summary = emitter_summary(&em);
        let (rates, tr) = (em.rates, em.transitions);
        Ok(Prepared {
            eval: Box::new(move |_, d| {
                let pulse = gaussian_pulse(ch.input_resonance(&tr), ghz(d), quad.span, quad.points)?;
                let out = convert(ch, &pulse, &rates, &tr, &drive);
                Ok(vec![d, out.efficiency, out.elastic_total, out.total()])
            }),
            summary,
        })
    }
}

/// Input and output spectra of one Gaussian pulse, against the offset from
/// the respective line centers.
#[derive(Debug)]
struct PulseSpectra;

impl Sweep for PulseSpectra {
    fn name(&self) -> &'static str {
        "pulse"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["detuning_ghz", "input", "elastic", "inelastic"]
    }

    fn abscissae(&self, config: &Config) -> Result<Vec<f64>> {
        let q = config.quadrature();
        let pulse = gaussian_pulse(0.0, ghz(config.pulse.width_ghz), q.span, q.points)?;
        Ok(pulse.grid().iter().map(|&v| to_ghz(v)).collect())
    }

    fn prepare(&self, config: &Config) -> Result<Prepared> {
        let em = config.emitter()?;
        let ch = config.channel()?;
        let drive = config.drive(&em)?;
        let q = config.quadrature();
        let pulse = gaussian_pulse(
            ch.input_resonance(&em.transitions),
            ghz(config.pulse.width_ghz),
            q.span,
            q.points,
        )?;
        let out = Arc::new(convert(ch, &pulse, &em.rates, &em.transitions, &drive));
        let mut summary = emitter_summary(&em);
        summary.push(("width_ghz".into(), config.pulse.width_ghz));
        summary.push(("efficiency".into(), out.efficiency));
        summary.push(("elastic".into(), out.elastic_total));
        summary.push(("total".into(), out.total()));
        // Densities per GHz rather than per rad/s.
        let per_ghz = ghz(1.0);
        Ok(Prepared {
            eval: Box::new(move |i, x| {
                Ok(vec![
                    x,
                    out.input[i] * per_ghz,
                    out.elastic[i] * per_ghz,
                    out.inelastic[i] * per_ghz,
                ])
            }),
            summary,
        })
    }
}

#[derive(Debug)]
struct Flux;

impl Sweep for Flux {
    fn name(&self) -> &'static str {
        "flux"
    }

    fn columns(&self) -> &'static [&'static str] {
        &FluxRecord::COLUMNS
    }

    fn prepare(&self, config: &Config) -> Result<Prepared> {
        let base = config.circuit_params()?;
        let trunc = config.truncation()?;
        let solver = config.eigensolver()?;
        let loss = config.loss();
        Ok(Prepared {
            eval: Box::new(move |_, f| {
                let p = base.with_flux(f)?;
                Ok(flux_record(&p, &trunc, solver, &loss)?.values().to_vec())
            }),
            summary: Vec::new(),
        })
    }
}

/// One flux point with the truncation check and drive requirements.
#[derive(Debug)]
struct Circuit;

const CIRCUIT_COLUMNS: [&str; 16] = [
    "f",
    "w21_ghz",
    "w31_ghz",
    "w32_ghz",
    "abs_n21",
    "abs_n31",
    "abs_n32",
    "g21_ghz",
    "g31_ghz",
    "g32_ghz",
    "eff_down",
    "eff_up",
    "rel_change_w21",
    "rel_change_w31",
    "max_change_abs_n",
    "converged",
];

impl Sweep for Circuit {
    fn name(&self) -> &'static str {
        "circuit"
    }

    fn columns(&self) -> &'static [&'static str] {
        &CIRCUIT_COLUMNS
    }

    fn abscissae(&self, config: &Config) -> Result<Vec<f64>> {
        Ok(vec![config.circuit_params()?.flux()])
    }

    fn prepare(&self, config: &Config) -> Result<Prepared> {
        let params = config.circuit_params()?;
        let trunc = config.truncation()?;
        let solver = config.eigensolver()?;
        let loss = config.loss();
        let (spectrum, conv) = check_convergence(&params, &trunc, solver)?;
        let realized = decay_rates(&params, &spectrum);
        let em = Emitter {
            rates: realized.emitter_rates(&loss)?,
            transitions: spectrum.transitions()?,
            gamma_32: realized.gamma_32,
            circuit: None,
        };
        let mut summary = Vec::new();
        // A missing drive is reported per point, not as a global error.
        let drive = config.drive(&em);
        if let Ok(drive) = &drive {
            let rabi = drive.rabi();
            summary.push(("control_rabi_ghz".into(), to_ghz(rabi)));
            if let Ok(v) = voltage_for_rabi(&params, &spectrum, rabi) {
                summary.push(("loop_voltage_v".into(), v));
            }
            if let Ok(v) = incident_voltage_for_rabi(&params, &spectrum, rabi) {
                summary.push(("incident_voltage_v".into(), v));
            }
            if let Ok(n) = photon_number(rabi, realized.gamma_32) {
                summary.push(("control_photon_number".into(), n));
            }
        }
        Ok(Prepared {
            eval: Box::new(move |_, _| {
                let mut row = flux_record(&params, &trunc, solver, &loss)?.values().to_vec();
                row.extend([
                    conv.rel_change_omega_21,
                    conv.rel_change_omega_31,
                    conv.max_change_abs_n,
                    if conv.converged { 1.0 } else { 0.0 },
                ]);
                Ok(row)
            }),
            summary,
        })
    }
}

/// Master-equation rates and control field; the model is down-conversion only.
fn steady_setup(config: &Config) -> Result<(Emitter, LindbladRates, f64, f64, Vec<(String, f64)>)> {
    if config.drive.direction != "down" {
        return Err(Error::Config(format!(
            "steady-state runs model down-conversion only, got direction `{}`",
            config.drive.direction
        )));
    }
    let em = config.emitter()?;
    let rates = config.lindblad_rates(&em)?;
    let drive = config.drive(&em)?;
    let mut summary = emitter_summary(&em);
    summary.push(("control_rabi_ghz".into(), to_ghz(drive.rabi())));
    if let Ok(n) = photon_number(drive.rabi(), em.gamma_32) {
        summary.push(("control_photon_number".into(), n));
    }
    let delta = detuning(&drive, &em.transitions);
    Ok((em, rates, drive.rabi(), delta, summary))
}

#[derive(Debug)]
struct Saturation;

impl Sweep for Saturation {
    fn name(&self) -> &'static str {
        "saturation"
    }

    fn columns(&self) -> &'static [&'static str] {
        &SaturationRow::COLUMNS
    }

    fn prepare(&self, config: &Config) -> Result<Prepared> {
        let (_, rates, omega, delta, summary) = steady_setup(config)?;
        let delta_p = config.drive.delta_p_over_g31 * rates.gamma_31();
        Ok(Prepared {
            eval: Box::new(move |_, x| {
                if !(x > 0.0) {
                    return Err(Error::InvalidGrid(format!("probe strength must be positive, got {x}")));
                }
                let drive = ProbeDrive::new(x * rates.gamma_31(), delta_p, delta, omega)?;
                let row = check_physical(probe_response(&rates, &drive))?;
                Ok(vec![x, row.abs2_ta, row.abs2_tb, row.sum])
            }),
            summary,
        })
    }
}

/// Probe spectrum at fixed Ω_p against Δ_p/Γ31, with the weak-probe limit.
#[derive(Debug)]
struct Steady;

impl Sweep for Steady {
    fn name(&self) -> &'static str {
        "steady"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["delta_p_over_g31", "abs2_ta", "abs2_tb", "sum", "abs2_ta_weak", "abs2_tb_weak"]
    }

    fn prepare(&self, config: &Config) -> Result<Prepared> {
        let x = config.drive.omega_p_over_g31;
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::invalid("omega_p_over_g31", format!("must be positive, got {x}")));
        }
        let (_, rates, omega, delta, mut summary) = steady_setup(config)?;
        summary.push(("omega_p_over_g31".into(), x));
        summary.push(("probe_photon_number".into(), photon_number(x * rates.gamma_31(), rates.gamma_31())?));
        Ok(Prepared {
            eval: Box::new(move |_, dp| {
                let drive = ProbeDrive::new(x * rates.gamma_31(), dp * rates.gamma_31(), delta, omega)?;
                let row = check_physical(probe_response(&rates, &drive))?;
                let (wa, wb) = weak_field_transmission(&drive, &rates)?;
                Ok(vec![dp, row.abs2_ta, row.abs2_tb, row.sum, wa.norm_sqr(), wb.norm_sqr()])
            }),
            summary,
        })
    }
}

/// Efficiency of the configured channel against flux over the grid window,
/// with the refined optimum and the working band in the summary.
#[derive(Debug)]
struct OptimalBiasSearch;

impl Sweep for OptimalBiasSearch {
    fn name(&self) -> &'static str {
        "optimal-bias"
    }

    fn columns(&self) -> &'static [&'static str] {
        &["f", "efficiency"]
    }

    fn prepare(&self, config: &Config) -> Result<Prepared> {
        let grid = config.grid()?;
        let found = find_optimal_bias(
            &config.circuit_params()?,
            (grid.start, grid.stop),
            grid.step(),
            config.channel()?,
            &config.loss(),
            &config.truncation()?,
            config.eigensolver()?,
        )?;
        let mut summary = vec![
            ("optimal_flux".to_string(), found.flux),
            ("optimal_efficiency".to_string(), found.efficiency),
        ];
        if let Some((lo, hi)) = found.band {
            summary.push(("band_start".into(), lo));
            summary.push(("band_stop".into(), hi));
        }
        let samples = found.samples;
        Ok(Prepared {
            eval: Box::new(move |i, _| Ok(vec![samples[i].0, samples[i].1])),
            summary,
        })
    }
}

/// Sweep kinds by name.
pub fn sweep_kinds() -> &'static Registry<dyn Sweep> {
    static REGISTRY: OnceLock<Registry<dyn Sweep>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn Sweep> = Registry::new("sweep kind");
        reg.register("spectrum", Box::new(Spectrum))
            .register("pulse-width", Box::new(PulseWidth))
            .register("pulse", Box::new(PulseSpectra))
            .register("flux", Box::new(Flux))
            .register("circuit", Box::new(Circuit))
            .register("saturation", Box::new(Saturation))
            .register("steady", Box::new(Steady))
            .register("optimal-bias", Box::new(OptimalBiasSearch));
        reg
    })
}

pub fn sweep_kind(name: &str) -> Result<&'static dyn Sweep> {
    sweep_kinds().get(name)
}
