//! Three-junction flux qubit as a Δ-type emitter.
//!
//! The loop is quantized in a truncated two-mode charge basis; the lowest
//! three eigenstates play the roles of |1⟩, |2⟩, |3⟩. Their transition matrix
//! elements of n̂_m set the decay rates into a transmission line capacitively
//! coupled to the loop, and the Rabi frequency of a classical voltage drive.

mod eigen;
mod hamiltonian;

pub use eigen::{
    eigensolver, eigensolvers, Davidson, DenseEigensolver, Eigenpairs, Eigensolver, DEFAULT_EIGENSOLVER,
};
pub use hamiltonian::{basis, build_hamiltonian, SparseHermitian};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scattering::{resonant_efficiency_down, resonant_efficiency_up, EmitterRates, Transitions};
use crate::units::constants::{ELEMENTARY_CHARGE, HBAR, RESISTANCE_QUANTUM};
use crate::units::{ghz, to_ghz};

/// Circuit parameters. Energies are given as frequencies E/h in GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    alpha: f64,
    beta: f64,
    ej_over_h: f64,
    ej_over_ec: f64,
    impedance: f64,
    flux: f64,
}

impl Default for CircuitParams {
    /// α = 0.7, β = 0.5, E_J/h = 150 GHz, E_J/E_C = 80, Z = 50 Ω, f = 0.4845.
    fn default() -> Self {
        CircuitParams {
            alpha: 0.7,
            beta: 0.5,
            ej_over_h: 150.0,
            ej_over_ec: 80.0,
            impedance: 50.0,
            flux: 0.4845,
        }
    }
}

impl CircuitParams {
    /// `alpha`: small-junction ratio; `beta`: coupling to junction capacitance;
    /// `ej_over_h` in GHz; `impedance` of the line in ohms; `flux` in flux quanta.
    pub fn new(alpha: f64, beta: f64, ej_over_h: f64, ej_over_ec: f64, impedance: f64, flux: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
        }
        if !(ej_over_h > 0.0) || !ej_over_h.is_finite() {
            return Err(Error::invalid("ej_over_h", format!("must be positive, got {ej_over_h}")));
        }
        if !(ej_over_ec > 1.0) || !ej_over_ec.is_finite() {
            return Err(Error::invalid("ej_over_ec", format!("must exceed 1, got {ej_over_ec}")));
        }
        if !(impedance > 0.0) || !impedance.is_finite() {
            return Err(Error::invalid("impedance", format!("must be positive, got {impedance}")));
        }
        if !(0.0..=1.0).contains(&flux) {
            return Err(Error::invalid("flux", format!("must lie in [0, 1], got {flux}")));
        }
        Ok(CircuitParams {
            alpha,
            beta,
            ej_over_h,
            ej_over_ec,
            impedance,
            flux,
        })
    }

    pub fn with_flux(&self, flux: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.ej_over_h, self.ej_over_ec, self.impedance, flux)
    }

    pub fn with_impedance(&self, impedance: f64) -> Result<Self> {
        Self::new(self.alpha, self.beta, self.ej_over_h, self.ej_over_ec, impedance, self.flux)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ej_over_h(&self) -> f64 {
        self.ej_over_h
    }

    pub fn ej_over_ec(&self) -> f64 {
        self.ej_over_ec
    }

    pub fn impedance(&self) -> f64 {
        self.impedance
    }

    pub fn flux(&self) -> f64 {
        self.flux
    }

    /// β / (1 + 2α + 2β): fraction of a line voltage that reaches the δ_m mode.
    pub fn coupling_ratio(&self) -> f64 {
        self.beta / (1.0 + 2.0 * self.alpha + 2.0 * self.beta)
    }
}

/// Charge cutoffs: n_p ∈ [−n_p_max, n_p_max], n_m ∈ [−n_m_max, n_m_max].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChargeTruncation {
    n_p_max: usize,
    n_m_max: usize,
}

pub const DEFAULT_CHARGE_CUTOFF: usize = 16;

impl Default for ChargeTruncation {
    fn default() -> Self {
        ChargeTruncation {
            n_p_max: DEFAULT_CHARGE_CUTOFF,
            n_m_max: DEFAULT_CHARGE_CUTOFF,
        }
    }
}

impl ChargeTruncation {
    pub fn new(n_p_max: usize, n_m_max: usize) -> Result<Self> {
        for (name, n) in [("n_p_max", n_p_max), ("n_m_max", n_m_max)] {
            if n < 2 {
                return Err(Error::invalid(name, format!("need at least 5 charge states (cutoff >= 2), got {n}")));
            }
            if n > 200 {
                return Err(Error::invalid(name, format!("cutoff {n} is unreasonably large")));
            }
        }
        Ok(ChargeTruncation { n_p_max, n_m_max })
    }

    pub fn n_p_max(&self) -> usize {
        self.n_p_max
    }

    pub fn n_m_max(&self) -> usize {
        self.n_m_max
    }

    pub fn doubled(&self) -> Self {
        ChargeTruncation {
            n_p_max: 2 * self.n_p_max,
            n_m_max: 2 * self.n_m_max,
        }
    }

    /// Number of basis states.
    pub fn dim(&self) -> usize {
        let full = (2 * self.n_p_max + 1) * (2 * self.n_m_max + 1);
        // The corner state (−n_p_max, −n_m_max) is kept exactly when the cutoffs have equal parity.
        if (self.n_p_max + self.n_m_max) % 2 == 0 {
            (full + 1) / 2
        } else {
            full / 2
        }
    }
}

/// Lowest three levels of the loop and the n̂_m matrix elements between them.
#[derive(Clone, Debug, Serialize)]
pub struct QubitSpectrum {
    pub flux: f64,
    /// ω1 = 0, ω2, ω3 in rad/s.
    pub levels: [f64; 3],
    /// `n[i][j]` = ⟨i+1|n̂_m|j+1⟩.
    pub n: [[Complex64; 3]; 3],
    pub residual: f64,
    pub solver: &'static str,
    pub truncation: ChargeTruncation,
}

impl QubitSpectrum {
    pub fn omega_21(&self) -> f64 {
        self.levels[1]
    }

    pub fn omega_31(&self) -> f64 {
        self.levels[2]
    }

    pub fn omega_32(&self) -> f64 {
        self.levels[2] - self.levels[1]
    }

    pub fn abs_n21(&self) -> f64 {
        self.n[1][0].norm()
    }

    pub fn abs_n31(&self) -> f64 {
        self.n[2][0].norm()
    }

    pub fn abs_n32(&self) -> f64 {
        self.n[2][1].norm()
    }

    pub fn transitions(&self) -> Result<Transitions> {
        Transitions::new(self.omega_31(), self.omega_21())
    }
}

/// Rotates each column so that its largest-magnitude entry is real and positive.
fn fix_gauge(vectors: &mut DMatrix<Complex64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0;
        for (i, v) in col.iter().enumerate() {
            if v.norm() > col[best].norm() {
                best = i;
            }
        }
        let phase = col[best].conj() / col[best].norm();
        col.iter_mut().for_each(|v| *v *= phase);
    }
}

fn charge_elements(vectors: &DMatrix<Complex64>, charge_m: &[f64]) -> [[Complex64; 3]; 3] {
    let mut n = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            n[i][j] = vectors
                .column(i)
                .iter()
                .zip(vectors.column(j).iter())
                .zip(charge_m)
                .map(|((a, b), m)| a.conj() * b * m)
                .sum();
        }
    }
    n
}

pub fn diagonalize(
    params: &CircuitParams,
    trunc: &ChargeTruncation,
    solver: &dyn Eigensolver,
) -> Result<QubitSpectrum> {
    let (h, charge_m) = build_hamiltonian(params, trunc);
    let mut pairs = solver.lowest(&h, 3)?;
    fix_gauge(&mut pairs.vectors);
    let scale = ghz(params.ej_over_h);
    let e0 = pairs.values[0];
    Ok(QubitSpectrum {
        flux: params.flux,
        levels: [0.0, (pairs.values[1] - e0) * scale, (pairs.values[2] - e0) * scale],
        n: charge_elements(&pairs.vectors, &charge_m),
        residual: pairs.residual,
        solver: solver.name(),
        truncation: *trunc,
    })
}

/// Relative level tolerance of the truncation check.
pub const LEVEL_CONVERGENCE: f64 = 1e-6;
/// Absolute |n_ij| tolerance of the truncation check.
pub const ELEMENT_CONVERGENCE: f64 = 1e-4;

/// Comparison of a spectrum against the same circuit with doubled cutoffs.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Convergence {
    pub truncation: ChargeTruncation,
    pub doubled: ChargeTruncation,
    pub rel_change_omega_21: f64,
    pub rel_change_omega_31: f64,
    pub max_change_abs_n: f64,
    pub converged: bool,
}

pub fn check_convergence(
    params: &CircuitParams,
    trunc: &ChargeTruncation,
    solver: &dyn Eigensolver,
) -> Result<(QubitSpectrum, Convergence)> {
    let base = diagonalize(params, trunc, solver)?;
    let fine = diagonalize(params, &trunc.doubled(), solver)?;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    let rel_21 = rel(base.omega_21(), fine.omega_21());
    let rel_31 = rel(base.omega_31(), fine.omega_31());
    let dn = [
        (base.abs_n21() - fine.abs_n21()).abs(),
        (base.abs_n31() - fine.abs_n31()).abs(),
        (base.abs_n32() - fine.abs_n32()).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let conv = Convergence {
        truncation: *trunc,
        doubled: trunc.doubled(),
        rel_change_omega_21: rel_21,
        rel_change_omega_31: rel_31,
        max_change_abs_n: dn,
        converged: rel_21 < LEVEL_CONVERGENCE && rel_31 < LEVEL_CONVERGENCE && dn < ELEMENT_CONVERGENCE,
    };
    Ok((base, conv))
}

/// Decay rates of the three transitions into the line, rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealizedRates {
    pub gamma_31: f64,
    pub gamma_21: f64,
    pub gamma_32: f64,
}

/// Losses other than emission into the line, relative to the line rates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    /// γ̃3 / Γ31: intrinsic loss out of |3⟩.
    pub intrinsic_3: f64,
    /// γ2 / Γ21.
    pub intrinsic_2: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel::uniform(1e-3)
    }
}

impl LossModel {
    pub fn uniform(ratio: f64) -> Self {
        LossModel {
            intrinsic_3: ratio,
            intrinsic_2: ratio,
        }
    }

    /// Only the 3→2 emission into the line is lost.
    pub fn perfect() -> Self {
        LossModel::uniform(0.0)
    }
}

impl RealizedRates {
    /// Emitter rates with γ3 = γ̃3 + Γ32 and γ2 from the loss ratios.
    pub fn emitter_rates(&self, loss: &LossModel) -> Result<EmitterRates> {
        for (name, v) in [("intrinsic_3", loss.intrinsic_3), ("intrinsic_2", loss.intrinsic_2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        EmitterRates::new(
            self.gamma_31,
            self.gamma_21,
            loss.intrinsic_2 * self.gamma_21,
            loss.intrinsic_3 * self.gamma_31 + self.gamma_32,
        )
    }
}

/// Γ_ij = 4π (Z/R_Q) κ² ω_ij |n_ij|², κ the coupling ratio.
pub fn decay_rates(params: &CircuitParams, spectrum: &QubitSpectrum) -> RealizedRates {
    let k = params.coupling_ratio();
    let pref = 4.0 * PI * params.impedance / RESISTANCE_QUANTUM * k * k;
    RealizedRates {
        gamma_31: pref * spectrum.omega_31() * spectrum.abs_n31().powi(2),
        gamma_21: pref * spectrum.omega_21() * spectrum.abs_n21().powi(2),
        gamma_32: pref * spectrum.omega_32() * spectrum.abs_n32().powi(2),
    }
}

const MIN_DRIVE_ELEMENT: f64 = 1e-12;

fn volts_to_rabi(params: &CircuitParams, spectrum: &QubitSpectrum) -> Result<f64> {
    let n32 = spectrum.abs_n32();
    if n32 < MIN_DRIVE_ELEMENT {
        return Err(Error::ZeroMatrixElement(n32));
    }
    Ok(2.0 * ELEMENTARY_CHARGE * params.coupling_ratio() * n32 / HBAR)
}

/// Ω = 2eκ|n32| V / ħ for a drive voltage amplitude `volts` at the loop.
pub fn rabi_from_voltage(params: &CircuitParams, spectrum: &QubitSpectrum, volts: f64) -> Result<f64> {
    Ok(volts_to_rabi(params, spectrum)? * volts)
}

/// Drive voltage amplitude at the loop that gives Rabi frequency `rabi`.
pub fn voltage_for_rabi(params: &CircuitParams, spectrum: &QubitSpectrum, rabi: f64) -> Result<f64> {
    Ok(rabi / volts_to_rabi(params, spectrum)?)
}

/// Amplitude of the wave incident on the open end of the line that produces
/// [`voltage_for_rabi`] there: the open end doubles the incoming voltage.
pub fn incident_voltage_for_rabi(params: &CircuitParams, spectrum: &QubitSpectrum, rabi: f64) -> Result<f64> {
    Ok(0.5 * voltage_for_rabi(params, spectrum, rabi)?)
}

/// One row of a flux sweep, frequencies and rates in GHz.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluxRecord {
    pub f: f64,
    pub w21_ghz: f64,
    pub w31_ghz: f64,
    pub w32_ghz: f64,
    pub abs_n21: f64,
    pub abs_n31: f64,
    pub abs_n32: f64,
    pub g21_ghz: f64,
    pub g31_ghz: f64,
    pub g32_ghz: f64,
    pub eff_down: f64,
    pub eff_up: f64,
}

impl FluxRecord {
    pub const COLUMNS: [&'static str; 12] = [
        "f", "w21_ghz", "w31_ghz", "w32_ghz", "abs_n21", "abs_n31", "abs_n32", "g21_ghz", "g31_ghz",
        "g32_ghz", "eff_down", "eff_up",
    ];

    pub fn values(&self) -> [f64; 12] {
        [
            self.f,
            self.w21_ghz,
            self.w31_ghz,
            self.w32_ghz,
            self.abs_n21,
            self.abs_n31,
            self.abs_n32,
            self.g21_ghz,
            self.g31_ghz,
            self.g32_ghz,
            self.eff_down,
            self.eff_up,
        ]
    }
}

/// Everything derived from the circuit at one flux bias.
pub fn flux_record(
    params: &CircuitParams,
    trunc: &ChargeTruncation,
    solver: &dyn Eigensolver,
    loss: &LossModel,
) -> Result<FluxRecord> {
    let s = diagonalize(params, trunc, solver)?;
    let g = decay_rates(params, &s);
    let rates = g.emitter_rates(loss)?;
    Ok(FluxRecord {
        f: params.flux,
        w21_ghz: to_ghz(s.omega_21()),
        w31_ghz: to_ghz(s.omega_31()),
        w32_ghz: to_ghz(s.omega_32()),
        abs_n21: s.abs_n21(),
        abs_n31: s.abs_n31(),
        abs_n32: s.abs_n32(),
        g21_ghz: to_ghz(g.gamma_21),
        g31_ghz: to_ghz(g.gamma_31),
        g32_ghz: to_ghz(g.gamma_32),
        eff_down: resonant_efficiency_down(&rates),
        eff_up: resonant_efficiency_up(&rates),
    })
}

/// Outcome at one flux point; a failure does not stop the sweep.
#[derive(Clone, Debug, Serialize)]
pub struct FluxPoint {
    pub f: f64,
    pub outcome: std::result::Result<FluxRecord, String>,
}

/// Records for each flux in `grid`, in grid order, computed in parallel.
pub fn sweep_flux(
    base: &CircuitParams,
    grid: &[f64],
    trunc: &ChargeTruncation,
    solver: &dyn Eigensolver,
    loss: &LossModel,
) -> Vec<FluxPoint> {
    grid.par_iter()
        .map(|&f| FluxPoint {
            f,
            outcome: base
                .with_flux(f)
                .and_then(|p| flux_record(&p, trunc, solver, loss))
                .map_err(|e| e.to_string()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::constants::PLANCK;

    fn solver() -> &'static dyn Eigensolver {
        eigensolver(DEFAULT_EIGENSOLVER).unwrap()
    }

    fn spectrum(f: f64) -> (CircuitParams, QubitSpectrum) {
        let p = CircuitParams::default().with_flux(f).unwrap();
        let s = diagonalize(&p, &ChargeTruncation::default(), solver()).unwrap();
        (p, s)
    }

    #[test]
    fn parameter_validation() {
        let d = CircuitParams::default();
        assert!(CircuitParams::new(1.0, 0.5, 150.0, 80.0, 50.0, 0.5).is_err());
        assert!(CircuitParams::new(0.7, 0.0, 150.0, 80.0, 50.0, 0.5).is_err());
        assert!(CircuitParams::new(0.7, 0.5, 150.0, 1.0, 50.0, 0.5).is_err());
        assert!(CircuitParams::new(0.7, 0.5, 150.0, 80.0, 0.0, 0.5).is_err());
        assert!(d.with_flux(1.2).is_err());
        assert!(ChargeTruncation::new(1, 8).is_err());
        assert_eq!(ChargeTruncation::new(2, 2).unwrap().dim(), 13);
    }

    #[test]
    fn spectrum_is_ordered_and_hermitian() {
        let (_, s) = spectrum(0.4845);
        assert_eq!(s.levels[0], 0.0);
        assert!(s.levels[1] > 0.0 && s.levels[2] > s.levels[1]);
        for i in 0..3 {
            for j in 0..3 {
                assert!((s.n[i][j] - s.n[j][i].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn mirror_flux_records_agree() {
        for f in [0.47, 0.4845, 0.49, 0.3] {
            let (pa, a) = spectrum(f);
            let (pb, b) = spectrum(1.0 - f);
            for k in 1..3 {
                assert!((a.levels[k] - b.levels[k]).abs() / a.levels[k] < 1e-10);
            }
            for (x, y) in [(a.abs_n21(), b.abs_n21()), (a.abs_n31(), b.abs_n31()), (a.abs_n32(), b.abs_n32())] {
                assert!((x - y).abs() < 1e-10, "{f}: {x} {y}");
            }
            let (ga, gb) = (decay_rates(&pa, &a), decay_rates(&pb, &b));
            let scale = ga.gamma_31.max(ga.gamma_21).max(ga.gamma_32);
            for (x, y) in [
                (ga.gamma_31, gb.gamma_31),
                (ga.gamma_21, gb.gamma_21),
                (ga.gamma_32, gb.gamma_32),
            ] {
                assert!((x - y).abs() / scale < 1e-10, "{f}: {x} {y}");
            }
        }
    }

    #[test]
    fn matrix_elements_ignore_eigenvector_phases() {
        let p = CircuitParams::default();
        let (h, charge) = build_hamiltonian(&p, &ChargeTruncation::new(8, 8).unwrap());
        let pairs = DenseEigensolver.lowest(&h, 3).unwrap();
        let mut a = pairs.vectors.clone();
        fix_gauge(&mut a);
        let mut b = pairs.vectors.clone();
        for (k, mut col) in b.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, 0.7 + 1.3 * k as f64);
        }
        let (na, nb) = (charge_elements(&a, &charge), charge_elements(&b, &charge));
        for i in 0..3 {
            for j in 0..3 {
                assert!((na[i][j].norm() - nb[i][j].norm()).abs() < 1e-13);
            }
        }
        // After the gauge fix the dominant component is real and positive.
        for col in a.column_iter() {
            let big = col.iter().max_by(|x, y| x.norm().total_cmp(&y.norm())).unwrap();
            assert!(big.im.abs() < 1e-15 && big.re > 0.0);
        }
    }

    #[test]
    fn decay_rate_matches_si_expression() {
        let (p, s) = spectrum(0.4845);
        let g = decay_rates(&p, &s);
        let e = ELEMENTARY_CHARGE;
        let k = p.coupling_ratio();
        let hbar = PLANCK / (2.0 * PI);
        let si = 2.0 / hbar * (2.0 * e * k).powi(2) * p.impedance() * s.omega_31() * s.abs_n31().powi(2);
        assert!((g.gamma_31 - si).abs() / si < 1e-9);
    }

    #[test]
    fn rates_are_linear_in_impedance_and_share_a_prefactor() {
        let (p, s) = spectrum(0.4845);
        let g1 = decay_rates(&p, &s);
        let g2 = decay_rates(&p.with_impedance(100.0).unwrap(), &s);
        assert!((g2.gamma_21 / g1.gamma_21 - 2.0).abs() < 1e-14);
        let c31 = g1.gamma_31 / (s.omega_31() * s.abs_n31().powi(2));
        let c21 = g1.gamma_21 / (s.omega_21() * s.abs_n21().powi(2));
        let c32 = g1.gamma_32 / (s.omega_32() * s.abs_n32().powi(2));
        assert!((c31 - c21).abs() / c31 < 1e-13 && (c31 - c32).abs() / c31 < 1e-13);
    }

    #[test]
    fn loss_composition() {
        let g = RealizedRates {
            gamma_31: 10.0,
            gamma_21: 4.0,
            gamma_32: 0.5,
        };
        let r = g.emitter_rates(&LossModel::default()).unwrap();
        assert!((r.loss_3() - (0.01 + 0.5)).abs() < 1e-15);
        assert!((r.loss_2() - 0.004).abs() < 1e-15);
        let r = g.emitter_rates(&LossModel::perfect()).unwrap();
        assert_eq!((r.loss_2(), r.loss_3()), (0.0, 0.5));
    }

    #[test]
    fn voltage_rabi_round_trip() {
        let (p, s) = spectrum(0.4845);
        let omega = ghz(0.068);
        let v = voltage_for_rabi(&p, &s, omega).unwrap();
        assert!((rabi_from_voltage(&p, &s, v).unwrap() - omega).abs() / omega < 1e-12);
        let r1 = rabi_from_voltage(&p, &s, 1e-7).unwrap();
        let r3 = rabi_from_voltage(&p, &s, 3e-7).unwrap();
        assert!((r3 / r1 - 3.0).abs() < 1e-14);
        assert!((incident_voltage_for_rabi(&p, &s, omega).unwrap() * 2.0 - v).abs() < 1e-20);

        let mut closed = s.clone();
        closed.n[2][1] = Complex64::new(0.0, 0.0);
        closed.n[1][2] = Complex64::new(0.0, 0.0);
        assert!(matches!(voltage_for_rabi(&p, &closed, omega), Err(Error::ZeroMatrixElement(_))));
    }

    #[test]
    fn sweep_keeps_order_and_marks_failures() {
        let grid = [0.48, 1.5, 0.49];
        let pts = sweep_flux(
            &CircuitParams::default(),
            &grid,
            &ChargeTruncation::new(8, 8).unwrap(),
            solver(),
            &LossModel::default(),
        );
        assert_eq!(pts.iter().map(|p| p.f).collect::<Vec<_>>(), grid);
        assert!(pts[0].outcome.is_ok() && pts[2].outcome.is_ok());
        assert!(pts[1].outcome.is_err());
    }

    #[test]
    fn delta_structure_and_rate_separation_across_the_band() {
        let grid: Vec<f64> = (0..=20).map(|k| 0.478 + 0.0006 * k as f64).collect();
        for pt in sweep_flux(
            &CircuitParams::default(),
            &grid,
            &ChargeTruncation::default(),
            solver(),
            &LossModel::default(),
        ) {
            let r = pt.outcome.unwrap();
            assert!(r.abs_n21 > 1e-3 && r.abs_n31 > 1e-3 && r.abs_n32 > 1e-3);
            assert!(r.g21_ghz / r.w21_ghz < 1e-2);
            assert!(r.g31_ghz / r.w31_ghz < 1e-2);
            assert!(r.g32_ghz / r.w32_ghz < 1e-2);
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

        #[test]
        fn spectra_are_ordered_with_hermitian_elements(
            f in 0.0f64..=1.0, alpha in 0.55f64..0.9, z in 10.0f64..200.0,
        ) {
            let p = CircuitParams::new(alpha, 0.5, 150.0, 80.0, z, f).unwrap();
            let s = diagonalize(&p, &ChargeTruncation::new(8, 8).unwrap(), solver()).unwrap();
            proptest::prop_assert_eq!(s.levels[0], 0.0);
            proptest::prop_assert!(s.levels[1] >= 0.0 && s.levels[2] >= s.levels[1]);
            for i in 0..3 {
                for j in 0..3 {
                    proptest::prop_assert!((s.n[i][j] - s.n[j][i].conj()).norm() < 1e-12);
                }
            }
            let g = decay_rates(&p, &s);
            proptest::prop_assert!(g.gamma_31 >= 0.0 && g.gamma_21 >= 0.0 && g.gamma_32 >= 0.0);
            let g2 = decay_rates(&p.with_impedance(2.0 * z).unwrap(), &s);
            proptest::prop_assert!((g2.gamma_31 - 2.0 * g.gamma_31).abs() <= 1e-12 * g.gamma_31.max(1e-300));
        }
    }
}
