//! Single-photon scattering off a driven Δ-type emitter at the end of a waveguide.
//!
//! The emitter has a ground state |1⟩ and two excited states |2⟩, |3⟩. The
//! 1↔3 transition couples to the waveguide `a` mode (rate Γ31), the 1↔2
//! transition to the `b` mode (rate Γ21), and a classical control field of
//! frequency ω and Rabi frequency Ω drives 2↔3. A photon entering on one mode
//! leaves either on the same mode (elastic) or on the other mode shifted by ω
//! (converted).
//!
//! The group velocity is normalized to one, so the waveguide couplings are
//! `V_ij = √Γ_ij` and the excitation amplitudes Λ carry that gauge.

mod channel;
mod oracle;

pub use channel::{channel, channels, ConversionChannel, DownConversion, UpConversion};
pub use oracle::{solve_oracle_down, solve_oracle_up};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::ghz;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Waveguide decay rates and non-waveguide losses of the emitter, in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmitterRates {
    gamma_31: f64,
    gamma_21: f64,
    loss_2: f64,
    loss_3: f64,
}

impl EmitterRates {
    /// `gamma_31`, `gamma_21` are the waveguide decay rates Γ31, Γ21; `loss_2`,
    /// `loss_3` are the losses γ2, γ3 out of levels |2⟩ and |3⟩ into anything
    /// other than the `b` and `a` modes respectively.
    pub fn new(gamma_31: f64, gamma_21: f64, loss_2: f64, loss_3: f64) -> Result<Self> {
        for (name, v) in [
            ("gamma_31", gamma_31),
            ("gamma_21", gamma_21),
            ("loss_2", loss_2),
            ("loss_3", loss_3),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if gamma_31 == 0.0 {
            return Err(Error::invalid("gamma_31", "the a-mode conversion channel is closed"));
        }
        if gamma_21 == 0.0 {
            return Err(Error::invalid("gamma_21", "the b-mode conversion channel is closed"));
        }
        Ok(EmitterRates {
            gamma_31,
            gamma_21,
            loss_2,
            loss_3,
        })
    }

    pub fn lossless(gamma_31: f64, gamma_21: f64) -> Result<Self> {
        Self::new(gamma_31, gamma_21, 0.0, 0.0)
    }

    /// Same as [`EmitterRates::new`] with every rate given as an ordinary frequency in GHz.
    pub fn from_ghz(gamma_31: f64, gamma_21: f64, loss_2: f64, loss_3: f64) -> Result<Self> {
        Self::new(ghz(gamma_31), ghz(gamma_21), ghz(loss_2), ghz(loss_3))
    }

    /// Rates parameterized by the total Γ = Γ21 + Γ31 and the ratio η = Γ21/Γ31.
    pub fn from_total(total: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::invalid("eta", format!("must be positive, got {eta}")));
        }
        Self::lossless(total / (1.0 + eta), eta * total / (1.0 + eta))
    }

    pub fn gamma_31(&self) -> f64 {
        self.gamma_31
    }

    pub fn gamma_21(&self) -> f64 {
        self.gamma_21
    }

    pub fn loss_2(&self) -> f64 {
        self.loss_2
    }

    pub fn loss_3(&self) -> f64 {
        self.loss_3
    }

    pub fn is_lossless(&self) -> bool {
        self.loss_2 == 0.0 && self.loss_3 == 0.0
    }

    /// Exchanges the roles of the two waveguide channels (Γ31↔Γ21, γ3↔γ2).
    pub fn mirrored(&self) -> Self {
        EmitterRates {
            gamma_31: self.gamma_21,
            gamma_21: self.gamma_31,
            loss_2: self.loss_3,
            loss_3: self.loss_2,
        }
    }
}

/// Transition frequencies ω31 > ω21 > 0 (rad/s), ground state at zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Transitions {
    omega_31: f64,
    omega_21: f64,
}

impl Transitions {
    pub fn new(omega_31: f64, omega_21: f64) -> Result<Self> {
        if !(omega_21 > 0.0) || !omega_21.is_finite() {
            return Err(Error::invalid("omega_21", format!("must be positive, got {omega_21}")));
        }
        if !(omega_31 > omega_21) || !omega_31.is_finite() {
            return Err(Error::invalid(
                "omega_31",
                format!("must exceed omega_21 = {omega_21}, got {omega_31}"),
            ));
        }
        Ok(Transitions { omega_31, omega_21 })
    }

    pub fn from_ghz(omega_31: f64, omega_21: f64) -> Result<Self> {
        Self::new(ghz(omega_31), ghz(omega_21))
    }

    pub fn omega_31(&self) -> f64 {
        self.omega_31
    }

    pub fn omega_21(&self) -> f64 {
        self.omega_21
    }

    pub fn omega_32(&self) -> f64 {
        self.omega_31 - self.omega_21
    }
}

/// Classical control field on the 2↔3 transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriveField {
    omega: f64,
    rabi: f64,
}

impl DriveField {
    /// `omega` is the field frequency, `rabi` its (real, non-negative) Rabi frequency.
    pub fn new(omega: f64, rabi: f64) -> Result<Self> {
        if !omega.is_finite() {
            return Err(Error::invalid("omega", "must be finite"));
        }
        if !(rabi >= 0.0) || !rabi.is_finite() {
            return Err(Error::invalid("rabi", format!("must be finite and >= 0, got {rabi}")));
        }
        Ok(DriveField { omega, rabi })
    }

    /// A field detuned by `delta` from ω32.
    pub fn detuned(transitions: &Transitions, delta: f64, rabi: f64) -> Result<Self> {
        Self::new(transitions.omega_32() + delta, rabi)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
    }
}

/// Output and excitation amplitudes for one incident frequency.
///
/// For down-conversion `t_a` is elastic and `t_b` converted; for
/// up-conversion the roles swap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScatteringResult {
    pub t_a: Complex64,
    pub t_b: Complex64,
    pub lambda_2: Complex64,
    pub lambda_3: Complex64,
}

impl ScatteringResult {
    pub fn abs2_ta(&self) -> f64 {
        self.t_a.norm_sqr()
    }

    pub fn abs2_tb(&self) -> f64 {
        self.t_b.norm_sqr()
    }

    /// Probability that the photon stays in the waveguide.
    pub fn total(&self) -> f64 {
        self.abs2_ta() + self.abs2_tb()
    }
}

/// Δ = ω − (ω31 − ω21).
pub fn detuning(drive: &DriveField, transitions: &Transitions) -> f64 {
    drive.omega - transitions.omega_32()
}

/// Amplitudes for an `a`-mode photon of frequency `nu` incident near ω31.
pub fn scatter_down(
    nu: f64,
    rates: &EmitterRates,
    transitions: &Transitions,
    drive: &DriveField,
) -> ScatteringResult {
    let x = nu - transitions.omega_31;
    let delta = detuning(drive, transitions);
    let rabi = drive.rabi;
    let r = rates;
    let a3 = I * x - 0.5 * (r.gamma_31 + r.loss_3);
    let a2 = I * (x - delta) - 0.5 * (r.gamma_21 + r.loss_2);
    let quarter_rabi2 = 0.25 * rabi * rabi;
    let den = a3 * a2 + quarter_rabi2;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let v31 = r.gamma_31.sqrt();

    ScatteringResult {
        t_a: ((I * x + 0.5 * (r.gamma_31 - r.loss_3)) * a2 + quarter_rabi2) / den,
        t_b: -0.5 * I * (r.gamma_21 * r.gamma_31).sqrt() * rabi / den,
        lambda_2: norm * (-0.5 * v31 * rabi) / den,
        lambda_3: norm * (-I * v31 * a2) / den,
    }
}

/// Amplitudes for a `b`-mode photon of frequency `nu` incident near ω21.
pub fn scatter_up(
    nu: f64,
    rates: &EmitterRates,
    transitions: &Transitions,
    drive: &DriveField,
) -> ScatteringResult {
    let y = nu - transitions.omega_21;
    let delta = detuning(drive, transitions);
    let rabi = drive.rabi;
    let r = rates;
    let b3 = I * (y + delta) - 0.5 * (r.gamma_31 + r.loss_3);
    let b2 = I * y - 0.5 * (r.gamma_21 + r.loss_2);
    let quarter_rabi2 = 0.25 * rabi * rabi;
    let den = b3 * b2 + quarter_rabi2;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let v21 = r.gamma_21.sqrt();

    ScatteringResult {
        t_a: -0.5 * I * (r.gamma_21 * r.gamma_31).sqrt() * rabi / den,
        t_b: (b3 * (I * y + 0.5 * (r.gamma_21 - r.loss_2)) + quarter_rabi2) / den,
        lambda_2: norm * (-I * v21 * b3) / den,
        lambda_3: norm * (-0.5 * v21 * rabi) / den,
    }
}

/// Drive settings that null the elastic output on resonance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OptimalDrive {
    pub detuning: f64,
    pub rabi: f64,
}

impl OptimalDrive {
    pub fn field(&self, transitions: &Transitions) -> Result<DriveField> {
        DriveField::detuned(transitions, self.detuning, self.rabi)
    }
}

/// Δ = 0, Ω = √((Γ31 − γ3)(Γ21 + γ2)).
pub fn optimal_drive_down(rates: &EmitterRates) -> Result<OptimalDrive> {
    if rates.gamma_31 <= rates.loss_3 {
        return Err(Error::InfeasibleDrive(format!(
            "down-conversion needs gamma_31 > loss_3 (gamma_31 = {:e}, loss_3 = {:e})",
            rates.gamma_31, rates.loss_3
        )));
    }
    Ok(OptimalDrive {
        detuning: 0.0,
        rabi: ((rates.gamma_31 - rates.loss_3) * (rates.gamma_21 + rates.loss_2)).sqrt(),
    })
}

/// Δ = 0, Ω = √((Γ31 + γ3)(Γ21 − γ2)).
pub fn optimal_drive_up(rates: &EmitterRates) -> Result<OptimalDrive> {
    if rates.gamma_21 <= rates.loss_2 {
        return Err(Error::InfeasibleDrive(format!(
            "up-conversion needs gamma_21 > loss_2 (gamma_21 = {:e}, loss_2 = {:e})",
            rates.gamma_21, rates.loss_2
        )));
    }
    Ok(OptimalDrive {
        detuning: 0.0,
        rabi: ((rates.gamma_31 + rates.loss_3) * (rates.gamma_21 - rates.loss_2)).sqrt(),
    })
}

/// |T_b(ω31)|² under the optimal down-conversion drive. Zero where that drive
/// does not exist (γ3 ≥ Γ31).
pub fn resonant_efficiency_down(rates: &EmitterRates) -> f64 {
    ((1.0 - rates.loss_3 / rates.gamma_31) / (1.0 + rates.loss_2 / rates.gamma_21)).max(0.0)
}

/// |T̃_a(ω21)|² under the optimal up-conversion drive. Zero where that drive
/// does not exist (γ2 ≥ Γ21).
pub fn resonant_efficiency_up(rates: &EmitterRates) -> f64 {
    ((1.0 - rates.loss_2 / rates.gamma_21) / (1.0 + rates.loss_3 / rates.gamma_31)).max(0.0)
}

/// Lossless elastic and converted probabilities under the lossless optimal
/// drive, as functions of the offset ν − ω31, total rate Γ and ratio η = Γ21/Γ31.
pub fn lossless_spectra(offset: f64, total: f64, eta: f64) -> (f64, f64) {
    let u = offset / total;
    let u2 = u * u;
    let e1 = eta * eta - 1.0;
    let ep = (eta + 1.0).powi(4);
    let shape = e1 * e1 * u2 + 4.0 * ep * u2 * u2;
    let den = eta * eta + shape;
    (shape / den, eta * eta / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::to_ghz;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn transitions() -> Transitions {
        Transitions::from_ghz(20.318, 17.033).unwrap()
    }

    #[test]
    fn detuning_examples() {
        let tr = transitions();
        let drive = DriveField::new(tr.omega_32(), 1.0).unwrap();
        assert_eq!(detuning(&drive, &tr), 0.0);

        let drive = DriveField::new(ghz(3.285), 1.0).unwrap();
        assert_abs_diff_eq!(to_ghz(detuning(&drive, &tr)), 0.0, epsilon = 1e-12);

        let drive = DriveField::new(ghz(3.385), 1.0).unwrap();
        assert_abs_diff_eq!(to_ghz(detuning(&drive, &tr)), 0.100, epsilon = 1e-12);
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(EmitterRates::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(EmitterRates::new(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(EmitterRates::new(1.0, 1.0, -1e-3, 0.0).is_err());
        assert!(EmitterRates::new(1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(Transitions::new(1.0, 2.0).is_err());
        assert!(Transitions::new(2.0, 0.0).is_err());
        assert!(DriveField::new(1.0, -0.5).is_err());
    }

    #[test]
    fn drive_off_is_full_reflection_with_pi_phase() {
        let tr = transitions();
        let rates = EmitterRates::from_ghz(0.118, 0.041, 0.0, 0.0).unwrap();
        let drive = DriveField::new(tr.omega_32(), 0.0).unwrap();

        let down = scatter_down(tr.omega_31(), &rates, &tr, &drive);
        assert_abs_diff_eq!(down.t_a.re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(down.t_a.im, 0.0, epsilon = 1e-14);
        assert_eq!(down.t_b, Complex64::new(0.0, 0.0));

        let up = scatter_up(tr.omega_21(), &rates, &tr, &drive);
        assert_abs_diff_eq!(up.t_b.re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(up.t_b.im, 0.0, epsilon = 1e-14);
        assert_eq!(up.t_a, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn optimal_lossless_drive_converts_completely() {
        let tr = transitions();
        let rates = EmitterRates::from_ghz(0.118, 0.041, 0.0, 0.0).unwrap();

        let drive = optimal_drive_down(&rates).unwrap().field(&tr).unwrap();
        assert_abs_diff_eq!(drive.rabi(), (rates.gamma_31() * rates.gamma_21()).sqrt(), epsilon = 1e-3);
        let r = scatter_down(tr.omega_31(), &rates, &tr, &drive);
        assert!(r.abs2_ta() < 1e-20);
        assert_abs_diff_eq!(r.abs2_tb(), 1.0, epsilon = 1e-12);

        let drive = optimal_drive_up(&rates).unwrap().field(&tr).unwrap();
        let r = scatter_up(tr.omega_21(), &rates, &tr, &drive);
        assert!(r.abs2_tb() < 1e-20);
        assert_abs_diff_eq!(r.abs2_ta(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn optimal_drive_arithmetic() {
        // Circuit rates at the down-conversion working point: Γ31, Γ21, γ2 = 0.001 Γ21, γ3 = 0.001 Γ31 + Γ32.
        let rates = EmitterRates::from_ghz(0.118, 0.041, 0.000041, 0.005118).unwrap();
        let down = optimal_drive_down(&rates).unwrap();
        assert_eq!(down.detuning, 0.0);
        assert_abs_diff_eq!(to_ghz(down.rabi), (0.112882f64 * 0.041041).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(to_ghz(down.rabi), 0.06807, epsilon = 1e-5);

        let up = optimal_drive_up(&rates).unwrap();
        assert_abs_diff_eq!(to_ghz(up.rabi), (0.123118f64 * 0.040959).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(to_ghz(up.rabi), 0.07101, epsilon = 5e-5);
    }

    #[test]
    fn infeasible_drives() {
        let r = EmitterRates::new(1.0, 2.0, 0.0, 1.0).unwrap();
        assert!(matches!(optimal_drive_down(&r), Err(Error::InfeasibleDrive(_))));
        let r = EmitterRates::new(1.0, 2.0, 2.0, 0.0).unwrap();
        assert!(matches!(optimal_drive_up(&r), Err(Error::InfeasibleDrive(_))));
    }

    #[test]
    fn resonant_efficiencies() {
        let lossless = EmitterRates::new(1.0, 0.3, 0.0, 0.0).unwrap();
        assert_eq!(resonant_efficiency_down(&lossless), 1.0);
        assert_eq!(resonant_efficiency_up(&lossless), 1.0);
        assert_eq!(resonant_efficiency_down(&EmitterRates::new(1.0, 0.3, 0.0, 1.0).unwrap()), 0.0);
        assert_eq!(resonant_efficiency_up(&EmitterRates::new(1.0, 0.3, 0.3, 0.0).unwrap()), 0.0);
    }

    #[test]
    fn resonant_efficiency_equals_scattered_probability() {
        let tr = transitions();
        let rates = EmitterRates::from_ghz(0.118, 0.041, 0.002, 0.006).unwrap();
        let drive = optimal_drive_down(&rates).unwrap().field(&tr).unwrap();
        let r = scatter_down(tr.omega_31(), &rates, &tr, &drive);
        assert!(r.abs2_ta() < 1e-20);
        assert_abs_diff_eq!(r.abs2_tb(), resonant_efficiency_down(&rates), epsilon = 1e-12);

        let drive = optimal_drive_up(&rates).unwrap().field(&tr).unwrap();
        let r = scatter_up(tr.omega_21(), &rates, &tr, &drive);
        assert!(r.abs2_tb() < 1e-20);
        assert_abs_diff_eq!(r.abs2_ta(), resonant_efficiency_up(&rates), epsilon = 1e-12);
    }

    #[test]
    fn lossless_spectra_resonance_and_closed_form() {
        for eta in [0.1, 0.5, 1.0, 3.0, 20.0] {
            assert_eq!(lossless_spectra(0.0, 1.0, eta), (0.0, 1.0));
        }
        let tr = transitions();
        let total = ghz(0.159);
        for eta in [0.2, 1.0, 7.5] {
            let rates = EmitterRates::from_total(total, eta).unwrap();
            let drive = optimal_drive_down(&rates).unwrap().field(&tr).unwrap();
            for k in -200..=200 {
                let offset = total * k as f64 / 40.0;
                let r = scatter_down(tr.omega_31() + offset, &rates, &tr, &drive);
                let (pa, pb) = lossless_spectra(offset, total, eta);
                assert_abs_diff_eq!(r.abs2_ta(), pa, epsilon = 1e-12);
                assert_abs_diff_eq!(r.abs2_tb(), pb, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn lossy_spectra_lose_probability_everywhere() {
        let tr = transitions();
        let rates = EmitterRates::from_ghz(0.118, 0.041, 0.001, 0.004).unwrap();
        let drive = optimal_drive_down(&rates).unwrap().field(&tr).unwrap();
        let total = rates.gamma_31() + rates.gamma_21();
        for k in -5000..5000 {
            let nu = tr.omega_31() + total * k as f64 / 100.0;
            assert!(scatter_down(nu, &rates, &tr, &drive).total() < 1.0);
        }
    }

    #[test]
    fn large_eta_gives_lorentzian_conversion() {
        let tr = transitions();
        for eta in [100.0, 400.0] {
            let rates = EmitterRates::from_total(ghz(1.0), eta).unwrap();
            let g31 = rates.gamma_31();
            let drive = optimal_drive_down(&rates).unwrap().field(&tr).unwrap();
            let worst = (-500..=500)
                .map(|k| {
                    let x = g31 * k as f64 / 500.0;
                    let r = scatter_down(tr.omega_31() + x, &rates, &tr, &drive);
                    (r.abs2_tb() - g31 * g31 / (g31 * g31 + x * x)).abs()
                })
                .fold(0.0, f64::max);
            assert!(worst <= 0.01, "eta {eta}: {worst}");
        }
    }

    proptest! {
        #[test]
        fn lossless_scattering_is_unitary(
            g31 in 0.01f64..1.0, g21 in 0.01f64..1.0,
            rabi in 0.0f64..2.0, delta in -0.5f64..0.5, offset in -20.0f64..20.0,
        ) {
            let tr = transitions();
            let rates = EmitterRates::from_ghz(g31, g21, 0.0, 0.0).unwrap();
            let drive = DriveField::detuned(&tr, ghz(delta), ghz(rabi)).unwrap();
            let down = scatter_down(tr.omega_31() + ghz(offset), &rates, &tr, &drive);
            prop_assert!((down.total() - 1.0).abs() < 1e-12);
            let up = scatter_up(tr.omega_21() + ghz(offset), &rates, &tr, &drive);
            prop_assert!((up.total() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn up_is_down_with_channels_exchanged(
            g31 in 0.01f64..1.0, g21 in 0.01f64..1.0, l2 in 0.0f64..0.05, l3 in 0.0f64..0.05,
            rabi in 0.0f64..2.0, delta in -0.5f64..0.5, offset in -3.0f64..3.0,
        ) {
            let tr = transitions();
            let rates = EmitterRates::from_ghz(g31, g21, l2, l3).unwrap();
            let drive = DriveField::detuned(&tr, ghz(delta), ghz(rabi)).unwrap();
            let mirrored_drive = DriveField::detuned(&tr, -ghz(delta), ghz(rabi)).unwrap();
            let up = scatter_up(tr.omega_21() + ghz(offset), &rates, &tr, &drive);
            let down = scatter_down(tr.omega_31() + ghz(offset), &rates.mirrored(), &tr, &mirrored_drive);
            prop_assert!((up.t_a - down.t_b).norm() < 1e-12);
            prop_assert!((up.t_b - down.t_a).norm() < 1e-12);
        }

        #[test]
        fn eta_reflection_symmetry(eta in 0.05f64..20.0, u in -3.0f64..3.0) {
            let (pa, pb) = lossless_spectra(u, 1.0, eta);
            let (qa, qb) = lossless_spectra(u, 1.0, 1.0 / eta);
            prop_assert!((pa - qa).abs() < 1e-12);
            prop_assert!((pb - qb).abs() < 1e-12);
        }
    }
}
