//! Driven three-level emitter beyond the single-photon limit.
//!
//! A weak coherent probe of Rabi frequency Ω_p on 1↔3 and the control field Ω on
//! 2↔3 drive the emitter; the steady state of the master equation gives the
//! coherences ρ31 and ρ21, and from them the reflected and converted
//! transmission coefficients. For Ω_p → 0 this reproduces the single-photon
//! closed forms of [`crate::scattering`].
//!
//! Relaxation moves population 3→1 (Γ31), 3→2 (Γ32) and 2→1 (Γ21); each
//! coherence ρ_ij is damped at γ_ij, which also includes a pure dephasing
//! γ^φ_ij.

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::lu_solve;
use crate::scattering::EmitterRates;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

type Liouvillian = SMatrix<Complex64, 9, 9>;

/// Probe and control settings in the frame rotating with both fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeDrive {
    omega_p: f64,
    delta_p: f64,
    delta: f64,
    omega: f64,
}

impl ProbeDrive {
    /// `delta_p` = ν − ω31 is the probe detuning, `delta` the control detuning.
    pub fn new(omega_p: f64, delta_p: f64, delta: f64, omega: f64) -> Result<Self> {
        if !(omega_p >= 0.0) || !omega_p.is_finite() {
            return Err(Error::invalid("omega_p", format!("must be finite and >= 0, got {omega_p}")));
        }
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::invalid("omega", format!("must be finite and >= 0, got {omega}")));
        }
        if !delta_p.is_finite() || !delta.is_finite() {
            return Err(Error::invalid("delta_p", "detunings must be finite"));
        }
        Ok(ProbeDrive {
            omega_p,
            delta_p,
            delta,
            omega,
        })
    }

    pub fn omega_p(&self) -> f64 {
        self.omega_p
    }

    pub fn delta_p(&self) -> f64 {
        self.delta_p
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// Relaxation and pure-dephasing rates, rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LindbladRates {
    gamma_31: f64,
    gamma_32: f64,
    gamma_21: f64,
    dephasing_12: f64,
    dephasing_13: f64,
    dephasing_23: f64,
}

impl LindbladRates {
    pub fn new(
        gamma_31: f64,
        gamma_32: f64,
        gamma_21: f64,
        dephasing_12: f64,
        dephasing_13: f64,
        dephasing_23: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("gamma_31", gamma_31),
            ("gamma_32", gamma_32),
            ("gamma_21", gamma_21),
            ("dephasing_12", dephasing_12),
            ("dephasing_13", dephasing_13),
            ("dephasing_23", dephasing_23),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(LindbladRates {
            gamma_31,
            gamma_32,
            gamma_21,
            dephasing_12,
            dephasing_13,
            dephasing_23,
        })
    }

    /// Rates equivalent to the single-photon loss model.
    ///
    /// The loss γ3 of the scattering picture already contains the 3→2 emission
    /// Γ32, so only the remainder γ3 − Γ32 is dephasing of ρ13; with that choice
    /// γ13 = (Γ31 + γ3)/2 and γ12 = (Γ21 + γ2)/2 match the single-photon line
    /// widths. The 2↔3 coherence takes the sum of both dephasings.
    pub fn from_emitter(rates: &EmitterRates, gamma_32: f64) -> Result<Self> {
        let extra_3 = rates.loss_3() - gamma_32;
        if extra_3 < -1e-12 * rates.loss_3().max(gamma_32) {
            return Err(Error::invalid(
                "gamma_32",
                format!(
                    "exceeds the total loss out of |3> ({gamma_32:e} > {:e})",
                    rates.loss_3()
                ),
            ));
        }
        let extra_3 = extra_3.max(0.0);
        Self::new(
            rates.gamma_31(),
            gamma_32,
            rates.gamma_21(),
            rates.loss_2(),
            extra_3,
            rates.loss_2() + extra_3,
        )
    }

    pub fn gamma_31(&self) -> f64 {
        self.gamma_31
    }

    pub fn gamma_32(&self) -> f64 {
        self.gamma_32
    }

    pub fn gamma_21(&self) -> f64 {
        self.gamma_21
    }

    pub fn damping_12(&self) -> f64 {
        0.5 * self.gamma_21 + 0.5 * self.dephasing_12
    }

    pub fn damping_13(&self) -> f64 {
        0.5 * (self.gamma_31 + self.gamma_32) + 0.5 * self.dephasing_13
    }

    pub fn damping_23(&self) -> f64 {
        0.5 * (self.gamma_31 + self.gamma_32 + self.gamma_21) + 0.5 * self.dephasing_23
    }

    fn total_relaxation(&self) -> f64 {
        self.gamma_31 + self.gamma_32 + self.gamma_21
    }

    fn damping(&self) -> Matrix3<f64> {
        let (a, b, c) = (self.damping_12(), self.damping_13(), self.damping_23());
        Matrix3::new(0.0, a, b, a, 0.0, c, b, c, 0.0)
    }
}

/// Result of checking a density matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sanity {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Sanity {
    pub const HERMITICITY: f64 = 1e-12;
    pub const TRACE: f64 = 1e-12;
    pub const POSITIVITY: f64 = -1e-10;

    pub fn is_physical(&self) -> bool {
        self.hermiticity <= Self::HERMITICITY
            && self.trace_error <= Self::TRACE
            && self.min_eigenvalue >= Self::POSITIVITY
    }
}

/// 3×3 density matrix, index 0 ↔ |1⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix3 {
    rho: Matrix3<Complex64>,
}

impl DensityMatrix3 {
    pub fn ground() -> Self {
        let mut rho = Matrix3::zeros();
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        DensityMatrix3 { rho }
    }

    pub fn from_matrix(rho: Matrix3<Complex64>) -> Self {
        DensityMatrix3 { rho }
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.rho
    }

    /// Element ⟨i|ρ|j⟩ with 1-based level labels.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        self.rho[(i - 1, j - 1)]
    }

    pub fn sanity(&self) -> Sanity {
        let herm = (self.rho - self.rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let trace = (self.rho.trace() - Complex64::new(1.0, 0.0)).norm();
        let sym = (self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = SymmetricEigen::new(sym).eigenvalues.min();
        Sanity {
            hermiticity: herm,
            trace_error: trace,
            min_eigenvalue: min_eig,
        }
    }
}

/// H/ħ = −Δ_p|3⟩⟨3| − (Δ_p − Δ)|2⟩⟨2| − ½(Ω_p|3⟩⟨1| + Ω|3⟩⟨2| + h.c.).
pub fn interaction_hamiltonian(drive: &ProbeDrive) -> Matrix3<Complex64> {
    let mut h = Matrix3::zeros();
    h[(2, 2)] = (-drive.delta_p).into();
    h[(1, 1)] = (-(drive.delta_p - drive.delta)).into();
    h[(2, 0)] = (-0.5 * drive.omega_p).into();
    h[(0, 2)] = (-0.5 * drive.omega_p).into();
    h[(2, 1)] = (-0.5 * drive.omega).into();
    h[(1, 2)] = (-0.5 * drive.omega).into();
    h
}

fn apply(h: &Matrix3<Complex64>, rates: &LindbladRates, damping: &Matrix3<f64>, rho: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    let mut d = (h * rho - rho * h) * (-I);
    let r = rates;
    d[(0, 0)] += r.gamma_31 * rho[(2, 2)] + r.gamma_21 * rho[(1, 1)];
    d[(1, 1)] += r.gamma_32 * rho[(2, 2)] - r.gamma_21 * rho[(1, 1)];
    d[(2, 2)] -= (r.gamma_31 + r.gamma_32) * rho[(2, 2)];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                d[(i, j)] -= damping[(i, j)] * rho[(i, j)];
            }
        }
    }
    d
}

/// Superoperator on row-major vec(ρ), in units of `scale`.
fn liouvillian(drive: &ProbeDrive, rates: &LindbladRates, scale: f64) -> Liouvillian {
    let h = interaction_hamiltonian(drive);
    let damping = rates.damping();
    let mut l = Liouvillian::zeros();
    for k in 0..9 {
        let mut e = Matrix3::zeros();
        e[(k / 3, k % 3)] = Complex64::new(1.0, 0.0);
        let col = apply(&h, rates, &damping, &e);
        for m in 0..9 {
            l[(m, k)] = col[(m / 3, m % 3)] / scale;
        }
    }
    l
}

fn vec_of(rho: &Matrix3<Complex64>) -> SMatrix<Complex64, 9, 1> {
    SMatrix::<Complex64, 9, 1>::from_fn(|m, _| rho[(m / 3, m % 3)])
}

fn mat_of(v: &SMatrix<Complex64, 9, 1>) -> Matrix3<Complex64> {
    Matrix3::from_fn(|i, j| v[3 * i + j])
}

/// ‖L[ρ]‖ (Frobenius) in units of Γ31 + Γ32 + Γ21.
pub fn liouvillian_residual(drive: &ProbeDrive, rates: &LindbladRates, rho: &DensityMatrix3) -> f64 {
    let scale = rates.total_relaxation();
    (liouvillian(drive, rates, scale) * vec_of(&rho.rho)).norm()
}

/// ρ with L[ρ] = 0 and Tr ρ = 1, by a direct linear solve.
pub fn steady_state(drive: &ProbeDrive, rates: &LindbladRates) -> Result<DensityMatrix3> {
    let scale = rates.total_relaxation();
    if !(scale > 0.0) {
        return Err(Error::SingularLiouvillian(0.0));
    }
    let l = liouvillian(drive, rates, scale);
    let mut m = DMatrix::from_fn(9, 9, |i, j| l[(i, j)]);
    // The ρ11 equation is implied by the other two populations; trade it for the trace.
    for k in 0..9 {
        m[(0, k)] = if k % 4 == 0 { Complex64::new(1.0, 0.0) } else { ZERO };
    }
    let mut b = DVector::from_element(9, ZERO);
    b[0] = Complex64::new(1.0, 0.0);
    let x = lu_solve(m, &b).map_err(Error::SingularLiouvillian)?;
    let v = SMatrix::<Complex64, 9, 1>::from_fn(|i, _| x[i]);
    Ok(DensityMatrix3 { rho: mat_of(&v) })
}

/// (T_a, T_b) = (1 + 2iΓ31ρ31/Ω_p, 2i√(Γ31Γ21) ρ21/Ω_p).
pub fn transmission(drive: &ProbeDrive, rates: &LindbladRates, rho: &DensityMatrix3) -> Result<(Complex64, Complex64)> {
    if !(drive.omega_p > 0.0) {
        return Err(Error::ZeroProbe);
    }
    Ok(coefficients(drive, rates, rho.element(2, 1), rho.element(3, 1)))
}

fn coefficients(drive: &ProbeDrive, rates: &LindbladRates, rho21: Complex64, rho31: Complex64) -> (Complex64, Complex64) {
    let t_a = 1.0 + 2.0 * I * rates.gamma_31 * rho31 / drive.omega_p;
    let t_b = 2.0 * I * (rates.gamma_31 * rates.gamma_21).sqrt() * rho21 / drive.omega_p;
    (t_a, t_b)
}

/// Transmission of a vanishingly weak probe, from [`weak_field_coherences`].
pub fn weak_field_transmission(drive: &ProbeDrive, rates: &LindbladRates) -> Result<(Complex64, Complex64)> {
    let (rho21, rho31) = weak_field_coherences(drive, rates)?;
    Ok(coefficients(drive, rates, rho21, rho31))
}

/// (ρ21, ρ31) to first order in Ω_p with the ground state fully populated.
pub fn weak_field_coherences(drive: &ProbeDrive, rates: &LindbladRates) -> Result<(Complex64, Complex64)> {
    if !(drive.omega_p > 0.0) {
        return Err(Error::ZeroProbe);
    }
    let a = I * drive.delta_p - rates.damping_13();
    let c = I * (drive.delta_p - drive.delta) - rates.damping_12();
    let den = a * c + 0.25 * drive.omega * drive.omega;
    let rho31 = -0.5 * I * drive.omega_p * c / den;
    let rho21 = Complex64::new(-0.25 * drive.omega * drive.omega_p, 0.0) / den;
    Ok((rho21, rho31))
}

/// One point of a probe-power sweep at Δ_p = 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SaturationRow {
    pub omega_p_over_g31: f64,
    pub abs2_ta: f64,
    pub abs2_tb: f64,
    pub sum: f64,
    pub sanity: Sanity,
    pub residual: f64,
}

impl SaturationRow {
    pub const COLUMNS: [&'static str; 4] = ["omega_p_over_g31", "abs2_ta", "abs2_tb", "sum"];
}

/// Steady-state transmission at probe and control detunings `delta_p`, `delta`.
pub fn probe_response(rates: &LindbladRates, drive: &ProbeDrive) -> Result<SaturationRow> {
    let rho = steady_state(drive, rates)?;
    let (t_a, t_b) = transmission(drive, rates, &rho)?;
    Ok(SaturationRow {
        omega_p_over_g31: drive.omega_p / rates.gamma_31,
        abs2_ta: t_a.norm_sqr(),
        abs2_tb: t_b.norm_sqr(),
        sum: t_a.norm_sqr() + t_b.norm_sqr(),
        sanity: rho.sanity(),
        residual: liouvillian_residual(drive, rates, &rho),
    })
}

/// Resonant transmission for each probe strength Ω_p/Γ31 in `grid`, in grid order.
pub fn saturation_sweep(rates: &LindbladRates, omega: f64, grid: &[f64]) -> Vec<Result<SaturationRow>> {
    grid.par_iter()
        .map(|&x| {
            if !(x > 0.0) {
                return Err(Error::InvalidGrid(format!("probe strength must be positive, got {x}")));
            }
            let drive = ProbeDrive::new(x * rates.gamma_31, 0.0, 0.0, omega)?;
            probe_response(rates, &drive)
        })
        .collect()
}

/// Mean photon number of a coherent drive: N = πΩ²/(2Γ²) for Rabi frequency Ω
/// on a transition decaying at Γ.
pub fn photon_number(rabi: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::invalid("gamma", format!("must be positive, got {gamma}")));
    }
    Ok(std::f64::consts::PI * rabi * rabi / (2.0 * gamma * gamma))
}

/// Integrates the master equation from the ground state with RK4 until ρ
/// changes by less than `tolerance` (relative) over one interval 1/Γ31.
/// A slow cross-check for [`steady_state`].
pub fn evolve_to_steady(
    drive: &ProbeDrive,
    rates: &LindbladRates,
    steps_per_interval: usize,
    tolerance: f64,
    max_intervals: usize,
) -> Result<DensityMatrix3> {
    let scale = rates.total_relaxation();
    if !(scale > 0.0) || !(rates.gamma_31 > 0.0) {
        return Err(Error::SingularLiouvillian(0.0));
    }
    if steps_per_interval == 0 {
        return Err(Error::invalid("steps_per_interval", "must be positive"));
    }
    let l = liouvillian(drive, rates, scale);
    // Time in units of 1/scale.
    let interval = scale / rates.gamma_31;
    let dt = interval / steps_per_interval as f64;
    let mut v = vec_of(&DensityMatrix3::ground().rho);
    let mut change = f64::INFINITY;
    for _ in 0..max_intervals {
        let before = v;
        for _ in 0..steps_per_interval {
            let k1 = l * v;
            let k2 = l * (v + k1 * Complex64::new(0.5 * dt, 0.0));
            let k3 = l * (v + k2 * Complex64::new(0.5 * dt, 0.0));
            let k4 = l * (v + k3 * Complex64::new(dt, 0.0));
            let two = Complex64::new(2.0, 0.0);
            v += (k1 + k2 * two + k3 * two + k4) * Complex64::new(dt / 6.0, 0.0);
        }
        change = (v - before).norm() / v.norm();
        if change < tolerance {
            return Ok(DensityMatrix3 { rho: mat_of(&v) });
        }
    }
    Err(Error::NotSettled {
        time: max_intervals as f64 / rates.gamma_31,
        change,
    })
}
