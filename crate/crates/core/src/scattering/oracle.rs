//! Numerical solution of the stationary scattering equations.
//!
//! Instead of the closed forms, these assemble the four linear equations
//! linking the two output amplitudes and the two excitation amplitudes and
//! solve them by LU decomposition. They serve as an independent check on
//! [`scatter_down`](super::scatter_down) and [`scatter_up`](super::scatter_up).
//!
//! The system is solved in units of Γ31 + Γ21 so that all coefficients are of
//! order one; Λ is rescaled back before returning.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DriveField, EmitterRates, ScatteringResult, Transitions};
use crate::error::{Error, Result};
use crate::linalg::lu_solve;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// Unknown ordering in the assembled system.
const TA: usize = 0;
const TB: usize = 1;
const L2: usize = 2;
const L3: usize = 3;

struct Scaled {
    scale: f64,
    v31: f64,
    v21: f64,
    half_rabi: f64,
    s: f64,
}

impl Scaled {
    fn new(rates: &EmitterRates, drive: &DriveField) -> Self {
        let scale = rates.gamma_31() + rates.gamma_21();
        Scaled {
            scale,
            v31: (rates.gamma_31() / scale).sqrt(),
            v21: (rates.gamma_21() / scale).sqrt(),
            half_rabi: 0.5 * drive.rabi() / scale,
            s: 1.0 / (2.0 * PI).sqrt(),
        }
    }

    fn finish(&self, x: DVector<Complex64>) -> ScatteringResult {
        let back = 1.0 / self.scale.sqrt();
        ScatteringResult {
            t_a: x[TA],
            t_b: x[TB],
            lambda_2: x[L2] * back,
            lambda_3: x[L3] * back,
        }
    }
}

/// `a`-mode photon at `nu`; level |2⟩ oscillates at ν − ω, level |3⟩ at ν.
pub fn solve_oracle_down(
    nu: f64,
    rates: &EmitterRates,
    transitions: &Transitions,
    drive: &DriveField,
) -> Result<ScatteringResult> {
    let k = Scaled::new(rates, drive);
    let nu_b = nu - drive.omega();
    let e2 = Complex64::new(transitions.omega_21() - nu_b, -0.5 * rates.loss_2()) / k.scale;
    let e3 = Complex64::new(transitions.omega_31() - nu, -0.5 * rates.loss_3()) / k.scale;

    let mut m = DMatrix::from_element(4, 4, ZERO);
    let mut b = DVector::from_element(4, ZERO);
    // Field jump across the emitter on the a mode: −i s (T_a − 1) − V31 Λ3 = 0.
    m[(0, TA)] = -I * k.s;
    m[(0, L3)] = (-k.v31).into();
    b[0] = -I * k.s;
    // b mode starts empty: −i s T_b − V21 Λ2 = 0.
    m[(1, TB)] = -I * k.s;
    m[(1, L2)] = (-k.v21).into();
    // Level |2⟩: −V21 s T_b / 2 + (ω21 − ν' − iγ2/2) Λ2 − Ω Λ3 / 2 = 0.
    m[(2, TB)] = (-0.5 * k.v21 * k.s).into();
    m[(2, L2)] = e2;
    m[(2, L3)] = (-k.half_rabi).into();
    // Level |3⟩: −V31 s (T_a + 1) / 2 + (ω31 − ν − iγ3/2) Λ3 − Ω Λ2 / 2 = 0.
    m[(3, TA)] = (-0.5 * k.v31 * k.s).into();
    m[(3, L3)] = e3;
    m[(3, L2)] = (-k.half_rabi).into();
    b[3] = (0.5 * k.v31 * k.s).into();

    let x = lu_solve(m, &b).map_err(|pivot_ratio| Error::SingularSystem {
        what: "down-conversion scattering",
        pivot_ratio,
    })?;
    Ok(k.finish(x))
}

/// `b`-mode photon at `nu`; level |2⟩ oscillates at ν, level |3⟩ at ν + ω.
pub fn solve_oracle_up(
    nu: f64,
    rates: &EmitterRates,
    transitions: &Transitions,
    drive: &DriveField,
) -> Result<ScatteringResult> {
    let k = Scaled::new(rates, drive);
    let nu_a = nu + drive.omega();
    let e2 = Complex64::new(transitions.omega_21() - nu, -0.5 * rates.loss_2()) / k.scale;
    let e3 = Complex64::new(transitions.omega_31() - nu_a, -0.5 * rates.loss_3()) / k.scale;

    let mut m = DMatrix::from_element(4, 4, ZERO);
    let mut b = DVector::from_element(4, ZERO);
    m[(0, TB)] = -I * k.s;
    m[(0, L2)] = (-k.v21).into();
    b[0] = -I * k.s;
    m[(1, TA)] = -I * k.s;
    m[(1, L3)] = (-k.v31).into();
    m[(2, TB)] = (-0.5 * k.v21 * k.s).into();
    m[(2, L2)] = e2;
    m[(2, L3)] = (-k.half_rabi).into();
    b[2] = (0.5 * k.v21 * k.s).into();
    m[(3, TA)] = (-0.5 * k.v31 * k.s).into();
    m[(3, L3)] = e3;
    m[(3, L2)] = (-k.half_rabi).into();

    let x = lu_solve(m, &b).map_err(|pivot_ratio| Error::SingularSystem {
        what: "up-conversion scattering",
        pivot_ratio,
    })?;
    Ok(k.finish(x))
}
