//! Charge-basis Hamiltonian of the three-junction loop, in units of E_J.
//!
//! The two junction phases in series are rotated to δ_p, δ_m with conjugate
//! Cooper-pair numbers n_p = n1 + n2 and n_m = n1 − n2. Only pairs with n_p + n_m
//! even are physical, and every term below preserves that parity, so the basis
//! is restricted to that sector. Including the odd sector would duplicate
//! levels.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{ChargeTruncation, CircuitParams};

/// Hermitian matrix stored by rows (column index, value).
#[derive(Clone, Debug)]
pub struct SparseHermitian {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseHermitian {
    fn from_rows(rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        let dim = rows.len();
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_start.push(cols.len());
        }
        SparseHermitian {
            dim,
            row_start,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.row_start[i]..self.row_start[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.row(i).find(|e| e.0 == j).map_or(Complex64::new(0.0, 0.0), |e| e.1)
    }

    pub fn diagonal(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim, (0..self.dim).map(|i| self.get(i, i).re))
    }

    /// Largest |H_ij − conj(H_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `H · x` for every column of `x`.
    pub fn mul(&self, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.dim, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            for i in 0..self.dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in self.row(i) {
                    acc += v * xc[j];
                }
                out[(i, c)] = acc;
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Charge basis states (n_p, n_m) in storage order.
pub fn basis(trunc: &ChargeTruncation) -> Vec<(i32, i32)> {
    let (np, nm) = (trunc.n_p_max() as i32, trunc.n_m_max() as i32);
    (-np..=np)
        .flat_map(|p| (-nm..=nm).map(move |m| (p, m)))
        .filter(|(p, m)| (p + m).rem_euclid(2) == 0)
        .collect()
}

/// The Hamiltonian divided by E_J, together with the diagonal of n̂_m.
pub fn build_hamiltonian(params: &CircuitParams, trunc: &ChargeTruncation) -> (SparseHermitian, Vec<f64>) {
    let states = basis(trunc);
    let (np, nm) = (trunc.n_p_max() as i32, trunc.n_m_max() as i32);
    let index = |p: i32, m: i32| -> Option<usize> {
        if p.abs() > np || m.abs() > nm || (p + m).rem_euclid(2) != 0 {
            return None;
        }
        // The grid width 2·n_m_max + 1 is odd, so the flat index has the parity of
        // p + m + n_p_max + n_m_max and the kept states sit at every second slot.
        let flat = ((p + np) * (2 * nm + 1) + (m + nm)) as usize;
        Some((flat - ((np + nm) % 2) as usize) / 2)
    };
    debug_assert!(states
        .iter()
        .enumerate()
        .all(|(k, &(p, m))| index(p, m) == Some(k)));

    let ec = 1.0 / params.ej_over_ec();
    let alpha = params.alpha();
    let kin_p = 2.0 * ec;
    let kin_m = 2.0 * ec / (1.0 + 2.0 * alpha + 2.0 * params.beta());
    let offset = 2.0 + alpha;
    let phase = Complex64::from_polar(1.0, 2.0 * PI * params.flux());
    let half = Complex64::new(-0.5, 0.0);
    let loop_up = -0.5 * alpha * phase.conj();
    let loop_down = -0.5 * alpha * phase;

    let rows = states
        .iter()
        .map(|&(p, m)| {
            let mut row = Vec::with_capacity(7);
            let diag = kin_p * (p * p) as f64 + kin_m * (m * m) as f64 + offset;
            row.push((index(p, m).unwrap(), Complex64::new(diag, 0.0)));
            // cos δ_p cos δ_m
            for dp in [-1, 1] {
                for dm in [-1, 1] {
                    if let Some(j) = index(p + dp, m + dm) {
                        row.push((j, half));
                    }
                }
            }
            // cos(2δ_m + 2πf): ⟨m+2|H|m⟩ carries e^{−i2πf}; this row holds ⟨m|H|m∓2⟩.
            if let Some(j) = index(p, m - 2) {
                row.push((j, loop_up));
            }
            if let Some(j) = index(p, m + 2) {
                row.push((j, loop_down));
            }
            row
        })
        .collect();
    let charge_m = states.iter().map(|&(_, m)| m as f64).collect();
    (SparseHermitian::from_rows(rows), charge_m)
}
