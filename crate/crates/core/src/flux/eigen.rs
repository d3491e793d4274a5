//! Lowest eigenpairs of the sparse circuit Hamiltonian.
//!
//! `davidson` is a block Davidson iteration with a diagonal preconditioner; it
//! touches the matrix only through sparse products and is the default.
//! `dense` expands the matrix and runs a full Hermitian eigendecomposition,
//! which is exact but scales as the cube of the basis size.

use std::fmt::Debug;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::hamiltonian::SparseHermitian;
use crate::error::{Error, Result};
use crate::registry::Registry;

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
    /// Largest residual norm ‖H v − λ v‖ among the returned pairs.
    pub residual: f64,
    pub iterations: usize,
}

pub trait Eigensolver: Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn lowest(&self, h: &SparseHermitian, count: usize) -> Result<Eigenpairs>;
}

fn residual_norm(h: &SparseHermitian, values: &[f64], vectors: &DMatrix<Complex64>) -> f64 {
    let hv = h.mul(vectors);
    (0..values.len())
        .map(|k| (hv.column(k) - vectors.column(k) * Complex64::new(values[k], 0.0)).norm())
        .fold(0.0, f64::max)
}

/// Eigendecomposition of a small Hermitian matrix, ascending.
fn sorted_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    (values, vectors)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DenseEigensolver;

impl Eigensolver for DenseEigensolver {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn lowest(&self, h: &SparseHermitian, count: usize) -> Result<Eigenpairs> {
        let (values, vectors) = sorted_eigen(h.to_dense());
        let values: Vec<f64> = values.into_iter().take(count).collect();
        let vectors = vectors.columns(0, count).into_owned();
        let residual = residual_norm(h, &values, &vectors);
        Ok(Eigenpairs {
            values,
            vectors,
            residual,
            iterations: 1,
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Davidson {
    /// Converged when every wanted residual norm is below this (matrix units).
    pub tolerance: f64,
    pub block: usize,
    pub max_subspace: usize,
    pub max_iterations: usize,
}

impl Default for Davidson {
    fn default() -> Self {
        Davidson {
            tolerance: 1e-11,
            block: 4,
            max_subspace: 24,
            max_iterations: 2000,
        }
    }
}

const DROP_NORM: f64 = 1e-10;
const MIN_DENOMINATOR: f64 = 1e-8;

/// Search space of a Davidson run: orthonormal columns `v[.., ..len]`, their
/// images `hv` and the projected matrix `proj = V† H V`.
struct Subspace {
    v: DMatrix<Complex64>,
    hv: DMatrix<Complex64>,
    proj: DMatrix<Complex64>,
    len: usize,
}

impl Subspace {
    fn new(dim: usize, capacity: usize) -> Self {
        Subspace {
            v: DMatrix::zeros(dim, capacity),
            hv: DMatrix::zeros(dim, capacity),
            proj: DMatrix::zeros(capacity, capacity),
            len: 0,
        }
    }

    /// Orthonormalizes each candidate against the current columns (two passes
    /// of classical Gram–Schmidt) and appends the survivors. Returns how many
    /// were added.
    fn extend(&mut self, h: &SparseHermitian, candidates: Vec<DVector<Complex64>>) -> usize {
        let start = self.len;
        for mut t in candidates {
            if self.len == self.v.ncols() {
                break;
            }
            let before = t.norm();
            if before == 0.0 {
                continue;
            }
            for _ in 0..2 {
                let basis = self.v.columns(0, self.len);
                let c = basis.ad_mul(&t);
                t -= basis * c;
            }
            let n = t.norm();
            if n > DROP_NORM * before {
                self.v.set_column(self.len, &t.unscale(n));
                self.len += 1;
            }
        }
        if self.len > start {
            let fresh = self.v.columns(start, self.len - start).into_owned();
            let image = h.mul(&fresh);
            self.hv.columns_mut(start, self.len - start).copy_from(&image);
            let block = self.v.columns(0, self.len).ad_mul(&image);
            for j in 0..self.len - start {
                for i in 0..self.len {
                    let x = block[(i, j)];
                    self.proj[(i, start + j)] = x;
                    self.proj[(start + j, i)] = x.conj();
                }
            }
        }
        self.len - start
    }

    /// Replaces the space by the given Ritz vectors.
    fn restart(&mut self, ritz: &DMatrix<Complex64>, h_ritz: &DMatrix<Complex64>) {
        let k = ritz.ncols();
        self.v.columns_mut(0, k).copy_from(ritz);
        self.hv.columns_mut(0, k).copy_from(h_ritz);
        let small = ritz.ad_mul(h_ritz);
        self.proj.fill(Complex64::new(0.0, 0.0));
        for i in 0..k {
            for j in 0..k {
                self.proj[(i, j)] = 0.5 * (small[(i, j)] + small[(j, i)].conj());
            }
        }
        self.len = k;
    }
}

impl Eigensolver for Davidson {
    fn name(&self) -> &'static str {
        "davidson"
    }

    fn lowest(&self, h: &SparseHermitian, count: usize) -> Result<Eigenpairs> {
        let dim = h.dim();
        let block = self.block.max(count).min(dim);
        if dim <= self.max_subspace.max(2 * block) {
            return DenseEigensolver.lowest(h, count);
        }
        let capacity = self.max_subspace.max(2 * block);
        let diag = h.diagonal();

        let mut start: Vec<usize> = (0..dim).collect();
        start.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
        let mut space = Subspace::new(dim, capacity);
        space.extend(
            h,
            start[..block]
                .iter()
                .map(|&k| {
                    let mut e = DVector::zeros(dim);
                    e[k] = Complex64::new(1.0, 0.0);
                    e
                })
                .collect(),
        );
        let mut worst = f64::INFINITY;
        let mut iterations = 0;

        for iteration in 1..=self.max_iterations {
            iterations = iteration;
            let m = space.len;
            let (theta, y) = sorted_eigen(space.proj.view((0, 0), (m, m)).into_owned());
            let y_block = y.columns(0, block);
            let ritz = space.v.columns(0, m) * y_block;
            let h_ritz = space.hv.columns(0, m) * y_block;
            let residuals: Vec<DVector<Complex64>> = (0..block)
                .map(|k| h_ritz.column(k) - ritz.column(k) * Complex64::new(theta[k], 0.0))
                .collect();
            let norms: Vec<f64> = residuals.iter().map(|r| r.norm()).collect();
            worst = norms[..count].iter().copied().fold(0.0, f64::max);
            if worst < self.tolerance {
                return Ok(Eigenpairs {
                    values: theta[..count].to_vec(),
                    vectors: ritz.columns(0, count).into_owned(),
                    residual: worst,
                    iterations: iteration,
                });
            }

            let corrections: Vec<DVector<Complex64>> = residuals
                .iter()
                .zip(&norms)
                .zip(&theta)
                .filter(|((_, &n), _)| n >= self.tolerance)
                .map(|((r, _), &t)| {
                    DVector::from_fn(dim, |i, _| {
                        let mut den = t - diag[i];
                        if den.abs() < MIN_DENOMINATOR {
                            den = MIN_DENOMINATOR.copysign(den);
                        }
                        r[i] / den
                    })
                })
                .collect();

            if space.len + corrections.len() > capacity {
                space.restart(&ritz, &h_ritz);
            }
            if space.extend(h, corrections) == 0 {
                break;
            }
        }
        Err(Error::EigenNotConverged {
            solver: "davidson",
            iterations,
            residual: worst,
        })
    }
}

/// Eigensolvers by name: `davidson` (default) and `dense`.
pub fn eigensolvers() -> &'static Registry<dyn Eigensolver> {
    static REGISTRY: OnceLock<Registry<dyn Eigensolver>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut reg: Registry<dyn Eigensolver> = Registry::new("eigensolver");
        reg.register("davidson", Box::new(Davidson::default()))
            .register("dense", Box::new(DenseEigensolver));
        reg
    })
}

pub fn eigensolver(name: &str) -> Result<&'static dyn Eigensolver> {
    eigensolvers().get(name)
}

pub const DEFAULT_EIGENSOLVER: &str = "davidson";
