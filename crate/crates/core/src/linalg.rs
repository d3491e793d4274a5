use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Pivot ratios below this mark a system as numerically singular.
pub(crate) const SINGULAR_PIVOT_RATIO: f64 = 1e-13;

/// LU solve with partial pivoting. Returns the solution and the ratio of the
/// smallest to the largest pivot magnitude, or `Err(ratio)` when that ratio
/// is below [`SINGULAR_PIVOT_RATIO`].
pub(crate) fn lu_solve(
    m: DMatrix<Complex64>,
    b: &DVector<Complex64>,
) -> Result<DVector<Complex64>, f64> {
    let lu = m.lu();
    let u = lu.u();
    let (lo, hi) = u
        .diagonal()
        .iter()
        .map(|p| p.norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if !(ratio >= SINGULAR_PIVOT_RATIO) {
        return Err(ratio);
    }
    lu.solve(b).ok_or(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_and_flags_singular() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let m = DMatrix::from_row_slice(2, 2, &[c(2.0), c(1.0), c(1.0), c(3.0)]);
        let x = lu_solve(m, &DVector::from_vec(vec![c(3.0), c(4.0)])).unwrap();
        assert!((x[0] - c(1.0)).norm() < 1e-15 && (x[1] - c(1.0)).norm() < 1e-15);

        let m = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        assert!(lu_solve(m, &DVector::from_vec(vec![c(1.0), c(1.0)])).is_err());
    }
}
