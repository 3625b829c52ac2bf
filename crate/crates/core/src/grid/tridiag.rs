use num_complex::Complex64;

use crate::{Error, Result};

/// Solve a tridiagonal system in place by the Thomas algorithm.
///
/// `sub[j]` multiplies `x[j-1]` in row `j` (`sub[0]` unused), `sup[j]`
/// multiplies `x[j+1]` (last entry unused). `scratch` must have length `n`.
/// No pivoting: the caller guarantees diagonal dominance.
pub fn solve_tridiagonal(
    sub: &[Complex64],
    diag: &[Complex64],
    sup: &[Complex64],
    rhs: &mut [Complex64],
    scratch: &mut [Complex64],
) -> Result<()> {
    let n = diag.len();
    let mut denom = diag[0];
    if !(denom.norm() > 0.0) {
        return Err(Error::LinearSolveFailure(0));
    }
    scratch[0] = sup[0] / denom;
    rhs[0] /= denom;
    for j in 1..n {
        denom = diag[j] - sub[j] * scratch[j - 1];
        if !(denom.norm() > 0.0) || !denom.is_finite() {
            return Err(Error::LinearSolveFailure(j));
        }
        if j + 1 < n {
            scratch[j] = sup[j] / denom;
        }
        let prev = rhs[j - 1];
        rhs[j] = (rhs[j] - sub[j] * prev) / denom;
    }
    for j in (0..n - 1).rev() {
        let next = rhs[j + 1];
        rhs[j] -= scratch[j] * next;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn solves_small_complex_system() {
        let c = |re, im| Complex64::new(re, im);
        let sub = [c(0.0, 0.0), c(1.0, 0.5), c(-0.5, 1.0)];
        let diag = [c(4.0, 1.0), c(5.0, -1.0), c(3.0, 2.0)];
        let sup = [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)];
        let x = [c(1.0, 2.0), c(-1.0, 0.5), c(0.25, -3.0)];
        let mut rhs = vec![
            diag[0] * x[0] + sup[0] * x[1],
            sub[1] * x[0] + diag[1] * x[1] + sup[1] * x[2],
            sub[2] * x[1] + diag[2] * x[2],
        ];
        let mut scratch = vec![c(0.0, 0.0); 3];
        solve_tridiagonal(&sub, &diag, &sup, &mut rhs, &mut scratch).unwrap();
        for (a, b) in rhs.iter().zip(&x) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let z = Complex64::new(0.0, 0.0);
        let mut rhs = vec![Complex64::new(1.0, 0.0); 2];
        let mut scratch = vec![z; 2];
        let r = solve_tridiagonal(&[z, z], &[z, Complex64::new(1.0, 0.0)], &[z, z], &mut rhs, &mut scratch);
        assert!(matches!(r, Err(Error::LinearSolveFailure(0))));
    }
}
