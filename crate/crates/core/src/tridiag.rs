//! Symmetric tridiagonal eigenvalues by Sturm-count bisection.

use crate::error::{Error, Result};

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..diag.len() {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i < off.len() { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// `k`-th smallest eigenvalue (0-based), bisected to `tol` absolute or to
/// rounding resolution, whichever is coarser.
pub fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize, tol: f64) -> Result<f64> {
    assert_eq!(off.len() + 1, diag.len(), "off-diagonal length");
    assert!(k < diag.len());
    let (mut lo, mut hi) = gershgorin(diag, off);
    let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    lo -= pad;
    hi += pad;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        let resolution = tol.max(4.0 * f64::EPSILON * mid.abs());
        if hi - lo <= resolution || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NonConvergedBisection)
}

pub fn smallest_eigenvalue(diag: &[f64], off: &[f64], tol: f64) -> Result<f64> {
    kth_eigenvalue(diag, off, 0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn discrete_laplacian() {
        let n = 50;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        for k in 0..3 {
            let exact = 2.0 - 2.0 * (PI * (k + 1) as f64 / (n + 1) as f64).cos();
            let got = kth_eigenvalue(&diag, &off, k, 1e-14).unwrap();
            assert!((got - exact).abs() < 1e-13, "{k}: {got} vs {exact}");
        }
    }

    #[test]
    fn counts_and_bounds() {
        let diag = [1.0, 5.0, 9.0];
        let off = [0.0, 0.0];
        assert_eq!(sturm_count(&diag, &off, 0.0), 0);
        assert_eq!(sturm_count(&diag, &off, 6.0), 2);
        assert_eq!(gershgorin(&diag, &off), (1.0, 9.0));
        assert!((smallest_eigenvalue(&[3.0], &[], 1e-12).unwrap() - 3.0).abs() < 1e-12);
    }
}
