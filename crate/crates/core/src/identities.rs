//! Relative gaps of the differential identities between radial quantities,
//! with finite-difference steps scaled to the radius.

use crate::error::Result;
use crate::geometry::{ball_volume, k_tan, riccati_identity, tan_curvature_identity};
use crate::isoperimetry::auxiliary_j;
use crate::numdiff::{derivative, relative_gap};
use crate::warp::ManifoldSpec;

/// Relative tolerances used by the verifier.
pub const TAN_TOL: f64 = 1e-5;
pub const RICCATI_TOL: f64 = 1e-4;
pub const J_TOL: f64 = 1e-4;

/// `K_tan' = 2 (ψ'/ψ)(K_rad - K_tan)`.
pub fn tan_curvature_gap(m: &ManifoldSpec, r: f64) -> Result<f64> {
    let (lhs, rhs) = tan_curvature_identity(m, r, 1e-3 * r.min(1.0))?;
    Ok(relative_gap(lhs, rhs, 1e-6 * (1.0 + k_tan(m, r)?.abs())))
}

/// `H'' = -(n-1) K_rad' - 2 H H' / (n-1)`.
pub fn riccati_gap(m: &ManifoldSpec, r: f64) -> Result<f64> {
    let (lhs, rhs) = riccati_identity(m, r, 2e-3 * r.min(1.0))?;
    let h = crate::geometry::mean_curvature(m, r)?;
    Ok(relative_gap(lhs, rhs, 1e-6 * (1.0 + h * h)))
}

/// `J' = n ψ'' V`; both sides are returned divided by `ψ P`.
pub fn j_derivative_sides(m: &ManifoldSpec, r: f64) -> Result<(f64, f64, f64)> {
    let h = 1e-3 * r.min(1.0);
    let ball = ball_volume(m, r)?;
    let lj = m.psi().log_jet(r);
    let scale = (lj.log_psi + ball.log_perimeter).exp();
    let lhs = derivative(|t| auxiliary_j(m, t).unwrap_or(f64::NAN), r, h) / scale;
    let n = m.dim() as f64;
    let rhs = n * lj.ratio2 * (ball.log_volume - ball.log_perimeter).exp();
    let floor = 1e-6 * n * lj.ratio1.abs();
    Ok((lhs, rhs, floor))
}

pub fn j_derivative_gap(m: &ManifoldSpec, r: f64) -> Result<f64> {
    let (lhs, rhs, floor) = j_derivative_sides(m, r)?;
    Ok(relative_gap(lhs, rhs, floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::WarpingFunction;

    #[test]
    fn identities_hold_on_presets() {
        let family = [
            ManifoldSpec::new(2, WarpingFunction::hyperbolic()).unwrap(),
            ManifoldSpec::new(3, WarpingFunction::hyperbolic()).unwrap(),
            ManifoldSpec::new(3, WarpingFunction::euclidean()).unwrap(),
            ManifoldSpec::new(2, WarpingFunction::sinh_plus_bump(2.0).unwrap()).unwrap(),
            ManifoldSpec::new(3, WarpingFunction::power_exp(1.0, 0.25).unwrap()).unwrap(),
            ManifoldSpec::new(4, WarpingFunction::power_exp(1.5, 0.5).unwrap()).unwrap(),
        ];
        for m in &family {
            for r in [0.1, 0.5, 1.0, 3.0, 8.0, 20.0] {
                assert!(tan_curvature_gap(m, r).unwrap() < TAN_TOL, "{} r={r}", m.name());
                assert!(riccati_gap(m, r).unwrap() < RICCATI_TOL, "{} r={r}", m.name());
            }
            if m.pole_valid() {
                for r in [0.1, 1.0, 5.0, 15.0] {
                    let g = j_derivative_gap(m, r).unwrap();
                    assert!(g < J_TOL, "{} r={r}: {g}", m.name());
                }
            }
        }
    }
}
