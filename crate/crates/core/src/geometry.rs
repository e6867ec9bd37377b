//! Curvatures, ball volumes and perimeters, and small-ball expansions.
//!
//! All curvature quantities are functions of the radius only:
//!
//! ```text
//! K_rad = -ψ''/ψ            K_tan = (1 - ψ'²)/ψ²
//! Ric_rad = (n-1) K_rad     Ric_tan = K_rad + (n-2) K_tan
//! S = 2(n-1) K_rad + (n-1)(n-2) K_tan
//! H = (n-1) ψ'/ψ
//! ```
//!
//! Ratios are taken from the log-space jet of the warping function so they
//! stay finite where `ψ` itself overflows.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numdiff;
use crate::profile::write_csv;
use crate::quadrature;
use crate::warp::ManifoldSpec;

/// Surface measure of the unit sphere `S^{n-1}`, `2 π^{n/2} / Γ(n/2)`.
pub fn omega(n: usize) -> f64 {
    assert!(n >= 1, "omega needs n >= 1");
    // ω_1 = 2, ω_2 = 2π, ω_{k+2} = 2π ω_k / k
    let mut w = if n % 2 == 1 { 2.0 } else { 2.0 * std::f64::consts::PI };
    let mut k = if n % 2 == 1 { 1 } else { 2 };
    while k < n {
        w *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    w
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 {
        Ok(())
    } else {
        Err(Error::PoleSingularity(r))
    }
}

// ln ψ above which ψ² is treated as overflowing
const LOG_OVERFLOW: f64 = 300.0;

pub fn k_rad(m: &ManifoldSpec, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(-m.psi().log_jet(r).ratio2)
}

pub fn k_tan(m: &ManifoldSpec, r: f64) -> Result<f64> {
    check_radius(r)?;
    let w = m.psi();
    let lj = w.log_jet(r);
    if lj.log_psi < LOG_OVERFLOW {
        let psi = w.value(r);
        let dm1 = w.d1_minus_one(r);
        Ok(-dm1 * (dm1 + 2.0) / (psi * psi))
    } else {
        Ok((-2.0 * lj.log_psi).exp() - lj.ratio1 * lj.ratio1)
    }
}

pub fn ricci_rad(m: &ManifoldSpec, r: f64) -> Result<f64> {
    Ok(m.m() * k_rad(m, r)?)
}

pub fn ricci_tan(m: &ManifoldSpec, r: f64) -> Result<f64> {
    Ok(k_rad(m, r)? + (m.dim() as f64 - 2.0) * k_tan(m, r)?)
}

pub fn scalar_curvature(m: &ManifoldSpec, r: f64) -> Result<f64> {
    let n = m.dim() as f64;
    Ok(2.0 * (n - 1.0) * k_rad(m, r)? + (n - 1.0) * (n - 2.0) * k_tan(m, r)?)
}

pub fn mean_curvature(m: &ManifoldSpec, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(m.m() * m.psi().log_jet(r).ratio1)
}

/// Curvature scalars sampled on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureProfile {
    pub grid: Vec<f64>,
    pub k_rad: Vec<f64>,
    pub k_tan: Vec<f64>,
    pub ric_rad: Vec<f64>,
    pub ric_tan: Vec<f64>,
    pub scalar: Vec<f64>,
    pub mean: Vec<f64>,
}

impl CurvatureProfile {
    pub fn compute(m: &ManifoldSpec, grid: &[f64]) -> Result<Self> {
        let n = m.dim() as f64;
        let rows: Vec<[f64; 3]> = grid
            .par_iter()
            .map(|&r| Ok([k_rad(m, r)?, k_tan(m, r)?, mean_curvature(m, r)?]))
            .collect::<Result<_>>()?;
        let k_rad: Vec<f64> = rows.iter().map(|x| x[0]).collect();
        let k_tan: Vec<f64> = rows.iter().map(|x| x[1]).collect();
        let mean = rows.iter().map(|x| x[2]).collect();
        let ric_rad = k_rad.iter().map(|k| (n - 1.0) * k).collect();
        let ric_tan = k_rad
            .iter()
            .zip(&k_tan)
            .map(|(kr, kt)| kr + (n - 2.0) * kt)
            .collect();
        let scalar = k_rad
            .iter()
            .zip(&k_tan)
            .map(|(kr, kt)| 2.0 * (n - 1.0) * kr + (n - 1.0) * (n - 2.0) * kt)
            .collect();
        Ok(Self {
            grid: grid.to_vec(),
            k_rad,
            k_tan,
            ric_rad,
            ric_tan,
            scalar,
            mean,
        })
    }

    /// CSV with columns `r, k_rad, k_tan, ric_rad, ric_tan, scalar, mean`.
    pub fn to_csv(&self) -> String {
        write_csv(
            &["r", "k_rad", "k_tan", "ric_rad", "ric_tan", "scalar", "mean"],
            &[
                &self.grid,
                &self.k_rad,
                &self.k_tan,
                &self.ric_rad,
                &self.ric_tan,
                &self.scalar,
                &self.mean,
            ],
        )
    }
}

/// `∫_0^r (ψ(t)/ψ(r))^{n-1} dt`, i.e. `V(r)/P(r)`, with its error estimate.
///
/// Panels march from `r` towards the pole, starting at a width matched to
/// the local growth rate of the integrand.
pub fn volume_to_perimeter(m: &ManifoldSpec, r: f64) -> Result<(f64, f64)> {
    check_radius(r)?;
    let k = m.m();
    let w = m.psi();
    let top = w.log_jet(r);
    let rate = (k * top.ratio1).abs() + 1.0 / r;
    let first = (1.0 / rate).min(r);
    let march = quadrature::march(
        |t| (k * (w.log_value(t) - top.log_psi)).exp(),
        r,
        0.0,
        first,
        10_000,
    )?;
    Ok((march.value, march.error))
}

/// `∫_R^∞ (ψ(R)/ψ(t))^{n-1} dt`.
pub fn inverse_tail(m: &ManifoldSpec, r: f64) -> Result<(f64, f64)> {
    check_radius(r)?;
    let k = m.m();
    let w = m.psi();
    let top = w.log_jet(r);
    let rate = (k * top.ratio1).abs().max(1e-3);
    let march = quadrature::march(
        |t| (-k * (w.log_value(t) - top.log_psi)).exp(),
        r,
        f64::INFINITY,
        (1.0 / rate).min(r.max(1.0)),
        128,
    )?;
    Ok((march.value, march.error))
}

/// Volume and perimeter of the geodesic ball `B_r(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallGeometry {
    pub r: f64,
    pub volume: f64,
    pub perimeter: f64,
    pub quad_error_estimate: f64,
    pub log_volume: f64,
    pub log_perimeter: f64,
}

/// `V(r) = ω_n ∫_0^r ψ^{n-1}` and `P(r) = ω_n ψ(r)^{n-1}`.
pub fn ball_volume(m: &ManifoldSpec, r: f64) -> Result<BallGeometry> {
    check_radius(r)?;
    m.require_pole_valid()?;
    let (ratio, err) = volume_to_perimeter(m, r)?;
    let log_perimeter = omega(m.dim()).ln() + m.m() * m.psi().log_value(r);
    let log_volume = log_perimeter + ratio.ln();
    let volume = log_volume.exp();
    Ok(BallGeometry {
        r,
        volume,
        perimeter: log_perimeter.exp(),
        quad_error_estimate: volume * err / ratio,
        log_volume,
        log_perimeter,
    })
}

/// Small-ball approximations of volume and perimeter around a point at
/// distance `r_center` from the pole, normalised with the unit-ball volume
/// `ω_n / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallBall {
    pub vol_approx: f64,
    pub per_approx: f64,
}

pub fn small_ball_expansion(m: &ManifoldSpec, r_center: f64, eps: f64) -> Result<SmallBall> {
    if !(eps > 0.0) {
        return Err(Error::DomainError(format!("eps must be positive, got {eps}")));
    }
    let s = scalar_curvature(m, r_center)?;
    let n = m.dim() as f64;
    let w = omega(m.dim());
    Ok(SmallBall {
        vol_approx: w / n * eps.powf(n) * (1.0 - s * eps * eps / (6.0 * (n + 2.0))),
        per_approx: w * eps.powf(n - 1.0) * (1.0 - s * eps * eps / (6.0 * n)),
    })
}

/// Left and right sides of `K_tan' = 2 (ψ'/ψ)(K_rad - K_tan)`, the left by
/// central differences with step `h`.
pub fn tan_curvature_identity(m: &ManifoldSpec, r: f64, h: f64) -> Result<(f64, f64)> {
    check_radius(r - 2.0 * h)?;
    let lhs = numdiff::derivative(|t| k_tan(m, t).unwrap_or(f64::NAN), r, h);
    let rhs = 2.0 * m.psi().log_jet(r).ratio1 * (k_rad(m, r)? - k_tan(m, r)?);
    Ok((lhs, rhs))
}

/// Left and right sides of `H'' = -(n-1) K_rad' - 2/(n-1) H H'`.
///
/// `H''` and `K_rad'` come from central differences; `H'` is analytic,
/// `H' = (n-1)(-K_rad - (ψ'/ψ)²)`.
pub fn riccati_identity(m: &ManifoldSpec, r: f64, h: f64) -> Result<(f64, f64)> {
    check_radius(r - 2.0 * h)?;
    let k = m.m();
    let lhs = numdiff::second_derivative(|t| mean_curvature(m, t).unwrap_or(f64::NAN), r, h);
    let dk_rad = numdiff::derivative(|t| k_rad(m, t).unwrap_or(f64::NAN), r, h);
    let hm = mean_curvature(m, r)?;
    let ratio1 = m.psi().log_jet(r).ratio1;
    let dh = k * (-k_rad(m, r)? - ratio1 * ratio1);
    let rhs = -k * dk_rad - 2.0 / k * hm * dh;
    Ok((lhs, rhs))
}
