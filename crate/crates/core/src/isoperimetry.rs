//! Isoperimetric quotients of centered balls, the comparison function
//! `J = n ψ' V - ψ P`, stability margins of centered spheres and the
//! curvature-monotonicity conditions that a centered isoperimetric inequality
//! forces.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, ball_volume, omega, volume_to_perimeter};
use crate::profile::{write_csv, RadialProfile};
use crate::warp::ManifoldSpec;

/// Default relative tolerance of the monotonicity classifier.
pub const MONOTONE_TOL: f64 = 1e-7;

/// `ln Q(r)` with `Q = P^n / V^{n-1}`.
pub fn log_quotient_q(m: &ManifoldSpec, r: f64) -> Result<f64> {
    let ball = ball_volume(m, r)?;
    let (ratio, _) = volume_to_perimeter(m, r)?;
    Ok(ball.log_perimeter - m.m() * ratio.ln())
}

/// `Q(r) = P(r)^n / V(r)^{n-1}`.
pub fn quotient_q(m: &ManifoldSpec, r: f64) -> Result<f64> {
    Ok(log_quotient_q(m, r)?.exp())
}

/// `I(r) = P(r) / V(r)`.
pub fn quotient_i(m: &ManifoldSpec, r: f64) -> Result<f64> {
    m.require_pole_valid()?;
    let (ratio, _) = volume_to_perimeter(m, r)?;
    Ok(1.0 / ratio)
}

/// `J(r) = n ψ'(r) V(r) - ψ(r) P(r)`, evaluated as `ψ P (n (ψ'/ψ)(V/P) - 1)`.
pub fn auxiliary_j(m: &ManifoldSpec, r: f64) -> Result<f64> {
    let ball = ball_volume(m, r)?;
    let (ratio, _) = volume_to_perimeter(m, r)?;
    let lj = m.psi().log_jet(r);
    let n = m.dim() as f64;
    let factor = n * lj.ratio1 * ratio - 1.0;
    if factor == 0.0 {
        return Ok(0.0);
    }
    Ok(factor.signum() * (lj.log_psi + ball.log_perimeter + factor.abs().ln()).exp())
}

/// `f(r) = V(r) / r^n`.
pub fn bishop_f(m: &ManifoldSpec, r: f64) -> Result<f64> {
    let ball = ball_volume(m, r)?;
    Ok((ball.log_volume - m.dim() as f64 * r.ln()).exp())
}

/// Quotients sampled on a radial grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientProfile {
    pub grid: Vec<f64>,
    pub q: Vec<f64>,
    pub i: Vec<f64>,
    pub j: Vec<f64>,
    pub f: Vec<f64>,
}

impl QuotientProfile {
    pub fn compute(m: &ManifoldSpec, grid: &[f64]) -> Result<Self> {
        m.require_pole_valid()?;
        let rows: Vec<[f64; 4]> = grid
            .par_iter()
            .map(|&r| {
                Ok([
                    quotient_q(m, r)?,
                    quotient_i(m, r)?,
                    auxiliary_j(m, r)?,
                    bishop_f(m, r)?,
                ])
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            grid: grid.to_vec(),
            q: rows.iter().map(|x| x[0]).collect(),
            i: rows.iter().map(|x| x[1]).collect(),
            j: rows.iter().map(|x| x[2]).collect(),
            f: rows.iter().map(|x| x[3]).collect(),
        })
    }

    /// CSV with columns `r, Q, I, J, f`.
    pub fn to_csv(&self) -> String {
        write_csv(
            &["r", "Q", "I", "J", "f"],
            &[&self.grid, &self.q, &self.i, &self.j, &self.f],
        )
    }
}

/// Second-variation margin of the centered sphere of radius `R`, computed
/// two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityMargin {
    /// `1/ψ² - (K_rad + (ψ'/ψ)²)`
    pub second_variation_form: f64,
    /// `K_tan - K_rad`
    pub curvature_form: f64,
    /// Largest magnitude among the summands, the scale of the comparison.
    pub scale: f64,
}

impl StabilityMargin {
    pub fn margin(&self) -> f64 {
        self.curvature_form
    }

    /// `|a - b| / scale`.
    pub fn disagreement(&self) -> f64 {
        (self.second_variation_form - self.curvature_form).abs() / self.scale
    }
}

/// Both forms of the margin; they must agree to `1e-10` relative to the
/// magnitude of their summands.
pub fn stability_margin(m: &ManifoldSpec, r: f64) -> Result<StabilityMargin> {
    let k_rad = geometry::k_rad(m, r)?;
    let k_tan = geometry::k_tan(m, r)?;
    let lj = m.psi().log_jet(r);
    let inv_psi_sq = (-2.0 * lj.log_psi).exp();
    let ratio_sq = lj.ratio1 * lj.ratio1;
    let sv = inv_psi_sq - (k_rad + ratio_sq);
    let cf = k_tan - k_rad;
    let scale = inv_psi_sq
        .max(ratio_sq)
        .max(k_rad.abs())
        .max(k_tan.abs())
        .max(f64::MIN_POSITIVE);
    let out = StabilityMargin {
        second_variation_form: sv,
        curvature_form: cf,
        scale,
    };
    if out.disagreement() > 1e-10 {
        return Err(Error::IdentityMismatch {
            what: "stability margin",
            a: sv,
            b: cf,
        });
    }
    Ok(out)
}

/// Small-volume expansion of the quotient `P / V^{(n-1)/n}` of a geodesic
/// ball of volume `v_small` centered at distance `r_center` from the pole:
///
/// `n b^{1/n} (1 - S (v/b)^{2/n} / (2n(n+2)))`, with `b = ω_n / n` the
/// volume of the unit ball.
pub fn small_volume_quotient(m: &ManifoldSpec, r_center: f64, v_small: f64) -> Result<f64> {
    let n = m.dim() as f64;
    let b = omega(m.dim()) / n;
    if !(v_small > 0.0) {
        return Err(Error::DomainError(format!("volume must be positive, got {v_small}")));
    }
    let eps = (v_small / b).powf(1.0 / n);
    if eps >= 0.1 {
        return Err(Error::VolumeTooLarge { volume: v_small, eps });
    }
    let s = geometry::scalar_curvature(m, r_center)?;
    Ok(n * b.powf(1.0 / n) * (1.0 - s * eps * eps / (2.0 * n * (n + 2.0))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    NonMonotone,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub classification: Monotonicity,
    /// Radii where the discrete derivative flips sign.
    pub sign_changes: Vec<f64>,
    pub tol: f64,
}

impl MonotonicityReport {
    pub fn is_nondecreasing(&self) -> bool {
        matches!(
            self.classification,
            Monotonicity::Increasing | Monotonicity::Constant
        )
    }

    pub fn is_nonincreasing(&self) -> bool {
        matches!(
            self.classification,
            Monotonicity::Decreasing | Monotonicity::Constant
        )
    }
}

/// Classifies a sampled function by the signs of its successive
/// differences. Differences within `tol * max|value|` are neutral.
pub fn classify_monotonicity(samples: &RadialProfile, tol: f64) -> Result<MonotonicityReport> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let scale = samples.max_abs();
    let band = tol * scale;
    let (g, v) = (&samples.grid, &samples.values);
    let mut last: Option<(f64, f64)> = None; // (sign, midpoint)
    let mut sign_changes = Vec::new();
    let mut seen_pos = false;
    let mut seen_neg = false;
    for k in 0..v.len() - 1 {
        let d = v[k + 1] - v[k];
        if d.abs() <= band {
            continue;
        }
        let sign = d.signum();
        let mid = 0.5 * (g[k] + g[k + 1]);
        if sign > 0.0 {
            seen_pos = true;
        } else {
            seen_neg = true;
        }
        if let Some((prev, prev_mid)) = last {
            if prev != sign {
                sign_changes.push(0.5 * (prev_mid + mid));
            }
        }
        last = Some((sign, mid));
    }
    let (min, max) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let classification = match (seen_pos, seen_neg) {
        (true, true) => Monotonicity::NonMonotone,
        (true, false) => Monotonicity::Increasing,
        (false, true) => Monotonicity::Decreasing,
        (false, false) => {
            if max - min <= tol * (1.0 + max.abs()) {
                Monotonicity::Constant
            } else if v[v.len() - 1] > v[0] {
                Monotonicity::Increasing
            } else {
                Monotonicity::Decreasing
            }
        }
    };
    Ok(MonotonicityReport {
        classification,
        sign_changes,
        tol,
    })
}

/// Number of sign flips of sampled values (typically derivative samples),
/// ignoring values within `MONOTONE_TOL * max|value|` of zero.
pub fn sign_change_count(profile: &RadialProfile) -> usize {
    sign_change_count_with(profile, MONOTONE_TOL)
}

pub fn sign_change_count_with(profile: &RadialProfile, tol: f64) -> usize {
    let band = tol * profile.max_abs();
    let mut last = 0.0;
    let mut count = 0;
    for &x in &profile.values {
        if x.abs() <= band {
            continue;
        }
        let s = x.signum();
        if last != 0.0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// Which necessary condition failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CiiVerdict {
    NecessaryConditionsHold,
    Violated(Vec<String>),
}

/// Necessary conditions for the centered isoperimetric inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CiiReport {
    /// `K_rad` is not increasing.
    pub cond_i: bool,
    /// `K_rad <= K_tan` on the grid, up to `tol`.
    pub cond_ii: bool,
    /// `K_tan - K_rad` on the grid.
    pub cond_ii_margins: Vec<f64>,
    /// `K_tan` is decreasing (or constant).
    pub cond_iii: bool,
    pub k_rad_trend: Monotonicity,
    pub k_tan_trend: Monotonicity,
    pub stability_margin_min: f64,
    /// Radius where the minimum margin occurs.
    pub stability_margin_argmin: f64,
    pub verdict: CiiVerdict,
}

impl CiiReport {
    pub fn holds(&self) -> bool {
        self.verdict == CiiVerdict::NecessaryConditionsHold
    }

    /// Key/value text record.
    pub fn to_text(&self) -> String {
        let verdict = match &self.verdict {
            CiiVerdict::NecessaryConditionsHold => "necessary_conditions_hold".to_string(),
            CiiVerdict::Violated(which) => format!("violated({})", which.join(",")),
        };
        format!(
            "cond_i = {}\ncond_ii = {}\ncond_iii = {}\nk_rad_trend = {:?}\nk_tan_trend = {:?}\n\
             stability_margin_min = {:e}\nstability_margin_argmin = {:e}\nverdict = {}\n",
            self.cond_i,
            self.cond_ii,
            self.cond_iii,
            self.k_rad_trend,
            self.k_tan_trend,
            self.stability_margin_min,
            self.stability_margin_argmin,
            verdict
        )
    }
}

/// Checks the three curvature conditions on `n_pts` geometric radii in
/// `[1e-3, r_max]`; `tol` is the slack on `K_tan - K_rad >= 0`.
pub fn cii_necessary_check(m: &ManifoldSpec, r_max: f64, n_pts: usize, tol: f64) -> Result<CiiReport> {
    m.require_pole_valid()?;
    let grid = crate::profile::radial_grid(1e-3, r_max, n_pts, crate::profile::Spacing::Geometric)?;
    let margins: Vec<StabilityMargin> = grid
        .par_iter()
        .map(|&r| stability_margin(m, r))
        .collect::<Result<_>>()?;
    let k_rad = RadialProfile::new(
        "k_rad",
        grid.clone(),
        grid.iter().map(|&r| geometry::k_rad(m, r)).collect::<Result<_>>()?,
    )?;
    let k_tan = RadialProfile::new(
        "k_tan",
        grid.clone(),
        grid.iter().map(|&r| geometry::k_tan(m, r)).collect::<Result<_>>()?,
    )?;
    let rad_trend = classify_monotonicity(&k_rad, MONOTONE_TOL)?;
    let tan_trend = classify_monotonicity(&k_tan, MONOTONE_TOL)?;
    let cond_ii_margins: Vec<f64> = margins.iter().map(|s| s.margin()).collect();
    let (argmin, min) = cond_ii_margins
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let cond_i = rad_trend.classification != Monotonicity::Increasing;
    let cond_ii = min >= -tol;
    let cond_iii = tan_trend.is_nonincreasing();
    let mut failed = Vec::new();
    if !cond_i {
        failed.push("i".to_string());
    }
    if !cond_ii {
        failed.push("ii".to_string());
    }
    if !cond_iii {
        failed.push("iii".to_string());
    }
    Ok(CiiReport {
        cond_i,
        cond_ii,
        cond_ii_margins,
        cond_iii,
        k_rad_trend: rad_trend.classification,
        k_tan_trend: tan_trend.classification,
        stability_margin_min: min,
        stability_margin_argmin: grid[argmin],
        verdict: if failed.is_empty() {
            CiiVerdict::NecessaryConditionsHold
        } else {
            CiiVerdict::Violated(failed)
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::WarpingFunction;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn hyp(n: usize) -> ManifoldSpec {
        ManifoldSpec::new(n, WarpingFunction::hyperbolic()).unwrap()
    }

    fn euc(n: usize) -> ManifoldSpec {
        ManifoldSpec::new(n, WarpingFunction::euclidean()).unwrap()
    }

    #[test]
    fn euclidean_quotients() {
        for r in [1e-3, 0.7, 5.0, 80.0] {
            assert!((quotient_q(&euc(2), r).unwrap() / (4.0 * PI) - 1.0).abs() < 1e-12);
            // n^{n-1} ω_n
            assert!((quotient_q(&euc(3), r).unwrap() / (9.0 * 4.0 * PI) - 1.0).abs() < 1e-12);
            assert!((quotient_i(&euc(3), r).unwrap() * r / 3.0 - 1.0).abs() < 1e-12);
            assert!(auxiliary_j(&euc(3), r).unwrap().abs() < 1e-12 * r.powi(3));
            assert!((bishop_f(&euc(3), r).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hyperbolic_quotients() {
        let c = 1f64.cosh();
        let s = 1f64.sinh();
        let q = (2.0 * PI * s).powi(2) / (2.0 * PI * (c - 1.0));
        assert!((quotient_q(&hyp(2), 1.0).unwrap() - q).abs() < 1e-11);
        assert!((quotient_q(&hyp(2), 1.0).unwrap() - 15.978_647).abs() < 1e-5);
        let j = 2.0 * PI * (c - 1.0).powi(2);
        assert!((auxiliary_j(&hyp(2), 1.0).unwrap() - j).abs() < 1e-12);
        assert!((auxiliary_j(&hyp(2), 1.0).unwrap() - 1.853).abs() < 1e-3);
        assert!((quotient_i(&hyp(2), 60.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(auxiliary_j(&hyp(3), 1e-3).unwrap().abs() < 1e-12);
        assert!((quotient_q(&hyp(2), 1e-3).unwrap() / (4.0 * PI) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn large_bump_cheeger_ratio() {
        let m = ManifoldSpec::new(2, WarpingFunction::sinh_plus_bump(1e6).unwrap()).unwrap();
        let e5 = 5f64.exp();
        let limit = 100.0 * e5 / (136.0 * e5 - 16.0);
        let got = quotient_i(&m, 10.0).unwrap();
        assert!((got - limit).abs() < 1e-3, "{got} vs {limit}");
        // exact quotient from the closed-form antiderivative
        let a = 1e6;
        let exact = (10f64.sinh() + 100.0 * a * e5) / ((10f64.cosh() - 1.0) + a * (136.0 * e5 - 16.0));
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn stability_margin_forms() {
        for r in [1e-3, 0.5, 4.0, 500.0] {
            assert!(stability_margin(&hyp(3), r).unwrap().margin().abs() < 1e-9);
            assert_eq!(stability_margin(&euc(2), r).unwrap().margin(), 0.0);
        }
        let m = ManifoldSpec::new(3, WarpingFunction::power_exp(1.0, 0.25).unwrap()).unwrap();
        let s = stability_margin(&m, 1.0).unwrap();
        let kt = geometry::k_tan(&m, 1.0).unwrap();
        let kr = geometry::k_rad(&m, 1.0).unwrap();
        assert!((s.second_variation_form - (kt - kr)).abs() < 1e-12);
        assert!(s.disagreement() < 1e-10);
    }

    #[test]
    fn small_volume_quotient_examples() {
        let b3 = 4.0 * PI / 3.0;
        for r0 in [0.5, 3.0] {
            let q = small_volume_quotient(&euc(3), r0, 1e-4).unwrap();
            assert!((q - 3.0 * b3.powf(1.0 / 3.0)).abs() < 1e-14);
        }
        let h = hyp(3);
        assert_eq!(
            small_volume_quotient(&h, 0.5, 1e-5).unwrap(),
            small_volume_quotient(&h, 7.0, 1e-5).unwrap()
        );
        // PowerExp(1, α): S decreasing in r, so the quotient grows with r
        let m = ManifoldSpec::new(3, WarpingFunction::power_exp(1.0, 0.2).unwrap()).unwrap();
        let s1 = geometry::scalar_curvature(&m, 0.5).unwrap();
        let s2 = geometry::scalar_curvature(&m, 2.0).unwrap();
        assert!(s1 > s2);
        assert!(small_volume_quotient(&m, 0.5, 1e-4).unwrap() < small_volume_quotient(&m, 2.0, 1e-4).unwrap());
        assert!(matches!(
            small_volume_quotient(&h, 1.0, 1.0),
            Err(Error::VolumeTooLarge { .. })
        ));
    }

    #[test]
    fn small_volume_quotient_matches_pole_balls() {
        // at the pole, P / V^{(n-1)/n} of an exact small ball
        let m = hyp(2);
        let eps = 0.02;
        let ball = ball_volume(&m, eps).unwrap();
        let exact = ball.perimeter / ball.volume.sqrt();
        let approx = small_volume_quotient(&m, 1e-4, ball.volume).unwrap();
        assert!(((approx - exact) / exact).abs() < 1e-7);
    }

    fn profile(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> RadialProfile {
        let g = crate::profile::radial_grid(lo, hi, n, crate::profile::Spacing::Uniform).unwrap();
        RadialProfile::sample("t", &g, f)
    }

    #[test]
    fn classification_examples() {
        let r = classify_monotonicity(&profile(|r| r, 1.0, 2.0, 50), MONOTONE_TOL).unwrap();
        assert_eq!(r.classification, Monotonicity::Increasing);
        let r = classify_monotonicity(&profile(|_| 5.0, 1.0, 2.0, 50), MONOTONE_TOL).unwrap();
        assert_eq!(r.classification, Monotonicity::Constant);
        let r = classify_monotonicity(&profile(|r| (r - 1.0).powi(2), 0.0, 2.0, 41), MONOTONE_TOL).unwrap();
        assert_eq!(r.classification, Monotonicity::NonMonotone);
        assert_eq!(r.sign_changes.len(), 1);
        assert!((r.sign_changes[0] - 1.0).abs() < 0.06);
        assert!(matches!(
            classify_monotonicity(&profile(|r| r, 0.0, 1.0, 2), MONOTONE_TOL),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn sign_changes_of_mean_curvature_derivative() {
        let g = crate::profile::radial_grid(0.01, 20.0, 300, crate::profile::Spacing::Geometric).unwrap();
        let csch2 = RadialProfile::sample("dH", &g, |r| -1.0 / r.sinh().powi(2));
        assert_eq!(sign_change_count(&csch2), 0);
        let euclid = RadialProfile::sample("dH", &g, |r| -2.0 / (r * r));
        assert_eq!(sign_change_count(&euclid), 0);
        let one = RadialProfile::sample("dH", &g, |r| 2.0 * (0.5 - 1.0 / (r * r)));
        assert_eq!(sign_change_count(&one), 1);
    }

    #[test]
    fn space_forms_satisfy_necessary_conditions() {
        for m in [hyp(2), hyp(3), euc(2), euc(3)] {
            let rep = cii_necessary_check(&m, 30.0, 400, 1e-9).unwrap();
            assert!(rep.holds(), "{}", rep.to_text());
            assert!(rep.stability_margin_min.abs() < 1e-9);
        }
    }

    #[test]
    fn quintic_warping_violates_margin() {
        // ψ = r + r⁵: K_tan - K_rad = (10 r² - 5 r⁶)/(1 + r⁴)², negative for r⁴ > 2
        let w = WarpingFunction::custom(
            "r+r^5",
            Arc::new(|r: f64| r + r.powi(5)),
            Arc::new(|r: f64| 1.0 + 5.0 * r.powi(4)),
            Arc::new(|r: f64| 20.0 * r.powi(3)),
        );
        let m = ManifoldSpec::new(2, w).unwrap();
        let rep = cii_necessary_check(&m, 5.0, 400, 1e-9).unwrap();
        assert!(!rep.cond_ii);
        assert!(rep.cond_i);
        let oracle = |r: f64| (10.0 * r * r - 5.0 * r.powi(6)) / (1.0 + r.powi(4)).powi(2);
        let grid = crate::profile::radial_grid(1e-3, 5.0, 400, crate::profile::Spacing::Geometric).unwrap();
        for (r, got) in grid.iter().zip(&rep.cond_ii_margins) {
            assert!((got - oracle(*r)).abs() < 1e-9 * (1.0 + oracle(*r).abs()));
        }
        assert!(matches!(rep.verdict, CiiVerdict::Violated(ref v) if v.contains(&"ii".to_string())));
    }
}
