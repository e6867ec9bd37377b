//! Bottom-of-spectrum estimates.
//!
//! The radial Rayleigh quotient `∫ a'² ψ^{n-1} / ∫ a² ψ^{n-1}` is discretized
//! on a uniform grid with a Dirichlet condition at the outer radius. With
//! `w = ψ^{n-1}`, stiffness weights at cell midpoints and a lumped mass
//! `w(r_i) h`, the symmetric scaling `M^{-1/2} K M^{-1/2}` has
//!
//! ```text
//! A_ii     = (w_{i-1/2} + w_{i+1/2}) / (w_i h²)
//! A_i,i+1  = -w_{i+1/2} / (sqrt(w_i w_{i+1}) h²)
//! ```
//!
//! assembled from `ln w` so nothing overflows. The first node sits at `h`
//! and has no flux through `[0, h]`.
//!
//! The Liouville substitution `v = a ψ^{(n-1)/2}` turns the quotient into
//! `∫ v'² + W v²` with `W = s²/4 + s'/2`, `s = (n-1) ψ'/ψ`.

use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extrapolate::extrapolate_limit;
use crate::geometry::{ball_volume, inverse_tail, omega, volume_to_perimeter};
use crate::isoperimetry::{classify_monotonicity, MonotonicityReport, MONOTONE_TOL};
use crate::profile::{radial_grid, write_csv, RadialProfile, Spacing};
use crate::quadrature::{integrate, Tolerance, DEFAULT_BUDGET};
use crate::tridiag;
use crate::warp::{convexity_scan, CartanHadamard, ManifoldSpec, WarpKind};

/// Absolute bisection tolerance for tridiagonal eigenvalues.
pub const EIGEN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Method {
    RadialFd { r_max: f64, n: usize },
    PerssonLimit,
    PerssonWithTildeL,
    CheegerBound,
    McKeanBound,
    BallLowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub method: Method,
    pub error_indicator: f64,
}

fn radial_matrix(m: &ManifoldSpec, r_max: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = r_max / n as f64;
    let k = m.m();
    let psi = m.psi();
    let lw_node: Vec<f64> = (1..n).map(|i| k * psi.log_value(i as f64 * h)).collect();
    // lw_half[j] is ln w at (j + 1/2) h, j = 0..n-1
    let lw_half: Vec<f64> = (0..n).map(|j| k * psi.log_value((j as f64 + 0.5) * h)).collect();
    let h2 = h * h;
    let mut diag = Vec::with_capacity(n - 1);
    let mut off = Vec::with_capacity(n.saturating_sub(2));
    for idx in 0..n - 1 {
        let i = idx + 1;
        let lw = lw_node[idx];
        let inner = if i == 1 { 0.0 } else { (lw_half[i - 1] - lw).exp() };
        let outer = (lw_half[i] - lw).exp();
        diag.push((inner + outer) / h2);
        if idx + 1 < n - 1 {
            off.push(-(lw_half[i] - 0.5 * (lw + lw_node[idx + 1])).exp() / h2);
        }
    }
    (diag, off)
}

fn radial_eigenvalue(m: &ManifoldSpec, r_max: f64, n: usize) -> Result<f64> {
    let (diag, off) = radial_matrix(m, r_max, n);
    tridiag::smallest_eigenvalue(&diag, &off, EIGEN_TOL)
}

/// Smallest eigenvalue of the radial problem on `[0, r_max]` with `n` cells.
/// `error_indicator` is the change from the `n/2` grid.
pub fn lambda1_radial(m: &ManifoldSpec, r_max: f64, n: usize) -> Result<SpectralEstimate> {
    if n < 100 {
        return Err(Error::DomainError(format!("need at least 100 cells, got {n}")));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::DomainError(format!("radius must be positive, got {r_max}")));
    }
    m.require_pole_valid()?;
    let (fine, coarse) = rayon::join(
        || radial_eigenvalue(m, r_max, n),
        || radial_eigenvalue(m, r_max, n / 2),
    );
    let fine = fine?;
    Ok(SpectralEstimate {
        value: fine,
        method: Method::RadialFd { r_max, n },
        error_indicator: (fine - coarse?).abs(),
    })
}

/// First Dirichlet eigenvalue of the centered ball `B_r(0)`.
pub fn ball_lambda1_numeric(m: &ManifoldSpec, r: f64, n: usize) -> Result<SpectralEstimate> {
    lambda1_radial(m, r, n)
}

/// `W = s²/4 + s'/2` with `s = (n-1) ψ'/ψ`.
pub fn persson_potential(m: &ManifoldSpec, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::PoleSingularity(r));
    }
    let lj = m.psi().log_jet(r);
    let k = m.m();
    let s = k * lj.ratio1;
    let ds = k * (lj.ratio2 - lj.ratio1 * lj.ratio1);
    Ok(0.25 * s * s + 0.5 * ds)
}

/// Probe radii used for limits at infinity.
pub fn default_probes() -> Vec<f64> {
    (0..9).map(|k| 8.0 * 2f64.powi(k)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitL {
    /// `lim (n-1) ψ'/ψ`
    pub l: f64,
    /// `lim (ψ'/ψ)'`
    pub tilde_l: f64,
    pub converged: bool,
}

fn check_probes(probes: &[f64]) -> Result<()> {
    if probes.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: probes.len(),
        });
    }
    if probes[0] <= 0.0 || probes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::DomainError("probes must be positive and increasing".into()));
    }
    Ok(())
}

/// Limits of `(n-1) ψ'/ψ` and `(ψ'/ψ)'` extrapolated from the probe tail.
pub fn limit_l(m: &ManifoldSpec, probes: &[f64]) -> Result<LimitL> {
    check_probes(probes)?;
    let jets: Vec<_> = probes.iter().map(|&r| m.psi().log_jet(r)).collect();
    let l_seq: Vec<f64> = jets.iter().map(|j| m.m() * j.ratio1).collect();
    let t_seq: Vec<f64> = jets.iter().map(|j| j.ratio2 - j.ratio1 * j.ratio1).collect();
    let l = extrapolate_limit(&l_seq, 1e-6);
    let t = extrapolate_limit(&t_seq, 1e-6);
    Ok(LimitL {
        l: l.value,
        tilde_l: t.value,
        converged: l.converged && t.converged && l.value.is_finite() && t.value.is_finite(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerssonReport {
    pub limit: LimitL,
    /// `L²/4 + (n-1) L̃/2`
    pub value: f64,
    /// Limit of `W` extrapolated directly from the probes.
    pub w_limit: f64,
    /// Set when `w_limit` and `value` differ by more than `1e-6`.
    pub flagged: bool,
}

pub fn persson_report(m: &ManifoldSpec, probes: &[f64]) -> Result<PerssonReport> {
    let limit = limit_l(m, probes)?;
    let w_seq: Vec<f64> = probes
        .iter()
        .map(|&r| persson_potential(m, r))
        .collect::<Result<_>>()?;
    let w_limit = extrapolate_limit(&w_seq, 1e-6).value;
    let value = 0.25 * limit.l * limit.l + 0.5 * m.m() * limit.tilde_l;
    Ok(PerssonReport {
        limit,
        value,
        w_limit,
        flagged: !((w_limit - value).abs() <= 1e-6),
    })
}

/// `L²/4 + (n-1) L̃/2` from the default probes.
pub fn lambda1_via_persson(m: &ManifoldSpec) -> Result<SpectralEstimate> {
    let rep = persson_report(m, &default_probes())?;
    if !rep.limit.converged {
        return Err(Error::HypothesisNotMet(
            "limits of ψ'/ψ and (ψ'/ψ)' did not converge".into(),
        ));
    }
    let method = if rep.limit.tilde_l == 0.0 {
        Method::PerssonLimit
    } else {
        Method::PerssonWithTildeL
    };
    Ok(SpectralEstimate {
        value: rep.value,
        method,
        error_indicator: (rep.w_limit - rep.value).abs(),
    })
}

/// `W` sampled on a grid together with the limits it should approach.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialProfile {
    pub grid: Vec<f64>,
    pub w: Vec<f64>,
    pub l_estimate: f64,
    pub tilde_l_estimate: f64,
}

impl PotentialProfile {
    pub fn compute(m: &ManifoldSpec, grid: &[f64]) -> Result<Self> {
        let w = grid
            .iter()
            .map(|&r| persson_potential(m, r))
            .collect::<Result<_>>()?;
        let lim = limit_l(m, &default_probes())?;
        Ok(Self {
            grid: grid.to_vec(),
            w,
            l_estimate: lim.l,
            tilde_l_estimate: lim.tilde_l,
        })
    }

    pub fn to_csv(&self) -> String {
        write_csv(&["r", "W"], &[&self.grid, &self.w])
    }
}

/// Lowest Dirichlet eigenvalue of `-v'' + W v` on
/// `[r_start, r_start + width]`, a probe of the spectrum far from the pole.
pub fn tail_dirichlet_lambda(m: &ManifoldSpec, r_start: f64, width: f64, n: usize) -> Result<f64> {
    if !(r_start > 0.0 && width > 0.0) || n < 2 {
        return Err(Error::DomainError("tail window must be nonempty".into()));
    }
    let h = width / n as f64;
    let diag = (1..n)
        .map(|i| Ok(2.0 / (h * h) + persson_potential(m, r_start + i as f64 * h)?))
        .collect::<Result<Vec<f64>>>()?;
    let off = vec![-1.0 / (h * h); n - 2];
    tridiag::smallest_eigenvalue(&diag, &off, EIGEN_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Discreteness {
    Discrete,
    NotDiscrete,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretenessReport {
    pub r_samples: Vec<f64>,
    /// `(∫_0^R ψ^{n-1}) (∫_R^∞ ψ^{1-n})`
    pub product_values: Vec<f64>,
    pub limit_estimate: f64,
    pub verdict: Discreteness,
    pub note: Option<String>,
}

pub fn default_discreteness_radii() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0, 64.0]
}

/// Tail products and their extrapolated limit. The spectrum is discrete
/// exactly when the limit vanishes.
pub fn discreteness_criterion(m: &ManifoldSpec, radii: &[f64]) -> Result<DiscretenessReport> {
    check_probes(radii)?;
    let ch = match m.cartan_hadamard() {
        CartanHadamard::Unchecked => convexity_scan(m, 50.0, 2000, 1e-12)?,
        c => c,
    };
    if ch != CartanHadamard::Yes {
        return Err(Error::HypothesisNotMet("not Cartan-Hadamard".into()));
    }
    let log_vol = radii
        .iter()
        .map(|&r| Ok(ball_volume(m, r)?.log_volume))
        .collect::<Result<Vec<f64>>>()?;
    if log_vol.windows(2).any(|w| !(w[1] - w[0] > 1e-6)) {
        return Err(Error::HypothesisNotMet("volume does not diverge".into()));
    }
    let mut products = Vec::with_capacity(radii.len());
    for &r in radii {
        let (head, _) = volume_to_perimeter(m, r)?;
        match inverse_tail(m, r) {
            Ok((tail, _)) => products.push(head * tail),
            Err(Error::TailDivergence(_)) => {
                return Ok(DiscretenessReport {
                    r_samples: radii.to_vec(),
                    product_values: products,
                    limit_estimate: f64::NAN,
                    verdict: Discreteness::Inconclusive,
                    note: Some(format!(
                        "∫ ψ^(1-n) diverges beyond R = {r}; the criterion needs a non-parabolic manifold"
                    )),
                });
            }
            Err(e) => return Err(e),
        }
    }
    let limit = extrapolate_limit(&products, 1e-6).value;
    let tail3 = &products[products.len() - 3..];
    let verdict = if limit <= 1e-6 {
        Discreteness::Discrete
    } else if limit >= 1e-3 && tail3.iter().all(|&p| p >= 1e-3) {
        Discreteness::NotDiscrete
    } else {
        Discreteness::Inconclusive
    };
    Ok(DiscretenessReport {
        r_samples: radii.to_vec(),
        product_values: products,
        limit_estimate: limit,
        verdict,
        note: None,
    })
}

/// `h²/4`.
pub fn cheeger_bound(h: f64) -> Result<f64> {
    if !(h >= 0.0) {
        return Err(Error::DomainError(format!("Cheeger constant must be >= 0, got {h}")));
    }
    Ok(0.25 * h * h)
}

/// `-(n-1)² κ / 4` for sectional curvature `<= κ < 0`.
pub fn mckean_bound(n: usize, kappa: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if !(kappa < 0.0) {
        return Err(Error::DomainError(format!("curvature bound must be negative, got {kappa}")));
    }
    let k = (n - 1) as f64;
    Ok(-k * k * kappa / 4.0)
}

/// `n² / (4 r²)`.
pub fn ball_lower_bound(n: usize, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    if !(r > 0.0) {
        return Err(Error::DomainError(format!("radius must be positive, got {r}")));
    }
    let n = n as f64;
    Ok(n * n / (4.0 * r * r))
}

fn g_at_pole(m: &ManifoldSpec) -> Option<f64> {
    match m.psi().kind() {
        WarpKind::Power { c } => Some(c),
        _ if m.pole_valid() => Some(1.0),
        _ => None,
    }
}

/// Trend of `g(t) = t ψ'(t)/ψ(t)` on `(0, r_max]`, with the value at `0⁺`
/// prepended.
pub fn g_monotone_check(m: &ManifoldSpec, r_max: f64, tol: f64) -> Result<MonotonicityReport> {
    let grid = radial_grid(1e-4 * r_max, r_max, 400, Spacing::Geometric)?;
    let g = |t: f64| t * m.psi().log_jet(t).ratio1;
    let mut r = Vec::with_capacity(grid.len() + 1);
    let mut v = Vec::with_capacity(grid.len() + 1);
    if let Some(g0) = g_at_pole(m) {
        r.push(0.0);
        v.push(g0);
    }
    for &t in &grid {
        r.push(t);
        v.push(g(t));
    }
    classify_monotonicity(&RadialProfile::new("g", r, v)?, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeBound {
    /// `ω_n ∫ g ψ^{n-1}` over the annulus.
    pub lhs: f64,
    /// Volume of the annulus.
    pub rhs: f64,
    pub holds: bool,
}

/// Compares the annulus volume with `ω_n ∫ g ψ^{n-1}` over
/// `a_inner <= ϱ <= a_outer`.
pub fn volume_bound_check(m: &ManifoldSpec, r: f64, a_inner: f64, a_outer: f64) -> Result<VolumeBound> {
    if !(0.0 <= a_inner && a_inner < a_outer && a_outer <= r) {
        return Err(Error::DomainError(format!(
            "need 0 <= a_inner < a_outer <= r, got {a_inner}, {a_outer}, {r}"
        )));
    }
    if !g_monotone_check(m, r, MONOTONE_TOL)?.is_nondecreasing() {
        return Err(Error::HypothesisNotMet("t ψ'/ψ is not increasing".into()));
    }
    let k = m.m();
    let psi = m.psi();
    let top = k * psi.log_value(a_outer);
    let weight = |t: f64| (k * psi.log_value(t) - top).exp();
    let tol = Tolerance::tight();
    let lhs = integrate(
        |t| t * psi.log_jet(t).ratio1 * weight(t),
        a_inner,
        a_outer,
        tol,
        DEFAULT_BUDGET,
    )?
    .value;
    let rhs = integrate(weight, a_inner, a_outer, tol, DEFAULT_BUDGET)?.value;
    let scale = omega(m.dim()) * top.exp();
    let (lhs, rhs) = (lhs * scale, rhs * scale);
    Ok(VolumeBound {
        lhs,
        rhs,
        holds: lhs >= rhs - 1e-10 * rhs,
    })
}

/// A radial test function with compact support and its derivative.
#[derive(Clone)]
pub struct TestFunction {
    pub support: (f64, f64),
    eval: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction").field("support", &self.support).finish()
    }
}

impl TestFunction {
    pub fn new(support: (f64, f64), eval: Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>) -> Self {
        Self { support, eval }
    }

    /// `exp(-1/(1-x²))` on `(a, b)` with `x` the affine coordinate in `[-1, 1]`.
    pub fn bump(a: f64, b: f64) -> Self {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self::new(
            (a, b),
            Arc::new(move |t| {
                let x = (t - mid) / half;
                let q = 1.0 - x * x;
                if q <= 0.0 {
                    return (0.0, 0.0);
                }
                let u = (-1.0 / q).exp();
                (u, u * (-2.0 * x / (q * q)) / half)
            }),
        )
    }

    /// `(u, u')`
    pub fn eval(&self, t: f64) -> (f64, f64) {
        (self.eval)(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiouvilleCheck {
    /// `∫ u'² ψ^{n-1}`
    pub lhs: f64,
    /// `∫ v'² + W v²`, `v = u ψ^{(n-1)/2}`
    pub rhs: f64,
    /// `∫ v² = ∫ u² ψ^{n-1}`
    pub mass: f64,
}

impl LiouvilleCheck {
    pub fn rayleigh_quotient(&self) -> f64 {
        self.rhs / self.mass
    }
}

/// Both sides of the energy identity under the Liouville substitution.
pub fn liouville_transform_check(m: &ManifoldSpec, u: &TestFunction, r_max: f64) -> Result<LiouvilleCheck> {
    let (a, b) = u.support;
    if !(0.0 < a && a < b && b <= r_max) {
        return Err(Error::DomainError(format!(
            "support ({a}, {b}) must lie in (0, {r_max}]"
        )));
    }
    let k = m.m();
    let psi = m.psi();
    let top = k * psi.log_value(b);
    let tol = Tolerance::tight();
    let lhs = integrate(
        |t| {
            let (_, du) = u.eval(t);
            du * du * (k * psi.log_value(t) - top).exp()
        },
        a,
        b,
        tol,
        DEFAULT_BUDGET,
    )?
    .value;
    let v_parts = |t: f64| {
        let (val, du) = u.eval(t);
        let lj = psi.log_jet(t);
        let amp = (0.5 * (k * lj.log_psi - top)).exp();
        (val * amp, (du + 0.5 * k * lj.ratio1 * val) * amp)
    };
    let rhs = integrate(
        |t| {
            let (v, dv) = v_parts(t);
            dv * dv + persson_potential(m, t).unwrap_or(f64::NAN) * v * v
        },
        a,
        b,
        tol,
        DEFAULT_BUDGET,
    )?
    .value;
    let mass = integrate(
        |t| {
            let (v, _) = v_parts(t);
            v * v
        },
        a,
        b,
        tol,
        DEFAULT_BUDGET,
    )?
    .value;
    let scale = top.exp();
    Ok(LiouvilleCheck {
        lhs: lhs * scale,
        rhs: rhs * scale,
        mass: mass * scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub r_max: f64,
    pub n: usize,
    pub lambda: f64,
    pub error_indicator: f64,
}

/// `lambda1_radial` over a list of `(r_max, n)` runs.
pub fn convergence_table(m: &ManifoldSpec, runs: &[(f64, usize)]) -> Result<Vec<ConvergenceRow>> {
    runs.par_iter()
        .map(|&(r_max, n)| {
            let e = lambda1_radial(m, r_max, n)?;
            Ok(ConvergenceRow {
                r_max,
                n,
                lambda: e.value,
                error_indicator: e.error_indicator,
            })
        })
        .collect()
}

/// CSV with columns `R_max, N, lambda, error_indicator`.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let r: Vec<f64> = rows.iter().map(|x| x.r_max).collect();
    let n: Vec<f64> = rows.iter().map(|x| x.n as f64).collect();
    let l: Vec<f64> = rows.iter().map(|x| x.lambda).collect();
    let e: Vec<f64> = rows.iter().map(|x| x.error_indicator).collect();
    write_csv(&["R_max", "N", "lambda", "error_indicator"], &[&r, &n, &l, &e])
}
