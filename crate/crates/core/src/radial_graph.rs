//! Sets `{ϱ <= u(θ)}` bounded by radial graphs over `S^{n-1}`: volume,
//! perimeter, and comparison with the centered ball of equal volume.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{omega, volume_to_perimeter};
use crate::quadrature::{gk15, integrate, Tolerance, DEFAULT_BUDGET};
use crate::sphere::{sample, AngularOptions, AngularSample, SphereFunction};
use crate::warp::ManifoldSpec;

const CACHE_NODES: usize = 2000;

/// `G(r) = ∫_0^r ψ^{n-1}` on `[r_lo, r_hi]`, scaled by `ψ(r_hi)^{-(n-1)}`.
///
/// Node values are exact integrals; between nodes a single Gauss–Kronrod
/// panel from the node below supplies the remainder.
pub struct GCache<'a> {
    m: &'a ManifoldSpec,
    /// `(n-1) ln ψ(r_hi)`
    pub log_scale: f64,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl<'a> GCache<'a> {
    pub fn build(m: &'a ManifoldSpec, r_lo: f64, r_hi: f64) -> Result<Self> {
        if !(r_lo > 0.0 && r_hi >= r_lo) {
            return Err(Error::DomainError(format!("bad cache range [{r_lo}, {r_hi}]")));
        }
        let k = m.m();
        let log_scale = k * m.psi().log_value(r_hi);
        let count = if r_hi > r_lo { CACHE_NODES } else { 1 };
        let nodes = if count == 1 {
            vec![r_lo]
        } else {
            crate::profile::radial_grid(r_lo, r_hi, count, crate::profile::Spacing::Geometric)?
        };
        let weight = |t: f64| (k * m.psi().log_value(t) - log_scale).exp();
        let (ratio, _) = volume_to_perimeter(m, r_lo)?;
        let mut values = Vec::with_capacity(count);
        values.push(ratio * weight(r_lo));
        for w in nodes.windows(2) {
            let step = integrate(weight, w[0], w[1], Tolerance::tight(), DEFAULT_BUDGET)?.value;
            values.push(values[values.len() - 1] + step);
        }
        Ok(Self {
            m,
            log_scale,
            nodes,
            values,
        })
    }

    /// Scaled `G(r)` for `r` in the cached range.
    pub fn scaled(&self, r: f64) -> f64 {
        let idx = self.nodes.partition_point(|&x| x <= r).saturating_sub(1);
        let base = self.nodes[idx];
        if r == base {
            return self.values[idx];
        }
        let k = self.m.m();
        let s = self.log_scale;
        let psi = self.m.psi();
        let f = |t: f64| (k * psi.log_value(t) - s).exp();
        self.values[idx] + gk15(&f, base, r).0
    }
}

fn u_range(sample: &AngularSample) -> (f64, f64) {
    sample
        .nodes
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), nd| (lo.min(nd.u), hi.max(nd.u)))
}

fn check_dim(m: &ManifoldSpec, u: &SphereFunction) -> Result<()> {
    if m.dim() != u.dim() {
        return Err(Error::InvalidDimension(u.dim()));
    }
    m.require_pole_valid()
}

/// An angular integral, with a standard error for Monte Carlo rules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngularEstimate {
    pub value: f64,
    pub std_error: Option<f64>,
}

fn perimeter_of(m: &ManifoldSpec, s: &AngularSample, log_scale: f64) -> AngularEstimate {
    let k = m.m();
    let (v, se) = s.integrate(|nd| {
        let lp = m.psi().log_value(nd.u);
        (k * lp - log_scale).exp() * (1.0 + nd.grad_sq * (-2.0 * lp).exp()).sqrt()
    });
    let scale = log_scale.exp();
    AngularEstimate {
        value: v * scale,
        std_error: se.map(|e| e * scale),
    }
}

fn volume_of(cache: &GCache<'_>, s: &AngularSample) -> AngularEstimate {
    let (v, se) = s.integrate(|nd| cache.scaled(nd.u));
    let scale = cache.log_scale.exp();
    AngularEstimate {
        value: v * scale,
        std_error: se.map(|e| e * scale),
    }
}

pub fn graph_perimeter_with(m: &ManifoldSpec, u: &SphereFunction, opts: &AngularOptions) -> Result<AngularEstimate> {
    check_dim(m, u)?;
    let s = sample(u, opts)?;
    let (_, hi) = u_range(&s);
    Ok(perimeter_of(m, &s, m.m() * m.psi().log_value(hi)))
}

/// `∫ ψ(u)^{n-1} sqrt(1 + |∇u|²/ψ(u)²) dS`.
pub fn graph_perimeter(m: &ManifoldSpec, u: &SphereFunction) -> Result<f64> {
    Ok(graph_perimeter_with(m, u, &AngularOptions::default())?.value)
}

pub fn graph_volume_with(m: &ManifoldSpec, u: &SphereFunction, opts: &AngularOptions) -> Result<AngularEstimate> {
    check_dim(m, u)?;
    let s = sample(u, opts)?;
    let (lo, hi) = u_range(&s);
    let cache = GCache::build(m, lo, hi)?;
    Ok(volume_of(&cache, &s))
}

/// `∫ G(u) dS` with `G(r) = ∫_0^r ψ^{n-1}`.
pub fn graph_volume(m: &ManifoldSpec, u: &SphereFunction) -> Result<f64> {
    Ok(graph_volume_with(m, u, &AngularOptions::default())?.value)
}

/// Radius of the centered ball with volume `v_target`: solves
/// `ω_n G(r) = v_target` to relative `1e-12` in `r`.
pub fn matched_ball_radius(m: &ManifoldSpec, v_target: f64) -> Result<f64> {
    if !(v_target > 0.0 && v_target.is_finite()) {
        return Err(Error::DomainError(format!("volume must be positive, got {v_target}")));
    }
    m.require_pole_valid()?;
    let target = (v_target / omega(m.dim())).ln();
    let k = m.m();
    // F(r) = ln G(r) - target, F' = ψ^{n-1}/G = 1/ratio
    let eval = |r: f64| -> Result<(f64, f64)> {
        let (ratio, _) = volume_to_perimeter(m, r)?;
        Ok((k * m.psi().log_value(r) + ratio.ln() - target, 1.0 / ratio))
    };
    let (mut lo, mut hi) = (1.0, 1.0);
    let mut f_lo = eval(lo)?.0;
    let mut f_hi = f_lo;
    let mut tries = 0;
    while f_lo > 0.0 {
        lo *= 0.5;
        f_lo = eval(lo)?.0;
        tries += 1;
        if tries > 1100 || lo == 0.0 {
            return Err(Error::BracketFailure(v_target));
        }
    }
    tries = 0;
    while f_hi < 0.0 {
        hi *= 2.0;
        f_hi = eval(hi)?.0;
        tries += 1;
        if tries > 60 || !f_hi.is_finite() {
            return Err(Error::BracketFailure(v_target));
        }
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (f, df) = eval(r)?;
        if f == 0.0 {
            return Ok(r);
        }
        if f < 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let newton = r - f / df;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - r).abs() <= 1e-13 * r || hi - lo <= 1e-15 * hi {
            return Ok(next);
        }
        r = next;
    }
    Err(Error::BracketFailure(v_target))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphSetReport {
    pub volume: f64,
    pub perimeter: f64,
    pub matched_ball_radius: f64,
    pub ball_perimeter: f64,
    /// `perimeter - ball_perimeter`; negative values would contradict the
    /// centered isoperimetric inequality.
    pub cii_gap: f64,
    pub volume_std_error: Option<f64>,
    pub perimeter_std_error: Option<f64>,
}

impl GraphSetReport {
    /// Key/value text record.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "volume = {:e}\nperimeter = {:e}\nmatched_ball_radius = {:e}\nball_perimeter = {:e}\ncii_gap = {:e}\n",
            self.volume, self.perimeter, self.matched_ball_radius, self.ball_perimeter, self.cii_gap
        );
        if let (Some(v), Some(p)) = (self.volume_std_error, self.perimeter_std_error) {
            s.push_str(&format!("volume_std_error = {v:e}\nperimeter_std_error = {p:e}\n"));
        }
        s
    }
}

pub fn cii_probe_with(m: &ManifoldSpec, u: &SphereFunction, opts: &AngularOptions) -> Result<GraphSetReport> {
    check_dim(m, u)?;
    let s = sample(u, opts)?;
    let (lo, hi) = u_range(&s);
    let cache = GCache::build(m, lo, hi)?;
    let vol = volume_of(&cache, &s);
    let per = perimeter_of(m, &s, cache.log_scale);
    let (volume, perimeter) = (vol.value, per.value);
    let r = if lo == hi {
        lo
    } else {
        matched_ball_radius(m, volume)?
    };
    let ball_perimeter = omega(m.dim()) * (m.m() * m.psi().log_value(r)).exp();
    let cii_gap = if lo == hi { 0.0 } else { perimeter - ball_perimeter };
    Ok(GraphSetReport {
        volume,
        perimeter,
        matched_ball_radius: r,
        ball_perimeter,
        cii_gap,
        volume_std_error: vol.std_error,
        perimeter_std_error: per.std_error,
    })
}

/// Volume, perimeter and the perimeter gap to the centered ball of the same
/// volume.
pub fn cii_probe(m: &ManifoldSpec, u: &SphereFunction) -> Result<GraphSetReport> {
    cii_probe_with(m, u, &AngularOptions::default())
}
