//! Positive functions on `S^{n-1}` and angular quadrature rules.
//!
//! Every representation is reduced to a list of [`SphereNode`]s: quadrature
//! weight, value `u` and squared tangential gradient `|∇u|²`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::omega;
use crate::quadrature::gauss_legendre;

/// Value and ambient gradient of an extension of `u` to a neighbourhood of
/// the sphere; only the tangential part of the gradient is used.
pub type SphereCallback = Arc<dyn Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync>;

#[derive(Clone)]
pub enum Repr {
    /// `c₀ + Σ a_k cos kθ + b_k sin kθ`, `k = 1..`
    Fourier { c0: f64, a: Vec<f64>, b: Vec<f64> },
    /// Samples at `z_i = cos φ_i` (Gauss–Legendre nodes, ascending) times
    /// `θ_j = 2πj / n_theta`; `values[i * n_theta + j]`.
    LatLongGrid {
        n_phi: usize,
        n_theta: usize,
        values: Vec<f64>,
    },
    Callback(SphereCallback),
}

#[derive(Clone)]
pub struct SphereFunction {
    n: usize,
    repr: Repr,
}

impl std::fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.repr {
            Repr::Fourier { a, .. } => format!("Fourier(modes={})", a.len()),
            Repr::LatLongGrid { n_phi, n_theta, .. } => format!("LatLongGrid({n_phi}x{n_theta})"),
            Repr::Callback(_) => "Callback".to_string(),
        };
        write!(f, "SphereFunction(n={}, {kind})", self.n)
    }
}

impl SphereFunction {
    /// Fourier series on the circle (`n = 2`). Missing coefficients are zero.
    pub fn fourier(c0: f64, mut a: Vec<f64>, mut b: Vec<f64>) -> Self {
        let k = a.len().max(b.len());
        a.resize(k, 0.0);
        b.resize(k, 0.0);
        Self {
            n: 2,
            repr: Repr::Fourier { c0, a, b },
        }
    }

    /// Samples `f(φ, θ)` on a latitude/longitude grid (`n = 3`). `n_theta`
    /// must be even so pole stencils can cross to `θ + π`.
    pub fn lat_long<F: Fn(f64, f64) -> f64>(n_phi: usize, n_theta: usize, f: F) -> Result<Self> {
        if n_phi < 3 || n_theta < 4 || !n_theta.is_multiple_of(2) {
            return Err(Error::DomainError(format!(
                "lat/long grid needs n_phi >= 3 and even n_theta >= 4, got {n_phi}x{n_theta}"
            )));
        }
        let (z, _) = gauss_legendre(n_phi);
        let mut values = Vec::with_capacity(n_phi * n_theta);
        for &zi in &z {
            let phi = zi.acos();
            for j in 0..n_theta {
                values.push(f(phi, 2.0 * PI * j as f64 / n_theta as f64));
            }
        }
        Ok(Self {
            n: 3,
            repr: Repr::LatLongGrid {
                n_phi,
                n_theta,
                values,
            },
        })
    }

    pub fn callback(n: usize, f: SphereCallback) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self {
            n,
            repr: Repr::Callback(f),
        })
    }

    pub fn constant(n: usize, r: f64) -> Result<Self> {
        Self::callback(n, Arc::new(move |x: &[f64]| (r, vec![0.0; x.len()])))
    }

    /// `r (1 + ε Y)` for a polynomial `Y` given with its ambient gradient.
    pub fn perturbed(n: usize, r: f64, eps: f64, y: SphereCallback) -> Result<Self> {
        Self::callback(
            n,
            Arc::new(move |x: &[f64]| {
                let (v, g) = y(x);
                (r * (1.0 + eps * v), g.into_iter().map(|d| r * eps * d).collect())
            }),
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }
}

/// One angular quadrature node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereNode {
    pub weight: f64,
    pub u: f64,
    pub grad_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularOptions {
    /// Trapezoid nodes on the circle.
    pub circle_nodes: usize,
    /// Gauss–Legendre nodes in `cos φ` on `S²`.
    pub s2_phi: usize,
    /// Uniform `θ` nodes on `S²`.
    pub s2_theta: usize,
    /// Gauss nodes per angle for `4 <= n <= 6`.
    pub per_angle: usize,
    /// Monte Carlo samples for `n > 6`.
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for AngularOptions {
    fn default() -> Self {
        Self {
            circle_nodes: 512,
            s2_phi: 64,
            s2_theta: 128,
            per_angle: 32,
            mc_samples: 1_000_000,
            seed: 0x5eed,
        }
    }
}

/// Nodes produced by a rule. `monte_carlo` is set when the weights are
/// equal sample weights, in which case standard errors are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSample {
    pub nodes: Vec<SphereNode>,
    pub monte_carlo: bool,
}

impl AngularSample {
    /// `Σ w f(node)` and, for Monte Carlo samples, its standard error.
    pub fn integrate<F: Fn(&SphereNode) -> f64 + Sync>(&self, f: F) -> (f64, Option<f64>) {
        let vals: Vec<f64> = self.nodes.par_iter().map(|nd| nd.weight * f(nd)).collect();
        let sum: f64 = vals.iter().sum();
        if !self.monte_carlo {
            return (sum, None);
        }
        let k = vals.len() as f64;
        let mean = sum / k;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
        (sum, Some((var / k).sqrt() * k))
    }
}

fn check_positive(nodes: &[SphereNode]) -> Result<()> {
    match nodes.iter().find(|nd| !(nd.u > 0.0 && nd.u.is_finite())) {
        Some(nd) => Err(Error::NonPositiveU(nd.u)),
        None => Ok(()),
    }
}

fn tangential(x: &[f64], g: &[f64]) -> f64 {
    let radial: f64 = x.iter().zip(g).map(|(a, b)| a * b).sum();
    let full: f64 = g.iter().map(|v| v * v).sum();
    (full - radial * radial).max(0.0)
}

/// Quadrature nodes for `u` on `S^{n-1}`.
pub fn sample(u: &SphereFunction, opts: &AngularOptions) -> Result<AngularSample> {
    let nodes = match &u.repr {
        Repr::Fourier { c0, a, b } => fourier_nodes(*c0, a, b, opts.circle_nodes),
        Repr::LatLongGrid {
            n_phi,
            n_theta,
            values,
        } => lat_long_nodes(*n_phi, *n_theta, values),
        Repr::Callback(f) => {
            return callback_nodes(u.n, f, opts);
        }
    };
    check_positive(&nodes)?;
    Ok(AngularSample {
        nodes,
        monte_carlo: false,
    })
}

fn fourier_nodes(c0: f64, a: &[f64], b: &[f64], count: usize) -> Vec<SphereNode> {
    let count = count.max(16 * (a.len() + 1));
    let w = 2.0 * PI / count as f64;
    (0..count)
        .map(|j| {
            let t = w * j as f64;
            let mut v = c0;
            let mut d = 0.0;
            for k in 0..a.len() {
                let kf = (k + 1) as f64;
                let (s, c) = (kf * t).sin_cos();
                v += a[k] * c + b[k] * s;
                d += kf * (b[k] * c - a[k] * s);
            }
            SphereNode {
                weight: w,
                u: v,
                grad_sq: d * d,
            }
        })
        .collect()
}

/// Spectral derivative of periodic samples.
fn periodic_derivative(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let nf = n as f64;
    let half = n / 2;
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for k in 0..n {
        for (j, &v) in f.iter().enumerate() {
            let ang = -2.0 * PI * ((k * j) % n) as f64 / nf;
            re[k] += v * ang.cos();
            im[k] += v * ang.sin();
        }
    }
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for k in 0..n {
                let wave = if k < half {
                    k as f64
                } else if k > half || n % 2 == 1 {
                    k as f64 - nf
                } else {
                    0.0
                };
                if wave == 0.0 {
                    continue;
                }
                let ang = 2.0 * PI * ((k * j) % n) as f64 / nf;
                // i·wave·(re + i·im)·e^{i ang}, real part
                acc += -wave * (re[k] * ang.sin() + im[k] * ang.cos());
            }
            acc / nf
        })
        .collect()
}

fn centered(f0: f64, f1: f64, f2: f64, h1: f64, h2: f64) -> f64 {
    -f0 * h2 / (h1 * (h1 + h2)) + f1 * (h2 - h1) / (h1 * h2) + f2 * h1 / (h2 * (h1 + h2))
}

fn lat_long_nodes(n_phi: usize, n_theta: usize, values: &[f64]) -> Vec<SphereNode> {
    let (z, wz) = gauss_legendre(n_phi);
    // descending z is ascending φ
    let phi: Vec<f64> = z.iter().map(|v| v.acos()).collect();
    let at = |i: usize, j: usize| values[i * n_theta + (j % n_theta)];
    let shift = n_theta / 2;
    let dtheta: Vec<Vec<f64>> = (0..n_phi)
        .into_par_iter()
        .map(|i| periodic_derivative(&values[i * n_theta..(i + 1) * n_theta]))
        .collect();
    let wt = 2.0 * PI / n_theta as f64;
    let mut nodes = Vec::with_capacity(n_phi * n_theta);
    for i in 0..n_phi {
        let s = phi[i].sin();
        for j in 0..n_theta {
            // φ ascends as i decreases
            let (lo, hi) = (i + 1 < n_phi, i > 0);
            let (p0, f0) = if lo {
                (phi[i + 1], at(i + 1, j))
            } else {
                // across the north pole: (φ, θ) ~ (-φ, θ + π)
                (-phi[i], at(i, j + shift))
            };
            let (p2, f2) = if hi {
                (phi[i - 1], at(i - 1, j))
            } else {
                (2.0 * PI - phi[i], at(i, j + shift))
            };
            let du_phi = centered(f0, at(i, j), f2, phi[i] - p0, p2 - phi[i]);
            let du_theta = dtheta[i][j];
            nodes.push(SphereNode {
                weight: wz[i] * wt,
                u: at(i, j),
                grad_sq: du_phi * du_phi + (du_theta / s).powi(2),
            });
        }
    }
    nodes
}

fn eval_callback(f: &SphereCallback, x: &[f64], weight: f64) -> SphereNode {
    let (u, g) = f(x);
    SphereNode {
        weight,
        u,
        grad_sq: tangential(x, &g),
    }
}

fn callback_nodes(n: usize, f: &SphereCallback, opts: &AngularOptions) -> Result<AngularSample> {
    let points: Vec<(Vec<f64>, f64)> = match n {
        2 => {
            let k = opts.circle_nodes;
            let w = 2.0 * PI / k as f64;
            (0..k)
                .map(|j| {
                    let t = w * j as f64;
                    (vec![t.cos(), t.sin()], w)
                })
                .collect()
        }
        3 => {
            let (z, wz) = gauss_legendre(opts.s2_phi);
            let nt = opts.s2_theta;
            let wt = 2.0 * PI / nt as f64;
            let mut pts = Vec::with_capacity(z.len() * nt);
            for (zi, wi) in z.iter().zip(&wz) {
                let s = (1.0 - zi * zi).sqrt();
                for j in 0..nt {
                    let t = wt * j as f64;
                    pts.push((vec![s * t.cos(), s * t.sin(), *zi], wi * wt));
                }
            }
            pts
        }
        4..=6 => hyperspherical_points(n, opts.per_angle),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let w = omega(n) / opts.mc_samples as f64;
            let pts: Vec<(Vec<f64>, f64)> = (0..opts.mc_samples)
                .map(|_| {
                    let mut x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    x.iter_mut().for_each(|v| *v /= norm);
                    (x, w)
                })
                .collect();
            let nodes: Vec<SphereNode> = pts.par_iter().map(|(x, w)| eval_callback(f, x, *w)).collect();
            check_positive(&nodes)?;
            return Ok(AngularSample {
                nodes,
                monte_carlo: true,
            });
        }
    };
    let nodes: Vec<SphereNode> = points.par_iter().map(|(x, w)| eval_callback(f, x, *w)).collect();
    check_positive(&nodes)?;
    Ok(AngularSample {
        nodes,
        monte_carlo: false,
    })
}

/// Tensor Gauss–Legendre in `φ_1..φ_{n-2}` (weights `sin^{n-1-k} φ_k`)
/// times a uniform rule in `θ`.
fn hyperspherical_points(n: usize, per_angle: usize) -> Vec<(Vec<f64>, f64)> {
    let (t, w) = gauss_legendre(per_angle);
    let phis: Vec<f64> = t.iter().map(|v| 0.5 * PI * (v + 1.0)).collect();
    let wphi: Vec<f64> = w.iter().map(|v| 0.5 * PI * v).collect();
    let n_theta = 2 * per_angle;
    let wt = 2.0 * PI / n_theta as f64;
    let angles = n - 2;
    let total = per_angle.pow(angles as u32) * n_theta;
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; angles];
    loop {
        let mut x = vec![0.0; n];
        let mut sprod = 1.0;
        let mut weight = wt;
        for (k, &ik) in idx.iter().enumerate() {
            let phi = phis[ik];
            x[k] = sprod * phi.cos();
            weight *= wphi[ik] * phi.sin().powi((angles - k) as i32);
            sprod *= phi.sin();
        }
        for j in 0..n_theta {
            let th = wt * j as f64;
            let mut y = x.clone();
            y[n - 2] = sprod * th.cos();
            y[n - 1] = sprod * th.sin();
            out.push((y, weight));
        }
        let mut k = 0;
        loop {
            if k == angles {
                return out;
            }
            idx[k] += 1;
            if idx[k] < per_angle {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_weight(s: &AngularSample) -> f64 {
        s.integrate(|_| 1.0).0
    }

    #[test]
    fn rules_integrate_constants() {
        let opts = AngularOptions {
            per_angle: 14,
            mc_samples: 20_000,
            ..Default::default()
        };
        for n in 2..=8 {
            let s = sample(&SphereFunction::constant(n, 1.0).unwrap(), &opts).unwrap();
            let w = total_weight(&s);
            assert!((w / omega(n) - 1.0).abs() < 1e-10, "n={n}: {w}");
            assert_eq!(s.monte_carlo, n > 6);
        }
    }

    #[test]
    fn rules_integrate_polynomials() {
        // ∫ x_1² dS = ω_n / n
        let opts = AngularOptions {
            per_angle: 14,
            ..Default::default()
        };
        for n in 2..=6 {
            let f = SphereFunction::callback(
                n,
                Arc::new(|x: &[f64]| (1.0 + x[0] * x[0], vec![0.0; x.len()])),
            )
            .unwrap();
            let s = sample(&f, &opts).unwrap();
            let got = s.integrate(|nd| nd.u - 1.0).0;
            assert!((got / (omega(n) / n as f64) - 1.0).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn monte_carlo_reports_standard_error() {
        let opts = AngularOptions {
            mc_samples: 50_000,
            ..Default::default()
        };
        let n = 7;
        let f = SphereFunction::callback(n, Arc::new(|x: &[f64]| (1.0 + x[0] * x[0], vec![0.0; x.len()])))
            .unwrap();
        let s = sample(&f, &opts).unwrap();
        let (v, se) = s.integrate(|nd| nd.u);
        let se = se.unwrap();
        let exact = omega(n) * (1.0 + 1.0 / n as f64);
        assert!(se > 0.0 && (v - exact).abs() < 5.0 * se, "{v} {exact} {se}");
        // same seed, same sample
        assert_eq!(sample(&f, &opts).unwrap(), s);
    }

    #[test]
    fn fourier_gradient() {
        let f = SphereFunction::fourier(2.0, vec![0.3], vec![0.0, 0.1]);
        let s = sample(&f, &AngularOptions::default()).unwrap();
        let nd = s.nodes[10];
        let t = 2.0 * PI * 10.0 / 512.0;
        let d = -0.3 * t.sin() + 0.2 * (2.0 * t).cos();
        assert!((nd.grad_sq - d * d).abs() < 1e-14);
        assert!(matches!(
            sample(&SphereFunction::fourier(0.1, vec![0.5], vec![]), &AngularOptions::default()),
            Err(Error::NonPositiveU(_))
        ));
    }

    #[test]
    fn lat_long_matches_callback() {
        // u = 1 + 0.1 x₁ + 0.05 x₃²
        let ll = SphereFunction::lat_long(96, 64, |p, t| 1.0 + 0.1 * p.sin() * t.cos() + 0.05 * p.cos().powi(2))
            .unwrap();
        let cb = SphereFunction::callback(
            3,
            Arc::new(|x: &[f64]| (1.0 + 0.1 * x[0] + 0.05 * x[2] * x[2], vec![0.1, 0.0, 0.1 * x[2]])),
        )
        .unwrap();
        let a = sample(&ll, &AngularOptions::default()).unwrap();
        let b = sample(&cb, &AngularOptions::default()).unwrap();
        let ga = a.integrate(|nd| nd.grad_sq).0;
        let gb = b.integrate(|nd| nd.grad_sq).0;
        assert!((ga / gb - 1.0).abs() < 1e-3, "{ga} {gb}");
        assert!(SphereFunction::lat_long(8, 7, |_, _| 1.0).is_err());
    }

    #[test]
    fn spectral_derivative_of_trig() {
        let n = 16;
        let f: Vec<f64> = (0..n).map(|j| (3.0 * 2.0 * PI * j as f64 / n as f64).sin()).collect();
        let d = periodic_derivative(&f);
        for j in 0..n {
            let t = 2.0 * PI * j as f64 / n as f64;
            assert!((d[j] - 3.0 * (3.0 * t).cos()).abs() < 1e-12);
        }
    }
}
