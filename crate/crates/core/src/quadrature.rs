//! One-dimensional quadrature.
//!
//! Globally adaptive Gauss–Kronrod (7/15) bisection on finite intervals, a
//! panel-marching driver for integrands concentrated at one end (or living on
//! a half line), and Gauss–Legendre node generation for tensorised angular
//! rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the 7-point rule embedded at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default evaluation budget for one adaptive integral.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Stopping rule `err <= abs + rel * |I|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    /// Tight tolerance used internally for smooth integrands.
    pub const fn tight() -> Self {
        Self::new(1e-300, 1e-13)
    }

    fn target(&self, value: f64) -> f64 {
        self.abs + self.rel * value.abs()
    }
}

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Single 15-point Kronrod panel: returns (kronrod estimate, |K - G|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets `tol` or `budget` evaluations are spent.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: Tolerance,
    budget: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = gk15(&f, a, b);
    let mut evaluations = 15;
    if !value.is_finite() {
        return Err(Error::EvaluationFailure { r: 0.5 * (a + b) });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    // Panels narrower than this cannot be split meaningfully.
    let min_width = (b - a).abs() * 1e-15;
    while total_err > tol.target(total) {
        if evaluations + 30 > budget {
            return Err(Error::QuadratureNonConvergence {
                budget,
                error: total_err,
            });
        }
        let Some(worst) = heap.pop() else { break };
        if (worst.b - worst.a).abs() <= min_width {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        evaluations += 30;
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::EvaluationFailure { r: mid });
        }
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(Integral {
        value,
        error,
        evaluations,
    })
}

/// How a panel march ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarchEnd {
    /// Reached the far endpoint.
    Endpoint,
    /// Contributions became negligible before the far endpoint.
    Negligible,
}

/// Result of [`march`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct March {
    pub value: f64,
    pub error: f64,
    pub end: MarchEnd,
    pub panels: usize,
}

/// Integrates `f` from `start` towards `stop` (which may be infinite) in
/// panels of geometrically growing width, starting at `first_width`.
///
/// Marching stops at `stop`, or once `value(panel)` stays below
/// `1e-16 * |sum|` for three consecutive panels. Returns `TailDivergence`
/// after `max_panels` panels without either event.
pub fn march<F: Fn(f64) -> f64>(
    f: F,
    start: f64,
    stop: f64,
    first_width: f64,
    max_panels: usize,
) -> Result<March> {
    let dir = if stop >= start { 1.0 } else { -1.0 };
    let mut width = first_width.abs().max(f64::MIN_POSITIVE);
    let mut at = start;
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut quiet = 0;
    for panel in 0..max_panels {
        let mut next = at + dir * width;
        let last = (dir > 0.0 && next >= stop) || (dir < 0.0 && next <= stop);
        if last {
            next = stop;
        }
        let part = integrate(&f, at.min(next), at.max(next), Tolerance::tight(), DEFAULT_BUDGET)?;
        sum += part.value;
        err += part.error;
        if last {
            return Ok(March {
                value: sum,
                error: err,
                end: MarchEnd::Endpoint,
                panels: panel + 1,
            });
        }
        if part.value.abs() <= 1e-16 * sum.abs() {
            quiet += 1;
            if quiet >= 3 {
                return Ok(March {
                    value: sum,
                    error: err,
                    end: MarchEnd::Negligible,
                    panels: panel + 1,
                });
            }
        } else {
            quiet = 0;
        }
        at = next;
        width *= 2.0;
    }
    Err(Error::TailDivergence(start))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending nodes.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}
