//! Warping functions and manifold specifications.
//!
//! A rotationally symmetric model `dr² + ψ(r)² g_{S^{n-1}}` is fully described
//! by its dimension and warping function `ψ`. Presets carry closed-form
//! derivatives plus overflow-free log-space ratios; custom warping functions
//! are supplied as callbacks, optionally with finite-difference derivatives.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Scalar callback used for custom warping functions.
pub type Callback = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Family of a warping function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WarpKind {
    Euclidean,
    Hyperbolic,
    /// `r^c · exp(alpha r²)`
    PowerExp { c: f64, alpha: f64 },
    /// `r^c`
    Power { c: f64 },
    /// `sinh r + a r² e^{r/2}`
    SinhPlusBump { a: f64 },
    Custom,
}

impl WarpKind {
    pub fn name(&self) -> &'static str {
        match self {
            WarpKind::Euclidean => "euclidean",
            WarpKind::Hyperbolic => "hyperbolic",
            WarpKind::PowerExp { .. } => "power_exp",
            WarpKind::Power { .. } => "power",
            WarpKind::SinhPlusBump { .. } => "sinh_plus_bump",
            WarpKind::Custom => "custom",
        }
    }
}

/// How `ψ'` and `ψ''` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DerivativeMode {
    Analytic,
    /// Finite differences with a fixed step, or the default `1e-5·max(1, r)`.
    FiniteDifference { h: Option<f64> },
}

/// `ψ` and its first two derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub psi: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Overflow-free description of `ψ` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogJet {
    /// `ln ψ(r)`
    pub log_psi: f64,
    /// `ψ'/ψ`
    pub ratio1: f64,
    /// `ψ''/ψ`
    pub ratio2: f64,
}

#[derive(Clone)]
struct CustomFns {
    psi: Callback,
    d1: Option<Callback>,
    d2: Option<Callback>,
}

/// A warping function `ψ: [0, ∞) → [0, ∞)` with derivative access.
#[derive(Clone)]
pub struct WarpingFunction {
    kind: WarpKind,
    mode: DerivativeMode,
    label: String,
    custom: Option<CustomFns>,
}

impl fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingFunction")
            .field("kind", &self.kind)
            .field("mode", &self.mode)
            .field("label", &self.label)
            .finish()
    }
}

/// Default finite-difference step at radius `r`.
pub fn default_step(r: f64) -> f64 {
    1e-5 * r.abs().max(1.0)
}

/// First and second derivative of `f` at `r` by finite differences.
///
/// The first derivative uses step `h`: central 5-point when `r - 2h >= 0`,
/// forward 4-point otherwise. Rounding in a second difference grows like
/// `eps/h²`, so the second derivative uses `10 h` with a fourth-order
/// stencil (central 5-point, or forward 6-point near 0).
pub fn fd_derivatives<F: Fn(f64) -> f64>(f: F, r: f64, h: f64) -> Result<(f64, f64)> {
    if !(h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let d1 = if r - 2.0 * h >= 0.0 {
        (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h)
    } else {
        (-11.0 * f(r) + 18.0 * f(r + h) - 9.0 * f(r + 2.0 * h) + 2.0 * f(r + 3.0 * h)) / (6.0 * h)
    };
    let s = 10.0 * h;
    let d2 = if r - 2.0 * s >= 0.0 {
        (-f(r - 2.0 * s) + 16.0 * f(r - s) - 30.0 * f(r) + 16.0 * f(r + s) - f(r + 2.0 * s)) / (12.0 * s * s)
    } else {
        let c = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
        c.iter().enumerate().map(|(k, ck)| ck * f(r + k as f64 * s)).sum::<f64>() / (12.0 * s * s)
    };
    Ok((d1, d2))
}

// coef * r^p with the convention 0 * anything = 0 (keeps r = 0 finite).
fn term(coef: f64, r: f64, p: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else {
        coef * r.powf(p)
    }
}

impl WarpingFunction {
    pub fn euclidean() -> Self {
        Self::preset_of(WarpKind::Euclidean)
    }

    pub fn hyperbolic() -> Self {
        Self::preset_of(WarpKind::Hyperbolic)
    }

    pub fn power(c: f64) -> Self {
        Self::preset_of(WarpKind::Power { c })
    }

    pub fn power_exp(c: f64, alpha: f64) -> Result<Self> {
        if alpha < 0.0 {
            return Err(Error::NonpositiveParameter {
                name: "alpha",
                value: alpha,
            });
        }
        Ok(Self::preset_of(WarpKind::PowerExp { c, alpha }))
    }

    pub fn sinh_plus_bump(a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::NonpositiveParameter { name: "A", value: a });
        }
        Ok(Self::preset_of(WarpKind::SinhPlusBump { a }))
    }

    fn preset_of(kind: WarpKind) -> Self {
        let label = match kind {
            WarpKind::Euclidean => "euclidean".to_string(),
            WarpKind::Hyperbolic => "hyperbolic".to_string(),
            WarpKind::PowerExp { c, alpha } => format!("power_exp({c},{alpha})"),
            WarpKind::Power { c } => format!("power({c})"),
            WarpKind::SinhPlusBump { a } => format!("sinh_plus_bump({a})"),
            WarpKind::Custom => "custom".to_string(),
        };
        Self {
            kind,
            mode: DerivativeMode::Analytic,
            label,
            custom: None,
        }
    }

    /// Custom warping function with closed-form derivatives.
    pub fn custom(label: impl Into<String>, psi: Callback, d1: Callback, d2: Callback) -> Self {
        Self {
            kind: WarpKind::Custom,
            mode: DerivativeMode::Analytic,
            label: label.into(),
            custom: Some(CustomFns {
                psi,
                d1: Some(d1),
                d2: Some(d2),
            }),
        }
    }

    /// Custom warping function whose derivatives come from finite differences.
    pub fn custom_fd(label: impl Into<String>, psi: Callback, h: Option<f64>) -> Self {
        Self {
            kind: WarpKind::Custom,
            mode: DerivativeMode::FiniteDifference { h },
            label: label.into(),
            custom: Some(CustomFns {
                psi,
                d1: None,
                d2: None,
            }),
        }
    }

    pub fn kind(&self) -> WarpKind {
        self.kind
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, r: f64) -> f64 {
        match self.kind {
            WarpKind::Euclidean => r,
            WarpKind::Hyperbolic => r.sinh(),
            WarpKind::Power { c } => r.powf(c),
            WarpKind::PowerExp { c, alpha } => r.powf(c) * (alpha * r * r).exp(),
            WarpKind::SinhPlusBump { a } => r.sinh() + a * r * r * (0.5 * r).exp(),
            WarpKind::Custom => (self.custom_fns().psi)(r),
        }
    }

    fn custom_fns(&self) -> &CustomFns {
        self.custom.as_ref().expect("custom warping function without callbacks")
    }

    fn fd_step(&self, r: f64) -> f64 {
        match self.mode {
            DerivativeMode::FiniteDifference { h: Some(h) } => h,
            _ => default_step(r),
        }
    }

    /// `ψ(r)`, `ψ'(r)`, `ψ''(r)`.
    pub fn jet(&self, r: f64) -> Jet {
        match self.kind {
            WarpKind::Euclidean => Jet {
                psi: r,
                d1: 1.0,
                d2: 0.0,
            },
            WarpKind::Hyperbolic => Jet {
                psi: r.sinh(),
                d1: r.cosh(),
                d2: r.sinh(),
            },
            WarpKind::Power { c } => Jet {
                psi: r.powf(c),
                d1: term(c, r, c - 1.0),
                d2: term(c * (c - 1.0), r, c - 2.0),
            },
            WarpKind::PowerExp { c, alpha } => {
                let e = (alpha * r * r).exp();
                Jet {
                    psi: r.powf(c) * e,
                    d1: e * (term(c, r, c - 1.0) + term(2.0 * alpha, r, c + 1.0)),
                    d2: e
                        * (term(c * (c - 1.0), r, c - 2.0)
                            + term(2.0 * alpha * (2.0 * c + 1.0), r, c)
                            + term(4.0 * alpha * alpha, r, c + 2.0)),
                }
            }
            WarpKind::SinhPlusBump { a } => {
                let e = (0.5 * r).exp();
                Jet {
                    psi: r.sinh() + a * r * r * e,
                    d1: r.cosh() + a * (2.0 * r + 0.5 * r * r) * e,
                    d2: r.sinh() + a * (2.0 + 2.0 * r + 0.25 * r * r) * e,
                }
            }
            WarpKind::Custom => {
                let fns = self.custom_fns();
                let psi = (fns.psi)(r);
                match (&fns.d1, &fns.d2) {
                    (Some(d1), Some(d2)) => Jet {
                        psi,
                        d1: d1(r),
                        d2: d2(r),
                    },
                    _ => {
                        let h = self.fd_step(r);
                        let (d1, d2) = fd_derivatives(|t| (fns.psi)(t), r, h)
                            .unwrap_or((f64::NAN, f64::NAN));
                        Jet { psi, d1, d2 }
                    }
                }
            }
        }
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.jet(r).d1
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.jet(r).d2
    }

    /// `ψ'(r) - 1`, evaluated without cancellation for the presets.
    pub fn d1_minus_one(&self, r: f64) -> f64 {
        match self.kind {
            WarpKind::Euclidean => 0.0,
            WarpKind::Hyperbolic => {
                let s = (0.5 * r).sinh();
                2.0 * s * s
            }
            WarpKind::PowerExp { c, alpha } if c == 1.0 => {
                let q = alpha * r * r;
                q.exp_m1() * (1.0 + 2.0 * q) + 2.0 * q
            }
            WarpKind::SinhPlusBump { a } => {
                let s = (0.5 * r).sinh();
                2.0 * s * s + a * (2.0 * r + 0.5 * r * r) * (0.5 * r).exp()
            }
            _ => self.jet(r).d1 - 1.0,
        }
    }

    /// `ln ψ(r)`.
    pub fn log_value(&self, r: f64) -> f64 {
        self.log_jet(r).log_psi
    }

    /// Log-space description of `ψ` that stays finite where `ψ` overflows.
    pub fn log_jet(&self, r: f64) -> LogJet {
        match self.kind {
            WarpKind::Euclidean => LogJet {
                log_psi: r.ln(),
                ratio1: 1.0 / r,
                ratio2: 0.0,
            },
            WarpKind::Hyperbolic => LogJet {
                // sinh r = e^r (1 - e^{-2r}) / 2
                log_psi: r + (-0.5 * (-2.0 * r).exp_m1()).ln(),
                ratio1: 1.0 / r.tanh(),
                ratio2: 1.0,
            },
            WarpKind::Power { c } => LogJet {
                log_psi: c * r.ln(),
                ratio1: c / r,
                ratio2: c * (c - 1.0) / (r * r),
            },
            WarpKind::PowerExp { c, alpha } => {
                let q = c / r + 2.0 * alpha * r;
                LogJet {
                    log_psi: c * r.ln() + alpha * r * r,
                    ratio1: q,
                    ratio2: q * q - c / (r * r) + 2.0 * alpha,
                }
            }
            WarpKind::SinhPlusBump { a } => {
                // factor e^r out of every term
                let e2 = (-2.0 * r).exp();
                let eh = (-0.5 * r).exp();
                let den = -0.5 * (-2.0 * r).exp_m1() + a * r * r * eh;
                LogJet {
                    log_psi: r + den.ln(),
                    ratio1: (0.5 * (1.0 + e2) + a * (2.0 * r + 0.5 * r * r) * eh) / den,
                    ratio2: (-0.5 * (-2.0 * r).exp_m1() + a * (2.0 + 2.0 * r + 0.25 * r * r) * eh)
                        / den,
                }
            }
            WarpKind::Custom => {
                let j = self.jet(r);
                LogJet {
                    log_psi: j.psi.ln(),
                    ratio1: j.d1 / j.psi,
                    ratio2: j.d2 / j.psi,
                }
            }
        }
    }
}

/// Build a preset by name: `euclidean`, `hyperbolic`, `power_exp` (c, alpha),
/// `power` (c), `sinh_plus_bump` (A).
pub fn make_preset(kind: &str, params: &[f64]) -> Result<WarpingFunction> {
    let normalized = kind.trim().to_ascii_lowercase().replace(['-', ' '], "_");
    let arity = |expected: usize| -> Result<()> {
        if params.len() == expected {
            Ok(())
        } else {
            Err(Error::BadArity {
                kind: normalized.clone(),
                expected,
                got: params.len(),
            })
        }
    };
    match normalized.as_str() {
        "euclidean" => {
            arity(0)?;
            Ok(WarpingFunction::euclidean())
        }
        "hyperbolic" => {
            arity(0)?;
            Ok(WarpingFunction::hyperbolic())
        }
        "power" => {
            arity(1)?;
            Ok(WarpingFunction::power(params[0]))
        }
        "power_exp" | "powerexp" => {
            arity(2)?;
            WarpingFunction::power_exp(params[0], params[1])
        }
        "sinh_plus_bump" | "sinhplusbump" => {
            arity(1)?;
            WarpingFunction::sinh_plus_bump(params[0])
        }
        _ => Err(Error::UnknownKind(kind.to_string())),
    }
}

/// Result of checking `ψ(0) = 0`, `ψ'(0) = 1` and positivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleReport {
    pub psi_at_zero: f64,
    pub dpsi_at_zero: f64,
    pub positivity_ok: bool,
    pub valid: bool,
}

/// Checks the pole conditions of orders 0 and 1 and scans positivity on 200
/// log-spaced radii in `[1e-6, 1e3]`.
pub fn validate_pole(psi: &WarpingFunction) -> Result<PoleReport> {
    let psi_at_zero = psi.value(0.0);
    if psi_at_zero.is_nan() {
        return Err(Error::EvaluationFailure { r: 0.0 });
    }
    let dpsi_at_zero = match psi.mode() {
        DerivativeMode::Analytic => psi.d1(0.0),
        DerivativeMode::FiniteDifference { .. } => fd_derivatives(|t| psi.value(t), 0.0, 1e-6)?.0,
    };
    if dpsi_at_zero.is_nan() {
        return Err(Error::EvaluationFailure { r: 0.0 });
    }
    let positivity_ok = log_grid(1e-6, 1e3, 200).into_iter().all(|r| {
        let v = psi.value(r);
        v > 0.0 || (v.is_nan() && psi.log_value(r).is_finite())
    });
    let valid = psi_at_zero.abs() <= 1e-12 && (dpsi_at_zero - 1.0).abs() <= 1e-10 && positivity_ok;
    Ok(PoleReport {
        psi_at_zero,
        dpsi_at_zero,
        positivity_ok,
        valid,
    })
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Tri-state outcome of the convexity scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CartanHadamard {
    Yes,
    No,
    Unchecked,
}

/// Dimension plus warping function.
#[derive(Debug, Clone)]
pub struct ManifoldSpec {
    n: usize,
    psi: WarpingFunction,
    pole: PoleReport,
    cartan_hadamard: CartanHadamard,
}

impl ManifoldSpec {
    pub fn new(n: usize, psi: WarpingFunction) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        let pole = validate_pole(&psi)?;
        Ok(Self {
            n,
            psi,
            pole,
            cartan_hadamard: CartanHadamard::Unchecked,
        })
    }

    /// Runs [`convexity_scan`] and records the outcome.
    pub fn scanned(mut self, r_max: f64, n_pts: usize, tol: f64) -> Result<Self> {
        self.cartan_hadamard = convexity_scan(&self, r_max, n_pts, tol)?;
        Ok(self)
    }

    /// Default scan: 2000 points on `[0, 50]`, tolerance `1e-12`.
    pub fn with_default_scan(self) -> Result<Self> {
        self.scanned(50.0, 2000, 1e-12)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `n - 1` as a float.
    pub fn m(&self) -> f64 {
        (self.n - 1) as f64
    }

    pub fn psi(&self) -> &WarpingFunction {
        &self.psi
    }

    pub fn pole(&self) -> PoleReport {
        self.pole
    }

    pub fn pole_valid(&self) -> bool {
        self.pole.valid
    }

    pub fn cartan_hadamard(&self) -> CartanHadamard {
        self.cartan_hadamard
    }

    pub fn require_pole_valid(&self) -> Result<()> {
        if self.pole.valid {
            Ok(())
        } else {
            Err(Error::PoleInvalid {
                psi_at_zero: self.pole.psi_at_zero,
                dpsi_at_zero: self.pole.dpsi_at_zero,
            })
        }
    }

    /// Short human-readable name, e.g. `hyperbolic(n=3)`.
    pub fn name(&self) -> String {
        format!("{}(n={})", self.psi.label(), self.n)
    }
}

/// Classifies `ψ'' >= -tol` on `n_pts` uniform points of `[0, r_max]`.
///
/// For `r > 0` the sign test is applied to `ψ''/ψ`, which has the same sign
/// as `ψ''` and stays finite where `ψ` overflows.
pub fn convexity_scan(m: &ManifoldSpec, r_max: f64, n_pts: usize, tol: f64) -> Result<CartanHadamard> {
    if !(r_max > 0.0) {
        return Err(Error::DomainError(format!("r_max must be positive, got {r_max}")));
    }
    if n_pts < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: n_pts,
        });
    }
    for i in 0..n_pts {
        let r = r_max * i as f64 / (n_pts - 1) as f64;
        let curvature = if r == 0.0 {
            m.psi.d2(0.0)
        } else {
            let lj = m.psi.log_jet(r);
            if lj.ratio2.is_finite() {
                lj.ratio2
            } else {
                m.psi.d2(r)
            }
        };
        if curvature.is_nan() {
            return Err(Error::EvaluationFailure { r });
        }
        if curvature < -tol {
            return Ok(CartanHadamard::No);
        }
    }
    Ok(CartanHadamard::Yes)
}
