//! Limits at infinity from probe sequences, by Aitken's Δ² process.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    pub converged: bool,
    /// One entry per consecutive triple; `None` where the ratio test failed.
    pub estimates: Vec<Option<f64>>,
}

/// Aitken Δ² on a triple. Returns `None` when the differences do not shrink
/// geometrically. Triples that are stationary up to rounding return the
/// last value.
pub fn aitken(x0: f64, x1: f64, x2: f64) -> Option<f64> {
    let d1 = x1 - x0;
    let d2 = x2 - x1;
    let noise = 64.0 * f64::EPSILON * x0.abs().max(x1.abs()).max(x2.abs());
    if d1.abs() <= noise && d2.abs() <= noise {
        return Some(x2);
    }
    if d1.abs() <= noise || (d2 / d1).abs() >= 1.0 {
        return None;
    }
    let denom = d2 - d1;
    Some(x2 - d2 * d2 / denom)
}

/// Extrapolates `seq` assuming geometrically decaying corrections.
/// Converged when the last two triple estimates agree within
/// `tol * max(1, |estimate|)`.
pub fn extrapolate_limit(seq: &[f64], tol: f64) -> Extrapolation {
    let estimates: Vec<Option<f64>> = seq.windows(3).map(|w| aitken(w[0], w[1], w[2])).collect();
    let last = seq.last().copied().unwrap_or(f64::NAN);
    let (value, converged) = match estimates.as_slice() {
        [.., Some(a), Some(b)] => (*b, (a - b).abs() <= tol * b.abs().max(1.0)),
        [.., Some(b)] => (*b, false),
        _ => (last, false),
    };
    Extrapolation {
        value,
        converged,
        estimates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sequences_are_exact() {
        let seq: Vec<f64> = (0..6).map(|k| 3.0 + 0.5f64.powi(k)).collect();
        let e = extrapolate_limit(&seq, 1e-10);
        assert!(e.converged);
        assert!((e.value - 3.0).abs() < 1e-13);
    }

    #[test]
    fn divergent_sequence_fails_ratio_test() {
        let seq = [1.0, 2.0, 4.0, 8.0];
        let e = extrapolate_limit(&seq, 1e-6);
        assert!(!e.converged);
        assert_eq!(e.value, 8.0);
        assert!(aitken(1.0, 2.0, 4.0).is_none());
    }

    #[test]
    fn stationary_sequence() {
        let e = extrapolate_limit(&[1.0, 1.0, 1.0, 1.0], 1e-6);
        assert!(e.converged);
        assert_eq!(e.value, 1.0);
    }
}
