//! Central difference stencils used by the identity checks.

/// Five-point central first derivative, `O(h⁴)`.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Five-point central second derivative, `O(h⁴)`.
pub fn second_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h))
        / (12.0 * h * h)
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_gap(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs()).max(floor);
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_exp() {
        let x = 0.7f64;
        assert!((derivative(f64::exp, x, 1e-3) - x.exp()).abs() < 1e-12);
        assert!((second_derivative(f64::exp, x, 1e-3) - x.exp()).abs() < 1e-9);
    }

    #[test]
    fn relative_gap_floor() {
        assert_eq!(relative_gap(0.0, 0.0, 0.0), 0.0);
        assert!((relative_gap(1e-12, 0.0, 1.0) - 1e-12).abs() < 1e-24);
        assert!((relative_gap(2.0, 1.0, 0.0) - 0.5).abs() < 1e-15);
    }
}
