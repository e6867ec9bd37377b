use std::f64::consts::PI;

use proptest::prelude::*;
use warped::geometry::{ball_volume, omega, small_ball_expansion};
use warped::isoperimetry::{
    classify_monotonicity, quotient_i, stability_margin, Monotonicity,
};
use warped::numdiff::derivative;
use warped::profile::RadialProfile;
use warped::quadrature::{integrate, Tolerance, DEFAULT_BUDGET};
use warped::radial_graph::{cii_probe_with, graph_perimeter, graph_volume, matched_ball_radius};
use warped::spectral::{
    ball_lambda1_numeric, g_monotone_check, liouville_transform_check, volume_bound_check,
    TestFunction,
};
use warped::sphere::{AngularOptions, SphereFunction};
use warped::warp::{convexity_scan, default_step, fd_derivatives, validate_pole};
use warped::{make_preset, CartanHadamard, ManifoldSpec, WarpingFunction};

fn presets() -> Vec<WarpingFunction> {
    vec![
        WarpingFunction::euclidean(),
        WarpingFunction::hyperbolic(),
        WarpingFunction::power_exp(1.0, 0.25).unwrap(),
        WarpingFunction::power_exp(1.5, 0.5).unwrap(),
        WarpingFunction::sinh_plus_bump(2.0).unwrap(),
        WarpingFunction::power(2.0),
    ]
}

fn spec(n: usize, psi: WarpingFunction) -> ManifoldSpec {
    ManifoldSpec::new(n, psi).unwrap().with_default_scan().unwrap()
}

fn pole_valid_specs() -> Vec<ManifoldSpec> {
    let mut out = Vec::new();
    for n in [2, 3] {
        for psi in presets() {
            let m = spec(n, psi);
            if m.pole_valid() {
                out.push(m);
            }
        }
    }
    out
}

fn ch_specs() -> Vec<ManifoldSpec> {
    pole_valid_specs()
        .into_iter()
        .filter(|m| m.cartan_hadamard() == CartanHadamard::Yes)
        .collect()
}

fn g_increasing_specs() -> Vec<ManifoldSpec> {
    pole_valid_specs()
        .into_iter()
        .filter(|m| g_monotone_check(m, 30.0, 1e-7).unwrap().is_nondecreasing())
        .collect()
}

#[test]
fn space_forms_have_valid_poles() {
    assert!(validate_pole(&WarpingFunction::hyperbolic()).unwrap().valid);
    assert!(validate_pole(&WarpingFunction::euclidean()).unwrap().valid);
    assert!(!validate_pole(&WarpingFunction::power(2.0)).unwrap().valid);
}

#[test]
fn g_increasing_family_is_not_empty() {
    let names: Vec<String> = g_increasing_specs().iter().map(|m| m.name()).collect();
    assert!(names.iter().any(|s| s.starts_with("hyperbolic")), "{names:?}");
    assert!(names.len() >= 4, "{names:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn finite_differences_match_analytic_derivatives(idx in 0usize..6, r in 0.05f64..20.0) {
        let psi = &presets()[idx];
        let (d1, d2) = fd_derivatives(|t| psi.value(t), r, default_step(r)).unwrap();
        let jet = psi.jet(r);
        let scale = jet.psi.abs().max(jet.d1.abs()).max(jet.d2.abs());
        prop_assert!((d1 - jet.d1).abs() <= 1e-6 * scale, "{} r={r}: {d1} vs {}", psi.label(), jet.d1);
        prop_assert!((d2 - jet.d2).abs() <= 1e-6 * scale, "{} r={r}: {d2} vs {}", psi.label(), jet.d2);
    }

    #[test]
    fn convexity_scan_is_monotone_in_tol(idx in 0usize..6, n in 2usize..4, t in 1e-12f64..1e-3, factor in 1.0f64..100.0) {
        let m = ManifoldSpec::new(n, presets()[idx].clone()).unwrap();
        let a = convexity_scan(&m, 30.0, 200, t).unwrap();
        let b = convexity_scan(&m, 30.0, 200, t * factor).unwrap();
        if a == CartanHadamard::Yes {
            prop_assert_eq!(b, CartanHadamard::Yes);
        }
    }

    #[test]
    fn volume_derivative_is_perimeter(idx in 0usize..10, r in 0.05f64..15.0) {
        let specs = pole_valid_specs();
        let m = &specs[idx % specs.len()];
        let h = 1e-4 * r;
        let dv = derivative(|t| ball_volume(m, t).unwrap().volume, r, h);
        let p = ball_volume(m, r).unwrap().perimeter;
        prop_assert!((dv / p - 1.0).abs() < 1e-6, "{} r={r}: {dv} vs {p}", m.name());
    }

    #[test]
    fn hyperbolic_volumes_match_closed_forms(r in 0.01f64..20.0) {
        let v2 = ball_volume(&spec(2, WarpingFunction::hyperbolic()), r).unwrap().volume;
        let exact2 = 2.0 * PI * (r.cosh() - 1.0);
        prop_assert!((v2 / exact2 - 1.0).abs() < 1e-9, "n=2 r={r}: {v2} vs {exact2}");
        let v3 = ball_volume(&spec(3, WarpingFunction::hyperbolic()), r).unwrap().volume;
        let exact3 = PI * ((2.0 * r).sinh() - 2.0 * r);
        prop_assert!((v3 / exact3 - 1.0).abs() < 1e-9, "n=3 r={r}: {v3} vs {exact3}");
    }

    #[test]
    fn small_ball_expansion_is_third_order(n in 2usize..5, eps in 0.05f64..0.2) {
        let m = spec(n, WarpingFunction::hyperbolic());
        let err = |e: f64| {
            let approx = small_ball_expansion(&m, 1.0, e).unwrap().vol_approx;
            (approx / ball_volume(&m, e).unwrap().volume - 1.0).abs()
        };
        let ratio = err(eps) / err(0.5 * eps);
        prop_assert!(ratio >= 7.0, "n={n} eps={eps}: ratio {ratio}");
    }

    #[test]
    fn isoperimetric_ratio_dominates_euclidean(idx in 0usize..10, r in 1e-3f64..30.0) {
        let specs = ch_specs();
        let m = &specs[idx % specs.len()];
        let n = m.dim() as f64;
        let i = quotient_i(m, r).unwrap();
        prop_assert!(i >= n / r * (1.0 - 1e-8), "{} r={r}: {i} < {}", m.name(), n / r);
    }

    #[test]
    fn ball_eigenvalue_decreases_with_radius(idx in 0usize..10, r in 0.3f64..5.0, grow in 1.05f64..2.0) {
        let specs = pole_valid_specs();
        let m = &specs[idx % specs.len()];
        let a = ball_lambda1_numeric(m, r, 400).unwrap().value;
        let b = ball_lambda1_numeric(m, r * grow, 400).unwrap().value;
        prop_assert!(b < a, "{} r={r}: {a} then {b}", m.name());
    }

    #[test]
    fn monotonicity_report_is_consistent(values in prop::collection::vec(-10.0f64..10.0, 3..40)) {
        let grid: Vec<f64> = (0..values.len()).map(|i| 1.0 + i as f64).collect();
        let p = RadialProfile::new("v", grid, values).unwrap();
        let rep = classify_monotonicity(&p, 1e-7).unwrap();
        prop_assert_eq!(rep.classification == Monotonicity::NonMonotone, !rep.sign_changes.is_empty());
        if rep.classification == Monotonicity::Constant {
            let max = p.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = p.values.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(max - min <= 1e-7 * (1.0 + max.abs()));
        }
    }

    #[test]
    fn matched_ball_radius_inverts_volume(idx in 0usize..10, r in 0.05f64..20.0) {
        let specs = pole_valid_specs();
        let m = &specs[idx % specs.len()];
        let v = ball_volume(m, r).unwrap().volume;
        let rho = matched_ball_radius(m, v).unwrap();
        let back = ball_volume(m, rho).unwrap().volume;
        prop_assert!((back / v - 1.0).abs() < 1e-10, "{} r={r}: {rho}", m.name());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn stability_margin_forms_agree(idx in 0usize..10, r in 1e-3f64..50.0) {
        let specs = pole_valid_specs();
        let m = &specs[idx % specs.len()];
        let s = stability_margin(m, r).unwrap();
        prop_assert!(s.disagreement() <= 1e-10, "{} r={r}: {:?}", m.name(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn volume_bound_holds_on_random_annuli(idx in 0usize..10, a in 0.0f64..1.0, b in 0.0f64..1.0, r in 0.5f64..20.0) {
        let specs = g_increasing_specs();
        let m = &specs[idx % specs.len()];
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        let vb = volume_bound_check(m, r, lo * r, hi * r).unwrap();
        prop_assert!(vb.holds, "{} [{}, {}]: {:?}", m.name(), lo * r, hi * r, vb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn liouville_identity_holds_for_random_bumps(a in 0.05f64..10.0, w in 0.1f64..10.0) {
        for m in pole_valid_specs() {
            let check = liouville_transform_check(&m, &TestFunction::bump(a, a + w), 30.0).unwrap();
            let rel = (check.lhs - check.rhs).abs() / check.lhs.abs().max(check.rhs.abs());
            prop_assert!(rel < 1e-7, "{} ({a}, {}): {:?}", m.name(), a + w, check);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn polar_perimeter_matches_arc_length(c in prop::collection::vec(-0.15f64..0.15, 6), r0 in 0.5f64..3.0) {
        let m = spec(2, WarpingFunction::euclidean());
        let (a, b) = (c[..3].to_vec(), c[3..].to_vec());
        let u = SphereFunction::fourier(r0, a.clone(), b.clone());
        let eval = |t: f64| {
            let mut v = r0;
            let mut d = 0.0;
            for k in 0..3 {
                let kf = (k + 1) as f64;
                v += a[k] * (kf * t).cos() + b[k] * (kf * t).sin();
                d += kf * (b[k] * (kf * t).cos() - a[k] * (kf * t).sin());
            }
            (v, d)
        };
        let oracle = integrate(
            |t| {
                let (v, d) = eval(t);
                (v * v + d * d).sqrt()
            },
            0.0,
            2.0 * PI,
            Tolerance::new(1e-14, 1e-13),
            DEFAULT_BUDGET,
        )
        .unwrap()
        .value;
        let p = graph_perimeter(&m, &u).unwrap();
        prop_assert!((p / oracle - 1.0).abs() < 1e-8, "{p} vs {oracle}");
    }

    #[test]
    fn constant_graph_is_a_ball(idx in 0usize..10, r0 in 0.1f64..5.0) {
        let specs = pole_valid_specs();
        let m = &specs[idx % specs.len()];
        let u = SphereFunction::constant(m.dim(), r0).unwrap();
        let ball = ball_volume(m, r0).unwrap();
        let v = graph_volume(m, &u).unwrap();
        prop_assert!((v / ball.volume - 1.0).abs() < 1e-9, "{}: {v} vs {}", m.name(), ball.volume);
    }
}

#[test]
fn gap_is_quadratic_in_perturbation() {
    let opts = AngularOptions::default();
    for n in [2usize, 3] {
        let m = spec(n, WarpingFunction::hyperbolic());
        let eps = [0.01, 0.02, 0.04];
        let gaps: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let u = if n == 2 {
                    SphereFunction::fourier(1.0, vec![0.0, 0.0, e], vec![])
                } else {
                    SphereFunction::perturbed(
                        n,
                        1.0,
                        e,
                        std::sync::Arc::new(|x: &[f64]| {
                            let mut g = vec![0.0; x.len()];
                            g[0] = 2.0 * x[0];
                            g[1] = -2.0 * x[1];
                            (x[0] * x[0] - x[1] * x[1], g)
                        }),
                    )
                    .unwrap()
                };
                cii_probe_with(&m, &u, &opts).unwrap().cii_gap
            })
            .collect();
        // gap = c e² + d e³ through the first two points, checked at the third
        let c = (gaps[0] / eps[0].powi(3) - gaps[1] / eps[1].powi(3))
            / (1.0 / eps[0] - 1.0 / eps[1]);
        let d = (gaps[0] - c * eps[0].powi(2)) / eps[0].powi(3);
        assert!(c > 0.0, "n={n}: {gaps:?}");
        let cubic = (d * eps[2].powi(3)).abs() / gaps[2];
        assert!(cubic < 0.05, "n={n}: cubic share {cubic}");
    }
}

#[test]
fn presets_by_name_round_trip() {
    for (kind, params) in [
        ("euclidean", vec![]),
        ("hyperbolic", vec![]),
        ("power", vec![2.0]),
        ("power_exp", vec![1.0, 0.25]),
        ("sinh_plus_bump", vec![2.0]),
    ] {
        assert!(make_preset(kind, &params).is_ok(), "{kind}");
    }
    assert!(make_preset("hyperbolic", &[1.0]).is_err());
    assert!(make_preset("torus", &[]).is_err());
    assert!(omega(2) > 0.0);
}
