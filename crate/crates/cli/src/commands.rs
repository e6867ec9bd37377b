use std::sync::Arc;

use serde_json::json;
use warped::geometry::{ball_volume, CurvatureProfile};
use warped::isoperimetry::QuotientProfile;
use warped::profile::{radial_grid, write_csv};
use warped::radial_graph::cii_probe_with;
use warped::spectral::{
    ball_lambda1_numeric, ball_lower_bound, convergence_csv, convergence_table,
    default_discreteness_radii, default_probes, discreteness_criterion, g_monotone_check,
    lambda1_via_persson, persson_report, PotentialProfile,
};
use warped::sphere::{AngularOptions, SphereFunction};
use warped::verifier::{default_family, run_suite, VerificationLedger};
use warped::ManifoldSpec;

use crate::config::{load_family, RunConfig};
use crate::error::CliError;
use crate::output::{to_value, Report};

fn grid(c: &RunConfig) -> Result<Vec<f64>, CliError> {
    let g = &c.grid;
    Ok(radial_grid(g.r_min, g.r_max, g.n_points, g.spacing.into())?)
}

pub fn curvature(c: &RunConfig) -> Result<Report, CliError> {
    let m = c.manifold()?;
    let p = CurvatureProfile::compute(&m, &grid(c)?)?;
    Ok(Report::new(
        json!({ "manifold": m.name(), "profile": to_value(&p) }),
        p.to_csv(),
    ))
}

pub fn quotients(c: &RunConfig) -> Result<Report, CliError> {
    let m = c.manifold()?;
    m.require_pole_valid()?;
    let p = QuotientProfile::compute(&m, &grid(c)?)?;
    Ok(Report::new(
        json!({ "manifold": m.name(), "profile": to_value(&p) }),
        p.to_csv(),
    ))
}

fn summary_csv(rows: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in rows {
        out.push_str(&format!("{k},{v}\n"));
    }
    out
}

fn opt_e(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn spectrum(c: &RunConfig) -> Result<Report, CliError> {
    let m = c.manifold()?;
    let s = &c.spectral;
    let runs = [(s.r_max / 4.0, s.n), (s.r_max / 2.0, s.n), (s.r_max, s.n)];
    let table = convergence_table(&m, &runs)?;
    let potential = PotentialProfile::compute(&m, &grid(c)?)?;
    let report = persson_report(&m, &default_probes())?;
    let (persson, persson_note) = match lambda1_via_persson(&m) {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (disc, disc_note) = match discreteness_criterion(&m, &default_discreteness_radii()) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let json = json!({
        "manifold": m.name(),
        "convergence": to_value(&table),
        "potential": to_value(&potential),
        "limit_l": to_value(&report.limit),
        "w_limit": report.w_limit,
        "persson_flagged": report.flagged,
        "persson_lambda": persson.map(|e| e.value),
        "persson_method": persson.map(|e| to_value(&e.method)),
        "persson_note": persson_note,
        "discreteness": disc.as_ref().map(to_value),
        "discreteness_note": disc_note,
    });
    let summary = summary_csv(&[
        ("L", format!("{:e}", report.limit.l)),
        ("tilde_L", format!("{:e}", report.limit.tilde_l)),
        ("limits_converged", report.limit.converged.to_string()),
        ("w_limit", format!("{:e}", report.w_limit)),
        ("persson_lambda", opt_e(persson.map(|e| e.value))),
        ("persson_flagged", report.flagged.to_string()),
        ("discreteness_limit", opt_e(disc.as_ref().map(|d| d.limit_estimate))),
        (
            "discreteness_verdict",
            disc.as_ref().map(|d| format!("{:?}", d.verdict)).unwrap_or_default(),
        ),
    ]);
    Ok(Report::new(json, convergence_csv(&table))
        .with_table("potential", potential.to_csv())
        .with_table("summary", summary))
}

pub fn ball(c: &RunConfig) -> Result<Report, CliError> {
    let m = c.manifold()?;
    let r = c.ball.r;
    let geo = ball_volume(&m, r)?;
    let lam = ball_lambda1_numeric(&m, r, c.spectral.n)?;
    let bound = ball_lower_bound(m.dim(), r)?;
    let g_increasing = g_monotone_check(&m, r.max(1.0), 1e-7)?.is_nondecreasing();
    let json = json!({
        "manifold": m.name(),
        "geometry": to_value(&geo),
        "lambda1": to_value(&lam),
        "lower_bound": bound,
        "margin": lam.value - bound,
        "g_increasing": g_increasing,
    });
    let csv = format!(
        "r,volume,perimeter,lambda1,error_indicator,lower_bound,margin,g_increasing\n{r:e},{:e},{:e},{:e},{:e},{bound:e},{:e},{g_increasing}\n",
        geo.volume,
        geo.perimeter,
        lam.value,
        lam.error_indicator,
        lam.value - bound,
    );
    Ok(Report::new(json, csv))
}

fn sphere_function(c: &RunConfig, m: &ManifoldSpec) -> Result<SphereFunction, CliError> {
    let g = &c.graph;
    let n = m.dim();
    if g.radius.is_nan() || g.radius <= 0.0 {
        return Err(CliError::Validation(format!("graph.radius must be positive, got {}", g.radius)));
    }
    if n == 2 {
        if !g.linear.is_empty() || !g.quadratic.is_empty() {
            return Err(CliError::Validation("in dimension 2 use graph.cos and graph.sin".into()));
        }
        let scale = g.radius * g.eps;
        return Ok(SphereFunction::fourier(
            g.radius,
            g.cos.iter().map(|a| a * scale).collect(),
            g.sin.iter().map(|b| b * scale).collect(),
        ));
    }
    if !g.cos.is_empty() || !g.sin.is_empty() {
        return Err(CliError::Validation(
            "graph.cos and graph.sin apply to dimension 2; use graph.linear and graph.quadratic".into(),
        ));
    }
    if !g.linear.is_empty() && g.linear.len() != n {
        return Err(CliError::Validation(format!("graph.linear needs {n} entries")));
    }
    if !g.quadratic.is_empty() && (g.quadratic.len() != n || g.quadratic.iter().any(|row| row.len() != n)) {
        return Err(CliError::Validation(format!("graph.quadratic must be {n}x{n}")));
    }
    let lin = g.linear.clone();
    let quad = g.quadratic.clone();
    let y = Arc::new(move |x: &[f64]| {
        let mut v = 0.0;
        let mut grad = vec![0.0; x.len()];
        for (i, l) in lin.iter().enumerate() {
            v += l * x[i];
            grad[i] += l;
        }
        for (i, row) in quad.iter().enumerate() {
            for (j, q) in row.iter().enumerate() {
                v += q * x[i] * x[j];
                grad[i] += q * x[j];
                grad[j] += q * x[i];
            }
        }
        (v, grad)
    });
    Ok(SphereFunction::perturbed(n, g.radius, g.eps, y)?)
}

pub fn graph(c: &RunConfig) -> Result<Report, CliError> {
    let m = c.manifold()?;
    let u = sphere_function(c, &m)?;
    let g = &c.graph;
    let defaults = AngularOptions::default();
    let opts = AngularOptions {
        per_angle: g.per_angle.unwrap_or(defaults.per_angle),
        mc_samples: g.mc_samples.unwrap_or(defaults.mc_samples),
        seed: g.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let rep = cii_probe_with(&m, &u, &opts)?;
    let json = json!({ "manifold": m.name(), "report": to_value(&rep) });
    let csv = write_csv(
        &["volume", "perimeter", "matched_ball_radius", "ball_perimeter", "cii_gap"],
        &[
            &[rep.volume],
            &[rep.perimeter],
            &[rep.matched_ball_radius],
            &[rep.ball_perimeter],
            &[rep.cii_gap],
        ],
    );
    Ok(Report::new(json, csv))
}

pub fn verify(c: &RunConfig) -> Result<(Report, VerificationLedger), CliError> {
    let family = match &c.verify.family {
        Some(p) => load_family(p)?,
        None => default_family()?,
    };
    let ledger = run_suite(&family, &c.verify.suite())?;
    let report = Report::new(json!({ "entries": to_value(&ledger.entries), "all_pass": ledger.all_pass() }), ledger.to_csv());
    Ok((report, ledger))
}
