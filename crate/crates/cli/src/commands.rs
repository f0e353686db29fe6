use std::path::Path;

use hypershift::acceptance;
use hypershift::inversion::{l_curve_corner, potential_from_profile_tol};
use hypershift::io::{atomic_write, fmt_real};
use hypershift::radial_scattering::phase_spectrum;
use hypershift::specfun::free_eigenvalue_mu_k;
use hypershift::trace_formula::{kmax_policy, trace_report_with_kmax, MultiplicityRule};
use hypershift::xray::{xray_radial_profile, ClassicalProfile};
use hypershift::{Error, Result};

use crate::config::RunConfig;

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    atomic_write(&dir.join(name), contents.as_bytes())
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    write(dir, name, &text)
}

fn grid(max: f64, step: f64) -> Vec<f64> {
    let m = (max / step).round() as usize;
    (0..=m).map(|i| i as f64 * step).collect()
}

pub fn xray(cfg: &RunConfig) -> Result<String> {
    let pot = cfg.potential()?;
    let r = match cfg.r_grid.as_str() {
        "uniform" => grid(cfg.r_max, cfg.r_step),
        _ => grid(cfg.r_max.asinh(), cfg.r_step).iter().map(|x| x.sinh()).collect(),
    };
    let prof = xray_radial_profile(&pot, &r, cfg.dim, cfg.tol)?;
    write(&cfg.out, "profile.csv", &prof.to_csv())?;
    write_json(
        &cfg.out,
        "profile.json",
        &serde_json::json!({
            "n": cfg.dim,
            "potential": cfg.potential.as_deref().unwrap_or(crate::config::DEFAULT_POTENTIAL),
            "monotone_decreasing": prof.monotone_decreasing,
            "support_radius": prof.support_radius,
            "g0": prof.g_values[0],
            "generated_by": cfg.generated_by(),
        }),
    )?;
    Ok(format!("wrote profile.csv ({} points)", prof.r_grid.len()))
}

pub fn shifts(cfg: &RunConfig) -> Result<String> {
    let pot = cfg.potential()?;
    let lambda = cfg.lambda();
    let kmax = match cfg.kmax {
        Some(k) => k,
        None => kmax_policy(&pot, cfg.dim, lambda, 1e-6)?,
    };
    let spec = phase_spectrum(lambda, kmax, &pot, cfg.dim, cfg.tol)?;
    write(&cfg.out, "shifts.csv", &spec.to_csv())?;
    let mut side = spec.sidecar_json();
    side["generated_by"] = cfg.generated_by();
    write_json(&cfg.out, "shifts.json", &side)?;
    let mut msg = format!("wrote shifts.csv (k = 0..{kmax})");
    if spec.tail_warning {
        msg.push_str(&format!("; warning: tail not converged, tail_bound = {:e}", spec.tail_bound));
    }
    Ok(msg)
}

pub fn trace(cfg: &RunConfig) -> Result<String> {
    let pot = cfg.potential()?;
    let rule = if cfg.multiplicity == "binomial" { MultiplicityRule::Binomial } else { MultiplicityRule::Harmonic };
    let rep = trace_report_with_kmax(&pot, cfg.dim, &cfg.lambda_list, &cfg.p_list, cfg.tol, rule, cfg.kmax)?;
    write(&cfg.out, "trace.csv", &rep.to_csv())?;
    let mut js = rep.summary_json();
    js["generated_by"] = cfg.generated_by();
    write_json(&cfg.out, "trace.json", &js)?;
    let worst = rep.rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(format!("wrote trace.csv ({} rows, max rel_err {worst:.4})", rep.rows.len()))
}

pub fn invert(cfg: &RunConfig) -> Result<String> {
    let (profile, truth) = match &cfg.profile {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let truth = if cfg.potential.is_some() { Some(cfg.potential()?) } else { None };
            (ClassicalProfile::from_csv(&text, cfg.dim)?, truth)
        }
        None => {
            let pot = cfg.potential()?;
            let r: Vec<f64> = grid(cfg.rho_max, 0.025).iter().map(|x| x.sinh()).collect();
            (xray_radial_profile(&pot, &r, cfg.dim, cfg.tol)?, Some(pot))
        }
    };
    let rho = grid(cfg.rho_max, cfg.knot_spacing);
    // without an explicit reg, take the L-curve corner of a first pass
    let rec = match cfg.reg {
        Some(reg) => potential_from_profile_tol(&profile, &rho, reg, cfg.tol)?,
        None => {
            let first = potential_from_profile_tol(&profile, &rho, 1e-10, cfg.tol)?;
            let corner = l_curve_corner(&first.l_curve).unwrap_or(1e-10);
            potential_from_profile_tol(&profile, &rho, corner, cfg.tol)?
        }
    };
    let samples = grid(cfg.rho_max, 0.01);
    let mut csv = String::from("rho,value\n");
    for &r in &samples {
        csv.push_str(&format!("{},{}\n", fmt_real(r), fmt_real(rec.potential.eval(r))));
    }
    write(&cfg.out, "potential.csv", &csv)?;
    let max_abs_error = truth.as_ref().map(|t| samples.iter().filter(|r| **r <= 3.0).map(|&r| (rec.potential.eval(r) - t.eval(r)).abs()).fold(0.0, f64::max));
    write_json(
        &cfg.out,
        "invert.json",
        &serde_json::json!({
            "reg": rec.reg,
            "condition": if rec.condition.is_finite() { serde_json::json!(rec.condition) } else { serde_json::json!("inf") },
            "rms_residual": rec.rms_residual,
            "max_residual": rec.max_residual,
            "l_curve": rec.l_curve,
            "l_curve_corner": l_curve_corner(&rec.l_curve),
            "max_abs_error_rho_le_3": max_abs_error,
            "generated_by": cfg.generated_by(),
        }),
    )?;
    Ok(match max_abs_error {
        Some(e) => format!("wrote potential.csv; max abs error on [0,3] = {e:.3e}"),
        None => "wrote potential.csv".into(),
    })
}

pub fn freespec(cfg: &RunConfig) -> Result<String> {
    let kmax = cfg.kmax.unwrap_or(20);
    let mut csv = String::from("k,lambda,mu_re,mu_im,multiplicity,conventional\n");
    for &lambda in &cfg.lambda_list {
        for k in 0..=kmax {
            let mu = free_eigenvalue_mu_k(k, lambda, cfg.dim);
            csv.push_str(&format!("{},{},{},{},{},{}\n", k, fmt_real(lambda), fmt_real(mu.value.re), fmt_real(mu.value.im), mu.multiplicity, mu.conventional));
        }
    }
    write(&cfg.out, "freespec.csv", &csv)?;
    Ok(format!("wrote freespec.csv ({} rows)", (kmax + 1) as usize * cfg.lambda_list.len()))
}

/// Runs the acceptance criteria; Ok(true) when every selected one passes.
pub fn selftest(cfg: &RunConfig, only: &[String]) -> Result<bool> {
    let ids: Vec<String> = if only.is_empty() { acceptance::IDS.iter().map(|s| s.to_string()).collect() } else { only.to_vec() };
    let mut results = Vec::new();
    for id in &ids {
        let r = acceptance::run(id).ok_or_else(|| Error::InvalidParameter(format!("unknown criterion '{id}'")))?;
        println!("{}", r.line());
        for d in &r.diagnostics {
            println!("    {d}");
        }
        results.push(r);
    }
    write_json(&cfg.out, "selftest.json", &serde_json::json!({ "results": results }))?;
    Ok(results.iter().all(|r| r.passed))
}
