//! End-to-end acceptance suite A1–A9, shared by the test target and the
//! `selftest` subcommand.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::GeodesicChart;
use crate::inversion::{default_r_grid, potential_from_profile, profile_from_measure};
use crate::potentials::RadialPotential;
use crate::radial_scattering::{born_eigenvalues_h2, connection_coefficients, free_connection_ratio, mode_shift, phase_spectrum, relative_phase_shift};
use crate::specfun::{complex_gamma, free_eigenvalue_mu_k};
use crate::trace_formula::{fit_log_slope, moment_rows, symbol_support_radius, MultiplicityRule, TraceRow, MODE_TOL};
use crate::xray::{g_value, xray_general, xray_radial_profile};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub summary: String,
    /// extra measurements that do not affect the verdict
    pub diagnostics: Vec<String>,
}

impl CriterionResult {
    fn new(id: &str, title: &str, passed: bool, summary: String) -> Self {
        Self { id: id.into(), title: title.into(), passed, summary, diagnostics: Vec::new() }
    }

    fn errored(id: &str, title: &str, e: crate::Error) -> Self {
        Self::new(id, title, false, format!("error: {e}"))
    }

    pub fn line(&self) -> String {
        format!("{} {}: {} ({})", self.id, if self.passed { "PASS" } else { "FAIL" }, self.title, self.summary)
    }
}

pub const IDS: [&str; 9] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9"];

pub fn run(id: &str) -> Option<CriterionResult> {
    let r = match id {
        "A1" => a1(),
        "A2" => a2(),
        "A3" => a3(),
        "A4" => a4(),
        "A5" => a5(),
        "A6" => a6(),
        "A7" => a7(),
        "A8" => a8(),
        "A9" => a9(),
        _ => return None,
    };
    Some(r)
}

pub fn run_all() -> Vec<CriterionResult> {
    IDS.iter().filter_map(|id| run(id)).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Random chart with θ ∈ S^n and |ξ| = len.
fn random_chart(rng: &mut ChaCha8Rng, n: usize, len: f64) -> Result<GeodesicChart> {
    let theta = random_unit(rng, n + 1);
    let mut xi = random_unit(rng, n + 1);
    loop {
        let d: f64 = xi.iter().zip(&theta).map(|(a, b)| a * b).sum();
        xi.iter_mut().zip(&theta).for_each(|(x, t)| *x -= d * t);
        let m = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
        if m > 1e-3 {
            xi.iter_mut().for_each(|x| *x *= len / m);
            return GeodesicChart::new(theta, xi);
        }
        xi = random_unit(rng, n + 1);
    }
}

fn a1() -> CriterionResult {
    let title = "X-ray transform vanishes on geodesics missing the support";
    let body = || -> Result<CriterionResult> {
        let v = RadialPotential::bump_ball(1.0, 0.5)?.to_ambient();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst: f64 = 0.0;
        for i in 0..100 {
            let n = 1 + i % 3;
            let len = rng.gen_range(2.0..20.0);
            let chart = random_chart(&mut rng, n, len)?;
            worst = worst.max(xray_general(&v, &chart, 1e-13)?.abs());
        }
        Ok(CriterionResult::new("A1", title, worst < 1e-12, format!("max |X(V)| = {worst:.3e} over 100 charts, |xi| >= 2; need < 1e-12")))
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A1", title, e))
}

fn a2() -> CriterionResult {
    let title = "radial and general X-ray transforms agree";
    let body = || -> Result<CriterionResult> {
        let v = RadialPotential::gaussian_rho(1.0, 1.0)?;
        let amb = v.to_ambient();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut worst: f64 = 0.0;
        for n in [1u32, 2] {
            for _ in 0..50 {
                let r: f64 = rng.gen_range(0.01..6.0);
                let chart = random_chart(&mut rng, n as usize, 0.5 * r)?;
                let general = -(2f64.powi(n as i32 - 1)) * xray_general(&amb, &chart, 1e-13)?;
                let radial = g_value(&v, r, n, 1e-13)?;
                worst = worst.max((general - radial).abs() / radial.abs());
            }
        }
        Ok(CriterionResult::new("A2", title, worst < 1e-8, format!("max relative difference {worst:.3e} over 100 arguments, n in {{1,2}}; need < 1e-8")))
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A2", title, e))
}

fn a3() -> CriterionResult {
    let title = "free phase shifts vanish";
    let body = || -> Result<CriterionResult> {
        let z = RadialPotential::zero();
        let mut worst: f64 = 0.0;
        let mut worst_abs: f64 = 0.0;
        for n in [1u32, 2] {
            for lambda in [50.0, 100.0] {
                let kmax = (2.0 * lambda) as u64;
                let spec = phase_spectrum(lambda, kmax, &z, n, MODE_TOL)?;
                worst = spec.entries.iter().map(|e| e.delta.abs()).fold(worst, f64::max);
                // the V = 0 run on its own against the closed-form connection ratio
                for k in (0..=kmax).step_by(10) {
                    let c = connection_coefficients(k, lambda, &z, n, None, MODE_TOL)?;
                    worst_abs = worst_abs.max((c.ratio() / free_connection_ratio(k, lambda, n)).arg().abs());
                }
            }
        }
        let pass = worst < 1e-6 && worst_abs < 1e-6;
        let mut r = CriterionResult::new("A3", title, pass, format!("max |delta_k| = {worst:.3e}, max free-ratio phase error {worst_abs:.3e}; need < 1e-6"));
        r.diagnostics.push("free ratio compared with Gamma(i l)Gamma(L - i l)/(Gamma(-i l)Gamma(L + i l)), L = k + n/2".into());
        Ok(r)
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A3", title, e))
}

fn a4() -> CriterionResult {
    let title = "unitarity of the per-mode scattering coefficient";
    let body = || -> Result<CriterionResult> {
        let v = RadialPotential::gaussian_rho(1.0, 1.0)?;
        let mut worst: f64 = 0.0;
        for k in 0..=200u64 {
            let c = connection_coefficients(k, 100.0, &v, 1, None, MODE_TOL)?;
            worst = worst.max(c.unitarity_defect());
        }
        Ok(CriterionResult::new("A4", title, worst < 1e-6, format!("max ||a+/a-| - 1| = {worst:.3e} for k <= 200, lambda = 100; need < 1e-6")))
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A4", title, e))
}

/// max_{k ≤ λ} |λδ_k − c·G(k/λ)| for c = 1 and c = 1/2.
fn symbol_errors(v: &RadialPotential, lambda: f64) -> Result<(f64, f64)> {
    let kmax = lambda as u64;
    let mut e1: f64 = 0.0;
    let mut e2: f64 = 0.0;
    for k in 0..=kmax {
        let d = mode_shift(k, lambda, v, 1, MODE_TOL)?.delta;
        let g = g_value(v, k as f64 / lambda, 1, 1e-13)?;
        e1 = e1.max((lambda * d - g).abs());
        e2 = e2.max((lambda * d - 0.5 * g).abs());
    }
    Ok((e1, e2))
}

fn a5() -> CriterionResult {
    let title = "semiclassical symbol law lambda*delta_k ~ G_V(k/lambda)";
    let body = || -> Result<CriterionResult> {
        let v = RadialPotential::gaussian_rho(1.0, 1.0)?;
        let errs: Vec<(f64, f64)> = [50.0, 100.0, 200.0].iter().map(|&l| symbol_errors(&v, l)).collect::<Result<_>>()?;
        let pass = errs[1].0 <= 0.6 * errs[0].0 && errs[2].0 <= 0.6 * errs[1].0;
        let mut r = CriterionResult::new(
            "A5",
            title,
            pass,
            format!(
                "max error {:.4e}, {:.4e}, {:.4e} at lambda = 50, 100, 200; ratios {:.3}, {:.3}; need <= 0.6",
                errs[0].0,
                errs[1].0,
                errs[2].0,
                errs[1].0 / errs[0].0,
                errs[2].0 / errs[1].0
            ),
        );
        r.diagnostics.push(format!(
            "against G_V/2: max error {:.4e}, {:.4e}, {:.4e}; ratios {:.3}, {:.3}",
            errs[0].1,
            errs[1].1,
            errs[2].1,
            errs[1].1 / errs[0].1,
            errs[2].1 / errs[1].1
        ));
        Ok(r)
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A5", title, e))
}

fn a6() -> CriterionResult {
    let title = "trace formula: quantum vs classical moments";
    let body = || -> Result<CriterionResult> {
        let v = RadialPotential::gaussian_rho(0.5, 1.0)?;
        let tol = 1e-6;
        let lambdas = [50.0, 100.0, 200.0];
        let r_sup = symbol_support_radius(&v, 1, tol)?;
        let mut rows: Vec<TraceRow> = Vec::new();
        let mut control: Vec<TraceRow> = Vec::new();
        for &lambda in &lambdas {
            let kmax = (2.0 * lambda * r_sup).ceil() as u64;
            let spec = phase_spectrum(lambda, kmax, &v, 1, MODE_TOL)?;
            rows.extend(moment_rows(&spec, &v, &[1, 2], r_sup, tol, MultiplicityRule::Harmonic)?);
            control.extend(moment_rows(&spec, &v, &[1, 2], r_sup, tol, MultiplicityRule::Binomial)?);
        }
        let verdict = |rows: &[TraceRow]| -> (bool, String) {
            let mut ok = true;
            let mut parts = Vec::new();
            for p in ["1", "2"] {
                let sel: Vec<&TraceRow> = rows.iter().filter(|r| r.p == p).collect();
                let last = sel.last().unwrap();
                let h: Vec<f64> = sel.iter().map(|r| r.h).collect();
                let e: Vec<f64> = sel.iter().map(|r| r.abs_err).collect();
                let slope = fit_log_slope(&h, &e).map(|s| s.0);
                let good = last.rel_err <= 0.05 && slope.is_some_and(|s| s >= 0.7);
                ok &= good;
                parts.push(format!("p={p}: rel_err(200) = {:.4}, slope = {}", last.rel_err, slope.map_or("undefined".into(), |s| format!("{s:.3}"))));
            }
            (ok, parts.join("; "))
        };
        let (main_ok, main_txt) = verdict(&rows);
        let (control_ok, control_txt) = verdict(&control);
        let pass = main_ok && !control_ok;
        let mut r = CriterionResult::new("A6", title, pass, format!("{main_txt}; need rel_err <= 0.05 and slope >= 0.7; binomial control {}", if control_ok { "passed (should fail)" } else { "fails as required" }));
        r.diagnostics.push(format!("binomial multiplicities: {control_txt}"));
        for row in rows.iter().filter(|r| r.lambda == 200.0) {
            r.diagnostics.push(format!(
                "lambda=200 p={}: quantum {:.6}, classical {:.6}, classical for G_V/2 {:.6} (rel err {:.2e}), sin gap {:.2e}",
                row.p,
                row.quantum,
                row.classical,
                row.rescaled_classical,
                row.rescaled_rel_err,
                row.sin_gap.unwrap_or(f64::NAN)
            ));
        }
        Ok(r)
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A6", title, e))
}

fn a7() -> CriterionResult {
    let title = "inverse problem roundtrip";
    let body = || -> Result<CriterionResult> {
        let v = RadialPotential::gaussian_rho(1.0, 1.0)?;
        let prof = xray_radial_profile(&v, &default_r_grid(6.0, 0.025), 1, 1e-12)?;
        let rho: Vec<f64> = (0..=60).map(|i| i as f64 * 0.1).collect();
        let rec = potential_from_profile(&prof, &rho, 1e-10)?;
        let err = (0..=300).map(|i| (rec.potential.eval(i as f64 * 0.01) - v.eval(i as f64 * 0.01)).abs()).fold(0.0, f64::max);
        // ν(α, ∞) = 2π·2·(−ln α) for G(r) = e^{−r}, n = 1
        let nu = |a: f64, _b: f64| if a < 1.0 { 4.0 * PI * (-a.ln()) } else { 0.0 };
        let levels: Vec<f64> = (1..1000).map(|i| i as f64 / 1000.0).collect();
        let mp = profile_from_measure(nu, 1, &levels)?;
        let perr = mp.r_grid.iter().zip(&mp.g_values).map(|(r, g)| (g - (-r).exp()).abs()).fold(0.0, f64::max);
        let pass = err <= 1e-3 && perr <= 1e-10;
        let mut r = CriterionResult::new("A7", title, pass, format!("max |V_rec - V| on [0,3] = {err:.3e} (need <= 1e-3); measure-to-profile error {perr:.3e} (need <= 1e-10)"));
        r.diagnostics.push(format!("condition {:.3e}, max residual {:.3e}", rec.condition, rec.max_residual));
        Ok(r)
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A7", title, e))
}

fn a8() -> CriterionResult {
    let title = "special functions";
    let body = || -> Result<CriterionResult> {
        let mut worst_g: f64 = 0.0;
        for lambda in [1.0f64, 5.0, 20.0] {
            let g = complex_gamma(Complex64::new(0.0, lambda))?;
            let exact = PI / (lambda * (PI * lambda).sinh());
            worst_g = worst_g.max((g.norm_sqr() - exact).abs() / exact);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let mut worst_mu: f64 = 0.0;
        for _ in 0..100 {
            let k = rng.gen_range(0..500u64);
            let lambda = rng.gen_range(0.1..300.0);
            let n = rng.gen_range(1..=3u32);
            worst_mu = worst_mu.max((free_eigenvalue_mu_k(k, lambda, n).value.norm() - 1.0).abs());
        }
        let pass = worst_g < 1e-12 && worst_mu < 1e-12;
        Ok(CriterionResult::new("A8", title, pass, format!("|Gamma(il)|^2 relative error {worst_g:.3e}, max ||mu_k| - 1| {worst_mu:.3e}; need < 1e-12")))
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A8", title, e))
}

fn a9() -> CriterionResult {
    let title = "Born approximation matches weak-coupling phase shifts";
    let body = || -> Result<CriterionResult> {
        let v = RadialPotential::gaussian_rho(1.0, 1.0)?;
        let lambda = 100.0;
        let eps = 1e-3;
        let born = born_eigenvalues_h2(50, lambda, &v, 1e-10)?;
        let weak = v.scaled(eps);
        let mut worst: f64 = 0.0;
        for k in 0..=50u64 {
            let d = relative_phase_shift(k, lambda, &weak, 1, 1e-12)?;
            let q = lambda * d / eps;
            worst = worst.max((born[k as usize] - q).abs() / q.abs());
        }
        Ok(CriterionResult::new("A9", title, worst <= 0.02, format!("max relative difference {worst:.3e} between Born eigenvalue and lambda*delta_k(eps V)/eps, k <= 50; need <= 0.02")))
    };
    body().unwrap_or_else(|e| CriterionResult::errored("A9", title, e))
}
