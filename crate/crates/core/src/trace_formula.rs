//! Quantum-classical comparison: the measure μ_h built from phase shifts
//! against the pushforward ν of Lebesgue measure by the symbol G_V.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{RadialPotential, Tail};
use crate::quad::pairwise_sum;
use crate::radial_scattering::{phase_spectrum, PhaseShiftSpectrum};
use crate::specfun::{binomial, harmonic_dimension};
use crate::xray::{classical_nu_integral_fn, g_value};

/// Tolerance used for the mode solves inside trace computations.
pub const MODE_TOL: f64 = 1e-10;

/// Test functions accepted by the pairings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Monomial { p: u32 },
    /// Piecewise linear through the samples, zero outside them. Must vanish
    /// on |t| < zero_radius.
    Sampled { t: Vec<f64>, values: Vec<f64>, zero_radius: f64 },
}

impl TestFunction {
    pub fn monomial(p: u32) -> Self {
        TestFunction::Monomial { p }
    }

    pub fn sampled(t: Vec<f64>, values: Vec<f64>, zero_radius: f64) -> Result<Self> {
        if t.len() != values.len() || t.len() < 2 {
            return Err(Error::InvalidParameter("sampled test function needs matching t and values (at least 2)".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("sample points must be strictly increasing".into()));
        }
        if !(zero_radius > 0.0) {
            return Err(Error::InvalidParameter("zero_radius must be positive".into()));
        }
        let f = TestFunction::Sampled { t, values, zero_radius };
        if let TestFunction::Sampled { t, values, .. } = &f {
            // the interpolant must vanish on (−zero_radius, zero_radius) and at the ends
            if values[0] != 0.0 || values[values.len() - 1] != 0.0 {
                return Err(Error::InvalidParameter("sampled test function must vanish at both ends".into()));
            }
            for (i, x) in t.iter().enumerate() {
                if x.abs() < zero_radius && values[i] != 0.0 {
                    return Err(Error::InvalidParameter(format!("sampled test function is nonzero at t = {x}, inside the zero neighborhood")));
                }
            }
            let brackets = t.windows(2).zip(values.windows(2)).any(|(tw, vw)| tw[0] < 0.0 && tw[1] > 0.0 && (vw[0] != 0.0 || vw[1] != 0.0));
            if brackets {
                return Err(Error::InvalidParameter("sampled test function is nonzero across t = 0".into()));
            }
        }
        Ok(f)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Monomial { p } => x.powi(*p as i32),
            TestFunction::Sampled { t, values, zero_radius } => {
                if x.abs() < *zero_radius || x < t[0] || x > t[t.len() - 1] {
                    return 0.0;
                }
                let j = t.partition_point(|&ti| ti <= x).clamp(1, t.len() - 1);
                let w = (x - t[j - 1]) / (t[j] - t[j - 1]);
                values[j - 1] * (1.0 - w) + values[j] * w
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Monomial { p } => p.to_string(),
            TestFunction::Sampled { .. } => "sampled".into(),
        }
    }
}

/// How each degree is weighted in μ_h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplicityRule {
    /// dimension of degree-k spherical harmonics on S^n
    Harmonic,
    /// binom(n+k, n); counts polynomials of degree ≤ k, kept as a control
    Binomial,
}

impl MultiplicityRule {
    pub fn weight(self, k: u64, n: u32) -> u64 {
        match self {
            MultiplicityRule::Harmonic => harmonic_dimension(k, n),
            MultiplicityRule::Binomial => binomial(n as u64 + k, n as u64),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pairing {
    pub value: f64,
    /// share of Σ|terms| from k > 0.9·kmax
    pub tail_fraction: f64,
    pub tail_warning: bool,
}

/// ⟨μ_h, f⟩ = (2πh)^n Σ_k d_k f(δ_k/h), h = 1/λ.
pub fn mu_h_pairing(spectrum: &PhaseShiftSpectrum, f: &TestFunction) -> Pairing {
    mu_h_pairing_with(spectrum, f, MultiplicityRule::Harmonic)
}

pub fn mu_h_pairing_with(spectrum: &PhaseShiftSpectrum, f: &TestFunction, rule: MultiplicityRule) -> Pairing {
    let n = spectrum.n;
    let h = 1.0 / spectrum.lambda;
    let terms: Vec<f64> = spectrum.entries.iter().map(|e| rule.weight(e.k, n) as f64 * f.eval(e.delta / h)).collect();
    let cut = (0.9 * spectrum.kmax as f64).floor() as u64;
    let total_abs: f64 = pairwise_sum(&terms.iter().map(|t| t.abs()).collect::<Vec<_>>());
    let tail_abs: f64 = pairwise_sum(&spectrum.entries.iter().zip(&terms).filter(|(e, _)| e.k > cut).map(|(_, t)| t.abs()).collect::<Vec<_>>());
    let tail_fraction = if total_abs > 0.0 { tail_abs / total_abs } else { 0.0 };
    Pairing { value: (2.0 * PI * h).powi(n as i32) * pairwise_sum(&terms), tail_fraction, tail_warning: tail_fraction > 0.01 }
}

/// (2πh)^n Σ d_k |(δ_k/h)^p − (sin δ_k/h)^p|.
pub fn sin_replacement_gap(spectrum: &PhaseShiftSpectrum, p: u32) -> f64 {
    let h = 1.0 / spectrum.lambda;
    let terms: Vec<f64> = spectrum
        .entries
        .iter()
        .map(|e| e.multiplicity as f64 * ((e.delta / h).powi(p as i32) - (e.delta.sin() / h).powi(p as i32)).abs())
        .collect();
    (2.0 * PI * h).powi(spectrum.n as i32) * pairwise_sum(&terms)
}

/// Radius beyond which |G_V| < tol (doubling then bisection).
pub fn symbol_support_radius(pot: &RadialPotential, n: u32, tol: f64) -> Result<f64> {
    if pot.is_zero() {
        return Ok(0.0);
    }
    if let Tail::Compact { radius } = pot.tail() {
        return Ok(radius.sinh());
    }
    let gtol = 1e-3 * tol;
    let small = |r: f64| -> Result<bool> { Ok(g_value(pot, r, n, gtol)?.abs() < tol) };
    let mut hi = 1.0;
    while !small(hi)? {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::Divergence("G_V does not fall below tol".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if small(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-3 * hi {
            break;
        }
    }
    Ok(hi)
}

/// kmax = ceil(2λR) with R the radius where |G_V| drops below tol.
pub fn kmax_policy(pot: &RadialPotential, n: u32, lambda: f64, tol: f64) -> Result<u64> {
    let r = symbol_support_radius(pot, n, tol)?;
    Ok((2.0 * lambda * r).ceil() as u64)
}

fn check_p(pot: &RadialPotential, n: u32, p: u32) -> Result<()> {
    if p < 1 {
        return Err(Error::InvalidParameter("p must be at least 1".into()));
    }
    let m = pot.decay_exponent();
    if m.is_finite() {
        let need = 2.0 * (n as f64 - 0.5) / (m - 1.0);
        if m <= 1.0 || p as f64 <= need {
            return Err(Error::InvalidParameter(format!("p = {p} must exceed {need} for decay exponent m = {m}")));
        }
    }
    Ok(())
}

/// One line of a trace report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub lambda: f64,
    pub h: f64,
    pub p: String,
    pub quantum: f64,
    pub classical: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub kmax: u64,
    pub tail_fraction: f64,
    /// moment computed with sin δ_k in place of δ_k, as a difference
    pub sin_gap: Option<f64>,
    /// classical side for the symbol 2^{−n}G_V
    pub rescaled_classical: f64,
    pub rescaled_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub p: String,
    /// None when the errors vanish or are too few to fit
    pub slope: Option<f64>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub n: u32,
    pub lambda_list: Vec<f64>,
    pub rows: Vec<TraceRow>,
    pub fits: Vec<SlopeFit>,
    pub multiplicity: MultiplicityRule,
}

impl TraceReport {
    pub fn fit_slope(&self, p: &str) -> Option<f64> {
        self.fits.iter().find(|f| f.p == p).and_then(|f| f.slope)
    }

    pub fn to_csv(&self) -> String {
        use crate::io::fmt_real;
        let mut s = String::from("lambda,h,p,quantum,classical,abs_err,rel_err\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_real(r.lambda),
                fmt_real(r.h),
                r.p,
                fmt_real(r.quantum),
                fmt_real(r.classical),
                fmt_real(r.abs_err),
                fmt_real(r.rel_err)
            ));
        }
        s
    }

    pub fn summary_json(&self) -> serde_json::Value {
        let fit_slope = if self.fits.len() == 1 { serde_json::json!(self.fits[0].slope) } else { serde_json::Value::Null };
        serde_json::json!({
            "n": self.n,
            "lambda_list": self.lambda_list,
            "multiplicity": self.multiplicity,
            "fit_slope": fit_slope,
            "fits": self.fits,
            "rows": self.rows,
        })
    }
}

fn classical_moment(pot: &RadialPotential, n: u32, f: &TestFunction, r_max: f64, tol: f64) -> Result<f64> {
    if pot.is_zero() {
        return Ok(0.0);
    }
    let g = |r: f64| g_value(pot, r, n, 1e-3 * tol).unwrap_or(f64::NAN);
    let v = classical_nu_integral_fn(g, r_max, |t| f.eval(t), n, tol)?;
    if !v.is_finite() {
        return Err(Error::ToleranceNotMet("classical moment evaluation failed".into()));
    }
    Ok(v)
}

fn relative(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs()
    }
}

/// Rows for several p from an existing spectrum; the classical side is
/// integrated up to `r_max`.
pub fn moment_rows(spectrum: &PhaseShiftSpectrum, pot: &RadialPotential, p_list: &[u32], r_max: f64, tol: f64, rule: MultiplicityRule) -> Result<Vec<TraceRow>> {
    let n = spectrum.n;
    let mut rows = Vec::new();
    for &p in p_list {
        check_p(pot, n, p)?;
        let f = TestFunction::monomial(p);
        let q = mu_h_pairing_with(spectrum, &f, rule);
        let c = classical_moment(pot, n, &f, r_max, tol)?;
        let rescaled = c * 2f64.powi(-((n * p) as i32));
        rows.push(TraceRow {
            lambda: spectrum.lambda,
            h: 1.0 / spectrum.lambda,
            p: p.to_string(),
            quantum: q.value,
            classical: c,
            abs_err: (q.value - c).abs(),
            rel_err: relative(q.value, c),
            kmax: spectrum.kmax,
            tail_fraction: q.tail_fraction,
            sin_gap: Some(sin_replacement_gap(spectrum, p)),
            rescaled_classical: rescaled,
            rescaled_rel_err: relative(q.value, rescaled),
        });
    }
    Ok(rows)
}

/// Quantum and classical moments ∫t^p dμ_h, ∫t^p dν at one λ.
pub fn moment_compare(pot: &RadialPotential, n: u32, lambda: f64, p_list: &[u32], tol: f64) -> Result<Vec<TraceRow>> {
    Ok(trace_report(pot, n, &[lambda], p_list, tol, MultiplicityRule::Harmonic)?.rows)
}

/// Least-squares slope of log|err| against log h.
pub fn fit_log_slope(h: &[f64], err: &[f64]) -> Option<(f64, Vec<f64>)> {
    if h.len() < 2 || err.iter().any(|e| !(*e > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|x| x.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let res = xs.iter().zip(&ys).map(|(x, y)| y - (my + slope * (x - mx))).collect();
    Some((slope, res))
}

/// Moments for every (λ, p); one phase spectrum per λ.
pub fn trace_report(pot: &RadialPotential, n: u32, lambda_list: &[f64], p_list: &[u32], tol: f64, rule: MultiplicityRule) -> Result<TraceReport> {
    trace_report_with_kmax(pot, n, lambda_list, p_list, tol, rule, None)
}

/// As [`trace_report`]; `kmax` overrides the ceil(2λR) policy for every λ.
pub fn trace_report_with_kmax(pot: &RadialPotential, n: u32, lambda_list: &[f64], p_list: &[u32], tol: f64, rule: MultiplicityRule, kmax: Option<u64>) -> Result<TraceReport> {
    if lambda_list.is_empty() || p_list.is_empty() {
        return Err(Error::InsufficientData("need at least one lambda and one p".into()));
    }
    if lambda_list.iter().any(|l| !(*l > 0.0)) || lambda_list.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("lambda list must be positive and increasing".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    for &p in p_list {
        check_p(pot, n, p)?;
    }
    let r_sup = symbol_support_radius(pot, n, tol)?;
    let r_max = r_sup.max(1.0);
    let mut rows = Vec::new();
    for &lambda in lambda_list {
        let kmax = kmax.unwrap_or((2.0 * lambda * r_sup).ceil() as u64);
        let spec = phase_spectrum(lambda, kmax, pot, n, tol.min(MODE_TOL))?;
        rows.extend(moment_rows(&spec, pot, p_list, r_max, tol, rule)?);
    }
    let fits = p_list
        .iter()
        .map(|p| {
            let sel: Vec<&TraceRow> = rows.iter().filter(|r| r.p == p.to_string()).collect();
            let h: Vec<f64> = sel.iter().map(|r| r.h).collect();
            let e: Vec<f64> = sel.iter().map(|r| r.abs_err).collect();
            let fit = if h.len() >= 3 { fit_log_slope(&h, &e) } else { None };
            SlopeFit { p: p.to_string(), slope: fit.as_ref().map(|f| f.0), residuals: fit.map(|f| f.1).unwrap_or_default() }
        })
        .collect();
    Ok(TraceReport { n, lambda_list: lambda_list.to_vec(), rows, fits, multiplicity: rule })
}

/// Error-versus-h study for one moment; needs at least three λ values.
pub fn convergence_study(pot: &RadialPotential, n: u32, lambda_list: &[f64], p: u32, tol: f64) -> Result<TraceReport> {
    if lambda_list.len() < 3 {
        return Err(Error::InsufficientData(format!("convergence study needs at least 3 lambda values, got {}", lambda_list.len())));
    }
    trace_report(pot, n, lambda_list, &[p], tol, MultiplicityRule::Harmonic)
}
