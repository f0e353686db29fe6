//! Phase shifts of the relative scattering matrix for radial potentials.
//!
//! On degree-k harmonics the radial equation for (Δ + V − n²/4 − λ²)u = 0
//! becomes, with v = sinh(ρ)^{n/2} u,
//!
//!   v'' + (λ² − Q_k(ρ)) v = 0,  Q_k = V + ℓ(ℓ−1)/sinh²ρ,  ℓ = k + n/2.
//!
//! The regular solution behaves like a_− e^{−iλρ} + a_+ e^{iλρ} at infinity;
//! the eigenvalue of the scattering matrix on that subspace is a_+/a_−.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{propagate, OdeState, StepPolicy};
use crate::potentials::{RadialPotential, Tail};
use crate::quad::{gauss_legendre, integrate};
use crate::specfun::{c_of_s, complex_log_gamma, harmonic_dimension};

/// Default separation of the two matching radii.
pub const MATCH_SEPARATION: f64 = 1.5;
// contamination of the recessive start by the dominant solution is e^{−2·25}
const SEED_ACTION: f64 = 25.0;

pub fn frobenius_index(k: u64, n: u32) -> f64 {
    k as f64 + n as f64 / 2.0
}

/// ℓ(ℓ−1) = k(k+n−1) + (n/2)(n/2−1).
pub fn centrifugal_constant(k: u64, n: u32) -> f64 {
    let l = frobenius_index(k, n);
    l * (l - 1.0)
}

/// Q_k(ρ) for the Liouville-transformed radial equation.
pub fn liouville_q(k: u64, pot: &RadialPotential, n: u32) -> impl Fn(f64) -> f64 + '_ {
    let cc = centrifugal_constant(k, n);
    move |rho: f64| {
        let s = rho.sinh();
        pot.eval(rho) + cc / (s * s)
    }
}

/// Closed-form free ratio a_+/a_− = Γ(iλ)Γ(ℓ−iλ) / (Γ(−iλ)Γ(ℓ+iλ)).
pub fn free_connection_ratio(k: u64, lambda: f64, n: u32) -> Complex64 {
    let l = frobenius_index(k, n);
    let il = Complex64::new(0.0, lambda);
    let lg = |z: Complex64| complex_log_gamma(z).expect("no poles off the real axis");
    let phase = 2.0 * (lg(il).im - lg(l + il).im);
    Complex64::from_polar(1.0, phase)
}

/// Radius past which V is below 1e-15 and Q_k/λ² below 1e-8.
pub fn default_rho_match(k: u64, lambda: f64, pot: &RadialPotential, n: u32) -> f64 {
    let rv = match pot.tail() {
        Tail::Compact { radius } => radius,
        t => t.radius_for(1e-15),
    };
    let cc = centrifugal_constant(k, n).abs();
    let rc = if cc > 0.0 { (cc.sqrt() / (lambda * 1e-4)).asinh() } else { 0.0 };
    rv.max(rc).max(3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedKind {
    /// two-term series ρ^ℓ(1 + cρ²) near the origin
    Frobenius,
    /// growing WKB solution deep in the forbidden region
    Wkb,
}

struct Start {
    rho0: f64,
    kind: SeedKind,
}

fn frobenius_state(l: f64, lambda: f64, cc: f64, v0: f64, rho0: f64) -> OdeState {
    let e = lambda * lambda + cc / 3.0 - v0;
    let c = -e / (4.0 * l + 2.0);
    let dv = (l / rho0 + c * (l + 2.0) * rho0) / (1.0 + c * rho0 * rho0);
    OdeState::new(1.0, dv)
}

fn frobenius_radius(l: f64, lambda: f64, cc: f64, v0s: &[f64]) -> f64 {
    let cmax = v0s.iter().map(|v0| ((lambda * lambda + cc / 3.0 - v0) / (4.0 * l + 2.0)).abs()).fold(0.0, f64::max);
    if cmax == 0.0 {
        0.05
    } else {
        (1e-7 / cmax).sqrt().min(0.05)
    }
}

/// Chooses the starting radius: Frobenius near 0 unless the forbidden region
/// is so wide that the series start would underflow, in which case a WKB
/// seed is placed where the remaining action to the turning point is 25.
fn choose_start(l: f64, lambda: f64, pots: &[&RadialPotential], cc: f64, rho_end: f64) -> Result<Start> {
    let v0s: Vec<f64> = pots.iter().map(|p| p.eval(0.0)).collect();
    let rho_f = frobenius_radius(l, lambda, cc, &v0s);
    let lam2 = lambda * lambda;
    let qmin = |r: f64| {
        let s = r.sinh();
        pots.iter().map(|p| p.eval(r)).fold(f64::INFINITY, f64::min) + cc / (s * s)
    };
    if qmin(rho_f) < lam2 {
        return Ok(Start { rho0: rho_f, kind: SeedKind::Frobenius });
    }
    let mut grid = vec![rho_f];
    let mut kappa = vec![(qmin(rho_f) - lam2).sqrt()];
    let mut r = rho_f;
    loop {
        r *= 1.01;
        if r > rho_end {
            return Err(Error::Initialization(format!("no classically allowed region below rho = {rho_end}")));
        }
        let q = qmin(r);
        if q < lam2 {
            grid.push(r);
            kappa.push(0.0);
            break;
        }
        grid.push(r);
        kappa.push((q - lam2).sqrt());
    }
    let mut action = 0.0;
    for i in (0..grid.len() - 1).rev() {
        action += 0.5 * (kappa[i] + kappa[i + 1]) * (grid[i + 1] - grid[i]);
        if action >= SEED_ACTION {
            return Ok(Start { rho0: grid[i], kind: SeedKind::Wkb });
        }
    }
    Ok(Start { rho0: rho_f, kind: SeedKind::Frobenius })
}

fn wkb_state(q: &dyn Fn(f64) -> f64, lambda: f64, rho: f64) -> OdeState {
    let k2 = q(rho) - lambda * lambda;
    if k2 <= 0.0 {
        return OdeState::new(1.0, 0.0);
    }
    let kappa = k2.sqrt();
    let eps = 1e-5 * rho;
    let dq = (q(rho + eps) - q(rho - eps)) / (2.0 * eps);
    let dkappa = dq / (2.0 * kappa);
    OdeState::new(1.0, kappa - dkappa / (2.0 * kappa))
}

/// Liouville-Green matching of (v, v') at ρ against
/// sqrt(λ/p) e^{±iΦ}, Φ(ρ) = λρ + ∫_ρ^∞ (λ − p), p = sqrt(λ² − Q).
fn match_waves(st: &OdeState, rho: f64, lambda: f64, q: &dyn Fn(f64) -> f64) -> Result<(Complex64, Complex64)> {
    let lam2 = lambda * lambda;
    let qv = q(rho);
    if qv >= lam2 {
        return Err(Error::DegenerateMatching(format!("rho = {rho} is not in the classically allowed region")));
    }
    let p = (lam2 - qv).sqrt();
    let eps = 1e-4;
    let dq = (q(rho + eps) - q(rho - eps)) / (2.0 * eps);
    let dp = -dq / (2.0 * p);
    let d = -dp / (2.0 * p);
    let tail = integrate(|r| {
        let qr = q(r);
        qr / (lambda + (lam2 - qr).max(0.0).sqrt())
    }, rho, rho + 40.0, 1e-17, 1e-13);
    let phi = lambda * rho + tail.value;
    let x = (st.dv - d * st.v) / p;
    let amp = (lambda / p).sqrt();
    let i = Complex64::i();
    let a_plus = Complex64::from_polar(1.0, -phi) * (st.v - i * x) / (2.0 * amp);
    let a_minus = Complex64::from_polar(1.0, phi) * (st.v + i * x) / (2.0 * amp);
    Ok((a_minus, a_plus))
}

fn check_separation(lambda: f64, sep: f64) -> Result<()> {
    let x = lambda * sep / PI;
    if (x - x.round()).abs() * PI < 1e-3 {
        return Err(Error::DegenerateMatching(format!("lambda * separation = {} is within 1e-3 of a multiple of pi", lambda * sep)));
    }
    Ok(())
}

fn separation_for(lambda: f64) -> f64 {
    let mut sep = MATCH_SEPARATION;
    while check_separation(lambda, sep).is_err() {
        sep += 0.5 * PI / lambda;
    }
    sep
}

/// (v, v') of the regular solution at `rho_max`, normalized so v(ρ0) = 1
/// (true values are v·e^{log_scale}).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularSolution {
    pub rho: f64,
    pub v: f64,
    pub dv: f64,
    pub log_scale: f64,
    pub rho0: f64,
    pub seed: SeedKind,
}

fn validate(lambda: f64, tol: f64, n: u32) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    Ok(())
}

/// Integrates the regular solution from its automatic start point.
pub fn regular_solution(k: u64, lambda: f64, pot: &RadialPotential, n: u32, rho_max: f64, tol: f64) -> Result<RegularSolution> {
    validate(lambda, tol, n)?;
    let l = frobenius_index(k, n);
    let cc = centrifugal_constant(k, n);
    let start = choose_start(l, lambda, &[pot], cc, rho_max.max(50.0))?;
    run_regular(k, lambda, pot, n, start, rho_max, tol)
}

/// Regular solution with an explicit Frobenius start radius ρ0 ∈ (0, 0.1).
pub fn regular_solution_from(k: u64, lambda: f64, pot: &RadialPotential, n: u32, rho0: f64, rho_max: f64, tol: f64) -> Result<RegularSolution> {
    validate(lambda, tol, n)?;
    if !(rho0 > 0.0 && rho0 < 0.1) {
        return Err(Error::Initialization(format!("rho0 = {rho0} is not in (0, 0.1)")));
    }
    run_regular(k, lambda, pot, n, Start { rho0, kind: SeedKind::Frobenius }, rho_max, tol)
}

fn run_regular(k: u64, lambda: f64, pot: &RadialPotential, n: u32, start: Start, rho_max: f64, tol: f64) -> Result<RegularSolution> {
    if !(rho_max > start.rho0) {
        return Err(Error::InvalidParameter(format!("rho_max = {rho_max} must exceed the start radius {}", start.rho0)));
    }
    let l = frobenius_index(k, n);
    let cc = centrifugal_constant(k, n);
    let q = liouville_q(k, pot, n);
    let mut st = [match start.kind {
        SeedKind::Frobenius => frobenius_state(l, lambda, cc, pot.eval(0.0), start.rho0),
        SeedKind::Wkb => wkb_state(&q, lambda, start.rho0),
    }];
    let lam2 = lambda * lambda;
    propagate(|r, out| out[0] = q(r) - lam2, &mut st, start.rho0, rho_max, StepPolicy::for_tolerance(tol))?;
    Ok(RegularSolution { rho: rho_max, v: st[0].v, dv: st[0].dv, log_scale: st[0].log_scale, rho0: start.rho0, seed: start.kind })
}

/// Ratios a_+/a_− at the two matching radii for several potentials sharing
/// one step sequence.
struct MatchedRun {
    rho_match: f64,
    first: Vec<(Complex64, Complex64)>,
    second: Vec<(Complex64, Complex64)>,
}

fn matched_run(k: u64, lambda: f64, pots: &[&RadialPotential], n: u32, rho_match: f64, separation: f64, tol: f64) -> Result<MatchedRun> {
    check_separation(lambda, separation)?;
    let l = frobenius_index(k, n);
    let cc = centrifugal_constant(k, n);
    let start = choose_start(l, lambda, pots, cc, rho_match)?;
    let lam2 = lambda * lambda;
    for (j, p) in pots.iter().enumerate() {
        let q = liouville_q(k, p, n);
        if q(rho_match).abs() > 1e-6 * lam2 {
            return Err(Error::InvalidParameter(format!("|Q_k(rho_match)| too large at rho_match = {rho_match} (run {j})")));
        }
    }
    let qs: Vec<_> = pots.iter().map(|p| liouville_q(k, p, n)).collect();
    let mut states: Vec<OdeState> = qs
        .iter()
        .zip(pots)
        .map(|(q, p)| match start.kind {
            SeedKind::Frobenius => frobenius_state(l, lambda, cc, p.eval(0.0), start.rho0),
            SeedKind::Wkb => wkb_state(q, lambda, start.rho0),
        })
        .collect();
    let g = |r: f64, out: &mut [f64]| {
        let s = r.sinh();
        let cent = cc / (s * s) - lam2;
        for (o, p) in out.iter_mut().zip(pots) {
            *o = p.eval(r) + cent;
        }
    };
    let pol = StepPolicy::for_tolerance(tol);
    propagate(g, &mut states, start.rho0, rho_match, pol)?;
    let first = states.iter().zip(&qs).map(|(st, q)| match_waves(st, rho_match, lambda, q)).collect::<Result<Vec<_>>>()?;
    propagate(g, &mut states, rho_match, rho_match + separation, pol)?;
    let second = states.iter().zip(&qs).map(|(st, q)| match_waves(st, rho_match + separation, lambda, q)).collect::<Result<Vec<_>>>()?;
    Ok(MatchedRun { rho_match, first, second })
}

fn mean_ratio(a: Complex64, b: Complex64) -> Complex64 {
    a * (b / a).sqrt()
}

/// Coefficients of e^{−iλρ} and e^{iλρ}, normalized to |a_−| = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectionCoefficients {
    pub k: u64,
    pub lambda: f64,
    pub a_minus: Complex64,
    pub a_plus: Complex64,
    pub rho_match: f64,
    /// phase disagreement between the two matching radii
    pub spread: f64,
}

impl ConnectionCoefficients {
    pub fn ratio(&self) -> Complex64 {
        self.a_plus / self.a_minus
    }

    pub fn unitarity_defect(&self) -> f64 {
        (self.a_plus.norm() / self.a_minus.norm() - 1.0).abs()
    }
}

/// The second matching radius sits 1.5 beyond the first, nudged away from
/// λ·Δ ∈ πZ.
pub fn connection_coefficients(k: u64, lambda: f64, pot: &RadialPotential, n: u32, rho_match: Option<f64>, tol: f64) -> Result<ConnectionCoefficients> {
    connection_coefficients_with_separation(k, lambda, pot, n, rho_match, separation_for(lambda), tol)
}

/// As `connection_coefficients` with an explicit separation Δ of the two
/// matching radii; fails when λΔ is within 1e-3 of a multiple of π.
pub fn connection_coefficients_with_separation(k: u64, lambda: f64, pot: &RadialPotential, n: u32, rho_match: Option<f64>, separation: f64, tol: f64) -> Result<ConnectionCoefficients> {
    validate(lambda, tol, n)?;
    let rm = rho_match.unwrap_or_else(|| default_rho_match(k, lambda, pot, n));
    let run = matched_run(k, lambda, &[pot], n, rm, separation, tol)?;
    let (m1, p1) = run.first[0];
    let (m2, p2) = run.second[0];
    let r1 = p1 / m1;
    let r2 = p2 / m2;
    let ratio = mean_ratio(r1, r2);
    // a_− at the first radius fixes the normalization
    let a_minus = m1 / m1.norm();
    Ok(ConnectionCoefficients { k, lambda, a_minus, a_plus: ratio * a_minus, rho_match: run.rho_match, spread: (r2 / r1).arg().abs() })
}

/// Full per-mode result of the paired (V, V=0) computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeShift {
    pub k: u64,
    pub delta: f64,
    pub unitarity_defect: f64,
    pub spread: f64,
    pub rho_match: f64,
    /// arg of a_+/a_− for the V = 0 run
    pub free_phase: f64,
}

pub fn mode_shift(k: u64, lambda: f64, pot: &RadialPotential, n: u32, tol: f64) -> Result<ModeShift> {
    mode_shift_at(k, lambda, pot, n, None, tol)
}

pub fn mode_shift_at(k: u64, lambda: f64, pot: &RadialPotential, n: u32, rho_match: Option<f64>, tol: f64) -> Result<ModeShift> {
    validate(lambda, tol, n)?;
    let zero = RadialPotential::zero();
    let rm = rho_match.unwrap_or_else(|| default_rho_match(k, lambda, pot, n));
    let run = matched_run(k, lambda, &[pot, &zero], n, rm, separation_for(lambda), tol)?;
    let ratio = |x: (Complex64, Complex64)| x.1 / x.0;
    let rv = mean_ratio(ratio(run.first[0]), ratio(run.second[0]));
    let r0 = mean_ratio(ratio(run.first[1]), ratio(run.second[1]));
    let rel1 = ratio(run.first[0]) / ratio(run.first[1]);
    let rel2 = ratio(run.second[0]) / ratio(run.second[1]);
    let delta = wrap_phase((rv / r0).arg());
    Ok(ModeShift { k, delta, unitarity_defect: (rv.norm() - 1.0).abs(), spread: (rel2 / rel1).arg().abs(), rho_match: rm, free_phase: r0.arg() })
}

/// Principal value in [−π, π).
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// δ_k = arg[(a_+/a_−)_V / (a_+/a_−)_0].
pub fn relative_phase_shift(k: u64, lambda: f64, pot: &RadialPotential, n: u32, tol: f64) -> Result<f64> {
    Ok(mode_shift(k, lambda, pot, n, tol)?.delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseEntry {
    pub k: u64,
    pub delta: f64,
    pub multiplicity: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseShiftSpectrum {
    pub lambda: f64,
    pub n: u32,
    pub kmax: u64,
    pub tol: f64,
    pub entries: Vec<PhaseEntry>,
    /// max |δ_k| over the last decile of modes
    pub tail_bound: f64,
    /// max_k |δ_k|·λ
    pub scaled_max: f64,
    pub max_unitarity_defect: f64,
    pub tail_warning: bool,
}

impl PhaseShiftSpectrum {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,delta,multiplicity\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{}\n", e.k, crate::io::fmt_real(e.delta), e.multiplicity));
        }
        s
    }

    pub fn sidecar_json(&self) -> serde_json::Value {
        serde_json::json!({
            "lambda": self.lambda,
            "n": self.n,
            "kmax": self.kmax,
            "tol": self.tol,
            "tail_bound": self.tail_bound,
            "scaled_max": self.scaled_max,
            "max_unitarity_defect": self.max_unitarity_defect,
            "tail_warning": self.tail_warning,
        })
    }
}

/// δ_k for k = 0..=kmax, in parallel; assembly order is by k.
pub fn phase_spectrum(lambda: f64, kmax: u64, pot: &RadialPotential, n: u32, tol: f64) -> Result<PhaseShiftSpectrum> {
    validate(lambda, tol, n)?;
    let shifts: Vec<ModeShift> = (0..=kmax).into_par_iter().map(|k| mode_shift(k, lambda, pot, n, tol)).collect::<Result<_>>()?;
    let entries: Vec<PhaseEntry> = shifts.iter().map(|m| PhaseEntry { k: m.k, delta: m.delta, multiplicity: harmonic_dimension(m.k, n) }).collect();
    let tail_start = (0.9 * kmax as f64).floor() as u64;
    let tail_bound = entries.iter().filter(|e| e.k > tail_start || kmax == 0).map(|e| e.delta.abs()).fold(0.0, f64::max);
    let scaled_max = entries.iter().map(|e| e.delta.abs() * lambda).fold(0.0, f64::max);
    let max_unitarity_defect = shifts.iter().map(|m| m.unitarity_defect).fold(0.0, f64::max);
    Ok(PhaseShiftSpectrum { lambda, n, kmax, tol, entries, tail_bound, scaled_max, max_unitarity_defect, tail_warning: tail_bound > 10.0 * tol })
}

/// Eigenvalues of (1/h)·Im 𝒰_V(s) on degree-k harmonics, k = 0..=kmax, for
/// n = 1, where 𝒰_V(s) = −2iλ 𝒫_0ᵗ(s) V 𝒫_0(1−s) is the first Born term of
/// 𝒯_V(s) − I.
///
/// The Poisson kernel c(s)((1−|w|²)/|w−θ|²)^s is the boundary limit of
/// x'^{−s}R_0(s), a kernel with respect to the boundary measure induced by
/// x²g0, i.e. dθ/2 on the unit circle; operators are diagonalized in that
/// L² space. With e^{sB(w,θ)} = Σ_k a_k(ρ)e^{ik(θ−φ)} the eigenvalue is
/// −4π²λ²|c(s)|² ∫ V(ρ)|a_k(ρ)|² sinh ρ dρ.
pub fn born_eigenvalues_h2(kmax: u64, lambda: f64, pot: &RadialPotential, tol: f64) -> Result<Vec<f64>> {
    validate(lambda, tol, 1)?;
    let spacing = 0.25 / lambda;
    born_with_spacing(kmax, lambda, pot, tol, spacing, 16)
}

pub fn born_eigenvalue_h2(k: u64, lambda: f64, pot: &RadialPotential, tol: f64) -> Result<f64> {
    Ok(born_eigenvalues_h2(k, lambda, pot, tol)?[k as usize])
}

fn born_with_spacing(kmax: u64, lambda: f64, pot: &RadialPotential, tol: f64, spacing: f64, order: usize) -> Result<Vec<f64>> {
    if lambda * spacing > 0.3 {
        return Err(Error::OscillatoryQuadrature(format!("lambda * spacing = {} exceeds 0.3", lambda * spacing)));
    }
    let vmax = (0..=200).map(|i| pot.eval(i as f64 * 0.05).abs()).fold(0.0, f64::max);
    if vmax == 0.0 {
        return Ok(vec![0.0; kmax as usize + 1]);
    }
    let r_max = match pot.tail() {
        Tail::Compact { radius } => radius,
        t => t.radius_for(tol.min(1e-6) * 1e-3 * vmax),
    };
    let panel = spacing * order as f64;
    let panels = (r_max / panel).ceil().max(1.0) as usize;
    let width = r_max / panels as f64;
    let (gx, gw) = gauss_legendre(order);
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let lo = p as f64 * width;
            gx.iter().zip(&gw).map(move |(x, w)| (lo + 0.5 * width * (1.0 + x), 0.5 * width * w)).collect::<Vec<_>>()
        })
        .collect();
    let s = Complex64::new(0.5, lambda);
    let kk = kmax as usize;
    let contributions: Vec<Vec<f64>> = nodes
        .par_iter()
        .map_init(rustfft::FftPlanner::<f64>::new, |planner, &(rho, w)| {
            let v = pot.eval(rho);
            if v == 0.0 {
                return vec![0.0; kk + 1];
            }
            let coeffs = poisson_fourier(planner, rho, s, lambda, kk);
            let weight = w * v * rho.sinh();
            coeffs.iter().map(|a| weight * a.norm_sqr()).collect()
        })
        .collect();
    let c2 = c_of_s(s, 1)?.norm_sqr();
    let pref = -4.0 * PI * PI * lambda * lambda * c2;
    let mut out = vec![0.0; kk + 1];
    for k in 0..=kk {
        let terms: Vec<f64> = contributions.iter().map(|c| c[k]).collect();
        out[k] = pref * crate::quad::pairwise_sum(&terms);
    }
    Ok(out)
}

/// Fourier coefficients a_0..a_kmax of α ↦ exp(s·B), B = log((1−r²)/|w−θ|²),
/// r = tanh(ρ/2), α the angle between w and θ.
fn poisson_fourier(planner: &mut rustfft::FftPlanner<f64>, rho: f64, s: Complex64, lambda: f64, kmax: usize) -> Vec<Complex64> {
    let r = (0.5 * rho).tanh();
    let band = 1.5 * lambda * rho.sinh() + kmax as f64 + 40.0;
    let m = (2.0 * band).max(64.0).log2().ceil().exp2() as usize;
    let ln1mr2 = (1.0 - r * r).ln();
    let mut buf: Vec<Complex64> = (0..m)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / m as f64;
            let b = ln1mr2 - (1.0 + r * r - 2.0 * r * a.cos()).ln();
            (s * b).exp()
        })
        .collect();
    planner.plan_fft_forward(m).process(&mut buf);
    buf.iter().take(kmax + 1).map(|c| c / m as f64).collect()
}

/// Kernel of 𝒰_V on an equispaced angle grid (N points), assembled from
/// the Fourier eigenvalues up to degree kmax; used to check skew-adjointness.
pub fn born_kernel_matrix_h2(kmax: u64, lambda: f64, pot: &RadialPotential, tol: f64, points: usize) -> Result<Vec<Complex64>> {
    let b = born_eigenvalues_h2(kmax, lambda, pot, tol)?;
    // eigenvalue of 𝒰 itself is i·h·b_k
    let mut k_mat = vec![Complex64::new(0.0, 0.0); points * points];
    for i in 0..points {
        for j in 0..points {
            let d = 2.0 * PI * (i as f64 - j as f64) / points as f64;
            let mut acc = Complex64::new(0.0, b[0] / lambda);
            for (k, bk) in b.iter().enumerate().skip(1) {
                acc += Complex64::new(0.0, bk / lambda) * 2.0 * (k as f64 * d).cos();
            }
            k_mat[i * points + j] = acc / PI;
        }
    }
    Ok(k_mat)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centrifugal_differences() {
        for n in 1..=3 {
            for k in 0..20 {
                let d = centrifugal_constant(k + 1, n) - centrifugal_constant(k, n);
                assert!((d - (2 * k + n as u64) as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn wrap_phase_range() {
        for x in [-10.0, -PI, 0.0, PI, 3.0 * PI, 7.5] {
            let y = wrap_phase(x);
            assert!((-PI..PI).contains(&y));
            assert!(((x - y) / (2.0 * PI)).fract().abs() < 1e-12 || ((x - y) / (2.0 * PI)).fract().abs() > 1.0 - 1e-12);
        }
    }

    #[test]
    fn degenerate_separation_is_rejected() {
        assert!(check_separation(PI / 1.5, 1.5).is_err());
        assert!(check_separation(2.0, 1.5).is_ok());
        let s = separation_for(2.0 * PI / 1.5);
        assert!(check_separation(2.0 * PI / 1.5, s).is_ok());
    }

    #[test]
    fn zero_potential_shift_is_exactly_zero() {
        let z = RadialPotential::zero();
        for k in [0, 3, 40] {
            assert_eq!(relative_phase_shift(k, 20.0, &z, 1, 1e-10).unwrap(), 0.0);
        }
    }

    #[test]
    fn free_run_matches_closed_form() {
        let z = RadialPotential::zero();
        for n in [1, 2, 3] {
            for k in [0, 1, 5, 30] {
                let c = connection_coefficients(k, 15.0, &z, n, None, 1e-12).unwrap();
                let exact = free_connection_ratio(k, 15.0, n);
                assert!((c.ratio() / exact).arg().abs() < 1e-8, "n={n} k={k}: {}", (c.ratio() / exact).arg());
            }
        }
    }
}
