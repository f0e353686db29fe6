//! Complex gamma-type functions and the free scattering data on the sphere.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

// B_{2k} for k = 1..8
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

fn check_pole(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Pole(format!("{z}")));
    }
    Ok(())
}

fn shift_count(z: Complex64) -> usize {
    let mut n = 0usize;
    let mut w = z;
    while w.re < 0.5 || w.norm() < 15.0 {
        w += 1.0;
        n += 1;
    }
    n
}

/// log Γ(z), continued analytically from the positive real axis with the
/// cut along the negative real axis.
pub fn complex_log_gamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    let n = shift_count(z);
    let mut corr = Complex64::new(0.0, 0.0);
    for j in 0..n {
        corr += (z + j as f64).ln();
    }
    let w = z + n as f64;
    let w_inv = w.inv();
    let w_inv2 = w_inv * w_inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = w_inv;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let kk = 2.0 * (k as f64 + 1.0);
        series += pow * (b / (kk * (kk - 1.0)));
        pow *= w_inv2;
    }
    let stirling = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series;
    Ok(stirling - corr)
}

pub fn complex_gamma(z: Complex64) -> Result<Complex64> {
    Ok(complex_log_gamma(z)?.exp())
}

/// Digamma ψ(z) = Γ'(z)/Γ(z).
pub fn digamma(z: Complex64) -> Result<Complex64> {
    check_pole(z)?;
    let n = shift_count(z);
    let mut corr = Complex64::new(0.0, 0.0);
    for j in 0..n {
        corr += (z + j as f64).inv();
    }
    let w = z + n as f64;
    let w_inv2 = (w * w).inv();
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = w_inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let kk = 2.0 * (k as f64 + 1.0);
        series += pow * (b / kk);
        pow *= w_inv2;
    }
    Ok(w.ln() - 0.5 * w.inv() - series - corr)
}

/// Normalizing constant of the free Poisson kernel,
/// c(s) = Γ(s) / (2 π^{n/2} Γ(s − n/2 + 1)).
pub fn c_of_s(s: Complex64, n: u32) -> Result<Complex64> {
    let nh = n as f64 / 2.0;
    let lg = complex_log_gamma(s)? - complex_log_gamma(s - nh + 1.0)?;
    Ok(lg.exp() / (2.0 * PI.powf(nh)))
}

/// Γ(−iλ)/Γ(iλ), a unit complex number for real λ.
pub fn gamma_phase_ratio(lambda: f64) -> Complex64 {
    let lg = complex_log_gamma(Complex64::new(0.0, lambda)).expect("iλ is never a pole for λ ≠ 0");
    Complex64::from_polar(1.0, -2.0 * lg.im)
}

/// Volume of the unit sphere S^d ⊂ R^{d+1}.
pub fn sphere_volume(d: u32) -> f64 {
    let a = (d as f64 + 1.0) / 2.0;
    2.0 * PI.powf(a) / real_gamma(a)
}

/// Volume of the unit ball in R^d.
pub fn ball_volume(d: u32) -> f64 {
    let a = d as f64 / 2.0;
    PI.powf(a) / real_gamma(a + 1.0)
}

fn real_gamma(x: f64) -> f64 {
    complex_gamma(Complex64::new(x, 0.0)).expect("positive argument").re
}

/// Eigenvalue of the free scattering matrix on degree-k harmonics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEigenvalue {
    pub k: u64,
    pub lambda: f64,
    pub value: Complex64,
    pub multiplicity: u64,
    /// k = 0: the power (k(k+n−1))^{iλ} is undefined and dropped, so only
    /// relative quantities built from this value are meaningful.
    pub conventional: bool,
}

pub fn free_eigenvalue_mu_k(k: u64, lambda: f64, n: u32) -> FreeEigenvalue {
    let base = gamma_phase_ratio(lambda);
    let (value, conventional) = if k == 0 {
        (base, true)
    } else {
        let ev = (k as f64) * (k as f64 + n as f64 - 1.0);
        (base * Complex64::from_polar(1.0, lambda * ev.ln()), false)
    };
    FreeEigenvalue { k, lambda, value, multiplicity: harmonic_dimension(k, n), conventional }
}

/// Dimension of the space of degree-k spherical harmonics on S^n.
pub fn harmonic_dimension(k: u64, n: u32) -> u64 {
    if k == 0 {
        return 1;
    }
    // (2k+n−1)(k+n−2)! / (k!(n−1)!) = (2k+n−1)/(k+n−1) · C(k+n−1, n−1)
    let n = n as u64;
    let c = binomial(k + n - 1, n - 1);
    c * (2 * k + n - 1) / (k + n - 1)
}

/// Binomial coefficient; exact in u64 for the sizes used here.
pub fn binomial(a: u64, b: u64) -> u64 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut r: u128 = 1;
    for i in 0..b {
        r = r * (a - i) as u128 / (i + 1) as u128;
    }
    r as u64
}

/// Radial factor of the free resolvent kernel, R_0(s; w, w') = τ^{−s} G(s, τ)
/// with τ = cosh d(w, w').
pub fn resolvent_series_g(s: Complex64, tau: f64, n: u32, tol: f64) -> Result<Complex64> {
    if !(tau > 1.0) {
        return Err(Error::Domain(format!("tau must exceed 1, got {tau}")));
    }
    let nh = n as f64 / 2.0;
    let ln_tau2 = 2.0 * tau.ln();
    let ln4 = 4.0f64.ln();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev_abs = f64::INFINITY;
    let mut shrinking = 0;
    for j in 0..10_000u32 {
        let jf = j as f64;
        let ln_term = complex_log_gamma(s + 2.0 * jf)? - complex_log_gamma(s - nh + jf + 1.0)? - complex_log_gamma(Complex64::new(jf + 1.0, 0.0))?
            - jf * ln4
            - jf * ln_tau2;
        let term = ln_term.exp();
        sum += term;
        let a = term.norm();
        if a < prev_abs {
            shrinking += 1;
        } else {
            shrinking = 0;
        }
        prev_abs = a;
        if shrinking >= 3 && a <= tol * sum.norm() {
            let pref = PI.powf(-nh) * Complex64::new(2.0, 0.0).powc(-s - 1.0);
            return Ok(pref * sum);
        }
    }
    Err(Error::Divergence(format!("resolvent series did not converge for tau={tau}")))
}
