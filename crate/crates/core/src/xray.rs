//! Geodesic X-ray transform, the radial classical profile G_V and the
//! limiting measure ν.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{t_of_u, BallPoint, GeodesicChart};
use crate::potentials::{AmbientPotential, RadialPotential, Tail};
use crate::quad::{integrate, pairwise_sum};
use crate::specfun::sphere_volume;
use crate::spline::CubicSpline;

/// Half-width S (in arclength) of the part of the geodesic with ρ ≤ R.
fn arclength_window(rho_min: f64, cutoff: f64) -> Option<f64> {
    if rho_min >= cutoff {
        return None;
    }
    Some((cutoff.cosh() / rho_min.cosh()).acosh())
}

fn tail_cutoff(tail: &Tail, tol: f64) -> Result<f64> {
    let r = tail.geodesic_cutoff(tol);
    if !r.is_finite() || r >= 1e4 {
        return Err(Error::ToleranceNotMet(format!("tail bound cannot certify tol = {tol:e}")));
    }
    Ok(r)
}

/// Trapezoid rule on [a, b] with repeated halving until successive
/// estimates agree to `tol`.
fn refined_trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut n = (((b - a) / 0.5).ceil() as usize).max(16);
    let mut h = (b - a) / n as f64;
    let mut vals: Vec<f64> = (0..=n).map(|i| f(a + i as f64 * h)).collect();
    vals[0] *= 0.5;
    vals[n] *= 0.5;
    let mut sum = pairwise_sum(&vals);
    let mut est = sum * h;
    for level in 0..16 {
        let mids: Vec<f64> = (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).collect();
        sum += pairwise_sum(&mids);
        n *= 2;
        h *= 0.5;
        let new = sum * h;
        let diff = (new - est).abs();
        est = new;
        if level >= 1 && diff <= 0.25 * tol {
            return Ok(est);
        }
    }
    Err(Error::ToleranceNotMet(format!("trapezoid refinement did not reach {tol:e}")))
}

/// X(V)(ξ,θ) = ∫ V(γ(s)) ds over the geodesic, ds hyperbolic arclength, with
/// absolute error ≤ tol.
///
/// In the variable u = log(−(1+2t)) the arclength element is du, and the
/// integrand decays like V(ρ) with ρ ≥ |u − u*|.
pub fn xray_general(pot: &AmbientPotential, chart: &GeodesicChart, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let cutoff = tail_cutoff(&pot.tail(), 0.5 * tol)?;
    let Some(s) = arclength_window(chart.rho_min(), cutoff) else {
        return Ok(0.0);
    };
    let uc = chart.closest_u();
    let f = |u: f64| match BallPoint::new(chart.point_unchecked(t_of_u(u))) {
        Ok(w) => pot.eval(&w),
        // only reachable deep in the certified tail
        Err(_) => 0.0,
    };
    refined_trapezoid(f, uc - s, uc + s, 0.5 * tol)
}

/// X(V) along any geodesic at distance asinh(2a) from the origin, i.e. a chart
/// with |ξ| = a, evaluated in the original parameter t:
/// ∫ V(T(a,t)) · (−2/(1+2t)) dt with T(a,t) = log((1+A)/(1−A)),
/// A² = ((1+t)²+a²)/(t²+a²).
pub fn xray_radial_at(pot: &RadialPotential, a: f64, tol: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(Error::Domain(format!("|xi| must be nonnegative, got {a}")));
    }
    let cutoff = tail_cutoff(&pot.tail(), 0.25 * tol)?;
    let rho_min = (2.0 * a).asinh();
    let Some(s) = arclength_window(rho_min, cutoff) else {
        return Ok(0.0);
    };
    let a2 = a * a;
    let f = |t: f64| {
        let den = t * t + a2;
        let one_minus = -(1.0 + 2.0 * t) / den; // 1 − A²
        let big_a = (1.0 - one_minus).max(0.0).sqrt();
        let rho = 2.0 * big_a.ln_1p() - one_minus.ln();
        pot.eval(rho) * (-2.0 / (1.0 + 2.0 * t))
    };
    let uc = 0.5 * (4.0 * a2).ln_1p();
    let t_star = t_of_u(uc);
    let t_lo = t_of_u(uc + s);
    let t_hi = t_of_u(uc - s);
    let r1 = integrate(f, t_lo, t_star, 0.125 * tol, 1e-15);
    let r2 = integrate(f, t_star, t_hi, 0.125 * tol, 1e-15);
    if !(r1.converged && r2.converged) {
        return Err(Error::ToleranceNotMet(format!("adaptive quadrature failed at |xi| = {a}")));
    }
    Ok(r1.value + r2.value)
}

/// G_V(r) = −2^{n−1} X(V)(ξ/2, θ), r = |ξ|.
pub fn g_value(pot: &RadialPotential, r: f64, n: u32, tol: f64) -> Result<f64> {
    let scale = 2f64.powi(n as i32 - 1);
    Ok(-scale * xray_radial_at(pot, 0.5 * r, tol / scale)?)
}

/// Sampled G_V.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalProfile {
    pub r_grid: Vec<f64>,
    pub g_values: Vec<f64>,
    pub monotone_decreasing: bool,
    pub tail_exponent: f64,
    pub n: u32,
    /// G vanishes for r ≥ this radius, when known.
    pub support_radius: Option<f64>,
}

impl ClassicalProfile {
    pub fn new(r_grid: Vec<f64>, g_values: Vec<f64>, n: u32, tail_exponent: f64, support_radius: Option<f64>) -> Result<Self> {
        if r_grid.len() != g_values.len() || r_grid.is_empty() {
            return Err(Error::InvalidParameter("profile grid and values must be nonempty and of equal length".into()));
        }
        if r_grid[0] < 0.0 || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("r grid must be nonnegative and strictly increasing".into()));
        }
        let monotone_decreasing = g_values.windows(2).all(|w| w[1] <= w[0] + 1e-10);
        Ok(Self { r_grid, g_values, monotone_decreasing, tail_exponent, n, support_radius })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(r_grid: Vec<f64>, g: F, n: u32) -> Result<Self> {
        let vals = r_grid.iter().map(|&r| g(r)).collect();
        Self::new(r_grid, vals, n, f64::INFINITY, None)
    }

    /// Smallest C with |G(r_i)| ≤ C(1+r_i)^{−m} on the grid.
    pub fn decay_constant(&self, m: f64) -> f64 {
        self.r_grid.iter().zip(&self.g_values).map(|(r, g)| g.abs() * (1.0 + r).powf(m)).fold(0.0, f64::max)
    }

    pub fn interpolant(&self) -> Result<CubicSpline> {
        CubicSpline::new(self.r_grid.clone(), self.g_values.clone())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,G\n");
        for (r, g) in self.r_grid.iter().zip(&self.g_values) {
            s.push_str(&format!("{},{}\n", crate::io::fmt_real(*r), crate::io::fmt_real(*g)));
        }
        s
    }

    pub fn from_csv(text: &str, n: u32) -> Result<Self> {
        let rows = crate::io::parse_csv(text, &["r", "G"])?;
        let (r, g): (Vec<f64>, Vec<f64>) = rows.into_iter().map(|v| (v[0], v[1])).unzip();
        Self::new(r, g, n, f64::INFINITY, None)
    }
}

/// Evaluates G_V on a grid (parallel over grid points).
pub fn xray_radial_profile(pot: &RadialPotential, r_grid: &[f64], n: u32, tol: f64) -> Result<ClassicalProfile> {
    let vals: Result<Vec<f64>> = r_grid.par_iter().map(|&r| g_value(pot, r, n, tol)).collect();
    // geodesics with |ξ/2| ≥ a miss the support when asinh(2a) ≥ R
    let support = match pot.tail() {
        Tail::Compact { radius } => Some(radius.sinh()),
        _ => None,
    };
    ClassicalProfile::new(r_grid.to_vec(), vals?, n, pot.decay_exponent(), support)
}

/// ∫_{S^n}∫_{R^n} f(G(|ξ|)) dξ dθ = vol(S^n)·vol(S^{n−1})·∫_0^∞ f(G(r)) r^{n−1} dr,
/// with the r-integral truncated at `r_max` (G must be negligible beyond).
pub fn classical_nu_integral_fn<G, F>(g: G, r_max: f64, f: F, n: u32, tol: f64) -> Result<f64>
where
    G: Fn(f64) -> f64,
    F: Fn(f64) -> f64,
{
    if f(0.0) != 0.0 {
        return Err(Error::NonIntegrable("f(0) != 0: the integral over R^n diverges".into()));
    }
    let c = sphere_volume(n) * sphere_volume(n - 1);
    let integrand = |r: f64| f(g(r)) * r.powi(n as i32 - 1);
    // split at a few radii so the peak near 0 is resolved
    let mut edges = vec![0.0];
    let mut e = 1.0;
    while e < r_max {
        edges.push(e);
        e *= 2.0;
    }
    edges.push(r_max);
    let mut parts = Vec::new();
    let per = tol / c / edges.len() as f64;
    for w in edges.windows(2) {
        let q = integrate(integrand, w[0], w[1], per, 1e-14);
        if !q.converged {
            return Err(Error::ToleranceNotMet(format!("nu integral on [{}, {}]", w[0], w[1])));
        }
        parts.push(q.value);
    }
    Ok(c * pairwise_sum(&parts))
}

/// ν-pairing for a sampled profile (cubic interpolation; zero past the grid
/// when the support is known to end there).
pub fn classical_nu_integral<F: Fn(f64) -> f64>(profile: &ClassicalProfile, f: F, tol: f64) -> Result<f64> {
    let spline = profile.interpolant()?;
    let r_max = *profile.r_grid.last().unwrap();
    let r_min = profile.r_grid[0];
    if r_min > 0.0 {
        return Err(Error::InvalidParameter("profile grid must start at r = 0".into()));
    }
    classical_nu_integral_fn(|r| spline.eval(r), r_max, f, profile.n, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_potential_transforms_vanish() {
        let z = RadialPotential::zero();
        let c = GeodesicChart::new(vec![1.0, 0.0], vec![0.0, 0.3]).unwrap();
        assert_eq!(xray_general(&z.to_ambient(), &c, 1e-10).unwrap(), 0.0);
        assert_eq!(g_value(&z, 0.7, 1, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_through_origin() {
        // G(0) = 2∫_0^∞ e^{−s²} ds = √π for n = 1
        let v = RadialPotential::gaussian_rho(1.0, 1.0).unwrap();
        let g0 = g_value(&v, 0.0, 1, 1e-12).unwrap();
        assert!((g0 - std::f64::consts::PI.sqrt()).abs() < 1e-11);
        let g0_n2 = g_value(&v, 0.0, 2, 1e-12).unwrap();
        assert!((g0_n2 - 2.0 * std::f64::consts::PI.sqrt()).abs() < 2e-11);
    }

    #[test]
    fn nu_integral_rejects_nonvanishing_f() {
        assert!(matches!(classical_nu_integral_fn(|r| (-r).exp(), 30.0, |t| 1.0 + t, 1, 1e-8), Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn profile_flags() {
        let p = ClassicalProfile::from_fn((0..50).map(|i| i as f64 * 0.1).collect(), |r| (-r).exp(), 1).unwrap();
        assert!(p.monotone_decreasing);
        let q = ClassicalProfile::from_fn((0..50).map(|i| i as f64 * 0.1).collect(), |r| r.sin(), 1).unwrap();
        assert!(!q.monotone_decreasing);
        assert!((p.decay_constant(0.0) - 1.0).abs() < 1e-15);
    }
}
