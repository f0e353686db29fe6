//! Ball model of hyperbolic space H^{n+1} with metric 4|dw|²/(1−|w|²)².

use num_complex::Complex64;

use crate::error::{Error, Result};

const UNIT_TOL: f64 = 1e-12;
const REPAIR_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a)
}

/// A point of the open unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BallPoint {
    w: Vec<f64>,
}

impl BallPoint {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("ball point needs finite coordinates".into()));
        }
        if norm2(&w) >= 1.0 {
            return Err(Error::Domain(format!("|w| = {} is not inside the unit ball", norm2(&w).sqrt())));
        }
        Ok(Self { w })
    }

    pub fn origin(dim: usize) -> Self {
        Self { w: vec![0.0; dim] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.w
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.w).sqrt()
    }

    /// Distance to the origin, log((1+|w|)/(1−|w|)).
    pub fn rho(&self) -> f64 {
        let r = self.norm();
        (r.ln_1p() - (-r).ln_1p()).max(0.0)
    }
}

/// Boundary defining function x(w) = (1−|w|)/(1+|w|) = e^{−ρ(w)}.
pub fn boundary_defining_function(w: &BallPoint) -> f64 {
    let r = w.norm();
    (1.0 - r) / (1.0 + r)
}

pub fn hyperbolic_distance(w: &BallPoint, w2: &BallPoint) -> Result<f64> {
    if w.w.len() != w2.w.len() {
        return Err(Error::Domain("points live in different dimensions".into()));
    }
    let diff: f64 = w.w.iter().zip(&w2.w).map(|(a, b)| (a - b) * (a - b)).sum();
    let q = 2.0 * diff / ((1.0 - norm2(&w.w)) * (1.0 - norm2(&w2.w)));
    // acosh(1+q) written to keep accuracy for small q
    Ok((q + (q * (q + 2.0)).sqrt()).ln_1p())
}

/// A circle geodesic γ(t) = θ + (tθ+ξ)/(t²+|ξ|²), t < −1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicChart {
    theta: Vec<f64>,
    xi: Vec<f64>,
}

impl GeodesicChart {
    /// Validates the chart; θ is renormalized and ξ projected onto θ^⊥ when
    /// the defect is below 1e-9.
    pub fn new(theta: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if theta.len() < 2 || theta.len() != xi.len() {
            return Err(Error::Domain("theta and xi must have the same length ≥ 2".into()));
        }
        if theta.iter().chain(&xi).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite chart".into()));
        }
        let mut theta = theta;
        let mut xi = xi;
        let tn = norm2(&theta).sqrt();
        if (tn - 1.0).abs() > UNIT_TOL {
            if (tn - 1.0).abs() > REPAIR_TOL {
                return Err(Error::Domain(format!("|theta| = {tn} is not 1")));
            }
            theta.iter_mut().for_each(|v| *v /= tn);
        }
        let d = dot(&xi, &theta);
        if d.abs() > UNIT_TOL {
            if d.abs() > REPAIR_TOL {
                return Err(Error::Domain(format!("<xi, theta> = {d} is not 0")));
            }
            xi.iter_mut().zip(&theta).for_each(|(x, t)| *x -= d * t);
        }
        if norm2(&xi) == 0.0 {
            return Err(Error::Domain("xi = 0 (rays through the origin) is excluded".into()));
        }
        Ok(Self { theta, xi })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn xi_norm(&self) -> f64 {
        norm2(&self.xi).sqrt()
    }

    /// Boundary dimension n (vectors have length n+1).
    pub fn n(&self) -> usize {
        self.theta.len() - 1
    }

    /// Chart with ξ replaced by c·ξ.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.theta.clone(), self.xi.iter().map(|v| c * v).collect())
    }

    /// Point at parameter t, without the t < −1/2 check; t = −1/2 gives the
    /// exit point on the sphere.
    pub(crate) fn point_unchecked(&self, t: f64) -> Vec<f64> {
        let den = t * t + norm2(&self.xi);
        self.theta.iter().zip(&self.xi).map(|(th, x)| th + (t * th + x) / den).collect()
    }

    /// u-coordinate of the point closest to the origin; u = log(−(1+2t)) is
    /// hyperbolic arclength up to orientation.
    pub fn closest_u(&self) -> f64 {
        0.5 * (4.0 * norm2(&self.xi)).ln_1p()
    }

    /// Distance from the origin to the geodesic, asinh(2|ξ|).
    pub fn rho_min(&self) -> f64 {
        (2.0 * self.xi_norm()).asinh()
    }

    /// Distance to the origin of the point with arclength coordinate u.
    pub fn rho_at_u(&self, u: f64) -> f64 {
        let t = -0.5 * (1.0 + u.exp());
        let den = t * t + norm2(&self.xi);
        let one_minus = u.exp() / den; // 1 − |γ|²
        let g = (1.0 - one_minus).max(0.0).sqrt();
        2.0 * g.ln_1p() - one_minus.ln()
    }
}

pub fn t_of_u(u: f64) -> f64 {
    -0.5 * (1.0 + u.exp())
}

pub fn geodesic_point(t: f64, chart: &GeodesicChart) -> Result<BallPoint> {
    if !(t < -0.5) {
        return Err(Error::Domain(format!("t = {t} must be < -1/2")));
    }
    let w = chart.point_unchecked(t);
    // |γ|² = 1 + (1+2t)/(t²+|ξ|²) < 1 holds analytically; rounding may hit 1
    if norm2(&w) >= 1.0 {
        return Err(Error::Domain(format!("t = {t} is numerically on the boundary")));
    }
    Ok(BallPoint { w })
}

/// g0-speed of the parametrization, −2/(1+2t).
pub fn geodesic_speed(t: f64, _chart: &GeodesicChart) -> Result<f64> {
    if !(t < -0.5) {
        return Err(Error::Domain(format!("t = {t} must be < -1/2")));
    }
    Ok(-2.0 / (1.0 + 2.0 * t))
}

/// Exit point θ' = γ(−1/2) and the chart (θ', ξ') of the reversed geodesic,
/// so that γ(−1/2, −ξ', θ') = θ.
pub fn scattering_relation(chart: &GeodesicChart) -> (Vec<f64>, Vec<f64>) {
    let theta2 = chart.point_unchecked(-0.5);
    let c = dot(chart.theta(), &theta2);
    // ⟨ξ',θ'⟩ = 0 forces 1/4 + |ξ'|² = 1/(2(1−⟨θ,θ'⟩))
    let a = 0.5 / (1.0 - c);
    let xi2 = chart.theta().iter().zip(&theta2).map(|(th, t2)| -a * (th - t2) - 0.5 * t2).collect();
    (theta2, xi2)
}

/// n, λ and the derived h = 1/λ, s = n/2 + iλ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParameter {
    n: u32,
    lambda: f64,
    h: f64,
}

impl SpectralParameter {
    pub fn new(n: u32, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { n, lambda, h: 1.0 / lambda })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn s(&self) -> Complex64 {
        Complex64::new(self.n as f64 / 2.0, self.lambda)
    }
}
