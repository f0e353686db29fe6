//! Recovering G_V from its level-set measure and V from G_V.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potentials::{RadialPotential, Tail};
use crate::specfun::{ball_volume, sphere_volume};
use crate::xray::{g_value, ClassicalProfile};

/// Knot spacing used when no ρ grid is supplied.
pub const DEFAULT_KNOT_SPACING: f64 = 0.1;
/// Regularization levels scanned by the L-curve.
pub const L_CURVE_REGS: [f64; 8] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Non-increasing profile recovered from level-set data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneProfile {
    pub r_grid: Vec<f64>,
    pub g_values: Vec<f64>,
    /// G(0) = sup G
    pub g0: f64,
    /// G vanishes beyond this radius, when known
    pub support_radius: Option<f64>,
}

impl MonotoneProfile {
    pub fn new(r_grid: Vec<f64>, g_values: Vec<f64>, g0: f64, support_radius: Option<f64>) -> Result<Self> {
        if r_grid.len() != g_values.len() || r_grid.is_empty() {
            return Err(Error::InvalidParameter("profile grid and values must be nonempty and of equal length".into()));
        }
        if r_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("r grid must be strictly increasing".into()));
        }
        for w in g_values.windows(2) {
            if w[0] > 1e-12 && !(w[1] < w[0]) {
                return Err(Error::NonMonotone(format!("profile is not strictly decreasing at G = {}", w[0])));
            }
        }
        Ok(Self { r_grid, g_values, g0, support_radius })
    }

    pub fn to_classical(&self, n: u32) -> Result<ClassicalProfile> {
        ClassicalProfile::new(self.r_grid.clone(), self.g_values.clone(), n, f64::INFINITY, self.support_radius)
    }
}

/// Monotone rearrangement: for each positive level α,
/// r(α) = [ν(α, ∞) / (vol(S^n)·vol(B^n))]^{1/n} is the radius where G = α.
/// `nu(a, b)` is the ν-mass of (a, b).
pub fn profile_from_measure<F>(nu: F, n: u32, value_grid: &[f64]) -> Result<MonotoneProfile>
where
    F: Fn(f64, f64) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if value_grid.is_empty() || value_grid.iter().any(|a| !(*a > 0.0)) || value_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("value grid must be positive and strictly increasing".into()));
    }
    let norm = sphere_volume(n) * ball_volume(n);
    let radius = |a: f64| -> Result<f64> {
        let m = nu(a, f64::INFINITY);
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("nu({a}, inf) = {m} is not a finite nonnegative mass")));
        }
        Ok((m / norm).powf(1.0 / n as f64))
    };
    let radii = value_grid.iter().map(|&a| radius(a)).collect::<Result<Vec<f64>>>()?;
    let levels: Vec<(f64, f64)> = radii.iter().copied().zip(value_grid.iter().copied()).filter(|(r, _)| *r > 0.0).collect();
    if levels.is_empty() {
        return MonotoneProfile::new(vec![0.0], vec![0.0], 0.0, Some(0.0));
    }
    for w in levels.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(Error::NonMonotone(format!("recovered radius does not decrease between levels {} and {}", w[0].1, w[1].1)));
        }
    }
    // sup G: bisect the distribution function when a level above it is known
    let top = levels.last().unwrap().1;
    let g0 = match value_grid.iter().find(|&&a| a > top) {
        Some(&above) => {
            let (mut lo, mut hi) = (top, above);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if radius(mid)? > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
        None => top,
    };
    let (r, g): (Vec<f64>, Vec<f64>) = levels.into_iter().rev().unzip();
    MonotoneProfile::new(r, g, g0, None)
}

/// Cubic B-spline with unit knot spacing, supported on [−2, 2].
fn bspline(x: f64) -> f64 {
    let a = x.abs();
    if a >= 2.0 {
        0.0
    } else if a >= 1.0 {
        let t = 2.0 - a;
        t * t * t / 6.0
    } else {
        (4.0 - 6.0 * a * a + 3.0 * a * a * a) / 6.0
    }
}

/// Even spline basis on a uniform ρ grid: φ_j(ρ) = β((ρ−ρ_j)/h) + β((ρ+ρ_j)/h)
/// for j ≥ 1 and φ_0 = β(ρ/h).
#[derive(Debug, Clone, PartialEq)]
pub struct EvenSplineBasis {
    pub knots: Vec<f64>,
    pub spacing: f64,
}

impl EvenSplineBasis {
    pub fn new(rho_grid: &[f64]) -> Result<Self> {
        if rho_grid.len() < 4 || rho_grid[0] != 0.0 {
            return Err(Error::InvalidParameter("rho grid must start at 0 and have at least 4 points".into()));
        }
        let h = rho_grid[1] - rho_grid[0];
        if !(h > 0.0) || rho_grid.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h) {
            return Err(Error::InvalidParameter("rho grid must be uniform and increasing".into()));
        }
        Ok(Self { knots: rho_grid.to_vec(), spacing: h })
    }

    pub fn uniform(rho_max: f64, spacing: f64) -> Result<Self> {
        let m = (rho_max / spacing).round() as usize;
        Self::new(&(0..=m).map(|i| i as f64 * spacing).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn element(&self, j: usize, rho: f64) -> f64 {
        let h = self.spacing;
        let c = self.knots[j];
        if j == 0 {
            bspline(rho / h)
        } else {
            bspline((rho - c) / h) + bspline((rho + c) / h)
        }
    }

    pub fn support_end(&self) -> f64 {
        self.knots[self.knots.len() - 1] + 2.0 * self.spacing
    }

    fn element_potential(&self, j: usize) -> RadialPotential {
        let b = self.clone();
        let end = self.knots[j] + 2.0 * self.spacing;
        RadialPotential::from_fn("spline_basis", move |r| b.element(j, r), f64::INFINITY, Tail::Compact { radius: end })
    }

    pub fn combination(&self, coeffs: &[f64]) -> RadialPotential {
        let b = Arc::new(self.clone());
        let c = coeffs.to_vec();
        let end = self.support_end();
        RadialPotential::from_fn(
            "reconstructed",
            move |r| {
                if r >= end {
                    return 0.0;
                }
                // nearby knots only; mirror terms live at j ≤ 1, inside this window for small r
                let i = (r / b.spacing).floor() as isize;
                let mut s = 0.0;
                for j in (i - 2).max(0)..=(i + 2).min(c.len() as isize - 1) {
                    s += c[j as usize] * b.element(j as usize, r);
                }
                s
            },
            f64::INFINITY,
            Tail::Compact { radius: end },
        )
    }
}

/// Forward matrix A_ij = G_{φ_j}(r_i).
pub fn forward_matrix(basis: &EvenSplineBasis, r_grid: &[f64], n: u32, tol: f64) -> Result<DMatrix<f64>> {
    let cols: Vec<Vec<f64>> = (0..basis.len())
        .into_par_iter()
        .map(|j| {
            let p = basis.element_potential(j);
            r_grid.iter().map(|&r| g_value(&p, r, n, tol)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(r_grid.len(), basis.len(), |i, j| cols[j][i]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LCurvePoint {
    pub reg: f64,
    pub residual_norm: f64,
    pub solution_norm: f64,
}

/// Reconstructed potential plus solver diagnostics.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub potential: RadialPotential,
    pub coefficients: Vec<f64>,
    pub reg: f64,
    pub condition: f64,
    /// ||A c − G||_2 / sqrt(rows)
    pub rms_residual: f64,
    pub max_residual: f64,
    pub l_curve: Vec<LCurvePoint>,
}

struct SvdSolver {
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    v_t: DMatrix<f64>,
    a: DMatrix<f64>,
}

impl SvdSolver {
    fn new(a: DMatrix<f64>) -> Self {
        let svd = a.clone().svd(true, true);
        Self { u: svd.u.unwrap(), sigma: svd.singular_values, v_t: svd.v_t.unwrap(), a }
    }

    fn condition(&self) -> f64 {
        let max = self.sigma.max();
        let min = self.sigma.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Tikhonov solution with penalty reg·σ_max²·||c||².
    fn solve(&self, b: &DVector<f64>, reg: f64) -> DVector<f64> {
        let smax = self.sigma.max();
        let beta = self.u.transpose() * b;
        let lam = reg * smax * smax;
        let mut y = DVector::zeros(self.sigma.len());
        for i in 0..self.sigma.len() {
            let s = self.sigma[i];
            let den = s * s + lam;
            y[i] = if den > 0.0 { s * beta[i] / den } else { 0.0 };
        }
        self.v_t.transpose() * y
    }
}

/// Solves G(r_i) = Σ_j c_j G_{φ_j}(r_i) in the least-squares sense with
/// Tikhonov weight reg (relative to the largest singular value squared).
pub fn potential_from_profile(profile: &ClassicalProfile, rho_grid: &[f64], reg: f64) -> Result<Reconstruction> {
    potential_from_profile_tol(profile, rho_grid, reg, 1e-12)
}

pub fn potential_from_profile_tol(profile: &ClassicalProfile, rho_grid: &[f64], reg: f64, tol: f64) -> Result<Reconstruction> {
    if !(reg >= 0.0) {
        return Err(Error::InvalidParameter("reg must be nonnegative".into()));
    }
    let basis = EvenSplineBasis::new(rho_grid)?;
    if profile.r_grid.len() < basis.len() {
        return Err(Error::InsufficientData(format!("{} profile samples for {} basis functions", profile.r_grid.len(), basis.len())));
    }
    let b = DVector::from_column_slice(&profile.g_values);
    if b.iter().all(|x| *x == 0.0) {
        return Ok(Reconstruction {
            potential: basis.combination(&vec![0.0; basis.len()]),
            coefficients: vec![0.0; basis.len()],
            reg,
            condition: f64::NAN,
            rms_residual: 0.0,
            max_residual: 0.0,
            l_curve: Vec::new(),
        });
    }
    let a = forward_matrix(&basis, &profile.r_grid, profile.n, tol)?;
    let solver = SvdSolver::new(a);
    let cond = solver.condition();
    if reg == 0.0 && cond > 1e12 {
        return Err(Error::IllConditioned(format!("condition estimate {cond:e} exceeds 1e12 without regularization")));
    }
    let l_curve = L_CURVE_REGS
        .iter()
        .map(|&r| {
            let c = solver.solve(&b, r);
            LCurvePoint { reg: r, residual_norm: (&solver.a * &c - &b).norm(), solution_norm: c.norm() }
        })
        .collect();
    let c = solver.solve(&b, reg);
    let res = &solver.a * &c - &b;
    let coefficients: Vec<f64> = c.iter().copied().collect();
    Ok(Reconstruction {
        potential: basis.combination(&coefficients),
        coefficients,
        reg,
        condition: cond,
        rms_residual: res.norm() / (res.len() as f64).sqrt(),
        max_residual: res.amax(),
        l_curve,
    })
}

/// L-curve corner: the point nearest the origin after normalizing the
/// log residual and log solution norms to [0, 1].
pub fn l_curve_corner(points: &[LCurvePoint]) -> Option<f64> {
    let pts: Vec<(f64, f64, f64)> = points
        .iter()
        .filter(|p| p.residual_norm > 0.0 && p.solution_norm > 0.0)
        .map(|p| (p.reg, p.residual_norm.ln(), p.solution_norm.ln()))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let span = |f: fn(&(f64, f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        (lo, (hi - lo).max(1e-300))
    };
    let (rl, rs) = span(|p| p.1);
    let (sl, ss) = span(|p| p.2);
    pts.iter()
        .map(|p| (p.0, ((p.1 - rl) / rs).powi(2) + ((p.2 - sl) / ss).powi(2)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|p| p.0)
}

/// Profile grid r = sinh(ρ) on a uniform ρ grid, matching the closest-approach
/// radii of the basis knots.
pub fn default_r_grid(rho_max: f64, step: f64) -> Vec<f64> {
    let m = (rho_max / step).round() as usize;
    (0..=m).map(|i| (i as f64 * step).sinh()).collect()
}
