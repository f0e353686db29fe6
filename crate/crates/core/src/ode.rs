//! Gauss-Legendre collocation for linear equations v'' = g(ρ) v.
//!
//! Several equations can be advanced on one shared step sequence, so that
//! discretization errors of a perturbed run and its reference run are
//! strongly correlated.

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

const S: usize = 8;
// Padé-type local error constant of the 8-stage Gauss method, (8!)²/(16!·17!)
const ERR_CONST: f64 = 2.19e-19;

/// In-place LU solve with partial pivoting of an n×n row-major system.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s -= a[r * n + c] * b[c];
        }
        b[r] = s / a[r * n + r];
    }
    true
}

#[derive(Debug, Clone)]
struct Tableau {
    c: [f64; S],
    b: [f64; S],
    a2: [f64; S * S], // A·A
    ba: [f64; S],     // bᵀA
}

impl Tableau {
    fn gauss() -> Self {
        let (x, w) = gauss_legendre(S);
        let mut c = [0.0; S];
        let mut b = [0.0; S];
        for i in 0..S {
            c[i] = 0.5 * (1.0 + x[i]);
            b[i] = 0.5 * w[i];
        }
        // a_ij = ∫_0^{c_i} ℓ_j: solve Σ_j a_ij c_j^m = c_i^{m+1}/(m+1)
        let mut a = [0.0; S * S];
        for i in 0..S {
            let mut vt = vec![0.0; S * S]; // rows m, columns j
            let mut rhs = vec![0.0; S];
            for m in 0..S {
                for j in 0..S {
                    vt[m * S + j] = c[j].powi(m as i32);
                }
                rhs[m] = c[i].powi(m as i32 + 1) / (m as f64 + 1.0);
            }
            assert!(solve_dense(&mut vt, &mut rhs, S));
            a[i * S..(i + 1) * S].copy_from_slice(&rhs);
        }
        let mut a2 = [0.0; S * S];
        for i in 0..S {
            for j in 0..S {
                a2[i * S + j] = (0..S).map(|k| a[i * S + k] * a[k * S + j]).sum();
            }
        }
        let mut ba = [0.0; S];
        for j in 0..S {
            ba[j] = (0..S).map(|i| b[i] * a[i * S + j]).sum();
        }
        Self { c, b, a2, ba }
    }
}

fn tableau() -> &'static Tableau {
    static T: std::sync::OnceLock<Tableau> = std::sync::OnceLock::new();
    T.get_or_init(Tableau::gauss)
}

/// (v, v') with a running log-scale, v_true = v·e^{log_scale}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState {
    pub v: f64,
    pub dv: f64,
    pub log_scale: f64,
}

impl OdeState {
    pub fn new(v: f64, dv: f64) -> Self {
        Self { v, dv, log_scale: 0.0 }
    }

    fn renormalize(&mut self) {
        let m = self.v.abs().max(self.dv.abs());
        if m > 1e100 || (m < 1e-100 && m > 0.0) {
            let e = m.ln();
            self.v /= m;
            self.dv /= m;
            self.log_scale += e;
        }
    }
}

/// Step-size policy: h·sqrt(max|g|) ≤ z, h ≤ h_max, h ≤ origin_frac·ρ.
#[derive(Debug, Clone, Copy)]
pub struct StepPolicy {
    pub z: f64,
    pub h_max: f64,
    pub origin_frac: f64,
}

impl StepPolicy {
    /// Policy whose per-radian phase error is about `tol`.
    pub fn for_tolerance(tol: f64) -> Self {
        let z = (tol / ERR_CONST).powf(1.0 / 16.0).clamp(0.25, 2.5);
        Self { z, h_max: 0.05, origin_frac: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StepStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Advances every state from `a` to `b`; `g(ρ, out)` writes g_j(ρ) into
/// out[j] for all equations.
pub fn propagate<G>(mut g: G, states: &mut [OdeState], a: f64, b: f64, policy: StepPolicy) -> Result<StepStats>
where
    G: FnMut(f64, &mut [f64]),
{
    let t = tableau();
    let m = states.len();
    let mut stats = StepStats::default();
    if m == 0 || b <= a {
        return Ok(stats);
    }
    let mut gbuf = vec![0.0; m];
    let mut nodes = vec![0.0; S * m];
    g(a, &mut gbuf);
    stats.evaluations += 1;
    let mut omega = gbuf.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).sqrt();
    let mut rho = a;
    let mut mat = [0.0; S * S];
    let mut rhs = [0.0; S];
    while rho < b {
        let mut h = policy.h_max;
        if rho > 0.0 {
            h = h.min(policy.origin_frac * rho);
        }
        if omega > 0.0 {
            h = h.min(policy.z / omega);
        }
        let remaining = b - rho;
        if h >= remaining * 0.999 {
            h = remaining;
        }
        loop {
            if h < 1e-12 && h < remaining {
                return Err(Error::Stiffness(format!("step size {h:e} at rho = {rho}")));
            }
            for i in 0..S {
                g(rho + t.c[i] * h, &mut gbuf);
                nodes[i * m..(i + 1) * m].copy_from_slice(&gbuf);
            }
            stats.evaluations += S;
            let om = nodes.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).sqrt();
            if h * om > 1.3 * policy.z && h > 1e-12 {
                h = policy.z / om;
                stats.rejected += 1;
                continue;
            }
            omega = nodes[(S - 1) * m..].iter().fold(0.0f64, |acc, v| acc.max(v.abs())).sqrt();
            break;
        }
        let h2 = h * h;
        for (j, st) in states.iter_mut().enumerate() {
            for i in 0..S {
                for k in 0..S {
                    mat[i * S + k] = -h2 * t.a2[i * S + k] * nodes[k * m + j];
                }
                mat[i * S + i] += 1.0;
                rhs[i] = st.v + h * t.c[i] * st.dv;
            }
            if !solve_dense(&mut mat, &mut rhs, S) {
                return Err(Error::Stiffness(format!("singular stage system at rho = {rho}")));
            }
            let mut sv = 0.0;
            let mut sw = 0.0;
            for i in 0..S {
                let gv = nodes[i * m + j] * rhs[i];
                sv += t.ba[i] * gv;
                sw += t.b[i] * gv;
            }
            st.v += h * st.dv + h2 * sv;
            st.dv += h * sw;
            st.renormalize();
        }
        rho += h;
        if h == remaining {
            rho = b;
        }
        stats.steps += 1;
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_is_consistent() {
        let t = tableau();
        assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        // bᵀA·1 = bᵀc = 1/2 and (A²·1)_i = c_i²/2
        assert!((t.ba.iter().sum::<f64>() - 0.5).abs() < 1e-13);
        for i in 0..S {
            let row: f64 = (0..S).map(|k| t.a2[i * S + k]).sum();
            assert!((row - 0.5 * t.c[i] * t.c[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_oscillator_phase() {
        // v'' = −ω²v over many periods
        let w = 50.0;
        let mut st = [OdeState::new(0.0, 1.0)];
        let pol = StepPolicy::for_tolerance(1e-12);
        let len = 20.0;
        propagate(|_, out| out[0] = -w * w, &mut st, 0.0, len, pol).unwrap();
        let scale = st[0].log_scale.exp();
        let exact_v = (w * len).sin() / w;
        let exact_dv = (w * len).cos();
        assert!((st[0].v * scale - exact_v).abs() < 1e-10, "{}", st[0].v * scale - exact_v);
        assert!((st[0].dv * scale - exact_dv).abs() < 1e-9);
    }

    #[test]
    fn exponential_growth_with_rescaling() {
        let mut st = [OdeState::new(1.0, 3.0)];
        propagate(|_, out| out[0] = 9.0, &mut st, 0.0, 100.0, StepPolicy::for_tolerance(1e-12)).unwrap();
        let log_v = st[0].v.ln() + st[0].log_scale;
        assert!((log_v - 300.0).abs() < 1e-10);
    }
}
