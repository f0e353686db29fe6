//! Radial and ambient potentials, built-in families and the weighted decay norm.

use std::fmt;
use std::io::Read;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{boundary_defining_function, BallPoint};
use crate::spline::CubicSpline;

/// Certified envelope of |V(ρ)| used to truncate integrals over infinite
/// geodesics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// V(ρ) = 0 for ρ ≥ radius.
    Compact { radius: f64 },
    /// |V(ρ)| ≤ amplitude·exp(−(ρ/sigma)²).
    Gaussian { amplitude: f64, sigma: f64 },
    /// |V(ρ)| ≤ amplitude·exp(−rate·ρ) for ρ ≥ from.
    Exponential { amplitude: f64, rate: f64, from: f64 },
}

impl Tail {
    pub fn bound(&self, rho: f64) -> f64 {
        match *self {
            Tail::Compact { radius } => {
                if rho >= radius {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Tail::Gaussian { amplitude, sigma } => amplitude * (-(rho / sigma).powi(2)).exp(),
            Tail::Exponential { amplitude, rate, from } => {
                if rho >= from {
                    amplitude * (-rate * rho).exp()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Upper bound for ∫_r^∞ |V|.
    pub fn integral_from(&self, r: f64) -> f64 {
        match *self {
            Tail::Compact { radius } => {
                if r >= radius {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Tail::Gaussian { amplitude, sigma } => {
                // ∫_r^∞ e^{−(t/σ)²} ≤ σ·min(√π/2, σ/(2r))·e^{−(r/σ)²}
                let f = if r > 0.0 { (0.5 * std::f64::consts::PI.sqrt()).min(sigma / (2.0 * r)) } else { 0.5 * std::f64::consts::PI.sqrt() };
                amplitude * sigma * f * (-(r / sigma).powi(2)).exp()
            }
            Tail::Exponential { amplitude, rate, from } => {
                if r >= from {
                    amplitude * (-rate * r).exp() / rate
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Smallest R (to a small relative slack) with bound(ρ) ≤ eps for ρ ≥ R.
    pub fn radius_for(&self, eps: f64) -> f64 {
        match *self {
            Tail::Compact { radius } => radius,
            Tail::Gaussian { amplitude, sigma } => {
                if amplitude <= eps {
                    0.0
                } else {
                    sigma * (amplitude / eps).ln().sqrt()
                }
            }
            Tail::Exponential { amplitude, rate, from } => {
                if amplitude <= eps {
                    from
                } else {
                    from.max((amplitude / eps).ln() / rate)
                }
            }
        }
    }

    /// Radius R such that the part of any geodesic integral coming from
    /// ρ ≥ R is at most `tol`. Uses ρ(s) ≥ max(R, |s − s_c|) along the
    /// geodesic, which bounds that part by 2(R·B(R) + ∫_R^∞ B).
    pub fn geodesic_cutoff(&self, tol: f64) -> f64 {
        if let Tail::Compact { radius } = *self {
            return radius;
        }
        let excess = |r: f64| 2.0 * (r * self.bound(r) + self.integral_from(r));
        let mut r = self.radius_for(tol).max(1.0);
        while excess(r) > tol {
            r += 0.25;
            if r > 1e4 {
                break;
            }
        }
        r
    }

    fn scaled(&self, c: f64) -> Tail {
        let c = c.abs();
        match *self {
            Tail::Compact { radius } => Tail::Compact { radius },
            Tail::Gaussian { amplitude, sigma } => Tail::Gaussian { amplitude: c * amplitude, sigma },
            Tail::Exponential { amplitude, rate, from } => Tail::Exponential { amplitude: c * amplitude, rate, from },
        }
    }
}

/// Family label with parameters, kept for provenance and serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Zero,
    GaussianRho { amplitude: f64, sigma: f64 },
    BumpBall { amplitude: f64, delta: f64 },
    ExpDecay { amplitude: f64, m: f64 },
    Tabulated { samples: usize, tail_exponent: f64 },
    Custom { label: String },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Zero => write!(f, "zero"),
            Family::GaussianRho { amplitude, sigma } => write!(f, "gaussian_rho(A={amplitude},sigma={sigma})"),
            Family::BumpBall { amplitude, delta } => write!(f, "bump_ball(A={amplitude},delta={delta})"),
            Family::ExpDecay { amplitude, m } => write!(f, "exp_decay(A={amplitude},m={m})"),
            Family::Tabulated { samples, tail_exponent } => write!(f, "tabulated({samples} samples, m={tail_exponent})"),
            Family::Custom { label } => write!(f, "{label}"),
        }
    }
}

/// Parameters accepted by [`make_potential`].
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    GaussianRho { amplitude: f64, sigma: f64 },
    BumpBall { amplitude: f64, delta: f64 },
    ExpDecay { amplitude: f64, m: f64 },
    Tabulated { rho: Vec<f64>, values: Vec<f64>, tail_exponent: Option<f64> },
}

impl PotentialSpec {
    /// Parses `name` or `name:key=value,key=value`, e.g.
    /// `gaussian_rho:A=0.5,sigma=1`. Tabulated potentials are loaded from
    /// CSV with [`PotentialSpec::from_csv`].
    pub fn parse(text: &str) -> Result<Self> {
        let (name, rest) = match text.split_once(':') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (text.trim(), ""),
        };
        let mut params = std::collections::BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got '{item}'")))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad number '{v}' for {k}")))?;
            params.insert(k.trim().to_ascii_lowercase(), v);
        }
        let get = |k: &str, default: Option<f64>| -> Result<f64> {
            params.get(k).copied().or(default).ok_or_else(|| Error::InvalidParameter(format!("{name} needs parameter {k}")))
        };
        let spec = match name {
            "zero" => PotentialSpec::Zero,
            "gaussian_rho" => PotentialSpec::GaussianRho { amplitude: get("a", Some(1.0))?, sigma: get("sigma", Some(1.0))? },
            "bump_ball" => PotentialSpec::BumpBall { amplitude: get("a", Some(1.0))?, delta: get("delta", Some(0.5))? },
            "exp_decay" => PotentialSpec::ExpDecay { amplitude: get("a", Some(1.0))?, m: get("m", None)? },
            other => return Err(Error::InvalidParameter(format!("unknown potential family '{other}'"))),
        };
        let known: &[&str] = match name {
            "zero" => &[],
            "gaussian_rho" => &["a", "sigma"],
            "bump_ball" => &["a", "delta"],
            _ => &["a", "m"],
        };
        if let Some(k) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::InvalidParameter(format!("unknown parameter '{k}' for {name}")));
        }
        Ok(spec)
    }

    /// Two-column CSV `rho,value`, strictly increasing rho starting at 0.
    pub fn from_csv<R: Read>(reader: R, tail_exponent: Option<f64>) -> Result<Self> {
        let mut text = String::new();
        let mut reader = reader;
        reader.read_to_string(&mut text)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty potential CSV".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["rho", "value"] {
            return Err(Error::Parse(format!("expected header 'rho,value', got '{header}'")));
        }
        let mut rho = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut it = line.split(',').map(str::trim);
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Parse(format!("row {}: missing column", i + 2)))?
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("row {}: bad number", i + 2)))
            };
            rho.push(parse(it.next())?);
            values.push(parse(it.next())?);
            if it.next().is_some() {
                return Err(Error::Parse(format!("row {}: too many columns", i + 2)));
            }
        }
        Ok(PotentialSpec::Tabulated { rho, values, tail_exponent })
    }
}

type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type AmbientFn = Arc<dyn Fn(&BallPoint) -> f64 + Send + Sync>;

/// Radial potential V(ρ), ρ the distance to the origin.
#[derive(Clone)]
pub struct RadialPotential {
    profile: RadialFn,
    decay_exponent: f64,
    family: Family,
    tail: Tail,
}

impl fmt::Debug for RadialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialPotential")
            .field("family", &self.family)
            .field("decay_exponent", &self.decay_exponent)
            .field("tail", &self.tail)
            .finish()
    }
}

fn bump(r: f64, delta: f64) -> f64 {
    let q = r / (1.0 - delta);
    if q >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - q * q)).exp()
    }
}

impl RadialPotential {
    /// Potential from an arbitrary profile; `tail` must bound |V|.
    pub fn from_fn<F>(label: &str, profile: F, decay_exponent: f64, tail: Tail) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self { profile: Arc::new(profile), decay_exponent, family: Family::Custom { label: label.to_string() }, tail }
    }

    pub fn zero() -> Self {
        Self { profile: Arc::new(|_| 0.0), decay_exponent: f64::INFINITY, family: Family::Zero, tail: Tail::Compact { radius: 0.0 } }
    }

    pub fn gaussian_rho(amplitude: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!("gaussian_rho needs sigma > 0 and finite A, got A={amplitude}, sigma={sigma}")));
        }
        Ok(Self {
            profile: Arc::new(move |rho: f64| -amplitude * (-(rho / sigma).powi(2)).exp()),
            decay_exponent: f64::INFINITY,
            family: Family::GaussianRho { amplitude, sigma },
            tail: Tail::Gaussian { amplitude: amplitude.abs(), sigma },
        })
    }

    /// Smooth bump −A·exp(1 − 1/(1 − (|w|/(1−δ))²)) supported in |w| ≤ 1−δ.
    pub fn bump_ball(amplitude: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!("bump_ball needs 0 < delta < 1, got {delta}")));
        }
        let radius = ((2.0 - delta) / delta).ln();
        Ok(Self {
            profile: Arc::new(move |rho: f64| -amplitude * bump((0.5 * rho).tanh(), delta)),
            decay_exponent: f64::INFINITY,
            family: Family::BumpBall { amplitude, delta },
            tail: Tail::Compact { radius },
        })
    }

    pub fn exp_decay(amplitude: f64, m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() || !amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!("exp_decay needs m > 0, got {m}")));
        }
        Ok(Self {
            profile: Arc::new(move |rho: f64| -amplitude * (-m * rho).exp()),
            decay_exponent: m,
            family: Family::ExpDecay { amplitude, m },
            tail: Tail::Exponential { amplitude: amplitude.abs(), rate: m, from: 0.0 },
        })
    }

    /// Cubic interpolation of samples, extended as C·e^{−mρ} past the last one.
    pub fn tabulated(rho: Vec<f64>, values: Vec<f64>, tail_exponent: Option<f64>) -> Result<Self> {
        let m = tail_exponent.ok_or_else(|| Error::InvalidParameter("tabulated potential needs a declared tail exponent".into()))?;
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidParameter(format!("tail exponent must be positive, got {m}")));
        }
        if rho.first() != Some(&0.0) {
            return Err(Error::InvalidParameter("tabulated rho must start at 0".into()));
        }
        let samples = rho.len();
        let last_rho = *rho.last().unwrap();
        let last_val = *values.last().unwrap_or(&0.0);
        let spline = CubicSpline::new(rho, values)?;
        let c = last_val * (m * last_rho).exp();
        // envelope past the last sample: |V| ≤ |C| e^{−mρ}; inside we sample
        let inner_max = (0..=2000).map(|i| spline.eval(last_rho * i as f64 / 2000.0).abs()).fold(0.0, f64::max);
        let amp = c.abs().max(inner_max * (m * last_rho).exp());
        let tail = if c == 0.0 && inner_max == 0.0 { Tail::Compact { radius: 0.0 } } else if c == 0.0 { Tail::Compact { radius: last_rho } } else { Tail::Exponential { amplitude: amp, rate: m, from: last_rho } };
        let profile = move |r: f64| if r <= last_rho { spline.eval(r) } else { c * (-m * r).exp() };
        Ok(Self { profile: Arc::new(profile), decay_exponent: m, family: Family::Tabulated { samples, tail_exponent: m }, tail })
    }

    pub fn eval(&self, rho: f64) -> f64 {
        (self.profile)(rho)
    }

    pub fn decay_exponent(&self) -> f64 {
        self.decay_exponent
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.family, Family::Zero) || matches!(self.family, Family::GaussianRho { amplitude, .. } | Family::ExpDecay { amplitude, .. } | Family::BumpBall { amplitude, .. } if amplitude == 0.0)
    }

    /// ε·V, used for weak-coupling studies.
    pub fn scaled(&self, eps: f64) -> Self {
        let inner = self.profile.clone();
        Self {
            profile: Arc::new(move |r| eps * inner(r)),
            decay_exponent: self.decay_exponent,
            family: Family::Custom { label: format!("{eps}*{}", self.family) },
            tail: self.tail.scaled(eps),
        }
    }

    /// Sum a·self + b·other.
    pub fn combine(&self, a: f64, other: &RadialPotential, b: f64) -> Self {
        let (p, q) = (self.profile.clone(), other.profile.clone());
        let tail = match (self.tail.scaled(a), other.tail.scaled(b)) {
            (Tail::Compact { radius: r1 }, Tail::Compact { radius: r2 }) => Tail::Compact { radius: r1.max(r2) },
            (t1, t2) => {
                // exponential envelope valid for both
                let from = 10.0f64;
                let rate = [t1, t2].iter().map(|t| match *t {
                    Tail::Exponential { rate, .. } => rate,
                    _ => 4.0,
                }).fold(f64::INFINITY, f64::min);
                let amp = (t1.bound(from) + t2.bound(from)) * (rate * from).exp();
                Tail::Exponential { amplitude: amp, rate, from }
            }
        };
        Self {
            profile: Arc::new(move |r| a * p(r) + b * q(r)),
            decay_exponent: self.decay_exponent.min(other.decay_exponent),
            family: Family::Custom { label: format!("{a}*[{}]+{b}*[{}]", self.family, other.family) },
            tail,
        }
    }

    /// Induced function on the ball, w ↦ V(ρ(w)).
    pub fn to_ambient(&self) -> AmbientPotential {
        let p = self.profile.clone();
        let support_radius_delta = match (&self.family, self.tail) {
            (Family::BumpBall { delta, .. }, _) => Some(*delta),
            (_, Tail::Compact { radius }) => Some(1.0 - (0.5 * radius).tanh()),
            _ => None,
        };
        AmbientPotential { eval: Arc::new(move |w: &BallPoint| p(w.rho())), support_radius_delta, decay_exponent: self.decay_exponent, tail: self.tail }
    }

    /// Sign pattern of V' on a grid, restricted to where |V| > 1e-13.
    pub fn monotonicity(&self, rho_max: f64, samples: usize) -> Monotonicity {
        let h = rho_max / samples as f64;
        let (mut pos, mut neg) = (false, false);
        for i in 0..samples {
            let a = i as f64 * h;
            let (va, vb) = (self.eval(a), self.eval(a + h));
            if va.abs() <= 1e-13 && vb.abs() <= 1e-13 {
                continue;
            }
            if vb > va {
                pos = true;
            } else if vb < va {
                neg = true;
            }
        }
        match (pos, neg) {
            (true, false) => Monotonicity::Increasing,
            (false, true) => Monotonicity::Decreasing,
            (false, false) => Monotonicity::Constant,
            (true, true) => Monotonicity::NotMonotone,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Constant,
    NotMonotone,
}

/// Potential on the ball, not necessarily radial.
#[derive(Clone)]
pub struct AmbientPotential {
    eval: AmbientFn,
    support_radius_delta: Option<f64>,
    decay_exponent: f64,
    tail: Tail,
}

impl fmt::Debug for AmbientPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AmbientPotential")
            .field("support_radius_delta", &self.support_radius_delta)
            .field("decay_exponent", &self.decay_exponent)
            .finish()
    }
}

impl AmbientPotential {
    /// `norm_bound` must dominate |x(w)^{−m} V(w)|; with a support δ it is
    /// ignored.
    pub fn new<F>(eval: F, support_radius_delta: Option<f64>, decay_exponent: f64, norm_bound: f64) -> Result<Self>
    where
        F: Fn(&BallPoint) -> f64 + Send + Sync + 'static,
    {
        let tail = match support_radius_delta {
            Some(d) if d > 0.0 && d < 1.0 => Tail::Compact { radius: ((2.0 - d) / d).ln() },
            Some(d) => return Err(Error::InvalidParameter(format!("support delta must be in (0,1), got {d}"))),
            None => {
                if !(decay_exponent > 0.0) {
                    return Err(Error::InvalidParameter("decay exponent must be positive".into()));
                }
                Tail::Exponential { amplitude: norm_bound, rate: decay_exponent, from: 0.0 }
            }
        };
        Ok(Self { eval: Arc::new(eval), support_radius_delta, decay_exponent, tail })
    }

    pub fn eval(&self, w: &BallPoint) -> f64 {
        (self.eval)(w)
    }

    pub fn support_radius_delta(&self) -> Option<f64> {
        self.support_radius_delta
    }

    pub fn decay_exponent(&self) -> f64 {
        self.decay_exponent
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }
}

/// Builds a built-in family.
pub fn make_potential(spec: &PotentialSpec) -> Result<RadialPotential> {
    match spec {
        PotentialSpec::Zero => Ok(RadialPotential::zero()),
        PotentialSpec::GaussianRho { amplitude, sigma } => RadialPotential::gaussian_rho(*amplitude, *sigma),
        PotentialSpec::BumpBall { amplitude, delta } => RadialPotential::bump_ball(*amplitude, *delta),
        PotentialSpec::ExpDecay { amplitude, m } => RadialPotential::exp_decay(*amplitude, *m),
        PotentialSpec::Tabulated { rho, values, tail_exponent } => RadialPotential::tabulated(rho.clone(), values.clone(), *tail_exponent),
    }
}

/// max over the grid of |e^{mρ} V(ρ)|. A lower bound for the true sup.
pub fn weighted_norm_radial(pot: &RadialPotential, m: f64, grid: &[f64]) -> f64 {
    grid.iter().map(|&r| (pot.eval(r) * (m * r).exp()).abs()).filter(|v| !v.is_nan()).fold(0.0, f64::max)
}

/// max over the grid of |x(w)^{−m} V(w)|.
pub fn weighted_norm_ambient(pot: &AmbientPotential, m: f64, grid: &[BallPoint]) -> f64 {
    grid.iter()
        .map(|w| {
            let v = pot.eval(w);
            if v == 0.0 {
                0.0
            } else {
                (v * boundary_defining_function(w).powf(-m)).abs()
            }
        })
        .fold(0.0, f64::max)
}
