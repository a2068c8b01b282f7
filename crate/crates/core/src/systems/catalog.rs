use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use super::{QpfSystem, Smoothness};
use crate::circle::wrap_f64;
use crate::error::{Error, Result};
use crate::numerics::gcd;

/// Rigid fibre rotation `x ↦ x + c` with `c = (k/q)ω + l/(pq)`.
#[derive(Debug, Clone)]
pub struct Translation {
    omega: f64,
    increment: f64,
    signature: Option<(i64, i64, i64, i64)>,
}

impl Translation {
    /// The torus translation carrying the continuous `p,q`-invariant graph
    /// `φ^i_j(θ) = (k/q)θ + (i - 1 + (j - 1)p)/(pq)`.
    pub fn new(omega: f64, k: i64, q: i64, l: i64, p: i64) -> Result<Self> {
        if q < 1 || p < 1 {
            return Err(Error::Parameter(format!("p and q must be positive, got p={p}, q={q}")));
        }
        if gcd(k, q) != 1 {
            return Err(Error::Parameter(format!("k={k} and q={q} are not relatively prime")));
        }
        if gcd(l, p) != 1 {
            return Err(Error::Parameter(format!("l={l} and p={p} are not relatively prime")));
        }
        let omega = wrap_f64(omega);
        let increment = k as f64 / q as f64 * omega + l as f64 / (p * q) as f64;
        Ok(Self {
            omega,
            increment,
            signature: Some((k, q, l, p)),
        })
    }

    pub fn with_increment(omega: f64, increment: f64) -> Self {
        Self {
            omega: wrap_f64(omega),
            increment,
            signature: None,
        }
    }

    pub fn increment(&self) -> f64 {
        self.increment
    }

    /// `(k, q, l, p)` when built from a signature.
    pub fn signature(&self) -> Option<(i64, i64, i64, i64)> {
        self.signature
    }
}

impl QpfSystem for Translation {
    fn name(&self) -> &str {
        "translation"
    }
    fn omega(&self) -> f64 {
        self.omega
    }
    fn lift(&self, _theta: f64, x: f64) -> f64 {
        x + self.increment
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Diffeomorphism
    }
    fn derivative(&self, _theta: f64, _x: f64) -> Option<f64> {
        Some(1.0)
    }
    fn inverse_lift(&self, _theta: f64, y: f64) -> f64 {
        y - self.increment
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        let mut v = vec![("omega".into(), self.omega), ("increment".into(), self.increment)];
        if let Some((k, q, l, p)) = self.signature {
            v.extend([
                ("k".into(), k as f64),
                ("q".into(), q as f64),
                ("l".into(), l as f64),
                ("p".into(), p as f64),
            ]);
        }
        v
    }
}

type Forcing = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Skew translation `x ↦ x + g(θ)`.
#[derive(Clone)]
pub struct SkewTranslation {
    omega: f64,
    g: Forcing,
    params: Vec<(String, f64)>,
}

impl std::fmt::Debug for SkewTranslation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SkewTranslation")
            .field("omega", &self.omega)
            .field("params", &self.params)
            .finish()
    }
}

impl SkewTranslation {
    pub fn new<G>(omega: f64, g: G) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        // continuity proxy: g finite and without large jumps on a fine grid,
        // including across θ = 1 ≡ 0
        let n = 4096;
        let vals: Vec<f64> = (0..=n).map(|i| g(i as f64 / n as f64)).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("forcing function is not finite".into()));
        }
        let max_jump = vals.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        if max_jump > 0.05 || (vals[n] - vals[0]).abs() > 1e-9 {
            return Err(Error::Parameter(
                "forcing function does not look continuous on the circle".into(),
            ));
        }
        Ok(Self {
            omega: wrap_f64(omega),
            g: Arc::new(g),
            params: Vec::new(),
        })
    }

    /// `g(θ) = tau + amp·sin(2πθ)`; rotation number `tau`.
    pub fn sinusoidal(omega: f64, tau: f64, amp: f64) -> Result<Self> {
        let mut s = Self::new(omega, move |th| tau + amp * (TAU * th).sin())?;
        s.params = vec![("tau".into(), tau), ("amp".into(), amp)];
        Ok(s)
    }

    pub fn forcing(&self, theta: f64) -> f64 {
        (self.g)(theta)
    }
}

impl QpfSystem for SkewTranslation {
    fn name(&self) -> &str {
        "skew"
    }
    fn omega(&self) -> f64 {
        self.omega
    }
    fn lift(&self, theta: f64, x: f64) -> f64 {
        x + (self.g)(theta)
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Diffeomorphism
    }
    fn derivative(&self, _theta: f64, _x: f64) -> Option<f64> {
        Some(1.0)
    }
    fn inverse_lift(&self, theta: f64, y: f64) -> f64 {
        y - (self.g)(theta)
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        let mut v = vec![("omega".to_string(), self.omega)];
        v.extend(self.params.iter().cloned());
        v
    }
}

/// Forced Arnold family
/// `x ↦ x + ρ₀ + (a/2π) sin(2πx) + (b/2π) sin(2πθ)`, a diffeomorphism for `|a| < 1`.
#[derive(Debug, Clone)]
pub struct ForcedArnold {
    omega: f64,
    rho0: f64,
    a: f64,
    b: f64,
}

impl ForcedArnold {
    pub fn new(omega: f64, rho0: f64, a: f64, b: f64) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(Error::Parameter(format!(
                "|a| must be below 1 for a diffeomorphism, got a={a}"
            )));
        }
        Ok(Self {
            omega: wrap_f64(omega),
            rho0,
            a,
            b,
        })
    }
}

impl QpfSystem for ForcedArnold {
    fn name(&self) -> &str {
        "arnold"
    }
    fn omega(&self) -> f64 {
        self.omega
    }
    fn lift(&self, theta: f64, x: f64) -> f64 {
        x + self.rho0 + self.a / TAU * (TAU * x).sin() + self.b / TAU * (TAU * theta).sin()
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Diffeomorphism
    }
    fn derivative(&self, _theta: f64, x: f64) -> Option<f64> {
        Some(1.0 + self.a * (TAU * x).cos())
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("omega".into(), self.omega),
            ("rho0".into(), self.rho0),
            ("a".into(), self.a),
            ("b".into(), self.b),
        ]
    }
}

/// Projective Harper map `x ↦ -1/(x - E + λ cos 2πθ)` in the chart
/// `x' = arctan(x)/π + 1/2`, so that `∞ ↦ 0`.
///
/// The fibre map factors as the shear `x ↦ x + c(θ)` followed by the
/// half turn `x ↦ -1/x`. The shear fixes `∞` and has a canonical lift
/// fixing the integers; the half turn lifts to `u ↦ u + 1/2`.
#[derive(Debug, Clone)]
pub struct Harper {
    omega: f64,
    energy: f64,
    coupling: f64,
}

impl Harper {
    pub fn new(omega: f64, energy: f64, coupling: f64) -> Self {
        Self {
            omega: wrap_f64(omega),
            energy,
            coupling,
        }
    }

    /// The critical map `E = 0`, `λ = 2`.
    pub fn critical(omega: f64) -> Self {
        Self::new(omega, 0.0, 2.0)
    }

    /// Shear parameter `c(θ) = -E + λ cos 2πθ`.
    pub fn shear(&self, theta: f64) -> f64 {
        -self.energy + self.coupling * (TAU * theta).cos()
    }

    /// Projective action on `ℝ ∪ {∞}` (`f64::INFINITY` for `∞`).
    pub fn projective(&self, theta: f64, x: f64) -> f64 {
        if x.is_infinite() {
            return 0.0;
        }
        let d = x + self.shear(theta);
        if d == 0.0 {
            f64::INFINITY
        } else {
            -1.0 / d
        }
    }

    pub fn inverse_projective(&self, theta: f64, y: f64) -> f64 {
        if y == 0.0 {
            return f64::INFINITY;
        }
        if y.is_infinite() {
            return -self.shear(theta);
        }
        -1.0 / y - self.shear(theta)
    }
}

/// Chart `x ↦ arctan(x)/π + 1/2`, with `∞ ↦ 0`.
pub fn to_chart(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        wrap_f64(x.atan() / PI + 0.5)
    }
}

/// Inverse chart; `0 ↦ ∞`.
pub fn from_chart(u: f64) -> f64 {
    let u = wrap_f64(u);
    if u == 0.0 {
        f64::INFINITY
    } else {
        (PI * (u - 0.5)).tan()
    }
}

/// Canonical lift of the shear `x ↦ x + c` in the chart coordinate.
#[inline]
fn shear_lift(c: f64, u: f64) -> f64 {
    let k = u.floor();
    let u0 = u - k;
    if u0 == 0.0 || u0 >= 1.0 {
        return u;
    }
    let (s, co) = (PI * (u0 - 0.5)).sin_cos();
    let psi = (s + c * co).atan2(co);
    k + psi / PI + 0.5
}

impl QpfSystem for Harper {
    fn name(&self) -> &str {
        "harper"
    }
    fn omega(&self) -> f64 {
        self.omega
    }
    fn lift(&self, theta: f64, x: f64) -> f64 {
        shear_lift(self.shear(theta), x) + 0.5
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Diffeomorphism
    }
    fn derivative(&self, theta: f64, x: f64) -> Option<f64> {
        let c = self.shear(theta);
        let (s, co) = (PI * (wrap_f64(x) - 0.5)).sin_cos();
        let n = s + c * co;
        Some(1.0 / (n * n + co * co))
    }
    fn inverse_lift(&self, theta: f64, y: f64) -> f64 {
        shear_lift(-self.shear(theta), y - 0.5)
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("omega".into(), self.omega),
            ("E".into(), self.energy),
            ("lambda".into(), self.coupling),
        ]
    }
}

/// Contraction towards an explicit graph:
/// `T_θ(x) = φ(θ+ω) + f(x - φ(θ))` with `f(y) = y - (a/2π) sin 2πy` and
/// `φ(θ) = offset + amp·sin 2πθ`.
///
/// For `0 < a < 1` the graph `φ` is attracting and `φ + 1/2` repelling.
#[derive(Debug, Clone)]
pub struct Contraction {
    omega: f64,
    a: f64,
    offset: f64,
    amp: f64,
}

impl Contraction {
    pub fn new(omega: f64, a: f64, offset: f64, amp: f64) -> Result<Self> {
        if !(a.abs() < 1.0) {
            return Err(Error::Parameter(format!("|a| must be below 1, got {a}")));
        }
        Ok(Self {
            omega: wrap_f64(omega),
            a,
            offset,
            amp,
        })
    }

    /// The invariant graph `φ(θ)` (lifted, not wrapped).
    pub fn graph(&self, theta: f64) -> f64 {
        self.offset + self.amp * (TAU * theta).sin()
    }

    fn f(&self, y: f64) -> f64 {
        y - self.a / TAU * (TAU * y).sin()
    }
}

impl QpfSystem for Contraction {
    fn name(&self) -> &str {
        "contraction"
    }
    fn omega(&self) -> f64 {
        self.omega
    }
    fn lift(&self, theta: f64, x: f64) -> f64 {
        let g = self.graph(theta);
        self.graph(theta + self.omega) + self.f(x - g)
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::Diffeomorphism
    }
    fn derivative(&self, theta: f64, x: f64) -> Option<f64> {
        Some(1.0 - self.a * (TAU * (x - self.graph(theta))).cos())
    }
    fn inverse_lift(&self, theta: f64, y: f64) -> f64 {
        // f(u) - u is bounded by a/2π, so the root lies in that bracket
        let target = y - self.graph(theta + self.omega);
        let reach = self.a.abs() / TAU;
        let (lo, hi) = (target - reach, target + reach);
        let mut u = target;
        for _ in 0..40 {
            let step = (self.f(u) - target) / (1.0 - self.a * (TAU * u).cos());
            u = (u - step).clamp(lo, hi);
            if step.abs() <= 1e-15 * (1.0 + u.abs()) {
                return u + self.graph(theta);
            }
        }
        super::invert_lift_numerically(self, theta, y)
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        vec![
            ("omega".into(), self.omega),
            ("a".into(), self.a),
            ("offset".into(), self.offset),
            ("amp".into(), self.amp),
        ]
    }
}

pub type Params = BTreeMap<String, f64>;
type Builder = fn(f64, &Params) -> Result<Box<dyn QpfSystem>>;

/// A named, parameterised system.
pub struct CatalogEntry {
    pub name: &'static str,
    /// Parameter names with defaults; `None` marks a required parameter.
    pub parameters: &'static [(&'static str, Option<f64>)],
    builder: Builder,
}

impl CatalogEntry {
    /// Build the system, filling defaults. Unknown parameter names are rejected.
    pub fn build(&self, omega: f64, given: &Params) -> Result<(Box<dyn QpfSystem>, Params)> {
        let mut resolved = Params::new();
        for key in given.keys() {
            if !self.parameters.iter().any(|(n, _)| n == key) {
                return Err(Error::Parameter(format!(
                    "system '{}' has no parameter '{key}'",
                    self.name
                )));
            }
        }
        for (name, default) in self.parameters {
            let v = match (given.get(*name), default) {
                (Some(v), _) => *v,
                (None, Some(d)) => *d,
                (None, None) => {
                    return Err(Error::Parameter(format!(
                        "system '{}' requires parameter '{name}'",
                        self.name
                    )))
                }
            };
            resolved.insert((*name).to_string(), v);
        }
        let sys = (self.builder)(omega, &resolved)?;
        Ok((sys, resolved))
    }
}

fn int_param(params: &Params, key: &str) -> Result<i64> {
    let v = params[key];
    if v.fract() != 0.0 || v.abs() > 1e15 {
        return Err(Error::Parameter(format!("parameter '{key}' must be an integer, got {v}")));
    }
    Ok(v as i64)
}

fn build_translation(omega: f64, p: &Params) -> Result<Box<dyn QpfSystem>> {
    Ok(Box::new(Translation::new(
        omega,
        int_param(p, "k")?,
        int_param(p, "q")?,
        int_param(p, "l")?,
        int_param(p, "p")?,
    )?))
}

fn build_shift(omega: f64, p: &Params) -> Result<Box<dyn QpfSystem>> {
    Ok(Box::new(Translation::with_increment(omega, p["increment"])))
}

fn build_skew(omega: f64, p: &Params) -> Result<Box<dyn QpfSystem>> {
    Ok(Box::new(SkewTranslation::sinusoidal(omega, p["tau"], p["amp"])?))
}

fn build_arnold(omega: f64, p: &Params) -> Result<Box<dyn QpfSystem>> {
    Ok(Box::new(ForcedArnold::new(omega, p["rho0"], p["a"], p["b"])?))
}

fn build_harper(omega: f64, p: &Params) -> Result<Box<dyn QpfSystem>> {
    Ok(Box::new(Harper::new(omega, p["E"], p["lambda"])))
}

fn build_contraction(omega: f64, p: &Params) -> Result<Box<dyn QpfSystem>> {
    Ok(Box::new(Contraction::new(omega, p["a"], p["offset"], p["amp"])?))
}

static CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "translation",
        parameters: &[("k", Some(1.0)), ("q", Some(1.0)), ("l", Some(0.0)), ("p", Some(1.0))],
        builder: build_translation,
    },
    CatalogEntry {
        name: "shift",
        parameters: &[("increment", None)],
        builder: build_shift,
    },
    CatalogEntry {
        name: "skew",
        parameters: &[("tau", None), ("amp", Some(0.0))],
        builder: build_skew,
    },
    CatalogEntry {
        name: "arnold",
        parameters: &[("rho0", Some(0.0)), ("a", None), ("b", Some(0.0))],
        builder: build_arnold,
    },
    CatalogEntry {
        name: "harper",
        parameters: &[("E", Some(0.0)), ("lambda", Some(2.0))],
        builder: build_harper,
    },
    CatalogEntry {
        name: "contraction",
        parameters: &[("a", Some(0.5)), ("offset", Some(0.2)), ("amp", Some(0.1))],
        builder: build_contraction,
    },
];

pub fn catalog() -> &'static [CatalogEntry] {
    CATALOG
}
