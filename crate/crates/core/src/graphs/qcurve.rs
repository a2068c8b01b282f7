use serde::Serialize;

use crate::circle::wrap_f64;
use crate::error::{Error, Result};
use crate::numerics::gcd;

/// Closure and self-avoidance tolerance for sampled q-curves.
const CURVE_TOL: f64 = 1e-9;

/// A sampled lift `γ̂` of a q-curve on the grid `θ̂_i = i/M`, `i = 0..=qM`,
/// with `γ̂(θ̂ + q) = γ̂(θ̂) + k` and `γ̂(θ̂ + l) - γ̂(θ̂) ∉ ℤ` for `1 ≤ l < q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QCurve {
    q: usize,
    samples: Vec<f64>,
    declared_k: i64,
}

impl QCurve {
    /// Validate and wrap a sample array of length `qM + 1`.
    pub fn new(q: usize, samples: Vec<f64>, declared_k: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::MalformedCurve("q must be positive".into()));
        }
        let n = samples.len().saturating_sub(1);
        if n < 2 * q || !n.is_multiple_of(q) {
            return Err(Error::MalformedCurve(format!(
                "{} samples do not form a grid over [0, {q}]",
                samples.len()
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedCurve("non-finite sample".into()));
        }
        let seam = samples[n] - samples[0] - declared_k as f64;
        if seam.abs() > CURVE_TOL {
            return Err(Error::MalformedCurve(format!(
                "seam mismatch {seam:e} for declared winding {declared_k}"
            )));
        }
        let c = Self {
            q,
            samples,
            declared_k,
        };
        c.check_self_avoiding()?;
        Ok(c)
    }

    /// Sample `f` on `per_unit` points per unit of `θ̂`.
    pub fn from_fn(q: usize, per_unit: usize, declared_k: i64, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = q * per_unit;
        let samples = (0..=n).map(|i| f(i as f64 / per_unit as f64)).collect();
        Self::new(q, samples, declared_k)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn declared_k(&self) -> i64 {
        self.declared_k
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    fn per_unit(&self) -> usize {
        (self.samples.len() - 1) / self.q
    }

    /// Sample `i` of the periodically continued lift.
    fn sample_ext(&self, i: usize) -> f64 {
        let n = self.samples.len() - 1;
        let turns = i / n;
        self.samples[i % n] + (turns as i64 * self.declared_k) as f64
    }

    fn check_self_avoiding(&self) -> Result<()> {
        let n = self.samples.len() - 1;
        let m = self.per_unit();
        for l in 1..self.q {
            let mut band: Option<f64> = None;
            for i in 0..n {
                let d = self.sample_ext(i + l * m) - self.samples[i];
                let fl = d.floor();
                if d - fl < CURVE_TOL || fl + 1.0 - d < CURVE_TOL || band.is_some_and(|b| b != fl) {
                    return Err(Error::MalformedCurve(format!(
                        "curve meets its {l}-shift near θ̂ = {}",
                        i as f64 / m as f64
                    )));
                }
                band = Some(fl);
            }
        }
        Ok(())
    }

    /// `γ̂(θ̂)` for any real `θ̂`, linear between samples.
    pub fn eval(&self, theta_hat: f64) -> f64 {
        let q = self.q as f64;
        let turns = (theta_hat / q).floor();
        let r = (theta_hat - turns * q) * self.per_unit() as f64;
        let i = (r.floor() as usize).min(self.samples.len() - 2);
        let t = r - i as f64;
        let v = self.samples[i] + t * (self.samples[i + 1] - self.samples[i]);
        v + turns * self.declared_k as f64
    }

    /// The `q` branch values `π(γ̂(θ + i))` over base angle `θ`.
    pub fn fibre_values(&self, theta: f64) -> Vec<f64> {
        let th = wrap_f64(theta);
        (0..self.q).map(|i| wrap_f64(self.eval(th + i as f64))).collect()
    }
}

/// `(q, k)` of a q-curve, with `k = round(γ̂(q) - γ̂(0))`.
///
/// Asserts `gcd(q, k) = 1`, which also forces `k ≠ 0` when `q > 1`.
pub fn winding_number(c: &QCurve) -> Result<(usize, i64)> {
    let s = c.samples();
    let span = s[s.len() - 1] - s[0];
    let k = span.round();
    if (span - k).abs() > CURVE_TOL {
        return Err(Error::MalformedCurve(format!("seam span {span} is not an integer")));
    }
    let k = k as i64;
    if k != c.declared_k() {
        return Err(Error::MalformedCurve(format!(
            "measured winding {k} differs from declared {}",
            c.declared_k()
        )));
    }
    if gcd(c.q() as i64, k) != 1 {
        return Err(Error::Invariant(format!("gcd(q={}, k={k}) != 1", c.q())));
    }
    Ok((c.q(), k))
}

/// Whether two q-curves are disjoint. Each pair of strands is followed over
/// `θ ∈ [0, 1]` on `grid + 1` fibres and must keep its lifted difference in
/// one band between consecutive integers. Exact for the piecewise-linear
/// curves when `grid` is a multiple of both sample rates.
pub fn curves_disjoint(a: &QCurve, b: &QCurve, grid: usize) -> bool {
    let grid = grid.max(1);
    (0..a.q()).all(|i| {
        (0..b.q()).all(|m| {
            let diff = |j: usize| {
                let th = j as f64 / grid as f64;
                a.eval(th + i as f64) - b.eval(th + m as f64)
            };
            let band = diff(0).floor();
            (0..=grid).all(|j| {
                let d = diff(j);
                d.floor() == band && d - band > CURVE_TOL && band + 1.0 - d > CURVE_TOL
            })
        })
    })
}
