//! Fibrewise rotation numbers, Lyapunov exponents and detection of rational
//! dependence `ρ = (k/q)ω + l/(pq) mod 1`.
//!
//! Estimators report a Cauchy residual, the circle distance between the
//! estimate after `n` and after `⌊n/2⌋` iterates. The residual is a
//! convergence diagnostic, not an error bound.

use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{dist, wrap_f64, BaseRotation, LiftedPoint};
use crate::error::{Error, Result};
use crate::numerics::{gcd, CompensatedSum};
use crate::systems::{log_derivative_n, QpfSystem, Smoothness};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Pointwise,
    Integrated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationEstimate {
    /// `ρ_T mod 1`.
    pub value: f64,
    pub iterations: usize,
    pub method: Method,
    pub residual: f64,
}

/// Integer data `(p, q, k, l)` of a `p,q`-invariant graph with winding
/// number `k` and jumping number `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphSignature {
    pub p: i64,
    pub q: i64,
    pub k: i64,
    pub l: i64,
    pub predicted_rho: f64,
}

impl GraphSignature {
    pub fn new(p: i64, q: i64, k: i64, l: i64, omega: f64) -> Result<Self> {
        if p < 1 || q < 1 {
            return Err(Error::Invariant(format!("p, q must be positive (p={p}, q={q})")));
        }
        if gcd(k, q) != 1 {
            return Err(Error::Invariant(format!("gcd(k={k}, q={q}) != 1")));
        }
        if gcd(l, p) != 1 {
            return Err(Error::Invariant(format!("gcd(l={l}, p={p}) != 1")));
        }
        Ok(Self {
            p,
            q,
            k,
            l,
            predicted_rho: predicted_rho(p, q, k, l, omega),
        })
    }
}

/// `wrap((k/q)ω + l/(pq))`.
pub fn predicted_rho(p: i64, q: i64, k: i64, l: i64, omega: f64) -> f64 {
    wrap_f64(k as f64 / q as f64 * wrap_f64(omega) + l as f64 / (p * q) as f64)
}

fn check_lifted(p: &LiftedPoint, step: usize) -> Result<()> {
    if p.frac.is_finite() {
        Ok(())
    } else {
        Err(Error::Unwrap {
            step,
            detail: "lift returned a non-finite value".into(),
        })
    }
}

/// Displacements `T̂^n(x̂) - x̂` after `half` and `n` steps.
fn displacements<S: QpfSystem + ?Sized>(
    sys: &S,
    theta0: f64,
    x0: f64,
    half: usize,
    n: usize,
) -> Result<(f64, f64)> {
    let start = LiftedPoint::from_real(x0);
    let mut pt = start;
    let mut base = BaseRotation::new(theta0, sys.omega());
    let mut at_half = 0.0;
    for step in 0..n {
        pt = pt.step(sys, base.current());
        base.advance();
        if step + 1 == half {
            check_lifted(&pt, step)?;
            at_half = pt.minus(&start);
        }
    }
    check_lifted(&pt, n)?;
    Ok((at_half, pt.minus(&start)))
}

/// `wrap((T̂_θ^n(x̂) - x̂)/n)` from a single orbit.
pub fn rotation_number_pointwise<S: QpfSystem + ?Sized>(
    sys: &S,
    theta0: f64,
    x0: f64,
    n: usize,
) -> Result<RotationEstimate> {
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let half = (n / 2).max(1);
    let (dh, dn) = displacements(sys, theta0, x0, half, n)?;
    let value = wrap_f64(dn / n as f64);
    Ok(RotationEstimate {
        value,
        iterations: n,
        method: Method::Pointwise,
        residual: dist(value, dh / half as f64),
    })
}

/// `wrap((1/n)·mean_j T̂_{θ_j}^n(0))` over the uniform grid `θ_j = j/m`.
/// Grid points run in parallel; the reduction is in ascending grid order.
pub fn rotation_number_integrated<S: QpfSystem + ?Sized>(
    sys: &S,
    m: usize,
    n: usize,
) -> Result<RotationEstimate> {
    if m < 2 || n == 0 {
        return Err(Error::Parameter(format!("need m >= 2 and n >= 1 (m={m}, n={n})")));
    }
    let half = (n / 2).max(1);
    let per_theta: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .map(|j| displacements(sys, j as f64 / m as f64, 0.0, half, n))
        .collect::<Result<_>>()?;
    let sum_n: CompensatedSum = per_theta.iter().map(|d| d.1).collect();
    let sum_h: CompensatedSum = per_theta.iter().map(|d| d.0).collect();
    let value = wrap_f64(sum_n.value() / m as f64 / n as f64);
    let at_half = sum_h.value() / m as f64 / half as f64;
    Ok(RotationEstimate {
        value,
        iterations: n,
        method: Method::Integrated,
        residual: dist(value, at_half),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Max minus min over the sampled initial conditions.
    pub per_orbit_spread: f64,
    pub per_orbit: Vec<f64>,
}

/// Fibre Lyapunov exponent `(1/n) log DT_θ^n(x)`, averaged over `samples`
/// initial conditions `x₀ + i/samples` on the fibre over `θ₀`.
///
/// The `1/n` normalisation is the standard one; it turns the limit of
/// `log DT^n` into an exponent.
pub fn lyapunov_exponent<S: QpfSystem + ?Sized>(
    sys: &S,
    theta0: f64,
    x0: f64,
    n: usize,
    samples: usize,
) -> Result<LyapunovEstimate> {
    if sys.smoothness() != Smoothness::Diffeomorphism {
        return Err(Error::Unsupported(format!(
            "Lyapunov exponents need a diffeomorphism; {} is a homeomorphism",
            sys.name()
        )));
    }
    if n == 0 || samples == 0 {
        return Err(Error::Parameter("n and samples must be at least 1".into()));
    }
    let per_orbit: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let x = wrap_f64(x0 + i as f64 / samples as f64);
            log_derivative_n(sys, theta0, x, n as i64).map(|s| s / n as f64)
        })
        .collect::<Result<_>>()?;
    let mean: CompensatedSum = per_orbit.iter().copied().collect();
    let (lo, hi) = per_orbit
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(LyapunovEstimate {
        value: mean.value() / samples as f64,
        iterations: n,
        per_orbit_spread: hi - lo,
        per_orbit,
    })
}

/// Birkhoff average `(1/n) Σ_{i<n} f(θ_i, x_i)` of `f` along the orbit of
/// `(θ₀, x₀)`, both coordinates reduced to `[0, 1)`.
pub fn birkhoff_average<S, F>(sys: &S, theta0: f64, x0: f64, n: usize, f: F) -> Result<f64>
where
    S: QpfSystem + ?Sized,
    F: Fn(f64, f64) -> f64,
{
    if n == 0 {
        return Err(Error::Parameter("n must be at least 1".into()));
    }
    let mut pt = LiftedPoint::from_real(x0);
    let mut base = BaseRotation::new(theta0, sys.omega());
    let mut sum = CompensatedSum::new();
    for step in 0..n {
        let th = base.current();
        sum.add(f(th, pt.frac));
        pt = pt.step(sys, th);
        base.advance();
        check_lifted(&pt, step)?;
    }
    Ok(sum.value() / n as f64)
}

/// Exhaustive search for `(p, q, k, l)` with `wrap((k/q)ω + l/(pq))` within
/// `tol` of `rho`.
///
/// Ranges: `1 ≤ q ≤ max_q`, `|k| < 2q` with `gcd(k, q) = 1` (so `k = 0` only
/// for `q = 1`), `1 ≤ p ≤ max_p`, `0 ≤ l < pq` with `gcd(l, p) = 1`. The
/// closest candidate wins; near-ties (within 1e-14) go to the
/// lexicographically smallest `(q, p, |k|, l)`.
pub fn detect_rational_dependence(
    rho: f64,
    omega: f64,
    max_q: i64,
    max_p: i64,
    tol: f64,
) -> Option<GraphSignature> {
    let mut best: Option<(f64, GraphSignature)> = None;
    for q in 1..=max_q.max(0) {
        for p in 1..=max_p.max(0) {
            for abs_k in 0..2 * q {
                let ks: &[i64] = if abs_k == 0 { &[0] } else { &[-1, 1] };
                for &sign in ks {
                    let k = sign * abs_k;
                    if gcd(k, q) != 1 {
                        continue;
                    }
                    for l in 0..p * q {
                        if gcd(l, p) != 1 {
                            continue;
                        }
                        let pred = predicted_rho(p, q, k, l, omega);
                        let d = dist(rho, pred);
                        if d > tol {
                            continue;
                        }
                        if best.as_ref().is_none_or(|(bd, _)| d < bd - 1e-14) {
                            best = Some((
                                d,
                                GraphSignature {
                                    p,
                                    q,
                                    k,
                                    l,
                                    predicted_rho: pred,
                                },
                            ));
                        }
                    }
                }
            }
        }
    }
    best.map(|(_, s)| s)
}

/// Default search tolerance coupled to an estimator: three times its residual.
pub fn default_tolerance(estimate: &RotationEstimate) -> f64 {
    (3.0 * estimate.residual).max(1e-12)
}
