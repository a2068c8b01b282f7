//! Quasiperiodically forced circle maps `(θ, x) ↦ (θ + ω, T_θ(x))`.
//!
//! A system is described by its lift `T̂_θ(x̂)`; the circle map, iterates
//! and inverses are derived from it. Iterates follow the convention
//! `T_θ^n := (T^n)_θ` for every integer `n`, negative `n` going through the
//! inverse fibre maps.

mod catalog;
mod config;

use serde::Serialize;

pub use catalog::{
    catalog, from_chart, to_chart, CatalogEntry, Contraction, Params, ForcedArnold, Harper, SkewTranslation,
    Translation,
};
pub use config::{load_system, parse_config, LoadedSystem, SystemConfig};

use crate::circle::{wrap_f64, BaseRotation, LiftedPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    Homeomorphism,
    Diffeomorphism,
}

pub trait QpfSystem: Send + Sync {
    fn name(&self) -> &str;

    /// Forcing frequency, identified with its lift in `[0, 1)`.
    fn omega(&self) -> f64;

    /// The declared lift `T̂_θ(x̂)`. Must satisfy `lift(θ, x̂ + 1) = lift(θ, x̂) + 1`
    /// and be strictly increasing in `x̂`.
    fn lift(&self, theta: f64, x: f64) -> f64;

    fn fibre_map(&self, theta: f64, x: f64) -> f64 {
        wrap_f64(self.lift(theta, x))
    }

    fn smoothness(&self) -> Smoothness;

    /// Fibre derivative `DT_θ(x)`; `None` for homeomorphisms.
    fn derivative(&self, theta: f64, x: f64) -> Option<f64>;

    /// Solve `lift(θ, x̂) = y` for `x̂`.
    fn inverse_lift(&self, theta: f64, y: f64) -> f64 {
        invert_lift_numerically(self, theta, y)
    }

    fn inverse_fibre_map(&self, theta: f64, y: f64) -> f64 {
        wrap_f64(self.inverse_lift(theta, y))
    }

    /// Resolved parameters, for run manifests.
    fn parameters(&self) -> Vec<(String, f64)>;
}

impl<S: QpfSystem + ?Sized> QpfSystem for Box<S> {
    fn name(&self) -> &str {
        (**self).name()
    }
    fn omega(&self) -> f64 {
        (**self).omega()
    }
    fn lift(&self, theta: f64, x: f64) -> f64 {
        (**self).lift(theta, x)
    }
    fn fibre_map(&self, theta: f64, x: f64) -> f64 {
        (**self).fibre_map(theta, x)
    }
    fn smoothness(&self) -> Smoothness {
        (**self).smoothness()
    }
    fn derivative(&self, theta: f64, x: f64) -> Option<f64> {
        (**self).derivative(theta, x)
    }
    fn inverse_lift(&self, theta: f64, y: f64) -> f64 {
        (**self).inverse_lift(theta, y)
    }
    fn inverse_fibre_map(&self, theta: f64, y: f64) -> f64 {
        (**self).inverse_fibre_map(theta, y)
    }
    fn parameters(&self) -> Vec<(String, f64)> {
        (**self).parameters()
    }
}

/// Bracket-and-bisect inversion of a degree-one lift, polished by Newton
/// steps when a derivative is available.
pub fn invert_lift_numerically<S: QpfSystem + ?Sized>(sys: &S, theta: f64, y: f64) -> f64 {
    // lift(x + m) - y = lift(x) - y + m, so an integer shift brackets the root
    let guess = y - (sys.lift(theta, y) - y);
    let f0 = sys.lift(theta, guess) - y;
    let mut lo = guess - f0.ceil();
    let mut hi = lo + 1.0;
    if sys.lift(theta, lo) > y {
        lo -= 1.0;
        hi -= 1.0;
    }
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sys.lift(theta, mid) > y {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    if sys.derivative(theta, 0.0).is_some() {
        for _ in 0..2 {
            let d = sys.derivative(theta, wrap_f64(x)).unwrap_or(1.0);
            let step = (sys.lift(theta, x) - y) / d;
            if step.is_finite() && step.abs() < 1e-6 {
                x -= step;
            }
        }
    }
    x
}

/// Base angle after `n` steps (any sign), `wrap(θ + nω)`.
pub fn base_after(theta: f64, omega: f64, n: i64) -> f64 {
    wrap_f64(theta + wrap_f64(n as f64 * omega))
}

/// Lifted fibre iterate `T̂_θ^n(x̂)` for any integer `n`. Returns the lifted
/// image.
pub fn iterate_lift<S: QpfSystem + ?Sized>(sys: &S, theta: f64, x: f64, n: i64) -> f64 {
    let omega = sys.omega();
    if n >= 0 {
        let mut base = BaseRotation::new(theta, omega);
        let mut p = LiftedPoint::from_real(x);
        for _ in 0..n {
            p = p.step(sys, base.current());
            base.advance();
        }
        p.value()
    } else {
        let mut th = wrap_f64(theta);
        let mut p = LiftedPoint::from_real(x);
        for _ in 0..(-n) {
            th = wrap_f64(th - omega);
            let y = sys.inverse_lift(th, p.frac);
            let q = LiftedPoint::from_real(y);
            p = LiftedPoint {
                turns: p.turns + q.turns,
                frac: q.frac,
            };
        }
        p.value()
    }
}

/// Lifted iterates of several points of one fibre, all `n` steps.
pub fn iterate_lift_many<S: QpfSystem + ?Sized>(sys: &S, theta: f64, xs: &[f64], n: i64) -> Vec<f64> {
    xs.iter().map(|&x| iterate_lift(sys, theta, x, n)).collect()
}

/// `log DT_θ^n(x)` for any integer `n`, accumulated along the orbit.
pub fn log_derivative_n<S: QpfSystem + ?Sized>(sys: &S, theta: f64, x: f64, n: i64) -> Result<f64> {
    let omega = sys.omega();
    let mut sum = crate::numerics::CompensatedSum::new();
    let deriv = |th: f64, x: f64| -> Result<f64> {
        sys.derivative(th, x)
            .ok_or_else(|| Error::Unsupported(format!("{} is not a diffeomorphism", sys.name())))
    };
    if n >= 0 {
        let mut th = wrap_f64(theta);
        let mut xx = wrap_f64(x);
        for _ in 0..n {
            sum.add(deriv(th, xx)?.ln());
            xx = sys.fibre_map(th, xx);
            th = wrap_f64(th + omega);
        }
    } else {
        let mut th = wrap_f64(theta);
        let mut xx = wrap_f64(x);
        for _ in 0..(-n) {
            th = wrap_f64(th - omega);
            xx = sys.inverse_fibre_map(th, xx);
            sum.add(-deriv(th, xx)?.ln());
        }
    }
    Ok(sum.value())
}

/// Outcome of the invariant spot check on a `(θ, x)` grid.
#[derive(Debug, Clone, Serialize)]
pub struct SpotCheck {
    pub grid: usize,
    pub max_periodicity_error: f64,
    pub max_projection_error: f64,
    pub max_inverse_error: f64,
    pub min_derivative: Option<f64>,
    pub monotone: bool,
}

/// Check the lift invariants of `sys` on a `grid × grid` sample of the torus.
pub fn spot_check<S: QpfSystem + ?Sized>(sys: &S, grid: usize) -> Result<SpotCheck> {
    let mut per = 0.0f64;
    let mut proj = 0.0f64;
    let mut inv = 0.0f64;
    let mut min_d: Option<f64> = None;
    let mut monotone = true;
    for i in 0..grid {
        let th = i as f64 / grid as f64;
        let mut prev: Option<f64> = None;
        let first = sys.lift(th, 0.0);
        for j in 0..grid {
            let x = j as f64 / grid as f64;
            let y = sys.lift(th, x);
            if !y.is_finite() {
                return Err(Error::Invariant(format!("non-finite lift at ({th}, {x})")));
            }
            per = per.max((sys.lift(th, x + 1.0) - y - 1.0).abs());
            proj = proj.max(crate::circle::dist(sys.fibre_map(th, x), y));
            inv = inv.max(crate::circle::dist(sys.inverse_fibre_map(th, sys.fibre_map(th, x)), x));
            if let Some(p) = prev {
                if y <= p {
                    monotone = false;
                }
            }
            prev = Some(y);
            if let Some(d) = sys.derivative(th, x) {
                min_d = Some(min_d.map_or(d, |m: f64| m.min(d)));
            }
        }
        if let Some(p) = prev {
            if p >= first + 1.0 {
                monotone = false;
            }
        }
    }
    let report = SpotCheck {
        grid,
        max_periodicity_error: per,
        max_projection_error: proj,
        max_inverse_error: inv,
        min_derivative: min_d,
        monotone,
    };
    if per > 1e-12 || proj > 1e-12 || inv > 1e-10 || !monotone {
        return Err(Error::Invariant(format!("lift spot check failed: {report:?}")));
    }
    if sys.smoothness() == Smoothness::Diffeomorphism && !min_d.is_some_and(|d| d > 0.0 && d.is_finite()) {
        return Err(Error::Invariant(format!("derivative not positive: {report:?}")));
    }
    Ok(report)
}
