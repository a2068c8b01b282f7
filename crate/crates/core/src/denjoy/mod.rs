//! Distortion and wandering-box combinatorics for forced circle
//! diffeomorphisms: the variation `V(T)`, the distortion integral, return
//! times `N(α)`, the cyclic ordering `⊴` of image boxes, closest returns,
//! the image-area bound at closest returns and a transitivity probe.
//!
//! Image sets are curvilinear; every intersection test here is decided on
//! finitely many sampled fibres.

mod combinatorics;
mod distortion;
mod probe;
mod variation;

use serde::Serialize;

pub use combinatorics::{
    closest_return_bound, closest_returns, comparison_region_disjoint, is_ordered, ordering,
    total_image_mass, BoxCombinatorics, OrderRecord, ReturnBound,
};
pub use distortion::{disjoint_iterates, distortion_integral, Distortion, Strip};
pub use probe::{transitivity_probe, ProbeResult};
pub use variation::{variation, VariationEstimate};

use crate::circle::{dist, wrap_f64, CircleInterval, LiftedPoint};
use crate::error::{Error, Result};
use crate::systems::{base_after, iterate_lift, QpfSystem};

/// Default horizon for return-time combinatorics.
pub const DEFAULT_HORIZON: i64 = 10_000;
/// Default horizon for transitivity probes.
pub const DEFAULT_PROBE_HORIZON: i64 = 100_000;

/// Rounding slack for interval containment.
const SLACK: f64 = 1e-12;

/// A rectangle `W = I × K` with base arc `I` (`|I| < 1/2`) and fibre arc `K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusBox {
    pub base: CircleInterval,
    pub fibre: CircleInterval,
}

impl TorusBox {
    pub fn new(base: CircleInterval, fibre: CircleInterval) -> Result<Self> {
        if base.length() >= 0.5 {
            return Err(Error::Parameter(format!(
                "base interval length {} must be below 1/2",
                base.length()
            )));
        }
        Ok(Self { base, fibre })
    }

    /// Box from centres and side lengths.
    pub fn from_sides(theta0: f64, base_len: f64, x0: f64, fibre_len: f64) -> Result<Self> {
        Self::new(
            CircleInterval::with_length(theta0, base_len)?,
            CircleInterval::with_length(x0, fibre_len)?,
        )
    }

    /// Lebesgue measure `|I|·|K|`.
    pub fn area(&self) -> f64 {
        self.base.length() * self.fibre.length()
    }

    /// Lifted fibre `(T^n W)_θ = T^n_{θ - nω}(K)` as `(lo, hi)`, defined when
    /// `θ ∈ I + nω`.
    pub fn image_arc<S: QpfSystem + ?Sized>(&self, sys: &S, n: i64, theta: f64) -> (f64, f64) {
        let start = base_after(theta, sys.omega(), -n);
        (
            iterate_lift(sys, start, self.fibre.lo(), n),
            iterate_lift(sys, start, self.fibre.hi(), n),
        )
    }
}

/// `N(α) = { |n| ≤ horizon : |nω mod 1| ≤ (1 - α)|I|/2 }`, ascending.
pub fn return_times(base: &CircleInterval, alpha: f64, omega: f64, horizon: i64) -> Result<Vec<i64>> {
    if base.length() >= 0.5 {
        return Err(Error::Parameter(format!(
            "|I| = {} must be below 1/2",
            base.length()
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if horizon < 1 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    let threshold = (1.0 - alpha) / 2.0 * base.length();
    Ok((-horizon..=horizon)
        .filter(|&n| dist(wrap_f64(n as f64 * wrap_f64(omega)), 0.0) <= threshold)
        .collect())
}

/// `J ⊆ ⋂ (I + n_i ω)`.
pub fn comparable(base: &CircleInterval, omega: f64, times: &[i64], j: &CircleInterval) -> bool {
    times
        .iter()
        .all(|&n| base.shifted(n as f64 * omega).contains_interval(j, SLACK))
}

/// One inverse step on the lifted fibre, landing over `theta`.
pub(crate) fn step_back<S: QpfSystem + ?Sized>(sys: &S, theta: f64, p: LiftedPoint) -> LiftedPoint {
    let q = LiftedPoint::from_real(sys.inverse_lift(theta, p.frac));
    LiftedPoint {
        turns: p.turns + q.turns,
        frac: q.frac,
    }
}

/// Whether the lifted arcs `[a0, a1]` and `[b0, b1]` meet on the circle.
pub(crate) fn arcs_meet(a: (f64, f64), b: (f64, f64)) -> bool {
    let (wa, wb) = (a.1 - a.0, b.1 - b.0);
    wrap_f64(b.0 - a.0) <= wa || wrap_f64(a.0 - b.0) <= wb
}
