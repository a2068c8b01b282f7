//! Circle and lift arithmetic.
//!
//! Points of the circle are stored by their canonical representative in
//! `[0, 1)`. Lifted orbits keep the integer part separately from the
//! fractional part so that projecting a lifted orbit reproduces the circle
//! orbit bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::QpfSystem;

/// Reduce a finite real to `[0, 1)`. `1.0` (which `x - floor(x)` can return
/// for tiny negative inputs) is mapped to `0.0`.
#[inline]
pub fn wrap_f64(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Circle distance between two reals, `min(|a-b| mod 1, 1 - |a-b| mod 1)`.
#[inline]
pub fn dist(a: f64, b: f64) -> f64 {
    let d = wrap_f64((a - b).abs());
    d.min(1.0 - d)
}

/// Representative of `a - b` in `[-1/2, 1/2)`.
#[inline]
pub fn signed_diff(a: f64, b: f64) -> f64 {
    let d = wrap_f64(a - b);
    if d >= 0.5 {
        d - 1.0
    } else {
        d
    }
}

/// A point of the circle, canonical representative in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CirclePoint(f64);

impl CirclePoint {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<CirclePoint> for f64 {
    fn from(p: CirclePoint) -> f64 {
        p.0
    }
}

/// `x mod 1` as a circle point.
pub fn wrap(x: f64) -> Result<CirclePoint> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("cannot wrap non-finite value {x}")));
    }
    Ok(CirclePoint(wrap_f64(x)))
}

pub fn circle_dist(a: CirclePoint, b: CirclePoint) -> f64 {
    dist(a.0, b.0)
}

/// An open arc of the circle given by its centre and half width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleInterval {
    center: f64,
    half_width: f64,
}

impl CircleInterval {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !center.is_finite() || !(half_width > 0.0 && half_width < 0.5) {
            return Err(Error::Parameter(format!(
                "interval half width must lie in (0, 1/2), got {half_width}"
            )));
        }
        Ok(Self {
            center: wrap_f64(center),
            half_width,
        })
    }

    /// Interval of total length `length` centred at `center`.
    pub fn with_length(center: f64, length: f64) -> Result<Self> {
        Self::new(center, length / 2.0)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_width
    }

    /// Lower end, as a real within 1/2 of the centre.
    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    /// Open-interval membership.
    pub fn contains(&self, p: f64) -> bool {
        dist(p, self.center) < self.half_width
    }

    /// Closed-interval membership with slack `tol`.
    pub fn contains_closed(&self, p: f64, tol: f64) -> bool {
        dist(p, self.center) <= self.half_width + tol
    }

    /// The symmetric middle part with length `alpha * |I|`.
    pub fn middle(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Self::new(self.center, alpha * self.half_width)
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self {
            center: wrap_f64(self.center + by),
            half_width: self.half_width,
        }
    }

    /// `other ⊆ self` (closed containment, with slack `tol`).
    pub fn contains_interval(&self, other: &CircleInterval, tol: f64) -> bool {
        dist(self.center, other.center) + other.half_width <= self.half_width + tol
    }

    pub fn intersects(&self, other: &CircleInterval) -> bool {
        dist(self.center, other.center) < self.half_width + other.half_width
    }

    /// Intersection of two arcs. Both lengths are below 1/2 so the
    /// intersection is a single arc or empty.
    pub fn intersection(&self, other: &CircleInterval) -> Option<(f64, f64)> {
        if !self.intersects(other) {
            return None;
        }
        let d = signed_diff(other.center, self.center);
        let lo = (-self.half_width).max(d - other.half_width);
        let hi = self.half_width.min(d + other.half_width);
        (hi > lo).then_some((self.center + lo, self.center + hi))
    }

    /// `n` evenly spaced interior sample points, endpoints excluded.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        crate::numerics::midpoints(self.lo(), self.hi(), n).collect()
    }
}

/// A lifted real `turns + frac` with `frac` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub turns: i64,
    pub frac: f64,
}

impl LiftedPoint {
    pub fn from_real(x: f64) -> Self {
        let fl = x.floor();
        let frac = x - fl;
        if frac >= 1.0 {
            Self { turns: fl as i64 + 1, frac: 0.0 }
        } else {
            Self { turns: fl as i64, frac }
        }
    }

    pub fn value(&self) -> f64 {
        self.turns as f64 + self.frac
    }

    pub fn project(&self) -> f64 {
        self.frac
    }

    /// Apply one lifted fibre step at base `theta`.
    #[inline]
    pub fn step<S: QpfSystem + ?Sized>(&self, sys: &S, theta: f64) -> Self {
        let y = sys.lift(theta, self.frac);
        let fl = y.floor();
        let mut turns = self.turns + fl as i64;
        let mut frac = y - fl;
        if frac >= 1.0 {
            turns += 1;
            frac = 0.0;
        }
        Self { turns, frac }
    }

    /// `self - other` as a real, exact in the integer part.
    pub fn minus(&self, other: &LiftedPoint) -> f64 {
        (self.turns - other.turns) as f64 + (self.frac - other.frac)
    }
}

/// A lifted orbit `x̂_j = T̂_θ^j(x̂_0)` for `j = 0..=N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedOrbit {
    pub theta0: f64,
    pub samples: Vec<LiftedPoint>,
}

impl LiftedOrbit {
    pub fn step_count(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(LiftedPoint::value).collect()
    }

    pub fn projected(&self) -> Vec<f64> {
        self.samples.iter().map(LiftedPoint::project).collect()
    }
}

/// Base angle after `j` steps, accumulated incrementally.
#[derive(Debug, Clone, Copy)]
pub struct BaseRotation {
    theta: f64,
    omega: f64,
}

impl BaseRotation {
    pub fn new(theta0: f64, omega: f64) -> Self {
        Self {
            theta: wrap_f64(theta0),
            omega: wrap_f64(omega),
        }
    }

    pub fn current(&self) -> f64 {
        self.theta
    }

    #[inline]
    pub fn advance(&mut self) {
        let t = self.theta + self.omega;
        self.theta = if t >= 1.0 { t - 1.0 } else { t };
    }
}

/// Lifted orbit of `x̂0` over `theta` under the lift declared by `sys`.
///
/// Every step is checked against the circle map: the projection of the
/// lifted image must agree with `fibre_map` applied to the projected point.
pub fn unwrap_orbit<S: QpfSystem + ?Sized>(
    sys: &S,
    theta: f64,
    x0: f64,
    n: usize,
) -> Result<LiftedOrbit> {
    if !x0.is_finite() || !theta.is_finite() {
        return Err(Error::Domain("non-finite base point".into()));
    }
    let mut base = BaseRotation::new(theta, sys.omega());
    let mut pt = LiftedPoint::from_real(x0);
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(pt);
    for step in 0..n {
        let th = base.current();
        let next = pt.step(sys, th);
        let expected = sys.fibre_map(th, pt.frac);
        if !next.frac.is_finite() || dist(next.frac, expected) > 1e-9 {
            return Err(Error::Unwrap {
                step,
                detail: format!(
                    "lift image {} does not project to fibre image {expected}",
                    next.value()
                ),
            });
        }
        samples.push(next);
        pt = next;
        base.advance();
    }
    Ok(LiftedOrbit {
        theta0: wrap_f64(theta),
        samples,
    })
}

/// Unwrap a sequence of circle points given the nominal lifted increment of
/// each step: each displacement is chosen within (-1/2, 1/2) of the nominal
/// increment. Fails if a step is ambiguous (deviation at least 1/2).
pub fn unwrap_circle_samples(points: &[f64], nominal: &[f64], start: f64) -> Result<Vec<f64>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    if nominal.len() + 1 < points.len() {
        return Err(Error::Parameter("need one nominal increment per step".into()));
    }
    let mut out = Vec::with_capacity(points.len());
    let mut cur = start + signed_diff(points[0], start);
    out.push(cur);
    for (j, w) in points.windows(2).enumerate() {
        let guess = cur + nominal[j];
        let dev = signed_diff(w[1], guess);
        if dev.abs() >= 0.5 - 1e-12 {
            return Err(Error::Unwrap {
                step: j,
                detail: format!("displacement deviates from nominal increment by {dev}"),
            });
        }
        cur = guess + dev;
        out.push(cur);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::{ForcedArnold, Translation};

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap(1.25).unwrap().value(), 0.25);
        assert_eq!(wrap(-0.25).unwrap().value(), 0.75);
        assert_eq!(wrap(0.0).unwrap().value(), 0.0);
        assert!(wrap(f64::NAN).is_err());
        assert!(wrap(f64::INFINITY).is_err());
    }

    #[test]
    fn wrap_tie_at_one() {
        assert_eq!(wrap_f64(-1e-18), 0.0);
        assert_eq!(wrap_f64(1.0), 0.0);
    }

    #[test]
    fn dist_examples() {
        let p = |x| wrap(x).unwrap();
        assert!((circle_dist(p(0.1), p(0.9)) - 0.2).abs() < 1e-15);
        assert_eq!(circle_dist(p(0.5), p(0.5)), 0.0);
        assert_eq!(circle_dist(p(0.0), p(0.5)), 0.5);
    }

    #[test]
    fn interval_middle_and_membership() {
        let i = CircleInterval::with_length(0.0, 0.1).unwrap();
        assert!(i.contains(0.99));
        assert!(i.contains(0.04));
        assert!(!i.contains(0.06));
        let m = i.middle(0.5).unwrap();
        assert!((m.length() - 0.05).abs() < 1e-15);
        assert_eq!(m.center(), i.center());
        assert!(i.contains_interval(&m, 0.0));
        assert!(CircleInterval::new(0.0, 0.5).is_err());
    }

    #[test]
    fn interval_intersection_wraps() {
        let a = CircleInterval::with_length(0.98, 0.1).unwrap();
        let b = CircleInterval::with_length(0.05, 0.1).unwrap();
        let (lo, hi) = a.intersection(&b).unwrap();
        assert!((hi - lo - 0.03).abs() < 1e-12);
        assert!(dist(lo, 0.0) < 1e-12);
    }

    #[test]
    fn unwrap_pure_rotation() {
        let sys = Translation::with_increment(GOLDEN, 0.3);
        let orbit = unwrap_orbit(&sys, 0.0, 0.0, 3).unwrap();
        let v = orbit.values();
        for (j, want) in [0.0, 0.3, 0.6, 0.9].iter().enumerate() {
            assert!((v[j] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn unwrap_identity_is_constant() {
        let sys = Translation::with_increment(GOLDEN, 0.0);
        let orbit = unwrap_orbit(&sys, 0.3, 2.7, 5).unwrap();
        assert!(orbit.values().iter().all(|&x| (x - 2.7).abs() < 1e-15));
    }

    #[test]
    fn unwrap_affine_lift() {
        let s = GOLDEN / 2.0 + 0.25;
        let sys = Translation::new(GOLDEN, 1, 2, 1, 2).unwrap();
        let v = unwrap_orbit(&sys, 0.0, 0.0, 4).unwrap().values();
        for (j, x) in v.iter().enumerate() {
            assert!((x - j as f64 * s).abs() < 1e-14, "{j}: {x}");
        }
    }

    #[test]
    fn projection_matches_circle_orbit_exactly() {
        let sys = ForcedArnold::new(GOLDEN, 0.3, 0.5, 0.2).unwrap();
        let orbit = unwrap_orbit(&sys, 0.1, 3.4, 500).unwrap();
        let mut base = BaseRotation::new(0.1, GOLDEN);
        let mut x = wrap_f64(3.4);
        for (j, p) in orbit.projected().iter().enumerate() {
            assert_eq!(*p, x, "step {j}");
            x = sys.fibre_map(base.current(), x);
            base.advance();
        }
    }

    #[test]
    fn unwrap_samples_flags_ambiguous_step() {
        let pts = [0.0, 0.3, 0.9];
        let ok = unwrap_circle_samples(&pts, &[0.3, 0.55], 0.0).unwrap();
        assert!((ok[2] - 0.9).abs() < 1e-15);
        let err = unwrap_circle_samples(&pts, &[0.3, 0.1], 0.0).unwrap_err();
        assert!(matches!(err, Error::Unwrap { step: 1, .. }));
    }
}
