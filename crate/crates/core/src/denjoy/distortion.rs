use rayon::prelude::*;
use serde::Serialize;

use super::{arcs_meet, TorusBox};
use crate::circle::{signed_diff, CircleInterval, LiftedPoint, BaseRotation};
use crate::error::{Error, Result};
use crate::numerics::{midpoints, CompensatedSum};
use crate::systems::{log_derivative_n, QpfSystem};

/// Base samples used when testing `T^d(S) ∩ S = ∅`.
const DISJOINT_SAMPLES: usize = 64;
/// Midpoint-rule nodes for the distortion integral.
const QUADRATURE: usize = 256;

/// The region `[φ, ψ]` between two graphs over a base arc `I`, sampled at
/// evenly spaced points of the closed arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Strip {
    base: CircleInterval,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Strip {
    /// The rectangle `I × K` of a box.
    pub fn rectangle(b: &TorusBox) -> Self {
        Self {
            base: b.base,
            lower: vec![b.fibre.lo(); 2],
            upper: vec![b.fibre.hi(); 2],
        }
    }

    /// Sample `lower` and `upper` at `samples` points of the closed base arc
    /// (`θ` passed as a lifted value near the arc's centre).
    pub fn from_fn(
        base: CircleInterval,
        samples: usize,
        lower: impl Fn(f64) -> f64,
        upper: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if samples < 2 {
            return Err(Error::Parameter("need at least 2 samples".into()));
        }
        let thetas: Vec<f64> = (0..samples)
            .map(|i| base.lo() + base.length() * i as f64 / (samples - 1) as f64)
            .collect();
        let lower: Vec<f64> = thetas.iter().map(|&t| lower(t)).collect();
        let upper: Vec<f64> = thetas.iter().map(|&t| upper(t)).collect();
        for (l, u) in lower.iter().zip(&upper) {
            if !(u > l && u - l < 1.0) {
                return Err(Error::Parameter(format!("strip bounds ({l}, {u}) are not a proper arc")));
            }
        }
        Ok(Self { base, lower, upper })
    }

    pub fn base(&self) -> &CircleInterval {
        &self.base
    }

    /// Lifted `(φ(θ), ψ(θ))` for `θ` in the closed base arc.
    pub fn bounds(&self, theta: f64) -> (f64, f64) {
        let u = (signed_diff(theta, self.base.center()) + self.base.half_width()) / self.base.length();
        let x = u.clamp(0.0, 1.0) * (self.lower.len() - 1) as f64;
        let i = (x.floor() as usize).min(self.lower.len() - 2);
        let t = x - i as f64;
        (
            self.lower[i] + t * (self.lower[i + 1] - self.lower[i]),
            self.upper[i] + t * (self.upper[i + 1] - self.upper[i]),
        )
    }
}

/// Largest `n ≤ n_max` such that `S, T(S), …, T^{n-1}(S)` are pairwise
/// disjoint on the sampled fibres. Since `T` is invertible this is the first
/// `d ≥ 1` with `T^d(S) ∩ S ≠ ∅`, capped at `n_max`.
pub fn disjoint_iterates<S: QpfSystem + ?Sized>(sys: &S, strip: &Strip, n_max: usize) -> usize {
    let base = strip.base;
    let omega = sys.omega();
    (0..DISJOINT_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let th0 = base.lo() + base.length() * i as f64 / (DISJOINT_SAMPLES - 1) as f64;
            let (lo0, hi0) = strip.bounds(th0);
            let mut lo = LiftedPoint::from_real(lo0);
            let mut hi = LiftedPoint::from_real(hi0);
            let mut rot = BaseRotation::new(th0, omega);
            for d in 1..n_max {
                let th = rot.current();
                lo = lo.step(sys, th);
                hi = hi.step(sys, th);
                rot.advance();
                let here = rot.current();
                if base.contains_closed(here, 1e-12) && arcs_meet((lo.value(), hi.value()), strip.bounds(here)) {
                    return d;
                }
            }
            n_max
        })
        .min()
        .unwrap_or(n_max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distortion {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs - rhs`.
    pub margin: f64,
    pub n: usize,
    pub s: f64,
    pub variation: f64,
}

/// Both sides of the distortion inequality
/// `∫_I (DT^n_θ(ψ(θ)) / DT^n_θ(φ(θ)))^s dθ ≥ |I| exp(-s V / |I|)`.
///
/// Refuses with a hypothesis error unless `S, …, T^{n-1}(S)` are pairwise
/// disjoint on the sampled fibres. `variation` is `V(T)`.
pub fn distortion_integral<S: QpfSystem + ?Sized>(
    sys: &S,
    strip: &Strip,
    n: usize,
    s: f64,
    variation: f64,
) -> Result<Distortion> {
    if !(s >= 0.0) || !variation.is_finite() || variation < 0.0 {
        return Err(Error::Parameter(format!("need s >= 0 and finite V >= 0 (s={s}, V={variation})")));
    }
    let reach = disjoint_iterates(sys, strip, n);
    if reach < n {
        return Err(Error::Hypothesis(format!(
            "T^{reach}(S) meets S, so the first {n} images are not pairwise disjoint"
        )));
    }
    let len = strip.base.length();
    let nodes: Vec<f64> = midpoints(strip.base.lo(), strip.base.hi(), QUADRATURE).collect();
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&th| {
            let (phi, psi) = strip.bounds(th);
            let up = log_derivative_n(sys, th, psi, n as i64)?;
            let down = log_derivative_n(sys, th, phi, n as i64)?;
            Ok((s * (up - down)).exp())
        })
        .collect::<Result<_>>()?;
    let sum: CompensatedSum = vals.into_iter().collect();
    let lhs = sum.value() * len / QUADRATURE as f64;
    let rhs = len * (-s * variation / len).exp();
    Ok(Distortion {
        lhs,
        rhs,
        margin: lhs - rhs,
        n,
        s,
        variation,
    })
}

#[cfg(test)]
mod tests {
    use super::super::variation;
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::{ForcedArnold, SkewTranslation};

    #[test]
    fn skew_translation_is_an_equality() {
        let sys = SkewTranslation::sinusoidal(GOLDEN, 0.3, 0.1).unwrap();
        let b = TorusBox::from_sides(0.2, 0.05, 0.4, 0.01).unwrap();
        let strip = Strip::rectangle(&b);
        let n = disjoint_iterates(&sys, &strip, 50);
        assert!(n >= 2);
        for s in [0.0, 0.5, 1.0] {
            let d = distortion_integral(&sys, &strip, n, s, 0.0).unwrap();
            assert!((d.lhs - d.rhs).abs() < 1e-12, "{d:?}");
            assert!((d.lhs - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn arnold_thin_box_satisfies_inequality() {
        let sys = ForcedArnold::new(GOLDEN, 0.1, 0.3, 0.2).unwrap();
        let v = variation(&sys, 16, 256).unwrap().value;
        let b = TorusBox::from_sides(0.1, 0.04, 0.3, 0.002).unwrap();
        let strip = Strip::rectangle(&b);
        let n = disjoint_iterates(&sys, &strip, 400);
        assert!(n > 1);
        let d = distortion_integral(&sys, &strip, n, 0.5, v).unwrap();
        assert!(d.margin >= 0.0, "{d:?}");
        let zero = distortion_integral(&sys, &strip, n, 0.0, v).unwrap();
        assert!((zero.lhs - zero.rhs).abs() < 1e-12);
    }

    #[test]
    fn overlapping_iterates_are_refused() {
        let sys = ForcedArnold::new(GOLDEN, 0.0, 0.3, 0.0).unwrap();
        let b = TorusBox::from_sides(0.0, 0.2, 0.5, 0.3).unwrap();
        let strip = Strip::rectangle(&b);
        let reach = disjoint_iterates(&sys, &strip, 100);
        assert!(reach < 100);
        assert!(matches!(
            distortion_integral(&sys, &strip, reach + 1, 0.5, 1.0),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn graph_bounded_strip() {
        let base = CircleInterval::with_length(0.5, 0.1).unwrap();
        let strip = Strip::from_fn(base, 9, |t| 0.2 + 0.1 * t, |t| 0.25 + 0.1 * t).unwrap();
        let (l, u) = strip.bounds(0.5);
        assert!((l - 0.25).abs() < 1e-12 && (u - 0.3).abs() < 1e-12);
        assert!(Strip::from_fn(base, 9, |_| 0.3, |_| 0.2).is_err());
    }
}
