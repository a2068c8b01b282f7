use rayon::prelude::*;
use serde::Serialize;

use super::{arcs_meet, step_back, TorusBox, SLACK};
use crate::circle::{wrap_f64, BaseRotation, LiftedPoint};
use crate::error::{Error, Result};
use crate::systems::QpfSystem;

const PROBE_SAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    /// Smallest `|n|` with `T^n U ∩ V ≠ ∅` on the sampled fibres; negative
    /// when the hit is backward. `None` means no hit within the horizon,
    /// which says nothing about transitivity.
    pub hit: Option<i64>,
    pub horizon: i64,
    pub samples: usize,
}

/// Scan `T^n U` and `T^{-n} U` for `1 ≤ n ≤ horizon` against `V`, following
/// the fibre arcs of `U` over 32 sampled base points.
pub fn transitivity_probe<S: QpfSystem + ?Sized>(sys: &S, u: &TorusBox, v: &TorusBox, horizon: i64) -> Result<ProbeResult> {
    if horizon < 1 {
        return Err(Error::Parameter("horizon must be at least 1".into()));
    }
    let omega = sys.omega();
    let thetas: Vec<f64> = (0..PROBE_SAMPLES)
        .map(|i| u.base.lo() + u.base.length() * i as f64 / (PROBE_SAMPLES - 1) as f64)
        .collect();
    let vk = (v.fibre.lo(), v.fibre.hi());
    let hits: Vec<(Option<i64>, Option<i64>)> = thetas
        .par_iter()
        .map(|&th| {
            let start = (LiftedPoint::from_real(u.fibre.lo()), LiftedPoint::from_real(u.fibre.hi()));
            let (mut lo, mut hi) = start;
            let mut rot = BaseRotation::new(th, omega);
            let mut fwd = None;
            for n in 1..=horizon {
                lo = lo.step(sys, rot.current());
                hi = hi.step(sys, rot.current());
                rot.advance();
                if v.base.contains_closed(rot.current(), SLACK) && arcs_meet((lo.value(), hi.value()), vk) {
                    fwd = Some(n);
                    break;
                }
            }
            let (mut lo, mut hi) = start;
            let mut t = wrap_f64(th);
            let mut bwd = None;
            for n in 1..=fwd.map_or(horizon, |f| f - 1) {
                t = wrap_f64(t - omega);
                lo = step_back(sys, t, lo);
                hi = step_back(sys, t, hi);
                if v.base.contains_closed(t, SLACK) && arcs_meet((lo.value(), hi.value()), vk) {
                    bwd = Some(n);
                    break;
                }
            }
            (fwd, bwd)
        })
        .collect();
    let fwd = hits.iter().filter_map(|h| h.0).min();
    let bwd = hits.iter().filter_map(|h| h.1).min();
    let hit = match (fwd, bwd) {
        (Some(f), Some(b)) if b < f => Some(-b),
        (Some(f), _) => Some(f),
        (None, Some(b)) => Some(-b),
        (None, None) => None,
    };
    Ok(ProbeResult {
        hit,
        horizon,
        samples: PROBE_SAMPLES,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::{Contraction, Translation};

    #[test]
    fn rigid_translation_hits() {
        let sys = Translation::with_increment(GOLDEN, 2f64.sqrt() - 1.0);
        let u = TorusBox::from_sides(0.1, 0.1, 0.2, 0.1).unwrap();
        let v = TorusBox::from_sides(0.6, 0.1, 0.7, 0.1).unwrap();
        let r = transitivity_probe(&sys, &u, &v, 10_000).unwrap();
        assert!(r.hit.is_some());
        // oracle: first n with both base and fibre centres within reach
        let brute = (1..10_000i64)
            .find(|&n| {
                let close = |a: f64, b: f64| crate::circle::dist(a, b) <= 0.1;
                close(0.1 + n as f64 * GOLDEN, 0.6) && close(0.2 + n as f64 * (2f64.sqrt() - 1.0), 0.7)
            })
            .unwrap();
        assert!(r.hit.unwrap().abs() <= brute);
    }

    #[test]
    fn self_probe_hits_at_first_return() {
        let sys = Translation::with_increment(GOLDEN, 0.0);
        let u = TorusBox::from_sides(0.0, 0.1, 0.5, 0.1).unwrap();
        let r = transitivity_probe(&sys, &u, &u, 100).unwrap();
        // with fibres fixed, the first hit is the first base return |nω| ≤ |I|
        let first = (1..100i64)
            .find(|&n| crate::circle::dist(n as f64 * GOLDEN, 0.0) <= 0.1)
            .unwrap();
        assert_eq!(r.hit.map(i64::abs), Some(first));
    }

    #[test]
    fn separated_regions_never_meet() {
        let sys = Contraction::new(GOLDEN, 0.5, 0.0, 0.05).unwrap();
        let u = TorusBox::from_sides(0.0, 0.1, 0.25, 0.05).unwrap();
        let v = TorusBox::from_sides(0.3, 0.1, 0.75, 0.05).unwrap();
        let r = transitivity_probe(&sys, &u, &v, 100_000).unwrap();
        assert_eq!(r.hit, None);
    }
}
