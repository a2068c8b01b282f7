use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{arcs_meet, comparable, disjoint_iterates, return_times, step_back, Strip, TorusBox, SLACK};
use crate::circle::{wrap_f64, BaseRotation, CircleInterval, LiftedPoint};
use crate::error::{Error, Result};
use crate::numerics::{midpoints, CompensatedSum};
use crate::systems::{iterate_lift, QpfSystem};

/// Fibres on which an ordering is required to be constant.
const ORDER_FIBRES: usize = 8;
/// Fibres of `I_α` used for closest returns.
const RETURN_FIBRES: usize = 9;
const QUADRATURE: usize = 256;
const MASS_NODES: usize = 64;
const REGION_SAMPLES: usize = 32;

/// A computed cyclic order of image boxes over `J`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderRecord {
    pub times: Vec<i64>,
    pub interval: CircleInterval,
    /// The times in increasing cyclic order, starting from `times[0]`.
    pub order: Vec<i64>,
}

/// Return times, their ordering over `I_α` and the closest returns of a
/// wandering box.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCombinatorics {
    #[serde(rename = "box")]
    pub rect: TorusBox,
    pub alpha: f64,
    pub horizon: i64,
    pub return_times: Vec<i64>,
    pub orderings: Vec<OrderRecord>,
    pub closest_returns: Vec<i64>,
}

/// Cyclic order of the image boxes `T^n W` on the fibre over `theta`, with
/// a disjointness check on neighbouring arcs.
fn order_on_fibre<S: QpfSystem + ?Sized>(sys: &S, b: &TorusBox, times: &[i64], theta: f64) -> Result<Vec<i64>> {
    let arcs: Vec<(f64, f64)> = times.iter().map(|&n| b.image_arc(sys, n, theta)).collect();
    let first = arcs[0].0;
    let mut idx: Vec<usize> = (0..times.len()).collect();
    idx.sort_by(|&a, &c| {
        wrap_f64(arcs[a].0 - first)
            .partial_cmp(&wrap_f64(arcs[c].0 - first))
            .expect("finite arcs")
    });
    if idx.len() > 1 {
        for w in 0..idx.len() {
            let (a, c) = (idx[w], idx[(w + 1) % idx.len()]);
            if arcs_meet(arcs[a], arcs[c]) {
                return Err(Error::Overlap(format!(
                    "images {} and {} meet over theta = {theta}",
                    times[a], times[c]
                )));
            }
        }
    }
    Ok(idx.into_iter().map(|i| times[i]).collect())
}

fn order_over<S: QpfSystem + ?Sized>(
    sys: &S,
    b: &TorusBox,
    times: &[i64],
    j: &CircleInterval,
    fibres: usize,
) -> Result<Vec<i64>> {
    if times.is_empty() {
        return Err(Error::Parameter("no times to order".into()));
    }
    let mut seen = times.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != times.len() {
        return Err(Error::Parameter("times must be distinct".into()));
    }
    if !comparable(&b.base, sys.omega(), times, j) {
        return Err(Error::Incomparable { times: times.to_vec() });
    }
    let thetas = j.samples(fibres);
    let orders = thetas
        .par_iter()
        .map(|&th| order_on_fibre(sys, b, times, th))
        .collect::<Result<Vec<_>>>()?;
    for (th, o) in thetas.iter().zip(&orders).skip(1) {
        if *o != orders[0] {
            return Err(Error::OrderFlip { fibre: *th });
        }
    }
    Ok(orders.into_iter().next().expect("at least one fibre"))
}

/// The order `n₁ ⊴ … ⊴ n_k` over `J`, as the times listed in increasing
/// cyclic order from `times[0]`. Every time must be comparable over `J`; the
/// order is checked to agree on 8 fibres of `J`.
pub fn ordering<S: QpfSystem + ?Sized>(sys: &S, b: &TorusBox, times: &[i64], j: &CircleInterval) -> Result<Vec<i64>> {
    order_over(sys, b, times, j, ORDER_FIBRES)
}

/// Whether `seq` appears in increasing cyclic order within `order`.
pub fn is_ordered(order: &[i64], seq: &[i64]) -> bool {
    let pos: Option<Vec<usize>> = seq.iter().map(|s| order.iter().position(|o| o == s)).collect();
    let Some(pos) = pos else { return false };
    let Some(&start) = pos.first() else { return true };
    let len = order.len();
    pos.iter()
        .map(|&p| (p + len - start) % len)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[0] < w[1])
}

impl BoxCombinatorics {
    pub fn compute<S: QpfSystem + ?Sized>(sys: &S, b: &TorusBox, alpha: f64, horizon: i64) -> Result<Self> {
        let times = return_times(&b.base, alpha, sys.omega(), horizon)?;
        let reach = disjoint_iterates(sys, &Strip::rectangle(b), horizon as usize + 1) as i64;
        if reach <= horizon {
            return Err(Error::NotWandering { n: reach });
        }
        let ia = b.base.middle(alpha)?;
        let order = order_over(sys, b, &times, &ia, RETURN_FIBRES)?;
        let pos: HashMap<i64, usize> = order.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let len = order.len();
        let cyc = |a: i64, c: i64, d: i64| {
            let (pa, pc, pd) = (pos[&a], pos[&c], pos[&d]);
            (pc + len - pa) % len < (pd + len - pa) % len
        };
        let mut closest = Vec::new();
        for &n in times.iter().filter(|&&n| n > 0) {
            let n = if cyc(-n, 0, n) { n } else { -n };
            let blocked = times
                .iter()
                .any(|&k| k != 0 && k.abs() < n.abs() && cyc(0, k, n));
            if !blocked {
                closest.extend([n, -n]);
            }
        }
        closest.sort_unstable();
        Ok(Self {
            rect: *b,
            alpha,
            horizon,
            orderings: vec![OrderRecord {
                times: times.clone(),
                interval: ia,
                order,
            }],
            return_times: times,
            closest_returns: closest,
        })
    }
}

/// Closest return times of a wandering box within `horizon`: those
/// `n ∈ N(α)` with no `k ∈ N(α) \ {0}`, `|k| < |n|`, strictly between `0`
/// and `n` in the order over `I_α`. Fails with the violating time if the box
/// is seen to return to itself within the horizon.
pub fn closest_returns<S: QpfSystem + ?Sized>(sys: &S, b: &TorusBox, alpha: f64, horizon: i64) -> Result<Vec<i64>> {
    Ok(BoxCombinatorics::compute(sys, b, alpha, horizon)?.closest_returns)
}

/// Image area at a closest return against the lower bound
/// `|K|·|I_β|·exp(-V/(2|I_β|))`, `β = min(α, (1-α)/2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnBound {
    pub n: i64,
    pub beta: f64,
    /// `λ(T^n W) + λ(T^{-n} W)`.
    pub measure: f64,
    pub bound: f64,
    pub margin: f64,
}

/// The area of `T^n W ∪ T^{-n} W` by midpoint quadrature of the image fibre
/// lengths, with the bound it should exceed. `n` is taken to be a verified
/// closest return and `variation` to be `V(T)`.
pub fn closest_return_bound<S: QpfSystem + ?Sized>(
    sys: &S,
    b: &TorusBox,
    alpha: f64,
    n: i64,
    variation: f64,
) -> Result<ReturnBound> {
    if n == 0 {
        return Err(Error::Parameter("closest returns are nonzero".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) || !(variation >= 0.0) {
        return Err(Error::Parameter(format!("need 0 < alpha < 1 and V >= 0 (alpha={alpha}, V={variation})")));
    }
    let i_len = b.base.length();
    let k = b.fibre;
    let lengths: Vec<f64> = midpoints(b.base.lo(), b.base.hi(), QUADRATURE)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&th| {
            let len = |m: i64| iterate_lift(sys, th, k.hi(), m) - iterate_lift(sys, th, k.lo(), m);
            len(n) + len(-n)
        })
        .collect();
    let sum: CompensatedSum = lengths.into_iter().collect();
    let measure = sum.value() * i_len / QUADRATURE as f64;
    let beta = alpha.min((1.0 - alpha) / 2.0);
    let ib = beta * i_len;
    let bound = k.length() * ib * (-variation / (2.0 * ib)).exp();
    Ok(ReturnBound {
        n,
        beta,
        measure,
        bound,
        margin: measure - bound,
    })
}

/// `Σ_{|n| ≤ horizon} λ(T^n W)`; at most 1 for a wandering box.
pub fn total_image_mass<S: QpfSystem + ?Sized>(sys: &S, b: &TorusBox, horizon: i64) -> f64 {
    let omega = sys.omega();
    let per_node: Vec<f64> = midpoints(b.base.lo(), b.base.hi(), MASS_NODES)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&th| {
            let mut acc = CompensatedSum::new();
            acc.add(b.fibre.length());
            let (mut lo, mut hi) = (LiftedPoint::from_real(b.fibre.lo()), LiftedPoint::from_real(b.fibre.hi()));
            let mut rot = BaseRotation::new(th, omega);
            for _ in 0..horizon {
                lo = lo.step(sys, rot.current());
                hi = hi.step(sys, rot.current());
                rot.advance();
                acc.add(hi.minus(&lo));
            }
            let (mut lo, mut hi) = (LiftedPoint::from_real(b.fibre.lo()), LiftedPoint::from_real(b.fibre.hi()));
            let mut t = wrap_f64(th);
            for _ in 0..horizon {
                t = wrap_f64(t - omega);
                lo = step_back(sys, t, lo);
                hi = step_back(sys, t, hi);
                acc.add(hi.minus(&lo));
            }
            acc.value()
        })
        .collect();
    let sum: CompensatedSum = per_node.into_iter().collect();
    sum.value() * b.base.length() / MASS_NODES as f64
}

/// Checks that `T^k(0, n)_{I_β} ∩ (0, n)_{I_β} = ∅` for `0 < |k| < |n|` on
/// sampled fibres of `I_β`, where `(0, n)_J` is the region strictly between
/// `W` and `T^n W` over `J`. The sign of `n` is chosen so that
/// `-n ⊴ 0 ⊴ n`.
pub fn comparison_region_disjoint<S: QpfSystem + ?Sized>(sys: &S, b: &TorusBox, alpha: f64, n: i64) -> Result<bool> {
    if n == 0 || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter("need n != 0 and 0 < alpha < 1".into()));
    }
    let beta = alpha.min((1.0 - alpha) / 2.0);
    let j = b.base.middle(beta)?;
    let order = ordering(sys, b, &[0, n, -n], &j)?;
    let n = if is_ordered(&order, &[-n, 0, n]) { n } else { -n };
    let gap = |th: f64| {
        let lo = b.fibre.hi();
        let (next, _) = b.image_arc(sys, n, th);
        (lo, lo + wrap_f64(next - lo))
    };
    let omega = sys.omega();
    let steps = n.unsigned_abs() - 1;
    let thetas: Vec<f64> = (0..REGION_SAMPLES)
        .map(|i| j.lo() + j.length() * i as f64 / (REGION_SAMPLES - 1) as f64)
        .collect();
    let clear = thetas.par_iter().all(|&th| {
        let (a, c) = gap(th);
        let (mut lo, mut hi) = (LiftedPoint::from_real(a), LiftedPoint::from_real(c));
        let mut rot = BaseRotation::new(th, omega);
        for _ in 0..steps {
            lo = lo.step(sys, rot.current());
            hi = hi.step(sys, rot.current());
            rot.advance();
            let here = rot.current();
            if j.contains_closed(here, SLACK) && arcs_meet((lo.value(), hi.value()), gap(here)) {
                return false;
            }
        }
        let (mut lo, mut hi) = (LiftedPoint::from_real(a), LiftedPoint::from_real(c));
        let mut t = wrap_f64(th);
        for _ in 0..steps {
            t = wrap_f64(t - omega);
            lo = step_back(sys, t, lo);
            hi = step_back(sys, t, hi);
            if j.contains_closed(t, SLACK) && arcs_meet((lo.value(), hi.value()), gap(t)) {
                return false;
            }
        }
        true
    });
    Ok(clear)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::{Contraction, ForcedArnold, Translation};

    fn rigid(rho: f64) -> Translation {
        Translation::with_increment(GOLDEN, rho)
    }

    #[test]
    fn rigid_order_matches_positions() {
        let rho = 2f64.sqrt() - 1.0;
        let sys = rigid(rho);
        let b = TorusBox::from_sides(0.1, 0.1, 0.3, 0.001).unwrap();
        let ia = b.base.middle(0.5).unwrap();
        for n in [21i64, 34] {
            let o = ordering(&sys, &b, &[0, n, -n], &ia).unwrap();
            // oracle: the cyclic order of wrap(mρ)
            let up = wrap_f64(n as f64 * rho) < wrap_f64(-n as f64 * rho);
            let expect = if up { vec![0, n, -n] } else { vec![0, -n, n] };
            assert_eq!(o, expect);
        }
        assert_eq!(ordering(&sys, &b, &[0], &ia).unwrap(), vec![0]);
        assert!(matches!(
            ordering(&sys, &b, &[0, 13], &ia),
            Err(Error::Incomparable { .. })
        ));
    }

    #[test]
    fn cyclic_membership() {
        let o = [0, 5, -3, 2];
        assert!(is_ordered(&o, &[5, 2, 0]));
        assert!(is_ordered(&o, &[-3, 0, 5]));
        assert!(!is_ordered(&o, &[0, 2, 5]));
        assert!(!is_ordered(&o, &[0, 7]));
    }

    /// Closest returns of the rigid orbit `nρ` among `N(α)`, by brute force.
    fn rigid_closest(rho: f64, times: &[i64]) -> Vec<i64> {
        let at = |m: i64| wrap_f64(m as f64 * rho);
        let between = |a: i64, c: i64, d: i64| wrap_f64(at(c) - at(a)) < wrap_f64(at(d) - at(a));
        let mut out = Vec::new();
        for &n in times.iter().filter(|&&n| n > 0) {
            let n = if between(-n, 0, n) { n } else { -n };
            if !times.iter().any(|&k| k != 0 && k.abs() < n.abs() && between(0, k, n)) {
                out.extend([n, -n]);
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn rigid_closest_returns_match_oracle() {
        let rho = 2f64.sqrt() - 1.0;
        let sys = rigid(rho);
        let b = TorusBox::from_sides(0.0, 0.1, 0.5, 1e-4).unwrap();
        let c = BoxCombinatorics::compute(&sys, &b, 0.5, 1000).unwrap();
        assert_eq!(c.closest_returns, rigid_closest(rho, &c.return_times));
        assert!(!c.closest_returns.is_empty());
        let neg: Vec<i64> = c.closest_returns.iter().rev().map(|n| -n).collect();
        assert_eq!(c.closest_returns, neg);
    }

    #[test]
    fn attracted_box_is_not_wandering() {
        let sys = Contraction::new(GOLDEN, 0.6, 0.2, 0.05).unwrap();
        let b = TorusBox::from_sides(0.0, 0.1, 0.2, 0.2).unwrap();
        assert!(matches!(
            closest_returns(&sys, &b, 0.5, 1000),
            Err(Error::NotWandering { n }) if n >= 1
        ));
    }

    #[test]
    fn rigid_bound_and_mass() {
        let rho = 2f64.sqrt() - 1.0;
        let sys = rigid(rho);
        let b = TorusBox::from_sides(0.0, 0.1, 0.5, 1e-4).unwrap();
        for n in closest_returns(&sys, &b, 0.5, 1000).unwrap() {
            let r = closest_return_bound(&sys, &b, 0.5, n, 0.0).unwrap();
            assert!((r.measure - 2.0 * b.area()).abs() < 1e-12, "{r:?}");
            assert!(r.margin >= 0.0);
            assert!(comparison_region_disjoint(&sys, &b, 0.5, n).unwrap());
        }
        let mass = total_image_mass(&sys, &b, 1000);
        assert!((mass - 2001.0 * b.area()).abs() < 1e-9 && mass <= 1.0);
    }

    #[test]
    fn arnold_area_quadrature() {
        let sys = ForcedArnold::new(GOLDEN, 0.1, 0.3, 0.2).unwrap();
        let b = TorusBox::from_sides(0.2, 0.1, 0.1, 1e-3).unwrap();
        let r = closest_return_bound(&sys, &b, 0.5, 21, 1.0).unwrap();
        // oracle: trapezoid rule on image lengths with a finer grid
        let fine = 2048;
        let mut acc = 0.0;
        for i in 0..=fine {
            let th = b.base.lo() + b.base.length() * i as f64 / fine as f64;
            let w = if i == 0 || i == fine { 0.5 } else { 1.0 };
            for m in [21i64, -21] {
                let lo = crate::systems::iterate_lift(&sys, th, b.fibre.lo(), m);
                let hi = crate::systems::iterate_lift(&sys, th, b.fibre.hi(), m);
                acc += w * (hi - lo);
            }
        }
        let oracle = acc * b.base.length() / fine as f64;
        assert!((r.measure - oracle).abs() < 1e-4 * oracle, "{} {oracle}", r.measure);
    }
}
