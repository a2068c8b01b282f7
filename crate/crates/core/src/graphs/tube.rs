use rayon::prelude::*;
use serde::Serialize;

use super::{best_cyclic_shift, winding_number, Linking, MultiGraph};
use crate::circle::{dist, signed_diff, wrap_f64};
use crate::error::{Error, Result};
use crate::numerics::gcd;
use crate::rotation::GraphSignature;
use crate::systems::QpfSystem;

const JUMP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySide {
    Lower,
    Upper,
}

/// An open tube sampled on `M` fibres: `pq` open intervals per fibre, kept
/// as `(midpoint, half width)` pairs sorted by midpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tube {
    p: usize,
    q: usize,
    mids: Vec<Vec<f64>>,
    half: Vec<Vec<f64>>,
}

impl Tube {
    /// Intervals `(lo, hi)` per fibre. `hi` may be given lifted (`hi > lo`)
    /// or wrapped; the interval runs upward from `lo` to `hi`.
    pub fn new(p: usize, q: usize, fibres: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::Parameter("p and q must be positive".into()));
        }
        if fibres.len() < 2 {
            return Err(Error::Parameter("need at least 2 fibres".into()));
        }
        let mut mids = Vec::with_capacity(fibres.len());
        let mut half = Vec::with_capacity(fibres.len());
        for (j, f) in fibres.into_iter().enumerate() {
            if f.len() != p * q {
                return Err(Error::Parameter(format!(
                    "fibre {j} has {} intervals, expected p·q = {}",
                    f.len(),
                    p * q
                )));
            }
            let mut iv: Vec<(f64, f64)> = Vec::with_capacity(f.len());
            for (lo, hi) in f {
                if !lo.is_finite() || !hi.is_finite() {
                    return Err(Error::Domain(format!("non-finite interval on fibre {j}")));
                }
                let w = if hi > lo { hi - lo } else { wrap_f64(hi - lo) };
                if w <= 0.0 || w >= 1.0 {
                    return Err(Error::Parameter(format!("empty or full interval ({lo}, {hi}) on fibre {j}")));
                }
                iv.push((wrap_f64(lo + w / 2.0), w / 2.0));
            }
            iv.sort_by(|a, b| a.0.total_cmp(&b.0));
            mids.push(iv.iter().map(|v| v.0).collect());
            half.push(iv.iter().map(|v| v.1).collect());
        }
        Ok(Self { p, q, mids, half })
    }

    /// The tube `{ |x - φ_b(θ)| < w(θ) }` around a `pq`-valued graph.
    pub fn around(g: &MultiGraph, p: usize, q: usize, half_width: impl Fn(f64) -> f64) -> Result<Self> {
        let fibres = (0..g.grid_size())
            .map(|j| {
                let w = half_width(g.theta(j));
                g.fibre(j).iter().map(|&v| (v - w, v + w)).collect()
            })
            .collect();
        Self::new(p, q, fibres)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn grid_size(&self) -> usize {
        self.mids.len()
    }

    /// Lifted `(lo, hi)` intervals of fibre `j`, ascending by midpoint.
    pub fn intervals(&self, j: usize) -> Vec<(f64, f64)> {
        self.mids[j]
            .iter()
            .zip(&self.half[j])
            .map(|(m, h)| (m - h, m + h))
            .collect()
    }

    /// Interval midpoints as a graph.
    pub fn midpoint_graph(&self) -> Result<MultiGraph> {
        MultiGraph::new(self.mids.clone())
    }

    fn check_disjoint(&self) -> Result<()> {
        let n = self.p * self.q;
        for (j, (m, h)) in self.mids.iter().zip(&self.half).enumerate() {
            for i in 0..n {
                let next = if i + 1 == n { m[0] + 1.0 } else { m[i + 1] };
                let next_h = h[(i + 1) % n];
                if m[i] + h[i] > next - next_h {
                    return Err(Error::Invariant(format!(
                        "intervals overlap on fibre θ = {}",
                        j as f64 / self.grid_size() as f64
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Boundary graph: from each interval's midpoint, the first point of the
/// complement of the fibre's union reached going down (`Lower`) or up
/// (`Upper`).
pub fn tube_boundary_graph(t: &Tube, side: BoundarySide) -> Result<MultiGraph> {
    let sign = match side {
        BoundarySide::Lower => -1.0,
        BoundarySide::Upper => 1.0,
    };
    let values = (0..t.grid_size())
        .map(|j| {
            let (m, h) = (&t.mids[j], &t.half[j]);
            m.iter()
                .map(|&start| {
                    let mut cur = start;
                    for _ in 0..=m.len() {
                        // furthest reach of any open interval containing cur
                        let reach = m
                            .iter()
                            .zip(h)
                            .filter(|(mk, hk)| signed_diff(cur, **mk).abs() < **hk)
                            .map(|(mk, hk)| *hk - sign * signed_diff(cur, *mk))
                            .fold(0.0f64, f64::max);
                        if reach <= 1e-12 || (cur - start).abs() + reach >= 1.0 {
                            break;
                        }
                        cur += sign * reach;
                    }
                    cur
                })
                .collect()
        })
        .collect();
    MultiGraph::new(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TubeReport {
    pub p: usize,
    pub q: usize,
    pub fibres: usize,
    pub invariance_defect: f64,
    pub worst_theta: f64,
    /// The map permutes the components in a single cycle.
    pub cyclic: bool,
    pub invariant: bool,
    pub winding: (usize, i64),
    pub jumping: Option<i64>,
    pub signature: Option<GraphSignature>,
    pub passed: bool,
}

/// Structural checks (interval counts, disjointness, chain connectivity,
/// `p` components of `q` intervals) fail with an error; invariance
/// `T(U^i) = U^{i+1 mod p}` within `tol` is reported.
pub fn verify_tube<S: QpfSystem + ?Sized>(sys: &S, t: &Tube, tol: f64) -> Result<TubeReport> {
    t.check_disjoint()?;
    let mg = t.midpoint_graph()?;
    let link = Linking::build(&mg, JUMP_FACTOR)?;
    let (m, n) = (link.m, link.n);
    for j in 0..m {
        let s = mg.shift(j);
        let jn = (j + 1) % m;
        for b in 0..n {
            let nb = (b + s) % n;
            if signed_diff(t.mids[jn][nb], t.mids[j][b]).abs() >= t.half[j][b] + t.half[jn][nb] {
                return Err(Error::Invariant(format!(
                    "interval chain breaks between fibres {j} and {jn}"
                )));
            }
        }
    }
    if link.count != t.p {
        return Err(Error::Invariant(format!(
            "found {} connected components, expected p = {}",
            link.count, t.p
        )));
    }
    for c in 0..link.count {
        let per = (0..n).filter(|&b| link.comp(0, b) == c).count();
        if per != t.q {
            return Err(Error::Invariant(format!(
                "component {c} has {per} intervals per fibre, expected q = {}",
                t.q
            )));
        }
    }

    let omega = sys.omega();
    let interval_at = |theta: f64| -> (usize, Vec<(f64, f64)>) {
        let x = wrap_f64(theta) * m as f64;
        let j = (x.floor() as usize).min(m - 1);
        let tt = x - j as f64;
        let (_, mids) = mg.interpolate(theta);
        let s = mg.shift(j);
        let jn = (j + 1) % m;
        let iv = (0..n)
            .map(|i| {
                let h = (1.0 - tt) * t.half[j][i] + tt * t.half[jn][(i + s) % n];
                (mids[i], h)
            })
            .collect();
        (j, iv)
    };
    // per fibre: (defect, image component of each fibre-0 node)
    let per_fibre: Vec<(f64, Vec<usize>)> = (0..m)
        .into_par_iter()
        .map(|j| {
            let th = mg.theta(j);
            let mut image: Vec<(f64, f64, usize)> = (0..n)
                .map(|b| {
                    let lo = sys.lift(th, t.mids[j][b] - t.half[j][b]);
                    let hi = sys.lift(th, t.mids[j][b] + t.half[j][b]);
                    (wrap_f64(0.5 * (lo + hi)), 0.5 * (hi - lo), b)
                })
                .collect();
            image.sort_by(|a, b| a.0.total_cmp(&b.0));
            let (jw, targets) = interval_at(th + omega);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| targets[a].0.total_cmp(&targets[b].0));
            let im: Vec<f64> = image.iter().map(|v| v.0).collect();
            let tg: Vec<f64> = order.iter().map(|&i| targets[i].0).collect();
            let (s, _) = best_cyclic_shift(&im, &tg);
            let mut defect = 0.0f64;
            let mut comps = vec![0; n];
            for (r, &(mid, h, b)) in image.iter().enumerate() {
                let ti = order[(r + s) % n];
                let (tm, th_) = targets[ti];
                defect = defect.max(dist(mid - h, tm - th_)).max(dist(mid + h, tm + th_));
                comps[b] = link.comp(jw, ti);
            }
            (defect, comps)
        })
        .collect();
    let (worst, defect) = per_fibre
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (j, v)| if v.0 > acc.1 { (j, v.0) } else { acc });

    let mut image_of = vec![usize::MAX; link.count];
    let mut consistent = true;
    for b in 0..n {
        let c = link.comp(0, b);
        let d = per_fibre[0].1[b];
        if image_of[c] != usize::MAX && image_of[c] != d {
            consistent = false;
        }
        image_of[c] = d;
    }
    let cyclic = consistent && {
        let mut c = 0;
        let mut len = 0;
        loop {
            c = image_of[c];
            len += 1;
            if c == 0 || len > link.count {
                break;
            }
        }
        c == 0 && len == link.count
    };

    let mut windings = Vec::new();
    for c in 0..link.count {
        let b0 = (0..n).find(|&b| link.comp(0, b) == c).expect("component on fibre 0");
        windings.push(winding_number(&link.curve(&mg, b0)?)?);
    }
    if windings.iter().any(|w| *w != windings[0]) {
        return Err(Error::Invariant(format!("interior curves wind differently: {windings:?}")));
    }
    let winding = windings[0];
    let invariant = defect < tol && cyclic;

    let jumping = if invariant {
        let (p, _) = link.anchor_order(0)?;
        let target = sys.lift(0.0, t.mids[0][0]);
        let w = wrap_f64(omega);
        let steps = (w * m as f64).floor() as usize;
        let tt = w * m as f64 - steps as f64;
        let mut hit = None;
        for b in 0..n {
            let (vals, j, nb) = link.follow(&mg, 0, b, steps);
            let h0 = t.half[j][nb];
            let jn = (j + 1) % m;
            let nb1 = (nb + mg.shift(j)) % n;
            let h = (1.0 - tt) * h0 + tt * t.half[jn][nb1];
            let last = vals[steps];
            let mid = last + tt * signed_diff(t.mids[jn][nb1], last);
            if dist(target, mid) < h {
                hit = Some(b);
                break;
            }
        }
        let b = hit.ok_or_else(|| Error::Tracking("anchor image lies in no interval over ω".into()))?;
        let l = (b % p + (b / p) * p) as i64;
        if gcd(l, p as i64) != 1 {
            return Err(Error::Invariant(format!("gcd(l={l}, p={p}) != 1")));
        }
        Some(l)
    } else {
        None
    };
    let signature = match jumping {
        Some(l) => Some(GraphSignature::new(t.p as i64, t.q as i64, winding.1, l, omega)?),
        None => None,
    };
    Ok(TubeReport {
        p: t.p,
        q: t.q,
        fibres: m,
        invariance_defect: defect,
        worst_theta: mg.theta(worst),
        cyclic,
        invariant,
        winding,
        jumping,
        signature,
        passed: invariant,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{check_invariance, fig1_graph};
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::Translation;
    use std::f64::consts::PI;

    fn assert_graphs_close(a: &MultiGraph, b: &MultiGraph, tol: f64) {
        assert_eq!(a.grid_size(), b.grid_size());
        for j in 0..a.grid_size() {
            let (mut fa, mut fb) = (a.fibre(j).to_vec(), b.fibre(j).to_vec());
            fa.sort_by(f64::total_cmp);
            fb.sort_by(f64::total_cmp);
            let (_, d) = best_cyclic_shift(&fa, &fb);
            assert!(d < tol, "fibre {j}: {d}");
        }
    }

    #[test]
    fn fig1_tube_verifies() {
        let g = fig1_graph(2048).unwrap();
        let tube = Tube::around(&g, 2, 2, |_| 0.05).unwrap();
        let sys = Translation::new(GOLDEN, 1, 2, 1, 2).unwrap();
        let r = verify_tube(&sys, &tube, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.winding, (2, 1));
        assert_eq!(r.jumping, Some(1));
        let l3 = Translation::new(GOLDEN, 1, 2, 3, 2).unwrap();
        assert_eq!(verify_tube(&l3, &tube, 1e-9).unwrap().jumping, Some(3));
    }

    #[test]
    fn wrong_map_breaks_invariance() {
        let g = fig1_graph(1024).unwrap();
        let tube = Tube::around(&g, 2, 2, |_| 0.05).unwrap();
        let sys = Translation::with_increment(GOLDEN, 2f64.sqrt() - 1.0);
        let r = verify_tube(&sys, &tube, 1e-9).unwrap();
        assert!(!r.passed);
        assert_eq!(r.jumping, None);
    }

    #[test]
    fn overlapping_intervals_are_an_error() {
        let fibres = vec![vec![(0.1, 0.3), (0.25, 0.5)]; 16];
        let tube = Tube::new(1, 2, fibres).unwrap();
        let sys = Translation::with_increment(GOLDEN, 0.0);
        assert!(matches!(verify_tube(&sys, &tube, 1e-9), Err(Error::Invariant(_))));
    }

    #[test]
    fn constant_width_boundaries() {
        let g = fig1_graph(512).unwrap();
        for eps in [0.05, 1e-3, 1e-4] {
            let tube = Tube::around(&g, 2, 2, |_| eps).unwrap();
            let lo = tube_boundary_graph(&tube, BoundarySide::Lower).unwrap();
            let hi = tube_boundary_graph(&tube, BoundarySide::Upper).unwrap();
            assert_graphs_close(&lo, &g.shifted(-eps).unwrap(), 1e-12);
            assert_graphs_close(&hi, &g.shifted(eps).unwrap(), 1e-12);
        }
    }

    #[test]
    fn varying_width_boundaries() {
        let eps = 0.02;
        let w = |th: f64| eps * (1.0 + 0.5 * (2.0 * PI * th).sin());
        let g = MultiGraph::from_fn(256, 1, |_, _| 0.4).unwrap();
        let tube = Tube::around(&g, 1, 1, |th| w(th) / 2.0).unwrap();
        let hi = tube_boundary_graph(&tube, BoundarySide::Upper).unwrap();
        let lo = tube_boundary_graph(&tube, BoundarySide::Lower).unwrap();
        for j in 0..256 {
            let th = j as f64 / 256.0;
            assert!((hi.fibre(j)[0] - (0.4 + w(th) / 2.0)).abs() < 1e-12);
            assert!((lo.fibre(j)[0] - (0.4 - w(th) / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn regular_boundary_is_invariant() {
        let g = fig1_graph(1024).unwrap();
        let tube = Tube::around(&g, 2, 2, |_| 0.03).unwrap();
        let sys = Translation::new(GOLDEN, 1, 2, 1, 2).unwrap();
        assert!(verify_tube(&sys, &tube, 1e-9).unwrap().passed);
        for side in [BoundarySide::Lower, BoundarySide::Upper] {
            let b = tube_boundary_graph(&tube, side).unwrap();
            assert!(check_invariance(&sys, &b, 1e-9).passed);
        }
    }
}
