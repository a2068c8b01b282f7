use rayon::prelude::*;
use serde::Serialize;

use super::{best_cyclic_shift, winding_number, Linking, MultiGraph};
use crate::circle::{dist, wrap_f64};
use crate::error::{Error, Result};
use crate::numerics::gcd;
use crate::rotation::{predicted_rho, GraphSignature};
use crate::systems::QpfSystem;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub max_defect: f64,
    pub worst_theta: f64,
    pub fibres: usize,
    pub tol: f64,
    pub passed: bool,
}

/// Compare `T_θ(g(θ))` with `g(θ + ω)` as sets on every grid fibre.
pub fn check_invariance<S: QpfSystem + ?Sized>(sys: &S, g: &MultiGraph, tol: f64) -> InvarianceReport {
    let omega = sys.omega();
    let defects: Vec<f64> = (0..g.grid_size())
        .into_par_iter()
        .map(|j| {
            let th = g.theta(j);
            let mut image: Vec<f64> = g.fibre(j).iter().map(|&x| sys.fibre_map(th, x)).collect();
            image.sort_by(f64::total_cmp);
            best_cyclic_shift(&image, &g.values_at(th + omega)).1
        })
        .collect();
    let (worst, max_defect) = defects
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (j, &d)| if d > acc.1 { (j, d) } else { acc });
    InvarianceReport {
        max_defect,
        worst_theta: g.theta(worst),
        fibres: g.grid_size(),
        tol,
        passed: max_defect < tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecomposeOptions {
    /// Adjacent-fibre matches must move less than `jump_factor / M`.
    pub jump_factor: f64,
    /// Invariance and orbit-matching tolerance.
    pub tol: f64,
    /// Fibre index at which strands are ordered and anchored.
    pub anchor_fibre: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            jump_factor: 10.0,
            tol: 1e-6,
            anchor_fibre: 0,
        }
    }
}

/// `wrap((k/q)ω + l/(pq))`.
pub fn predicted_rotation_number(sig: &GraphSignature, omega: f64) -> f64 {
    predicted_rho(sig.p, sig.q, sig.k, sig.l, omega)
}

/// Index in `targets` nearest to `y`, if within `tol`.
fn nearest(targets: &[f64], y: f64, tol: f64) -> Option<usize> {
    let (i, d) = targets
        .iter()
        .enumerate()
        .map(|(i, &t)| (i, dist(t, y)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    (d < tol).then_some(i)
}

/// Jumping number `l = m + np` of a single periodic part: the lift of the
/// map through `x̂^1_1` lands on the strand `φ̂^{1+m}_{1+n}` over `θ + ω`.
pub fn jumping_number<S: QpfSystem + ?Sized>(sys: &S, part: &MultiGraph, opts: &DecomposeOptions) -> Result<i64> {
    let link = Linking::build(part, opts.jump_factor)?;
    jumping_from_link(sys, part, &link, opts)
}

fn jumping_from_link<S: QpfSystem + ?Sized>(
    sys: &S,
    part: &MultiGraph,
    link: &Linking,
    opts: &DecomposeOptions,
) -> Result<i64> {
    let anchor = opts.anchor_fibre % part.grid_size();
    let (p, _) = link.anchor_order(anchor)?;
    let th = part.theta(anchor);
    let target = sys.lift(th, part.fibre(anchor)[0]);
    let strands: Vec<f64> = (0..link.n)
        .map(|b| link.strand_at(part, anchor, b, wrap_f64(sys.omega())))
        .collect();
    let b = nearest(&strands, target, opts.tol).ok_or_else(|| {
        Error::Tracking(format!("image of the anchor strand matches no strand within {}", opts.tol))
    })?;
    // sorted position b = (j - 1)p + (i - 1)
    let (m, n) = ((b % p) as i64, (b / p) as i64);
    let l = m + n * p as i64;
    if gcd(l, p as i64) != 1 {
        return Err(Error::Invariant(format!("gcd(l={l}, p={p}) != 1")));
    }
    Ok(l)
}

fn part_signature<S: QpfSystem + ?Sized>(
    sys: &S,
    part: &MultiGraph,
    opts: &DecomposeOptions,
) -> Result<GraphSignature> {
    let link = Linking::build(part, opts.jump_factor)?;
    let mut windings = Vec::new();
    for c in 0..link.count {
        let b0 = (0..link.n)
            .find(|&b| link.comp(0, b) == c)
            .ok_or_else(|| Error::Tracking("component missing on fibre 0".into()))?;
        windings.push(winding_number(&link.curve(part, b0)?)?);
    }
    let (q, k) = windings[0];
    if windings.iter().any(|w| *w != (q, k)) {
        return Err(Error::Invariant(format!("curves of one part wind differently: {windings:?}")));
    }
    let l = jumping_from_link(sys, part, &link, opts)?;
    GraphSignature::new(link.count as i64, q as i64, k, l, sys.omega())
}

/// Split an invariant graph into its periodic parts, each with its
/// signature `(p, q, k, l)`.
///
/// Components are chains of samples linked across adjacent fibres; the map
/// permutes them, and each cycle of that permutation is one part with `p`
/// equal to the cycle length. This is a semi-decision: it certifies only
/// that no finer splitting is visible at the working grid.
pub fn decompose_graph<S: QpfSystem + ?Sized>(
    sys: &S,
    g: &MultiGraph,
    opts: &DecomposeOptions,
) -> Result<Vec<(MultiGraph, GraphSignature)>> {
    let report = check_invariance(sys, g, opts.tol);
    if !report.passed {
        return Err(Error::Invariant(format!(
            "graph is not invariant: defect {} at θ = {}",
            report.max_defect, report.worst_theta
        )));
    }
    let link = Linking::build(g, opts.jump_factor)?;
    let (jw, at_omega) = g.interpolate(sys.omega());
    let mut image_of = vec![usize::MAX; link.count];
    for b in 0..link.n {
        let c = link.comp(0, b);
        let y = sys.fibre_map(0.0, g.fibre(0)[b]);
        let i = nearest(&at_omega, y, opts.tol)
            .ok_or_else(|| Error::Tracking(format!("image of branch {b} not found over ω")))?;
        let d = link.comp(jw, i);
        if image_of[c] != usize::MAX && image_of[c] != d {
            return Err(Error::Tracking(format!("component {c} is split by the map")));
        }
        image_of[c] = d;
    }
    let mut hit = vec![false; link.count];
    for &d in &image_of {
        if hit[d] {
            return Err(Error::Tracking("map does not permute the components".into()));
        }
        hit[d] = true;
    }

    let mut seen = vec![false; link.count];
    let mut parts = Vec::new();
    for start in 0..link.count {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut c = start;
        while !seen[c] {
            seen[c] = true;
            cycle.push(c);
            c = image_of[c];
        }
        let keep: Vec<Vec<usize>> = (0..link.m)
            .map(|j| (0..link.n).filter(|&b| cycle.contains(&link.comp(j, b))).collect())
            .collect();
        let part = g.restrict(&keep)?;
        let sig = part_signature(sys, &part, opts)?;
        if sig.p as usize != cycle.len() {
            return Err(Error::Tracking(format!(
                "part with {} components re-links into {} curves",
                cycle.len(),
                sig.p
            )));
        }
        parts.push((part, sig));
    }
    let total: i64 = parts.iter().map(|(_, s)| s.p * s.q).sum();
    if total != g.branch_count() as i64 {
        return Err(Error::Invariant(format!(
            "parts account for {total} of {} branches",
            g.branch_count()
        )));
    }
    let (p0, q0) = (parts[0].1.p, parts[0].1.q);
    if parts.iter().any(|(_, s)| (s.p, s.q) != (p0, q0)) {
        return Err(Error::Invariant("parts have different (p, q)".into()));
    }
    Ok(parts)
}

#[cfg(test)]
mod tests {
    use super::super::fig1_graph;
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::Translation;

    #[test]
    fn fig1_invariance_both_maps() {
        let g = fig1_graph(4096).unwrap();
        for l in [1, 3] {
            let sys = Translation::new(GOLDEN, 1, 2, l, 2).unwrap();
            let r = check_invariance(&sys, &g, 1e-9);
            assert!(r.passed, "{r:?}");
            assert!(r.max_defect < 1e-9);
        }
    }

    #[test]
    fn constant_graph_fails_under_translation() {
        let g = MultiGraph::from_fn(64, 1, |_, _| 0.2).unwrap();
        let sys = Translation::with_increment(GOLDEN, 0.3);
        let r = check_invariance(&sys, &g, 1e-9);
        assert!(!r.passed);
        assert!((r.max_defect - 0.3).abs() < 1e-12);
    }

    #[test]
    fn fig1_jumping_numbers() {
        let g = fig1_graph(4096).unwrap();
        let opts = DecomposeOptions::default();
        let l1 = Translation::new(GOLDEN, 1, 2, 1, 2).unwrap();
        let l3 = Translation::new(GOLDEN, 1, 2, 3, 2).unwrap();
        assert_eq!(jumping_number(&l1, &g, &opts).unwrap(), 1);
        assert_eq!(jumping_number(&l3, &g, &opts).unwrap(), 3);
    }

    #[test]
    fn fig1_decomposes_into_one_part() {
        let g = fig1_graph(1024).unwrap();
        let sys = Translation::new(GOLDEN, 1, 2, 1, 2).unwrap();
        let parts = decompose_graph(&sys, &g, &DecomposeOptions::default()).unwrap();
        assert_eq!(parts.len(), 1);
        let s = parts[0].1;
        assert_eq!((s.p, s.q, s.k, s.l), (2, 2, 1, 1));
        assert!(dist(predicted_rotation_number(&s, GOLDEN), wrap_f64(GOLDEN / 2.0 + 0.25)) < 1e-15);
    }

    #[test]
    fn shifted_union_gives_two_parts() {
        let g = fig1_graph(1024).unwrap();
        let both = g.union(&g.shifted(0.125).unwrap()).unwrap();
        let sys = Translation::new(GOLDEN, 1, 2, 1, 2).unwrap();
        let parts = decompose_graph(&sys, &both, &DecomposeOptions::default()).unwrap();
        assert_eq!(parts.len(), 2);
        for (_, s) in &parts {
            assert_eq!((s.p, s.q, s.k, s.l), (2, 2, 1, 1));
        }
        // round trip: union of parts is the input
        let merged = parts[0].0.union(&parts[1].0).unwrap();
        assert_eq!(merged, both);
    }

    #[test]
    fn constant_graph_under_identity() {
        let g = MultiGraph::from_fn(256, 1, |_, _| 0.37).unwrap();
        let sys = Translation::new(GOLDEN, 0, 1, 0, 1).unwrap();
        let parts = decompose_graph(&sys, &g, &DecomposeOptions::default()).unwrap();
        assert_eq!(parts.len(), 1);
        let s = parts[0].1;
        assert_eq!((s.p, s.q, s.k, s.l), (1, 1, 0, 0));
        assert_eq!(predicted_rotation_number(&s, GOLDEN), 0.0);
    }

    #[test]
    fn predicted_l3() {
        let s = GraphSignature::new(2, 2, 1, 3, GOLDEN).unwrap();
        let want = wrap_f64(GOLDEN / 2.0 + 0.75);
        assert!((predicted_rotation_number(&s, GOLDEN) - want).abs() < 1e-15);
        assert!((want - 0.05901699437494745).abs() < 1e-12);
        let sys = Translation::new(GOLDEN, 1, 2, 3, 2).unwrap();
        let est = crate::rotation::rotation_number_pointwise(&sys, 0.0, 0.0, 100_000).unwrap();
        assert!(dist(est.value, want) < 1e-4);
    }

    #[test]
    fn non_invariant_input_is_refused() {
        let g = fig1_graph(256).unwrap();
        let sys = Translation::with_increment(GOLDEN, 0.1);
        assert!(matches!(
            decompose_graph(&sys, &g, &DecomposeOptions::default()),
            Err(Error::Invariant(_))
        ));
    }
}
