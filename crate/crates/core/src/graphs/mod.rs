//! Multi-valued graphs over the base circle, q-curves, winding and jumping
//! numbers, invariance and decomposition, associated measures and tubes.
//!
//! Graphs are sampled on a uniform grid `θ_j = j/M`; off-grid values come
//! from linear interpolation in the lift between adjacent fibres whose
//! branches are matched by the optimal cyclic shift.

mod csv;
mod invariance;
mod measure;
mod qcurve;
mod tube;

use serde::Serialize;

pub use self::csv::{read_graph_csv, read_tube_csv, write_graph_csv, write_tube_csv};
pub use invariance::{
    check_invariance, decompose_graph, jumping_number, predicted_rotation_number, DecomposeOptions,
    InvarianceReport,
};
pub use measure::{measure_invariance_defect, sample_graph_measure};
pub use qcurve::{curves_disjoint, winding_number, QCurve};
pub use tube::{tube_boundary_graph, verify_tube, BoundarySide, Tube, TubeReport};

pub use crate::rotation::GraphSignature;

use crate::circle::{dist, signed_diff, wrap_f64};
use crate::error::{Error, Result};

/// Default number of fibres for sampled graphs.
pub const DEFAULT_GRID: usize = 4096;

/// Minimum circle distance between two values of one fibre.
const MIN_SEPARATION: f64 = 1e-12;

/// Shift `s` minimising `Σ_i dist(a[i], b[(i+s) mod n])` for two sorted
/// point sets, with the largest matched distance at that shift.
pub fn best_cyclic_shift(a: &[f64], b: &[f64]) -> (usize, f64) {
    let n = a.len();
    let mut best = (0, f64::INFINITY, f64::INFINITY);
    for s in 0..n {
        let mut sum = 0.0;
        let mut max = 0.0f64;
        for i in 0..n {
            let d = dist(a[i], b[(i + s) % n]);
            sum += d;
            max = max.max(d);
        }
        if sum < best.1 {
            best = (s, sum, max);
        }
    }
    (best.0, best.2)
}

/// A `n`-valued graph sampled on `M` fibres.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiGraph {
    sorted: Vec<Vec<f64>>,
    /// `shifts[j]` matches sorted index `b` on fibre `j` with `(b + s) mod n`
    /// on fibre `j + 1` (fibre `M` being fibre `0`).
    shifts: Vec<usize>,
    max_step: f64,
}

impl MultiGraph {
    /// Build from per-fibre values on the grid `θ_j = j / values.len()`.
    pub fn new(values: Vec<Vec<f64>>) -> Result<Self> {
        let m = values.len();
        if m < 2 {
            return Err(Error::Parameter(format!("need at least 2 fibres, got {m}")));
        }
        let n = values[0].len();
        if n == 0 {
            return Err(Error::Parameter("graph has no branches".into()));
        }
        let mut sorted = Vec::with_capacity(m);
        for (j, fibre) in values.into_iter().enumerate() {
            if fibre.len() != n {
                return Err(Error::Parameter(format!(
                    "fibre {j} has {} values, expected {n}",
                    fibre.len()
                )));
            }
            if let Some(bad) = fibre.iter().find(|v| !v.is_finite()) {
                return Err(Error::Domain(format!("non-finite value {bad} on fibre {j}")));
            }
            let mut f: Vec<f64> = fibre.into_iter().map(wrap_f64).collect();
            f.sort_by(f64::total_cmp);
            for i in 0..n {
                if n > 1 && dist(f[i], f[(i + 1) % n]) <= MIN_SEPARATION {
                    return Err(Error::Parameter(format!(
                        "values on fibre {j} are not distinct ({})",
                        f[i]
                    )));
                }
            }
            sorted.push(f);
        }
        let mut shifts = Vec::with_capacity(m);
        let mut max_step = 0.0f64;
        for j in 0..m {
            let (s, d) = best_cyclic_shift(&sorted[j], &sorted[(j + 1) % m]);
            shifts.push(s);
            max_step = max_step.max(d);
        }
        Ok(Self {
            sorted,
            shifts,
            max_step,
        })
    }

    /// Sample `branches` values of `f(θ, branch)` on `grid` fibres.
    pub fn from_fn(grid: usize, branches: usize, f: impl Fn(f64, usize) -> f64) -> Result<Self> {
        let values = (0..grid)
            .map(|j| {
                let th = j as f64 / grid as f64;
                (0..branches).map(|b| f(th, b)).collect()
            })
            .collect();
        Self::new(values)
    }

    pub fn grid_size(&self) -> usize {
        self.sorted.len()
    }

    pub fn branch_count(&self) -> usize {
        self.sorted[0].len()
    }

    pub fn theta(&self, j: usize) -> f64 {
        j as f64 / self.grid_size() as f64
    }

    /// Values on fibre `j`, ascending in `[0, 1)`.
    pub fn fibre(&self, j: usize) -> &[f64] {
        &self.sorted[j]
    }

    /// Largest matched distance between adjacent fibres.
    pub fn max_step(&self) -> f64 {
        self.max_step
    }

    pub(crate) fn shift(&self, j: usize) -> usize {
        self.shifts[j]
    }

    /// Interpolated values at `theta`, indexed like the sorted fibre `j`
    /// below `theta`. Returns `(j, values)`.
    pub fn interpolate(&self, theta: f64) -> (usize, Vec<f64>) {
        let m = self.grid_size();
        let x = wrap_f64(theta) * m as f64;
        let j = (x.floor() as usize).min(m - 1);
        let t = x - j as f64;
        let a = &self.sorted[j];
        let b = &self.sorted[(j + 1) % m];
        let s = self.shifts[j];
        let n = a.len();
        let vals = (0..n)
            .map(|i| wrap_f64(a[i] + t * signed_diff(b[(i + s) % n], a[i])))
            .collect();
        (j, vals)
    }

    /// Interpolated values at `theta`, ascending.
    pub fn values_at(&self, theta: f64) -> Vec<f64> {
        let mut v = self.interpolate(theta).1;
        v.sort_by(f64::total_cmp);
        v
    }

    /// Fibrewise union with a graph on the same grid.
    pub fn union(&self, other: &MultiGraph) -> Result<MultiGraph> {
        if other.grid_size() != self.grid_size() {
            return Err(Error::Parameter("graphs live on different grids".into()));
        }
        MultiGraph::new(
            self.sorted
                .iter()
                .zip(&other.sorted)
                .map(|(a, b)| a.iter().chain(b).copied().collect())
                .collect(),
        )
    }

    /// The graph moved vertically by `by`.
    pub fn shifted(&self, by: f64) -> Result<MultiGraph> {
        MultiGraph::new(
            self.sorted
                .iter()
                .map(|f| f.iter().map(|v| v + by).collect())
                .collect(),
        )
    }

    /// Same fibres, each fibre's values restricted to `keep[j]`.
    pub(crate) fn restrict(&self, keep: &[Vec<usize>]) -> Result<MultiGraph> {
        MultiGraph::new(
            keep.iter()
                .enumerate()
                .map(|(j, idx)| idx.iter().map(|&b| self.sorted[j][b]).collect())
                .collect(),
        )
    }
}

/// The 2,2-invariant graph `φ^i_j(θ) = θ/2 + (i - 1 + 2(j - 1))/4` of the
/// translations by `ω/2 + 1/4` and `ω/2 + 3/4`.
pub fn fig1_graph(grid: usize) -> Result<MultiGraph> {
    MultiGraph::from_fn(grid, 4, |th, b| {
        let (i, j) = (b % 2, b / 2);
        th / 2.0 + (i + 2 * j) as f64 / 4.0
    })
}

/// The q-curves making up a graph, one per connected component of the
/// branches linked across fibres, in order of their lowest point on the
/// fibre over 0.
pub fn graph_curves(g: &MultiGraph, jump_factor: f64) -> Result<Vec<QCurve>> {
    let link = Linking::build(g, jump_factor)?;
    let mut seen = vec![false; link.count];
    let mut out = Vec::with_capacity(link.count);
    for b in 0..g.branch_count() {
        let c = link.comp(0, b);
        if !seen[c] {
            seen[c] = true;
            out.push(link.curve(g, b)?);
        }
    }
    Ok(out)
}

/// Union-find over `(fibre, sorted index)` nodes linked along the matched
/// shifts. Each component is the sample set of one q-curve.
#[derive(Debug, Clone)]
pub(crate) struct Linking {
    pub n: usize,
    pub m: usize,
    /// Component id per node `j * n + b`, renumbered `0..count` in order of
    /// first appearance.
    pub component: Vec<usize>,
    pub count: usize,
}

impl Linking {
    /// Links adjacent fibres; fails if a matched step reaches
    /// `jump_factor / M`.
    pub fn build(g: &MultiGraph, jump_factor: f64) -> Result<Self> {
        let (m, n) = (g.grid_size(), g.branch_count());
        let threshold = jump_factor / m as f64;
        if g.max_step() >= threshold {
            return Err(Error::Tracking(format!(
                "adjacent fibres differ by {} >= jump threshold {threshold}; refine the grid",
                g.max_step()
            )));
        }
        let mut parent: Vec<usize> = (0..m * n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for j in 0..m {
            let s = g.shift(j);
            let jn = (j + 1) % m;
            for b in 0..n {
                let (ra, rb) = (find(&mut parent, j * n + b), find(&mut parent, jn * n + (b + s) % n));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        let mut ids = vec![usize::MAX; m * n];
        let mut component = vec![0; m * n];
        let mut count = 0;
        for node in 0..m * n {
            let r = find(&mut parent, node);
            if ids[r] == usize::MAX {
                ids[r] = count;
                count += 1;
            }
            component[node] = ids[r];
        }
        Ok(Self {
            n,
            m,
            component,
            count,
        })
    }

    pub fn comp(&self, j: usize, b: usize) -> usize {
        self.component[j * self.n + b]
    }

    /// Lifted values along the strand starting at node `(j0, b0)` for
    /// `steps` fibre transitions; returns the final node too.
    pub fn follow(&self, g: &MultiGraph, j0: usize, b0: usize, steps: usize) -> (Vec<f64>, usize, usize) {
        let mut vals = Vec::with_capacity(steps + 1);
        let (mut j, mut b) = (j0, b0);
        let mut v = g.fibre(j)[b];
        vals.push(v);
        for _ in 0..steps {
            let nb = (b + g.shift(j)) % self.n;
            let nj = (j + 1) % self.m;
            v += signed_diff(g.fibre(nj)[nb], v);
            vals.push(v);
            j = nj;
            b = nb;
        }
        (vals, j, b)
    }

    /// Lifted value at base angle `θ_{j0} + offset` (`0 ≤ offset < 1`) of the
    /// strand starting at `(j0, b0)`, transported by continuity.
    pub fn strand_at(&self, g: &MultiGraph, j0: usize, b0: usize, offset: f64) -> f64 {
        let x = offset * self.m as f64;
        let steps = x.floor() as usize;
        let t = x - steps as f64;
        let (vals, _, _) = self.follow(g, j0, b0, steps + 1);
        vals[steps] + t * (vals[steps + 1] - vals[steps])
    }

    /// The q-curve traced by the component through node `(0, b0)`, as a
    /// lifted sample array over `[0, q]`.
    pub fn curve(&self, g: &MultiGraph, b0: usize) -> Result<QCurve> {
        let mut samples = Vec::new();
        let (mut j, mut b) = (0, b0);
        let mut offset = g.fibre(0)[b0];
        let mut passes = 0;
        loop {
            let (vals, nj, nb) = self.follow(g, j, b, self.m);
            let base = offset - vals[0];
            if samples.is_empty() {
                samples.extend(vals.iter().map(|v| v + base));
            } else {
                samples.extend(vals[1..].iter().map(|v| v + base));
            }
            offset = *samples.last().expect("non-empty");
            passes += 1;
            j = nj;
            b = nb;
            if b == b0 || passes > self.n {
                break;
            }
        }
        debug_assert_eq!(j, 0);
        if b != b0 {
            return Err(Error::Tracking("strand did not close up".into()));
        }
        let k = (samples[samples.len() - 1] - samples[0]).round() as i64;
        QCurve::new(passes, samples, k)
    }

    /// Labels at the anchor fibre: sorted index `b` belongs to component
    /// `order[b % p]`, with the smallest point in the first component.
    /// Returns `(p, position of each component in that order)`.
    pub fn anchor_order(&self, anchor: usize) -> Result<(usize, Vec<usize>)> {
        let labels: Vec<usize> = (0..self.n).map(|b| self.comp(anchor, b)).collect();
        let p = self.count;
        if p == 0 || !self.n.is_multiple_of(p) {
            return Err(Error::Tracking(format!("{} branches do not split into {p} curves", self.n)));
        }
        let mut position = vec![usize::MAX; self.count];
        for (i, &c) in labels[..p].iter().enumerate() {
            if position[c] != usize::MAX {
                return Err(Error::Tracking("anchor-fibre ordering is not periodic".into()));
            }
            position[c] = i;
        }
        if labels.iter().enumerate().any(|(b, &c)| labels[b % p] != c) {
            return Err(Error::Tracking("anchor-fibre ordering is not periodic".into()));
        }
        Ok((p, position))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GOLDEN;

    #[test]
    fn cyclic_shift_across_wrap() {
        let a = [0.1, 0.4, 0.9];
        let b = [0.02, 0.45, 0.95];
        let (s, d) = best_cyclic_shift(&a, &b);
        assert_eq!(s, 0);
        assert!((d - 0.08).abs() < 1e-12);
        let (s, d) = best_cyclic_shift(&[0.05, 0.5], &[0.45, 0.98]);
        assert_eq!(s, 1);
        assert!((d - 0.07).abs() < 1e-12);
    }

    #[test]
    fn multigraph_validation() {
        assert!(MultiGraph::new(vec![vec![0.1]]).is_err());
        assert!(MultiGraph::new(vec![vec![0.1], vec![0.1, 0.2]]).is_err());
        assert!(MultiGraph::new(vec![vec![0.1, 1.1], vec![0.1, 0.2]]).is_err());
        assert!(MultiGraph::new(vec![vec![f64::NAN], vec![0.2]]).is_err());
        let g = MultiGraph::new(vec![vec![0.7, 0.1], vec![0.2, -0.2]]).unwrap();
        assert_eq!(g.fibre(0), &[0.1, 0.7]);
        assert_eq!(g.fibre(1), &[0.2, 0.8]);
    }

    #[test]
    fn interpolation_is_exact_for_linear_graphs() {
        let g = fig1_graph(64).unwrap();
        for th in [0.0, 0.013, 0.5, 0.999, GOLDEN] {
            let v = g.values_at(th);
            let mut want: Vec<f64> = (0..4).map(|c| wrap_f64(th / 2.0 + c as f64 / 4.0)).collect();
            want.sort_by(f64::total_cmp);
            for (a, b) in v.iter().zip(&want) {
                assert!(dist(*a, *b) < 1e-14, "{th}: {v:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn fig1_links_into_two_half_slope_curves() {
        let g = fig1_graph(256).unwrap();
        let link = Linking::build(&g, 10.0).unwrap();
        assert_eq!(link.count, 2);
        let (p, pos) = link.anchor_order(0).unwrap();
        assert_eq!(p, 2);
        assert_eq!(pos[link.comp(0, 0)], 0);
        let c = link.curve(&g, 0).unwrap();
        assert_eq!(c.q(), 2);
        assert_eq!(winding_number(&c).unwrap(), (2, 1));
        let at = link.strand_at(&g, 0, 1, GOLDEN);
        assert!((at - (0.25 + GOLDEN / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_is_a_tracking_error() {
        let g = MultiGraph::from_fn(8, 1, |th, _| 0.4 * (2.0 * std::f64::consts::PI * 3.0 * th).sin()).unwrap();
        assert!(matches!(Linking::build(&g, 1.0), Err(Error::Tracking(_))));
    }

    #[test]
    fn fig1_splits_into_two_curves() {
        let g = fig1_graph(256).unwrap();
        let curves = graph_curves(&g, 10.0).unwrap();
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert_eq!(winding_number(c).unwrap(), (2, 1));
        }
        assert!(curves_disjoint(&curves[0], &curves[1], 256));
    }
}
