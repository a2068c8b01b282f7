//! Experiments on the critical Harper map `x ↦ -1/(x + 2 cos 2πθ)`:
//! trajectories in the arctan chart, the half-turn symmetry
//! `T_{θ+1/2}(x) = -T_θ(-x)`, diagnostics and reconstruction of an invariant
//! graph from late-time ensemble points.
//!
//! Trajectories use a 64-bit fixed-point base angle and iterate the
//! projective action directly, so that the symmetry holds bit for bit along
//! mirrored orbits.

use std::f64::consts::TAU;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circle::{dist, signed_diff, wrap_f64};
use crate::error::{Error, Result};
use crate::numerics::circular_median;
use crate::rotation::{lyapunov_exponent, rotation_number_integrated, LyapunovEstimate, RotationEstimate};
use crate::systems::{from_chart, to_chart, Harper, QpfSystem};

const TWO_64: f64 = 18_446_744_073_709_551_616.0;
const HALF_TURN: u64 = 1 << 63;
/// Bins whose median dispersion exceeds this are flagged.
const DISPERSION_FLAG: f64 = 0.1;

/// A base angle `k / 2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct FixedAngle(u64);

impl FixedAngle {
    fn from_turns(theta: f64) -> Self {
        let t = wrap_f64(theta) * TWO_64;
        // t < 2^64 except when rounding reaches it
        Self(if t >= TWO_64 { 0 } else { t as u64 })
    }

    fn turns(self) -> f64 {
        wrap_f64(self.0 as f64 / TWO_64)
    }

    fn add(self, other: Self) -> Self {
        Self(self.0.wrapping_add(other.0))
    }

    /// `2 cos 2πθ`, computed on `θ mod 1/2` so that the half turn negates it
    /// exactly.
    fn critical_shear(self) -> f64 {
        let t = (self.0 & (HALF_TURN - 1)) as f64 / TWO_64;
        let c = 2.0 * (TAU * t).cos();
        if self.0 & HALF_TURN == 0 {
            c
        } else {
            -c
        }
    }
}

/// Projective orbit `(θ_i, x_i)` for `i = 1..=n` after `skip` discarded steps.
fn projective_orbit(omega: FixedAngle, theta: FixedAngle, x: f64, skip: usize, n: usize) -> Vec<(FixedAngle, f64)> {
    let mut th = theta;
    let mut x = x;
    let mut out = Vec::with_capacity(n);
    for i in 0..skip + n {
        x = -1.0 / (x + th.critical_shear());
        th = th.add(omega);
        if i >= skip {
            out.push((th, x));
        }
    }
    out
}

/// A trajectory of the critical Harper map in the chart
/// `x' = arctan(x)/π + 1/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryDump {
    pub omega: f64,
    pub theta0: f64,
    /// Chart coordinate of the seed.
    pub x0: f64,
    pub skip: usize,
    /// `(θ, x')` after each step.
    pub rows: Vec<(f64, f64)>,
}

impl TrajectoryDump {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,x")?;
        for (t, x) in &self.rows {
            writeln!(w, "{t},{x}")?;
        }
        Ok(())
    }
}

/// `n` chart points of the orbit of `(θ₀, x₀)` (`x₀` in the chart), after
/// discarding `skip` transient steps.
pub fn harper_trajectory(omega: f64, n: usize, skip: usize, theta0: f64, x0: f64) -> Result<TrajectoryDump> {
    if n == 0 {
        return Err(Error::Parameter("trajectory length must be at least 1".into()));
    }
    let orbit = projective_orbit(
        FixedAngle::from_turns(omega),
        FixedAngle::from_turns(theta0),
        from_chart(x0),
        skip,
        n,
    );
    Ok(TrajectoryDump {
        omega,
        theta0,
        x0,
        skip,
        rows: orbit.into_iter().map(|(t, x)| (t.turns(), to_chart(x))).collect(),
    })
}

/// Largest violation of the half-turn symmetry: on a 16×16 grid of the
/// chart map, and along the orbit of `(θ₀, x₀)` against the orbit of
/// `(θ₀ + 1/2, -x₀)` for `n` steps.
pub fn symmetry_residual(omega: f64, n: usize, theta0: f64, x0: f64) -> f64 {
    let sys = Harper::critical(omega);
    let mut worst: f64 = 0.0;
    for i in 0..16 {
        let th = i as f64 / 16.0;
        for j in 0..16 {
            let u = (j as f64 + 0.5) / 16.0;
            let lhs = sys.fibre_map(wrap_f64(th + 0.5), wrap_f64(-u));
            let rhs = wrap_f64(-sys.fibre_map(th, u));
            worst = worst.max(dist(lhs, rhs));
        }
    }
    let w = FixedAngle::from_turns(omega);
    let start = FixedAngle::from_turns(theta0);
    let x = from_chart(x0);
    let a = projective_orbit(w, start, x, 0, n);
    let b = projective_orbit(w, start.add(FixedAngle(HALF_TURN)), -x, 0, n);
    for ((_, xa), (_, xb)) in a.iter().zip(&b) {
        worst = worst.max(dist(to_chart(*xb), wrap_f64(-to_chart(*xa))));
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarperDiagnostics {
    pub omega: f64,
    pub steps: usize,
    pub rotation: RotationEstimate,
    /// `|ρ - 1/2|`.
    pub rotation_error: f64,
    pub lyapunov: LyapunovEstimate,
    pub symmetry_residual: f64,
}

/// Rotation number (integrated over 64 fibres), Lyapunov exponent (4 seeds
/// on the fibre over 0) and symmetry residual, each over `steps` iterations.
pub fn harper_diagnostics(omega: f64, steps: usize) -> Result<HarperDiagnostics> {
    if steps < 10_000 {
        return Err(Error::Parameter(format!("diagnostics need at least 10^4 steps, got {steps}")));
    }
    let sys = Harper::critical(omega);
    let rotation = rotation_number_integrated(&sys, 64, steps)?;
    let lyapunov = lyapunov_exponent(&sys, 0.0, 0.1, steps, 4)?;
    Ok(HarperDiagnostics {
        omega,
        steps,
        rotation_error: (rotation.value - 0.5).abs(),
        rotation,
        lyapunov,
        symmetry_residual: symmetry_residual(omega, steps, 0.1, 0.3),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconstructionOptions {
    pub bins: usize,
    /// Iterations per ensemble member; the second half is binned.
    pub steps: usize,
    pub ensemble: usize,
    /// Seed for the ensemble's initial conditions.
    pub seed: u64,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            bins: 256,
            steps: 100_000,
            ensemble: 8,
            seed: 0,
        }
    }
}

impl ReconstructionOptions {
    /// Resolution tied to the sample size: the largest power of two not above
    /// `sqrt(steps·ensemble/2)`, at least 16 bins.
    pub fn scaled(steps: usize, ensemble: usize, seed: u64) -> Self {
        let late = (steps / 2 * ensemble).max(1) as f64;
        let bins = 1usize << (late.sqrt().log2().floor().max(4.0) as u32);
        Self {
            bins,
            steps,
            ensemble,
            seed,
        }
    }
}

/// Per-bin circular medians of late-time orbit points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructedGraph {
    /// Bin centres `θ_j`.
    pub grid: Vec<f64>,
    /// `φ(θ_j)`.
    pub values: Vec<f64>,
    /// Median circle distance to `φ(θ_j)` within each bin.
    pub dispersion: Vec<f64>,
    pub counts: Vec<usize>,
    pub options: ReconstructionOptions,
    /// Set when the median dispersion exceeds 0.1.
    pub high_dispersion: bool,
}

impl ReconstructedGraph {
    /// Piecewise linear interpolation on the circle between bin centres.
    pub fn eval(&self, theta: f64) -> f64 {
        let m = self.grid.len();
        let s = wrap_f64(theta) * m as f64 - 0.5;
        let lo = s.floor();
        let t = s - lo;
        let j = (lo as i64).rem_euclid(m as i64) as usize;
        let a = self.values[j];
        let b = self.values[(j + 1) % m];
        wrap_f64(a + t * signed_diff(b, a))
    }

    /// Median over bins of `dist(T(θ_j, φ(θ_j)), φ(θ_j + ω))`.
    pub fn invariance_defect<S: QpfSystem + ?Sized>(&self, sys: &S) -> f64 {
        let mut d: Vec<f64> = self
            .grid
            .iter()
            .zip(&self.values)
            .map(|(&th, &v)| dist(sys.fibre_map(th, v), self.eval(th + sys.omega())))
            .collect();
        d.sort_by(f64::total_cmp);
        d[d.len() / 2]
    }

    /// Largest `dist(φ(θ_j), f(θ_j))` against a known graph `f`.
    pub fn max_error(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(&th, &v)| dist(v, f(th)))
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "theta,x,dispersion")?;
        for ((t, x), d) in self.grid.iter().zip(&self.values).zip(&self.dispersion) {
            writeln!(w, "{t},{x},{d}")?;
        }
        Ok(())
    }
}

/// Iterate an ensemble with random initial conditions, bin the second half
/// of every orbit by `θ`, and take circular medians per bin. Empty bins are
/// an error that suggests a coarser resolution.
pub fn reconstruct_graph<S: QpfSystem + ?Sized>(sys: &S, opts: &ReconstructionOptions) -> Result<ReconstructedGraph> {
    let ReconstructionOptions { bins, steps, ensemble, seed } = *opts;
    if bins < 16 || ensemble == 0 || steps < 2 {
        return Err(Error::Parameter(format!(
            "need bins >= 16, ensemble >= 1 and steps >= 2 (bins={bins}, ensemble={ensemble}, steps={steps})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<(f64, f64)> = (0..ensemble).map(|_| (rng.gen(), rng.gen())).collect();
    let omega = sys.omega();
    let per_member: Vec<Vec<Vec<f64>>> = starts
        .par_iter()
        .map(|&(th0, x0)| {
            let mut cells = vec![Vec::new(); bins];
            let (mut th, mut x) = (th0, x0);
            for i in 0..steps {
                x = sys.fibre_map(th, x);
                th = wrap_f64(th + omega);
                if i >= steps / 2 {
                    let j = ((th * bins as f64) as usize).min(bins - 1);
                    cells[j].push(x);
                }
            }
            cells
        })
        .collect();
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); bins];
    for member in per_member {
        for (c, m) in cells.iter_mut().zip(member) {
            c.extend(m);
        }
    }
    let counts: Vec<usize> = cells.iter().map(Vec::len).collect();
    if counts.contains(&0) {
        let mut suggested = bins;
        while suggested > 1 {
            suggested /= 2;
            let ratio = bins / suggested;
            let merged_empty = counts.chunks(ratio).any(|c| c.iter().sum::<usize>() == 0);
            if !merged_empty {
                break;
            }
        }
        return Err(Error::Resolution { bins, suggested });
    }
    let summary: Vec<(f64, f64)> = cells
        .par_iter()
        .map(|c| {
            let med = circular_median(c).expect("nonempty bin");
            let mut d: Vec<f64> = c.iter().map(|&x| dist(x, med)).collect();
            d.sort_by(f64::total_cmp);
            (med, d[d.len() / 2])
        })
        .collect();
    let (values, dispersion): (Vec<f64>, Vec<f64>) = summary.into_iter().unzip();
    let mut sorted = dispersion.clone();
    sorted.sort_by(f64::total_cmp);
    Ok(ReconstructedGraph {
        grid: (0..bins).map(|j| (j as f64 + 0.5) / bins as f64).collect(),
        values,
        high_dispersion: sorted[bins / 2] > DISPERSION_FLAG,
        dispersion,
        counts,
        options: *opts,
    })
}

/// Graph reconstruction for the critical Harper map.
pub fn reconstruct_invariant_graph(omega: f64, opts: &ReconstructionOptions) -> Result<ReconstructedGraph> {
    reconstruct_graph(&Harper::critical(omega), opts)
}

/// A gnuplot script drawing the trajectory and the reconstructed graph as
/// two PNG panels.
pub fn gnuplot_script(trajectory_csv: &str, graph_csv: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 1600,1000\n\
         set xrange [0:1]\n\
         set yrange [0:1]\n\
         set xlabel 'theta'\n\
         set ylabel 'arctan(x)/pi + 1/2'\n\
         set key off\n\
         set output 'trajectory.png'\n\
         set title 'A trajectory of T'\n\
         plot '{trajectory_csv}' using 1:2 skip 1 with dots lc rgb 'black'\n\
         set output 'graph.png'\n\
         set title 'Reconstructed invariant graph'\n\
         plot '{graph_csv}' using 1:2 skip 1 with points pt 7 ps 0.3 lc rgb 'black'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::Contraction;

    #[test]
    fn single_step_dump() {
        let d = harper_trajectory(GOLDEN, 1, 0, 0.0, 0.5).unwrap();
        assert_eq!(d.rows.len(), 1);
        // x = 0 maps to -1/2
        let expect = to_chart(-0.5);
        assert!((d.rows[0].1 - expect).abs() < 1e-15);
        assert!((d.rows[0].0 - GOLDEN).abs() < 1e-15);
        assert!(harper_trajectory(GOLDEN, 0, 0, 0.0, 0.5).is_err());
    }

    #[test]
    fn dump_agrees_with_catalog_map() {
        let sys = Harper::critical(GOLDEN);
        let d = harper_trajectory(GOLDEN, 50, 0, 0.2, 0.3).unwrap();
        let (mut th, mut x) = (0.2, 0.3);
        for &(t, u) in d.rows.iter().take(10) {
            x = sys.fibre_map(th, x);
            th = wrap_f64(th + GOLDEN);
            assert!(dist(t, th) < 1e-12 && dist(u, x) < 1e-9, "{t} {u} {th} {x}");
        }
    }

    #[test]
    fn theta_marginal_is_uniform() {
        let d = harper_trajectory(GOLDEN, 100_000, 1000, 0.0, 0.25).unwrap();
        let mut th: Vec<f64> = d.rows.iter().map(|r| r.0).collect();
        th.sort_by(f64::total_cmp);
        let n = th.len() as f64;
        // oracle: Kolmogorov-Smirnov distance to the uniform law
        let ks = th
            .iter()
            .enumerate()
            .map(|(i, &t)| (t - i as f64 / n).abs().max((t - (i + 1) as f64 / n).abs()))
            .fold(0.0, f64::max);
        assert!(ks < 0.01, "{ks}");
    }

    #[test]
    fn mirrored_orbits_agree() {
        assert!(symmetry_residual(GOLDEN, 100_000, 0.1, 0.3) < 1e-10);
        assert_eq!(FixedAngle(5).critical_shear(), -FixedAngle(5 + HALF_TURN).critical_shear());
    }

    #[test]
    fn contraction_graph_is_recovered() {
        let sys = Contraction::new(GOLDEN, 0.5, 0.3, 0.05).unwrap();
        let opts = ReconstructionOptions {
            bins: 128,
            steps: 20_000,
            ensemble: 2,
            seed: 1,
        };
        let g = reconstruct_graph(&sys, &opts).unwrap();
        assert!(g.max_error(|t| sys.graph(t)) < 2e-3, "{}", g.max_error(|t| sys.graph(t)));
        assert!(g.invariance_defect(&sys) < 2e-3);
        assert!(!g.high_dispersion);
    }

    #[test]
    fn sparse_sampling_is_reported() {
        let sys = Contraction::new(GOLDEN, 0.5, 0.3, 0.05).unwrap();
        let opts = ReconstructionOptions {
            bins: 1024,
            steps: 200,
            ensemble: 1,
            seed: 0,
        };
        match reconstruct_graph(&sys, &opts) {
            Err(Error::Resolution { bins, suggested }) => {
                assert_eq!(bins, 1024);
                assert!((64..1024).contains(&suggested));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scaled_resolution() {
        assert_eq!(ReconstructionOptions::scaled(10_000, 8, 0).bins, 128);
        assert_eq!(ReconstructionOptions::scaled(1_000_000, 8, 0).bins, 1024);
        assert_eq!(ReconstructionOptions::scaled(10, 1, 0).bins, 16);
    }

    #[test]
    fn script_names_both_files() {
        let s = gnuplot_script("traj.csv", "graph.csv");
        assert!(s.contains("'traj.csv'") && s.contains("'graph.csv'"));
    }
}
