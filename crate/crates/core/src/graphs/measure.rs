use rayon::prelude::*;

use super::MultiGraph;
use crate::numerics::{midpoints, CompensatedSum};
use crate::systems::QpfSystem;

fn integrate(g: &MultiGraph, samples: usize, f: impl Fn(f64, f64) -> f64 + Sync) -> f64 {
    let thetas: Vec<f64> = midpoints(0.0, 1.0, samples.max(1)).collect();
    let per_theta: Vec<f64> = thetas
        .par_iter()
        .map(|&th| {
            let vals = g.values_at(th);
            vals.iter().map(|&x| f(th, x)).sum::<f64>() / vals.len() as f64
        })
        .collect();
    let total: CompensatedSum = per_theta.into_iter().collect();
    total.value() / samples.max(1) as f64
}

/// `∫ f dμ_φ = (1/n) Σ_branches ∫ f(θ, φ_b(θ)) dθ` by the midpoint rule on
/// `samples` base points.
pub fn sample_graph_measure(g: &MultiGraph, f: impl Fn(f64, f64) -> f64 + Sync, samples: usize) -> f64 {
    integrate(g, samples, f)
}

/// `|∫ f∘T dμ_φ - ∫ f dμ_φ|`, zero for an invariant graph up to quadrature
/// and interpolation error.
pub fn measure_invariance_defect<S: QpfSystem + ?Sized>(
    sys: &S,
    g: &MultiGraph,
    f: impl Fn(f64, f64) -> f64 + Sync,
    samples: usize,
) -> f64 {
    let omega = sys.omega();
    let pushed = integrate(g, samples, |th, x| f(th + omega, sys.fibre_map(th, x)));
    (pushed - integrate(g, samples, &f)).abs()
}

#[cfg(test)]
mod tests {
    use super::super::fig1_graph;
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::Translation;
    use std::f64::consts::PI;

    #[test]
    fn point_mass_and_normalisation() {
        let g = MultiGraph::from_fn(64, 1, |_, _| 0.3).unwrap();
        assert!((sample_graph_measure(&g, |_, x| x, 100) - 0.3).abs() < 1e-15);
        let fig1 = fig1_graph(4096).unwrap();
        assert!((sample_graph_measure(&fig1, |_, _| 1.0, 1000) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fig1_measure_matches_explicit_quadrature() {
        let g = fig1_graph(4096).unwrap();
        let f = |th: f64, x: f64| (2.0 * PI * x).cos().powi(2) * (1.0 + 0.5 * (2.0 * PI * th).sin());
        // oracle: the same integral over the closed-form branches
        let oracle: f64 = midpoints(0.0, 1.0, 20_000)
            .map(|th| (0..4).map(|c| f(th, th / 2.0 + c as f64 / 4.0)).sum::<f64>() / 4.0)
            .sum::<f64>()
            / 20_000.0;
        let est = sample_graph_measure(&g, f, 20_000);
        assert!((est - oracle).abs() < 1e-6, "{est} vs {oracle}");
    }

    #[test]
    fn fig1_measure_is_invariant() {
        let g = fig1_graph(4096).unwrap();
        let sys = Translation::new(GOLDEN, 1, 2, 1, 2).unwrap();
        let d = measure_invariance_defect(&sys, &g, |_, x| (2.0 * PI * x).cos(), 100_000);
        assert!(d < 1e-3, "{d}");
        let d = measure_invariance_defect(&sys, &g, |th, x| (2.0 * PI * (x + th)).sin().powi(2), 100_000);
        assert!(d < 1e-3, "{d}");
    }
}
