// The four-branch graph `θ/2 + (i + 2j)/4` is invariant under two torus
// translations with different jumping numbers. Also splits a union of two
// such graphs and integrates against the associated measure.

use qpcircle::graphs::{
    check_invariance, decompose_graph, fig1_graph, jumping_number, sample_graph_measure, DecomposeOptions,
};
use qpcircle::numerics::GOLDEN;
use qpcircle::systems::Translation;

pub fn run_example() -> qpcircle::Result<()> {
    let g = fig1_graph(1024)?;
    let opts = DecomposeOptions::default();
    for l in [1, 3] {
        let sys = Translation::new(GOLDEN, 1, 2, l, 2)?;
        let report = check_invariance(&sys, &g, 1e-9);
        let jump = jumping_number(&sys, &g, &opts)?;
        println!("l = {l}: invariant {} (defect {:.1e}), jumping number {jump}", report.passed, report.max_defect);
    }

    let sys = Translation::new(GOLDEN, 1, 2, 1, 2)?;
    let both = g.union(&g.shifted(0.1)?)?;
    for (part, sig) in decompose_graph(&sys, &both, &opts)? {
        println!("part with {} branches: p={} q={} k={} l={}", part.branch_count(), sig.p, sig.q, sig.k, sig.l);
    }

    let mass = sample_graph_measure(&g, |_, x| (2.0 * std::f64::consts::PI * x).cos().powi(2), 4096);
    println!("integral of cos^2(2 pi x) against the graph measure: {mass:.6}");
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
