// Reconstructing an invariant graph from late-time orbit points: first on
// a contraction whose graph is known, then on the critical Harper map.

use qpcircle::harper::{reconstruct_graph, reconstruct_invariant_graph, ReconstructionOptions};
use qpcircle::numerics::GOLDEN;
use qpcircle::systems::{Contraction, Harper};

pub fn run_example() -> qpcircle::Result<()> {
    let sys = Contraction::new(GOLDEN, 0.5, 0.3, 0.05)?;
    let g = reconstruct_graph(&sys, &ReconstructionOptions { bins: 128, steps: 20_000, ensemble: 2, seed: 0 })?;
    println!("contraction: max error {:.2e}", g.max_error(|t| sys.graph(t)));

    let harper = Harper::critical(GOLDEN);
    for steps in [2_000, 20_000] {
        let opts = ReconstructionOptions::scaled(steps, 4, 0);
        let g = reconstruct_invariant_graph(GOLDEN, &opts)?;
        println!(
            "harper, {steps} steps, {} bins: defect {:.2e}, high dispersion {}",
            opts.bins,
            g.invariance_defect(&harper),
            g.high_dispersion
        );
    }
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
