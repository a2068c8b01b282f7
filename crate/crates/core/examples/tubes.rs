// An invariant tube around the four-branch graph and its boundary graphs.

use qpcircle::graphs::{check_invariance, fig1_graph, tube_boundary_graph, verify_tube, BoundarySide, Tube};
use qpcircle::numerics::GOLDEN;
use qpcircle::systems::Translation;

pub fn run_example() -> qpcircle::Result<()> {
    let sys = Translation::new(GOLDEN, 1, 2, 1, 2)?;
    let g = fig1_graph(512)?;
    let tube = Tube::around(&g, 2, 2, |_| 0.05)?;
    let report = verify_tube(&sys, &tube, 1e-9)?;
    println!(
        "tube: passed {} winding {:?} jumping {:?} defect {:.1e}",
        report.passed, report.winding, report.jumping, report.invariance_defect
    );

    let upper = tube_boundary_graph(&tube, BoundarySide::Upper)?;
    println!("upper boundary invariant: {}", check_invariance(&sys, &upper, 1e-9).passed);

    let wrong = Translation::with_increment(GOLDEN, 0.1);
    println!("under an unrelated shift: passed {}", verify_tube(&wrong, &tube, 1e-9)?.passed);
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
