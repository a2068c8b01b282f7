// The critical Harper map: diagnostics and a trajectory dump with a plotting
// script.

use qpcircle::harper::{gnuplot_script, harper_diagnostics, harper_trajectory};
use qpcircle::numerics::GOLDEN;

pub fn run_example() -> qpcircle::Result<()> {
    let d = harper_diagnostics(GOLDEN, 20_000)?;
    println!(
        "rho = {:.8}, lyapunov = {:.2e}, symmetry residual = {:.1e}",
        d.rotation.value, d.lyapunov.value, d.symmetry_residual
    );

    let dir = std::env::temp_dir().join("qpcircle-harper-example");
    std::fs::create_dir_all(&dir)?;
    let traj = harper_trajectory(GOLDEN, 10_000, 1000, 0.0, 0.25)?;
    traj.write_csv(std::fs::File::create(dir.join("trajectory.csv"))?)?;
    std::fs::write(dir.join("plot.gp"), gnuplot_script("trajectory.csv", "graph.csv"))?;
    println!("wrote {} points to {}", traj.rows.len(), dir.display());
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
