// Rotation numbers and Lyapunov exponents on catalog systems, and recovery
// of the integers behind a rationally dependent rotation number.

use qpcircle::numerics::GOLDEN;
use qpcircle::rotation::{
    default_tolerance, detect_rational_dependence, lyapunov_exponent, predicted_rho, rotation_number_integrated,
    rotation_number_pointwise,
};
use qpcircle::systems::{ForcedArnold, Translation};

pub fn run_example() -> qpcircle::Result<()> {
    // the torus translation carrying the 2,2-invariant graph with k = 1, l = 1
    let fig1 = Translation::new(GOLDEN, 1, 2, 1, 2)?;
    let est = rotation_number_pointwise(&fig1, 0.0, 0.0, 100_000)?;
    println!("translation: rho = {:.12} (predicted {:.12})", est.value, predicted_rho(2, 2, 1, 1, GOLDEN));

    match detect_rational_dependence(est.value, GOLDEN, 6, 6, default_tolerance(&est)) {
        Some(sig) => println!("  signature p={} q={} k={} l={}", sig.p, sig.q, sig.k, sig.l),
        None => println!("  no signature with p, q <= 6"),
    }

    let arnold = ForcedArnold::new(GOLDEN, 0.3, 0.5, 0.2)?;
    let pw = rotation_number_pointwise(&arnold, 0.0, 0.0, 50_000)?;
    let int = rotation_number_integrated(&arnold, 32, 20_000)?;
    println!("arnold: pointwise {:.6} (residual {:.1e}), integrated {:.6}", pw.value, pw.residual, int.value);

    let lyap = lyapunov_exponent(&arnold, 0.0, 0.0, 50_000, 4)?;
    println!("arnold: lyapunov {:.5}, spread {:.1e}", lyap.value, lyap.per_orbit_spread);
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
