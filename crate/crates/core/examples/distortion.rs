// Variation of the log-derivative and both sides of the distortion
// inequality over a thin box.

use qpcircle::denjoy::{disjoint_iterates, distortion_integral, variation, Strip, TorusBox};
use qpcircle::numerics::GOLDEN;
use qpcircle::systems::{ForcedArnold, SkewTranslation};

pub fn run_example() -> qpcircle::Result<()> {
    let arnold = ForcedArnold::new(GOLDEN, 0.1, 0.3, 0.2)?;
    let v = variation(&arnold, 32, 256)?;
    println!("V(T) = {:.6} after {} refinements", v.value, v.refinement_trace.len());

    let rect = TorusBox::from_sides(0.1, 0.04, 0.3, 0.002)?;
    let strip = Strip::rectangle(&rect);
    let n = disjoint_iterates(&arnold, &strip, 500);
    for s in [0.0, 0.5, 1.0] {
        let d = distortion_integral(&arnold, &strip, n, s, v.value)?;
        println!("n = {n}, s = {s}: lhs {:.6e} rhs {:.6e} margin {:.2e}", d.lhs, d.rhs, d.margin);
    }

    let skew = SkewTranslation::sinusoidal(GOLDEN, 0.3, 0.1)?;
    let d = distortion_integral(&skew, &strip, disjoint_iterates(&skew, &strip, 500), 0.5, 0.0)?;
    println!("skew translation: lhs - rhs = {:.1e}", d.margin);
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
