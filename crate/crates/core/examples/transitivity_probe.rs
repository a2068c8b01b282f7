// Searching for iterates of one box that meet another.

use qpcircle::denjoy::{transitivity_probe, TorusBox};
use qpcircle::numerics::GOLDEN;
use qpcircle::systems::{Contraction, Translation};

pub fn run_example() -> qpcircle::Result<()> {
    let u = TorusBox::from_sides(0.1, 0.1, 0.25, 0.05)?;
    let v = TorusBox::from_sides(0.6, 0.1, 0.75, 0.05)?;

    let rigid = Translation::with_increment(GOLDEN, 2f64.sqrt() - 1.0);
    println!("rigid translation: {:?}", transitivity_probe(&rigid, &u, &v, 10_000)?.hit);

    // the boxes sit on either side of the repelling graph, between two invariant graphs
    let contraction = Contraction::new(GOLDEN, 0.5, 0.0, 0.05)?;
    match transitivity_probe(&contraction, &u, &v, 10_000)?.hit {
        Some(n) => println!("contraction: hit at {n}"),
        None => println!("contraction: no hit within horizon"),
    }
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
