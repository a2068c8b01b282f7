// Return times, the cyclic order of image boxes and closest returns for a
// thin box under a rigid translation.

use qpcircle::circle::CircleInterval;
use qpcircle::denjoy::{closest_return_bound, return_times, total_image_mass, BoxCombinatorics, TorusBox};
use qpcircle::numerics::GOLDEN;
use qpcircle::systems::Translation;

pub fn run_example() -> qpcircle::Result<()> {
    let base = CircleInterval::with_length(0.0, 0.1)?;
    println!("N(1/2) within 40: {:?}", return_times(&base, 0.5, GOLDEN, 40)?);

    let sys = Translation::with_increment(GOLDEN, 2f64.sqrt() - 1.0);
    let rect = TorusBox::from_sides(0.0, 0.1, 0.5, 1e-4)?;
    let combi = BoxCombinatorics::compute(&sys, &rect, 0.5, 1000)?;
    let order = &combi.orderings[0].order;
    println!("{} return times up to 1000", combi.return_times.len());
    println!("order over I_alpha starts {:?}", &order[..8.min(order.len())]);
    println!("closest returns: {:?}", combi.closest_returns);

    for &n in combi.closest_returns.iter().filter(|&&n| n > 0) {
        let b = closest_return_bound(&sys, &rect, 0.5, n, 0.0)?;
        println!("n = {n}: area {:.3e} >= {:.3e}", b.measure, b.bound);
    }
    println!("mass of images up to 1000: {:.4}", total_image_mass(&sys, &rect, 1000));
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
