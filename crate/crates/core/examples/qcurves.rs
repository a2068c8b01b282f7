// Winding numbers of closed curves on the torus.

use qpcircle::graphs::{curves_disjoint, fig1_graph, graph_curves, winding_number, QCurve};

pub fn run_example() -> qpcircle::Result<()> {
    // wraps 3 times horizontally and twice vertically
    let c = QCurve::from_fn(3, 256, 2, |t| 0.1 + 2.0 * t / 3.0 + 0.05 * (2.0 * std::f64::consts::PI * t).sin())?;
    let shifted = QCurve::from_fn(3, 256, 2, |t| 0.3 + 2.0 * t / 3.0)?;
    println!("winding {:?}, disjoint from its neighbour: {}", winding_number(&c)?, curves_disjoint(&c, &shifted, 512));

    // a self-intersecting candidate is rejected
    let bad = QCurve::from_fn(2, 256, 2, |t| t);
    println!("k = 2 with q = 2 accepted: {}", bad.is_ok());

    for curve in graph_curves(&fig1_graph(256)?, 10.0)? {
        println!("curve in the four-branch graph: {:?}", winding_number(&curve)?);
    }
    Ok(())
}

fn main() -> qpcircle::Result<()> {
    run_example()
}
