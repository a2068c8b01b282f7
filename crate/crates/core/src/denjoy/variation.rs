use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;
use crate::systems::{QpfSystem, Smoothness};

/// Refinement stops once successive values differ by less than this
/// relative amount.
const REL_TOL: f64 = 1e-3;
/// The x grid is refined up to this multiple of the starting grid.
const GRID_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationEstimate {
    /// `V(T)`.
    pub value: f64,
    pub theta_grid: usize,
    pub x_grid: usize,
    /// `(x_grid, value)` for each refinement step.
    pub refinement_trace: Vec<(usize, f64)>,
}

fn variation_at<S: QpfSystem + ?Sized>(sys: &S, theta_grid: usize, x_grid: usize) -> Result<f64> {
    let per_theta: Vec<f64> = (0..theta_grid)
        .into_par_iter()
        .map(|j| {
            let th = j as f64 / theta_grid as f64;
            let logd = |i: usize| -> Result<f64> {
                let d = sys
                    .derivative(th, (i % x_grid) as f64 / x_grid as f64)
                    .ok_or_else(|| Error::Unsupported(format!("{} has no derivative", sys.name())))?;
                Ok(d.ln())
            };
            let mut tv = CompensatedSum::new();
            let mut prev = logd(0)?;
            for i in 1..=x_grid {
                let cur = logd(i)?;
                tv.add((cur - prev).abs());
                prev = cur;
            }
            Ok(tv.value())
        })
        .collect::<Result<_>>()?;
    let total: CompensatedSum = per_theta.into_iter().collect();
    Ok(total.value() / theta_grid as f64)
}

/// `V(T) = ∫ V_θ dθ`, `V_θ` the total variation of `log DT_θ` sampled on a
/// closed x grid, averaged over a uniform θ grid. The x grid doubles from
/// `x_grid` until the relative change drops below 1e-3 or the grid reaches
/// 16 times its starting size. Nested grids make the trace nondecreasing.
pub fn variation<S: QpfSystem + ?Sized>(sys: &S, theta_grid: usize, x_grid: usize) -> Result<VariationEstimate> {
    if sys.smoothness() != Smoothness::Diffeomorphism {
        return Err(Error::Unsupported(format!(
            "variation needs a diffeomorphism; {} is a homeomorphism",
            sys.name()
        )));
    }
    if theta_grid == 0 || x_grid < 2 {
        return Err(Error::Parameter("need theta_grid >= 1 and x_grid >= 2".into()));
    }
    let mut g = x_grid;
    let mut value = variation_at(sys, theta_grid, g)?;
    let mut trace = vec![(g, value)];
    while g < GRID_CAP * x_grid {
        g *= 2;
        let next = variation_at(sys, theta_grid, g)?;
        trace.push((g, next));
        let converged = (next - value).abs() <= REL_TOL * next.abs();
        value = next;
        if converged {
            break;
        }
    }
    Ok(VariationEstimate {
        value,
        theta_grid,
        x_grid: g,
        refinement_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GOLDEN;
    use crate::systems::{ForcedArnold, Harper, SkewTranslation};

    #[test]
    fn skew_translation_has_zero_variation() {
        let sys = SkewTranslation::sinusoidal(GOLDEN, 0.3, 0.1).unwrap();
        let v = variation(&sys, 16, 64).unwrap();
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn arnold_variation_is_twice_log_three() {
        let sys = ForcedArnold::new(GOLDEN, 0.2, 0.5, 0.3).unwrap();
        let v = variation(&sys, 8, 256).unwrap();
        // oracle: brute-force variation on a fine grid
        let fine: f64 = (0..100_000)
            .map(|i| {
                let f = |x: f64| (1.0 + 0.5 * (2.0 * std::f64::consts::PI * x).cos()).ln();
                (f((i + 1) as f64 / 1e5) - f(i as f64 / 1e5)).abs()
            })
            .sum();
        assert!((fine - 2.0 * 3f64.ln()).abs() < 1e-9);
        assert!((v.value - 2.0 * 3f64.ln()).abs() < 1e-9, "{v:?}");
    }

    #[test]
    fn refinement_is_monotone() {
        let sys = Harper::critical(GOLDEN);
        let v = variation(&sys, 32, 64).unwrap();
        for w in v.refinement_trace.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12, "{:?}", v.refinement_trace);
        }
    }

    #[test]
    fn harper_variation_is_stable_under_doubling() {
        let sys = Harper::critical(GOLDEN);
        let a = variation_at(&sys, 64, 2048).unwrap();
        let b = variation_at(&sys, 64, 4096).unwrap();
        assert!(a.is_finite() && a > 0.0);
        assert!((b - a).abs() < 0.01 * b, "{a} {b}");
    }
}
