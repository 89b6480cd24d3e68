//! Periodic operators with a prescribed band set: fit one, walk around its
//! isospectral torus, and watch the coefficient product stay at C^p.

use fingap::jacobi::EigenvalueDetection;
use fingap::torus::{fit_periodic, torus_walk, WalkOptions};
use fingap::{Equilibrium, GapSet};

fn main() -> fingap::Result<()> {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0])?;
    let eq = Equilibrium::new(&set, 64)?;
    let fit = fit_periodic(&set, &eq, 2, None, 0)?;
    println!(
        "fit a = {:?}, b = {:?}, residual {:.1e}",
        fit.point.a(),
        fit.point.b(),
        fit.residual
    );
    let target = eq.capacity().powi(2);
    let walk = torus_walk(&fit.point, 8, WalkOptions::default())?;
    for t in &walk {
        let det = EigenvalueDetection::detect(&t.operator(), &set)?;
        println!(
            "a = {:.6?} b = {:+.6?}  ∏a - C² = {:+.1e}  Dirichlet {:+.6?}  eigenvalues {:.6?}",
            t.a(),
            t.b(),
            t.product_a() - target,
            t.dirichlet(),
            det.by_truncation
        );
    }
    Ok(())
}
