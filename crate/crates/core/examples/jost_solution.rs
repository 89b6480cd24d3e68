//! Jost solutions u_n(z) of a perturbed two-band operator: they solve the
//! recurrence, decay like |B(z)|^n, and give a constant Wronskian with the
//! second solution.

use fingap::jacobi::JacobiOperator;
use fingap::szego::{JostContext, JostSolution};
use fingap::{Equilibrium, GapSet};
use num_complex::Complex64;

fn main() -> fingap::Result<()> {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0])?;
    let eq = Equilibrium::new(&set, 64)?;
    let ctx = JostContext::fitted(&set, &eq)?;
    let op = JacobiOperator::periodic(&[1.5, 0.5], &[0.0, 0.0])?.with_a(1, 1.0)?;
    let z = Complex64::new(0.4, 0.1);
    let s = JostSolution::compute(&ctx, &op, 21, z)?;
    println!("x(z) = {:.10}", s.x);
    for (n, u) in s.values.iter().enumerate().step_by(4) {
        println!("u_{n:<2} = {u:.6e}");
    }
    let worst = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    println!("recurrence residual   {:.1e}", worst(s.residuals(&op)));
    println!("m-function residual   {:.1e}", worst(s.ratio_residuals()));
    let (slope, target) = s.decay_slope(2, 20);
    println!("decay slope {slope:.10} vs log|B(z)| {target:.10}");
    let w = s.wronskians(&op, &s.second_solution(&op));
    println!(
        "Wronskian {:.10} (spread {:.1e})",
        w[0],
        w.iter().map(|v| (v - w[0]).norm()).fold(0.0, f64::max)
    );
    Ok(())
}
