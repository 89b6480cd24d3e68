//! The product representation of the m-function on the disk: a_1 M(z) as
//! a Blaschke product over zeros and poles times an outer function.

use fingap::jacobi::JacobiOperator;
use fingap::szego::{mh_representation_check, DiskMFunction, JostContext};
use fingap::{Equilibrium, GapSet};
use num_complex::Complex64;

fn main() -> fingap::Result<()> {
    let set = GapSet::interval(-2.0, 2.0)?;
    let eq = Equilibrium::new(&set, 64)?;
    let ctx = JostContext::fitted(&set, &eq)?;
    let op = JacobiOperator::free().with_a(1, 2.0)?;
    let dm = DiskMFunction::new(&ctx, &op)?;
    println!("zeros of m off the set {:?}", dm.zeros());
    println!("poles of m off the set {:?}", dm.poles());
    let jd = ctx.jost_data(&op)?;
    for z in [
        Complex64::new(0.2, 0.1),
        Complex64::new(-0.3, 0.4),
        Complex64::new(0.5, -0.2),
    ] {
        let c = mh_representation_check(&dm, &jd, 1.0 - 1e-6, z)?;
        println!(
            "z = {z:.2}: a1 M = {:.10}  product = {:.10}  |diff| {:.1e}",
            c.lhs, c.rhs, c.residual
        );
    }
    Ok(())
}
