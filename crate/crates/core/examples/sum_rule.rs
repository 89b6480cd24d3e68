//! Finite-rank sum rule: the coefficient ratio a_1…a_n / a_1^∞…a_n^∞
//! settles at u(0; J_∞)/u(0; J) once n passes the perturbation.

use fingap::jacobi::JacobiOperator;
use fingap::szego::{asymptotic_ratio, pn_ratio, JostContext};
use fingap::{Equilibrium, GapSet};
use num_complex::Complex64;

fn main() -> fingap::Result<()> {
    for (ends, op) in [
        (vec![-2.0, 2.0], JacobiOperator::free().with_a(1, 2.0)?),
        (
            vec![-2.0, -1.0, 1.0, 2.0],
            JacobiOperator::periodic(&[1.5, 0.5], &[0.0, 0.0])?.with_a(1, 1.0)?,
        ),
    ] {
        let set = GapSet::new(&ends)?;
        let eq = Equilibrium::new(&set, 64)?;
        let limit = op.background();
        let r = asymptotic_ratio(&op, &limit, &set, &eq, 8)?;
        println!("set {ends:?}");
        println!("  ratios    {:?}", r.ratio_sequence);
        println!(
            "  predicted {:.12}  (u0 {:.12}, limit u0 {:.12})",
            r.predicted, r.u0, r.u0_limit
        );
        // u(0) again, now from the boundary representation on the disk
        let jd = JostContext::fitted(&set, &eq)?.jost_data(&op)?;
        println!(
            "  u(0) by boundary integral {:.12}",
            jd.value(Complex64::new(0.0, 0.0)).re
        );
        let p = pn_ratio(&op, &limit, Complex64::new(3.0, 0.5), 40)?;
        println!("  p_n(x; J)/p_n(x; J_∞) -> {:.10}", p.ratios[40]);
    }
    Ok(())
}
