//! The Szegő conditions for a perturbed periodic operator, and a weight
//! that fails them.

use fingap::jacobi::{HeadOverride, JacobiOperator};
use fingap::szego::{szego_class_report, szego_report_from_parts};
use fingap::{Equilibrium, GapSet};

fn main() -> fingap::Result<()> {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0])?;
    let eq = Equilibrium::new(&set, 64)?;
    let op = JacobiOperator::periodic(&[1.5, 0.5], &[0.0, 0.0])?.with_head(&[
        HeadOverride {
            n: 1,
            a: 1.0,
            b: 0.3,
        },
        HeadOverride {
            n: 3,
            a: 1.2,
            b: -0.1,
        },
    ])?;
    let r = szego_class_report(&op, &set, &eq)?;
    println!("{r:#?}");

    let w = |x: f64| {
        let d = set.dist_to_complement(x);
        (-1.0 / d).exp()
    };
    let bad = szego_report_from_parts(&set, &eq, &w, &[], None)?;
    println!(
        "exp(-1/dist): integral {:?}, Szegő {}",
        bad.szego_integral, bad.is_szego
    );
    Ok(())
}
