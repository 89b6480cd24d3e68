//! Potential theory of a two-band set: capacity, band masses, the
//! equilibrium density and the Green function in the gap.

use fingap::{Equilibrium, GapSet};

fn main() -> fingap::Result<()> {
    let set = GapSet::new(&[-2.0, -0.5, 0.3, 1.5])?;
    let eq = Equilibrium::new(&set, 64)?;
    println!("capacity      {:.12}", eq.capacity());
    println!("band masses   {:?}", eq.band_masses());
    let c = eq.critical_points()[0];
    println!("gap maximum   G({c:.6}) = {:.12}", eq.green(c));
    for x in [-1.8, -1.0, 0.0, 1.0, 2.5] {
        println!(
            "x = {x:5.2}  density {:.8}  green {:.8}",
            eq.density(x),
            eq.green(x)
        );
    }

    // the interval [-2, 2] has capacity 1 and G(x) = arccosh(|x|/2)
    let free = Equilibrium::new(&GapSet::interval(-2.0, 2.0)?, 64)?;
    println!(
        "[-2, 2]: C = {:.12}, G(2.5) = {:.12} (log 2 = {:.12})",
        free.capacity(),
        free.green(2.5),
        2f64.ln()
    );
    Ok(())
}
