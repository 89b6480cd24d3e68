//! Boundary integrals over the unit circle pulled back through x(z) equal
//! integrals against the equilibrium measure.

use fingap::covering::{fit_circles, pushforward_check, CoveringMap};
use fingap::{Equilibrium, GapSet};

fn main() -> fingap::Result<()> {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0])?;
    let eq = Equilibrium::new(&set, 64)?;
    let fit = fit_circles(&set, &eq, None)?;
    let map = CoveringMap::new(&set, &eq, &fit.group)?;
    let fs: [(&str, fn(f64) -> f64); 4] = [
        ("1", |_| 1.0),
        ("x", |x| x),
        ("x²", |x| x * x),
        ("x³", |x| x * x * x),
    ];
    for (name, f) in fs {
        let c = pushforward_check(&map, &f, 10)?;
        println!(
            "f = {name:3} boundary {:.12}  equilibrium {:.12}  left out {:.1e}",
            c.boundary, c.equilibrium, c.excluded_mass
        );
    }
    Ok(())
}
