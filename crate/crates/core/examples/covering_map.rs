//! The Fuchsian covering of the complement of a two-band set: fit the
//! orthocircles, then push disk points through x(z) and back.

use fingap::covering::{fit_circles, CoveringMap};
use fingap::{Equilibrium, GapSet};
use num_complex::Complex64;

fn main() -> fingap::Result<()> {
    let set = GapSet::new(&[-2.0, -1.0, 1.0, 2.0])?;
    let eq = Equilibrium::new(&set, 64)?;
    let fit = fit_circles(&set, &eq, None)?;
    println!(
        "circle angles {:?}  (residual {:.2e})",
        fit.group.angles(),
        fit.residual
    );
    let map = CoveringMap::new(&set, &eq, &fit.group)?;
    println!(
        "word length {}, x(z) ~ {:.10}/z at 0",
        map.blaschke().length(),
        map.residue_at_zero()
    );
    for z in [
        Complex64::new(0.3, 0.2),
        Complex64::new(-0.5, 0.1),
        Complex64::new(0.1, -0.6),
    ] {
        let x = map.forward(z)?;
        let back = map.inverse(x)?;
        let b = map.blaschke().value(z).norm();
        let g = (-eq.complex_green(x).re).exp();
        println!(
            "z = {z:.3}  x = {x:.6}  |z - x⁻¹(x(z))| = {:.1e}  ||B| - e^-G| = {:.1e}",
            (back - z).norm(),
            (b - g).abs()
        );
    }
    Ok(())
}
