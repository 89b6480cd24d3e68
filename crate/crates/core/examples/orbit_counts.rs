//! Word enumeration in the Schottky group, the shrinking covers of the
//! limit set, and Burnside sums.

use fingap::covering::{fit_circles, linear_fit, DEFAULT_WORD_CAP};
use fingap::{Equilibrium, GapSet};
use num_complex::Complex64;

fn main() -> fingap::Result<()> {
    let set = GapSet::new(&[-3.0, -2.0, -0.5, 0.5, 2.0, 3.0])?;
    let eq = Equilibrium::new(&set, 64)?;
    let group = fit_circles(&set, &eq, None)?.group;
    let levels = group.words_by_length(4, DEFAULT_WORD_CAP)?;
    for (k, words) in levels.iter().enumerate().skip(1) {
        println!("length {k}: {} words", words.len());
    }
    let pts: Vec<(f64, f64)> = (1..=6)
        .map(|m| Ok((m as f64, group.rm_measure(m)?.ln())))
        .collect::<fingap::Result<_>>()?;
    for (m, l) in &pts {
        println!("|R_{m}| = {:.3e}", l.exp());
    }
    if let Some((slope, _, r2)) = linear_fit(&pts) {
        println!("log |R_m| slope {slope:.4}, r² {r2:.6}");
    }
    let sums = group.burnside_sum(Complex64::new(0.0, 0.0), 1.0, 6)?;
    println!("Σ|γ'(0)| by length {:?}", sums.derivative);
    Ok(())
}
