//! Spectral data of a Jacobi operator: m-function, eigenvalues outside the
//! set (two independent ways), the spectral measure, and the coefficients
//! recovered from that measure.

use fingap::jacobi::{EigenvalueDetection, HeadOverride, JacobiOperator};
use fingap::szego::operator_measure;
use fingap::GapSet;
use num_complex::Complex64;

fn main() -> fingap::Result<()> {
    let set = GapSet::interval(-2.0, 2.0)?;
    let op = JacobiOperator::free().with_head(&[
        HeadOverride {
            n: 1,
            a: 2.0,
            b: 0.0,
        },
        HeadOverride {
            n: 2,
            a: 1.0,
            b: 0.5,
        },
    ])?;
    let m = op.m_function();
    println!("m(2.5) = {:.10}", m.value(Complex64::new(2.5, 0.0))?);
    println!("m(i)   = {:.10}", m.value(Complex64::new(0.0, 1.0))?);
    let det = EigenvalueDetection::detect(&op, &set)?;
    println!(
        "truncation filter (sizes {:?}): {:?}",
        det.sizes, det.by_truncation
    );
    println!("poles of m with masses:        {:?}", det.by_poles);
    let mu = operator_measure(&op, &set)?;
    println!("total mass {:.12}", mu.total_mass()?);
    let (a, b) = mu.jacobi_parameters(4, 200)?;
    println!("recovered a {a:.8?}");
    println!("recovered b {b:.8?}");
    Ok(())
}
