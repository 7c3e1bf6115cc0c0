//! The limit variance `sigma_f^2` two ways: exact rational arithmetic for
//! polynomials and the double-integral quadrature, which also covers smooth
//! non-polynomial functions.
//!
//! ```text
//! cargo run --release --example sigma_two_routes
//! ```

use gbe_lab::densities::sigma_f_sq_quadrature;
use gbe_lab::exact::{rational_to_f64, sigma_p_sq, Polynomial};
use gbe_lab::harness::{NamedFunction, TestFunction};

fn main() -> gbe_lab::Result<()> {
    println!("{:<24} {:>16} {:>16} {:>10}", "f", "exact", "quadrature", "diff");
    for coeffs in [vec![0, 1], vec![0, 0, 1], vec![0, 0, 0, 1], vec![0, 0, -2, 0, 1], vec![1, -3, 2, 0, 0, 1]] {
        let p = Polynomial::from_ints(&coeffs);
        let exact = rational_to_f64(&sigma_p_sq(&p)?);
        let dp = p.derivative();
        let quad = sigma_f_sq_quadrature(|x| p.eval(x), |x| dp.eval(x))?;
        println!("{:<24} {exact:>16.10} {quad:>16.10} {:>10.2e}", p.to_string(), (exact - quad).abs());
    }
    for g in [NamedFunction::Exp, NamedFunction::Sin, NamedFunction::AbsShifted] {
        let q = TestFunction::Named(g).sigma_sq_quadrature()?;
        println!("{:<24} {:>16} {q:>16.10}", format!("{g:?}"), "-");
    }
    Ok(())
}
