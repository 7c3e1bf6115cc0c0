//! Exact moment and variance polynomials in `u = 1/(n beta)` and `b = beta`, and
//! the limit variances they imply.
//!
//! ```text
//! cargo run --release --example exact_moments -- [poly] [alpha]
//! ```
//! `poly` is a comma-separated coefficient list, lowest degree first (default `0,0,1`).

use gbe_lab::exact::{
    parse_rational, poincare_check, rational_to_f64, required_n, sigma_p_alpha_sq, sigma_p_sq,
    spectral_moment_expected, variance_linear_stat, variance_at, Polynomial,
};

fn main() -> gbe_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let p = Polynomial::parse(args.first().map_or("0,0,1", String::as_str))?;
    let alpha = parse_rational(args.get(1).map_or("1", String::as_str))?;

    for r in 0..=6 {
        println!("E<mu_n, x^{r}> = {}", spectral_moment_expected(r)?);
    }
    println!();
    println!("p(x) = {p}");
    println!("Var<L_n, p> = {}", variance_linear_stat(&p)?);
    println!("valid for n >= {}", required_n(2 * p.degree()));
    let s = sigma_p_sq(&p)?;
    println!("sigma_p^2 = {s}");
    let sa = sigma_p_alpha_sq(&p, &alpha)?;
    println!("sigma_p,alpha^2 at alpha = {alpha}: {sa} ({:.10})", rational_to_f64(&sa));

    println!("\n n^2 beta Var at beta = 1:");
    for n in [10usize, 100, 1000] {
        let v = variance_at(&p, n.max(required_n(2 * p.degree())), 1.0)?;
        println!("  n = {n:>5}: {:.10}", v * (n * n) as f64);
    }

    let grid: Vec<(usize, f64)> = [10usize, 50]
        .iter()
        .flat_map(|&n| [0.1, 1.0, 4.0].map(|b| (n, b)))
        .collect();
    let rep = poincare_check(&p, &grid)?;
    for pt in &rep.points {
        println!(
            "Poincare n = {:>3} beta = {:<4} lhs {:.6} <= rhs {:.6}: {}",
            pt.n, pt.beta, pt.lhs, pt.rhs, pt.holds
        );
    }
    Ok(())
}
