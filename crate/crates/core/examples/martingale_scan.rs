//! Martingale increments of `Tr p(T)`: telescoping on one matrix and the scan of
//! both CLT conditions along a list of sizes.
//!
//! ```text
//! cargo run --release --example martingale_scan -- [poly]
//! ```

use gbe_lab::exact::{martingale_increments, Polynomial};
use gbe_lab::harness::{martingale_condition_scan, BetaRule};
use gbe_lab::model::build_gbe;
use gbe_lab::randsrc::RngStream;

fn main() -> gbe_lab::Result<()> {
    let p = Polynomial::parse(&std::env::args().nth(1).unwrap_or_else(|| "0,0,1".into()))?;

    let n = 30;
    let t = build_gbe(n, 1.0, &mut RngStream::new(3, 0))?;
    let y = martingale_increments(&p, &t)?;
    let trace = gbe_lab::eig::linear_statistic(&gbe_lab::eig::eigenvalues(&t)?, |x| p.eval(x));
    let mean = gbe_lab::exact::expected_trace(&p, n, 1.0)?;
    println!("p = {p}, n = {n}");
    println!("sum of increments {:.12}", y.iter().sum::<f64>());
    println!("Tr p(T) - E      {:.12}", trace - mean);

    let report = martingale_condition_scan(&p, &[50, 100, 200, 400], BetaRule::Fixed(1.0), 2000, 11)?;
    for row in &report.rows {
        let worst = row.fourth_moments.iter().map(|f| f.scaled).fold(0.0, f64::max);
        println!(
            "n = {:>4}: n^2 beta Var = {:.6} (limit {:.6}), max (n beta)^2 E[Delta^4] = {worst:.4}",
            row.n, row.scaled_variance, row.sigma_p_sq
        );
    }
    println!("trend ratio {:.3}", report.trend_ratio);
    Ok(())
}
