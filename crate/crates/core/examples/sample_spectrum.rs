//! Draw one GbetaE matrix, diagonalize it and compare its spectrum with the
//! semicircle law and the exact finite-n moments.
//!
//! ```text
//! cargo run --release --example sample_spectrum -- [n] [beta] [seed]
//! ```

use gbe_lab::exact::{empirical_moment_expected, spectral_moment_expected};
use gbe_lab::harness::semicircle_ks;
use gbe_lab::model::{build_gbe, spectral_sample};
use gbe_lab::randsrc::RngStream;

fn main() -> gbe_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(1000, |a| a.parse().expect("n"));
    let beta: f64 = args.get(1).map_or(1.0, |a| a.parse().expect("beta"));
    let seed: u64 = args.get(2).map_or(1, |a| a.parse().expect("seed"));

    let mut stream = RngStream::new(seed, 0);
    let t = build_gbe(n, beta, &mut stream)?;
    let s = spectral_sample(&t, true, &mut stream)?;
    let (lo, hi) = (s.eigenvalues[0], s.eigenvalues[n - 1]);
    println!("n = {n}, beta = {beta}, seed = {seed}");
    println!("spectrum in [{lo:.4}, {hi:.4}]");
    println!("KS distance to semicircle: {:.5}", semicircle_ks(&s.eigenvalues)?);

    println!("{:>3} {:>12} {:>12} {:>12} {:>12}", "r", "<L_n,x^r>", "E exact", "<mu_n,x^r>", "E exact");
    for r in [2u32, 4, 6] {
        let el = empirical_moment_expected(r as usize)?.eval_at(n, beta);
        let es = spectral_moment_expected(r as usize)?.eval_at(n, beta);
        println!(
            "{r:>3} {:>12.6} {el:>12.6} {:>12.6} {es:>12.6}",
            s.empirical_moment(r),
            s.spectral_moment(r).unwrap()
        );
    }
    Ok(())
}
