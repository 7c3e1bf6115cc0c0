//! Tabulate the limiting density `nu_alpha` of the `n beta -> 2 alpha` regime and
//! compare its moments with the exact-engine limits.
//!
//! ```text
//! cargo run --release --example nu_alpha_density -- 1.0 [out.csv]
//! ```

use gbe_lab::densities::{nu_alpha_grid, semicircle_moment};
use gbe_lab::exact::{empirical_moment_expected, rational_from_f64, rational_to_f64};
use num_rational::BigRational;
use num_traits::Zero;

fn main() -> gbe_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().map_or(Ok(1.0), |a| a.parse()).expect("alpha must be a number");
    let grid = nu_alpha_grid(alpha)?;
    println!("alpha = {alpha}");
    println!("grid: {} points on [{}, {}]", grid.points.len(), grid.points[0], grid.points[grid.points.len() - 1]);
    println!("total mass = {:.12}", grid.total_mass);

    // the engine's moments at u = 1/(2 alpha), beta = 0 are the nu_alpha moments
    let u = rational_from_f64(1.0 / (2.0 * alpha))?;
    for r in [1u32, 2, 4, 6] {
        let exact = empirical_moment_expected(r as usize)?.eval_exact(&u, &BigRational::zero());
        println!(
            "moment {r}: quadrature {:.8}  engine {:.8}  semicircle {}",
            grid.moment(r),
            rational_to_f64(&exact),
            semicircle_moment(r as usize)
        );
    }
    if let Some(path) = args.next() {
        grid.write_csv(std::fs::File::create(&path)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
