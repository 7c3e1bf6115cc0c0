//! Monte Carlo fluctuations of `Tr p(T)` against the Gaussian limit, for fixed
//! beta, a growing `n beta` schedule and the `n beta = 2 alpha` regime.
//!
//! ```text
//! cargo run --release --example clt_experiment -- [reps]
//! ```

use gbe_lab::harness::{run_experiment, BetaRule, ExperimentKind, ExperimentSpec, TestFunction};

fn main() -> gbe_lab::Result<()> {
    let reps: usize = std::env::args().nth(1).map_or(2000, |a| a.parse().expect("reps"));
    let runs = [
        (ExperimentKind::CltFixedBeta, vec![50, 200], BetaRule::Fixed(1.0), None),
        (ExperimentKind::CltGrowingNbeta, vec![100, 400], BetaRule::NbetaGrowth(0.5), None),
        (ExperimentKind::AlphaRegime, vec![200, 800], BetaRule::NbetaFixed(2.0), Some(1.0)),
    ];
    for (kind, n_list, beta_rule, alpha) in runs {
        let spec = ExperimentSpec {
            kind,
            n_list,
            beta_rule,
            test_function: TestFunction::Monomial(2),
            replicates: reps,
            seed: 7,
            alpha,
            max_ops: None,
        };
        let res = run_experiment(&spec)?;
        println!("{kind:?}");
        for s in &res.per_size {
            println!(
                "  n = {:>4} beta = {:.4}: var {:.4} +- {:.4} (limit {:?}), skew {:+.3}, ex_kurt {:+.3}, KS {:.4}",
                s.n,
                s.beta,
                s.scaled_var,
                s.scaled_var_se,
                s.exact_sigma,
                s.skew,
                s.ex_kurt,
                s.ks_normal
            );
        }
    }
    Ok(())
}
