use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gbe_lab::densities::{nu_alpha_grid, nu_alpha_grid_with, semicircle_grid, DEFAULT_GRID_POINTS};
use gbe_lab::eig::eigenvalues;
use gbe_lab::exact::{
    parse_rational, rational_to_f64, sigma_p_alpha_sq, sigma_p_sq,
    spectral_moment_expected, spectral_moment_product_expected, variance_linear_stat, Polynomial,
};
use gbe_lab::harness::{
    martingale_condition_scan, run_experiment, BetaRule, Config, ExperimentKind, ExperimentSpec,
    NamedFunction, TestFunction,
};
use gbe_lab::model::{build_gbe, build_j_alpha_truncation};
use gbe_lab::randsrc::RngStream;
use gbe_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "gbe-lab", version, about = "Gaussian beta ensemble experiments and exact moments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one matrix and dump its entries (and optionally eigenvalues).
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "alpha")]
        beta: Option<f64>,
        /// Draw the J_alpha truncation instead.
        #[arg(long)]
        alpha: Option<f64>,
        /// Append the eigenvalues.
        #[arg(long)]
        eigen: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Exact moment polynomials in u = 1/(n beta) and b = beta.
    Moments {
        /// E[<mu_n, x^r>].
        #[arg(long, group = "what")]
        r: Option<usize>,
        /// E[<mu_n, x^r><mu_n, x^s>].
        #[arg(long, num_args = 2, value_names = ["R", "S"], group = "what")]
        product: Option<Vec<usize>>,
        /// Var[<L_n, p>] for comma-separated coefficients.
        #[arg(long, group = "what")]
        variance: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Limit variances sigma_p^2, sigma_{p,alpha}^2 or the double-integral route.
    Sigma {
        #[arg(long)]
        poly: Option<String>,
        /// Named test function (quadrature only): exp, sin, abs-shifted.
        #[arg(long, conflicts_with = "poly")]
        function: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        /// Also evaluate the double integral numerically.
        #[arg(long)]
        quadrature: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate a limit density as CSV.
    Density {
        #[arg(long, group = "which")]
        sc: bool,
        #[arg(long = "nu-alpha", group = "which")]
        nu_alpha: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        points: usize,
        /// Half-width of the grid (default depends on the density).
        #[arg(long)]
        half_width: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Fluctuation experiment for a linear statistic.
    Clt(ExperimentArgs),
    /// Law-of-large-numbers experiment: moments and semicircle distance.
    Lln(ExperimentArgs),
    /// Martingale condition scan.
    Martingale {
        #[arg(long)]
        poly: String,
        /// Comma-separated sizes.
        #[arg(long, default_value = "50,100,200,400")]
        n: String,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Clone, Default)]
struct RuleArgs {
    #[arg(long)]
    beta: Option<f64>,
    /// Hold n beta fixed at this value.
    #[arg(long)]
    nbeta: Option<f64>,
    /// beta = n^(g - 1).
    #[arg(long = "nbeta-growth")]
    nbeta_growth: Option<f64>,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// Experiment kind (inferred from the beta rule when omitted).
    #[arg(long)]
    kind: Option<String>,
    /// Comma-separated sizes.
    #[arg(long)]
    n: Option<String>,
    #[command(flatten)]
    rule: RuleArgs,
    #[arg(long)]
    poly: Option<String>,
    #[arg(long)]
    monomial: Option<usize>,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Raise the work budget (sum of n^2 * reps).
    #[arg(long)]
    max_ops: Option<f64>,
    /// Write the scaled statistics to this CSV file.
    #[arg(long)]
    dump_samples: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_config(common: &Common) -> Result<Config> {
    match &common.config {
        Some(path) => Config::parse(&fs::read_to_string(path)?),
        None => Ok(Config::default()),
    }
}

fn seed_of(common: &Common, cfg: &Config) -> Result<u64> {
    match (common.seed, cfg.get("seed")) {
        (Some(s), _) => Ok(s),
        (None, Some(t)) => t.trim().parse().map_err(|_| Error::Parse(format!("bad seed '{t}'"))),
        (None, None) => Ok(0),
    }
}

fn apply_rule(cfg: &mut Config, rule: &RuleArgs) {
    let given = [("beta", rule.beta), ("nbeta", rule.nbeta), ("nbeta_growth", rule.nbeta_growth)];
    if given.iter().any(|(_, v)| v.is_some()) {
        for (k, _) in &given {
            cfg.remove(k);
        }
        for (k, v) in given {
            if let Some(v) = v {
                cfg.set(k, v.to_string());
            }
        }
    }
}

fn experiment_spec(a: &ExperimentArgs, default_kind: ExperimentKind) -> Result<ExperimentSpec> {
    let mut cfg = load_config(&a.common)?;
    if let Some(n) = &a.n {
        cfg.set("n_list", n.clone());
        cfg.remove("n");
    }
    apply_rule(&mut cfg, &a.rule);
    let funcs = [
        ("poly", a.poly.clone()),
        ("monomial", a.monomial.map(|r| r.to_string())),
        ("function", a.function.clone()),
    ];
    if funcs.iter().any(|(_, v)| v.is_some()) {
        for (k, _) in &funcs {
            cfg.remove(k);
        }
        for (k, v) in funcs {
            if let Some(v) = v {
                cfg.set(k, v);
            }
        }
    }
    if let Some(r) = a.reps {
        cfg.set("replicates", r.to_string());
        cfg.remove("reps");
    }
    if let Some(s) = a.common.seed {
        cfg.set("seed", s.to_string());
    }
    if let Some(al) = a.alpha {
        cfg.set("alpha", al.to_string());
    }
    if let Some(m) = a.max_ops {
        cfg.set("max_ops", m.to_string());
    }
    if let Some(k) = &a.kind {
        cfg.set("kind", k.clone());
    }
    if cfg.get("kind").is_none() {
        let kind = if default_kind == ExperimentKind::SemicircleLaw {
            "semicircle-law"
        } else if cfg.get("nbeta").is_some() {
            "alpha-regime"
        } else if cfg.get("nbeta_growth").is_some() {
            "clt-growing-nbeta"
        } else {
            "clt-fixed-beta"
        };
        cfg.set("kind", kind);
    }
    ExperimentSpec::from_config(&cfg)
}

fn run_and_report(a: &ExperimentArgs, default_kind: ExperimentKind) -> Result<()> {
    let spec = experiment_spec(a, default_kind)?;
    let result = run_experiment(&spec)?;
    if let Some(path) = &a.dump_samples {
        result.write_samples_csv(fs::File::create(path)?)?;
    }
    for s in &result.per_size {
        let mut line = format!(
            "n={} beta={:.6} mean={:.6} scaled_var={:.5} skew={:.4} ex_kurt={:.4} ks={:.4}",
            s.n, s.beta, s.mean, s.scaled_var, s.skew, s.ex_kurt, s.ks_normal
        );
        if let Some(e) = s.exact_sigma {
            line.push_str(&format!(" sigma2={e:.5}"));
        }
        if let Some(k) = s.semicircle_ks {
            line.push_str(&format!(" semicircle_ks={k:.4}"));
        }
        eprintln!("{line}");
    }
    emit(&a.common, &(result.to_json()? + "\n"))
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad size '{t}'"))))
        .collect()
}

fn rule_from(rule: &RuleArgs, cfg: &Config) -> Result<BetaRule> {
    let num = |k: &str| -> Result<Option<f64>> {
        cfg.get(k)
            .map(|t| t.trim().parse().map_err(|_| Error::Parse(format!("bad {k} '{t}'"))))
            .transpose()
    };
    let beta = rule.beta.or(num("beta")?);
    let nbeta = rule.nbeta.or(num("nbeta")?);
    let growth = rule.nbeta_growth.or(num("nbeta_growth")?);
    match (beta, nbeta, growth) {
        (Some(b), None, None) => Ok(BetaRule::Fixed(b)),
        (None, Some(nb), None) => Ok(BetaRule::NbetaFixed(nb)),
        (None, None, Some(g)) => Ok(BetaRule::NbetaGrowth(g)),
        (None, None, None) => Ok(BetaRule::Fixed(1.0)),
        _ => Err(Error::Parse("give only one of --beta, --nbeta, --nbeta-growth".into())),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample { n, beta, alpha, eigen, common } => {
            let cfg = load_config(&common)?;
            let mut stream = RngStream::new(seed_of(&common, &cfg)?, 0);
            let t = match alpha {
                Some(a) => build_j_alpha_truncation(n, a, &mut stream)?,
                None => build_gbe(n, beta.unwrap_or(1.0), &mut stream)?,
            };
            let mut text = t.to_dump();
            if eigen {
                let e = eigenvalues(&t)?;
                text.push_str("eigenvalues\n");
                for v in e.values {
                    text.push_str(&format!("{v:.16e}\n"));
                }
            }
            emit(&common, &text)
        }
        Command::Moments { r, product, variance, common } => {
            let text = match (r, product, variance) {
                (Some(r), None, None) => spectral_moment_expected(r)?.to_string(),
                (None, Some(rs), None) => spectral_moment_product_expected(rs[0], rs[1])?.to_string(),
                (None, None, Some(p)) => variance_linear_stat(&Polynomial::parse(&p)?)?.to_string(),
                _ => return Err(Error::InvalidParameter("give one of --r, --product, --variance".into())),
            };
            emit(&common, &(text + "\n"))
        }
        Command::Sigma { poly, function, alpha, quadrature, common } => {
            let mut out = String::new();
            match (&poly, &function) {
                (Some(p), _) => {
                    let p = Polynomial::parse(p)?;
                    let s = sigma_p_sq(&p)?;
                    out.push_str(&format!("sigma_p^2 = {s} ({:.12})\n", rational_to_f64(&s)));
                    if let Some(a) = &alpha {
                        let s = sigma_p_alpha_sq(&p, &parse_rational(a)?)?;
                        out.push_str(&format!("sigma_p,alpha^2 = {s} ({:.12})\n", rational_to_f64(&s)));
                    }
                    if quadrature {
                        let q = TestFunction::Polynomial(poly.clone().unwrap()).sigma_sq_quadrature()?;
                        out.push_str(&format!("quadrature = {q:.12}\n"));
                    }
                }
                (None, Some(name)) => {
                    let g: NamedFunction = name.parse()?;
                    let q = TestFunction::Named(g).sigma_sq_quadrature()?;
                    out.push_str(&format!("quadrature = {q:.12}\n"));
                }
                (None, None) => return Err(Error::InvalidParameter("give --poly or --function".into())),
            }
            emit(&common, &out)
        }
        Command::Density { sc, nu_alpha, points, half_width, common } => {
            let grid = match (sc, nu_alpha) {
                (true, None) => semicircle_grid(points)?,
                (false, Some(a)) => match half_width {
                    Some(h) => nu_alpha_grid_with(a, h, points)?,
                    None if points == DEFAULT_GRID_POINTS => nu_alpha_grid(a)?,
                    None => nu_alpha_grid_with(a, gbe_lab::densities::nu_alpha_half_width(a), points)?,
                },
                _ => return Err(Error::InvalidParameter("give --sc or --nu-alpha".into())),
            };
            eprintln!("total mass = {:.12}", grid.total_mass);
            emit(&common, &grid.to_csv())
        }
        Command::Clt(a) => run_and_report(&a, ExperimentKind::CltFixedBeta),
        Command::Lln(a) => run_and_report(&a, ExperimentKind::SemicircleLaw),
        Command::Martingale { poly, n, rule, reps, common } => {
            let cfg = load_config(&common)?;
            let report = martingale_condition_scan(
                &Polynomial::parse(&poly)?,
                &parse_sizes(&n)?,
                rule_from(&rule, &cfg)?,
                reps,
                seed_of(&common, &cfg)?,
            )?;
            for row in &report.rows {
                eprintln!(
                    "n={} beta={:.6} n^2 beta Var={:.8} sigma_p^2={:.8}",
                    row.n, row.beta, row.scaled_variance, row.sigma_p_sq
                );
            }
            eprintln!("fourth-moment trend ratio = {:.4}", report.trend_ratio);
            emit(&common, &(serde_json::to_string_pretty(&report)? + "\n"))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
