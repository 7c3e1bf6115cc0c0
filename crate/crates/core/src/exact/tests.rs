use super::*;
use crate::eig::{eigenvalues, linear_statistic};
use crate::model::build_gbe;
use crate::paths::path_weight;
use crate::randsrc::{gamma_moment_exact, RngStream};
use num_traits::One;
use proptest::prelude::*;

fn u() -> BivarPoly {
    BivarPoly::u()
}

fn b() -> BivarPoly {
    BivarPoly::beta()
}

fn k(c: i64) -> BivarPoly {
    BivarPoly::constant(rat(c))
}

/// `1 - i beta u`
fn one_minus(i: i64) -> BivarPoly {
    &k(1) - &(&(&k(i) * &b()) * &u())
}

#[test]
fn entry_moment_examples() {
    assert_eq!(entry_moment(1, 0, 1), one_minus(1));
    assert_eq!(entry_moment(1, 2, 0), &k(2) * &u());
    let want = &(&one_minus(1) * &one_minus(1)) + &(&(&k(2) * &u()) * &one_minus(1));
    assert_eq!(entry_moment(1, 0, 2), want);
    assert!(entry_moment(3, 3, 1).is_zero());
    assert_eq!(entry_moment(2, 0, 0), BivarPoly::one());
}

#[test]
fn entry_moment_float_agrees() {
    for (n, beta) in [(10usize, 1.0), (37, 0.25), (200, 3.5)] {
        for site in [1usize, 2, 5, 9] {
            for alpha in 0..5 {
                for gamma in 0..4 {
                    let exact = entry_moment(site as u32, alpha, gamma).eval_at(n, beta);
                    let fl = entry_moment_f64(n, beta, site, alpha, gamma);
                    assert!((exact - fl).abs() <= 1e-13 * exact.abs().max(1e-300));
                }
            }
        }
    }
}

#[test]
fn single_moments() {
    assert!(spectral_moment_expected(3).unwrap().is_zero());
    assert!(spectral_moment_expected(1).unwrap().is_zero());
    assert_eq!(spectral_moment_expected(0).unwrap(), BivarPoly::one());
    let m2 = spectral_moment_expected(2).unwrap();
    assert_eq!(m2, &k(1) + &(&(&k(2) - &b()) * &u()));
    assert_eq!(m2.to_string(), "1 + (2 - b)*u");

    let om = one_minus(1);
    let want4 = &(&(&(&k(12) * &u().pow(2)) + &(&(&k(10) * &u()) * &om)) + &(&om * &om))
        + &(&om * &one_minus(2));
    let m4 = spectral_moment_expected(4).unwrap();
    assert_eq!(m4, want4);
    assert_eq!(m4.coeff(0, 0), rat(2));
}

#[test]
fn product_moments() {
    assert!(spectral_moment_product_expected(1, 2).unwrap().is_zero());
    assert_eq!(spectral_moment_product_expected(1, 1).unwrap(), &k(2) * &u());
    let om = one_minus(1);
    let want = &(&(&om * &om) + &(&(&k(6) * &u()) * &om)) + &(&k(12) * &u().pow(2));
    assert_eq!(spectral_moment_product_expected(2, 2).unwrap(), want);
    assert_eq!(
        spectral_moment_product_expected(3, 5).unwrap(),
        spectral_moment_product_expected(5, 3).unwrap()
    );
    assert!(spectral_moment_product_expected(9, 8).is_err());
}

#[test]
fn empirical_moment_limits() {
    let m2 = empirical_moment_expected(2).unwrap();
    assert_eq!(m2, spectral_moment_expected(2).unwrap());
    assert_eq!(m2.eval_exact(&rat(0), &ratio(7, 3)), rat(1));
    // n beta -> 2 alpha with beta -> 0: u = 1/(2 alpha)
    for alpha in [1i64, 2, 5] {
        let val = m2.eval_exact(&ratio(1, 2 * alpha), &rat(0));
        assert_eq!(val, rat(1) + ratio(1, alpha));
    }
}

fn catalan(q: usize) -> u64 {
    let mut c = 1u64;
    for i in 0..q as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

#[test]
fn semicircle_limit_is_dyck_count() {
    for q in 0..=5usize {
        let m = spectral_moment_expected(2 * q).unwrap();
        let dyck = enumerate_motzkin(2 * q)
            .unwrap()
            .into_iter()
            .filter(|w| w.steps().iter().all(|s| *s != crate::paths::Step::Flat))
            .count() as u64;
        assert_eq!(dyck, catalan(q));
        assert_eq!(m.coeff(0, 0), rat(dyck as i64));
        assert_eq!(m.beta_degree_of(0), Some(0));
    }
}

#[test]
fn moment_structure_up_to_ten() {
    for r in 0..=10usize {
        let m = spectral_moment_expected(r).unwrap();
        if r % 2 == 1 {
            assert!(m.is_zero());
            continue;
        }
        assert!(m.u_degree().unwrap() as usize <= r / 2);
        for kk in 0..=(r / 2) as u32 {
            if let Some(d) = m.beta_degree_of(kk) {
                assert!(d <= kk);
            }
        }
    }
}

#[test]
fn variance_examples() {
    let x = Polynomial::from_ints(&[0, 1]);
    assert_eq!(
        variance_linear_stat(&x).unwrap(),
        BivarPoly::monomial(rat(2), 2, 1)
    );
    let x2 = Polynomial::from_ints(&[0, 0, 1]);
    let want = &(&(&k(4) * &b()) * &u().pow(2))
        + &(&(&(&k(4) * &b()) * &(&k(2) - &b())) * &u().pow(3));
    let v = variance_linear_stat(&x2).unwrap();
    assert_eq!(v, want);
    assert_eq!(v.to_string(), "4*b*u^2 + (8*b - 4*b^2)*u^3");
    let shifted = Polynomial::from_ints(&[-7, 0, 1]);
    assert_eq!(variance_linear_stat(&shifted).unwrap(), want);
    assert!(variance_linear_stat(&Polynomial::from_ints(&[3])).unwrap().is_zero());
    assert!(variance_linear_stat(&Polynomial::monomial(9)).is_err());
}

/// Direct Var(Tr T^2)/n^2 from the entry laws:
/// `(1/n^2) [ n Var(a^2) + 4 sum_i Var(b_i^2) ]`.
#[test]
fn variance_of_x_squared_matches_direct_computation() {
    let x2 = Polynomial::from_ints(&[0, 0, 1]);
    let v = variance_linear_stat(&x2).unwrap();
    for (n, bn, bd) in [(5i64, 1i64, 1i64), (17, 1, 2), (50, 1, 2), (8, 7, 3)] {
        let beta = ratio(bn, bd);
        let uu = (&beta * rat(n)).recip();
        let var_a2 = rat(2) * (rat(2) * &uu) * (rat(2) * &uu);
        let mut var_b2 = BigRational::zero();
        for i in 1..n {
            let shape = rat(n - i) * &beta / rat(2);
            var_b2 += (rat(2) * &uu) * (rat(2) * &uu) * shape;
        }
        let direct = (rat(n) * var_a2 + rat(4) * var_b2) / rat(n * n);
        assert_eq!(v.eval_exact(&uu, &beta), direct);
    }
}

/// Exact E[xi] for a path placed at start j, at concrete rational (n, beta),
/// straight from gamma and Gaussian moments.
fn brute_entry(n: i64, beta: &BigRational, site: i64, alpha: u32, gamma: u32) -> BigRational {
    let scale = rat(2) / (rat(n) * beta);
    let ga = gaussian_moment_exact(alpha);
    if ga.is_zero() {
        return ga;
    }
    let a_part = ga * num_traits::pow(scale.clone(), (alpha / 2) as usize);
    let shape = rat(n - site) * beta / rat(2);
    let b_part = num_traits::pow(scale, gamma as usize) * gamma_moment_exact(&shape, gamma);
    a_part * b_part
}

/// Var[Tr p(T)] / n^2 by expanding the trace over every closed path and start site.
fn brute_variance(p: &Polynomial, n: i64, beta: &BigRational) -> BigRational {
    let m = p.degree();
    let mut placed: Vec<(BigRational, i64, ExponentProfile)> = Vec::new();
    for r in 1..=m {
        let c = p.coeff(r);
        if c.is_zero() {
            continue;
        }
        for w in enumerate_closed(r).unwrap() {
            let prof = exponent_profile(&w);
            for j in admissible_window(&w, n as usize).starts() {
                placed.push((c.clone(), j, prof.clone()));
            }
        }
    }
    let expect = |items: &[(i64, &ExponentProfile)]| -> BigRational {
        let mut per_site: HashMap<i64, (u32, u32)> = HashMap::new();
        for (j, prof) in items {
            for (lvl, a, g) in prof.entries() {
                let e = per_site.entry(j + lvl as i64).or_insert((0, 0));
                e.0 += a;
                e.1 += g;
            }
        }
        per_site
            .into_iter()
            .map(|(site, (a, g))| brute_entry(n, beta, site, a, g))
            .fold(BigRational::one(), |acc, x| acc * x)
    };
    let singles: Vec<BigRational> = placed.iter().map(|(_, j, pr)| expect(&[(*j, pr)])).collect();
    let mut var = BigRational::zero();
    for (x, (c1, j1, p1)) in placed.iter().enumerate() {
        for (y, (c2, j2, p2)) in placed.iter().enumerate() {
            let joint = expect(&[(*j1, p1), (*j2, p2)]);
            var += c1 * c2 * (joint - &singles[x] * &singles[y]);
        }
    }
    var / rat(n * n)
}

#[test]
fn variance_matches_brute_force_trace_expansion() {
    let cases = [
        (Polynomial::from_ints(&[0, 1]), 3i64),
        (Polynomial::from_ints(&[0, 0, 1]), 4),
        (Polynomial::from_ints(&[1, -2, 0, 1]), 4),
        (Polynomial::from_ints(&[0, 1, 1, 0, 2]), 5),
        (Polynomial::from_ints(&[0, 0, 0, 0, 1]), 7),
    ];
    for (p, n) in cases {
        for beta in [ratio(1, 1), ratio(1, 3), ratio(5, 2)] {
            let uu = (&beta * rat(n)).recip();
            let engine = variance_linear_stat(&p).unwrap().eval_exact(&uu, &beta);
            assert_eq!(engine, brute_variance(&p, n, &beta), "p = {p}, n = {n}");
        }
    }
}

#[test]
fn sigma_values() {
    let x = Polynomial::from_ints(&[0, 1]);
    let x2 = Polynomial::from_ints(&[0, 0, 1]);
    assert_eq!(sigma_p_sq(&x).unwrap(), rat(2));
    assert_eq!(sigma_p_sq(&x2).unwrap(), rat(4));
    assert_eq!(sigma_p_sq(&Polynomial::from_ints(&[1])).unwrap(), rat(0));
    for alpha in [ratio(1, 3), rat(1), rat(7)] {
        assert_eq!(sigma_p_alpha_sq(&x, &alpha).unwrap(), rat(2));
    }
    assert_eq!(sigma_p_alpha_sq(&x2, &rat(1)).unwrap(), rat(8));
    assert_eq!(
        sigma_p_alpha_sq(&x2, &rat(1_000_000)).unwrap(),
        rat(4) + ratio(1, 250_000)
    );
    assert!(sigma_p_alpha_sq(&x2, &rat(0)).is_err());
}

#[test]
fn poincare_examples() {
    let x = Polynomial::from_ints(&[0, 1]);
    let rep = poincare_check(&x, &[(3, 0.1), (10, 1.0), (100, 7.0)]).unwrap();
    for pt in &rep.points {
        assert_eq!(pt.lhs, 2.0);
        assert_eq!(pt.rhs, 2.0);
        assert!(pt.holds);
    }
    let x2 = Polynomial::from_ints(&[0, 0, 1]);
    let rep = poincare_check(&x2, &[(10, 1.0)]).unwrap();
    assert!((rep.points[0].lhs - 4.4).abs() < 1e-14);
    assert!((rep.points[0].rhs - 8.8).abs() < 1e-14);
    assert!(rep.all_hold());
    let c = Polynomial::from_ints(&[5]);
    let rep = poincare_check(&c, &[(4, 1.0)]).unwrap();
    assert_eq!((rep.points[0].lhs, rep.points[0].rhs), (0.0, 0.0));
    assert!(poincare_check(&Polynomial::monomial(4), &[(4, 1.0)]).is_err());
}

#[test]
fn delta_zero_cases_and_center_factor() {
    let mut s = RngStream::new(90, 0);
    let t = build_gbe(12, 1.0, &mut s).unwrap();
    let ff = ClosedPath::parse("FF").unwrap();
    let uud = ClosedPath::parse("UFDF").unwrap();
    for k in 1..=12 {
        if k != 5 {
            assert_eq!(martingale_delta(&ff, 5, k, &t).unwrap(), 0.0);
        }
    }
    let uu = 1.0 / 12.0;
    let d = martingale_delta(&ff, 5, 5, &t).unwrap();
    assert!((d - (t.a(5).powi(2) - 2.0 * uu)).abs() < 1e-15);
    // UFDF at j = 3 visits sites 3, 4; site 3 carries gamma = 1 and alpha = 1
    for k in [1usize, 2, 5, 6, 12] {
        assert_eq!(martingale_delta(&uud, 3, k, &t).unwrap(), 0.0);
    }
    assert!(martingale_delta(&ff, 13, 1, &t).is_err());
    assert!(martingale_delta(&ff, 2, 0, &t).is_err());
}

#[test]
fn delta_telescopes_for_short_paths() {
    let mut s = RngStream::new(91, 0);
    let n = 9;
    for _ in 0..5 {
        let t = build_gbe(n, 0.8, &mut s).unwrap();
        for r in 0..=4 {
            for w in enumerate_closed(r).unwrap() {
                let prof = exponent_profile(&w);
                for j in admissible_window(&w, n).starts() {
                    let total: f64 = (1..=n)
                        .map(|k| martingale_delta(&w, j, k, &t).unwrap())
                        .sum();
                    let xi = path_weight(&w, j, &t).unwrap();
                    let mean: f64 = prof
                        .entries()
                        .map(|(l, a, g)| entry_moment_f64(n, 0.8, (j + l as i64) as usize, a, g))
                        .product();
                    assert!(
                        (total - (xi - mean)).abs() < 1e-10 * xi.abs().max(1.0),
                        "w = {w}, j = {j}"
                    );
                }
            }
        }
    }
}

#[test]
fn increments_sum_to_centered_statistic() {
    let p = Polynomial::from_ints(&[0, 0, 1]);
    let n = 20;
    let mut s = RngStream::new(92, 0);
    let mean = expected_trace(&p, n, 1.0).unwrap();
    for _ in 0..20 {
        let t = build_gbe(n, 1.0, &mut s).unwrap();
        let ys = martingale_increments(&p, &t).unwrap();
        let sn = linear_statistic(&eigenvalues(&t).unwrap(), |x| x * x);
        let lhs: f64 = ys.iter().sum();
        assert!((lhs - (sn - mean)).abs() < 1e-9 * sn.abs().max(1.0));
    }
    let c = Polynomial::from_ints(&[4]);
    let t = build_gbe(n, 1.0, &mut s).unwrap();
    assert!(martingale_increments(&c, &t).unwrap().iter().all(|y| *y == 0.0));
}

#[test]
fn increments_are_local() {
    let p = Polynomial::from_ints(&[1, 0, -1, 2, 1]);
    let m = p.degree();
    let mut s = RngStream::new(93, 0);
    let t = build_gbe(30, 0.6, &mut s).unwrap();
    let k = 15;
    let y = martingale_increment(k, &p, &t).unwrap();
    for i in 1..=30usize {
        if (i as i64 - k as i64).unsigned_abs() as usize > m / 2 + 1 {
            let mut t2 = t.clone();
            t2.diag_mut()[i - 1] += 3.0;
            if i < 30 {
                t2.offdiag_mut()[i - 1] *= 2.0;
            }
            assert_eq!(
                martingale_increment(k, &p, &t2).unwrap().to_bits(),
                y.to_bits(),
                "site {i}"
            );
        }
    }
}

#[test]
fn expected_trace_matches_path_route() {
    let p = Polynomial::from_ints(&[2, -1, 3, 0, 1]);
    let (n, beta) = (9usize, 0.7);
    let mut direct = 0.0;
    for (r, c) in p.coeffs_f64().iter().enumerate() {
        for w in enumerate_closed(r).unwrap() {
            let prof = exponent_profile(&w);
            for j in admissible_window(&w, n).starts() {
                direct += c * prof
                    .entries()
                    .map(|(l, a, g)| entry_moment_f64(n, beta, (j + l as i64) as usize, a, g))
                    .product::<f64>();
            }
        }
    }
    let engine = expected_trace(&p, n, beta).unwrap();
    assert!((engine - direct).abs() < 1e-12 * direct.abs());
}

fn arb_polynomial() -> impl Strategy<Value = Polynomial> {
    proptest::collection::vec(-3i64..=3, 1..=6).prop_map(|c| Polynomial::from_ints(&c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn variance_structure_holds(p in arb_polynomial()) {
        let v = variance_linear_stat(&p).unwrap();
        for (kk, j, _) in v.terms() {
            prop_assert!(kk >= 2);
            prop_assert!(j >= 1 && j < kk);
            prop_assert!(kk as usize <= p.degree() + 1);
        }
    }

    #[test]
    fn variance_is_shift_invariant(p in arb_polynomial(), c in -5i64..=5) {
        let mut coeffs = p.coeffs().to_vec();
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        coeffs[0] += rat(c);
        let shifted = Polynomial::new(coeffs);
        prop_assert_eq!(variance_linear_stat(&p).unwrap(), variance_linear_stat(&shifted).unwrap());
    }
}
