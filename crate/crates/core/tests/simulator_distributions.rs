mod common;

use mei_core::oracles::solve_kappa;
use mei_core::simulators::{
    sample_logistic_frechet_pair, simulate_ar1, simulate_arch, simulate_iid_exp, Ar1Params,
    ArchParams, Seed,
};

const N: usize = 100_000;

fn ks_bound(n: usize) -> f64 {
    1.95 / (n as f64).sqrt()
}

fn frechet_pairs(alpha: f64, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = Seed(seed).rng();
    (0..n)
        .map(|_| sample_logistic_frechet_pair(alpha, &mut rng))
        .unzip()
}

#[test]
fn iid_margins_are_standard_exponential() {
    let s = simulate_iid_exp(N, Seed(21)).unwrap();
    for i in 0..2 {
        let d = common::ks_statistic(s.column(i), |x| 1.0 - (-x).exp());
        assert!(d < ks_bound(N), "column {i}: {d}");
    }
    let r = common::pearson(s.column(0), s.column(1));
    assert!(r.abs() < 0.01, "{r}");
}

#[test]
fn logistic_pair_has_unit_frechet_margins() {
    for (alpha, seed) in [(0.5, 31), (0.3, 32), (0.7, 33), (1.0, 34)] {
        let (a, b) = frechet_pairs(alpha, N, seed);
        for col in [&a, &b] {
            let d = common::ks_statistic(col, |x| (-1.0 / x).exp());
            assert!(d < ks_bound(N), "alpha {alpha}: {d}");
        }
    }
}

#[test]
fn logistic_pair_joint_cdf_at_one() {
    let (a, b) = frechet_pairs(0.5, N, 41);
    let hits = a
        .iter()
        .zip(&b)
        .filter(|(x, y)| **x <= 1.0 && **y <= 1.0)
        .count();
    let p_hat = hits as f64 / N as f64;
    let p = (-(2.0f64).sqrt()).exp();
    let se = (p * (1.0 - p) / N as f64).sqrt();
    assert!((p_hat - p).abs() <= 3.0 * se, "{p_hat} vs {p} (se {se})");
}

#[test]
fn independent_pair_when_alpha_is_one() {
    let (a, b) = frechet_pairs(1.0, N, 51);
    let r = common::spearman(&a, &b);
    assert!(r.abs() < 0.01, "{r}");
}

#[test]
fn copula_unchanged_by_monotone_margins() {
    let (a, b) = frechet_pairs(0.5, N, 61);
    let r = common::spearman(&a, &b);
    let ta: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let tb: Vec<f64> = b.iter().map(|x| (-1.0 / x).exp()).collect();
    assert_eq!(common::spearman(&ta, &tb), r);
    // Spearman's rho of the logistic copula at alpha = 1/2 is clearly positive.
    assert!(r > 0.5, "{r}");
}

#[test]
fn arch_tail_index_matches_kappa() {
    let s = simulate_arch(1_000_000, &ArchParams::benchmark(), Seed(71)).unwrap();
    let k = 10_000;
    let hill7 = common::hill_tail_index(s.column(0), k);
    let kappa7 = solve_kappa(0.7).unwrap();
    assert!(
        (hill7 - kappa7).abs() <= 0.1 * kappa7,
        "hill {hill7} kappa {kappa7}"
    );
    // At kappa ~ 4 the top 1% is still far from the Pareto regime, so only
    // the ordering of the two tails is checked for the lighter component.
    let hill3 = common::hill_tail_index(s.column(1), k);
    assert!(hill3 > hill7 + 0.5, "{hill3} vs {hill7}");
}

#[test]
fn ar1_tail_index_is_one() {
    let s = simulate_ar1(1_000_000, &Ar1Params::benchmark(), Seed(81)).unwrap();
    for i in 0..2 {
        let hill = common::hill_tail_index(s.column(i), 10_000);
        assert!((hill - 1.0).abs() <= 0.1, "column {i}: {hill}");
    }
}

#[test]
fn distinct_seeds_give_unrelated_streams() {
    let a = simulate_iid_exp(N, Seed(91)).unwrap();
    let b = simulate_iid_exp(N, Seed(92)).unwrap();
    let r = common::spearman(a.column(0), b.column(0));
    assert!(r.abs() < 0.01, "{r}");
    let c = simulate_ar1(N, &Ar1Params::benchmark(), Seed(93)).unwrap();
    let d = simulate_ar1(N, &Ar1Params::benchmark(), Seed(94)).unwrap();
    assert!(common::spearman(c.column(1), d.column(1)).abs() < 0.01);
}

#[test]
fn outputs_positive_finite_and_sized() {
    let arch = simulate_arch(5000, &ArchParams::benchmark(), Seed(5)).unwrap();
    let ar1 = simulate_ar1(5000, &Ar1Params::benchmark(), Seed(5)).unwrap();
    for s in [&arch, &ar1] {
        assert_eq!((s.len(), s.dim()), (5000, 2));
        assert!((0..2).all(|i| s.column(i).iter().all(|x| x.is_finite() && *x > 0.0)));
    }
}
