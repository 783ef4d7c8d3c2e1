mod common;

use mei_core::series::{
    ascending_ranks_min_ties, block_exceedance_counts, ceil_level, estimate_threshold_vector,
    pareto_transform, z_series, BlockScheme, Direction, MultivariateSeries,
};
use proptest::prelude::*;

/// Small series with deliberate ties: values drawn from a coarse grid.
fn small_series() -> impl Strategy<Value = MultivariateSeries> {
    (1usize..=3, 2usize..=60).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(0u8..12, n), d).prop_map(|cols| {
            MultivariateSeries::from_columns(
                cols.into_iter()
                    .map(|c| c.into_iter().map(f64::from).collect())
                    .collect(),
            )
            .unwrap()
        })
    })
}

fn tau_for(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.5], d)
        .prop_filter("not all zero", |t| t.iter().any(|&x| x > 0.0))
}

fn tie_free_column(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::btree_set(0u32..1_000_000, n)
        .prop_map(|s| s.into_iter().map(f64::from).collect::<Vec<_>>())
        .prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn block_counts_match_double_loop(
        (series, tau, k_n) in small_series().prop_flat_map(|s| {
            let (n, d) = (s.len(), s.dim());
            (Just(s), tau_for(d), 1..=n / 2)
        })
    ) {
        let scheme = BlockScheme::with_block_count(series.len(), k_n).unwrap();
        let tau = Direction::new(tau).unwrap();
        if let Ok(u) = estimate_threshold_vector(&series, &tau, scheme) {
            let fast = block_exceedance_counts(&series, &u, scheme).unwrap();
            let slow = common::naive_block_counts(&series, &u.0, scheme.k_n(), scheme.r_n());
            prop_assert_eq!(fast.0, slow);
        }
    }

    #[test]
    fn larger_tau_never_lowers_counts(
        (series, tau, bump, k_n) in small_series().prop_flat_map(|s| {
            let (n, d) = (s.len(), s.dim());
            (Just(s), tau_for(d), prop::collection::vec(0.0f64..0.5, d), 1..=n / 2)
        })
    ) {
        let scheme = BlockScheme::with_block_count(series.len(), k_n).unwrap();
        let wider: Vec<f64> = tau.iter().zip(&bump).map(|(t, b)| t + b).collect();
        let tau = Direction::new(tau).unwrap();
        let wider = Direction::new(wider).unwrap();
        if let Ok(u_wide) = estimate_threshold_vector(&series, &wider, scheme) {
            let u = estimate_threshold_vector(&series, &tau, scheme).unwrap();
            let a = block_exceedance_counts(&series, &u, scheme).unwrap();
            let b = block_exceedance_counts(&series, &u_wide, scheme).unwrap();
            prop_assert!(a.0.iter().zip(&b.0).all(|(x, y)| x <= y));
        }
    }

    #[test]
    fn tie_free_threshold_leaves_level_minus_one_above(
        (col, k_n, tau) in (4usize..80).prop_flat_map(|n| {
            (tie_free_column(n), 1..=n / 2, 0.01f64..2.0)
        })
    ) {
        let n = col.len();
        let scheme = BlockScheme::with_block_count(n, k_n).unwrap();
        let series = MultivariateSeries::from_columns(vec![col]).unwrap();
        let level = ceil_level(k_n as f64 * tau).max(1);
        prop_assume!(level <= scheme.n_used());
        let u = estimate_threshold_vector(&series, &Direction::new(vec![tau]).unwrap(), scheme)
            .unwrap();
        let above = series.column(0)[..scheme.n_used()].iter().filter(|&&x| x > u.0[0]).count();
        prop_assert_eq!(above, level - 1);
        prop_assert_eq!(u.0[0], common::naive_order_statistic(&series.column(0)[..scheme.n_used()], level));
    }

    #[test]
    fn ranks_are_permutation_and_monotone(col in prop::collection::vec(0u8..20, 1..80)) {
        let col: Vec<f64> = col.into_iter().map(f64::from).collect();
        let ranks = ascending_ranks_min_ties(&col);
        let naive = common::naive_ranks(&col);
        for (r, q) in ranks.iter().zip(&naive) {
            prop_assert_eq!(*r as f64, *q);
        }
        for i in 0..col.len() {
            for j in 0..col.len() {
                if col[i] < col[j] {
                    prop_assert!(ranks[i] < ranks[j]);
                }
            }
        }
    }

    #[test]
    fn tie_free_ranks_are_a_permutation(col in (1usize..80).prop_flat_map(tie_free_column)) {
        let mut ranks = ascending_ranks_min_ties(&col);
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (1..=col.len()).collect::<Vec<_>>());
    }

    #[test]
    fn pareto_strictly_increasing_in_rank(n_used in 1usize..500) {
        let ranks: Vec<usize> = (1..=n_used).collect();
        let y = pareto_transform(&ranks, n_used);
        prop_assert_eq!(y[0], 1.0);
        prop_assert_eq!(y[n_used - 1], n_used as f64);
        prop_assert!(y.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn z_series_is_homogeneous(
        (series, tau, c) in small_series().prop_flat_map(|s| {
            let d = s.dim();
            (Just(s), tau_for(d), prop_oneof![Just(0.5), Just(2.0), Just(4.0)])
        })
    ) {
        let scheme = BlockScheme::with_block_count(series.len(), 1).unwrap();
        let tau = Direction::new(tau).unwrap();
        let z = z_series(&series, &tau, scheme).unwrap();
        let zc = z_series(&series, &tau.scaled(c).unwrap(), scheme).unwrap();
        for (a, b) in z.iter().zip(&zc) {
            prop_assert_eq!(a * c, *b);
        }
    }
}
