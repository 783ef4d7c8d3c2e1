use mei_core::estimators::{theta1, theta2, theta3, HomogeneousNorm};
use mei_core::series::{ceil_level, BlockScheme, Direction, MultivariateSeries};
use mei_core::simulators::{simulate_iid_exp, Seed};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn random_instance(rng: &mut ChaCha8Rng) -> (MultivariateSeries, Direction, BlockScheme) {
    let d = rng.random_range(1..=3);
    let n = rng.random_range(40..400);
    let cols = (0..d)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect();
    let series = MultivariateSeries::from_columns(cols).unwrap();
    let k_n = rng.random_range(2..=n / 4);
    let tau = Direction::new((0..d).map(|_| rng.random_range(0.05..1.0)).collect()).unwrap();
    (series, tau, BlockScheme::with_block_count(n, k_n).unwrap())
}

#[test]
fn scale_invariance_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let norms = [
        HomogeneousNorm::default(),
        HomogeneousNorm::power(2.0, 1.0).unwrap(),
        HomogeneousNorm::power(1.0, 2.0).unwrap(),
        HomogeneousNorm::power(0.7, 3.5).unwrap(),
    ];
    let mut checked = 0;
    for inst in 0..100 {
        let (series, tau, scheme) = random_instance(&mut rng);
        let norm = norms[inst % norms.len()];
        let base1 = theta1(&series, &tau, scheme, norm);
        let base2 = theta2(&series, &tau, 0.8, scheme);
        for c in [0.5, 3.0, 17.0] {
            let scaled = tau.scaled(c).unwrap();
            match (&base1, theta1(&series, &scaled, scheme, norm)) {
                (Ok(a), Ok(b)) => {
                    assert!(rel_close(a.theta_hat, b.theta_hat, 1e-12), "{a:?} vs {b:?}");
                    checked += 1;
                }
                (Err(a), Err(b)) => assert_eq!(a, &b),
                (a, b) => panic!("outcome changed under scaling: {a:?} vs {b:?}"),
            }
            match (&base2, theta2(&series, &scaled, 0.8, scheme)) {
                (Ok(a), Ok(b)) => {
                    assert!(rel_close(a.theta_hat, b.theta_hat, 1e-12), "{a:?} vs {b:?}");
                    checked += 1;
                }
                (Err(a), Err(b)) => assert_eq!(a, &b),
                (a, b) => panic!("outcome changed under scaling: {a:?} vs {b:?}"),
            }
        }
    }
    assert!(checked > 500, "only {checked} successful comparisons");
}

#[test]
fn ratio_identity_at_coordinate_directions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    for _ in 0..100 {
        let (series, _, scheme) = random_instance(&mut rng);
        let d = series.dim();
        let i = rng.random_range(0..d);
        let t = rng.random_range(0.3..1.5);
        let mut coords = vec![0.0; d];
        coords[i] = t;
        let dir = Direction::new(coords).unwrap();
        let level = ceil_level(scheme.k_n() as f64 * t);
        let (Ok(a), Ok(b)) = (
            theta1(
                &series,
                &dir,
                scheme,
                HomogeneousNorm::ConstantOneDiagnostic,
            ),
            theta2(&series, &dir, t, scheme),
        ) else {
            continue;
        };
        let lhs = a.theta_hat * (level - 1) as f64;
        let rhs = b.theta_hat * scheme.k_n() as f64 * t;
        assert!(rel_close(lhs, rhs, 1e-12), "{lhs} vs {rhs}");
        checked += 1;
    }
    assert!(checked >= 80, "only {checked} usable instances");
}

#[test]
fn block_permutation_leaves_estimates_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let (series, tau, scheme) = random_instance(&mut rng);
        let mut order: Vec<usize> = (0..scheme.k_n()).collect();
        order.shuffle(&mut rng);
        let mut rows: Vec<Vec<f64>> = order
            .iter()
            .flat_map(|&j| scheme.block(j).map(|l| series.row(l)))
            .collect();
        rows.extend((scheme.n_used()..series.len()).map(|l| series.row(l)));
        let permuted = MultivariateSeries::from_rows(&rows).unwrap();

        let norm = HomogeneousNorm::default();
        let a = theta1(&series, &tau, scheme, norm).map(|r| r.theta_hat);
        let b = theta1(&permuted, &tau, scheme, norm).map(|r| r.theta_hat);
        assert_eq!(a, b);
        let a = theta2(&series, &tau, 1.0, scheme).map(|r| r.theta_hat);
        let b = theta2(&permuted, &tau, 1.0, scheme).map(|r| r.theta_hat);
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn theta2_stays_in_range(
        cols in prop::collection::vec(prop::collection::vec(0u16..50, 120), 1..=3),
        k_n in 2usize..=40,
        kappa in 0.05f64..2.0,
        raw_tau in prop::collection::vec(0.1f64..2.0, 3),
    ) {
        let d = cols.len();
        let series = MultivariateSeries::from_columns(
            cols.into_iter().map(|c| c.into_iter().map(f64::from).collect()).collect(),
        )
        .unwrap();
        let scheme = BlockScheme::with_block_count(120, k_n).unwrap();
        let tau = Direction::new(raw_tau[..d].to_vec()).unwrap();
        if let Ok(r) = theta2(&series, &tau, kappa, scheme) {
            prop_assert!(r.theta_hat >= 0.0);
            prop_assert!(r.theta_hat <= (k_n as f64).ln() / kappa + 1e-12);
            prop_assert!(r.h_hat >= 1.0 / k_n as f64);
        }
    }
}

#[test]
fn averaged_estimator_is_nearly_unbiased_on_iid_data() {
    let tau0 = Direction::new(vec![0.6, 0.8]).unwrap();
    let scheme = BlockScheme::with_block_count(2000, 100).unwrap();
    let values: Vec<f64> = (0..500u64)
        .into_par_iter()
        .filter_map(|rep| {
            let s = simulate_iid_exp(2000, Seed(9000).offset(rep)).unwrap();
            theta3(&s, &tau0, 0.5, 1.5, scheme, 64).ok()
        })
        .collect();
    assert!(values.len() >= 495);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!((mean - 1.0).abs() <= 0.05, "mean {mean}");
}

#[test]
fn trapezoid_refinement_converges() {
    let tau0 = Direction::new(vec![0.6, 0.8]).unwrap();
    let scheme = BlockScheme::with_block_count(2000, 100).unwrap();
    for rep in 0..5 {
        let s = simulate_iid_exp(2000, Seed(77).offset(rep)).unwrap();
        let q64 = theta3(&s, &tau0, 0.5, 1.5, scheme, 64).unwrap();
        let q128 = theta3(&s, &tau0, 0.5, 1.5, scheme, 128).unwrap();
        let reference = theta3(&s, &tau0, 0.5, 1.5, scheme, 1024).unwrap();

        // Integrand sampled finely; its total variation bounds the trapezoid
        // error of a piecewise-constant function by TV * h.
        let fine: Vec<f64> = (0..=1023)
            .map(|j| {
                let kappa = 0.5 + j as f64 / 1023.0;
                let dir = tau0.scaled(kappa).unwrap();
                theta1(&s, &dir, scheme, HomogeneousNorm::ConstantOneDiagnostic)
                    .unwrap()
                    .theta_hat
            })
            .collect();
        let tv: f64 = fine.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        let bound = tv * (1.0 / 63.0);
        assert!((q64 - q128).abs() <= bound, "{q64} {q128} bound {bound}");
        assert!((q128 - reference).abs() <= tv / 127.0);
    }
}
