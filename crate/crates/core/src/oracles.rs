//! Exact values of `theta(tau)` and of the stable tail dependence function
//! `S(tau) = -ln Htilde(tau)` for the three benchmark processes, plus the
//! closed-form asymptotic variances available for the i.i.d. benchmark.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::estimators::HomogeneousNorm;
use crate::series::Direction;
use crate::simulators::Seed;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Printed extremal indices of the squared ARCH(1) components at
/// `lambda = 0.7` and `lambda = 0.3`.
pub const ARCH_THETA_07: f64 = 0.579;
pub const ARCH_THETA_03: f64 = 0.887;

pub const DEFAULT_SERIES_TOL: f64 = 1e-14;

/// Logistic bivariate extreme value law `exp(-B(x1, x2))` with
/// `B(x1, x2) = (x1^(-1/alpha) + x2^(-1/alpha))^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticTail {
    alpha: f64,
}

impl LogisticTail {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "logistic alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `B(x1, x2)` for `x1, x2 > 0`.
    pub fn b(&self, x1: f64, x2: f64) -> f64 {
        self.b_inverse(1.0 / x1, 1.0 / x2)
    }

    /// `B(1/y1, 1/y2) = (y1^(1/alpha) + y2^(1/alpha))^alpha`, defined for
    /// `y1, y2 >= 0` so that a zero argument means "that margin is absent".
    pub fn b_inverse(&self, y1: f64, y2: f64) -> f64 {
        let m = y1.max(y2);
        if m == 0.0 {
            return 0.0;
        }
        if self.alpha == 1.0 {
            return y1 + y2;
        }
        let p = 1.0 / self.alpha;
        m * ((y1 / m).powf(p) + (y2 / m).powf(p)).powf(self.alpha)
    }
}

pub fn logistic_b(x1: f64, x2: f64, alpha: f64) -> Result<f64> {
    if !(x1 > 0.0 && x2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "B needs positive arguments, got ({x1}, {x2})"
        )));
    }
    Ok(LogisticTail::new(alpha)?.b(x1, x2))
}

fn check_bivariate(tau: &Direction) -> Result<(f64, f64)> {
    match *tau.as_slice() {
        [t1, t2] => Ok((t1, t2)),
        _ => Err(Error::DimensionMismatch {
            expected: 2,
            got: tau.dim(),
        }),
    }
}

fn check_rho(rho1: f64, rho2: f64) -> Result<()> {
    if !(rho1 > 0.0 && rho1 < 1.0 && rho2 > 0.0 && rho2 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "autoregressive coefficients must lie in (0, 1), got ({rho1}, {rho2})"
        )));
    }
    Ok(())
}

pub fn stable_tail_iid(tau: &Direction) -> f64 {
    tau.as_slice().iter().sum()
}

pub fn theta_iid(_tau: &Direction) -> f64 {
    1.0
}

fn ar1_terms(t1: f64, t2: f64, rho1: f64, rho2: f64, tail: LogisticTail, tol: f64) -> (f64, f64) {
    let (mut a1, mut a2) = ((1.0 - rho1) * t1, (1.0 - rho2) * t2);
    let first = tail.b_inverse(a1, a2);
    let mut sum = first;
    for _ in 0..100_000 {
        a1 *= rho1;
        a2 *= rho2;
        let term = tail.b_inverse(a1, a2);
        sum += term;
        if term < tol * sum {
            break;
        }
    }
    (first, sum)
}

/// `S(tau) = sum_k B(((1-rho1) rho1^k tau1)^-1, ((1-rho2) rho2^k tau2)^-1)`,
/// truncated once a term drops below `tol` times the running sum.
pub fn stable_tail_ar1(
    tau: &Direction,
    rho1: f64,
    rho2: f64,
    tail: LogisticTail,
    tol: f64,
) -> Result<f64> {
    let (t1, t2) = check_bivariate(tau)?;
    check_rho(rho1, rho2)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    Ok(ar1_terms(t1, t2, rho1, rho2, tail, tol).1)
}

/// `theta(tau) = (S(tau) - S(rho1 tau1, rho2 tau2)) / S(tau)`.
///
/// The shifted sum is the original one without its `k = 0` term, so the
/// numerator is evaluated as that term directly.
pub fn theta_ar1(
    tau: &Direction,
    rho1: f64,
    rho2: f64,
    tail: LogisticTail,
    tol: f64,
) -> Result<f64> {
    let (t1, t2) = check_bivariate(tau)?;
    check_rho(rho1, rho2)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let (first, sum) = ar1_terms(t1, t2, rho1, rho2, tail, tol);
    Ok(first / sum)
}

pub fn theta_arch(tau: &Direction, theta1_comp: f64, theta2_comp: f64) -> Result<f64> {
    let (t1, t2) = check_bivariate(tau)?;
    for th in [theta1_comp, theta2_comp] {
        if !(th > 0.0 && th <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "component extremal index must lie in (0, 1], got {th}"
            )));
        }
    }
    Ok((theta1_comp * t1 + theta2_comp * t2) / (t1 + t2))
}

/// Benchmark process with known `theta` and `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProcessOracle {
    IidExp,
    Arch {
        theta1: f64,
        theta2: f64,
    },
    Ar1 {
        rho1: f64,
        rho2: f64,
        tail: LogisticTail,
        tol: f64,
    },
}

impl ProcessOracle {
    pub fn theta(&self, tau: &Direction) -> Result<f64> {
        match *self {
            Self::IidExp => Ok(theta_iid(tau)),
            Self::Arch { theta1, theta2 } => theta_arch(tau, theta1, theta2),
            Self::Ar1 {
                rho1,
                rho2,
                tail,
                tol,
            } => theta_ar1(tau, rho1, rho2, tail, tol),
        }
    }

    pub fn stable_tail(&self, tau: &Direction) -> Result<f64> {
        match *self {
            // Independent components in both cases.
            Self::IidExp | Self::Arch { .. } => Ok(stable_tail_iid(tau)),
            Self::Ar1 {
                rho1,
                rho2,
                tail,
                tol,
            } => stable_tail_ar1(tau, rho1, rho2, tail, tol),
        }
    }

    /// Univariate extremal indices `theta_i` of the components.
    pub fn component_indices(&self) -> [f64; 2] {
        match *self {
            Self::IidExp => [1.0, 1.0],
            Self::Arch { theta1, theta2 } => [theta1, theta2],
            Self::Ar1 { rho1, rho2, .. } => [1.0 - rho1, 1.0 - rho2],
        }
    }
}

/// `ln E(lambda xi^2)^kappa` for standard Gaussian `xi`.
fn log_moment(lambda: f64, kappa: f64) -> f64 {
    kappa * (2.0 * lambda).ln() + ln_gamma(kappa + 0.5) - ln_gamma(0.5)
}

/// Positive root of `E(lambda xi^2)^kappa = 1`, the tail index of the
/// stationary squared ARCH(1) law.
pub fn solve_kappa(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 2.0 * EULER_GAMMA.exp()) {
        return Err(Error::NoRoot { lambda });
    }
    let f = |k: f64| log_moment(lambda, k);
    // f is convex with f(0) = 0 and f'(0) < 0: negative up to the root.
    let (mut lo, mut hi) = if f(1.0) < 0.0 {
        let mut hi = 2.0;
        while f(hi) < 0.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::NoRoot { lambda });
            }
        }
        (hi / 2.0, hi)
    } else {
        let mut lo = 0.5;
        while f(lo) >= 0.0 {
            lo /= 2.0;
            if lo < 1e-300 {
                return Err(Error::NoRoot { lambda });
            }
        }
        (lo, lo * 2.0)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monte Carlo estimate of `P(Xt * sup_j prod_{l<=j} lambda xi_l^2 <= 1)`
/// with `Xt` Pareto(`kappa`) on `[1, inf)`.
///
/// A path stops as a success once the running product falls below `1e-10`.
pub fn mc_theta_component_arch(lambda: f64, kappa: f64, n_paths: usize, seed: Seed) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 2.0 * EULER_GAMMA.exp()) {
        return Err(Error::NoRoot { lambda });
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    if n_paths < 10_000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10^4 paths, got {n_paths}"
        )));
    }
    let mut rng = seed.rng();
    let mut clear = 0usize;
    for _ in 0..n_paths {
        let u: f64 = 1.0 - rng.random::<f64>();
        let start = u.powf(-1.0 / kappa);
        let mut prod = 1.0;
        loop {
            let xi: f64 = rng.sample(StandardNormal);
            prod *= lambda * xi * xi;
            if start * prod > 1.0 {
                break;
            }
            if prod < 1e-10 {
                clear += 1;
                break;
            }
        }
    }
    Ok(clear as f64 / n_paths as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticEstimator {
    Estimator1,
    Estimator2,
}

/// `(e^x - 1 - x) / x^2`, by Taylor series below `1e-4`.
pub fn excess_exp_ratio(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        0.5 + x / 6.0 + x * x / 24.0 + x * x * x / 120.0
    } else {
        (x.exp_m1() - x) / (x * x)
    }
}

/// Asymptotic variance of `sqrt(k_n) (theta_hat - theta)` on the i.i.d.
/// benchmark.
pub fn asym_var_iid(
    which: AsymptoticEstimator,
    tau: &Direction,
    norm: HomogeneousNorm,
    kappa: f64,
) -> Result<f64> {
    match which {
        AsymptoticEstimator::Estimator1 => {
            if !matches!(norm, HomogeneousNorm::PowerNorm { .. }) {
                return Err(Error::InvalidParameter(
                    "asymptotic variance of the first estimator needs a power norm".into(),
                ));
            }
            Ok(excess_exp_ratio(stable_tail_iid(tau) / norm.eval(tau)))
        }
        AsymptoticEstimator::Estimator2 => {
            if !(kappa > 0.0 && kappa.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "kappa must be positive, got {kappa}"
                )));
            }
            Ok(excess_exp_ratio(kappa))
        }
    }
}
