//! Block-declustering estimators of the extremal index function `theta(tau)`.
//!
//! * [`theta1`] rescales `tau` by a homogeneous norm `L` and takes the ratio
//!   of `-ln` of the fraction of exceedance-free blocks to the mean number of
//!   exceedances per block.
//! * [`theta2`] works on the rank-standardized series `Z_l = max_i tau_i Y_i`
//!   and needs no normalization; its threshold is an order statistic of `Z`.
//! * [`theta3`] averages the unnormalized ratio along the ray
//!   `{kappa * tau0 : sigma <= kappa <= phi}`.
//!
//! None of the estimates is clamped to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{
    block_exceedance_counts, ceil_level, estimate_threshold_vector, order_statistic_threshold,
    univariate_block_counts, z_series_from_ranks, BlockCounts, BlockScheme, Direction,
    MultivariateSeries, RankMatrix,
};

/// The normalization `L` used by [`theta1`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HomogeneousNorm {
    /// `L(tau) = c * (sum |tau_i|^a)^(1/a)`.
    PowerNorm { c: f64, a: f64 },
    /// `L = 1`. Not homogeneous; only for cross-checks against [`theta2`] on
    /// coordinate directions.
    ConstantOneDiagnostic,
}

impl HomogeneousNorm {
    pub fn power(c: f64, a: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "norm parameters must be positive, got c = {c}, a = {a}"
            )));
        }
        Ok(Self::PowerNorm { c, a })
    }

    pub fn eval(&self, tau: &Direction) -> f64 {
        match *self {
            Self::PowerNorm { c, a } => {
                let s: f64 = tau.as_slice().iter().map(|t| t.abs().powf(a)).sum();
                c * s.powf(1.0 / a)
            }
            Self::ConstantOneDiagnostic => 1.0,
        }
    }
}

impl Default for HomogeneousNorm {
    fn default() -> Self {
        Self::PowerNorm { c: 1.0, a: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub theta_hat: f64,
    /// Fraction of blocks without exceedances.
    pub h_hat: f64,
    /// Mean number of exceedances per block.
    pub neg_log_htilde_hat: f64,
    pub scheme: BlockScheme,
    pub direction: Direction,
}

/// `(fraction of zero-count blocks, mean block count)`.
pub fn block_statistics(counts: &BlockCounts) -> (f64, f64) {
    let k = counts.k_n() as f64;
    let zeros = counts.0.iter().filter(|&&c| c == 0).count() as f64;
    (zeros / k, counts.total() as f64 / k)
}

/// Ratio `-ln H_hat(sigma) / -ln Htilde_hat(sigma)` with thresholds at `sigma`.
fn ratio_at(
    series: &MultivariateSeries,
    sigma: &Direction,
    scheme: BlockScheme,
) -> Result<(f64, f64, f64)> {
    let u = estimate_threshold_vector(series, sigma, scheme)?;
    let counts = block_exceedance_counts(series, &u, scheme)?;
    let (h, m) = block_statistics(&counts);
    if h == 0.0 {
        return Err(Error::AllBlocksExceed { k_n: scheme.k_n() });
    }
    if m == 0.0 {
        return Err(Error::NoExceedances);
    }
    Ok((-h.ln() / m + 0.0, h, m))
}

/// First estimator: thresholds at `tau / L(tau)`.
pub fn theta1(
    series: &MultivariateSeries,
    tau: &Direction,
    scheme: BlockScheme,
    norm: HomogeneousNorm,
) -> Result<EstimatorReport> {
    let l = norm.eval(tau);
    let sigma = Direction::new(tau.as_slice().iter().map(|t| t / l).collect())?;
    let (theta_hat, h_hat, neg_log_htilde_hat) = ratio_at(series, &sigma, scheme)?;
    Ok(EstimatorReport {
        theta_hat,
        h_hat,
        neg_log_htilde_hat,
        scheme,
        direction: tau.clone(),
    })
}

/// Second estimator: exceedances of the rank-standardized series `Z` over its
/// `ceil(k_n * kappa)`-th largest value.
pub fn theta2(
    series: &MultivariateSeries,
    tau: &Direction,
    kappa: f64,
    scheme: BlockScheme,
) -> Result<EstimatorReport> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    if tau.dim() != series.dim() {
        return Err(Error::DimensionMismatch {
            expected: series.dim(),
            got: tau.dim(),
        });
    }
    let ranks = RankMatrix::from_series(series, scheme)?;
    let z = z_series_from_ranks(&ranks, tau);
    let level = ceil_level(scheme.k_n() as f64 * kappa).max(1);
    if level > scheme.n_used() {
        return Err(Error::InvalidParameter(format!(
            "kappa level {level} exceeds the {} usable observations",
            scheme.n_used()
        )));
    }
    let v = order_statistic_threshold(&z, level)?;
    let counts = univariate_block_counts(&z, v, scheme);
    let (h_hat, neg_log_htilde_hat) = block_statistics(&counts);
    if h_hat == 0.0 {
        return Err(Error::AllBlocksExceed { k_n: scheme.k_n() });
    }
    Ok(EstimatorReport {
        theta_hat: -h_hat.ln() / kappa + 0.0,
        h_hat,
        neg_log_htilde_hat,
        scheme,
        direction: tau.clone(),
    })
}

/// Averaged estimator over the ray through `tau0`, trapezoid rule on
/// `quad_points` uniform nodes in `[sigma, phi]`.
pub fn theta3(
    series: &MultivariateSeries,
    tau0: &Direction,
    sigma: f64,
    phi: f64,
    scheme: BlockScheme,
    quad_points: usize,
) -> Result<f64> {
    if !(sigma > 0.0 && sigma < phi && phi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < sigma < phi, got sigma = {sigma}, phi = {phi}"
        )));
    }
    if quad_points < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 quadrature points, got {quad_points}"
        )));
    }
    let h = (phi - sigma) / (quad_points - 1) as f64;
    let mut acc = 0.0;
    for q in 0..quad_points {
        let kappa = if q == quad_points - 1 {
            phi
        } else {
            sigma + q as f64 * h
        };
        let node = tau0.scaled(kappa)?;
        let (r, _, _) = ratio_at(series, &node, scheme).map_err(|e| Error::AtKappa {
            kappa,
            source: Box::new(e),
        })?;
        let w = if q == 0 || q == quad_points - 1 {
            0.5
        } else {
            1.0
        };
        acc += w * r;
    }
    Ok(acc / (quad_points - 1) as f64)
}
