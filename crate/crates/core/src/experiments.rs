//! Monte Carlo study of the estimators on the benchmark processes.
//!
//! A study simulates `replications` series, evaluates every
//! `(k_n, estimator, angle)` cell on each of them, and summarizes each cell
//! against the process oracle. Replication `rep` uses seed `base_seed + rep`
//! and summaries are computed from the collected sample in replication order,
//! so results do not depend on the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimators::{theta1, theta2, theta3, HomogeneousNorm};
use crate::oracles::{
    asym_var_iid, mc_theta_component_arch, solve_kappa, AsymptoticEstimator, LogisticTail,
    ProcessOracle, ARCH_THETA_03, ARCH_THETA_07, DEFAULT_SERIES_TOL,
};
use crate::series::{BlockScheme, Direction, MultivariateSeries};
use crate::simulators::{
    simulate_ar1, simulate_arch, simulate_iid_exp, Ar1Params, ArchParams, Seed,
    DEFAULT_ARCH_BURNIN, RNG_IDENTITY,
};

/// Directions `(cos phi_k, sin phi_k)` with `phi_k = k pi / 22`, `k = 1..=count`.
pub fn angle_grid(count: usize) -> Vec<(f64, Direction)> {
    (1..=count)
        .map(|k| {
            let phi = k as f64 * std::f64::consts::PI / 22.0;
            let (s, c) = phi.sin_cos();
            // cos(pi/2) evaluates to ~6e-17; snap it so k = 11 is the axis (0, 1).
            let snap = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x.max(0.0) };
            let tau = Direction::new(vec![snap(c), snap(s)])
                .expect("angle in [0, pi] gives a nonnegative direction");
            (phi, tau)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProcessSpec {
    Iid,
    Arch {
        eta1: f64,
        eta2: f64,
        lambda1: f64,
        lambda2: f64,
        #[serde(default = "default_arch_burnin")]
        burnin: usize,
        /// Component extremal indices for the oracle. Defaults to the
        /// tabulated values when `lambda = (0.7, 0.3)`, otherwise estimated
        /// by Monte Carlo.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta_components: Option<[f64; 2]>,
    },
    Ar1 {
        rho1: f64,
        rho2: f64,
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        burnin: Option<usize>,
    },
}

fn default_arch_burnin() -> usize {
    DEFAULT_ARCH_BURNIN
}

const ORACLE_MC_PATHS: usize = 100_000;

fn tabulated_arch_theta(lambda: f64) -> Option<f64> {
    if lambda == 0.7 {
        Some(ARCH_THETA_07)
    } else if lambda == 0.3 {
        Some(ARCH_THETA_03)
    } else {
        None
    }
}

impl ProcessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Iid => "iid",
            Self::Arch { .. } => "arch",
            Self::Ar1 { .. } => "ar1",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Iid => Ok(()),
            Self::Arch {
                theta_components, ..
            } => {
                self.arch_params().unwrap().validate()?;
                if let Some(th) = theta_components {
                    if th.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
                        return Err(Error::InvalidConfig(format!(
                            "theta_components must lie in (0, 1], got {th:?}"
                        )));
                    }
                }
                Ok(())
            }
            Self::Ar1 { .. } => self.ar1_params().unwrap().validate(),
        }
    }

    fn arch_params(&self) -> Option<ArchParams> {
        match *self {
            Self::Arch {
                eta1,
                eta2,
                lambda1,
                lambda2,
                burnin,
                ..
            } => Some(ArchParams {
                eta1,
                eta2,
                lambda1,
                lambda2,
                burnin,
            }),
            _ => None,
        }
    }

    fn ar1_params(&self) -> Option<Ar1Params> {
        match *self {
            Self::Ar1 {
                rho1,
                rho2,
                alpha,
                burnin,
            } => Some(Ar1Params {
                rho1,
                rho2,
                alpha,
                burnin,
            }),
            _ => None,
        }
    }

    pub fn simulate(&self, n: usize, seed: Seed) -> Result<MultivariateSeries> {
        match self {
            Self::Iid => simulate_iid_exp(n, seed),
            Self::Arch { .. } => simulate_arch(n, &self.arch_params().unwrap(), seed),
            Self::Ar1 { .. } => simulate_ar1(n, &self.ar1_params().unwrap(), seed),
        }
    }

    /// The oracle for this process; `seed` drives the Monte Carlo fallback
    /// for untabulated ARCH component indices.
    pub fn oracle(&self, seed: Seed) -> Result<ProcessOracle> {
        match *self {
            Self::Iid => Ok(ProcessOracle::IidExp),
            Self::Arch {
                lambda1,
                lambda2,
                theta_components,
                ..
            } => {
                let [theta1, theta2] = match theta_components {
                    Some(th) => th,
                    None => {
                        let mut th = [0.0; 2];
                        for (i, lambda) in [lambda1, lambda2].into_iter().enumerate() {
                            th[i] = match tabulated_arch_theta(lambda) {
                                Some(t) => t,
                                None => mc_theta_component_arch(
                                    lambda,
                                    solve_kappa(lambda)?,
                                    ORACLE_MC_PATHS,
                                    seed.offset(i as u64),
                                )?,
                            };
                        }
                        th
                    }
                };
                Ok(ProcessOracle::Arch { theta1, theta2 })
            }
            Self::Ar1 {
                rho1, rho2, alpha, ..
            } => Ok(ProcessOracle::Ar1 {
                rho1,
                rho2,
                tail: LogisticTail::new(alpha)?,
                tol: DEFAULT_SERIES_TOL,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EstimatorSpec {
    Theta1 {
        c: f64,
        a: f64,
    },
    Theta2 {
        kappa: f64,
    },
    Theta3 {
        sigma: f64,
        phi: f64,
        #[serde(default = "default_quad_points")]
        quad_points: usize,
    },
}

pub const DEFAULT_QUAD_POINTS: usize = 64;

fn default_quad_points() -> usize {
    DEFAULT_QUAD_POINTS
}

impl EstimatorSpec {
    pub fn label(&self) -> String {
        match self {
            Self::Theta1 { c, a } => format!("theta1[L={c};{a}]"),
            Self::Theta2 { kappa } => format!("theta2[kappa={kappa}]"),
            Self::Theta3 {
                sigma,
                phi,
                quad_points,
            } => format!("theta3[{sigma}..{phi};q={quad_points}]"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Theta1 { c, a } => HomogeneousNorm::power(c, a).map(|_| ()),
            Self::Theta2 { kappa } if kappa > 0.0 && kappa.is_finite() => Ok(()),
            Self::Theta2 { kappa } => Err(Error::InvalidConfig(format!(
                "kappa must be positive, got {kappa}"
            ))),
            Self::Theta3 {
                sigma,
                phi,
                quad_points,
            } if sigma > 0.0 && sigma < phi && phi.is_finite() && quad_points >= 2 => Ok(()),
            Self::Theta3 { .. } => Err(Error::InvalidConfig(
                "theta3 needs 0 < sigma < phi and quad_points >= 2".into(),
            )),
        }
    }

    pub fn estimate(
        &self,
        series: &MultivariateSeries,
        tau: &Direction,
        scheme: BlockScheme,
    ) -> Result<f64> {
        match *self {
            Self::Theta1 { c, a } => {
                theta1(series, tau, scheme, HomogeneousNorm::PowerNorm { c, a })
                    .map(|r| r.theta_hat)
            }
            Self::Theta2 { kappa } => theta2(series, tau, kappa, scheme).map(|r| r.theta_hat),
            Self::Theta3 {
                sigma,
                phi,
                quad_points,
            } => theta3(series, tau, sigma, phi, scheme, quad_points),
        }
    }

    /// Closed-form asymptotic variance on the i.i.d. benchmark, if known.
    fn iid_asymptotic_variance(&self, tau: &Direction) -> Option<f64> {
        match *self {
            Self::Theta1 { c, a } => asym_var_iid(
                AsymptoticEstimator::Estimator1,
                tau,
                HomogeneousNorm::PowerNorm { c, a },
                1.0,
            )
            .ok(),
            Self::Theta2 { kappa } => asym_var_iid(
                AsymptoticEstimator::Estimator2,
                tau,
                HomogeneousNorm::default(),
                kappa,
            )
            .ok(),
            Self::Theta3 { .. } => None,
        }
    }
}

fn default_angle_count() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub process: ProcessSpec,
    pub n: usize,
    pub replications: usize,
    pub k_n_grid: Vec<usize>,
    pub estimators: Vec<EstimatorSpec>,
    #[serde(default = "default_angle_count")]
    pub angle_count: usize,
    pub base_seed: Seed,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if self.k_n_grid.is_empty() || self.estimators.is_empty() || self.angle_count == 0 {
            return Err(Error::InvalidConfig(
                "k_n_grid, estimators and angle_count must be nonempty".into(),
            ));
        }
        for &k in &self.k_n_grid {
            if k == 0 || k > self.n || self.n / k < 2 {
                return Err(Error::InvalidConfig(format!(
                    "k_n = {k} needs 1 <= k_n <= n and floor(n / k_n) >= 2 (n = {})",
                    self.n
                )));
            }
        }
        for e in &self.estimators {
            e.validate()?;
        }
        self.process
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// An [`ExperimentConfig`] plus the run-level keys `output` and `rng`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub output: Option<String>,
    pub rng: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::InvalidConfig("top level must be a JSON object".into()))?;
        let take_string =
            |obj: &mut serde_json::Map<String, serde_json::Value>, key: &str| match obj.remove(key)
            {
                None | Some(serde_json::Value::Null) => Ok(None),
                Some(serde_json::Value::String(s)) => Ok(Some(s)),
                Some(other) => Err(Error::InvalidConfig(format!(
                    "key `{key}` must be a string, got {other}"
                ))),
            };
        let output = take_string(obj, "output")?;
        let rng = take_string(obj, "rng")?;
        if let Some(r) = &rng {
            if r != RNG_IDENTITY {
                return Err(Error::InvalidConfig(format!(
                    "key `rng` is {r:?}, this build uses {RNG_IDENTITY:?}"
                )));
            }
        }
        let experiment: ExperimentConfig =
            serde_json::from_value(value).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        experiment.validate()?;
        Ok(Self {
            experiment,
            output,
            rng,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub process: String,
    pub estimator: String,
    pub k_n: usize,
    pub r_n: usize,
    pub angle_index: usize,
    pub phi: f64,
    pub tau: Direction,
    pub theta_true: f64,
    pub mean: Option<f64>,
    pub bias: Option<f64>,
    pub rmse: Option<f64>,
    pub sample_variance: Option<f64>,
    pub variance_ratio: Option<f64>,
    pub successes: usize,
    pub failures: usize,
}

/// `k_n * sample_variance / asym_var`.
pub fn variance_ratio(sample_variance: f64, k_n: usize, asym_var: f64) -> Result<f64> {
    if !(asym_var > 0.0) {
        return Err(Error::InvalidVariance(asym_var));
    }
    Ok(k_n as f64 * sample_variance / asym_var)
}

/// Mean, mean squared error against `truth`, and the unbiased sample variance.
pub fn summarize(values: &[f64], truth: f64) -> Option<(f64, f64, Option<f64>)> {
    if values.is_empty() {
        return None;
    }
    let m = values.len() as f64;
    let mean = values.iter().sum::<f64>() / m;
    let mse = values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / m;
    let var = (values.len() >= 2)
        .then(|| values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0));
    Some((mean, mse, var))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub rows: Vec<ResultRow>,
}

impl StudyResult {
    pub fn empty_cells(&self) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.successes == 0).collect()
    }

    pub fn ensure_complete(&self) -> Result<()> {
        let empty = self.empty_cells();
        if empty.is_empty() {
            return Ok(());
        }
        let names: Vec<String> = empty
            .iter()
            .map(|r| format!("{}/k_n={}/angle={}", r.estimator, r.k_n, r.angle_index))
            .collect();
        Err(Error::CellEmpty(empty.len(), names.join(", ")))
    }
}

struct Cell {
    scheme: BlockScheme,
    estimator: EstimatorSpec,
    angle: usize,
}

/// Runs the study on the current rayon pool.
pub fn run_monte_carlo(config: &ExperimentConfig) -> Result<StudyResult> {
    config.validate()?;
    let angles = angle_grid(config.angle_count);
    let oracle = config.process.oracle(config.base_seed)?;
    let truths = angles
        .iter()
        .map(|(_, tau)| oracle.theta(tau))
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    for &k_n in &config.k_n_grid {
        let scheme = BlockScheme::with_block_count(config.n, k_n)?;
        for &estimator in &config.estimators {
            for angle in 0..angles.len() {
                cells.push(Cell {
                    scheme,
                    estimator,
                    angle,
                });
            }
        }
    }

    let estimates: Vec<Vec<Option<f64>>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| -> Result<Vec<Option<f64>>> {
            let series = config
                .process
                .simulate(config.n, config.base_seed.offset(rep as u64))?;
            Ok(cells
                .iter()
                .map(|c| {
                    c.estimator
                        .estimate(&series, &angles[c.angle].1, c.scheme)
                        .ok()
                        .filter(|v| v.is_finite())
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let is_iid = matches!(config.process, ProcessSpec::Iid);
    let rows = cells
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let values: Vec<f64> = estimates.iter().filter_map(|rep| rep[idx]).collect();
            let (phi, tau) = &angles[c.angle];
            let truth = truths[c.angle];
            let summary = summarize(&values, truth);
            let sample_variance = summary.and_then(|s| s.2);
            let variance_ratio = match (is_iid, sample_variance) {
                (true, Some(v)) => c
                    .estimator
                    .iid_asymptotic_variance(tau)
                    .and_then(|a| variance_ratio(v, c.scheme.k_n(), a).ok()),
                _ => None,
            };
            ResultRow {
                process: config.process.name().to_string(),
                estimator: c.estimator.label(),
                k_n: c.scheme.k_n(),
                r_n: c.scheme.r_n(),
                angle_index: c.angle + 1,
                phi: *phi,
                tau: tau.clone(),
                theta_true: truth,
                mean: summary.map(|s| s.0),
                bias: summary.map(|s| s.0 - truth),
                rmse: summary.map(|s| s.1.sqrt()),
                sample_variance,
                variance_ratio,
                successes: values.len(),
                failures: config.replications - values.len(),
            }
        })
        .collect();
    Ok(StudyResult { rows })
}

/// Runs the study on a dedicated pool of `threads` workers (`None`: rayon's
/// default).
pub fn run_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<StudyResult> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_monte_carlo(config))
}
