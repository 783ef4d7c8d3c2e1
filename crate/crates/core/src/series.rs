//! Series layout and the shared machinery of the block estimators.
//!
//! Every estimator in this crate works on the first `n_used = k_n * r_n`
//! observations of a [`MultivariateSeries`], split into `k_n` consecutive
//! blocks of length `r_n`. Observations past `n_used` never enter a rank, an
//! order statistic, or a block count.
//!
//! An observation `X_l` *exceeds* a threshold vector `u` when at least one
//! component is strictly larger than its threshold. A threshold of `+inf`
//! stands for a zero direction component and is never exceeded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n x d` block of finite observations, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl MultivariateSeries {
    /// Builds a series from time-ordered rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidSeries("series has no observations".into()));
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::InvalidSeries("series has no components".into()));
        }
        let mut data = vec![0.0; n * d];
        for (l, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidSeries(format!(
                    "row {} has {} values, expected {}",
                    l,
                    row.len(),
                    d
                )));
            }
            for (i, &x) in row.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFinite { row: l, column: i });
                }
                data[i * n + l] = x;
            }
        }
        Ok(Self { data, n, d })
    }

    /// Builds a series from `d` columns of equal length.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let d = columns.len();
        if d == 0 {
            return Err(Error::InvalidSeries("series has no components".into()));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::InvalidSeries("series has no observations".into()));
        }
        let mut data = Vec::with_capacity(n * d);
        for (i, col) in columns.into_iter().enumerate() {
            if col.len() != n {
                return Err(Error::InvalidSeries(format!(
                    "column {} has {} values, expected {}",
                    i,
                    col.len(),
                    n
                )));
            }
            if let Some(l) = col.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite { row: l, column: i });
            }
            data.extend(col);
        }
        Ok(Self { data, n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn value(&self, l: usize, i: usize) -> f64 {
        self.data[i * self.n + l]
    }

    pub fn row(&self, l: usize) -> Vec<f64> {
        (0..self.d).map(|i| self.value(l, i)).collect()
    }

    /// Column maxima `M_{n,i}` over the whole series.
    pub fn column_max(&self) -> Vec<f64> {
        (0..self.d)
            .map(|i| {
                self.column(i)
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

/// `k_n` blocks of `r_n` consecutive observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockScheme {
    k_n: usize,
    r_n: usize,
}

impl BlockScheme {
    pub fn new(k_n: usize, r_n: usize) -> Result<Self> {
        if k_n == 0 || r_n == 0 {
            return Err(Error::InvalidScheme(format!(
                "k_n = {k_n} and r_n = {r_n} must both be positive"
            )));
        }
        Ok(Self { k_n, r_n })
    }

    /// `k_n` blocks of length `floor(n / k_n)`.
    pub fn with_block_count(n: usize, k_n: usize) -> Result<Self> {
        if k_n == 0 || k_n > n {
            return Err(Error::InvalidScheme(format!(
                "k_n = {k_n} must lie in 1..={n}"
            )));
        }
        Self::new(k_n, n / k_n)
    }

    pub fn k_n(&self) -> usize {
        self.k_n
    }

    pub fn r_n(&self) -> usize {
        self.r_n
    }

    pub fn n_used(&self) -> usize {
        self.k_n * self.r_n
    }

    /// Observation indices (0-based) of block `j` (0-based).
    pub fn block(&self, j: usize) -> std::ops::Range<usize> {
        j * self.r_n..(j + 1) * self.r_n
    }

    pub fn check_fits(&self, n: usize) -> Result<()> {
        if self.n_used() > n {
            return Err(Error::InvalidScheme(format!(
                "{} blocks of length {} need {} observations, series has {}",
                self.k_n,
                self.r_n,
                self.n_used(),
                n
            )));
        }
        Ok(())
    }
}

/// A direction `tau` in `[0, inf)^d` with at least one positive entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    pub fn new(tau: Vec<f64>) -> Result<Self> {
        if tau.is_empty() {
            return Err(Error::InvalidDirection("empty direction".into()));
        }
        if tau.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidDirection(format!(
                "entries must be finite and nonnegative: {tau:?}"
            )));
        }
        if tau.iter().all(|t| *t == 0.0) {
            return Err(Error::InvalidDirection("all entries are zero".into()));
        }
        Ok(Self(tau))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `c * tau` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Self::new(self.0.iter().map(|t| c * t).collect())
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

/// Per-component thresholds; `+inf` marks a zero direction component.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector(pub Vec<f64>);

/// Number of exceedances in each block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCounts(pub Vec<usize>);

impl BlockCounts {
    pub fn k_n(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// Ascending ranks (minimum rank on ties) of each column over `n_used` rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankMatrix {
    ranks: Vec<usize>,
    n_used: usize,
    d: usize,
}

impl RankMatrix {
    pub fn from_series(series: &MultivariateSeries, scheme: BlockScheme) -> Result<Self> {
        scheme.check_fits(series.len())?;
        let n_used = scheme.n_used();
        let mut ranks = Vec::with_capacity(n_used * series.dim());
        for i in 0..series.dim() {
            ranks.extend(ascending_ranks_min_ties(&series.column(i)[..n_used]));
        }
        Ok(Self {
            ranks,
            n_used,
            d: series.dim(),
        })
    }

    pub fn column(&self, i: usize) -> &[usize] {
        &self.ranks[i * self.n_used..(i + 1) * self.n_used]
    }

    pub fn n_used(&self) -> usize {
        self.n_used
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}

/// `ceil(x)` for the order-statistic level `ceil(k_n * tau)`.
///
/// Products that land within a few ulps of an integer are snapped to it, so
/// `100 * 0.07` is level 7 rather than 8.
pub fn ceil_level(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.ceil().max(0.0) as usize
    }
}

/// The `m`-th largest value of `column` (1-based, duplicates kept).
pub fn order_statistic_threshold(column: &[f64], m: usize) -> Result<f64> {
    if m == 0 || m > column.len() {
        return Err(Error::InvalidRank {
            m,
            len: column.len(),
        });
    }
    let mut buf = column.to_vec();
    let idx = buf.len() - m;
    let (_, v, _) = buf.select_nth_unstable_by(idx, |a, b| a.total_cmp(b));
    Ok(*v)
}

/// Thresholds `u_i = X_{(ceil(k_n tau_i)), i}` over the first `n_used` rows;
/// `+inf` where `tau_i = 0`.
pub fn estimate_threshold_vector(
    series: &MultivariateSeries,
    tau: &Direction,
    scheme: BlockScheme,
) -> Result<ThresholdVector> {
    tau.check_dim(series.dim())?;
    scheme.check_fits(series.len())?;
    let n_used = scheme.n_used();
    let mut u = Vec::with_capacity(series.dim());
    for (i, &t) in tau.as_slice().iter().enumerate() {
        if t == 0.0 {
            u.push(f64::INFINITY);
            continue;
        }
        let level = ceil_level(scheme.k_n() as f64 * t).max(1);
        if level > n_used {
            return Err(Error::LevelTooDeep {
                component: i,
                level,
                n_used,
            });
        }
        u.push(order_statistic_threshold(
            &series.column(i)[..n_used],
            level,
        )?);
    }
    Ok(ThresholdVector(u))
}

/// Per-block counts of rows with at least one component strictly above its
/// threshold.
pub fn block_exceedance_counts(
    series: &MultivariateSeries,
    u: &ThresholdVector,
    scheme: BlockScheme,
) -> Result<BlockCounts> {
    if u.0.len() != series.dim() {
        return Err(Error::DimensionMismatch {
            expected: series.dim(),
            got: u.0.len(),
        });
    }
    scheme.check_fits(series.len())?;
    let mut exceeds = vec![false; scheme.n_used()];
    for (i, &ui) in u.0.iter().enumerate() {
        if ui == f64::INFINITY {
            continue;
        }
        for (flag, &x) in exceeds.iter_mut().zip(series.column(i)) {
            *flag |= x > ui;
        }
    }
    Ok(BlockCounts(
        exceeds
            .chunks(scheme.r_n())
            .map(|b| b.iter().filter(|&&e| e).count())
            .collect(),
    ))
}

/// Block counts of `values[l] > threshold` for a univariate series.
pub(crate) fn univariate_block_counts(
    values: &[f64],
    threshold: f64,
    scheme: BlockScheme,
) -> BlockCounts {
    BlockCounts(
        values[..scheme.n_used()]
            .chunks(scheme.r_n())
            .map(|b| b.iter().filter(|&&z| z > threshold).count())
            .collect(),
    )
}

/// `R_l = 1 + #{m : X_m < X_l}`.
pub fn ascending_ranks_min_ties(column: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..column.len()).collect();
    order.sort_unstable_by(|&a, &b| column[a].total_cmp(&column[b]));
    let mut ranks = vec![0; column.len()];
    let mut pos = 0;
    while pos < order.len() {
        let v = column[order[pos]];
        let mut end = pos + 1;
        while end < order.len() && column[order[end]] == v {
            end += 1;
        }
        for &idx in &order[pos..end] {
            ranks[idx] = pos + 1;
        }
        pos = end;
    }
    ranks
}

/// `Y_l = n_used / (n_used + 1 - R_l)`, a unit-Pareto scale in `[1, n_used]`.
pub fn pareto_transform(ranks: &[usize], n_used: usize) -> Vec<f64> {
    let nu = n_used as f64;
    ranks.iter().map(|&r| nu / (nu + 1.0 - r as f64)).collect()
}

/// `Z_l = max_i tau_i * Y_{l,i}` for `l < n_used`.
pub fn z_series(
    series: &MultivariateSeries,
    tau: &Direction,
    scheme: BlockScheme,
) -> Result<Vec<f64>> {
    tau.check_dim(series.dim())?;
    let ranks = RankMatrix::from_series(series, scheme)?;
    Ok(z_series_from_ranks(&ranks, tau))
}

pub(crate) fn z_series_from_ranks(ranks: &RankMatrix, tau: &Direction) -> Vec<f64> {
    let n_used = ranks.n_used();
    let mut z = vec![f64::NEG_INFINITY; n_used];
    for (i, &t) in tau.as_slice().iter().enumerate() {
        let y = pareto_transform(ranks.column(i), n_used);
        for (zl, yl) in z.iter_mut().zip(y) {
            *zl = zl.max(t * yl);
        }
    }
    z
}
