#![allow(dead_code)]

//! Independent reference computations shared by the integration tests.

use mei_core::series::MultivariateSeries;

/// One-sample Kolmogorov-Smirnov statistic against `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Hill estimate of the tail index `alpha` (not its reciprocal) from the
/// `k` largest observations.
pub fn hill_tail_index(sample: &[f64], k: usize) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| b.total_cmp(a));
    let base = xs[k].ln();
    let gamma = xs[..k].iter().map(|x| x.ln() - base).sum::<f64>() / k as f64;
    1.0 / gamma
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Rank by brute-force counting, `1 + #{smaller}`.
pub fn naive_ranks(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|x| 1.0 + xs.iter().filter(|y| *y < x).count() as f64)
        .collect()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&sort_ranks(a), &sort_ranks(b))
}

fn sort_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let mut r = vec![0.0; xs.len()];
    for (pos, i) in idx.into_iter().enumerate() {
        r[i] = pos as f64 + 1.0;
    }
    r
}

/// Block counts by a plain double loop over rows and components.
pub fn naive_block_counts(
    series: &MultivariateSeries,
    u: &[f64],
    k_n: usize,
    r_n: usize,
) -> Vec<usize> {
    let mut counts = vec![0; k_n];
    for (j, count) in counts.iter_mut().enumerate() {
        for l in j * r_n..(j + 1) * r_n {
            let mut hit = false;
            for (i, &ui) in u.iter().enumerate() {
                if series.value(l, i) > ui {
                    hit = true;
                }
            }
            if hit {
                *count += 1;
            }
        }
    }
    counts
}

/// `m`-th largest by full descending sort.
pub fn naive_order_statistic(xs: &[f64], m: usize) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v[m - 1]
}
