//! Monte Carlo harness, ratio estimators and goodness-of-fit tests.
//!
//! Replicates are independent tessellations; statistics of segments inside
//! one tessellation are dependent, so uncertainty is always computed from
//! replicate-level totals.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::StreamKey;

/// Run `f(index, key)` for `replicates` indices on `threads` workers and
/// return results in index order. Keys depend only on `(seed, index)`.
pub fn mc_run<T, F>(replicates: usize, seed: u64, threads: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, StreamKey) -> Result<T> + Sync,
{
    if replicates == 0 {
        return Err(Error::invalid("need at least one replicate"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::invalid(e.to_string()))?;
    pool.install(|| {
        (0..replicates)
            .into_par_iter()
            .map(|i| f(i, StreamKey::replicate(seed, i as u64)))
            .collect()
    })
}

/// Compensated (Neumaier) summation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn stable_sum<'a, I: IntoIterator<Item = &'a f64>>(xs: I) -> f64 {
    let mut s = NeumaierSum::default();
    for x in xs {
        s.add(*x);
    }
    s.value()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub statistic: String,
    pub mode: String,
    pub estimate: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    pub effective_sample_size: f64,
    pub sample_size: usize,
    pub replicates: usize,
}

/// Replicate-level numerator and denominator totals of a ratio estimator,
/// plus the segment-level weight sums needed for the effective sample size.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatioPool {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
    /// Per replicate `(Σ w, Σ w², count)` over the sampled objects.
    pub weights: Vec<(f64, f64, usize)>,
}

impl RatioPool {
    pub fn push(&mut self, num: f64, den: f64, w: (f64, f64, usize)) {
        self.num.push(num);
        self.den.push(den);
        self.weights.push(w);
    }

    pub fn len(&self) -> usize {
        self.num.len()
    }

    pub fn is_empty(&self) -> bool {
        self.num.is_empty()
    }

    pub fn ratio(&self) -> f64 {
        stable_sum(&self.num) / stable_sum(&self.den)
    }

    /// Kish effective sample size `(Σw)² / Σw²`.
    pub fn effective_sample_size(&self) -> f64 {
        let s1 = stable_sum(self.weights.iter().map(|w| &w.0).collect::<Vec<_>>());
        let s2 = stable_sum(self.weights.iter().map(|w| &w.1).collect::<Vec<_>>());
        if s2 > 0.0 {
            s1 * s1 / s2
        } else {
            0.0
        }
    }

    pub fn sample_size(&self) -> usize {
        self.weights.iter().map(|w| w.2).sum()
    }
}

/// Ratio of sums with delete-one-replicate jackknife bias correction and
/// standard error.
pub fn ratio_estimate(pool: &RatioPool, statistic: &str, mode: &str) -> Result<EstimateReport> {
    let n = pool.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let total_num = stable_sum(&pool.num);
    let total_den = stable_sum(&pool.den);
    if total_den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    let raw = total_num / total_den;
    let (estimate, stderr) = if n > 1 {
        let loo: Vec<f64> = (0..n)
            .map(|i| {
                let d = total_den - pool.den[i];
                if d == 0.0 {
                    raw
                } else {
                    (total_num - pool.num[i]) / d
                }
            })
            .collect();
        let mean = stable_sum(&loo) / n as f64;
        let var = (n as f64 - 1.0) / n as f64 * stable_sum(&loo.iter().map(|r| (r - mean).powi(2)).collect::<Vec<_>>());
        (n as f64 * raw - (n as f64 - 1.0) * mean, var.sqrt())
    } else {
        (raw, 0.0)
    };
    Ok(EstimateReport {
        statistic: statistic.to_string(),
        mode: mode.to_string(),
        estimate,
        stderr,
        ci95: (estimate - 1.959_963_984_540_054 * stderr, estimate + 1.959_963_984_540_054 * stderr),
        effective_sample_size: pool.effective_sample_size(),
        sample_size: pool.sample_size(),
        replicates: n,
    })
}

/// Mean of replicate-level values with its standard error.
pub fn mean_estimate(values: &[f64], statistic: &str) -> Result<EstimateReport> {
    let n = values.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let mean = stable_sum(values) / n as f64;
    let var = if n > 1 {
        stable_sum(&values.iter().map(|v| (v - mean).powi(2)).collect::<Vec<_>>()) / (n as f64 - 1.0)
    } else {
        0.0
    };
    let se = (var / n as f64).sqrt();
    Ok(EstimateReport {
        statistic: statistic.to_string(),
        mode: "replicate_mean".into(),
        estimate: mean,
        stderr: se,
        ci95: (mean - 1.959_963_984_540_054 * se, mean + 1.959_963_984_540_054 * se),
        effective_sample_size: n as f64,
        sample_size: n,
        replicates: n,
    })
}

/// Bootstrap standard error of the ratio estimator, resampling replicates.
pub fn bootstrap_ratio_stderr<R: Rng + ?Sized>(pool: &RatioPool, resamples: usize, rng: &mut R) -> Result<f64> {
    let n = pool.len();
    if n < 2 || resamples < 2 {
        return Err(Error::EmptySample);
    }
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let (mut a, mut b) = (NeumaierSum::default(), NeumaierSum::default());
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            a.add(pool.num[i]);
            b.add(pool.den[i]);
        }
        stats.push(a.value() / b.value());
    }
    let mean = stable_sum(&stats) / resamples as f64;
    let var = stable_sum(&stats.iter().map(|s| (s - mean).powi(2)).collect::<Vec<_>>()) / (resamples as f64 - 1.0);
    Ok(var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    pub sample_size: f64,
    pub descriptor: String,
}

/// Kolmogorov limiting survival function `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut acc = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = (-2.0 * k * k * lambda * lambda).exp();
        acc += if k as i64 % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * acc).clamp(0.0, 1.0)
}

// Stephens' small-sample correction of the KS statistic.
fn ks_p(d: f64, n: f64) -> f64 {
    let s = n.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test against a continuous CDF.
pub fn gof_ks<F: Fn(f64) -> f64>(sample: &[f64], cdf: F, descriptor: &str) -> Result<GofReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(GofReport { test: "ks".into(), statistic: d, p_value: ks_p(d, n), sample_size: n, descriptor: descriptor.into() })
}

/// KS test for a weighted sample; the p-value uses the Kish effective
/// sample size.
pub fn gof_ks_weighted<F: Fn(f64) -> f64>(sample: &[(f64, f64)], cdf: F, descriptor: &str) -> Result<GofReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = stable_sum(&xs.iter().map(|p| p.1).collect::<Vec<_>>());
    let sq: f64 = stable_sum(&xs.iter().map(|p| p.1 * p.1).collect::<Vec<_>>());
    if !(total > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let n_eff = total * total / sq;
    let mut d = 0.0f64;
    let mut acc = NeumaierSum::default();
    for (x, w) in &xs {
        let f = cdf(*x);
        let below = acc.value() / total;
        acc.add(*w);
        let above = acc.value() / total;
        d = d.max(f - below).max(above - f);
    }
    Ok(GofReport {
        test: "ks_weighted".into(),
        statistic: d,
        p_value: ks_p(d, n_eff),
        sample_size: n_eff,
        descriptor: descriptor.into(),
    })
}

/// KS test when values above `cutoff` are only known to exceed it: the
/// supremum runs over `x <= cutoff`, which makes the limiting p-value
/// conservative.
pub fn gof_ks_censored<F: Fn(f64) -> f64>(sample: &[f64], cutoff: f64, cdf: F, descriptor: &str) -> Result<GofReport> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs: Vec<f64> = sample.iter().copied().filter(|x| *x <= cutoff).collect();
    xs.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d = d.max((cdf(cutoff) - xs.len() as f64 / n).abs());
    Ok(GofReport {
        test: "ks_censored".into(),
        statistic: d,
        p_value: ks_p(d, n),
        sample_size: n,
        descriptor: format!("{descriptor}; cutoff={cutoff}"),
    })
}

/// Largest ratio of the replicate-level (cluster) variance of the empirical
/// CDF to its independent-sampling variance, over a grid of reference
/// quantiles; at least one.
fn ks_design_effect<F: Fn(f64) -> f64>(clusters: &[Vec<f64>], cdf: &F, grid: &[f64]) -> f64 {
    let n: f64 = clusters.iter().map(|c| c.len() as f64).sum();
    let mut deff = 1.0f64;
    for &x in grid {
        let f = cdf(x);
        if !(f > 0.0 && f < 1.0) {
            continue;
        }
        let mut acc = NeumaierSum::default();
        for c in clusters {
            let below = c.iter().filter(|v| **v <= x).count() as f64;
            acc.add((below - f * c.len() as f64).powi(2));
        }
        deff = deff.max(acc.value() / (n * f * (1.0 - f)));
    }
    deff
}

/// KS test of values grouped by replicate. Values above `cutoff` count as
/// censored (use `f64::INFINITY` for none). The Kolmogorov p-value uses the
/// sample size divided by the replicate-level design effect, so dependence
/// inside a replicate does not make the test anti-conservative.
pub fn gof_ks_clustered<F: Fn(f64) -> f64>(clusters: &[Vec<f64>], cutoff: f64, cdf: F, descriptor: &str) -> Result<GofReport> {
    let pooled: Vec<f64> = clusters.iter().flatten().copied().collect();
    if pooled.is_empty() {
        return Err(Error::EmptySample);
    }
    let base = if cutoff.is_finite() { gof_ks_censored(&pooled, cutoff, &cdf, descriptor)? } else { gof_ks(&pooled, &cdf, descriptor)? };
    let mut sorted: Vec<f64> = pooled.iter().copied().filter(|x| *x <= cutoff).collect();
    sorted.sort_by(f64::total_cmp);
    let grid: Vec<f64> = (1..20).filter_map(|k| sorted.get(k * sorted.len() / 20).copied()).collect();
    let deff = ks_design_effect(clusters, &cdf, &grid);
    let n_eff = pooled.len() as f64 / deff;
    Ok(GofReport {
        test: "ks_clustered".into(),
        statistic: base.statistic,
        p_value: ks_p(base.statistic, n_eff),
        sample_size: n_eff,
        descriptor: format!("{}; design effect {deff:.3}", base.descriptor),
    })
}

/// Pearson χ² for bin counts grouped by replicate, divided by the mean
/// replicate-level design effect of the bin proportions (first-order
/// Rao–Scott correction).
pub fn gof_chi2_clustered(clusters: &[Vec<f64>], expected_probs: &[f64], descriptor: &str) -> Result<GofReport> {
    let k = expected_probs.len();
    if clusters.iter().any(|c| c.len() != k) {
        return Err(Error::invalid("every replicate needs one count per bin"));
    }
    let mut totals = vec![0.0; k];
    for c in clusters {
        for (t, v) in totals.iter_mut().zip(c) {
            *t += v;
        }
    }
    let n: f64 = totals.iter().sum();
    if !(n > 0.0) {
        return Err(Error::EmptySample);
    }
    let plain = gof_chi2(&totals, expected_probs, n, 0, descriptor)?;
    let mut deff = 0.0;
    for (i, p) in expected_probs.iter().enumerate() {
        let mut acc = NeumaierSum::default();
        for c in clusters {
            let m: f64 = c.iter().sum();
            acc.add((c[i] - p * m).powi(2));
        }
        deff += acc.value() / (n * p * (1.0 - p));
    }
    let deff = (deff / k as f64).max(1.0);
    let stat = plain.statistic / deff;
    let p = 1.0 - ChiSquared::new((k - 1) as f64).map_err(|e| Error::invalid(e.to_string()))?.cdf(stat);
    Ok(GofReport {
        test: "chi2_clustered".into(),
        statistic: stat,
        p_value: p.clamp(0.0, 1.0),
        sample_size: n / deff,
        descriptor: format!("{descriptor}; design effect {deff:.3}"),
    })
}

/// Two-sample KS test.
pub fn gof_ks_two_sample(a: &[f64], b: &[f64], descriptor: &str) -> Result<GofReport> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(GofReport { test: "ks_two_sample".into(), statistic: d, p_value: ks_p(d, ne), sample_size: ne, descriptor: descriptor.into() })
}

/// Pearson χ² of (possibly weighted) bin masses against reference
/// probabilities. `observed` holds bin totals; `n` is the (effective)
/// sample size they are scaled to.
pub fn gof_chi2(observed: &[f64], expected_probs: &[f64], n: f64, fitted_params: usize, descriptor: &str) -> Result<GofReport> {
    if observed.len() != expected_probs.len() || observed.len() < 2 {
        return Err(Error::invalid("χ² needs matching bins, at least two"));
    }
    let total: f64 = stable_sum(observed);
    if !(total > 0.0) || !(n > 0.0) {
        return Err(Error::EmptySample);
    }
    let mut stat = 0.0;
    for (o, p) in observed.iter().zip(expected_probs) {
        let e = n * p;
        let o = n * o / total;
        stat += (o - e).powi(2) / e;
    }
    let df = (observed.len() - 1 - fitted_params) as f64;
    let p = 1.0 - ChiSquared::new(df).map_err(|e| Error::invalid(e.to_string()))?.cdf(stat);
    Ok(GofReport { test: "chi2".into(), statistic: stat, p_value: p.clamp(0.0, 1.0), sample_size: n, descriptor: descriptor.into() })
}

/// Variance-to-mean ratio of counts; the p-value is the two-sided χ²
/// dispersion test with `n - 1` degrees of freedom.
pub fn poisson_dispersion(counts: &[f64]) -> Result<GofReport> {
    let n = counts.len();
    if n < 2 {
        return Err(Error::EmptySample);
    }
    let mean = stable_sum(counts) / n as f64;
    if !(mean > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    let var = stable_sum(&counts.iter().map(|c| (c - mean).powi(2)).collect::<Vec<_>>()) / (n as f64 - 1.0);
    let index = var / mean;
    let stat = (n as f64 - 1.0) * index;
    let cdf = ChiSquared::new(n as f64 - 1.0).map_err(|e| Error::invalid(e.to_string()))?.cdf(stat);
    Ok(GofReport {
        test: "poisson_dispersion".into(),
        statistic: index,
        p_value: (2.0 * cdf.min(1.0 - cdf)).clamp(0.0, 1.0),
        sample_size: n as f64,
        descriptor: format!("mean={mean}"),
    })
}

/// Holm step-down adjusted p-values, in input order.
pub fn holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|a, b| p[*a].total_cmp(&p[*b]).then(a.cmp(b)));
    let mut out = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in idx.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p[i]).min(1.0));
        out[i] = running;
    }
    out
}

/// Bin index of a point of the ordered simplex `0 < s1 < s2 < t` into
/// `rows x cols` equally likely cells under the uniform law: `(s2/t)²` and
/// `s1/s2` are independent uniforms.
pub fn simplex_bin(s1: f64, s2: f64, t: f64, rows: usize, cols: usize) -> usize {
    let u = ((s2 / t).powi(2) * rows as f64).floor().clamp(0.0, rows as f64 - 1.0) as usize;
    let w = ((s1 / s2) * cols as f64).floor().clamp(0.0, cols as f64 - 1.0) as usize;
    u * cols + w
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Exp, Poisson};

    #[test]
    fn harness_is_deterministic_and_ordered() {
        let f = |i: usize, k: StreamKey| -> Result<(usize, u64)> { Ok((i, k.rng().gen())) };
        let a = mc_run(50, 7, 1, f).unwrap();
        let b = mc_run(50, 7, 8, f).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().enumerate().all(|(i, x)| x.0 == i));
        assert!(mc_run(0, 7, 1, f).is_err());
    }

    #[test]
    fn neumaier_is_accurate() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(stable_sum(&xs), 2.0);
    }

    #[test]
    fn ratio_of_identical_replicates_has_zero_error() {
        let mut pool = RatioPool::default();
        for _ in 0..10 {
            pool.push(3.0, 6.0, (6.0, 6.0, 6));
        }
        let r = ratio_estimate(&pool, "x", "typical").unwrap();
        assert!((r.estimate - 0.5).abs() < 1e-15);
        assert!(r.stderr < 1e-15);
        assert!(r.ci95.0 <= r.estimate && r.estimate <= r.ci95.1);
        assert!(r.effective_sample_size <= r.sample_size as f64);
        let empty = RatioPool::default();
        assert!(ratio_estimate(&empty, "x", "t").is_err());
        let mut zero = RatioPool::default();
        zero.push(0.0, 0.0, (0.0, 0.0, 0));
        assert!(matches!(ratio_estimate(&zero, "x", "t"), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn jackknife_close_to_bootstrap() {
        let mut rng = StreamKey::root(5).rng();
        let e = Exp::new(1.0).unwrap();
        let mut pool = RatioPool::default();
        for _ in 0..400 {
            let d: f64 = 1.0 + e.sample(&mut rng);
            let n: f64 = 0.3 * d + 0.1 * e.sample(&mut rng);
            pool.push(n, d, (d, d * d, 1));
        }
        let jk = ratio_estimate(&pool, "x", "t").unwrap().stderr;
        let bs = bootstrap_ratio_stderr(&pool, 500, &mut rng).unwrap();
        assert!((jk / bs - 1.0).abs() < 0.3, "{jk} {bs}");
    }

    #[test]
    fn ks_calibration() {
        let mut rejections = 0;
        for trial in 0..100 {
            let mut rng = StreamKey::root(100 + trial).rng();
            let xs: Vec<f64> = (0..200).map(|_| rng.gen::<f64>()).collect();
            if gof_ks(&xs, |x| x.clamp(0.0, 1.0), "u").unwrap().p_value < 0.01 {
                rejections += 1;
            }
        }
        assert!(rejections <= 5);
        assert!(gof_ks(&[], |x| x, "").is_err());
        let mut rng = StreamKey::root(1).rng();
        let xs: Vec<f64> = (0..2000).map(|_| rng.gen::<f64>().powi(2)).collect();
        assert!(gof_ks(&xs, |x| x.clamp(0.0, 1.0), "u").unwrap().p_value < 1e-6);
    }

    #[test]
    fn censored_ks_matches_full_below_cutoff() {
        let mut rng = StreamKey::root(6).rng();
        let e = Exp::new(1.0).unwrap();
        let xs: Vec<f64> = (0..5000).map(|_| e.sample(&mut rng)).collect();
        let cdf = |x: f64| 1.0 - (-x).exp();
        let full = gof_ks(&xs, cdf, "").unwrap();
        let cens = gof_ks_censored(&xs, 1.0, cdf, "").unwrap();
        assert!(cens.statistic <= full.statistic + 1e-15);
        assert!(cens.p_value > 0.01);
        let far = gof_ks_censored(&xs, 1e9, cdf, "").unwrap();
        assert!((far.statistic - full.statistic).abs() < 1e-15);
    }

    #[test]
    fn clustered_tests_account_for_duplicates() {
        let mut rng = StreamKey::root(7).rng();
        // every value repeated five times inside its replicate
        let clusters: Vec<Vec<f64>> = (0..2000).map(|_| vec![rng.gen::<f64>(); 5]).collect();
        let r = gof_ks_clustered(&clusters, f64::INFINITY, |x| x.clamp(0.0, 1.0), "").unwrap();
        assert!((r.sample_size / 2000.0 - 1.0).abs() < 0.2, "{r:?}");
        let single: Vec<Vec<f64>> = (0..2000).map(|_| vec![rng.gen::<f64>()]).collect();
        let r = gof_ks_clustered(&single, f64::INFINITY, |x| x.clamp(0.0, 1.0), "").unwrap();
        assert!(r.sample_size > 1500.0);
        let bins: Vec<Vec<f64>> = (0..2000)
            .map(|_| {
                let mut c = vec![0.0; 4];
                c[rng.gen_range(0..4)] += 5.0;
                c
            })
            .collect();
        let r = gof_chi2_clustered(&bins, &[0.25; 4], "").unwrap();
        assert!(r.descriptor.contains("design effect"));
        assert!((r.sample_size / 2000.0 - 1.0).abs() < 0.2, "{r:?}");
    }

    #[test]
    fn two_sample_and_weighted_ks() {
        let mut rng = StreamKey::root(2).rng();
        let a: Vec<f64> = (0..3000).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..3000).map(|_| rng.gen::<f64>()).collect();
        assert!(gof_ks_two_sample(&a, &b, "").unwrap().p_value > 0.01);
        let c: Vec<f64> = b.iter().map(|x| x * 0.9).collect();
        assert!(gof_ks_two_sample(&a, &c, "").unwrap().p_value < 0.01);
        // length-biasing an exponential sample gives an Erlang-2 law
        let e = Exp::new(1.0).unwrap();
        let w: Vec<(f64, f64)> = (0..20000).map(|_| {
            let x: f64 = e.sample(&mut rng);
            (x, x)
        }).collect();
        let r = gof_ks_weighted(&w, |x| 1.0 - (-x).exp() * (1.0 + x), "").unwrap();
        assert!(r.p_value > 0.01, "{r:?}");
    }

    #[test]
    fn chi2_detects_linear_alternative_on_simplex() {
        let mut rng = StreamKey::root(3).rng();
        let (rows, cols) = (2, 5);
        let mut uniform = vec![0.0; 10];
        let mut tilted = vec![0.0; 10];
        let mut count = 0;
        while count < 10_000 {
            let (x, y): (f64, f64) = (rng.gen(), rng.gen());
            let (s1, s2) = (x.min(y), x.max(y));
            uniform[simplex_bin(s1, s2, 1.0, rows, cols)] += 1.0;
            // density ∝ s2 on the simplex via rejection
            if rng.gen::<f64>() < s2 {
                tilted[simplex_bin(s1, s2, 1.0, rows, cols)] += 1.0;
            }
            count += 1;
        }
        let probs = vec![0.1; 10];
        let n_u: f64 = uniform.iter().sum();
        let n_t: f64 = tilted.iter().sum();
        assert!(gof_chi2(&uniform, &probs, n_u, 0, "").unwrap().p_value > 0.01);
        assert!(gof_chi2(&tilted, &probs, n_t, 0, "").unwrap().p_value < 1e-6);
    }

    #[test]
    fn dispersion_of_poisson_counts() {
        let mut rng = StreamKey::root(4).rng();
        let p = Poisson::new(3.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| p.sample(&mut rng)).collect();
        let r = poisson_dispersion(&xs).unwrap();
        assert!((r.statistic - 1.0).abs() < 0.03);
    }

    #[test]
    fn holm_adjustment() {
        let adj = holm(&[0.01, 0.04, 0.03, 0.005]);
        assert_eq!(adj, vec![0.03, 0.06, 0.06, 0.02]);
    }
}
