//! Streaming moments, Kolmogorov–Smirnov tests, line fits and integer histograms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Welford accumulator; merges with the pairwise update so partial sums combine.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentAccumulator {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub var: f64,
    pub stderr: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let (na, nb) = (self.n as f64, other.n as f64);
        self.mean += d * nb / n as f64;
        self.m2 += other.m2 + d * d * na * nb / n as f64;
        self.n = n;
    }

    /// Sample variance with the `n − 1` divisor.
    pub fn variance(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.n as usize });
        }
        Ok(self.m2 / (self.n - 1) as f64)
    }

    pub fn finalize(&self) -> Result<Moments> {
        let var = self.variance()?;
        Ok(Moments { n: self.n, mean: self.mean, var, stderr: (var / self.n as f64).sqrt() })
    }
}

impl FromIterator<f64> for MomentAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut a = Self::new();
        for x in iter {
            a.push(x);
        }
        a
    }
}

/// Asymptotic Kolmogorov tail `P[K > λ]`, 100 terms.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let sign = if k as u64 % 2 == 1 { 1.0 } else { -1.0 };
        s += sign * (-2.0 * k * k * lambda * lambda).exp();
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let sq = n_eff.sqrt();
    kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)
}

/// One-sample KS statistic against the standard normal and its asymptotic p-value.
pub fn ks_normal(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 8 {
        return Err(Error::InsufficientData { needed: 8, got: samples.len() });
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let normal = Normal::new(0.0, 1.0).unwrap();
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal.cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok((d, ks_p(d, n)))
}

/// Two-sample KS statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.total_cmp(q));
    xb.sort_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok((d, ks_p(d, na * nb / (na + nb))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::DegenerateInput("length mismatch".into()));
    }
    if xs.len() < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 points, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("all x values equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept: my - slope * mx, r_squared })
}

/// Integer-keyed counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: BTreeMap<i64, u64>,
}

impl Histogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, k: i64) {
        *self.counts.entry(k).or_default() += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_default() += c;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn mean(&self) -> Option<f64> {
        let t = self.total();
        (t > 0).then(|| self.counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum::<f64>() / t as f64)
    }

    /// Empirical `P[X ≥ t]`.
    pub fn survival(&self, t: i64) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        self.counts.range(t..).map(|(_, &c)| c).sum::<u64>() as f64 / total as f64
    }
}

impl FromIterator<i64> for Histogram {
    fn from_iter<I: IntoIterator<Item = i64>>(iter: I) -> Self {
        let mut h = Self::new();
        for k in iter {
            h.push(k);
        }
        h
    }
}

/// Half the L1 distance between the normalized histograms.
pub fn tv_distance(h1: &Histogram, h2: &Histogram) -> Result<f64> {
    let (t1, t2) = (h1.total(), h2.total());
    if t1 == 0 || t2 == 0 {
        return Err(Error::EmptyHistogram);
    }
    let keys: std::collections::BTreeSet<i64> = h1.counts.keys().chain(h2.counts.keys()).copied().collect();
    let s: f64 = keys
        .iter()
        .map(|k| {
            let p = *h1.counts.get(k).unwrap_or(&0) as f64 / t1 as f64;
            let q = *h2.counts.get(k).unwrap_or(&0) as f64 / t2 as f64;
            (p - q).abs()
        })
        .sum();
    Ok(0.5 * s)
}
