//! Conformal-radius increments of nested CLE₆ loops: closed-form law, sampling, renewals.

use std::f64::consts::PI;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Right edge of the MGF domain.
pub const LAMBDA_MAX: f64 = 5.0 / 48.0;

/// `E[e^{λB}] = 1 / (2 cos(π √(1/9 + 4λ/3)))` for `λ < 5/48`.
pub fn mgf(lambda: f64) -> Result<f64> {
    if !(lambda < LAMBDA_MAX) {
        return Err(Error::DomainError(lambda));
    }
    let a = 1.0 / 9.0 + 4.0 * lambda / 3.0;
    let denom = if a >= 0.0 { 2.0 * (PI * a.sqrt()).cos() } else { 2.0 * (PI * (-a).sqrt()).cosh() };
    Ok(1.0 / denom)
}

/// Exact mean and variance of an increment.
pub fn b_moments() -> (f64, f64) {
    (2.0 * SQRT3 * PI, 16.0 * PI * PI - 12.0 * SQRT3 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitConstants {
    pub mu_half: f64,
    pub mu_point: f64,
    pub var_half: f64,
    pub var_point: f64,
    pub mean_b: f64,
    pub var_b: f64,
}

pub fn limit_constants() -> LimitConstants {
    let (mean_b, var_b) = b_moments();
    LimitConstants {
        mu_half: 1.0 / (2.0 * SQRT3 * PI),
        mu_point: 1.0 / (SQRT3 * PI),
        var_half: 2.0 / (3.0 * SQRT3 * PI) - 1.0 / (2.0 * PI * PI),
        var_point: 4.0 / (3.0 * SQRT3 * PI) - 1.0 / (PI * PI),
        mean_b,
        var_b,
    }
}

/// Pole `λ_k = (3/4)((k + ½)² − 1/9)` of the MGF.
#[inline]
pub fn pole(k: usize) -> f64 {
    let h = k as f64 + 0.5;
    0.75 * (h * h - 1.0 / 9.0)
}

const DENSITY_SCALE: f64 = 3.0 / (4.0 * PI);
const TAIL_TOL: f64 = 1e-14;
/// Below this the pole series is replaced by its theta-transformed form.
const SMALL_X: f64 = 1.0;

/// Increment density from the partial-fraction expansion of the MGF.
///
/// For `x < 1` the same alternating theta series is evaluated after Jacobi's
/// transformation, which converges in a handful of terms there.
pub fn b_density(x: f64, terms: usize) -> Result<f64> {
    if !(x > 0.0) || terms < 1 {
        return Err(Error::InvalidArgument(format!("density needs x > 0 and terms ≥ 1 (x = {x})")));
    }
    if x < SMALL_X {
        let a = 0.75 * x;
        let s = alternating(terms, x, |k| {
            let h = k as f64 + 0.5;
            h * (-PI * PI * h * h / a).exp()
        })?;
        Ok(DENSITY_SCALE * (x / 12.0).exp() * (PI / a).powf(1.5) * s)
    } else {
        let s = alternating(terms, x, |k| (k as f64 + 0.5) * (-pole(k) * x).exp())?;
        Ok(DENSITY_SCALE * s)
    }
}

/// `P[B > x]` by integrating the pole series termwise; accurate for `x ≥ 1`.
pub fn b_survival_series(x: f64, terms: usize) -> Result<f64> {
    let s = alternating(terms, x, |k| (k as f64 + 0.5) * (-pole(k) * x).exp() / pole(k))?;
    Ok(DENSITY_SCALE * s)
}

fn alternating(terms: usize, x: f64, term: impl Fn(usize) -> f64) -> Result<f64> {
    let mut s = 0.0;
    for k in 0..terms {
        let t = term(k);
        s += if k % 2 == 0 { t } else { -t };
        if term(k + 1).abs() < TAIL_TOL * s.abs().max(1e-300) || term(k + 1) == 0.0 {
            return Ok(s);
        }
    }
    Err(Error::ConvergenceError { x, terms })
}

const DENSITY_TERMS: usize = 10_000;

fn density(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        b_density(x, DENSITY_TERMS).expect("density series converges for x > 0")
    }
}

/// Eight-point Gauss–Legendre on `[a, b]`.
pub fn gauss_legendre(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    const NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut s = 0.0;
    for i in 0..4 {
        s += WEIGHTS[i] * (f(c - h * NODES[i]) + f(c + h * NODES[i]));
    }
    s * h
}

/// `P[B ≤ x]`.
pub fn b_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= SMALL_X {
        return 1.0 - b_survival_series(x, DENSITY_TERMS).expect("survival series converges");
    }
    // the density vanishes faster than any power at 0
    let pieces = 64;
    let h = x / pieces as f64;
    (0..pieces).map(|i| gauss_legendre(i as f64 * h, (i + 1) as f64 * h, density)).sum()
}

/// Inverse-CDF sampler: `2^14` equal-probability knots on `[0, F(30)]` with monotone
/// cubic interpolation, exact inversion in the first cells, and the exact one-pole
/// tail beyond 30.
#[derive(Debug, Clone)]
pub struct BSampler {
    xs: Vec<f64>,
    slopes: Vec<f64>,
    tail_u: f64,
}

pub const SAMPLER_KNOTS: usize = 1 << 14;

/// Past this point the survival is `(c₀/λ₀) e^{-λ₀ x}` up to a relative
/// `e^{-(λ₁-λ₀)·30} ≈ 3e-20`.
pub const SAMPLER_TAIL_X: f64 = 30.0;

/// Cells near 0 inverted by root finding instead of interpolation.
const EXACT_CELLS: usize = 8;

fn tail_quantile(u: f64) -> f64 {
    let c0 = DENSITY_SCALE * 0.5;
    ((c0 / LAMBDA_MAX) / (1.0 - u)).ln() / LAMBDA_MAX
}

impl BSampler {
    pub fn new() -> Self {
        let n = SAMPLER_KNOTS;
        let tail_u = b_cdf(SAMPLER_TAIL_X);
        let du = tail_u / (n - 1) as f64;
        let mut xs = vec![0.0; n];
        let mut lo = 0.0;
        for (i, x) in xs.iter_mut().enumerate().take(n - 1).skip(1) {
            *x = invert_cdf(i as f64 * du, lo);
            lo = *x;
        }
        xs[n - 1] = SAMPLER_TAIL_X;
        // dx/du at each knot, then Fritsch–Carlson limiting
        let mut slopes: Vec<f64> = xs.iter().map(|&x| if x > 0.0 { 1.0 / density(x) } else { 0.0 }).collect();
        for i in 0..n - 1 {
            let secant = (xs[i + 1] - xs[i]) / du;
            if i == 0 {
                // never interpolated; keep the next knot's slope in range
                slopes[1] = slopes[1].min(3.0 * secant);
                continue;
            }
            let (a, b) = (slopes[i] / secant, slopes[i + 1] / secant);
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * a * secant;
                slopes[i + 1] = tau * b * secant;
            }
        }
        Self { xs, slopes, tail_u }
    }

    /// Quantile function of the interpolated law.
    pub fn quantile(&self, u: f64) -> f64 {
        let n = SAMPLER_KNOTS;
        if u >= self.tail_u {
            return tail_quantile(u).max(SAMPLER_TAIL_X);
        }
        let du = self.tail_u / (n - 1) as f64;
        let pos = u / du;
        let i = (pos as usize).min(n - 2);
        let t = pos - i as f64;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        if i < EXACT_CELLS {
            // the density is flat to all orders at 0 and cubics track it poorly; invert exactly (rare)
            return invert_cdf(u, 0.0).clamp(f64::MIN_POSITIVE, x1);
        }
        let (m0, m1) = (self.slopes[i] * du, self.slopes[i + 1] * du);
        let t2 = t * t;
        let t3 = t2 * t;
        let x = (2.0 * t3 - 3.0 * t2 + 1.0) * x0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * x1 + (t3 - t2) * m1;
        x.max(f64::MIN_POSITIVE)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.gen::<f64>())
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }
}

impl Default for BSampler {
    fn default() -> Self {
        Self::new()
    }
}

fn invert_cdf(u: f64, lo_hint: f64) -> f64 {
    let mut lo = lo_hint;
    let mut hi = lo.max(1.0);
    while b_cdf(hi) < u {
        lo = hi;
        hi *= 2.0;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let g = b_cdf(x) - u;
        if g == 0.0 || hi - lo < 1e-13 * x.max(1.0) {
            return x;
        }
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let f = density(x);
        let step = if f > 0.0 { x - g / f } else { f64::NAN };
        x = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
    }
    x
}

/// Partial sums `S_1 < S_2 < …` of i.i.d. increments.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RenewalPath {
    pub sums: Vec<f64>,
}

impl RenewalPath {
    /// Draw increments until the partial sum exceeds `horizon`.
    pub fn sample<R: Rng + ?Sized>(horizon: f64, sampler: &BSampler, rng: &mut R) -> Self {
        let mut sums = Vec::new();
        let mut s = 0.0;
        while s <= horizon {
            s += sampler.sample(rng);
            sums.push(s);
        }
        Self { sums }
    }

    /// Largest `t` the path can answer `N_t` for.
    pub fn horizon(&self) -> f64 {
        self.sums.last().copied().unwrap_or(0.0)
    }

    /// `N_t = inf{n ≥ 0 : S_n > t}` with `S_0 = 0`.
    pub fn count(&self, t: f64) -> Result<u64> {
        if t < 0.0 {
            return Ok(0);
        }
        if self.horizon() <= t {
            return Err(Error::PathTooShort { covered: self.horizon(), needed: t });
        }
        Ok(self.sums.partition_point(|&s| s <= t) as u64 + 1)
    }
}

/// Sample `N_t` together with the path that produced it.
pub fn renewal_count<R: Rng + ?Sized>(t: f64, sampler: &BSampler, rng: &mut R) -> Result<(u64, RenewalPath)> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("renewal time must be ≥ 0, got {t}")));
    }
    let path = RenewalPath::sample(t, sampler, rng);
    let n = path.count(t)?;
    Ok((n, path))
}

/// Inclusive bracket on the number of loops separating radii `ε` and 1.
pub fn n_epsilon_bracket(epsilon: f64, path: &RenewalPath) -> Result<(u64, u64)> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let lo = path.count((1.0 / (5.0 * epsilon)).ln())?.saturating_sub(1);
    let hi = path.count((1.0 / epsilon).ln())?.saturating_sub(1);
    Ok((lo, hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityCheck {
    pub normalization: f64,
    /// `(λ, quadrature, closed form)`.
    pub mgf: Vec<(f64, f64, f64)>,
}

/// Integrate the series density against `e^{λx}` on a fixed composite rule.
pub fn density_check(lambdas: &[f64]) -> Result<DensityCheck> {
    let integral = |lam: f64| -> f64 {
        let mut edges = vec![0.0];
        let mut x: f64 = 0.0;
        while x < 1200.0 {
            x += if x < 2.0 { 0.05 } else if x < 40.0 { 0.25 } else { 2.0 };
            edges.push(x);
        }
        edges.windows(2).map(|w| gauss_legendre(w[0], w[1], |t| (lam * t).exp() * density(t))).sum()
    };
    let mut mgf_rows = Vec::new();
    for &l in lambdas {
        mgf_rows.push((l, integral(l), mgf(l)?));
    }
    Ok(DensityCheck { normalization: integral(0.0), mgf: mgf_rows })
}
