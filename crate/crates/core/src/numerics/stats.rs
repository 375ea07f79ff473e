//! Sample statistics for Monte Carlo output.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::kahan::{compensated_sum, NeumaierSum};
use crate::error::{Error, Result};

/// Mean of a sample together with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub variance: f64,
    pub count: usize,
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    compensated_sum(xs) / xs.len() as f64
}

/// Unbiased (n − 1) sample variance, two-pass.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let ss: NeumaierSum = xs.iter().map(|x| (x - m) * (x - m)).sum();
    ss.value() / (xs.len() - 1) as f64
}

pub fn estimate(xs: &[f64]) -> Estimate {
    let n = xs.len();
    let variance = if n >= 2 { sample_variance(xs) } else { 0.0 };
    Estimate {
        mean: mean(xs),
        std_error: if n >= 2 { (variance / n as f64).sqrt() } else { f64::NAN },
        variance,
        count: n,
    }
}

/// Streaming central moments up to order four, mergeable in a fixed order
/// (pairwise update formulas), so chunked parallel accumulation is
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.merge(&Moments { count: 1, mean: x, ..Default::default() });
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.count as f64, o.count as f64);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d2 = d * d;
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        let m3 = self.m3 + o.m3 + d2 * d * na * nb * (na - nb) / (n * n) + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        self.mean += d * nb / n;
        self.m2 = m2;
        self.m3 = m3;
        self.m4 = m4;
        self.count += o.count;
    }

    /// Unbiased variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64).max(0.0)
    }

    pub fn estimate(&self) -> Estimate {
        let variance = self.variance();
        Estimate {
            mean: self.mean,
            std_error: (variance / self.count as f64).sqrt(),
            variance,
            count: self.count as usize,
        }
    }

    /// Sample variance with its large-sample standard error
    /// `√((m₄ − m₂²)/n)`.
    pub fn variance_estimate(&self) -> Estimate {
        let n = self.count as f64;
        let (c2, c4) = (self.m2 / n, self.m4 / n);
        Estimate {
            mean: self.variance(),
            std_error: ((c4 - c2 * c2).max(0.0) / n).sqrt(),
            variance: (c4 - c2 * c2).max(0.0),
            count: self.count as usize,
        }
    }
}

/// Unbiased sample covariance matrix of `rows` (one observation per row).
pub fn covariance_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::Degenerate("covariance needs at least two observations".into()));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Degenerate("ragged observation vectors".into()));
    }
    let means: Vec<f64> = (0..d)
        .map(|j| rows.iter().map(|r| r[j]).sum::<NeumaierSum>().value() / n as f64)
        .collect();
    let mut cov = DMatrix::zeros(d, d);
    for j in 0..d {
        for k in j..d {
            let s: NeumaierSum = rows
                .iter()
                .map(|r| (r[j] - means[j]) * (r[k] - means[k]))
                .sum();
            let v = s.value() / (n - 1) as f64;
            cov[(j, k)] = v;
            cov[(k, j)] = v;
        }
    }
    Ok(cov)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Relative Frobenius distance `‖a − b‖_F / ‖b‖_F`.
pub fn frobenius_relative_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Ordinary least squares of `ys` on `xs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Degenerate("linear fit needs two or more paired points".into()));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    // a perfectly flat response is fitted exactly
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit { slope, intercept, r_squared })
}

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

/// One-sample Kolmogorov–Smirnov distance `sup |F_n − F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let above = (i + 1) as f64 / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic critical value of the KS distance at level 5%.
pub fn ks_critical_5pct(n: usize) -> f64 {
    1.36 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variance_of_small_sample() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((sample_variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        let e = estimate(&xs);
        assert!((e.mean - 2.5).abs() < 1e-15);
        assert!((e.std_error - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let deltas: Vec<f64> = (8..=14).map(|k| 2f64.powi(-k)).collect();
        let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = deltas.iter().map(|d| (3.0 * d.sqrt()).ln()).collect();
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ks_of_perfect_grid_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn moments_merge_matches_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 / 97.0 + 3.0).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        let m = mean(&xs);
        let v = sample_variance(&xs);
        let c4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / xs.len() as f64;
        let c2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        for mm in [whole, a] {
            assert!((mm.mean - m).abs() < 1e-12);
            assert!((mm.variance() - v).abs() < 1e-10 * v);
            let se = ((c4 - c2 * c2) / xs.len() as f64).sqrt();
            assert!((mm.variance_estimate().std_error - se).abs() < 1e-9 * se);
        }
    }

    #[test]
    fn moments_of_constant_are_zero() {
        let mut m = Moments::default();
        (0..10).for_each(|_| m.push(0.5));
        assert_eq!(m.estimate().mean, 0.5);
        assert_eq!(m.estimate().std_error, 0.0);
        assert_eq!(m.variance_estimate().mean, 0.0);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert!((normal_cdf(0.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
        let p = normal_cdf(1.959_963_984_540_054, 0.0, 1.0);
        assert!((p - 0.975).abs() < 1e-10, "{p}");
    }

    #[test]
    fn covariance_of_perfectly_correlated_columns() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let c = covariance_matrix(&rows).unwrap();
        let corr = c[(0, 1)] / (c[(0, 0)] * c[(1, 1)]).sqrt();
        assert!((corr - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(&c) > -1e-10);
    }
}
