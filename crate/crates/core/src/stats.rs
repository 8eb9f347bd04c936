//! Small statistics helpers: moments, the one-sample Kolmogorov-Smirnov
//! test against a normal law.

use serde::Serialize;
use statrs::function::erf::erfc;

/// Mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

pub fn moments(values: &[f64]) -> Moments {
    let n = values.len();
    if n == 0 {
        return Moments { n, mean: f64::NAN, variance: f64::NAN, std_error: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Moments { n, mean, variance, std_error: (variance / n as f64).sqrt() }
}

/// Standard error of the sample variance of `values`, from the fourth
/// central moment: `sqrt((m4 - s^4 (n-3)/(n-1)) / n)`.
pub fn variance_std_error(values: &[f64]) -> f64 {
    let m = moments(values);
    let n = m.n as f64;
    let m4 = values.iter().map(|v| (v - m.mean).powi(4)).sum::<f64>() / n;
    ((m4 - m.variance * m.variance * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
}

pub fn normal_cdf(x: f64, mean: f64, std: f64) -> f64 {
    0.5 * erfc(-(x - mean) / (std * std::f64::consts::SQRT_2))
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// One-sample KS test against `N(mean, std^2)`. The p-value uses the
/// asymptotic distribution with Stephens' small-sample correction.
pub fn ks_test_normal(values: &[f64], mean: f64, std: f64) -> KsResult {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let nf = n as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal_cdf(x, mean, std);
            (f - i as f64 / nf).max((i + 1) as f64 / nf - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = nf.sqrt();
    let p_value = kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic);
    KsResult { statistic, p_value, n }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_quantiles() {
        // tabulated critical values of the Kolmogorov distribution
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 2e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0, 0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.959963984540054, 0.0, 1.0) - 0.975).abs() < 1e-10);
        assert!((normal_cdf(3.0, 1.0, 2.0) - normal_cdf(1.0, 0.0, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn ks_detects_shift() {
        // evenly spaced normal quantiles pass, shifted ones fail
        let n = 2000;
        let q: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                statrs::function::erf::erfc_inv(2.0 * (1.0 - p)) * std::f64::consts::SQRT_2
            })
            .collect();
        assert!(ks_test_normal(&q, 0.0, 1.0).p_value > 0.99);
        let shifted: Vec<f64> = q.iter().map(|x| x + 0.2).collect();
        assert!(ks_test_normal(&shifted, 0.0, 1.0).p_value < 1e-6);
    }

    #[test]
    fn moments_of_constant() {
        let m = moments(&[2.0; 5]);
        assert_eq!((m.mean, m.variance, m.std_error), (2.0, 0.0, 0.0));
        assert!(moments(&[]).mean.is_nan());
    }
}
