//! Gaussian kernel density estimates and their log-gradient.

use std::f64::consts::PI;

/// Silverman's rule of thumb `0.9 min(sd, IQR/1.34) n^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    spread(samples) * 0.9 * (samples.len() as f64).powf(-0.2)
}

/// `min(sd, IQR/1.34)`, falling back to sd when the IQR vanishes.
pub fn spread(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((p * (n - 1.0)).round() as usize).min(sorted.len() - 1)];
    let iqr = (q(0.75) - q(0.25)) / 1.34;
    if iqr > 0.0 { sd.min(iqr) } else { sd }
}

#[inline]
pub(crate) fn kernel(u: f64, h: f64) -> f64 {
    (-0.5 * (u / h).powi(2)).exp() / (h * (2.0 * PI).sqrt())
}

/// `d/du K_h(u)`
#[inline]
pub(crate) fn kernel_d1(u: f64, h: f64) -> f64 {
    -u / (h * h) * kernel(u, h)
}

/// `d^2/du^2 K_h(u)`
#[inline]
pub(crate) fn kernel_d2(u: f64, h: f64) -> f64 {
    ((u * u) / (h * h) - 1.0) / (h * h) * kernel(u, h)
}

pub fn kde(samples: &[f64], x: f64, h: f64) -> f64 {
    samples.iter().map(|&y| kernel(x - y, h)).sum::<f64>() / samples.len() as f64
}

/// `d/dx ln P_h(x)` with a standard error that treats each cluster (one
/// trajectory) as an independent unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGradient {
    pub value: f64,
    pub std_error: f64,
}

/// Ratio estimator `sum K'(x - y) / sum K(x - y)` over clustered samples.
pub fn log_density_gradient(clusters: &[Vec<f64>], x: f64, h: f64) -> LogGradient {
    let per_cluster: Vec<(f64, f64)> = clusters
        .iter()
        .map(|c| {
            c.iter().fold((0.0, 0.0), |(a, b), &y| (a + kernel_d1(x - y, h), b + kernel(x - y, h)))
        })
        .collect();
    let (num, den) = per_cluster.iter().fold((0.0, 0.0), |(a, b), (ca, cb)| (a + ca, b + cb));
    let value = num / den;
    let var: f64 = per_cluster.iter().map(|(ca, cb)| (ca - value * cb).powi(2)).sum::<f64>() / (den * den);
    LogGradient { value, std_error: var.sqrt() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_derivatives_match_finite_differences() {
        let h = 0.3;
        let e = 1e-5;
        for u in [-0.7, -0.1, 0.0, 0.4, 1.1] {
            let d1 = (kernel(u + e, h) - kernel(u - e, h)) / (2.0 * e);
            let d2 = (kernel(u + e, h) - 2.0 * kernel(u, h) + kernel(u - e, h)) / (e * e);
            assert!((kernel_d1(u, h) - d1).abs() < 1e-7);
            assert!((kernel_d2(u, h) - d2).abs() < 1e-3);
        }
    }

    #[test]
    fn kernel_integrates_to_one() {
        let h = 0.2;
        let step = 1e-3;
        let total: f64 = (-4000..=4000).map(|k| kernel(k as f64 * step, h) * step).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_of_normal_quantiles() {
        // evenly spaced N(0,1) quantiles; smoothed density is N(0, 1 + h^2)
        let n = 20_000;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i as f64 + 0.5) / n as f64;
                statrs::function::erf::erfc_inv(2.0 * (1.0 - p)) * std::f64::consts::SQRT_2
            })
            .collect();
        let h = silverman_bandwidth(&samples);
        assert!(h > 0.05 && h < 0.2);
        let clusters: Vec<Vec<f64>> = samples.chunks(10).map(|c| c.to_vec()).collect();
        for x in [-1.5, 0.5, 1.0] {
            let g = log_density_gradient(&clusters, x, h);
            assert!((g.value + x / (1.0 + h * h)).abs() < 0.02, "{x}: {}", g.value);
        }
    }
}
