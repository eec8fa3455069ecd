/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Two-sided one-sample Kolmogorov-Smirnov distance to the standard normal.
///
/// Panics on an empty sample.
pub fn ks_statistic(samples: &[f64]) -> f64 {
    assert!(!samples.is_empty(), "KS distance of an empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let cdf = normal_cdf(z);
            ((i + 1) as f64 / m - cdf).max(cdf - i as f64 / m)
        })
        .fold(0.0, f64::max)
}
