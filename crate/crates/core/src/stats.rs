//! Small sample-statistics helpers.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
}

/// Standard error of the sample mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// Sample covariance of paired observations.
pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (n - 1) as f64
}

/// Standard error of the sample covariance, from the spread of centered products.
pub fn covariance_std_error(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let prods: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    std_error(&prods)
}

/// Third central sample moment.
pub fn third_central_moment(xs: &[f64]) -> f64 {
    let m = mean(xs);
    mean(&xs.iter().map(|x| (x - m).powi(3)).collect::<Vec<_>>())
}

pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = mean(&xs.iter().map(|x| (x - m).powi(2)).collect::<Vec<_>>());
    third_central_moment(xs) / m2.powf(1.5)
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and a
/// reference CDF given by linear interpolation of `(grid, cdf)`.
pub fn ks_distance(samples: &[f64], grid: &[f64], cdf: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let reference = |x: f64| -> f64 {
        if x <= grid[0] {
            return cdf[0];
        }
        if x >= grid[grid.len() - 1] {
            return cdf[cdf.len() - 1];
        }
        let k = grid.partition_point(|&g| g <= x);
        let (x0, x1) = (grid[k - 1], grid[k]);
        let w = (x - x0) / (x1 - x0);
        cdf[k - 1] * (1.0 - w) + cdf[k] * w
    };
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = reference(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}
