//! Small descriptive statistics used by the detectors.

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sum of squared deviations from the mean.
pub fn sum_sq_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum()
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    (sum_sq_dev(values) / (values.len() - 1) as f64).sqrt()
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Central moments m2, m3, m4 with the 1/n normalization.
pub fn central_moments(values: &[f64]) -> (f64, f64, f64) {
    let m = mean(values);
    let n = values.len() as f64;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    (m2 / n, m3 / n, m4 / n)
}

/// `|x - mean(rest)| / std(rest)` with the convention that a nonzero
/// deviation from a constant remainder is infinitely far.
pub fn leave_one_out_z(values: &[f64], index: usize) -> f64 {
    let rest: Vec<f64> = values.iter().enumerate().filter(|&(i, _)| i != index).map(|(_, v)| *v).collect();
    let dev = (values[index] - mean(&rest)).abs();
    let sd = sample_std(&rest);
    standardized(dev, sd)
}

pub fn standardized(dev: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        dev / sd
    } else if dev > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert!((sample_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]) - 2.138089935299395).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 2.0], &[3.0, 3.0]), None);
    }

    #[test]
    fn leave_one_out_on_spike() {
        let z = leave_one_out_z(&[30.0, 31.0, 29.0, 30.0, 110.0], 4);
        // rest has mean 30 and sample std sqrt(2/3)
        assert!((z - 80.0 / (2.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert_eq!(leave_one_out_z(&[5.0, 5.0, 5.0, 9.0], 3), f64::INFINITY);
        assert_eq!(leave_one_out_z(&[5.0, 5.0, 5.0, 5.0], 3), 0.0);
    }
}
