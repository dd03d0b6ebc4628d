//! Brute-force reference detectors. Written from the rule definitions with
//! plain loops; nothing here calls into the library's statistics code.

#![allow(dead_code)]

use hiertable_core::facts::{DetectorConfig, FactType};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct RefHit {
    pub score: f64,
    pub positions: Vec<usize>,
}

fn avg(xs: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in xs {
        s += x;
    }
    s / xs.len() as f64
}

fn var_sample(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = avg(xs);
    let mut s = 0.0;
    for x in xs {
        s += (x - m).powi(2);
    }
    s / (xs.len() - 1) as f64
}

fn without(xs: &[f64], i: usize) -> Vec<f64> {
    let mut out = xs.to_vec();
    out.remove(i);
    out
}

fn z_against_rest(xs: &[f64], i: usize) -> f64 {
    let rest = without(xs, i);
    let d = (xs[i] - avg(&rest)).abs();
    let sd = var_sample(&rest).sqrt();
    if sd == 0.0 {
        if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        d / sd
    }
}

fn corr(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sx += x;
        sy += y;
    }
    let (mx, my) = (sx / n, sy / n);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
    }
}

fn first_index_of(xs: &[f64], pick: impl Fn(f64, f64) -> bool) -> usize {
    let mut k = 0;
    for i in 1..xs.len() {
        if pick(xs[i], xs[k]) {
            k = i;
        }
    }
    k
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

pub fn reference(t: FactType, xs: &[f64], cfg: &DetectorConfig) -> Option<RefHit> {
    let n = xs.len();
    match t {
        FactType::Dominance => {
            let r = cfg.dominance;
            if n < r.min_len || xs.iter().any(|x| *x < 0.0) {
                return None;
            }
            let total: f64 = xs.iter().sum();
            if total <= 0.0 {
                return None;
            }
            let k = first_index_of(xs, |a, b| a > b);
            let share = xs[k] / total;
            (share >= r.threshold).then(|| RefHit { score: clamp01(share), positions: vec![k] })
        }
        FactType::Top2 => {
            let r = cfg.top2;
            if n < r.min_len || xs.iter().any(|x| *x < 0.0) {
                return None;
            }
            let total: f64 = xs.iter().sum();
            if total <= 0.0 {
                return None;
            }
            // selection by repeated scans, earliest index wins ties
            let a = first_index_of(xs, |x, y| x > y);
            let mut b = if a == 0 { 1 } else { 0 };
            for i in 0..n {
                if i != a && xs[i] > xs[b] {
                    b = i;
                }
            }
            let mut c = (0..n).find(|i| *i != a && *i != b).unwrap();
            for i in 0..n {
                if i != a && i != b && xs[i] > xs[c] {
                    c = i;
                }
            }
            let share = (xs[a] + xs[b]) / total;
            (xs[b] > 0.0 && share >= r.threshold && xs[b] >= r.gap * xs[c])
                .then(|| RefHit { score: clamp01(share), positions: vec![a, b] })
        }
        FactType::Extreme => {
            let r = cfg.extreme;
            if n < r.min_len {
                return None;
            }
            let hi = first_index_of(xs, |a, b| a > b);
            let lo = first_index_of(xs, |a, b| a < b);
            let (zh, zl) = (z_against_rest(xs, hi), z_against_rest(xs, lo));
            let (k, z) = if zh >= zl { (hi, zh) } else { (lo, zl) };
            (z >= r.threshold).then(|| RefHit { score: clamp01(z / (2.0 * r.threshold)), positions: vec![k] })
        }
        FactType::Outlier => {
            let r = cfg.outlier;
            if n < r.min_len {
                return None;
            }
            let zs: Vec<f64> = (0..n).map(|i| z_against_rest(xs, i)).collect();
            let flagged: Vec<usize> = (0..n).filter(|i| zs[*i] >= r.threshold).collect();
            if flagged.is_empty() {
                return None;
            }
            let top = flagged.iter().map(|i| zs[*i]).fold(f64::NEG_INFINITY, f64::max);
            Some(RefHit { score: clamp01(top / (2.0 * r.threshold)), positions: flagged })
        }
        FactType::Trend => {
            let r = cfg.trend;
            if n < r.min_len {
                return None;
            }
            let idx: Vec<f64> = (0..n).map(|i| i as f64).collect();
            let c = corr(&idx, xs)?;
            (c.abs() >= r.threshold).then(|| RefHit { score: c.abs(), positions: vec![0, n - 1] })
        }
        FactType::Seasonality => {
            let r = cfg.seasonality;
            if n < r.min_len || var_sample(xs) == 0.0 {
                return None;
            }
            let mut best = f64::NEG_INFINITY;
            for lag in 2..=n / 2 {
                if let Some(c) = corr(&xs[..n - lag], &xs[lag..]) {
                    best = best.max(c);
                }
            }
            (best >= r.threshold).then(|| RefHit { score: clamp01(best), positions: vec![] })
        }
        FactType::Kurtosis | FactType::Skewness => {
            let r = if t == FactType::Kurtosis { cfg.kurtosis } else { cfg.skewness };
            if n < r.min_len {
                return None;
            }
            let m = avg(xs);
            let moment = |p: i32| xs.iter().map(|x| (x - m).powi(p)).sum::<f64>() / n as f64;
            let m2 = moment(2);
            if m2 <= 0.0 {
                return None;
            }
            let g = if t == FactType::Kurtosis { moment(4) / (m2 * m2) - 3.0 } else { moment(3) / (m2 * m2.sqrt()) };
            (g.abs() >= r.threshold).then(|| RefHit { score: clamp01(g.abs() / (3.0 * r.threshold)), positions: vec![] })
        }
        FactType::Evenness => {
            let r = cfg.evenness;
            if n < r.min_len {
                return None;
            }
            let m = avg(xs);
            if m == 0.0 {
                return None;
            }
            let cv = var_sample(xs).sqrt() / m.abs();
            (cv <= r.threshold).then(|| RefHit { score: clamp01(1.0 - cv / r.threshold), positions: vec![] })
        }
        FactType::ChangePoint => {
            let r = cfg.change_point;
            if n < r.min_len || n < 4 {
                return None;
            }
            let mut best: Option<(usize, f64)> = None;
            for k in 2..=n - 2 {
                let (l, rt) = (&xs[..k], &xs[k..]);
                let (ml, mr) = (avg(l), avg(rt));
                let ss: f64 = l.iter().map(|x| (x - ml).powi(2)).sum::<f64>()
                    + rt.iter().map(|x| (x - mr).powi(2)).sum::<f64>();
                let sd = (ss / (n - 2) as f64).sqrt();
                let d = (ml - mr).abs();
                let shift = if sd == 0.0 {
                    if d == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    d / sd
                };
                if best.is_none() || shift > best.unwrap().1 {
                    best = Some((k, shift));
                }
            }
            let (k, s) = best?;
            (s >= r.threshold).then(|| RefHit { score: clamp01(s / (2.0 * r.threshold)), positions: vec![k] })
        }
        FactType::Correlation => None,
    }
}

pub fn reference_correlation(a: &[f64], b: &[f64], cfg: &DetectorConfig) -> Option<RefHit> {
    let r = cfg.correlation;
    if a.len() != b.len() || a.len() < r.min_len {
        return None;
    }
    let c = corr(a, b)?;
    (c.abs() >= r.threshold).then(|| RefHit { score: c.abs(), positions: vec![] })
}

/// A random series of length up to 12 drawn from a mix of shapes, so both
/// hits and misses occur for every detector.
pub fn random_series<R: Rng>(rng: &mut R) -> Vec<f64> {
    let n = rng.random_range(0..=12usize);
    let kind = rng.random_range(0..8);
    let noise = |rng: &mut R, s: f64| rng.random_range(-s..=s);
    (0..n)
        .map(|i| {
            let x = i as f64;
            match kind {
                0 => rng.random_range(0.0..100.0),
                1 => rng.random_range(-50.0..50.0),
                2 => 3.0 * x + noise(rng, 4.0),
                3 => [1.0, 5.0, 9.0, 5.0][i % 4] + noise(rng, 0.8),
                4 => (if i < n / 2 { 10.0 } else { 30.0 }) + noise(rng, 3.0),
                5 => 50.0 + noise(rng, 3.0),
                6 => {
                    if i == 0 {
                        rng.random_range(100.0..400.0)
                    } else {
                        rng.random_range(1.0..20.0)
                    }
                }
                _ => rng.random_range(0..4) as f64,
            }
        })
        .collect()
}
