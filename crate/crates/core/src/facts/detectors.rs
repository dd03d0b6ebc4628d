//! The eleven fact detectors.
//!
//! Each detector is a threshold rule over a numeric series. Scores are
//! normalized to `[0, 1]`. All thresholds live in [`DetectorConfig`] and can
//! be overridden from the `[detectors]` section of the config file.

use serde::{Deserialize, Serialize};

use super::stats::{central_moments, leave_one_out_z, mean, pearson, sample_std, standardized, sum_sq_dev};
use super::FactType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rule {
    pub min_len: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Top2Rule {
    pub min_len: usize,
    /// Minimum share of the two largest values.
    pub threshold: f64,
    /// The second value must be at least `gap` times the third.
    pub gap: f64,
}

/// Per-detector length minimum and threshold. Keys left out of a config file
/// keep their default values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "PartialDetectorConfig")]
pub struct DetectorConfig {
    pub dominance: Rule,
    pub top2: Top2Rule,
    pub extreme: Rule,
    pub outlier: Rule,
    pub trend: Rule,
    pub seasonality: Rule,
    pub kurtosis: Rule,
    pub skewness: Rule,
    pub evenness: Rule,
    pub correlation: Rule,
    pub change_point: Rule,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        let rule = |min_len, threshold| Rule { min_len, threshold };
        Self {
            dominance: rule(3, 0.5),
            top2: Top2Rule { min_len: 4, threshold: 0.6, gap: 1.5 },
            extreme: rule(4, 2.0),
            outlier: rule(5, 2.5),
            trend: rule(4, 0.8),
            seasonality: rule(8, 0.7),
            kurtosis: rule(8, 1.0),
            skewness: rule(8, 1.0),
            evenness: rule(4, 0.1),
            correlation: rule(4, 0.8),
            change_point: rule(6, 2.0),
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PartialRule {
    min_len: Option<usize>,
    threshold: Option<f64>,
    gap: Option<f64>,
}

impl PartialRule {
    fn over(self, base: Rule) -> Rule {
        Rule { min_len: self.min_len.unwrap_or(base.min_len), threshold: self.threshold.unwrap_or(base.threshold) }
    }
}

#[derive(Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct PartialDetectorConfig {
    dominance: PartialRule,
    top2: PartialRule,
    extreme: PartialRule,
    outlier: PartialRule,
    trend: PartialRule,
    seasonality: PartialRule,
    kurtosis: PartialRule,
    skewness: PartialRule,
    evenness: PartialRule,
    correlation: PartialRule,
    change_point: PartialRule,
}

impl From<PartialDetectorConfig> for DetectorConfig {
    fn from(p: PartialDetectorConfig) -> Self {
        let d = DetectorConfig::default();
        let top2_gap = p.top2.gap.unwrap_or(d.top2.gap);
        let top2 = p.top2.over(Rule { min_len: d.top2.min_len, threshold: d.top2.threshold });
        Self {
            dominance: p.dominance.over(d.dominance),
            top2: Top2Rule { min_len: top2.min_len, threshold: top2.threshold, gap: top2_gap },
            extreme: p.extreme.over(d.extreme),
            outlier: p.outlier.over(d.outlier),
            trend: p.trend.over(d.trend),
            seasonality: p.seasonality.over(d.seasonality),
            kurtosis: p.kurtosis.over(d.kurtosis),
            skewness: p.skewness.over(d.skewness),
            evenness: p.evenness.over(d.evenness),
            correlation: p.correlation.over(d.correlation),
            change_point: p.change_point.over(d.change_point),
        }
    }
}

/// What a detector found, before it is turned into a [`super::DataFact`].
#[derive(Debug, Clone, PartialEq)]
pub struct Hit {
    pub score: f64,
    /// Positions (into the input series) the fact is about.
    pub positions: Vec<usize>,
    pub tags: Vec<String>,
    pub detail: Detail,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Detail {
    Share(f64),
    Deviation { value: f64, typical: f64 },
    Direction(bool),
    Period(usize),
    Moment(f64),
    Variation(f64),
    Correlation(f64),
    Shift { at: usize, up: bool },
}

/// Runs one single-series detector. Correlation needs two series; see
/// [`detect_correlation`].
pub fn detect(fact_type: FactType, values: &[f64], cfg: &DetectorConfig) -> Option<Hit> {
    match fact_type {
        FactType::Dominance => dominance(values, &cfg.dominance),
        FactType::Top2 => top2(values, &cfg.top2),
        FactType::Extreme => extreme(values, &cfg.extreme),
        FactType::Outlier => outlier(values, &cfg.outlier),
        FactType::Trend => trend(values, &cfg.trend),
        FactType::Seasonality => seasonality(values, &cfg.seasonality),
        FactType::Kurtosis => kurtosis(values, &cfg.kurtosis),
        FactType::Skewness => skewness(values, &cfg.skewness),
        FactType::Evenness => evenness(values, &cfg.evenness),
        FactType::ChangePoint => change_point(values, &cfg.change_point),
        FactType::Correlation => None,
    }
}

fn hit(score: f64, positions: Vec<usize>, tags: Vec<String>, detail: Detail) -> Option<Hit> {
    Some(Hit { score: score.clamp(0.0, 1.0), positions, tags, detail })
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

fn dominance(values: &[f64], rule: &Rule) -> Option<Hit> {
    if values.len() < rule.min_len || values.iter().any(|v| *v < 0.0) {
        return None;
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let top = argmax(values);
    let share = values[top] / total;
    (share >= rule.threshold).then_some(())?;
    hit(share, vec![top], vec![], Detail::Share(share))
}

fn top2(values: &[f64], rule: &Top2Rule) -> Option<Hit> {
    if values.len() < rule.min_len || values.iter().any(|v| *v < 0.0) {
        return None;
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let (v1, v2, v3) = (values[order[0]], values[order[1]], values[order[2]]);
    let share = (v1 + v2) / total;
    if v2 > 0.0 && share >= rule.threshold && v2 >= rule.gap * v3 {
        hit(share, vec![order[0], order[1]], vec![], Detail::Share(share))
    } else {
        None
    }
}

fn extreme(values: &[f64], rule: &Rule) -> Option<Hit> {
    if values.len() < rule.min_len {
        return None;
    }
    let hi = argmax(values);
    let lo = argmin(values);
    let z_hi = leave_one_out_z(values, hi);
    let z_lo = leave_one_out_z(values, lo);
    let (pos, z, which) = if z_hi >= z_lo { (hi, z_hi, "maximum") } else { (lo, z_lo, "minimum") };
    if z < rule.threshold {
        return None;
    }
    let rest: Vec<f64> = values.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, v)| *v).collect();
    hit(
        z / (2.0 * rule.threshold),
        vec![pos],
        vec![format!("extreme:{which}")],
        Detail::Deviation { value: values[pos], typical: mean(&rest) },
    )
}

fn outlier(values: &[f64], rule: &Rule) -> Option<Hit> {
    if values.len() < rule.min_len {
        return None;
    }
    let zs: Vec<f64> = (0..values.len()).map(|i| leave_one_out_z(values, i)).collect();
    let flagged: Vec<usize> = (0..values.len()).filter(|&i| zs[i] >= rule.threshold).collect();
    let &first = flagged.first()?;
    let strongest = flagged.iter().copied().fold(first, |best, i| if zs[i] > zs[best] { i } else { best });
    let rest: Vec<f64> =
        values.iter().enumerate().filter(|&(i, _)| i != strongest).map(|(_, v)| *v).collect();
    let typical = median(&rest);
    let side = if values[strongest] >= typical { "high" } else { "low" };
    hit(
        zs[strongest] / (2.0 * rule.threshold),
        flagged,
        vec![format!("outlier:{side}")],
        Detail::Deviation { value: values[strongest], typical },
    )
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn trend(values: &[f64], rule: &Rule) -> Option<Hit> {
    if values.len() < rule.min_len {
        return None;
    }
    let index: Vec<f64> = (0..values.len()).map(|i| i as f64).collect();
    let r = pearson(&index, values)?;
    if r.abs() < rule.threshold {
        return None;
    }
    let dir = if r > 0.0 { "increasing" } else { "decreasing" };
    hit(r.abs(), vec![0, values.len() - 1], vec![format!("trend:{dir}")], Detail::Direction(r > 0.0))
}

/// Lag-k autocorrelation taken as the Pearson correlation of the series with
/// its shifted copy, so a perfectly periodic series scores 1 at its period.
pub(crate) fn autocorrelation(values: &[f64], lag: usize) -> Option<f64> {
    pearson(&values[..values.len() - lag], &values[lag..])
}

fn seasonality(values: &[f64], rule: &Rule) -> Option<Hit> {
    if values.len() < rule.min_len || sum_sq_dev(values) == 0.0 {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    for lag in 2..=values.len() / 2 {
        let Some(acf) = autocorrelation(values, lag) else {
            continue;
        };
        if best.is_none_or(|(_, b)| acf > b) {
            best = Some((lag, acf));
        }
    }
    let (lag, acf) = best?;
    if acf < rule.threshold {
        return None;
    }
    hit(acf, vec![], vec![format!("period:{lag}")], Detail::Period(lag))
}

fn kurtosis(values: &[f64], rule: &Rule) -> Option<Hit> {
    if values.len() < rule.min_len {
        return None;
    }
    let (m2, _, m4) = central_moments(values);
    if m2 <= 0.0 {
        return None;
    }
    let g2 = m4 / (m2 * m2) - 3.0;
    if g2.abs() < rule.threshold {
        return None;
    }
    let tail = if g2 > 0.0 { "heavy" } else { "light" };
    hit(g2.abs() / (3.0 * rule.threshold), vec![], vec![format!("tail:{tail}")], Detail::Moment(g2))
}

fn skewness(values: &[f64], rule: &Rule) -> Option<Hit> {
    if values.len() < rule.min_len {
        return None;
    }
    let (m2, m3, _) = central_moments(values);
    if m2 <= 0.0 {
        return None;
    }
    let g1 = m3 / m2.powf(1.5);
    if g1.abs() < rule.threshold {
        return None;
    }
    let side = if g1 > 0.0 { "right" } else { "left" };
    hit(g1.abs() / (3.0 * rule.threshold), vec![], vec![format!("skew:{side}")], Detail::Moment(g1))
}

fn evenness(values: &[f64], rule: &Rule) -> Option<Hit> {
    if values.len() < rule.min_len {
        return None;
    }
    let m = mean(values);
    if m == 0.0 {
        return None;
    }
    let cv = sample_std(values) / m.abs();
    if cv > rule.threshold {
        return None;
    }
    hit(1.0 - cv / rule.threshold, vec![], vec![], Detail::Variation(cv))
}

fn change_point(values: &[f64], rule: &Rule) -> Option<Hit> {
    let n = values.len();
    if n < rule.min_len || n < 4 {
        return None;
    }
    let mut best: Option<(usize, f64)> = None;
    for split in 2..=n - 2 {
        let (left, right) = values.split_at(split);
        let diff = (mean(left) - mean(right)).abs();
        let pooled = ((sum_sq_dev(left) + sum_sq_dev(right)) / (n - 2) as f64).sqrt();
        let shift = standardized(diff, pooled);
        if best.is_none_or(|(_, b)| shift > b) {
            best = Some((split, shift));
        }
    }
    let (at, shift) = best?;
    if shift < rule.threshold {
        return None;
    }
    let up = mean(&values[at..]) > mean(&values[..at]);
    let dir = if up { "up" } else { "down" };
    hit(shift / (2.0 * rule.threshold), vec![at], vec![format!("shift:{dir}")], Detail::Shift { at, up })
}

/// Correlation between two aligned series.
pub fn detect_correlation(a: &[f64], b: &[f64], cfg: &DetectorConfig) -> Option<Hit> {
    let rule = &cfg.correlation;
    if a.len() != b.len() || a.len() < rule.min_len {
        return None;
    }
    let r = pearson(a, b)?;
    if r.abs() < rule.threshold {
        return None;
    }
    let sign = if r > 0.0 { "positive" } else { "negative" };
    hit(r.abs(), vec![], vec![format!("correlation:{sign}")], Detail::Correlation(r))
}
