//! Data-fact extraction over block data forms.

pub mod detectors;
pub mod stats;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blocks::{transform, Block, DataForm, FormKind, Provenance};
use crate::table_model::HierTable;
pub use detectors::{detect, detect_correlation, Detail, DetectorConfig, Hit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactCategory {
    Point,
    Shape,
    Compound,
}

/// The eleven fact types. Variants are declared in lexicographic order of
/// their names so the derived `Ord` matches name order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactType {
    ChangePoint,
    Correlation,
    Dominance,
    Evenness,
    Extreme,
    Kurtosis,
    Outlier,
    Seasonality,
    Skewness,
    Top2,
    Trend,
}

impl FactType {
    pub const ALL: [FactType; 11] = [
        FactType::ChangePoint,
        FactType::Correlation,
        FactType::Dominance,
        FactType::Evenness,
        FactType::Extreme,
        FactType::Kurtosis,
        FactType::Outlier,
        FactType::Seasonality,
        FactType::Skewness,
        FactType::Top2,
        FactType::Trend,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FactType::ChangePoint => "change_point",
            FactType::Correlation => "correlation",
            FactType::Dominance => "dominance",
            FactType::Evenness => "evenness",
            FactType::Extreme => "extreme",
            FactType::Kurtosis => "kurtosis",
            FactType::Outlier => "outlier",
            FactType::Seasonality => "seasonality",
            FactType::Skewness => "skewness",
            FactType::Top2 => "top2",
            FactType::Trend => "trend",
        }
    }

    pub fn category(&self) -> FactCategory {
        match self {
            FactType::Dominance | FactType::Top2 | FactType::Extreme | FactType::Outlier => FactCategory::Point,
            FactType::Trend
            | FactType::Seasonality
            | FactType::Kurtosis
            | FactType::Skewness
            | FactType::Evenness => FactCategory::Shape,
            FactType::Correlation | FactType::ChangePoint => FactCategory::Compound,
        }
    }

    /// Detectors whose result depends on the order of the values.
    pub fn order_sensitive(&self) -> bool {
        matches!(self, FactType::Trend | FactType::Seasonality | FactType::ChangePoint)
    }
}

impl fmt::Display for FactType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FactType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FactType::ALL
            .into_iter()
            .find(|t| t.name() == s.trim())
            .ok_or_else(|| format!("unknown fact type {s:?}"))
    }
}

pub type FactTypeSet = BTreeSet<FactType>;

pub fn all_fact_types() -> FactTypeSet {
    FactType::ALL.into_iter().collect()
}

/// The values a fact was detected on, in chartable form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactData {
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    /// Second series for correlation facts, aligned with `values`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataFact {
    pub id: String,
    pub fact_type: FactType,
    pub category: FactCategory,
    pub block_id: String,
    pub form: Provenance,
    pub score: f64,
    /// Tag set used for similarity: `form:`, `agg:`, `label:`, `at:` and
    /// detector-specific tags.
    pub attributes: BTreeSet<String>,
    /// Labels the fact is about (the dominant entry, the outlier cell, ...).
    pub labels: Vec<String>,
    pub description: String,
    pub data: FactData,
    /// File name of the exported chart document.
    pub chart: String,
}

/// Formats a number for descriptions: integers without decimals, otherwise
/// two decimals.
fn num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn describe(fact_type: FactType, hit: &Hit, labels: &[String], context: &str) -> String {
    let first = labels.first().map(String::as_str).unwrap_or("");
    match (fact_type, &hit.detail) {
        (FactType::Dominance, Detail::Share(s)) => {
            format!("{first} dominates {context} ({:.0}% of total)", s * 100.0)
        }
        (FactType::Top2, Detail::Share(s)) => format!(
            "{first} and {} are the top two in {context} ({:.0}% of total)",
            labels.get(1).map(String::as_str).unwrap_or(""),
            s * 100.0
        ),
        (FactType::Extreme, Detail::Deviation { value, .. }) => {
            let which = if hit.tags.iter().any(|t| t == "extreme:minimum") { "minimum" } else { "maximum" };
            format!("{first} is the extreme {which} of {context} ({})", num(*value))
        }
        (FactType::Outlier, Detail::Deviation { value, typical }) => {
            format!("{first} is an outlier in {context} ({} vs median {})", num(*value), num(*typical))
        }
        (FactType::Trend, Detail::Direction(up)) => {
            let dir = if *up { "an increasing" } else { "a decreasing" };
            format!("{context} shows {dir} trend")
        }
        (FactType::Seasonality, Detail::Period(k)) => format!("{context} repeats with a period of {k}"),
        (FactType::Kurtosis, Detail::Moment(g)) => {
            let tail = if *g > 0.0 { "heavy-tailed" } else { "light-tailed" };
            format!("{context} has a {tail} distribution (kurtosis {g:.2})")
        }
        (FactType::Skewness, Detail::Moment(g)) => {
            let side = if *g > 0.0 { "right-skewed" } else { "left-skewed" };
            format!("{context} is {side} (skewness {g:.2})")
        }
        (FactType::Evenness, Detail::Variation(cv)) => {
            format!("{context} is evenly distributed (variation {cv:.2})")
        }
        (FactType::Correlation, Detail::Correlation(r)) => {
            let sign = if *r > 0.0 { "positively" } else { "negatively" };
            format!(
                "{first} and {} are {sign} correlated in {context} (r = {r:.2})",
                labels.get(1).map(String::as_str).unwrap_or("")
            )
        }
        (FactType::ChangePoint, Detail::Shift { up, .. }) => {
            let dir = if *up { "upward" } else { "downward" };
            format!("{context} shifts {dir} at {first}")
        }
        _ => format!("{fact_type} in {context}"),
    }
}

fn form_tags(form: &DataForm) -> Vec<String> {
    let mut tags = vec![format!("form:{}", form.kind.name())];
    if form.kind.is_merge() {
        tags.push(format!("agg:{}", form.aggregator.name()));
    }
    if let Some(series) = &form.series_label {
        tags.push(format!("series:{series}"));
    }
    tags
}

struct Candidate {
    fact_type: FactType,
    form_index: usize,
    pair_index: usize,
    hit: Hit,
    labels: Vec<String>,
    data: FactData,
    form: Provenance,
    tags: Vec<String>,
    context: String,
}

/// Runs every detector over every data form of the block.
///
/// Facts come back sorted by fact type name, then by the position of the
/// source form in the transform output.
pub fn extract_block_facts(table: &HierTable, block: &Block, cfg: &DetectorConfig) -> Vec<DataFact> {
    let Ok(forms) = transform(table, block) else {
        return Vec::new();
    };
    let block_name = block.display_name();
    let at_tags: Vec<String> =
        block.location.r_loc.iter().chain(&block.location.c_loc).map(|l| format!("at:{l}")).collect();
    let mut found: Vec<Candidate> = Vec::new();

    for (fi, form) in forms.iter().enumerate() {
        let context = format!("{block_name}, {}", form.phrase());
        for fact_type in FactType::ALL {
            if fact_type == FactType::Correlation || (fact_type.order_sensitive() && !form.is_sequence()) {
                continue;
            }
            if let Some(hit) = detect(fact_type, &form.values, cfg) {
                let labels = hit.positions.iter().map(|&p| form.labels[p].clone()).collect();
                found.push(Candidate {
                    fact_type,
                    form_index: fi,
                    pair_index: 0,
                    labels,
                    data: FactData { labels: form.labels.clone(), values: form.values.clone(), paired: None },
                    form: form.provenance.clone(),
                    tags: form_tags(form),
                    context: context.clone(),
                    hit,
                });
            }
        }
    }

    for kind in [FormKind::RowSeries, FormKind::ColSeries] {
        let series: Vec<(usize, &DataForm)> = forms.iter().enumerate().filter(|(_, f)| f.kind == kind).collect();
        for (i, &(fa, a)) in series.iter().enumerate() {
            for &(fb, b) in &series[i + 1..] {
                let (labels, xs, ys) = align(a, b);
                let Some(hit) = detect_correlation(&xs, &ys, cfg) else {
                    continue;
                };
                let pair = vec![a.series_label.clone().unwrap_or_default(), b.series_label.clone().unwrap_or_default()];
                let axis = if kind == FormKind::RowSeries { "rows" } else { "columns" };
                found.push(Candidate {
                    fact_type: FactType::Correlation,
                    form_index: fa,
                    pair_index: fb,
                    labels: pair,
                    data: FactData { labels, values: xs, paired: Some(ys) },
                    form: Provenance {
                        block_id: block.id.clone(),
                        transform: format!("{}+{}", a.provenance.transform, b.provenance.transform),
                    },
                    tags: vec![format!("form:{}", kind.name())],
                    context: format!("{block_name}, {axis}"),
                    hit,
                });
            }
        }
    }

    found.sort_by(|a, b| {
        (a.fact_type.name(), a.form_index, a.pair_index).cmp(&(b.fact_type.name(), b.form_index, b.pair_index))
    });

    let mut facts = Vec::with_capacity(found.len());
    let mut counter: Option<(FactType, usize)> = None;
    for c in found {
        let k = match counter {
            Some((t, k)) if t == c.fact_type => k + 1,
            _ => 0,
        };
        counter = Some((c.fact_type, k));
        let id = format!("{}__{}__{}", block.id, c.fact_type.name(), k);
        let mut attributes: BTreeSet<String> = c.tags.into_iter().chain(c.hit.tags.iter().cloned()).collect();
        attributes.extend(at_tags.iter().cloned());
        attributes.extend(c.labels.iter().map(|l| format!("label:{l}")));
        let description = describe(c.fact_type, &c.hit, &c.labels, &c.context);
        facts.push(DataFact {
            chart: format!("{id}.json"),
            id,
            fact_type: c.fact_type,
            category: c.fact_type.category(),
            block_id: block.id.clone(),
            form: c.form,
            score: c.hit.score,
            attributes,
            labels: c.labels,
            description,
            data: c.data,
        });
    }
    facts
}

/// Values of two series at the labels both have.
fn align(a: &DataForm, b: &DataForm) -> (Vec<String>, Vec<f64>, Vec<f64>) {
    let mut labels = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (label, x) in a.labels.iter().zip(&a.values) {
        if let Some(pos) = b.labels.iter().position(|l| l == label) {
            labels.push(label.clone());
            xs.push(*x);
            ys.push(b.values[pos]);
        }
    }
    (labels, xs, ys)
}

/// Keeps facts whose type is enabled, preserving order.
pub fn filter_facts(facts: &[DataFact], enabled: &FactTypeSet) -> Vec<DataFact> {
    facts.iter().filter(|f| enabled.contains(&f.fact_type)).cloned().collect()
}
