//! Declarative chart specs for data facts and their Vega-Lite export.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::facts::{DataFact, FactType};

pub const VEGA_LITE_SCHEMA: &str = "https://vega.github.io/schema/vega-lite/v5.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Pie,
    Bar,
    Line,
    Strip,
    Density,
    Scatter,
}

impl Mark {
    pub const ALL: [Mark; 6] = [Mark::Pie, Mark::Bar, Mark::Line, Mark::Strip, Mark::Density, Mark::Scatter];

    pub fn for_type(fact_type: FactType) -> Mark {
        match fact_type {
            FactType::Dominance => Mark::Pie,
            FactType::Top2 | FactType::Extreme => Mark::Bar,
            FactType::Trend | FactType::Seasonality | FactType::ChangePoint => Mark::Line,
            FactType::Outlier => Mark::Strip,
            FactType::Kurtosis | FactType::Skewness | FactType::Evenness => Mark::Density,
            FactType::Correlation => Mark::Scatter,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mark::Pie => "pie",
            Mark::Bar => "bar",
            Mark::Line => "line",
            Mark::Strip => "strip",
            Mark::Density => "density",
            Mark::Scatter => "scatter",
        }
    }

    /// The Vega-Lite mark type used on export.
    pub fn vega_mark(&self) -> &'static str {
        match self {
            Mark::Pie => "arc",
            Mark::Bar => "bar",
            Mark::Line => "line",
            Mark::Strip => "tick",
            Mark::Density => "area",
            Mark::Scatter => "point",
        }
    }

    fn from_name(name: &str) -> Option<Mark> {
        Mark::ALL.into_iter().find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Datum {
    pub label: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired: Option<f64>,
    pub highlight: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoding {
    pub field: String,
    /// Vega-Lite measurement type: `quantitative`, `nominal` or `ordinal`.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

impl Encoding {
    fn new(field: &str, kind: &str) -> Self {
        Self { field: field.into(), kind: kind.into(), title: None }
    }

    fn titled(field: &str, kind: &str, title: &str) -> Self {
        Self { title: Some(title.into()), ..Self::new(field, kind) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub mark: Mark,
    pub data: Vec<Datum>,
    pub encodings: BTreeMap<String, Encoding>,
    /// Highlighted data labels.
    pub annotations: Vec<String>,
    pub title: String,
}

pub fn spec_for(fact: &DataFact) -> ChartSpec {
    let mark = Mark::for_type(fact.fact_type);
    let annotations: Vec<String> = if mark == Mark::Scatter {
        Vec::new()
    } else {
        let mut seen = Vec::new();
        for l in &fact.labels {
            if fact.data.labels.contains(l) && !seen.contains(l) {
                seen.push(l.clone());
            }
        }
        seen
    };
    let data = fact
        .data
        .labels
        .iter()
        .enumerate()
        .map(|(i, label)| Datum {
            label: label.clone(),
            value: fact.data.values[i],
            paired: fact.data.paired.as_ref().map(|p| p[i]),
            highlight: annotations.contains(label),
        })
        .collect();
    let mut enc = BTreeMap::new();
    let mut put = |channel: &str, e: Encoding| {
        enc.insert(channel.to_string(), e);
    };
    match mark {
        Mark::Pie => {
            put("theta", Encoding::new("value", "quantitative"));
            put("color", Encoding::new("label", "nominal"));
        }
        Mark::Bar => {
            put("x", Encoding::new("label", "nominal"));
            put("y", Encoding::new("value", "quantitative"));
            put("color", Encoding::new("highlight", "nominal"));
        }
        Mark::Line => {
            put("x", Encoding::new("label", "ordinal"));
            put("y", Encoding::new("value", "quantitative"));
        }
        Mark::Strip => {
            put("x", Encoding::new("value", "quantitative"));
            put("color", Encoding::new("highlight", "nominal"));
        }
        Mark::Density => {
            put("x", Encoding::new("value", "quantitative"));
            put("y", Encoding::new("density", "quantitative"));
        }
        Mark::Scatter => {
            let name = |i: usize| fact.labels.get(i).cloned().unwrap_or_default();
            put("x", Encoding::titled("value", "quantitative", &name(0)));
            put("y", Encoding::titled("paired", "quantitative", &name(1)));
        }
    }
    ChartSpec { mark, data, encodings: enc, annotations, title: fact.description.clone() }
}

fn to_document(spec: &ChartSpec) -> Value {
    let values: Vec<Value> = spec.data.iter().map(|d| serde_json::to_value(d).expect("datum")).collect();
    let mut encoding = Map::new();
    for (channel, e) in &spec.encodings {
        let mut v = serde_json::to_value(e).expect("encoding");
        if matches!(e.kind.as_str(), "nominal" | "ordinal") && e.field == "label" {
            // keep data order instead of sorting alphabetically
            v["sort"] = Value::Null;
        }
        encoding.insert(channel.clone(), v);
    }
    let mut doc = json!({
        "$schema": VEGA_LITE_SCHEMA,
        "title": spec.title,
        "data": { "values": values },
        "mark": { "type": spec.mark.vega_mark(), "tooltip": true },
        "encoding": encoding,
        "usermeta": { "mark": spec.mark.name(), "annotations": spec.annotations },
    });
    if spec.mark == Mark::Density {
        doc["transform"] = json!([{ "density": "value", "as": ["value", "density"] }]);
    }
    doc
}

/// Pretty-printed Vega-Lite document with inline data.
pub fn export_grammar_json(spec: &ChartSpec) -> String {
    serde_json::to_string_pretty(&to_document(spec)).expect("chart document")
}

/// Reads back a document produced by [`export_grammar_json`].
pub fn parse_grammar_json(text: &str) -> Result<ChartSpec, String> {
    let doc: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let meta = &doc["usermeta"];
    let mark = meta["mark"].as_str().and_then(Mark::from_name).ok_or("missing usermeta.mark")?;
    let annotations = serde_json::from_value(meta["annotations"].clone()).map_err(|e| e.to_string())?;
    let data = serde_json::from_value(doc["data"]["values"].clone()).map_err(|e| e.to_string())?;
    let mut encodings = BTreeMap::new();
    for (channel, v) in doc["encoding"].as_object().ok_or("missing encoding")? {
        let mut v = v.clone();
        if let Some(obj) = v.as_object_mut() {
            obj.remove("sort");
        }
        encodings.insert(channel.clone(), serde_json::from_value(v).map_err(|e| e.to_string())?);
    }
    let title = doc["title"].as_str().ok_or("missing title")?.to_string();
    Ok(ChartSpec { mark, data, encodings, annotations, title })
}

/// Writes one chart document per fact into `dir`, named after the fact's
/// chart file.
pub fn write_charts(dir: &Path, facts: &[DataFact]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for fact in facts {
        std::fs::write(dir.join(&fact.chart), export_grammar_json(&spec_for(fact)))?;
    }
    Ok(())
}
