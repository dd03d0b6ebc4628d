//! Semantic-zoom exploration sessions: page recommendation by fact
//! similarity, manual page switching, chart swaps and path logging.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::blocks::{Block, DepthCombo};
use crate::config::{PageScore, RecommendConfig, Weights};
use crate::error::{ExploreError, LayoutError};
use crate::facts::{all_fact_types, DataFact, FactType, FactTypeSet};
use crate::layout::{hover_summary, placements, swap_embedded, EmbedPolicy, HeaderLayerGraph, HoverSummary, Page, Placement};
use crate::pipeline::Analysis;

/// Similarities closer than this are treated as ties.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Select,
    ZoomIn,
    ZoomOut,
    SwitchPage,
    SwapChart,
    Filter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    /// Milliseconds since the Unix epoch, supplied by the caller.
    pub timestamp: u64,
    pub action: Action,
    pub before: DepthCombo,
    pub after: DepthCombo,
    pub facts: Vec<String>,
    /// False for a zoom that hit the top or bottom of the graph.
    pub moved: bool,
}

/// Remembers the selected block across page switches so its page keeps the
/// red-border marker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub combo: DepthCombo,
    pub block_id: String,
    pub fact_id: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Recommendation {
    pub zoom_in: Option<DepthCombo>,
    pub zoom_out: Option<DepthCombo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationSession {
    pub table_id: String,
    pub current: Page,
    pub selected_block: Option<String>,
    pub focused_fact: Option<String>,
    pub enabled_types: FactTypeSet,
    pub path_log: Vec<PathStep>,
    pub marker: Option<Marker>,
    pub recommendation: Recommendation,
}

fn tokens(text: &str) -> BTreeMap<String, f64> {
    let mut tf = BTreeMap::new();
    for tok in text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
        *tf.entry(tok.to_lowercase()).or_insert(0.0) += 1.0;
    }
    tf
}

/// Cosine similarity of term-frequency vectors of two descriptions.
pub fn text_cosine(a: &str, b: &str) -> f64 {
    let (ta, tb) = (tokens(a), tokens(b));
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    let dot: f64 = ta.iter().filter_map(|(k, v)| tb.get(k).map(|w| v * w)).sum();
    let norm = |t: &BTreeMap<String, f64>| t.values().map(|v| v * v).sum::<f64>().sqrt();
    let denom = norm(&ta) * norm(&tb);
    if denom == 0.0 {
        0.0
    } else {
        (dot / denom).clamp(0.0, 1.0)
    }
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Weighted agreement of two facts on type, attributes and description.
pub fn fact_similarity(focused: &DataFact, other: &DataFact, w: &Weights) -> f64 {
    let total = w.fact_type + w.attributes + w.text;
    let same = if focused.fact_type == other.fact_type { 1.0 } else { 0.0 };
    let raw = w.fact_type * same
        + w.attributes * jaccard(&focused.attributes, &other.attributes)
        + w.text * text_cosine(&focused.description, &other.description);
    (raw / total).clamp(0.0, 1.0)
}

/// Page-level similarity: max (or mean) over the candidate facts; 0 when the
/// page has none.
pub fn similarity(focused: &DataFact, candidates: &[&DataFact], cfg: &RecommendConfig) -> f64 {
    if candidates.is_empty() {
        return 0.0;
    }
    let sims = candidates.iter().map(|c| fact_similarity(focused, c, &cfg.weights));
    match cfg.page_score {
        PageScore::Max => sims.fold(0.0, f64::max),
        PageScore::Mean => sims.sum::<f64>() / candidates.len() as f64,
    }
}

pub fn candidates(graph: &HeaderLayerGraph, combo: DepthCombo, direction: Direction) -> Vec<DepthCombo> {
    match direction {
        Direction::In => graph.children(combo),
        Direction::Out => graph.parents(combo),
    }
}

fn nested(a: &Block, b: &Block) -> bool {
    let contains = |o: &Block, i: &Block| {
        o.rect.x1 <= i.rect.x1 && i.rect.x2 <= o.rect.x2 && o.rect.y1 <= i.rect.y1 && i.rect.y2 <= o.rect.y2
    };
    contains(a, b) || contains(b, a)
}

/// Enabled facts of `combo`'s blocks, limited to blocks nested with
/// `focus_block` when any are.
pub fn candidate_facts<'a>(
    analysis: &'a Analysis,
    combo: DepthCombo,
    focus_block: Option<&Block>,
    enabled: &FactTypeSet,
) -> Vec<&'a DataFact> {
    let blocks = analysis.blocks_of(combo);
    let related: Vec<&Block> = match focus_block {
        Some(fb) => blocks.iter().filter(|b| nested(fb, b)).collect(),
        None => Vec::new(),
    };
    let chosen: Vec<&Block> = if related.is_empty() { blocks.iter().collect() } else { related };
    chosen
        .into_iter()
        .flat_map(|b| analysis.block_facts(&b.id))
        .filter(|f| enabled.contains(&f.fact_type))
        .collect()
}

/// Session operations as journal entries. Applying the same commands to a
/// fresh session always yields the same state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Command {
    Select { block_id: String, fact_id: Option<String>, ts: u64 },
    Zoom { direction: Direction, ts: u64 },
    SwitchPage { r_depth: usize, c_depth: usize, ts: u64 },
    Embed { block_id: String, fact_id: String, ts: u64 },
    Filter { types: Vec<FactType>, ts: u64 },
}

impl ExplorationSession {
    /// Starts on the first page of the S_depth = 1 row with every type
    /// enabled.
    pub fn new(table_id: impl Into<String>, analysis: &Analysis) -> Self {
        let combo = analysis.graph.group(1)[0];
        let enabled = all_fact_types();
        let current = analysis.page(combo, &enabled, &EmbedPolicy::MaxScore);
        let mut s = Self {
            table_id: table_id.into(),
            current,
            selected_block: None,
            focused_fact: None,
            enabled_types: enabled,
            path_log: Vec::new(),
            marker: None,
            recommendation: Recommendation::default(),
        };
        s.refresh_recommendation(analysis);
        s
    }

    pub fn combo(&self) -> DepthCombo {
        self.current.combo
    }

    fn log(&mut self, ts: u64, action: Action, before: DepthCombo, facts: Vec<String>, moved: bool) {
        self.path_log.push(PathStep { timestamp: ts, action, before, after: self.combo(), facts, moved });
    }

    fn focus<'a>(&self, analysis: &'a Analysis) -> Option<&'a DataFact> {
        self.focused_fact.as_deref().and_then(|id| analysis.fact(id))
    }

    fn refresh_recommendation(&mut self, analysis: &Analysis) {
        self.recommendation = Recommendation {
            zoom_in: self.recommend(analysis, Direction::In),
            zoom_out: self.recommend(analysis, Direction::Out),
        };
    }

    /// Target page for a zoom, or `None` at the boundary.
    pub fn recommend(&self, analysis: &Analysis, direction: Direction) -> Option<DepthCombo> {
        self.recommend_with(analysis, direction, &analysis.config.recommend)
    }

    pub fn recommend_with(
        &self,
        analysis: &Analysis,
        direction: Direction,
        cfg: &RecommendConfig,
    ) -> Option<DepthCombo> {
        let cands = candidates(&analysis.graph, self.combo(), direction);
        if cands.is_empty() {
            return None;
        }
        if let Some(focus) = self.focus(analysis) {
            let focus_block = analysis.block(&focus.block_id);
            let mut best: Option<(DepthCombo, f64)> = None;
            for c in cands {
                let sim = similarity(focus, &candidate_facts(analysis, c, focus_block, &self.enabled_types), cfg);
                if best.is_none_or(|(_, b)| sim > b + TIE_EPS) {
                    best = Some((c, sim));
                }
            }
            return best.map(|(c, _)| c);
        }
        if self.selected_block.is_some() {
            if let Some(c) = cands.iter().find(|c| c.r_depth == self.combo().r_depth) {
                return Some(*c);
            }
        }
        cands.first().copied()
    }

    /// Selects a block, optionally embedding one of its facts first. The
    /// embedded fact becomes the focus.
    pub fn select(
        &mut self,
        analysis: &Analysis,
        block_id: &str,
        fact_id: Option<&str>,
        ts: u64,
    ) -> Result<(), ExploreError> {
        if self.current.block(block_id).is_none() {
            return Err(LayoutError::UnknownBlock(block_id.to_string()).into());
        }
        if let Some(fid) = fact_id {
            self.current = swap_embedded(&self.current, block_id, fid, analysis.block_facts(block_id))?;
        }
        let before = self.combo();
        self.set_selection(Some(block_id.to_string()));
        self.refresh_recommendation(analysis);
        let facts = self.focused_fact.iter().cloned().collect();
        self.log(ts, Action::Select, before, facts, true);
        Ok(())
    }

    fn set_selection(&mut self, block_id: Option<String>) {
        self.focused_fact = block_id.as_deref().and_then(|b| self.current.embedded_in(b)).map(str::to_string);
        if let Some(b) = &block_id {
            self.marker = Some(Marker { combo: self.combo(), block_id: b.clone(), fact_id: self.focused_fact.clone() });
        }
        self.selected_block = block_id;
    }

    /// Zooms to the recommended page. Returns false, and logs a boundary
    /// step, when there is nowhere to go.
    pub fn zoom(&mut self, analysis: &Analysis, direction: Direction, ts: u64) -> bool {
        let action = match direction {
            Direction::In => Action::ZoomIn,
            Direction::Out => Action::ZoomOut,
        };
        let before = self.combo();
        let Some(target) = self.recommend(analysis, direction) else {
            self.log(ts, action, before, self.focused_fact.iter().cloned().collect(), false);
            return false;
        };
        let weights = analysis.config.recommend.weights;
        match self.focus(analysis) {
            Some(prior) => {
                let bias = |f: &DataFact| fact_similarity(prior, f, &weights);
                self.current = analysis.page(target, &self.enabled_types, &EmbedPolicy::Biased(&bias));
                let pool = candidate_facts(analysis, target, analysis.block(&prior.block_id), &self.enabled_types);
                let mut best: Option<(&DataFact, f64)> = None;
                for f in pool {
                    let sim = bias(f);
                    if best.is_none_or(|(_, b)| sim > b + TIE_EPS) {
                        best = Some((f, sim));
                    }
                }
                let mut facts = vec![prior.id.clone()];
                match best {
                    Some((next, _)) => {
                        if self.current.embedded_in(&next.block_id) != Some(next.id.as_str()) {
                            self.current = swap_embedded(&self.current, &next.block_id, &next.id, analysis.block_facts(&next.block_id))
                                .expect("candidate fact is listed on its page");
                        }
                        self.set_selection(Some(next.block_id.clone()));
                        facts.push(next.id.clone());
                    }
                    None => self.set_selection(None),
                }
                self.refresh_recommendation(analysis);
                self.log(ts, action, before, facts, true);
            }
            None => {
                self.current = analysis.page(target, &self.enabled_types, &EmbedPolicy::MaxScore);
                self.set_selection(None);
                self.refresh_recommendation(analysis);
                self.log(ts, action, before, Vec::new(), true);
            }
        }
        true
    }

    /// Jumps to another page of the same zoom level.
    pub fn switch_page(&mut self, analysis: &Analysis, combo: DepthCombo, ts: u64) -> Result<(), ExploreError> {
        let before = self.combo();
        if combo.s_depth() != before.s_depth() {
            return Err(ExploreError::DepthMismatch { r: combo.r_depth, c: combo.c_depth, s_depth: before.s_depth() });
        }
        if !analysis.graph.contains(combo) {
            return Err(ExploreError::UnknownCombo(combo.r_depth, combo.c_depth));
        }
        self.current = analysis.page(combo, &self.enabled_types, &EmbedPolicy::MaxScore);
        let restore = self.marker.clone().filter(|m| m.combo == combo && self.current.block(&m.block_id).is_some());
        match restore {
            Some(m) => {
                if let Some(fid) = &m.fact_id {
                    if let Ok(page) = swap_embedded(&self.current, &m.block_id, fid, analysis.block_facts(&m.block_id)) {
                        self.current = page;
                    }
                }
                self.set_selection(Some(m.block_id));
            }
            None => {
                // the marker stays on its own page
                self.selected_block = None;
                self.focused_fact = None;
            }
        }
        self.refresh_recommendation(analysis);
        self.log(ts, Action::SwitchPage, before, self.focused_fact.iter().cloned().collect(), true);
        Ok(())
    }

    /// Embeds an alternative chart in a block. Swapping in the selected block
    /// moves the focus with it.
    pub fn swap_chart(
        &mut self,
        analysis: &Analysis,
        block_id: &str,
        fact_id: &str,
        ts: u64,
    ) -> Result<(), ExploreError> {
        let prior = self.current.embedded_in(block_id).map(str::to_string);
        self.current = swap_embedded(&self.current, block_id, fact_id, analysis.block_facts(block_id))?;
        if self.selected_block.as_deref() == Some(block_id) {
            self.set_selection(Some(block_id.to_string()));
        }
        self.refresh_recommendation(analysis);
        let before = self.combo();
        let facts = prior.into_iter().chain(std::iter::once(fact_id.to_string())).collect();
        self.log(ts, Action::SwapChart, before, facts, true);
        Ok(())
    }

    /// Replaces the enabled fact types. Embedded charts that remain enabled
    /// stay in place.
    pub fn filter(&mut self, analysis: &Analysis, types: FactTypeSet, ts: u64) {
        let before = self.combo();
        let kept: BTreeSet<String> = self.current.embedded.values().flatten().cloned().collect();
        let bias = |f: &DataFact| if kept.contains(&f.id) { 1.0 } else { 0.0 };
        self.enabled_types = types;
        self.current = analysis.page(before, &self.enabled_types, &EmbedPolicy::Biased(&bias));
        let selected = self.selected_block.clone();
        self.set_selection(selected);
        self.refresh_recommendation(analysis);
        self.log(ts, Action::Filter, before, Vec::new(), true);
    }

    pub fn apply(&mut self, analysis: &Analysis, cmd: &Command) -> Result<bool, ExploreError> {
        match cmd {
            Command::Select { block_id, fact_id, ts } => self.select(analysis, block_id, fact_id.as_deref(), *ts)?,
            Command::Zoom { direction, ts } => return Ok(self.zoom(analysis, *direction, *ts)),
            Command::SwitchPage { r_depth, c_depth, ts } => {
                self.switch_page(analysis, DepthCombo::new(*r_depth, *c_depth), *ts)?
            }
            Command::Embed { block_id, fact_id, ts } => self.swap_chart(analysis, block_id, fact_id, *ts)?,
            Command::Filter { types, ts } => self.filter(analysis, types.iter().copied().collect(), *ts),
        }
        Ok(true)
    }

    pub fn view(&self, analysis: &Analysis) -> ViewState {
        let hover = analysis
            .graph
            .nodes
            .iter()
            .map(|n| NodeSummary {
                combo: n.combo,
                summary: hover_summary(analysis.blocks_of(n.combo), &analysis.facts_by_block, &self.enabled_types),
            })
            .collect();
        ViewState {
            table_id: self.table_id.clone(),
            combo: self.combo(),
            placements: placements(&self.current, &analysis.facts_by_block, &analysis.config.geometry),
            page: self.current.clone(),
            graph: analysis.graph.clone(),
            hover,
            enabled_types: self.enabled_types.clone(),
            recommendation: self.recommendation,
            selected_block: self.selected_block.clone(),
            focused_fact: self.focused_fact.clone(),
            marker: self.marker.clone(),
        }
    }

    /// The log cut into paths, a new path starting at every selection.
    pub fn export_path(&self) -> PathDocument {
        let mut paths: Vec<Vec<PathStep>> = Vec::new();
        for step in &self.path_log {
            if step.action == Action::Select || paths.is_empty() {
                paths.push(Vec::new());
            }
            paths.last_mut().unwrap().push(step.clone());
        }
        let paths: Vec<ExplorationPath> = paths
            .into_iter()
            .map(|steps| {
                let facts: BTreeSet<&String> = steps.iter().flat_map(|s| &s.facts).collect();
                ExplorationPath { fact_count: facts.len(), steps }
            })
            .collect();
        PathDocument {
            table_id: self.table_id.clone(),
            path_count: paths.len(),
            step_count: self.path_log.len(),
            paths,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub combo: DepthCombo,
    pub summary: HoverSummary,
}

/// Everything a client needs to draw the current state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewState {
    pub table_id: String,
    pub combo: DepthCombo,
    pub page: Page,
    pub placements: Vec<Placement>,
    pub graph: HeaderLayerGraph,
    pub hover: Vec<NodeSummary>,
    pub enabled_types: FactTypeSet,
    pub recommendation: Recommendation,
    pub selected_block: Option<String>,
    pub focused_fact: Option<String>,
    pub marker: Option<Marker>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationPath {
    pub fact_count: usize,
    pub steps: Vec<PathStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDocument {
    pub table_id: String,
    pub path_count: usize,
    pub step_count: usize,
    pub paths: Vec<ExplorationPath>,
}
