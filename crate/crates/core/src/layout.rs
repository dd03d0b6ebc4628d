//! Header Layer graph of depth combinations and Block Layer pages.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::blocks::{blocks_for, enumerate_depth_combinations, Block, DepthCombo, Rect};
use crate::charts::{spec_for, ChartSpec};
use crate::config::Geometry;
use crate::error::{LayoutError, TableError};
use crate::facts::{DataFact, FactTypeSet};
use crate::table_model::{HeaderTree, HierTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub combo: DepthCombo,
    pub s_depth: usize,
    /// Position inside the S_depth group (R_depth descending).
    pub page_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub from: DepthCombo,
    pub to: DepthCombo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeaderLayerGraph {
    /// Ordered by S_depth, then page index.
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
}

pub fn build_header_layer(table: &HierTable) -> HeaderLayerGraph {
    let mut combos = enumerate_depth_combinations(table);
    combos.sort_by_key(|c| (c.s_depth(), std::cmp::Reverse(c.r_depth)));
    let mut nodes = Vec::with_capacity(combos.len());
    for (i, c) in combos.iter().enumerate() {
        let page_index = if i > 0 && nodes.last().is_some_and(|n: &GraphNode| n.s_depth == c.s_depth()) {
            nodes.last().unwrap().page_index + 1
        } else {
            0
        };
        nodes.push(GraphNode { combo: *c, s_depth: c.s_depth(), page_index });
    }
    let present: BTreeSet<DepthCombo> = combos.iter().copied().collect();
    let mut edges = Vec::new();
    for &from in &combos {
        for to in [DepthCombo::new(from.r_depth + 1, from.c_depth), DepthCombo::new(from.r_depth, from.c_depth + 1)] {
            if present.contains(&to) {
                edges.push(Edge { from, to });
            }
        }
    }
    edges.sort();
    HeaderLayerGraph { nodes, edges }
}

impl HeaderLayerGraph {
    pub fn node(&self, combo: DepthCombo) -> Option<&GraphNode> {
        self.nodes.iter().find(|n| n.combo == combo)
    }

    pub fn contains(&self, combo: DepthCombo) -> bool {
        self.node(combo).is_some()
    }

    /// Zoom-in targets, in page-index order.
    pub fn children(&self, combo: DepthCombo) -> Vec<DepthCombo> {
        self.ordered(self.edges.iter().filter(|e| e.from == combo).map(|e| e.to))
    }

    /// Zoom-out targets, in page-index order.
    pub fn parents(&self, combo: DepthCombo) -> Vec<DepthCombo> {
        self.ordered(self.edges.iter().filter(|e| e.to == combo).map(|e| e.from))
    }

    fn ordered(&self, combos: impl Iterator<Item = DepthCombo>) -> Vec<DepthCombo> {
        let mut v: Vec<DepthCombo> = combos.collect();
        v.sort_by_key(|c| self.node(*c).map(|n| n.page_index));
        v
    }

    /// Combos of one navigation row in page order.
    pub fn group(&self, s_depth: usize) -> Vec<DepthCombo> {
        self.nodes.iter().filter(|n| n.s_depth == s_depth).map(|n| n.combo).collect()
    }

    pub fn groups(&self) -> BTreeMap<usize, Vec<DepthCombo>> {
        let mut out: BTreeMap<usize, Vec<DepthCombo>> = BTreeMap::new();
        for n in &self.nodes {
            out.entry(n.s_depth).or_default().push(n.combo);
        }
        out
    }
}

/// Grid rect of the block at `(r_loc, c_loc)`: row node's leaf span, then the
/// column node's leaf span.
pub fn f_trans(
    row_tree: &HeaderTree,
    col_tree: &HeaderTree,
    r_loc: &[String],
    c_loc: &[String],
) -> Result<Rect, TableError> {
    let r = row_tree.resolve(r_loc)?;
    let c = col_tree.resolve(c_loc)?;
    Ok(Rect::from_spans(r.span, c.span))
}

/// Best-first order: score descending, then type name, then id.
pub fn rank_cmp(a: &DataFact, b: &DataFact) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.fact_type.name().cmp(b.fact_type.name()))
        .then_with(|| a.id.cmp(&b.id))
}

pub enum EmbedPolicy<'a> {
    MaxScore,
    /// Embed the fact with the highest bias value, falling back to rank order
    /// among equal biases.
    Biased(&'a dyn Fn(&DataFact) -> f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub combo: DepthCombo,
    pub blocks: Vec<Block>,
    pub embedded: BTreeMap<String, Option<String>>,
    pub alternatives: BTreeMap<String, Vec<String>>,
}

pub type FactsByBlock = BTreeMap<String, Vec<DataFact>>;

fn enabled_ranked<'a>(facts: &'a [DataFact], enabled: &FactTypeSet) -> Vec<&'a DataFact> {
    let mut v: Vec<&DataFact> = facts.iter().filter(|f| enabled.contains(&f.fact_type)).collect();
    v.sort_by(|a, b| rank_cmp(a, b));
    v
}

pub fn build_page(
    table: &HierTable,
    combo: DepthCombo,
    facts_by_block: &FactsByBlock,
    enabled: &FactTypeSet,
    policy: &EmbedPolicy,
) -> Page {
    page_from_blocks(combo, blocks_for(table, combo), facts_by_block, enabled, policy)
}

pub fn page_from_blocks(
    combo: DepthCombo,
    blocks: Vec<Block>,
    facts_by_block: &FactsByBlock,
    enabled: &FactTypeSet,
    policy: &EmbedPolicy,
) -> Page {
    let mut embedded = BTreeMap::new();
    let mut alternatives = BTreeMap::new();
    for block in &blocks {
        let ranked = enabled_ranked(facts_by_block.get(&block.id).map(Vec::as_slice).unwrap_or(&[]), enabled);
        let chosen = match policy {
            EmbedPolicy::MaxScore => ranked.first().copied(),
            EmbedPolicy::Biased(bias) => {
                let mut best: Option<(&DataFact, f64)> = None;
                for f in &ranked {
                    let b = bias(f);
                    if best.is_none_or(|(_, bb)| b > bb) {
                        best = Some((f, b));
                    }
                }
                best.map(|(f, _)| f)
            }
        };
        let chosen_id = chosen.map(|f| f.id.clone());
        let alts = ranked.iter().filter(|f| Some(&f.id) != chosen_id.as_ref()).map(|f| f.id.clone()).collect();
        embedded.insert(block.id.clone(), chosen_id);
        alternatives.insert(block.id.clone(), alts);
    }
    Page { combo, blocks, embedded, alternatives }
}

impl Page {
    pub fn block(&self, block_id: &str) -> Option<&Block> {
        self.blocks.iter().find(|b| b.id == block_id)
    }

    pub fn embedded_in(&self, block_id: &str) -> Option<&str> {
        self.embedded.get(block_id).and_then(|e| e.as_deref())
    }

    /// All fact ids shown or listed on the page.
    pub fn fact_ids(&self) -> impl Iterator<Item = &str> {
        self.blocks.iter().flat_map(|b| {
            self.embedded_in(&b.id)
                .into_iter()
                .chain(self.alternatives.get(&b.id).into_iter().flatten().map(String::as_str))
        })
    }
}

/// Embeds `fact_id` in `block_id`; the previous chart returns to the
/// alternatives at its rank position.
pub fn swap_embedded(
    page: &Page,
    block_id: &str,
    fact_id: &str,
    block_facts: &[DataFact],
) -> Result<Page, LayoutError> {
    if page.block(block_id).is_none() {
        return Err(LayoutError::UnknownBlock(block_id.to_string()));
    }
    let unknown = || LayoutError::UnknownFact { block_id: block_id.to_string(), fact_id: fact_id.to_string() };
    let listed = page.embedded_in(block_id) == Some(fact_id)
        || page.alternatives.get(block_id).is_some_and(|a| a.iter().any(|id| id == fact_id));
    if !listed {
        return Err(unknown());
    }
    let pool: BTreeSet<&str> = page
        .embedded_in(block_id)
        .into_iter()
        .chain(page.alternatives[block_id].iter().map(String::as_str))
        .collect();
    let mut ranked: Vec<&DataFact> = block_facts.iter().filter(|f| pool.contains(f.id.as_str())).collect();
    if ranked.len() != pool.len() {
        return Err(unknown());
    }
    ranked.sort_by(|a, b| rank_cmp(a, b));
    let mut next = page.clone();
    next.embedded.insert(block_id.to_string(), Some(fact_id.to_string()));
    next.alternatives.insert(
        block_id.to_string(),
        ranked.into_iter().filter(|f| f.id != fact_id).map(|f| f.id.clone()).collect(),
    );
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl PixelRect {
    /// True when `inner` lies strictly inside `self`.
    pub fn strictly_contains(&self, inner: &PixelRect) -> bool {
        inner.x > self.x
            && inner.y > self.y
            && inner.x + inner.width < self.x + self.width
            && inner.y + inner.height < self.y + self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub block_id: String,
    pub rect: Rect,
    /// The block's region on the body grid; columns run along x.
    pub pixel_rect: PixelRect,
    /// The chart area, centered in `pixel_rect`.
    pub chart_rect: PixelRect,
    /// Chart too small to draw; shown as a dot until zoomed.
    pub glyph: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fact_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartSpec>,
}

pub fn place(block: &Block, fact: Option<&DataFact>, g: &Geometry) -> Placement {
    let r = block.rect;
    let pixel_rect = PixelRect {
        x: r.y1 as f64 * g.cell_width,
        y: r.x1 as f64 * g.cell_height,
        width: r.cols() as f64 * g.cell_width,
        height: r.rows() as f64 * g.cell_height,
    };
    let (w, h) = (pixel_rect.width * g.fill, pixel_rect.height * g.fill);
    let chart_rect = PixelRect {
        x: pixel_rect.x + (pixel_rect.width - w) / 2.0,
        y: pixel_rect.y + (pixel_rect.height - h) / 2.0,
        width: w,
        height: h,
    };
    Placement {
        block_id: block.id.clone(),
        rect: r,
        pixel_rect,
        chart_rect,
        glyph: w < g.min_chart_width || h < g.min_chart_height,
        fact_id: fact.map(|f| f.id.clone()),
        chart: fact.map(spec_for),
    }
}

/// One placement per block of the page, in block order.
pub fn placements(page: &Page, facts_by_block: &FactsByBlock, g: &Geometry) -> Vec<Placement> {
    page.blocks
        .iter()
        .map(|b| {
            let fact = page
                .embedded_in(&b.id)
                .and_then(|id| facts_by_block.get(&b.id).and_then(|fs| fs.iter().find(|f| f.id == id)));
            place(b, fact, g)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoverSummary {
    pub blocks_with_facts: usize,
    pub total_facts: usize,
}

pub fn hover_summary(blocks: &[Block], facts_by_block: &FactsByBlock, enabled: &FactTypeSet) -> HoverSummary {
    let mut summary = HoverSummary { blocks_with_facts: 0, total_facts: 0 };
    for b in blocks {
        let n = facts_by_block.get(&b.id).map_or(0, |fs| fs.iter().filter(|f| enabled.contains(&f.fact_type)).count());
        if n > 0 {
            summary.blocks_with_facts += 1;
            summary.total_facts += n;
        }
    }
    summary
}
