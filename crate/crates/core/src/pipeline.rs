//! Whole-table analysis: every block of every depth combination with its
//! facts, plus the artifacts written by the CLI and served over HTTP.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{blocks_for, Block, DepthCombo};
use crate::config::EngineConfig;
use crate::facts::{extract_block_facts, DataFact, FactTypeSet};
use crate::layout::{build_header_layer, page_from_blocks, EmbedPolicy, FactsByBlock, HeaderLayerGraph, Page};
use crate::table_model::HierTable;

#[derive(Debug, Clone)]
pub struct Analysis {
    pub table: HierTable,
    pub config: EngineConfig,
    pub graph: HeaderLayerGraph,
    /// Keyed by combo, blocks in row-major order.
    pub blocks: BTreeMap<DepthCombo, Vec<Block>>,
    pub facts_by_block: FactsByBlock,
    fact_index: HashMap<String, (String, usize)>,
}

impl Analysis {
    pub fn new(table: HierTable, config: EngineConfig) -> Self {
        let graph = build_header_layer(&table);
        let blocks: BTreeMap<DepthCombo, Vec<Block>> =
            graph.nodes.iter().map(|n| (n.combo, blocks_for(&table, n.combo))).collect();
        let all: Vec<&Block> = graph.nodes.iter().flat_map(|n| &blocks[&n.combo]).collect();
        let extracted: Vec<(String, Vec<DataFact>)> = all
            .par_iter()
            .map(|b| (b.id.clone(), extract_block_facts(&table, b, &config.detectors)))
            .collect();
        let mut fact_index = HashMap::new();
        for (block_id, facts) in &extracted {
            for (i, f) in facts.iter().enumerate() {
                fact_index.insert(f.id.clone(), (block_id.clone(), i));
            }
        }
        let facts_by_block = extracted.into_iter().collect();
        Self { table, config, graph, blocks, facts_by_block, fact_index }
    }

    pub fn fact(&self, id: &str) -> Option<&DataFact> {
        let (block, i) = self.fact_index.get(id)?;
        self.facts_by_block.get(block).map(|fs| &fs[*i])
    }

    pub fn block(&self, id: &str) -> Option<&Block> {
        self.blocks.values().flatten().find(|b| b.id == id)
    }

    pub fn block_facts(&self, block_id: &str) -> &[DataFact] {
        self.facts_by_block.get(block_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn blocks_of(&self, combo: DepthCombo) -> &[Block] {
        self.blocks.get(&combo).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Facts in page order: graph nodes, then blocks, then extraction order.
    pub fn facts(&self) -> Vec<&DataFact> {
        self.graph
            .nodes
            .iter()
            .flat_map(|n| self.blocks_of(n.combo))
            .flat_map(|b| self.block_facts(&b.id))
            .collect()
    }

    pub fn page(&self, combo: DepthCombo, enabled: &FactTypeSet, policy: &EmbedPolicy) -> Page {
        page_from_blocks(combo, self.blocks_of(combo).to_vec(), &self.facts_by_block, enabled, policy)
    }
}

/// Which part of the analysis an artifact covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactScope {
    pub types: FactTypeSet,
    pub combo: Option<DepthCombo>,
}

impl Default for ArtifactScope {
    fn default() -> Self {
        Self { types: crate::facts::all_fact_types(), combo: None }
    }
}

#[derive(Serialize)]
struct FactsDoc<'a> {
    table: &'a str,
    fact_count: usize,
    facts: Vec<&'a DataFact>,
}

#[derive(Serialize)]
struct PagesDoc<'a> {
    table: &'a str,
    graph: &'a HeaderLayerGraph,
    pages: Vec<Page>,
}

fn in_scope(a: &Analysis, scope: &ArtifactScope) -> Vec<DepthCombo> {
    a.graph.nodes.iter().map(|n| n.combo).filter(|c| scope.combo.is_none_or(|s| s == *c)).collect()
}

/// Contents of `facts.json`.
pub fn facts_json(a: &Analysis, scope: &ArtifactScope) -> String {
    let facts = scoped_facts(a, scope);
    let doc = FactsDoc { table: &a.table.title, fact_count: facts.len(), facts };
    serde_json::to_string_pretty(&doc).expect("facts document") + "\n"
}

/// Contents of `pages.json`.
pub fn pages_json(a: &Analysis, scope: &ArtifactScope) -> String {
    let pages =
        in_scope(a, scope).into_iter().map(|c| a.page(c, &scope.types, &EmbedPolicy::MaxScore)).collect();
    let doc = PagesDoc { table: &a.table.title, graph: &a.graph, pages };
    serde_json::to_string_pretty(&doc).expect("pages document") + "\n"
}

/// Facts covered by a scope, for chart export.
pub fn scoped_facts<'a>(a: &'a Analysis, scope: &ArtifactScope) -> Vec<&'a DataFact> {
    in_scope(a, scope)
        .into_iter()
        .flat_map(|c| a.blocks_of(c))
        .flat_map(|b| a.block_facts(&b.id))
        .filter(|f| scope.types.contains(&f.fact_type))
        .collect()
}
