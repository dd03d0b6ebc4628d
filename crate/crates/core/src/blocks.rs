//! Block enumeration, recursive cell addressing and the merge/extract data
//! transforms that turn a block's cells into detector inputs.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::BlockError;
use crate::table_model::{BlockLocation, CellAddress, HeaderNode, HierTable, Span};

/// A row/column header depth pair. `(0, 0)` is never produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DepthCombo {
    pub r_depth: usize,
    pub c_depth: usize,
}

impl DepthCombo {
    pub const fn new(r_depth: usize, c_depth: usize) -> Self {
        Self { r_depth, c_depth }
    }

    pub fn s_depth(&self) -> usize {
        self.r_depth + self.c_depth
    }
}

impl fmt::Display for DepthCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.r_depth, self.c_depth)
    }
}

/// Body-grid ranges: rows `x1..x2`, columns `y1..y2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x1: usize,
    pub x2: usize,
    pub y1: usize,
    pub y2: usize,
}

impl Rect {
    pub fn from_spans(rows: Span, cols: Span) -> Self {
        Self { x1: rows.start, x2: rows.end, y1: cols.start, y2: cols.end }
    }

    pub fn rows(&self) -> usize {
        self.x2 - self.x1
    }

    pub fn cols(&self) -> usize {
        self.y2 - self.y1
    }

    pub fn area(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x1 < other.x2 && other.x1 < self.x2 && self.y1 < other.y2 && other.y1 < self.y2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub id: String,
    pub location: BlockLocation,
    pub r_depth: usize,
    pub c_depth: usize,
    pub rect: Rect,
}

impl Block {
    pub fn combo(&self) -> DepthCombo {
        DepthCombo::new(self.r_depth, self.c_depth)
    }

    /// Location labels joined for display, e.g. `Europe / Sony / 2017`.
    pub fn display_name(&self) -> String {
        let labels: Vec<&str> =
            self.location.r_loc.iter().chain(&self.location.c_loc).map(String::as_str).collect();
        if labels.is_empty() {
            "all".to_string()
        } else {
            labels.join(" / ")
        }
    }
}

/// Stable, filename-safe key for a location: labels percent-escaped, joined
/// by `.`, row and column paths separated by `~`, `*` for an empty path.
pub fn block_id(location: &BlockLocation) -> String {
    fn path(labels: &[String]) -> String {
        if labels.is_empty() {
            return "*".to_string();
        }
        labels.iter().map(|l| escape(l)).collect::<Vec<_>>().join(".")
    }
    format!("{}~{}", path(&location.r_loc), path(&location.c_loc))
}

fn escape(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for b in label.bytes() {
        if b.is_ascii_alphanumeric() || b == b'-' || b == b'_' {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

/// All depth combinations except `(0,0)`, ordered by S_depth then R_depth.
pub fn enumerate_depth_combinations(table: &HierTable) -> Vec<DepthCombo> {
    let (r, s) = (table.row_header.depth, table.col_header.depth);
    let mut combos: Vec<DepthCombo> = (0..=r)
        .flat_map(|rd| (0..=s).map(move |cd| DepthCombo::new(rd, cd)))
        .filter(|c| c.s_depth() > 0)
        .collect();
    combos.sort_by_key(|c| (c.s_depth(), c.r_depth));
    combos
}

/// One block per (row node at `r_depth`) × (column node at `c_depth`), row-major.
pub fn blocks_for(table: &HierTable, combo: DepthCombo) -> Vec<Block> {
    let rows = table.row_header.nodes_at_level(combo.r_depth);
    let cols = table.col_header.nodes_at_level(combo.c_depth);
    let mut out = Vec::with_capacity(rows.len() * cols.len());
    for (r_path, r_node) in &rows {
        for (c_path, c_node) in &cols {
            let location = BlockLocation { r_loc: r_path.clone(), c_loc: c_path.clone() };
            out.push(Block {
                id: block_id(&location),
                location,
                r_depth: combo.r_depth,
                c_depth: combo.c_depth,
                rect: Rect::from_spans(r_node.span, c_node.span),
            });
        }
    }
    out
}

/// Extends a fixed prefix through every descendant down to the leaves.
fn extend_paths(node: &HeaderNode, prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    if node.is_leaf() {
        out.push(prefix.clone());
        return;
    }
    for child in &node.children {
        prefix.push(child.label.clone());
        extend_paths(child, prefix, out);
        prefix.pop();
    }
}

fn leaf_paths_under(tree: &crate::table_model::HeaderTree, loc: &[String]) -> Vec<Vec<String>> {
    let Ok(node) = tree.resolve(loc) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    extend_paths(node, &mut loc.to_vec(), &mut out);
    out
}

/// Every `(row path, column path)` pair inside the block, row-major.
pub fn cell_addresses(table: &HierTable, block: &Block) -> Vec<CellAddress> {
    let rows = leaf_paths_under(&table.row_header, &block.location.r_loc);
    let cols = leaf_paths_under(&table.col_header, &block.location.c_loc);
    rows.iter()
        .flat_map(|r| cols.iter().map(move |c| CellAddress { row_path: r.clone(), col_path: c.clone() }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// Rows merged together: one value per column label.
    RowMerge,
    /// Columns merged together: one value per row label.
    ColMerge,
    /// One row of the block over its column labels.
    RowSeries,
    /// One column of the block over its row labels.
    ColSeries,
    /// All present cells of the block.
    Flat,
}

impl FormKind {
    pub fn name(&self) -> &'static str {
        match self {
            FormKind::RowMerge => "row_merge",
            FormKind::ColMerge => "col_merge",
            FormKind::RowSeries => "row_series",
            FormKind::ColSeries => "col_series",
            FormKind::Flat => "flat",
        }
    }

    pub fn is_merge(&self) -> bool {
        matches!(self, FormKind::RowMerge | FormKind::ColMerge)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregator {
    Sum,
    Mean,
    Max,
    Min,
    None,
}

impl Aggregator {
    pub const ALL: [Aggregator; 4] = [Aggregator::Sum, Aggregator::Mean, Aggregator::Max, Aggregator::Min];

    pub fn name(&self) -> &'static str {
        match self {
            Aggregator::Sum => "sum",
            Aggregator::Mean => "mean",
            Aggregator::Max => "max",
            Aggregator::Min => "min",
            Aggregator::None => "none",
        }
    }

    fn apply(&self, values: &[f64]) -> Option<f64> {
        if values.is_empty() {
            return None;
        }
        Some(match self {
            Aggregator::Sum => values.iter().sum(),
            Aggregator::Mean => values.iter().sum::<f64>() / values.len() as f64,
            Aggregator::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Aggregator::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregator::None => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub block_id: String,
    pub transform: String,
}

/// A transformed view of a block's cells. Only present values are kept; for
/// `Flat` the values are row-major and `shape` records the block extent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataForm {
    pub kind: FormKind,
    pub aggregator: Aggregator,
    pub labels: Vec<String>,
    pub values: Vec<f64>,
    /// The row (or column) a series was extracted from.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_label: Option<String>,
    pub shape: (usize, usize),
    pub provenance: Provenance,
}

impl DataForm {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True when the value order carries meaning (merges, series, and flat
    /// forms of a single row or column).
    pub fn is_sequence(&self) -> bool {
        self.kind != FormKind::Flat || self.shape.0 == 1 || self.shape.1 == 1
    }

    /// Human-readable description of how the form was derived.
    pub fn phrase(&self) -> String {
        match (self.kind, &self.series_label) {
            (FormKind::RowMerge, _) => format!("{} across rows", self.aggregator.name()),
            (FormKind::ColMerge, _) => format!("{} across columns", self.aggregator.name()),
            (FormKind::RowSeries, Some(l)) => format!("row {l}"),
            (FormKind::ColSeries, Some(l)) => format!("column {l}"),
            _ => "all cells".to_string(),
        }
    }
}

/// Shortest path suffixes that tell the given leaves apart.
fn display_labels(paths: &[Vec<String>]) -> Vec<String> {
    let longest = paths.iter().map(Vec::len).max().unwrap_or(0);
    for k in 1..=longest.max(1) {
        let labels: Vec<String> =
            paths.iter().map(|p| p[p.len().saturating_sub(k)..].join(" / ")).collect();
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() == labels.len() {
            return labels;
        }
    }
    paths.iter().map(|p| p.join(" / ")).collect()
}

/// Merging and extraction transforms over one block.
///
/// Emits, in order: `row_merge` and `col_merge` for every aggregator when the
/// merged axis has at least two entries; one `row_series` per row (and
/// `col_series` per column) when the block has at least two rows (columns);
/// and a single `flat` form. Missing cells are skipped; series with fewer
/// than two present values are dropped.
pub fn transform(table: &HierTable, block: &Block) -> Result<Vec<DataForm>, BlockError> {
    let rect = block.rect;
    let grid: Vec<Vec<Option<f64>>> =
        (rect.x1..rect.x2).map(|r| (rect.y1..rect.y2).map(|c| table.cell(r, c)).collect()).collect();
    if grid.iter().flatten().all(Option::is_none) {
        return Err(BlockError::EmptyBlock(block.id.clone()));
    }
    let row_labels = display_labels(&leaf_paths_under(&table.row_header, &block.location.r_loc));
    let col_labels = display_labels(&leaf_paths_under(&table.col_header, &block.location.c_loc));
    let provenance = |transform: String| Provenance { block_id: block.id.clone(), transform };
    let shape = (rect.rows(), rect.cols());
    let mut forms = Vec::new();

    let merge = |kind: FormKind, agg: Aggregator| -> DataForm {
        let (labels, lines): (&[String], Vec<Vec<f64>>) = match kind {
            FormKind::RowMerge => (
                &col_labels,
                (0..rect.cols()).map(|j| grid.iter().filter_map(|row| row[j]).collect()).collect(),
            ),
            _ => (&row_labels, grid.iter().map(|row| row.iter().flatten().copied().collect()).collect()),
        };
        let (labels, values) = labels
            .iter()
            .zip(&lines)
            .filter_map(|(l, line)| agg.apply(line).map(|v| (l.clone(), v)))
            .unzip();
        DataForm {
            kind,
            aggregator: agg,
            labels,
            values,
            series_label: None,
            shape,
            provenance: provenance(format!("{}({})", kind.name(), agg.name())),
        }
    };
    if rect.rows() >= 2 {
        forms.extend(Aggregator::ALL.iter().map(|&a| merge(FormKind::RowMerge, a)));
    }
    if rect.cols() >= 2 {
        forms.extend(Aggregator::ALL.iter().map(|&a| merge(FormKind::ColMerge, a)));
    }

    let series = |kind: FormKind, key: &String, labels: &[String], cells: Vec<Option<f64>>| -> Option<DataForm> {
        let (labels, values): (Vec<String>, Vec<f64>) =
            labels.iter().zip(cells).filter_map(|(l, v)| v.map(|v| (l.clone(), v))).unzip();
        (values.len() >= 2).then(|| DataForm {
            kind,
            aggregator: Aggregator::None,
            labels,
            values,
            series_label: Some(key.clone()),
            shape,
            provenance: provenance(format!("{}[{key}]", kind.name())),
        })
    };
    if rect.rows() >= 2 {
        for (i, key) in row_labels.iter().enumerate() {
            forms.extend(series(FormKind::RowSeries, key, &col_labels, grid[i].clone()));
        }
    }
    if rect.cols() >= 2 {
        for (j, key) in col_labels.iter().enumerate() {
            forms.extend(series(FormKind::ColSeries, key, &row_labels, grid.iter().map(|row| row[j]).collect()));
        }
    }

    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (i, row) in grid.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(v) = cell {
                labels.push(match shape {
                    (1, _) => col_labels[j].clone(),
                    (_, 1) => row_labels[i].clone(),
                    _ => format!("{} @ {}", row_labels[i], col_labels[j]),
                });
                values.push(*v);
            }
        }
    }
    forms.push(DataForm {
        kind: FormKind::Flat,
        aggregator: Aggregator::None,
        labels,
        values,
        series_label: None,
        shape,
        provenance: provenance("flat".to_string()),
    });
    Ok(forms)
}
