//! Hierarchical table model: header trees over row and column leaves plus a
//! numeric body grid, and the structural checks every other module relies on.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TableError;

/// A body cell. `None` marks a missing value; it is never coerced to zero.
pub type Cell = Option<f64>;

/// Half-open range of leaf positions, `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn width(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.start <= pos && pos < self.end
    }
}

/// Untyped header description as it appears in interchange files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub label: String,
    #[serde(default)]
    pub children: Vec<NodeSpec>,
}

impl NodeSpec {
    pub fn leaf(label: impl Into<String>) -> Self {
        Self { label: label.into(), children: Vec::new() }
    }

    pub fn branch(label: impl Into<String>, children: Vec<NodeSpec>) -> Self {
        Self { label: label.into(), children }
    }

    fn max_depth(&self) -> usize {
        1 + self.children.iter().map(NodeSpec::max_depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderNode {
    pub label: String,
    pub children: Vec<HeaderNode>,
    pub span: Span,
}

impl HeaderNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn child(&self, label: &str) -> Option<&HeaderNode> {
        self.children.iter().find(|c| c.label == label)
    }

    fn to_spec(&self) -> NodeSpec {
        NodeSpec {
            label: self.label.clone(),
            children: self.children.iter().map(HeaderNode::to_spec).collect(),
        }
    }
}

/// A level-complete header tree under a virtual root at depth 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaderTree {
    pub root: HeaderNode,
    pub depth: usize,
}

impl HeaderTree {
    /// Builds a tree from its level-1 nodes. Leaves shallower than the deepest
    /// leaf are padded with pass-through nodes that repeat the parent label.
    pub fn from_specs(children: Vec<NodeSpec>) -> Self {
        Self::from_root_spec(NodeSpec::branch("", children))
    }

    pub fn from_root_spec(root: NodeSpec) -> Self {
        let depth = root.max_depth() - 1;
        let mut next_leaf = 0;
        let root = build_node(root, 0, depth, &mut next_leaf);
        Self { root, depth }
    }

    pub fn to_root_spec(&self) -> NodeSpec {
        self.root.to_spec()
    }

    pub fn leaf_count(&self) -> usize {
        self.root.span.width()
    }

    /// Nodes at `level` in left-to-right order; level 0 is the virtual root.
    pub fn nodes_at_level(&self, level: usize) -> Vec<(Vec<String>, &HeaderNode)> {
        let mut out = Vec::new();
        collect_level(&self.root, level, &mut Vec::new(), &mut out);
        out
    }

    /// Every node with its label path, in pre-order.
    pub fn walk(&self) -> Vec<(Vec<String>, &HeaderNode)> {
        let mut out = Vec::new();
        walk_node(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// Full label paths of the leaves, ordered by leaf position.
    pub fn leaf_paths(&self) -> Vec<Vec<String>> {
        self.nodes_at_level(self.depth).into_iter().map(|(p, _)| p).collect()
    }

    pub fn resolve(&self, path: &[String]) -> Result<&HeaderNode, TableError> {
        resolve_node(self, path)
    }
}

fn build_node(spec: NodeSpec, level: usize, depth: usize, next_leaf: &mut usize) -> HeaderNode {
    let start = *next_leaf;
    let mut children = spec.children;
    if children.is_empty() && level < depth {
        children.push(NodeSpec::leaf(spec.label.clone()));
    }
    if children.is_empty() {
        *next_leaf += 1;
        return HeaderNode { label: spec.label, children: Vec::new(), span: Span::new(start, start + 1) };
    }
    let children: Vec<HeaderNode> =
        children.into_iter().map(|c| build_node(c, level + 1, depth, next_leaf)).collect();
    HeaderNode { label: spec.label, children, span: Span::new(start, *next_leaf) }
}

fn collect_level<'a>(
    node: &'a HeaderNode,
    level: usize,
    path: &mut Vec<String>,
    out: &mut Vec<(Vec<String>, &'a HeaderNode)>,
) {
    if path.len() == level {
        out.push((path.clone(), node));
        return;
    }
    for child in &node.children {
        path.push(child.label.clone());
        collect_level(child, level, path, out);
        path.pop();
    }
}

fn walk_node<'a>(node: &'a HeaderNode, path: &mut Vec<String>, out: &mut Vec<(Vec<String>, &'a HeaderNode)>) {
    out.push((path.clone(), node));
    for child in &node.children {
        path.push(child.label.clone());
        walk_node(child, path, out);
        path.pop();
    }
}

/// Follows child labels from the root. The empty path is the root itself.
pub fn resolve_node<'a>(tree: &'a HeaderTree, path: &[String]) -> Result<&'a HeaderNode, TableError> {
    let mut node = &tree.root;
    for (level, label) in path.iter().enumerate() {
        node = node.child(label).ok_or_else(|| TableError::UnknownLabel { label: label.clone(), level: level + 1 })?;
    }
    Ok(node)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierTable {
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_id: Option<String>,
    pub row_header: HeaderTree,
    pub col_header: HeaderTree,
    pub body: Vec<Vec<Cell>>,
}

impl HierTable {
    /// Builds and validates a table from level-1 header nodes and a row-major body.
    pub fn new(
        title: impl Into<String>,
        rows: Vec<NodeSpec>,
        cols: Vec<NodeSpec>,
        body: Vec<Vec<Cell>>,
    ) -> Result<Self, TableError> {
        let table = Self {
            title: title.into(),
            source_id: None,
            row_header: HeaderTree::from_specs(rows),
            col_header: HeaderTree::from_specs(cols),
            body,
        };
        let report = validate(&table);
        if report.is_ok() {
            Ok(table)
        } else {
            Err(TableError::Invalid(report))
        }
    }

    pub fn row_count(&self) -> usize {
        self.row_header.leaf_count()
    }

    pub fn col_count(&self) -> usize {
        self.col_header.leaf_count()
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.body.get(row).and_then(|r| r.get(col)).copied().flatten()
    }
}

/// Identifies a block by its row and column header label paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockLocation {
    pub r_loc: Vec<String>,
    pub c_loc: Vec<String>,
}

impl BlockLocation {
    pub fn new<R, C>(r_loc: R, c_loc: C) -> Self
    where
        R: IntoIterator,
        R::Item: Into<String>,
        C: IntoIterator,
        C::Item: Into<String>,
    {
        Self {
            r_loc: r_loc.into_iter().map(Into::into).collect(),
            c_loc: c_loc.into_iter().map(Into::into).collect(),
        }
    }
}

/// A body cell addressed by full leaf paths in both trees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellAddress {
    pub row_path: Vec<String>,
    pub col_path: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { location: location.into(), message: message.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate(table: &HierTable) -> ValidationReport {
    let mut report = ValidationReport::default();
    validate_tree(&table.row_header, "row", &mut report);
    validate_tree(&table.col_header, "col", &mut report);

    let row_leaves = table.row_header.leaf_count();
    let col_leaves = table.col_header.leaf_count();
    if table.body.is_empty() || row_leaves == 0 || col_leaves == 0 {
        report.push("body", "empty body");
    }
    if table.body.len() != row_leaves {
        report.push("body", format!("row leaves={}, body rows={}", row_leaves, table.body.len()));
    }
    for (i, row) in table.body.iter().enumerate() {
        if row.len() != col_leaves {
            report.push(format!("body[{i}]"), format!("column leaves={}, body cells={}", col_leaves, row.len()));
        }
        for (j, cell) in row.iter().enumerate() {
            if matches!(cell, Some(v) if !v.is_finite()) {
                report.push(format!("body[{i}][{j}]"), "non-finite value");
            }
        }
    }
    report
}

fn validate_tree(tree: &HeaderTree, axis: &str, report: &mut ValidationReport) {
    if tree.depth == 0 {
        report.push(axis, "header has no levels");
    }
    let mut leaves = 0;
    count_leaves(&tree.root, &mut leaves);
    if tree.root.span != Span::new(0, leaves) {
        report.push(
            format!("{axis}:/"),
            format!("root span {}..{} does not cover {} leaves", tree.root.span.start, tree.root.span.end, leaves),
        );
    }
    let mut path = Vec::new();
    validate_node(&tree.root, 0, tree.depth, axis, &mut path, report);
}

fn count_leaves(node: &HeaderNode, n: &mut usize) {
    if node.is_leaf() {
        *n += 1;
    }
    node.children.iter().for_each(|c| count_leaves(c, n));
}

fn validate_node(
    node: &HeaderNode,
    level: usize,
    depth: usize,
    axis: &str,
    path: &mut Vec<String>,
    report: &mut ValidationReport,
) {
    let loc = format!("{axis}:/{}", path.join("/"));
    if level > 0 && node.label.is_empty() {
        report.push(&loc, "empty label");
    }
    if node.is_leaf() {
        if level != depth && level > 0 {
            report.push(&loc, format!("leaf at level {level}, tree depth {depth}"));
        }
        if node.span.width() != 1 {
            report.push(&loc, format!("leaf span width {}", node.span.width()));
        }
        return;
    }
    if level >= depth {
        report.push(&loc, format!("node below tree depth {depth}"));
    }
    let mut cursor = node.span.start;
    let mut tiled = true;
    for child in &node.children {
        if child.span.start != cursor || child.span.end <= child.span.start {
            tiled = false;
        }
        cursor = child.span.end;
    }
    if !tiled || cursor != node.span.end {
        report.push(&loc, "children spans do not tile parent span");
    }
    let mut seen = HashSet::new();
    for child in &node.children {
        if !seen.insert(child.label.as_str()) {
            report.push(&loc, format!("duplicate sibling label \"{}\"", child.label));
        }
    }
    for child in &node.children {
        path.push(child.label.clone());
        validate_node(child, level + 1, depth, axis, path, report);
        path.pop();
    }
}
