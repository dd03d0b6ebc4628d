//! Table importers.
//!
//! Two interchange formats are supported. The canonical format is the
//! internal source of truth:
//!
//! ```json
//! { "title": "Sales", "rowTree": Node, "colTree": Node, "body": [[1.0, null]] }
//! ```
//!
//! where `Node = { "label": str, "children": [Node] }` and each tree's top
//! node is the virtual root. The matrix format is a raw cell grid with merged
//! rectangles (`[top, left, bottom, right]`, inclusive) and the size of the
//! header band:
//!
//! ```json
//! { "cells": [["", "Q1"], ["A", "1"]], "merges": [], "headerRows": 1, "headerCols": 1 }
//! ```
//!
//! The matrix importer normalizes into the same [`HierTable`] the canonical
//! parser produces.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{IngestError, TableError};
use crate::table_model::{validate, Cell, HeaderTree, HierTable, NodeSpec};

/// `[top, left, bottom, right]`, inclusive grid coordinates.
pub type Merge = [usize; 4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MatrixTableFile {
    #[serde(default)]
    pub title: String,
    pub cells: Vec<Vec<MatrixCell>>,
    #[serde(default)]
    pub merges: Vec<Merge>,
    pub header_rows: usize,
    pub header_cols: usize,
}

/// Matrix cells are text; numbers and nulls are accepted for convenience.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixCell {
    Text(String),
    Number(f64),
    Empty,
}

impl MatrixCell {
    fn text(&self) -> String {
        match self {
            MatrixCell::Text(s) => s.trim().to_string(),
            MatrixCell::Number(v) => v.to_string(),
            MatrixCell::Empty => String::new(),
        }
    }

    fn number(&self) -> Cell {
        match self {
            MatrixCell::Text(s) => parse_number(s),
            MatrixCell::Number(v) if v.is_finite() => Some(*v),
            _ => None,
        }
    }
}

impl From<&str> for MatrixCell {
    fn from(s: &str) -> Self {
        MatrixCell::Text(s.to_string())
    }
}

/// Parses a business-style number: thousands separators and currency symbols
/// are ignored. Anything else unparseable is missing.
pub fn parse_number(raw: &str) -> Cell {
    let cleaned: String = raw
        .trim()
        .chars()
        .filter(|c| !matches!(c, ',' | '$' | '€' | '£' | '¥' | '₹' | ' ' | '\u{a0}'))
        .collect();
    if cleaned.is_empty() {
        return None;
    }
    cleaned.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parses either format, choosing by the presence of a `cells` key.
pub fn parse_any(text: &str) -> Result<HierTable, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| IngestError::schema("/", e.to_string()))?;
    if value.get("cells").is_some() {
        let file: MatrixTableFile =
            serde_json::from_value(value).map_err(|e| IngestError::schema("/", e.to_string()))?;
        parse_matrix(&file)
    } else {
        canonical_from_value(&value)
    }
}

pub fn parse_matrix(file: &MatrixTableFile) -> Result<HierTable, IngestError> {
    let height = file.cells.len();
    let width = file.cells.first().map_or(0, Vec::len);
    for (i, row) in file.cells.iter().enumerate() {
        if row.len() != width {
            return Err(IngestError::schema(format!("/cells/{i}"), format!("expected {width} cells, found {}", row.len())));
        }
    }
    if file.header_rows == 0 {
        return Err(IngestError::schema("/headerRows", "must be at least 1"));
    }
    if file.header_cols == 0 {
        return Err(IngestError::schema("/headerCols", "must be at least 1"));
    }
    let (hr, hc) = (file.header_rows, file.header_cols);
    if height <= hr || width <= hc {
        return Err(IngestError::EmptyBody);
    }

    check_merges(&file.merges, height, width)?;

    let mut col_merges = Vec::new();
    let mut row_merges = Vec::new();
    for &m @ [top, left, bottom, right] in &file.merges {
        let in_body_rows = top >= hr;
        let in_body_cols = left >= hc;
        let crosses_rows = top < hr && bottom >= hr;
        let crosses_cols = left < hc && right >= hc;
        if crosses_rows && crosses_cols {
            return Err(IngestError::MalformedMerge(format!("{m:?} spans the header and the body")));
        }
        match (in_body_rows, in_body_cols) {
            (true, true) => return Err(IngestError::MalformedMerge(format!("{m:?} merges body cells"))),
            (false, false) if bottom < hr && right < hc => {} // corner stub
            (false, true) if bottom < hr => col_merges.push([top, left - hc, bottom, right - hc]),
            (true, false) if right < hc => row_merges.push([left, top - hr, right, bottom - hr]),
            _ => return Err(IngestError::MalformedMerge(format!("{m:?} spans the header and the body"))),
        }
    }

    let col_grid: Vec<Vec<String>> =
        (0..hr).map(|r| (hc..width).map(|c| file.cells[r][c].text()).collect()).collect();
    let row_grid: Vec<Vec<String>> =
        (0..hc).map(|c| (hr..height).map(|r| file.cells[r][c].text()).collect()).collect();

    let cols = parse_header_axis(&col_grid, &col_merges, "column")?;
    let rows = parse_header_axis(&row_grid, &row_merges, "row")?;
    let body: Vec<Vec<Cell>> =
        (hr..height).map(|r| (hc..width).map(|c| file.cells[r][c].number()).collect()).collect();

    let table = HierTable {
        title: file.title.clone(),
        source_id: None,
        row_header: HeaderTree::from_specs(rows),
        col_header: HeaderTree::from_specs(cols),
        body,
    };
    finish(table)
}

fn check_merges(merges: &[Merge], height: usize, width: usize) -> Result<(), IngestError> {
    for &m @ [top, left, bottom, right] in merges {
        if top > bottom || left > right || bottom >= height || right >= width {
            return Err(IngestError::MalformedMerge(format!("{m:?} lies outside the {height}x{width} grid")));
        }
    }
    for (i, a) in merges.iter().enumerate() {
        for b in &merges[i + 1..] {
            if a[0] <= b[2] && b[0] <= a[2] && a[1] <= b[3] && b[1] <= a[3] {
                return Err(IngestError::MalformedMerge(format!("{a:?} overlaps {b:?}")));
            }
        }
    }
    Ok(())
}

/// A header rectangle in axis-local coordinates: levels `top..=bottom`,
/// positions `start..end`.
#[derive(Debug, Clone)]
struct HeaderRect {
    top: usize,
    bottom: usize,
    start: usize,
    end: usize,
    label: String,
}

/// `grid[level][position]`; merges as `[level0, pos0, level1, pos1]` inclusive.
fn parse_header_axis(grid: &[Vec<String>], merges: &[Merge], axis: &str) -> Result<Vec<NodeSpec>, IngestError> {
    let levels = grid.len();
    let positions = grid.first().map_or(0, Vec::len);
    // owner[level][pos] = index into rects
    let mut owner = vec![vec![usize::MAX; positions]; levels];
    let mut rects: Vec<HeaderRect> = Vec::new();
    for &[l0, p0, l1, p1] in merges {
        let idx = rects.len();
        rects.push(HeaderRect { top: l0, bottom: l1, start: p0, end: p1 + 1, label: grid[l0][p0].clone() });
        for row in owner.iter_mut().take(l1 + 1).skip(l0) {
            row[p0..=p1].iter_mut().for_each(|o| *o = idx);
        }
    }
    for level in 0..levels {
        for pos in 0..positions {
            if owner[level][pos] != usize::MAX {
                continue;
            }
            let label = grid[level][pos].clone();
            if label.is_empty() {
                // A blank cell continues the single-position header above it.
                let above = level.checked_sub(1).map(|l| owner[l][pos]);
                match above {
                    Some(idx) if rects[idx].end - rects[idx].start == 1 && rects[idx].bottom == level - 1 => {
                        rects[idx].bottom = level;
                        owner[level][pos] = idx;
                        continue;
                    }
                    _ => {
                        return Err(IngestError::NonRectangularHierarchy(format!(
                            "blank {axis} header cell at level {} position {pos}",
                            level + 1
                        )))
                    }
                }
            }
            owner[level][pos] = rects.len();
            rects.push(HeaderRect { top: level, bottom: level, start: pos, end: pos + 1, label });
        }
    }

    for r in &rects {
        if r.label.is_empty() {
            return Err(IngestError::NonRectangularHierarchy(format!(
                "empty {axis} header label at level {} position {}",
                r.top + 1,
                r.start
            )));
        }
        if r.bottom == levels - 1 && r.end - r.start > 1 {
            return Err(IngestError::NonRectangularHierarchy(format!(
                "{axis} header {:?} spans {} body positions without sub-headers",
                r.label,
                r.end - r.start
            )));
        }
        if r.top > 0 {
            let parent = &rects[owner[r.top - 1][r.start]];
            if parent.start > r.start || parent.end < r.end {
                return Err(IngestError::NonRectangularHierarchy(format!(
                    "{axis} header {:?} straddles parents",
                    r.label
                )));
            }
        }
    }

    let top_level: Vec<usize> = rect_children(&rects, &owner, None, positions);
    Ok(top_level.into_iter().map(|i| build_spec(&rects, &owner, i, positions)).collect())
}

fn rect_children(rects: &[HeaderRect], owner: &[Vec<usize>], parent: Option<usize>, positions: usize) -> Vec<usize> {
    let (level, start, end) = match parent {
        None => (0, 0, positions),
        Some(p) => (rects[p].bottom + 1, rects[p].start, rects[p].end),
    };
    if level >= owner.len() {
        return Vec::new();
    }
    let mut out: Vec<usize> = Vec::new();
    for &idx in &owner[level][start..end] {
        if out.last() != Some(&idx) {
            out.push(idx);
        }
    }
    out
}

fn build_spec(rects: &[HeaderRect], owner: &[Vec<usize>], idx: usize, positions: usize) -> NodeSpec {
    let children = rect_children(rects, owner, Some(idx), positions)
        .into_iter()
        .map(|c| build_spec(rects, owner, c, positions))
        .collect();
    NodeSpec::branch(rects[idx].label.clone(), children)
}

fn finish(table: HierTable) -> Result<HierTable, IngestError> {
    if let Some(dup) = first_duplicate(&table.row_header).or_else(|| first_duplicate(&table.col_header)) {
        return Err(IngestError::NonRectangularHierarchy(format!("duplicate sibling label {dup:?}")));
    }
    let report = validate(&table);
    if report.is_ok() {
        Ok(table)
    } else {
        Err(TableError::Invalid(report).into())
    }
}

fn first_duplicate(tree: &HeaderTree) -> Option<String> {
    tree.walk().into_iter().find_map(|(_, node)| {
        let mut seen = std::collections::HashSet::new();
        node.children.iter().find(|c| !seen.insert(&c.label)).map(|c| c.label.clone())
    })
}

pub fn parse_canonical(text: &str) -> Result<HierTable, IngestError> {
    let value: Value = serde_json::from_str(text).map_err(|e| IngestError::schema("/", e.to_string()))?;
    canonical_from_value(&value)
}

fn canonical_from_value(value: &Value) -> Result<HierTable, IngestError> {
    let obj = value.as_object().ok_or_else(|| IngestError::schema("/", "expected an object"))?;
    let title = match obj.get("title") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(IngestError::schema("/title", "expected a string")),
        None => return Err(IngestError::schema("/title", "missing field")),
    };
    let source_id = match obj.get("sourceId") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(IngestError::schema("/sourceId", "expected a string")),
    };
    let row_root = node_from_value(obj.get("rowTree"), "/rowTree")?;
    let col_root = node_from_value(obj.get("colTree"), "/colTree")?;
    let row_header = HeaderTree::from_root_spec(row_root);
    let col_header = HeaderTree::from_root_spec(col_root);
    if row_header.depth == 0 {
        return Err(IngestError::schema("/rowTree/children", "tree has no header nodes"));
    }
    if col_header.depth == 0 {
        return Err(IngestError::schema("/colTree/children", "tree has no header nodes"));
    }

    let rows = obj
        .get("body")
        .ok_or_else(|| IngestError::schema("/body", "missing field"))?
        .as_array()
        .ok_or_else(|| IngestError::schema("/body", "expected an array"))?;
    if rows.len() != row_header.leaf_count() {
        return Err(IngestError::schema(
            "/body",
            format!("expected {} rows, found {}", row_header.leaf_count(), rows.len()),
        ));
    }
    let mut body = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let cells = row.as_array().ok_or_else(|| IngestError::schema(format!("/body/{i}"), "expected an array"))?;
        if cells.len() != col_header.leaf_count() {
            return Err(IngestError::schema(
                format!("/body/{i}"),
                format!("expected {} cells, found {}", col_header.leaf_count(), cells.len()),
            ));
        }
        let mut parsed = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            parsed.push(match cell {
                Value::Null => None,
                Value::Number(n) => Some(
                    n.as_f64()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| IngestError::schema(format!("/body/{i}/{j}"), "number out of range"))?,
                ),
                _ => return Err(IngestError::schema(format!("/body/{i}/{j}"), "expected a number or null")),
            });
        }
        body.push(parsed);
    }

    let table = HierTable { title, source_id, row_header, col_header, body };
    let report = validate(&table);
    if report.is_ok() {
        Ok(table)
    } else {
        Err(TableError::Invalid(report).into())
    }
}

fn node_from_value(value: Option<&Value>, path: &str) -> Result<NodeSpec, IngestError> {
    let obj = value
        .ok_or_else(|| IngestError::schema(path, "missing field"))?
        .as_object()
        .ok_or_else(|| IngestError::schema(path, "expected a node object"))?;
    let label = match obj.get("label") {
        Some(Value::String(s)) => s.clone(),
        _ => return Err(IngestError::schema(format!("{path}/label"), "expected a string")),
    };
    let children = match obj.get("children") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => {
            let mut out: Vec<NodeSpec> = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                let child_path = format!("{path}/children/{i}");
                let child = node_from_value(Some(item), &child_path)?;
                if child.label.is_empty() {
                    return Err(IngestError::schema(format!("{child_path}/label"), "empty label"));
                }
                if out.iter().any(|c| c.label == child.label) {
                    return Err(IngestError::schema(
                        format!("{child_path}/label"),
                        format!("duplicate sibling label {:?}", child.label),
                    ));
                }
                out.push(child);
            }
            out
        }
        Some(_) => return Err(IngestError::schema(format!("{path}/children"), "expected an array")),
    };
    Ok(NodeSpec { label, children })
}

#[derive(Serialize)]
struct CanonicalDoc<'a> {
    title: &'a str,
    #[serde(rename = "sourceId", skip_serializing_if = "Option::is_none")]
    source_id: Option<&'a str>,
    #[serde(rename = "rowTree")]
    row_tree: NodeSpec,
    #[serde(rename = "colTree")]
    col_tree: NodeSpec,
    body: &'a [Vec<Cell>],
}

/// Deterministic canonical serialization: fixed key order, header nodes in
/// tree order, missing cells as `null`.
pub fn emit_canonical(table: &HierTable) -> String {
    let doc = CanonicalDoc {
        title: &table.title,
        source_id: table.source_id.as_deref(),
        row_tree: table.row_header.to_root_spec(),
        col_tree: table.col_header.to_root_spec(),
        body: &table.body,
    };
    serde_json::to_string(&doc).expect("canonical document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table_model::fixtures::t1;
    use crate::table_model::{resolve_node, Span};

    fn grid(rows: &[&[&str]]) -> Vec<Vec<MatrixCell>> {
        rows.iter().map(|r| r.iter().map(|&s| MatrixCell::from(s)).collect()).collect()
    }

    fn p(labels: &[&str]) -> Vec<String> {
        labels.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn three_by_four_matrix() {
        let file = MatrixTableFile {
            title: String::new(),
            cells: grid(&[&["", "Q1", "Q2", "Q3"], &["A", "1", "2", "3"], &["B", "10", "11", "12"]]),
            merges: vec![],
            header_rows: 1,
            header_cols: 1,
        };
        let table = parse_matrix(&file).unwrap();
        assert_eq!(table.row_header.depth, 1);
        let labels: Vec<_> = table.row_header.root.children.iter().map(|n| n.label.as_str()).collect();
        assert_eq!(labels, ["A", "B"]);
        assert_eq!(table.body, vec![vec![Some(1.0), Some(2.0), Some(3.0)], vec![Some(10.0), Some(11.0), Some(12.0)]]);
    }

    #[test]
    fn merged_row_header_reproduces_t1() {
        let file = MatrixTableFile {
            title: "T1".into(),
            cells: grid(&[
                &["", "", "Q1", "Q2", "Q3"],
                &["A", "a1", "1", "2", "3"],
                &["A", "a2", "4", "5", "6"],
                &["B", "b1", "7", "8", "9"],
                &["B", "b2", "10", "11", "12"],
            ]),
            merges: vec![[0, 0, 0, 1], [1, 0, 2, 0], [3, 0, 4, 0]],
            header_rows: 1,
            header_cols: 2,
        };
        let table = parse_matrix(&file).unwrap();
        assert_eq!(table, t1());
    }

    #[test]
    fn two_by_two_groups_headers_address_block_one() {
        // two column levels under circled group labels, two row levels
        let file = MatrixTableFile {
            title: String::new(),
            cells: grid(&[
                &["", "", "①", "①", "①", "②", "②"],
                &["", "", "A", "B", "C", "D", "E"],
                &["1", "x", "1", "2", "3", "4", "5"],
                &["1", "y", "6", "7", "8", "9", "10"],
                &["2", "x", "11", "12", "13", "14", "15"],
                &["2", "y", "16", "17", "18", "19", "20"],
            ]),
            merges: vec![[0, 0, 1, 1], [0, 2, 0, 4], [0, 5, 0, 6], [2, 0, 3, 0], [4, 0, 5, 0]],
            header_rows: 2,
            header_cols: 2,
        };
        let table = parse_matrix(&file).unwrap();
        let row = resolve_node(&table.row_header, &p(&["1"])).unwrap();
        let col = resolve_node(&table.col_header, &p(&["①", "C"])).unwrap();
        assert_eq!(row.span, Span::new(0, 2));
        assert_eq!(col.span, Span::new(2, 3));
    }

    #[test]
    fn merge_across_header_and_body_rejected() {
        let file = MatrixTableFile {
            title: String::new(),
            cells: grid(&[&["", "Q1", "Q2"], &["A", "1", "2"], &["B", "3", "4"]]),
            merges: vec![[0, 1, 1, 1]],
            header_rows: 1,
            header_cols: 1,
        };
        assert!(matches!(parse_matrix(&file), Err(IngestError::MalformedMerge(_))));
    }

    #[test]
    fn straddling_header_rejected() {
        let file = MatrixTableFile {
            title: String::new(),
            cells: grid(&[&["", "G", "G", "H"], &["", "a", "b", "b"], &["r", "1", "2", "3"]]),
            merges: vec![[0, 1, 0, 2], [1, 2, 1, 3]],
            header_rows: 2,
            header_cols: 1,
        };
        assert!(matches!(parse_matrix(&file), Err(IngestError::NonRectangularHierarchy(_))));
    }

    #[test]
    fn body_only_file_is_empty() {
        let file = MatrixTableFile {
            title: String::new(),
            cells: grid(&[&["", "Q1"]]),
            merges: vec![],
            header_rows: 1,
            header_cols: 1,
        };
        assert_eq!(parse_matrix(&file), Err(IngestError::EmptyBody));
    }

    #[test]
    fn numbers_strip_separators() {
        assert_eq!(parse_number("$1,234.5"), Some(1234.5));
        assert_eq!(parse_number("€ 12"), Some(12.0));
        assert_eq!(parse_number("n/a"), None);
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number(""), None);
    }

    #[test]
    fn canonical_round_trip_and_determinism() {
        let t = t1();
        let text = emit_canonical(&t);
        assert_eq!(parse_canonical(&text).unwrap(), t);
        assert_eq!(text, emit_canonical(&t1()));
    }

    #[test]
    fn canonical_missing_cell_is_null() {
        let mut t = t1();
        t.body[1][2] = None;
        let text = emit_canonical(&t);
        assert!(text.contains("[4.0,5.0,null]"), "{text}");
        assert_eq!(parse_canonical(&text).unwrap(), t);
    }

    #[test]
    fn canonical_wrong_row_count() {
        let text = r#"{"title":"x","rowTree":{"label":"","children":[{"label":"A"},{"label":"B"}]},
            "colTree":{"label":"","children":[{"label":"Q1"}]},"body":[[1]]}"#;
        match parse_canonical(text) {
            Err(IngestError::SchemaViolation { path, .. }) => assert_eq!(path, "/body"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonical_bad_label_path() {
        let text = r#"{"title":"x","rowTree":{"label":"","children":[{"label":"A"},{"label":3}]},
            "colTree":{"label":"","children":[{"label":"Q1"}]},"body":[[1],[2]]}"#;
        match parse_canonical(text) {
            Err(IngestError::SchemaViolation { path, .. }) => assert_eq!(path, "/rowTree/children/1/label"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonical_shallow_leaf_is_padded() {
        let text = r#"{"title":"x",
            "rowTree":{"label":"","children":[{"label":"A","children":[{"label":"a1"},{"label":"a2"}]},{"label":"Total"}]},
            "colTree":{"label":"","children":[{"label":"Q1"}]},"body":[[1],[2],[3]]}"#;
        let table = parse_canonical(text).unwrap();
        assert!(validate(&table).is_ok());
        let total = resolve_node(&table.row_header, &p(&["Total", "Total"])).unwrap();
        assert_eq!(total.span, Span::new(2, 3));
    }

    #[test]
    fn parse_any_dispatches() {
        let canonical = emit_canonical(&t1());
        assert_eq!(parse_any(&canonical).unwrap(), t1());
        let matrix = r#"{"cells":[["","Q1"],["A",1],["B","2"]],"headerRows":1,"headerCols":1}"#;
        let table = parse_any(matrix).unwrap();
        assert_eq!(table.body, vec![vec![Some(1.0)], vec![Some(2.0)]]);
    }
}
