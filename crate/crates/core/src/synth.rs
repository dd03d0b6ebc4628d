//! Generated tables: random level-complete tables for property checks and
//! the console-sales tables used in examples and replays.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::table_model::{HierTable, NodeSpec};

fn random_tree<R: Rng>(rng: &mut R, depth: usize, max_leaves: usize, prefix: &str) -> Vec<NodeSpec> {
    // largest fan-out that keeps fan^depth within the leaf budget
    let mut fan = 1;
    while (fan + 1usize).pow(depth as u32) <= max_leaves {
        fan += 1;
    }
    fn grow<R: Rng>(rng: &mut R, level: usize, depth: usize, fan: usize, prefix: &str) -> Vec<NodeSpec> {
        let n = rng.random_range(1..=fan);
        (0..n)
            .map(|i| {
                let label = format!("{prefix}{level}_{i}");
                if level + 1 == depth {
                    NodeSpec::leaf(label)
                } else {
                    NodeSpec::branch(label, grow(rng, level + 1, depth, fan, prefix))
                }
            })
            .collect()
    }
    grow(rng, 0, depth, fan, prefix)
}

/// A valid table with header depths in `1..=max_depth` and at most
/// `max_leaves` leaves per axis. About one cell in ten is missing.
pub fn random_table<R: Rng>(rng: &mut R, max_depth: usize, max_leaves: usize) -> HierTable {
    let rd = rng.random_range(1..=max_depth);
    let cd = rng.random_range(1..=max_depth);
    let rows = random_tree(rng, rd, max_leaves, "r");
    let cols = random_tree(rng, cd, max_leaves, "c");
    let count = |specs: &[NodeSpec]| -> usize {
        fn leaves(n: &NodeSpec) -> usize {
            if n.children.is_empty() {
                1
            } else {
                n.children.iter().map(leaves).sum()
            }
        }
        specs.iter().map(leaves).sum()
    };
    let (nr, nc) = (count(&rows), count(&cols));
    let body = (0..nr)
        .map(|_| {
            (0..nc)
                .map(|_| if rng.random_bool(0.1) { None } else { Some(rng.random_range(0..1000) as f64) })
                .collect()
        })
        .collect();
    HierTable::new("random", rows, cols, body).expect("generated table is valid")
}

pub const REGIONS: [&str; 4] = ["NA", "Europe", "Japan", "Other"];
pub const YEARS: [&str; 5] = ["2013", "2014", "2015", "2016", "2017"];

/// (company, console, first year on sale as an index into [`YEARS`])
const CONSOLES: [(&str, &str, usize); 10] = [
    ("Sony", "PS4", 0),
    ("Sony", "PS3", 0),
    ("Sony", "PSV", 0),
    ("Microsoft", "XOne", 0),
    ("Microsoft", "X360", 0),
    ("Nintendo", "Switch", 4),
    ("Nintendo", "WiiU", 0),
    ("Nintendo", "3DS", 0),
    ("Nintendo", "DS", 0),
    ("Nintendo", "Wii", 0),
];

/// Quarterly sales, 40 rows (region > company > console) by 20 columns
/// (year > quarter).
pub fn case_study_table(seed: u64) -> HierTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: [[f64; 10]; 4] = [
        [90.0, 20.0, 6.0, 70.0, 20.0, 40.0, 15.0, 25.0, 4.0, 6.0],
        [100.0, 25.0, 10.0, 40.0, 15.0, 30.0, 20.0, 35.0, 5.0, 8.0],
        [30.0, 8.0, 25.0, 2.0, 1.0, 35.0, 12.0, 60.0, 3.0, 2.0],
        [20.0, 6.0, 3.0, 8.0, 4.0, 6.0, 3.0, 6.0, 1.0, 1.0],
    ];
    // per-year multiplier for each console
    let growth: [[f64; 5]; 10] = [
        [0.6, 0.9, 1.1, 1.2, 1.1],
        [1.6, 1.1, 0.7, 0.4, 0.2],
        [1.2, 1.0, 0.8, 0.6, 0.5],
        [0.6, 0.9, 1.1, 1.1, 1.0],
        [1.6, 1.1, 0.6, 0.3, 0.1],
        [0.0, 0.0, 0.0, 0.0, 1.6],
        [1.2, 1.0, 0.8, 0.4, 0.1],
        [1.2, 1.1, 1.0, 0.8, 0.6],
        [0.6, 0.3, 0.1, 0.05, 0.02],
        [0.8, 0.4, 0.2, 0.1, 0.05],
    ];
    let season = [0.8, 0.7, 0.9, 1.6];
    let quarters = ["Q1", "Q2", "Q3", "Q4"];

    let mut rows = Vec::new();
    let mut body = Vec::new();
    for (ri, region) in REGIONS.iter().enumerate() {
        let mut companies: Vec<NodeSpec> = Vec::new();
        for (ci, (company, console, first)) in CONSOLES.iter().enumerate() {
            if companies.last().is_none_or(|c| c.label != *company) {
                companies.push(NodeSpec::branch(*company, Vec::new()));
            }
            companies.last_mut().unwrap().children.push(NodeSpec::leaf(*console));
            let mut row = Vec::with_capacity(20);
            for (yi, g) in growth[ci].iter().enumerate() {
                for s in season {
                    if yi < *first {
                        row.push(None);
                    } else {
                        let noise: f64 = rng.random_range(0.9..1.1);
                        row.push(Some((base[ri][ci] * g * s * noise * 10.0).round() / 10.0));
                    }
                }
            }
            body.push(row);
        }
        rows.push(NodeSpec::branch(*region, companies));
    }
    let cols = YEARS
        .iter()
        .map(|y| NodeSpec::branch(*y, quarters.iter().map(|q| NodeSpec::leaf(*q)).collect()))
        .collect();
    HierTable::new("Console sales by region and quarter", rows, cols, body).expect("case-study table is valid")
}

/// One year of sales for five consoles across four regions, with gaps.
/// PSV leads the year overall while its own regional split is led by NA.
pub fn psv_table() -> HierTable {
    let regions = ["NA", "EU", "JP", "Other"];
    let consoles = ["PSV", "PS4", "PS3", "PSP", "X"];
    let rows = vec![NodeSpec::branch("2017", regions.iter().map(|r| NodeSpec::leaf(*r)).collect())];
    let cols = vec![NodeSpec::branch("Sony", consoles.iter().map(|c| NodeSpec::leaf(*c)).collect())];
    let body = vec![
        vec![Some(50.0), Some(10.0), None, None, None],
        vec![Some(40.0), None, Some(10.0), None, None],
        vec![None, Some(20.0), Some(15.0), Some(12.0), Some(11.0)],
        vec![Some(5.0), None, None, None, None],
    ];
    HierTable::new("2017 Sony console sales", rows, cols, body).expect("table is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table_model::validate;

    #[test]
    fn random_tables_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let t = random_table(&mut rng, 4, 200);
            assert!(validate(&t).is_ok());
            assert!(t.row_count() <= 200 && t.col_count() <= 200);
            assert!((1..=4).contains(&t.row_header.depth));
        }
    }

    #[test]
    fn case_study_shape() {
        let t = case_study_table(1);
        assert_eq!((t.row_count(), t.col_count()), (40, 20));
        assert_eq!((t.row_header.depth, t.col_header.depth), (3, 2));
        assert_eq!(case_study_table(1), t);
    }
}
