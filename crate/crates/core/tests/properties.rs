use hiertable_core::blocks::{blocks_for, cell_addresses, enumerate_depth_combinations};
use hiertable_core::config::{EngineConfig, RecommendConfig};
use hiertable_core::explore::{fact_similarity, similarity};
use hiertable_core::facts::{detect, extract_block_facts, DetectorConfig, FactType};
use hiertable_core::ingest::{emit_canonical, parse_canonical};
use hiertable_core::layout::{build_header_layer, f_trans};
use hiertable_core::pipeline::Analysis;
use hiertable_core::synth::random_table;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn table(seed: u64, depth: usize, leaves: usize) -> hiertable_core::table_model::HierTable {
    random_table(&mut ChaCha8Rng::seed_from_u64(seed), depth, leaves)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocks_tile_the_body(seed in any::<u64>()) {
        let t = table(seed, 4, 60);
        let cells = t.row_count() * t.col_count();
        for combo in enumerate_depth_combinations(&t) {
            let blocks = blocks_for(&t, combo);
            let mut seen = vec![false; cells];
            for b in &blocks {
                let rect = f_trans(&t.row_header, &t.col_header, &b.location.r_loc, &b.location.c_loc).unwrap();
                prop_assert_eq!(rect, b.rect);
                prop_assert_eq!(rect.area(), cell_addresses(&t, b).len());
                for r in rect.x1..rect.x2 {
                    for c in rect.y1..rect.y2 {
                        let i = r * t.col_count() + c;
                        prop_assert!(!seen[i], "overlap at {},{} in {}", r, c, combo);
                        seen[i] = true;
                    }
                }
            }
            prop_assert!(seen.iter().all(|s| *s), "gap in {}", combo);
        }
    }

    #[test]
    fn graph_edges_follow_the_rule(seed in any::<u64>()) {
        let t = table(seed, 4, 30);
        let g = build_header_layer(&t);
        prop_assert_eq!(g.nodes.len(), (t.row_header.depth + 1) * (t.col_header.depth + 1) - 1);
        for e in &g.edges {
            prop_assert_eq!(e.to.s_depth(), e.from.s_depth() + 1);
            let dr = e.to.r_depth - e.from.r_depth;
            prop_assert!(dr <= 1 && (e.to.c_depth - e.from.c_depth) == 1 - dr);
        }
        for n in &g.nodes {
            let c = n.combo;
            let expected = if c.r_depth > 0 && c.c_depth > 0 { 2 } else if c.s_depth() == 1 { 0 } else { 1 };
            prop_assert_eq!(g.parents(c).len(), expected);
        }
    }

    #[test]
    fn canonical_round_trip(seed in any::<u64>()) {
        let t = table(seed, 3, 20);
        let text = emit_canonical(&t);
        let back = parse_canonical(&text).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(emit_canonical(&back), text);
    }

    #[test]
    fn ratio_detectors_ignore_scale(xs in prop::collection::vec(0.0f64..1000.0, 0..12), k in -6i32..6) {
        let cfg = DetectorConfig::default();
        let c = 2f64.powi(k);
        let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
        for t in [FactType::Dominance, FactType::Top2, FactType::Evenness, FactType::Trend, FactType::Outlier] {
            let (a, b) = (detect(t, &xs, &cfg), detect(t, &scaled, &cfg));
            prop_assert_eq!(a.is_some(), b.is_some(), "{}", t);
            if let (Some(a), Some(b)) = (a, b) {
                prop_assert!((a.score - b.score).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn standardized_detectors_ignore_affine_maps(
        xs in prop::collection::vec(-100.0f64..100.0, 0..12),
        k in 0.1f64..10.0,
        shift in -50.0f64..50.0,
    ) {
        let cfg = DetectorConfig::default();
        let mapped: Vec<f64> = xs.iter().map(|x| k * x + shift).collect();
        for t in [FactType::Extreme, FactType::ChangePoint] {
            let (a, b) = (detect(t, &xs, &cfg), detect(t, &mapped, &cfg));
            match (&a, &b) {
                (Some(a), Some(b)) => {
                    let s = a.score.min(1.0);
                    prop_assert!((s - b.score).abs() < 1e-6, "{} {} vs {}", t, a.score, b.score);
                }
                (None, None) => {}
                // rounding can only flip a result that sits on the threshold
                _ => {
                    let near = a.as_ref().or(b.as_ref()).unwrap().score;
                    prop_assert!((near - 0.5).abs() < 1e-6, "{} flipped away from threshold: {:?} {:?}", t, a, b);
                }
            }
        }
    }
}

#[test]
fn facts_are_deterministic_and_reference_block_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let t = random_table(&mut rng, 3, 8);
        for combo in enumerate_depth_combinations(&t) {
            for b in blocks_for(&t, combo) {
                let cfg = DetectorConfig::default();
                let facts = extract_block_facts(&t, &b, &cfg);
                assert_eq!(facts, extract_block_facts(&t, &b, &cfg));
                let rows = t.row_header.resolve(&b.location.r_loc).unwrap();
                let cols = t.col_header.resolve(&b.location.c_loc).unwrap();
                let mut known: Vec<String> = Vec::new();
                for tree_node in [rows, cols] {
                    let mut stack = vec![tree_node];
                    while let Some(n) = stack.pop() {
                        known.push(n.label.clone());
                        stack.extend(n.children.iter());
                    }
                }
                for f in &facts {
                    for label in &f.labels {
                        for part in label.split(" @ ").flat_map(|p| p.split(" / ")) {
                            assert!(known.iter().any(|k| k == part), "{part} not in block {}", b.id);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn similarity_stays_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = RecommendConfig::default();
    for _ in 0..10 {
        let a = Analysis::new(random_table(&mut rng, 3, 8), EngineConfig::default());
        let facts = a.facts();
        for f in facts.iter().take(40) {
            for g in facts.iter().take(40) {
                let s = fact_similarity(f, g, &cfg.weights);
                assert!((0.0..=1.0).contains(&s));
            }
            let s = similarity(f, &facts, &cfg);
            assert!((0.0..=1.0).contains(&s));
        }
    }
}
