use hiertable_core::blocks::DepthCombo;
use hiertable_core::config::{EngineConfig, RecommendConfig};
use hiertable_core::explore::{candidate_facts, similarity, Command, Direction, ExplorationSession};
use hiertable_core::facts::{DataFact, FactType};
use hiertable_core::pipeline::Analysis;
use hiertable_core::synth::{case_study_table, psv_table, random_table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn find<'a>(a: &'a Analysis, block: &str, t: FactType, transform: &str) -> &'a DataFact {
    a.block_facts(block)
        .iter()
        .find(|f| f.fact_type == t && f.form.transform == transform)
        .unwrap_or_else(|| panic!("no {t} from {transform} in {block}"))
}

#[test]
fn psv_dominance_recommends_its_regional_split() {
    let a = Analysis::new(psv_table(), EngineConfig::default());
    let focus = find(&a, "2017~Sony", FactType::Dominance, "row_merge(sum)");
    assert_eq!(focus.labels, ["PSV"]);
    let mut s = ExplorationSession::new("psv", &a);
    s.switch_page(&a, DepthCombo::new(0, 1), 1).unwrap();
    s.zoom(&a, Direction::In, 2);
    assert_eq!(s.combo(), DepthCombo::new(1, 1));
    s.select(&a, "2017~Sony", Some(&focus.id), 3).unwrap();

    let block = a.block(&focus.block_id);
    let cfg = a.config.recommend;
    let by_region = candidate_facts(&a, DepthCombo::new(2, 1), block, &s.enabled_types);
    let by_console = candidate_facts(&a, DepthCombo::new(1, 2), block, &s.enabled_types);
    let split = similarity(focus, &by_console, &cfg);
    let differences = similarity(focus, &by_region, &cfg);
    assert!(split > differences, "{split} vs {differences}");
    assert!(by_console.iter().any(|f| f.fact_type == FactType::Dominance && f.labels == ["NA"]));
    assert_eq!(s.recommendation.zoom_in, Some(DepthCombo::new(1, 2)));
    for k in [0.5, 2.0, 7.3, 1e3] {
        let scaled = RecommendConfig { weights: cfg.weights.scaled(k), ..cfg };
        assert_eq!(s.recommend_with(&a, Direction::In, &scaled), Some(DepthCombo::new(1, 2)));
    }
    assert!(s.zoom(&a, Direction::In, 4));
    assert_eq!(s.combo(), DepthCombo::new(1, 2));
    assert_eq!(s.selected_block.as_deref(), Some("2017~Sony.PSV"));
}

#[test]
fn case_one_replay() {
    let a = Analysis::new(case_study_table(2017), EngineConfig::default());
    let f1 = find(&a, "Europe.Sony~2017", FactType::Dominance, "col_merge(sum)").clone();
    assert_eq!(f1.labels, ["PS4"]);
    // among all ten consoles PS4 does not dominate
    assert!(a.block_facts("Europe~2017").iter().all(|f| f.fact_type != FactType::Dominance));

    let mut s = ExplorationSession::new("case", &a);
    s.zoom(&a, Direction::In, 1);
    s.zoom(&a, Direction::In, 2);
    s.switch_page(&a, DepthCombo::new(2, 1), 3).unwrap();
    s.select(&a, &f1.block_id, Some(&f1.id), 4).unwrap();
    let script = [
        (Direction::Out, DepthCombo::new(2, 0)),
        (Direction::In, DepthCombo::new(2, 1)),
        (Direction::Out, DepthCombo::new(2, 0)),
    ];
    for (i, (d, expected)) in script.into_iter().enumerate() {
        let rec = s.recommend(&a, d);
        assert_eq!(rec, Some(expected), "step {i}");
        assert!(s.zoom(&a, d, 5 + i as u64));
        assert_eq!(s.combo(), expected);
        let f = a.fact(s.focused_fact.as_deref().unwrap()).unwrap();
        assert_eq!(f.fact_type, FactType::Dominance);
        assert_eq!(f.labels, ["PS4"]);
    }
    let doc = s.export_path();
    let path = doc.paths.last().unwrap();
    assert_eq!(path.steps.len(), 4);
    assert!(path.fact_count >= 3, "{}", path.fact_count);
    for w in s.path_log.windows(2) {
        assert_eq!(w[0].after, w[1].before);
    }
}

#[test]
fn zoom_round_trips_on_random_sessions() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..60 {
        let a = Analysis::new(random_table(&mut rng, 3, 12), EngineConfig::default());
        let mut s = ExplorationSession::new("r", &a);
        // wander a little, then pick a block with a fact
        for _ in 0..rng.random_range(0..3) {
            s.zoom(&a, Direction::In, 0);
        }
        let with_fact: Vec<_> =
            s.current.blocks.iter().filter(|b| s.current.embedded_in(&b.id).is_some()).map(|b| b.id.clone()).collect();
        if !with_fact.is_empty() {
            let b = &with_fact[rng.random_range(0..with_fact.len())];
            s.select(&a, b, None, 1).unwrap();
        }
        let origin = s.combo();
        if !s.zoom(&a, Direction::In, 2) {
            continue;
        }
        let child = s.combo();
        let parents = a.graph.parents(child);
        assert!(parents.contains(&origin));
        s.zoom(&a, Direction::Out, 3);
        if parents.len() == 1 {
            assert_eq!(s.combo(), origin);
        }
    }
}

#[test]
fn journal_replay_is_exact_and_idempotent() {
    let a = Analysis::new(case_study_table(5), EngineConfig::default());
    let block = "Europe.Sony~2017".to_string();
    let cmds = vec![
        Command::Zoom { direction: Direction::In, ts: 1 },
        Command::SwitchPage { r_depth: 1, c_depth: 1, ts: 2 },
        Command::Zoom { direction: Direction::In, ts: 3 },
        Command::Select { block_id: block.clone(), fact_id: None, ts: 4 },
        Command::Filter { types: vec![FactType::Dominance, FactType::Trend], ts: 5 },
        Command::Zoom { direction: Direction::Out, ts: 6 },
        Command::Zoom { direction: Direction::Out, ts: 7 },
    ];
    let replay = || {
        let mut s = ExplorationSession::new("j", &a);
        for c in &cmds {
            let _ = s.apply(&a, c);
        }
        s
    };
    let once = replay();
    assert_eq!(once, replay());
    let json = serde_json::to_string(&once).unwrap();
    let back: ExplorationSession = serde_json::from_str(&json).unwrap();
    assert_eq!(back, once);
}
