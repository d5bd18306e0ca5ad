use replan::bench::{render_svg, run_trial_traced, TrialConfig};
use replan::{Algorithm, Point2, Rect, Scenario};

fn empty_map() -> Scenario {
    Scenario {
        name: "empty".into(),
        bounds: Rect::new(0.0, 0.0, 30.0, 30.0),
        walls: vec![],
        obstacles: vec![],
        start: Point2::new(2.0, 2.0),
        goal: Point2::new(28.0, 25.0),
        robot_speed: 0.75,
        robot_half_extent: 1.0,
        cutoff_s: 20.0,
        planning_budget_s: 0.05,
        tick_s: 0.05,
    }
}

fn element_ids(doc: &roxmltree::Document) -> Vec<String> {
    doc.descendants()
        .filter(|n| n.is_element() && n.tag_name().name() != "svg" && n.tag_name().name() != "g")
        .map(|n| format!("{}#{}", n.tag_name().name(), n.attribute("id").unwrap_or("")))
        .collect()
}

#[test]
fn empty_map_trace_has_bounds_and_trajectory_only() {
    for alg in Algorithm::ALL {
        let (m, trace) = run_trial_traced(&empty_map(), alg, 1, &TrialConfig::default());
        assert!(m.success);
        let svg = render_svg(&trace);
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().attribute("version"), Some("1.1"));
        assert_eq!(element_ids(&doc), ["rect#bounds", "polyline#trajectory"]);
    }
}

#[test]
fn dynamic_trace_draws_every_obstacle_per_sampled_tick() {
    let mut sc = Scenario::bundled("dynamic").unwrap();
    sc.cutoff_s = 4.0;
    let (_, trace) = run_trial_traced(&sc, Algorithm::Drrt, 3, &TrialConfig::default());
    let svg = render_svg(&trace);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let ticks: Vec<_> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("tick"))
        .collect();
    assert!(ticks.len() >= 4);
    for t in ticks {
        assert_eq!(t.children().filter(|c| c.is_element()).count(), 30);
    }
    let walls = doc.descendants().find(|n| n.attribute("id") == Some("walls")).unwrap();
    assert_eq!(walls.children().filter(|c| c.is_element()).count(), sc.walls.len());
}

#[test]
fn stuck_trial_keeps_final_path() {
    let sc = Scenario::bundled("partial").unwrap();
    let (m, trace) = (0..20)
        .map(|seed| run_trial_traced(&sc, Algorithm::MultiStage, seed, &TrialConfig::default()))
        .find(|(m, _)| !m.success)
        .expect("some multi-stage trial gets stuck");
    assert_eq!(m.sim_time_s, sc.cutoff_s);
    assert_eq!(trace.trajectory.len() as u64, sc.max_ticks() + 1);
    let svg = render_svg(&trace);
    let doc = roxmltree::Document::parse(&svg).unwrap();
    assert!(doc.descendants().any(|n| n.attribute("id") == Some("final-path")));
}
