mod common;

use common::{problem_strategy, reference_problem, repair_recipe, REPAIR_LOG};
use framesmith::geometry::build_topology;
use framesmith::model::{isomorphic, ElementId, NodeId};
use framesmith::validation::{
    action_log_text, inject_faults, random_recipe, replay_actions, validate_model, CorrectiveAction,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn seeded_defects_produce_the_expected_log() {
    let clean = build_topology(&reference_problem()).unwrap();
    let e17 = clean.element(ElementId(17)).unwrap();
    assert_eq!((e17.node_i, e17.node_j), (NodeId(11), NodeId(14)));

    let injected = inject_faults(&clean, &repair_recipe()).model;
    assert_eq!(injected.nodes.len(), 17);
    assert_eq!(injected.elements.len(), 21);
    let e17 = injected.element(ElementId(17)).unwrap();
    assert_eq!((e17.node_i, e17.node_j), (NodeId(14), NodeId(15)));

    let report = validate_model(&injected).unwrap();
    assert_eq!(action_log_text(&report.actions), REPAIR_LOG);
    assert_eq!(
        report.actions[5],
        CorrectiveAction::ReconnectElement {
            element: ElementId(17),
            from_node: NodeId(14),
            to_node: NodeId(11),
        }
    );
    assert!(isomorphic(&report.model, &clean));
    assert!(report
        .model
        .nodes
        .iter()
        .all(|n| n.x.is_sign_positive() && n.y.is_sign_positive()));
}

#[test]
fn seeded_fault_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let problem = common::random_problem(&mut rng);
        let clean = build_topology(&problem).unwrap();
        let count = rand::Rng::random_range(&mut rng, 1..=6);
        let injected = inject_faults(&clean, &random_recipe(&clean, count, &mut rng));
        let report = validate_model(&injected.model).unwrap();
        assert!(isomorphic(&report.model, &clean));
        assert_eq!(replay_actions(&injected.model, &report.actions).unwrap(), report.model);
        assert!(validate_model(&report.model).unwrap().is_clean());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn repair_is_idempotent_and_geometry_preserving(problem in problem_strategy(), seed in any::<u64>(), count in 0usize..8) {
        let clean = build_topology(&problem).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let injected = inject_faults(&clean, &random_recipe(&clean, count, &mut rng));
        let once = validate_model(&injected.model).unwrap();
        let twice = validate_model(&once.model).unwrap();
        prop_assert!(twice.is_clean());
        prop_assert_eq!(&twice.model, &once.model);
        prop_assert!(isomorphic(&once.model, &clean));
        prop_assert_eq!(replay_actions(&injected.model, &once.actions).unwrap(), once.model.clone());
        let ids: Vec<u32> = once.model.nodes.iter().map(|n| n.id.0).collect();
        prop_assert_eq!(ids, (1..=once.model.nodes.len() as u32).collect::<Vec<_>>());
        let ids: Vec<u32> = once.model.elements.iter().map(|e| e.id.0).collect();
        prop_assert_eq!(ids, (1..=once.model.elements.len() as u32).collect::<Vec<_>>());
    }

    #[test]
    fn clean_models_need_no_action(problem in problem_strategy()) {
        let clean = build_topology(&problem).unwrap();
        let report = validate_model(&clean).unwrap();
        prop_assert!(report.is_clean());
        prop_assert_eq!(report.model, clean);
    }
}
