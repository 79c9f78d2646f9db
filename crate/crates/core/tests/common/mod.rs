#![allow(dead_code)]

use framesmith::model::{ElementId, NodeId};
use framesmith::problem::{BaySpec, FrameProblem, LoadSpecification, MaterialSpec, SupportKind};
use framesmith::validation::{Fault, Placement};
use proptest::prelude::*;
use rand::Rng;

pub const REFERENCE_FRAME: &str = "\
Total_bays: 3
Bay: 1
  Span: 6 m
  Heights: 5, 4, 5
Bay: 2
  Span: 6 m
  Heights: 5, 4
Bay: 3
  Span: 6 m
  Heights: 5, 4, 5
";

pub fn reference_problem() -> FrameProblem {
    framesmith::problem::load_problem(REFERENCE_FRAME).unwrap()
}

fn assemble(spans: &[f64], stories: &[usize], levels: &[f64], pinned: bool) -> FrameProblem {
    let bays = spans
        .iter()
        .zip(stories)
        .enumerate()
        .map(|(i, (&span, &n))| BaySpec::new(i as u32 + 1, span, levels[..n].to_vec()))
        .collect();
    let support = if pinned {
        SupportKind::Pinned
    } else {
        SupportKind::Fixed
    };
    FrameProblem::new(bays, support, MaterialSpec::default(), LoadSpecification::default()).unwrap()
}

/// Valid problem with 1-6 bays of 1-5 stories. Spans and heights are
/// multiples of 0.25 m so every coordinate is exact in binary.
pub fn random_problem<R: Rng>(rng: &mut R) -> FrameProblem {
    let bays = rng.random_range(1..=6);
    let spans: Vec<f64> = (0..bays).map(|_| rng.random_range(12..=36) as f64 * 0.25).collect();
    let stories: Vec<usize> = (0..bays).map(|_| rng.random_range(1..=5)).collect();
    let levels: Vec<f64> = (0..5).map(|_| rng.random_range(10..=24) as f64 * 0.25).collect();
    assemble(&spans, &stories, &levels, rng.random_bool(0.2))
}

pub fn problem_strategy() -> impl Strategy<Value = FrameProblem> {
    (1usize..=6)
        .prop_flat_map(|bays| {
            (
                prop::collection::vec(12u32..=36, bays),
                prop::collection::vec(1usize..=5, bays),
                prop::collection::vec(10u32..=24, 5),
                any::<bool>(),
            )
        })
        .prop_map(|(spans, stories, levels, pinned)| {
            let spans: Vec<f64> = spans.iter().map(|&s| s as f64 * 0.25).collect();
            let levels: Vec<f64> = levels.iter().map(|&h| h as f64 * 0.25).collect();
            assemble(&spans, &stories, &levels, pinned)
        })
}

/// Duplicate node 14 of node 11, duplicate element 16 of element 13 and
/// element 17 rewired onto the duplicate node, applied to the clean 3-2-3
/// frame.
pub fn repair_recipe() -> Vec<Fault> {
    vec![
        Fault::DuplicateNode {
            source: NodeId(11),
            new_id: NodeId(14),
            placement: Placement::Shift,
        },
        Fault::DuplicateElement {
            source: ElementId(13),
            new_id: ElementId(16),
            placement: Placement::Relocate,
            reversed: false,
        },
        Fault::Misconnect {
            element: ElementId(17),
            from: NodeId(11),
            to: NodeId(14),
        },
    ]
}

pub const REPAIR_LOG: &str = "\
Remove duplicate node 14, keep node 11.
Remove duplicate element 16, keep element 13.
Renumber node 15 to 14.
Renumber node 16 to 15.
Renumber node 17 to 16.
Reconnect element 17 from deleted node 14 to retained node 11.
Renumber element 17 to 16.
Renumber element 18 to 17.
Renumber element 19 to 18.
Renumber element 20 to 19.
Renumber element 21 to 20.
";

/// Complete script of the reference frame.
pub fn reference_script() -> String {
    let p = reference_problem();
    let m = framesmith::geometry::build_topology(&p).unwrap();
    let l = framesmith::loads::derive_loads(&p, &m).unwrap();
    framesmith::script::emit_script(&m, &l, &p.material, &Default::default()).text
}

fn replace_once(text: &str, from: &str, to: &str) -> String {
    assert!(text.contains(from), "fixture line {from:?} missing");
    text.replacen(from, to, 1)
}

/// One seeded defect per family, each with the category it belongs to.
pub fn defect_scripts() -> Vec<(&'static str, String, framesmith::category::ErrorCategory)> {
    use framesmith::category::ErrorCategory::*;
    let s = reference_script();
    vec![
        (
            "non-existent element type",
            replace_once(
                &s,
                "ops.element('elasticBeamColumn', 5,",
                "ops.element('elasticBeamColumn3D', 5,",
            ),
            ElementDefinition,
        ),
        (
            "duplicate node id",
            replace_once(&s, "ops.node(4, 6, 5)", "ops.node(4, 6, 5)\nops.node(4, 6, 9)"),
            NodeDefinition,
        ),
        (
            "non-integer support node id",
            replace_once(&s, "ops.fix(2, 1, 1, 1)", "ops.fix(2.5, 1, 1, 1)"),
            SupportConditions,
        ),
        (
            "conflicting section arguments",
            replace_once(
                &s,
                "ops.element('elasticBeamColumn', 1, 1, 3, A_col, E, I_col, 1)",
                "ops.element('elasticBeamColumn', 1, 1, 3, A_col, E, I_gir, 1)",
            ),
            MaterialProperties,
        ),
        (
            "missing load pattern",
            replace_once(&s, "ops.pattern('Plain', 1, 1)\n", ""),
            LoadApplication,
        ),
    ]
}
