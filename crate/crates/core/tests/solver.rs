mod common;

use framesmith::bench::builtin_cases;
use framesmith::geometry::build_topology;
use framesmith::loads::{derive_loads, LoadSet, MemberUdl, NodalLoad};
use framesmith::model::{Element, ElementId, ElementKind, Fixity, Node, NodeId, SupportConstraint, TopologyModel};
use framesmith::problem::MaterialSpec;
use framesmith::solver::{equilibrium_residual, global_stiffness, internal_forces, solve_static, SolverError};
use proptest::prelude::*;

fn frame(nodes: &[(f64, f64)], elements: &[(u32, u32)], supports: &[(u32, Fixity)]) -> TopologyModel {
    TopologyModel {
        nodes: nodes
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| Node {
                id: NodeId(i as u32 + 1),
                x,
                y,
                desc: String::new(),
            })
            .collect(),
        elements: elements
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let (pa, pb) = (nodes[a as usize - 1], nodes[b as usize - 1]);
                let kind = if pa.0 == pb.0 {
                    ElementKind::Column
                } else {
                    ElementKind::Girder
                };
                Element {
                    id: ElementId(i as u32 + 1),
                    node_i: NodeId(a),
                    node_j: NodeId(b),
                    kind,
                    desc: String::new(),
                }
            })
            .collect(),
        supports: supports
            .iter()
            .map(|&(n, fixity)| SupportConstraint {
                node_id: NodeId(n),
                fixity,
            })
            .collect(),
        steps: Vec::new(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn cantilever_tip_deflection() {
    let material = MaterialSpec::default();
    let (l, p) = (4.0, -12_000.0);
    let m = frame(&[(0.0, 0.0), (l, 0.0)], &[(1, 2)], &[(1, Fixity::FIXED)]);
    let loads = LoadSet {
        nodal: vec![NodalLoad {
            node_id: NodeId(2),
            fx: 0.0,
            fy: p,
            mz: 0.0,
        }],
        member: vec![],
    };
    let r = solve_static(&m, &loads, &material).unwrap();
    let tip = r.displacement(NodeId(2)).unwrap();
    let ei = material.e * material.i_gir;
    assert!(rel(tip.uy, p * l.powi(3) / (3.0 * ei)) < 1e-9);
    assert!(rel(tip.rz, p * l * l / (2.0 * ei)) < 1e-9);
    let reaction = r.reaction(NodeId(1)).unwrap();
    assert!(rel(reaction.ry, -p) < 1e-12);
    assert!(rel(reaction.mz, -p * l) < 1e-12);
}

#[test]
fn vertical_cantilever_sways() {
    let material = MaterialSpec::default();
    let (h, f) = (3.0, 5_000.0);
    let m = frame(&[(0.0, 0.0), (0.0, h)], &[(1, 2)], &[(1, Fixity::FIXED)]);
    let loads = LoadSet {
        nodal: vec![NodalLoad {
            node_id: NodeId(2),
            fx: f,
            fy: 0.0,
            mz: 0.0,
        }],
        member: vec![],
    };
    let r = solve_static(&m, &loads, &material).unwrap();
    let top = r.displacement(NodeId(2)).unwrap();
    assert!(rel(top.ux, f * h.powi(3) / (3.0 * material.e * material.i_col)) < 1e-9);
    assert!(top.uy.abs() < 1e-15);
}

#[test]
fn axial_bar() {
    let material = MaterialSpec::default();
    let (l, p) = (6.0, 80_000.0);
    let m = frame(&[(0.0, 0.0), (l, 0.0)], &[(1, 2)], &[(1, Fixity::FIXED)]);
    let loads = LoadSet {
        nodal: vec![NodalLoad {
            node_id: NodeId(2),
            fx: p,
            fy: 0.0,
            mz: 0.0,
        }],
        member: vec![],
    };
    let r = solve_static(&m, &loads, &material).unwrap();
    assert!(
        rel(
            r.displacement(NodeId(2)).unwrap().ux,
            p * l / (material.e * material.a_gir)
        ) < 1e-12
    );
    let d = &internal_forces(&r, &m, &loads)[0];
    assert!(rel(d.n_at(0.0), p) < 1e-12);
}

#[test]
fn pinned_beam_midspan_moment() {
    let material = MaterialSpec::default();
    let (l, w) = (6.0, -10_000.0);
    let m = frame(
        &[(0.0, 0.0), (l, 0.0)],
        &[(1, 2)],
        &[(1, Fixity::PINNED), (2, Fixity::PINNED)],
    );
    let loads = LoadSet {
        nodal: vec![],
        member: vec![MemberUdl {
            element_id: ElementId(1),
            w,
        }],
    };
    let r = solve_static(&m, &loads, &material).unwrap();
    let d = &internal_forces(&r, &m, &loads)[0];
    assert!(rel(d.m_at(l / 2.0), 45_000.0) < 1e-9);
    assert!(d.m_at(0.0).abs() < 1e-6 && d.m_at(l).abs() < 1e-6);
    assert!(rel(d.v_at(0.0), 30_000.0) < 1e-9);
    assert!(rel(d.v_at(l), -30_000.0) < 1e-9);
    let centre = 5.0 * w * l.powi(4) / (384.0 * material.e * material.i_gir);
    let r_mid = {
        let m3 = frame(
            &[(0.0, 0.0), (l / 2.0, 0.0), (l, 0.0)],
            &[(1, 2), (2, 3)],
            &[(1, Fixity::PINNED), (3, Fixity::PINNED)],
        );
        let loads = LoadSet {
            nodal: vec![],
            member: vec![
                MemberUdl {
                    element_id: ElementId(1),
                    w,
                },
                MemberUdl {
                    element_id: ElementId(2),
                    w,
                },
            ],
        };
        solve_static(&m3, &loads, &material).unwrap()
    };
    assert!(rel(r_mid.displacement(NodeId(2)).unwrap().uy, centre) < 1e-9);
}

#[test]
fn fixed_beam_end_moments() {
    let material = MaterialSpec::default();
    let (l, w) = (6.0, -10_000.0);
    let m = frame(
        &[(0.0, 0.0), (l, 0.0)],
        &[(1, 2)],
        &[(1, Fixity::FIXED), (2, Fixity::FIXED)],
    );
    let loads = LoadSet {
        nodal: vec![],
        member: vec![MemberUdl {
            element_id: ElementId(1),
            w,
        }],
    };
    let r = solve_static(&m, &loads, &material).unwrap();
    let d = &internal_forces(&r, &m, &loads)[0];
    let end = w * l * l / 12.0;
    assert!(rel(d.m_at(0.0), end) < 1e-9);
    assert!(rel(d.m_at(l), end) < 1e-9);
    assert!(rel(d.m_at(l / 2.0), -w * l * l / 24.0) < 1e-9);
}

/// Fixed-base portal with inextensible members: slope-deflection gives
/// base and knee moments Hh/2·(3k+1)/(6k+1) and Hh/2·3k/(6k+1), with
/// k the girder-to-column stiffness ratio.
#[test]
fn portal_frame_sway_moments() {
    let material = MaterialSpec {
        a_col: 1e3,
        a_gir: 1e3,
        ..MaterialSpec::default()
    };
    let (h, span, load) = (4.0, 6.0, 10_000.0);
    let m = frame(
        &[(0.0, 0.0), (span, 0.0), (0.0, h), (span, h)],
        &[(1, 3), (2, 4), (3, 4)],
        &[(1, Fixity::FIXED), (2, Fixity::FIXED)],
    );
    let loads = LoadSet {
        nodal: vec![NodalLoad {
            node_id: NodeId(3),
            fx: load,
            fy: 0.0,
            mz: 0.0,
        }],
        member: vec![],
    };
    let r = solve_static(&m, &loads, &material).unwrap();
    let k = (material.i_gir / span) / (material.i_col / h);
    let base = load * h / 2.0 * (3.0 * k + 1.0) / (6.0 * k + 1.0);
    for n in [1, 2] {
        assert!(
            rel(r.reaction(NodeId(n)).unwrap().mz, base) < 1e-6,
            "{:?} vs {base}",
            r.reaction(NodeId(n))
        );
        assert!(rel(r.reaction(NodeId(n)).unwrap().rx, -load / 2.0) < 1e-6);
    }
    let knee = load * h / 2.0 * 3.0 * k / (6.0 * k + 1.0);
    let d = internal_forces(&r, &m, &loads);
    assert!(rel(d[2].m_at(0.0).abs(), knee) < 1e-6);
}

#[test]
fn unsupported_frame_is_singular() {
    let m = frame(&[(0.0, 0.0), (6.0, 0.0)], &[(1, 2)], &[]);
    let err = solve_static(&m, &LoadSet::default(), &MaterialSpec::default()).unwrap_err();
    assert!(matches!(err, SolverError::SingularSystem));
}

#[test]
fn benchmark_frames_are_in_equilibrium_and_symmetric() {
    for case in builtin_cases(framesmith::bench::DEFAULT_SEED) {
        let model = build_topology(&case.problem).unwrap();
        let loads = derive_loads(&case.problem, &model).unwrap();
        let r = solve_static(&model, &loads, &case.problem.material).unwrap();
        let (res, scale) = equilibrium_residual(&model, &loads, &r);
        assert!(
            res.iter().all(|v| v.abs() <= 1e-8 * scale),
            "{}: {res:?} / {scale}",
            case.name
        );

        let sig = case.problem.story_signature();
        if sig.iter().eq(sig.iter().rev()) {
            let gravity = LoadSet {
                nodal: vec![],
                member: loads.member.clone(),
            };
            let r = solve_static(&model, &gravity, &case.problem.material).unwrap();
            let width = model.bounds().2;
            let peak = r.displacements.iter().map(|d| d.uy.abs()).fold(0.0, f64::max);
            for n in &model.nodes {
                let twin = model.node_at(width - n.x, n.y).unwrap();
                let (a, b) = (r.displacement(n.id).unwrap(), r.displacement(twin.id).unwrap());
                assert!((a.ux + b.ux).abs() <= 1e-9 * peak);
                assert!((a.uy - b.uy).abs() <= 1e-9 * peak);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stiffness_is_symmetric_and_loads_balance(problem in common::problem_strategy()) {
        let model = build_topology(&problem).unwrap();
        let k = global_stiffness(&model, &problem.material).unwrap();
        let max = k.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!((&k - k.transpose()).iter().all(|v| v.abs() <= 1e-12 * max));
        let loads = derive_loads(&problem, &model).unwrap();
        let r = solve_static(&model, &loads, &problem.material).unwrap();
        let (res, scale) = equilibrium_residual(&model, &loads, &r);
        prop_assert!(res.iter().all(|v| v.abs() <= 1e-8 * scale));
    }
}
