//! One pass/fail line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach standard output.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use framesmith::bench::{builtin_cases, run_benchmark, DEFAULT_SEED};
use framesmith::geometry::{build_topology, grid_oracle, line_story_counts};
use framesmith::loads::{derive_loads, LoadSet, MemberUdl, NodalLoad};
use framesmith::model::{
    isomorphic, Element, ElementId, ElementKind, Fixity, Node, NodeId, SupportConstraint, TopologyModel,
};
use framesmith::pipeline::{classify_script, DeterministicBackend, Oracle};
use framesmith::problem::{FrameProblem, MaterialSpec};
use framesmith::render::render_all;
use framesmith::script::{emit_script, parse_script, AnalysisConfig};
use framesmith::solver::{equilibrium_residual, internal_forces, solve_static};
use framesmith::validation::{action_log_text, inject_faults, random_recipe, replay_actions, validate_model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let problem = common::reference_problem();
    let m = build_topology(&problem).map_err(|e| e.to_string())?;
    let step = &m.steps[0];
    let ids: Vec<u32> = step.added_nodes.iter().map(|n| n.0).collect();
    check(ids == [1, 2, 3, 4], || format!("step 1 nodes {ids:?}"))?;
    let coords: Vec<(f64, f64)> = ids
        .iter()
        .map(|&i| m.node(NodeId(i)).map(|n| (n.x, n.y)).unwrap())
        .collect();
    check(coords == [(0.0, 0.0), (6.0, 0.0), (0.0, 5.0), (6.0, 5.0)], || {
        format!("coordinates {coords:?}")
    })?;
    let ends: Vec<(u32, u32, u32)> = step
        .added_elements
        .iter()
        .map(|&e| m.element(e).map(|e| (e.id.0, e.node_i.0, e.node_j.0)).unwrap())
        .collect();
    check(ends == [(1, 1, 3), (2, 2, 4), (3, 3, 4)], || {
        format!("elements {ends:?}")
    })?;
    let sup: Vec<(u32, Fixity)> = step
        .added_supports
        .iter()
        .map(|&n| (n.0, m.support(n).unwrap().fixity))
        .collect();
    check(sup == [(1, Fixity::FIXED), (2, Fixity::FIXED)], || {
        format!("supports {sup:?}")
    })?;

    let runs = 200;
    let start = Instant::now();
    for _ in 0..runs {
        std::hint::black_box(build_topology(std::hint::black_box(&problem)).unwrap());
    }
    let per_call = start.elapsed().as_secs_f64() / runs as f64;
    check(per_call < 1e-3, || format!("build took {:.3} ms", per_call * 1e3))?;
    Ok(format!("step 1 exact; build {:.1} us per call", per_call * 1e6))
}

fn counted(problem: &FrameProblem) -> (usize, usize, usize) {
    let lines = line_story_counts(problem);
    let nodes = lines.iter().map(|&s| s as usize + 1).sum();
    let elements = lines.iter().map(|&s| s as usize).sum::<usize>()
        + problem.story_signature().iter().map(|&s| s as usize).sum::<usize>();
    (nodes, elements, lines.len())
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut problems: Vec<(String, FrameProblem)> = builtin_cases(DEFAULT_SEED)
        .into_iter()
        .map(|c| (c.name, c.problem))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..500 {
        problems.push((format!("random #{i}"), common::random_problem(&mut rng)));
    }
    for (name, p) in &problems {
        let m = build_topology(p).map_err(|e| format!("{name}: {e}"))?;
        check(isomorphic(&m, &grid_oracle(p)), || {
            format!("{name}: differs from the oracle")
        })?;
        let got = (m.nodes.len(), m.elements.len(), m.supports.len());
        check(got == counted(p), || format!("{name}: counts {got:?}"))?;
    }
    for (sig, want) in [(&[3u32, 2, 3][..], (16, 20, 4)), (&[5, 3, 2, 4, 1][..], (28, 37, 6))] {
        let m = build_topology(&FrameProblem::uniform(sig, 6.0, 3.0).unwrap()).unwrap();
        let got = (m.nodes.len(), m.elements.len(), m.supports.len());
        check(got == want, || format!("{sig:?}: {got:?}"))?;
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!(
        "{} problems isomorphic to the oracle in {secs:.2} s",
        problems.len()
    ))
}

fn criterion_3() -> Outcome {
    let clean = build_topology(&common::reference_problem()).map_err(|e| e.to_string())?;
    let injected = inject_faults(&clean, &common::repair_recipe()).model;
    let report = validate_model(&injected).map_err(|e| e.to_string())?;
    let log = action_log_text(&report.actions);
    check(log == common::REPAIR_LOG, || format!("log was:\n{log}"))?;
    Ok(format!("{} actions match", report.actions.len()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut actions = 0;
    for i in 0..1000 {
        let clean = build_topology(&common::random_problem(&mut rng)).unwrap();
        let count = rng.random_range(1..=8);
        let injected = inject_faults(&clean, &random_recipe(&clean, count, &mut rng)).model;
        let once = validate_model(&injected).map_err(|e| format!("model {i}: {e}"))?;
        let twice = validate_model(&once.model).map_err(|e| format!("model {i}: {e}"))?;
        check(twice.is_clean() && twice.model == once.model, || {
            format!("model {i}: not idempotent")
        })?;
        check(isomorphic(&once.model, &clean), || {
            format!("model {i}: geometry changed")
        })?;
        let replayed = replay_actions(&injected, &once.actions).map_err(|e| format!("model {i}: {e}"))?;
        check(replayed == once.model, || format!("model {i}: replay differs"))?;
        actions += once.actions.len();
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!("1000 models, {actions} actions, {secs:.2} s"))
}

fn line_model(nodes: &[(f64, f64)], supports: &[(u32, Fixity)]) -> TopologyModel {
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
        elements: (1..nodes.len() as u32)
            .map(|i| Element {
                id: ElementId(i),
                node_i: NodeId(i),
                node_j: NodeId(i + 1),
                kind: ElementKind::Girder,
                desc: String::new(),
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

fn criterion_5() -> Outcome {
    let mat = MaterialSpec::default();
    let ei = mat.e * mat.i_gir;

    let (l, p) = (4.0, -12_000.0);
    let cantilever = line_model(&[(0.0, 0.0), (l, 0.0)], &[(1, Fixity::FIXED)]);
    let loads = LoadSet {
        nodal: vec![NodalLoad {
            node_id: NodeId(2),
            fx: 0.0,
            fy: p,
            mz: 0.0,
        }],
        member: vec![],
    };
    let r = solve_static(&cantilever, &loads, &mat).map_err(|e| e.to_string())?;
    let tip = r.displacement(NodeId(2)).unwrap().uy;
    let e_tip = rel(tip, p * l.powi(3) / (3.0 * ei));
    check(e_tip <= 1e-9, || format!("cantilever error {e_tip:e}"))?;

    let (l, w) = (6.0, -10_000.0);
    let beam = line_model(&[(0.0, 0.0), (l, 0.0)], &[(1, Fixity::PINNED), (2, Fixity::PINNED)]);
    let loads = LoadSet {
        nodal: vec![],
        member: vec![MemberUdl {
            element_id: ElementId(1),
            w,
        }],
    };
    let r = solve_static(&beam, &loads, &mat).map_err(|e| e.to_string())?;
    let mid = internal_forces(&r, &beam, &loads)[0].m_at(l / 2.0);
    let e_mid = rel(mid, 45_000.0);
    check(e_mid <= 1e-9, || format!("midspan moment {mid}, error {e_mid:e}"))?;

    let mut worst: f64 = 0.0;
    let mut symmetric = 0;
    for case in builtin_cases(DEFAULT_SEED) {
        let m = build_topology(&case.problem).unwrap();
        let loads = derive_loads(&case.problem, &m).unwrap();
        let r = solve_static(&m, &loads, &case.problem.material).map_err(|e| format!("{}: {e}", case.name))?;
        let (res, scale) = equilibrium_residual(&m, &loads, &r);
        let e = res.iter().fold(0.0f64, |a, v| a.max(v.abs())) / scale;
        check(e <= 1e-8, || format!("{}: equilibrium residual {e:e}", case.name))?;
        worst = worst.max(e);

        let sig = case.problem.story_signature();
        if sig.iter().eq(sig.iter().rev()) {
            symmetric += 1;
            let gravity = LoadSet {
                nodal: vec![],
                member: loads.member.clone(),
            };
            let r = solve_static(&m, &gravity, &case.problem.material).unwrap();
            let width = m.bounds().2;
            let peak = r
                .displacements
                .iter()
                .map(|d| d.uy.abs().max(d.ux.abs()))
                .fold(0.0, f64::max);
            for n in &m.nodes {
                let twin = m
                    .node_at(width - n.x, n.y)
                    .ok_or(format!("{}: no mirror node", case.name))?;
                let (a, b) = (r.displacement(n.id).unwrap(), r.displacement(twin.id).unwrap());
                let off = (a.ux + b.ux).abs().max((a.uy - b.uy).abs());
                check(off <= 1e-9 * peak, || {
                    format!("{}: node {} not mirrored", case.name, n.id)
                })?;
            }
        }
    }
    Ok(format!(
        "cantilever {e_tip:.1e}, midspan {e_mid:.1e}, equilibrium <= {worst:.1e}, {symmetric} symmetric cases mirrored"
    ))
}

fn criterion_6() -> Outcome {
    let mut inputs: Vec<(String, FrameProblem)> = builtin_cases(DEFAULT_SEED)
        .into_iter()
        .map(|c| (c.name, c.problem))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..200 {
        inputs.push((format!("random #{i}"), common::random_problem(&mut rng)));
    }
    for (i, (name, p)) in inputs.iter().enumerate() {
        let clean = build_topology(p).unwrap();
        let model = if i >= 20 && i % 2 == 0 {
            inject_faults(&clean, &random_recipe(&clean, 3, &mut rng)).model
        } else {
            clean
        };
        let loads = derive_loads(p, &model).unwrap();
        let config = AnalysisConfig {
            steps: 1 + (i as u32 % 4),
            ..AnalysisConfig::default()
        };
        let doc = emit_script(&model, &loads, &p.material, &config);
        let back = parse_script(&doc.text).map_err(|e| format!("{name}: {e}"))?;
        check(
            back.model == model && back.loads == loads && back.material == p.material && back.config == config,
            || format!("{name}: parsed model differs"),
        )?;
        let again = emit_script(&model, &loads, &p.material, &config);
        check(again.text == doc.text, || format!("{name}: emission not deterministic"))?;
    }
    Ok(format!("{} scripts roundtrip exactly", inputs.len()))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let cases = builtin_cases(DEFAULT_SEED);
    let report = run_benchmark(&DeterministicBackend::default(), &cases, 10).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    for c in &report.cases {
        check(c.trials == 10 && c.accuracy == 1.0, || {
            format!("{}: accuracy {:.2}", c.name, c.accuracy)
        })?;
    }
    check(report.cases.len() == 20, || format!("{} cases", report.cases.len()))?;
    check(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!("20 cases x 10 trials at 1.00 in {secs:.2} s"))
}

fn criterion_8() -> Outcome {
    let oracle = Oracle::for_problem(&common::reference_problem()).map_err(|e| e.to_string())?;
    let defects = common::defect_scripts();
    for (name, script, want) in &defects {
        let got = classify_script(script, &oracle).error_category;
        check(got == Some(*want), || {
            format!("{name}: classified as {got:?}, expected {want}")
        })?;
    }
    Ok(format!("{} defect families classified", defects.len()))
}

fn criterion_9() -> Outcome {
    let p = FrameProblem::uniform(&[5, 3, 2, 4, 1], 6.0, 3.0).unwrap();
    let m = build_topology(&p).unwrap();
    let l = derive_loads(&p, &m).unwrap();
    let r = solve_static(&m, &l, &p.material).map_err(|e| e.to_string())?;
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let renders = render_all(&m, &l, &r).map_err(|e| e.to_string())?;
    for (kind, svg) in &renders {
        let path = dir.join(format!("5-3-2-4-1_{}.svg", kind.file_stem()));
        let stored = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        check(stored == svg.as_bytes(), || format!("{} differs", path.display()))?;
    }
    Ok(format!("{} renders byte-identical", renders.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("first construction step", criterion_1),
        ("oracle equivalence", criterion_2),
        ("defect replay log", criterion_3),
        ("validator properties", criterion_4),
        ("solver correctness", criterion_5),
        ("codegen roundtrip", criterion_6),
        ("end-to-end determinism", criterion_7),
        ("error taxonomy", criterion_8),
        ("golden renders", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
