//! Rule-based frame construction.
//!
//! The frame is assembled bay by bay from left to right and, within a bay,
//! story by story from the ground up. Every (bay, story) cell is one
//! construction step, and the rule for a step depends only on its position
//! and on the height of the bay to its left:
//!
//! | cell                                   | rule    | nodes | elements | supports |
//! |----------------------------------------|---------|-------|----------|----------|
//! | bay 1, story 1                         | Rule1   | 4     | 3        | 2        |
//! | bay 1, story ≥ 2                       | Rule2   | 2     | 3        | 0        |
//! | bay ≥ 2, story 1                       | Rule3   | 2     | 2        | 1        |
//! | bay ≥ 2, story ≥ 2, left bay reaches it| Rule4a  | 1     | 2        | 0        |
//! | bay ≥ 2, story ≥ 2, above left bay     | Rule4b  | 2     | 3        | 0        |
//!
//! Nodes on a shared column line are created once and looked up by
//! coordinate afterwards, so adjacent bays never duplicate them.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::to_canonical_json;
use crate::model::{
    ConstructionStep, Element, ElementId, ElementKind, Fixity, Node, NodeId, Rule, SupportConstraint, TopologyModel,
};
use crate::problem::FrameProblem;
use crate::COORD_TOLERANCE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("step (bay {bay}, story {story}) needs an existing node at ({x}, {y}); steps applied out of order")]
    MissingSharedNode { bay: u32, story: u32, x: f64, y: f64 },
    #[error("step (bay {bay}, story {story}) is outside the frame")]
    OutOfRange { bay: u32, story: u32 },
    #[error("step (bay {bay}, story {story}) cannot use {rule:?}; expected {expected:?}")]
    WrongRule {
        bay: u32,
        story: u32,
        rule: Rule,
        expected: Rule,
    },
    #[error("construction steps JSON: {0}")]
    Json(String),
    #[error("construction step {step}: {message}")]
    InvalidStep { step: u32, message: String },
}

/// One entry of the construction plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannedStep {
    pub bay: u32,
    pub story: u32,
    pub rule: Rule,
}

/// Rule for the cell at (`bay`, `story`), given the story count of the bay
/// to its left (ignored for bay 1). A story equal to that count still has a
/// node on the shared line, so it takes Rule4a.
pub fn select_rule(bay: u32, story: u32, left_bay_stories: u32) -> Rule {
    match (bay, story) {
        (1, 1) => Rule::Rule1,
        (1, _) => Rule::Rule2,
        (_, 1) => Rule::Rule3,
        _ if story <= left_bay_stories => Rule::Rule4a,
        _ => Rule::Rule4b,
    }
}

pub fn plan_construction(problem: &FrameProblem) -> Vec<PlannedStep> {
    let mut plan = Vec::new();
    for (i, bay) in problem.bays.iter().enumerate() {
        let left = if i == 0 { 0 } else { problem.bays[i - 1].stories() };
        for story in 1..=bay.stories() {
            plan.push(PlannedStep {
                bay: bay.index,
                story,
                rule: select_rule(bay.index, story, left),
            });
        }
    }
    plan
}

struct StepBuilder {
    model: TopologyModel,
    step: PlannedStep,
    added_nodes: Vec<NodeId>,
    added_elements: Vec<ElementId>,
    added_supports: Vec<NodeId>,
    fixity: Fixity,
}

impl StepBuilder {
    fn add_node(&mut self, x: f64, y: f64, desc: &str) -> NodeId {
        let id = self.model.next_node_id();
        self.model.nodes.push(Node::new(id, x, y, desc));
        self.added_nodes.push(NodeId(id));
        NodeId(id)
    }

    fn existing(&self, x: f64, y: f64) -> Result<NodeId, GeometryError> {
        self.model
            .node_at(x, y)
            .map(|n| n.id)
            .ok_or(GeometryError::MissingSharedNode {
                bay: self.step.bay,
                story: self.step.story,
                x,
                y,
            })
    }

    fn add_element(&mut self, i: NodeId, j: NodeId, kind: ElementKind, desc: &str) {
        let id = self.model.next_element_id();
        self.model.elements.push(Element::new(id, i.0, j.0, kind, desc));
        self.added_elements.push(ElementId(id));
    }

    fn add_support(&mut self, node: NodeId) {
        self.model.supports.push(SupportConstraint {
            node_id: node,
            fixity: self.fixity,
        });
        self.added_supports.push(node);
    }

    fn finish(mut self) -> TopologyModel {
        let index = self.model.steps.len() as u32 + 1;
        self.model.steps.push(ConstructionStep {
            step: index,
            bay: self.step.bay,
            story: self.step.story,
            rule: self.step.rule,
            added_nodes: self.added_nodes,
            added_elements: self.added_elements,
            added_supports: self.added_supports,
        });
        self.model
    }
}

/// Applies one construction step to `state`, continuing its id counters.
pub fn apply_step(
    state: TopologyModel,
    problem: &FrameProblem,
    step: PlannedStep,
) -> Result<TopologyModel, GeometryError> {
    let out_of_range = GeometryError::OutOfRange {
        bay: step.bay,
        story: step.story,
    };
    if step.bay == 0 || step.bay as usize > problem.bays.len() || step.story == 0 {
        return Err(out_of_range);
    }
    let b = (step.bay - 1) as usize;
    let bay = &problem.bays[b];
    if step.story > bay.stories() {
        return Err(out_of_range);
    }
    let left_stories = if b == 0 { 0 } else { problem.bays[b - 1].stories() };
    let expected = select_rule(step.bay, step.story, left_stories);
    if expected != step.rule {
        return Err(GeometryError::WrongRule {
            bay: step.bay,
            story: step.story,
            rule: step.rule,
            expected,
        });
    }

    let xl = problem.line_x(b);
    let xr = xl + bay.span;
    let y_bot = bay.floor_level(step.story - 1);
    let y_top = y_bot + bay.heights[(step.story - 1) as usize];

    let mut sb = StepBuilder {
        model: state,
        step,
        added_nodes: Vec::new(),
        added_elements: Vec::new(),
        added_supports: Vec::new(),
        fixity: problem.support.into(),
    };

    match step.rule {
        Rule::Rule1 => {
            let bl = sb.add_node(xl, y_bot, "Bottom left");
            let br = sb.add_node(xr, y_bot, "Bottom right");
            let tl = sb.add_node(xl, y_top, "Top left");
            let tr = sb.add_node(xr, y_top, "Top right");
            sb.add_element(bl, tl, ElementKind::Column, "Left column");
            sb.add_element(br, tr, ElementKind::Column, "Right column");
            sb.add_element(tl, tr, ElementKind::Girder, "Top girder");
            sb.add_support(bl);
            sb.add_support(br);
        }
        Rule::Rule2 | Rule::Rule4b => {
            let bl = sb.existing(xl, y_bot)?;
            let br = sb.existing(xr, y_bot)?;
            let tl = sb.add_node(xl, y_top, "Top left");
            let tr = sb.add_node(xr, y_top, "Top right");
            sb.add_element(bl, tl, ElementKind::Column, "Left column");
            sb.add_element(br, tr, ElementKind::Column, "Right column");
            sb.add_element(tl, tr, ElementKind::Girder, "Top girder");
        }
        Rule::Rule3 => {
            let tl = sb.existing(xl, y_top)?;
            let br = sb.add_node(xr, y_bot, "Bottom right");
            let tr = sb.add_node(xr, y_top, "Top right");
            sb.add_element(br, tr, ElementKind::Column, "Right column");
            sb.add_element(tl, tr, ElementKind::Girder, "Top girder");
            sb.add_support(br);
        }
        Rule::Rule4a => {
            let tl = sb.existing(xl, y_top)?;
            let br = sb.existing(xr, y_bot)?;
            let tr = sb.add_node(xr, y_top, "Top right");
            sb.add_element(br, tr, ElementKind::Column, "Right column");
            sb.add_element(tl, tr, ElementKind::Girder, "Top girder");
        }
    }
    Ok(sb.finish())
}

/// Runs the full construction plan.
pub fn build_topology(problem: &FrameProblem) -> Result<TopologyModel, GeometryError> {
    plan_construction(problem)
        .into_iter()
        .try_fold(TopologyModel::default(), |state, step| apply_step(state, problem, step))
}

/// Story count of each column line, left to right.
pub fn line_story_counts(problem: &FrameProblem) -> Vec<u32> {
    let sig = problem.story_signature();
    let nb = sig.len();
    (0..=nb)
        .map(|i| match i {
            0 => sig[0],
            i if i == nb => sig[nb - 1],
            i => sig[i - 1].max(sig[i]),
        })
        .collect()
}

/// Independent enumeration of the frame by column lines, used to check
/// [`build_topology`]. Nodes are numbered line by line from the bottom,
/// columns likewise, then girders bay by bay from the bottom.
pub fn grid_oracle(problem: &FrameProblem) -> TopologyModel {
    let counts = line_story_counts(problem);
    let nb = problem.bays.len();
    let mut model = TopologyModel::default();
    let mut line_nodes: Vec<Vec<(NodeId, f64)>> = Vec::with_capacity(nb + 1);

    for (line, &levels) in counts.iter().enumerate() {
        // the taller neighbour defines the floor levels of this line
        let bay = match line {
            0 => &problem.bays[0],
            l if l == nb => &problem.bays[nb - 1],
            l => {
                let (a, b) = (&problem.bays[l - 1], &problem.bays[l]);
                if a.stories() >= b.stories() {
                    a
                } else {
                    b
                }
            }
        };
        let x = problem.line_x(line);
        let mut ids = Vec::with_capacity(levels as usize + 1);
        for level in 0..=levels {
            let y = bay.floor_level(level);
            let id = model.nodes.len() as u32 + 1;
            model
                .nodes
                .push(Node::new(id, x, y, format!("Line {line} level {level}")));
            ids.push((NodeId(id), y));
        }
        line_nodes.push(ids);
    }

    let mut next_element = 1u32;
    for (line, ids) in line_nodes.iter().enumerate() {
        for pair in ids.windows(2) {
            model.elements.push(Element::new(
                next_element,
                pair[0].0 .0,
                pair[1].0 .0,
                ElementKind::Column,
                format!("Column line {line}"),
            ));
            next_element += 1;
        }
    }
    for (b, bay) in problem.bays.iter().enumerate() {
        for story in 1..=bay.stories() {
            let y = bay.floor_level(story);
            let find = |line: usize| {
                line_nodes[line]
                    .iter()
                    .find(|(_, ny)| (ny - y).abs() <= COORD_TOLERANCE)
                    .map(|(id, _)| *id)
                    .expect("line story counts cover every floor of adjacent bays")
            };
            let (i, j) = (find(b), find(b + 1));
            model.elements.push(Element::new(
                next_element,
                i.0,
                j.0,
                ElementKind::Girder,
                format!("Girder bay {} story {story}", bay.index),
            ));
            next_element += 1;
        }
    }
    let fixity: Fixity = problem.support.into();
    for ids in &line_nodes {
        model.supports.push(SupportConstraint {
            node_id: ids[0].0,
            fixity,
        });
    }
    model
}

// ---------------------------------------------------------------------------
// Construction-steps JSON

#[derive(Serialize, Deserialize)]
struct StepsDoc {
    #[serde(rename = "Construction_steps")]
    steps: Vec<StepDoc>,
}

#[derive(Serialize, Deserialize)]
struct StepDoc {
    #[serde(rename = "Step")]
    step: u32,
    #[serde(rename = "Bay")]
    bay: u32,
    #[serde(rename = "Story")]
    story: u32,
    #[serde(rename = "Rule")]
    rule: String,
    #[serde(rename = "Nodes", default)]
    nodes: Vec<NodeDoc>,
    #[serde(rename = "Elements", default)]
    elements: Vec<ElementDoc>,
    #[serde(rename = "Boundary_conditions", default)]
    boundary_conditions: Vec<BoundaryDoc>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    #[serde(rename = "ID")]
    id: u32,
    x: f64,
    y: f64,
    #[serde(rename = "Desc", default)]
    desc: String,
}

#[derive(Serialize, Deserialize)]
struct ElementDoc {
    #[serde(rename = "ID")]
    id: u32,
    #[serde(rename = "Coord")]
    coord: [[f64; 2]; 2],
    #[serde(rename = "Desc", default)]
    desc: String,
}

#[derive(Serialize, Deserialize)]
struct BoundaryDoc {
    #[serde(rename = "Node_ID")]
    node_id: u32,
    #[serde(rename = "Constraints")]
    constraints: String,
}

/// Serializes the construction steps in the `Construction_steps` layout:
/// per step, the nodes, elements (by end coordinates) and supports it adds.
pub fn steps_to_json(model: &TopologyModel) -> String {
    let mut steps = Vec::with_capacity(model.steps.len());
    for s in &model.steps {
        let nodes = s
            .added_nodes
            .iter()
            .filter_map(|id| model.node(*id))
            .map(|n| NodeDoc {
                id: n.id.0,
                x: n.x,
                y: n.y,
                desc: n.desc.clone(),
            })
            .collect();
        let elements = s
            .added_elements
            .iter()
            .filter_map(|id| model.element(*id))
            .filter_map(|e| {
                model.segment(e).map(|(a, b)| ElementDoc {
                    id: e.id.0,
                    coord: [[a.0, a.1], [b.0, b.1]],
                    desc: e.desc.clone(),
                })
            })
            .collect();
        let boundary_conditions = s
            .added_supports
            .iter()
            .filter_map(|id| model.support(*id))
            .map(|sc| BoundaryDoc {
                node_id: sc.node_id.0,
                constraints: sc.fixity.label(),
            })
            .collect();
        steps.push(StepDoc {
            step: s.step,
            bay: s.bay,
            story: s.story,
            rule: s.rule.as_str().to_string(),
            nodes,
            elements,
            boundary_conditions,
        });
    }
    to_canonical_json(&StepsDoc { steps })
}

fn parse_constraints(text: &str) -> Option<Fixity> {
    match text.trim().to_ascii_lowercase().as_str() {
        "fixed" => Some(Fixity::FIXED),
        "pinned" => Some(Fixity::PINNED),
        other => {
            let inner = other.trim_start_matches('[').trim_end_matches(']');
            let flags: Vec<bool> = inner
                .split(',')
                .map(|t| match t.trim() {
                    "1" | "true" => Some(true),
                    "0" | "false" => Some(false),
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()?;
            match flags.as_slice() {
                [ux, uy, rz] => Some(Fixity {
                    ux: *ux,
                    uy: *uy,
                    rz: *rz,
                }),
                _ => None,
            }
        }
    }
}

/// Rebuilds a topology model from a `Construction_steps` document. Element
/// ends are resolved to the first node at each coordinate; the element kind
/// follows from its orientation. Duplicates are kept as given so the
/// validation passes can report them.
pub fn topology_from_steps_json(text: &str) -> Result<TopologyModel, GeometryError> {
    let doc: StepsDoc = serde_json::from_str(text).map_err(|e| GeometryError::Json(e.to_string()))?;
    let mut model = TopologyModel::default();
    for s in doc.steps {
        let invalid = |message: String| GeometryError::InvalidStep { step: s.step, message };
        let rule = Rule::parse(&s.rule).ok_or_else(|| invalid(format!("unknown rule `{}`", s.rule)))?;
        let mut step = ConstructionStep {
            step: s.step,
            bay: s.bay,
            story: s.story,
            rule,
            added_nodes: Vec::new(),
            added_elements: Vec::new(),
            added_supports: Vec::new(),
        };
        for n in s.nodes {
            if !(n.x.is_finite() && n.y.is_finite()) {
                return Err(invalid(format!("node {} has non-finite coordinates", n.id)));
            }
            model.nodes.push(Node::new(n.id, n.x, n.y, n.desc));
            step.added_nodes.push(NodeId(n.id));
        }
        for e in s.elements {
            let [a, b] = e.coord;
            let resolve = |p: [f64; 2]| {
                model.node_at(p[0], p[1]).map(|n| n.id).ok_or_else(|| {
                    invalid(format!(
                        "element {} ends at ({}, {}) where no node exists",
                        e.id, p[0], p[1]
                    ))
                })
            };
            let (i, j) = (resolve(a)?, resolve(b)?);
            let kind = if (a[0] - b[0]).abs() <= COORD_TOLERANCE {
                ElementKind::Column
            } else if (a[1] - b[1]).abs() <= COORD_TOLERANCE {
                ElementKind::Girder
            } else {
                return Err(invalid(format!("element {} is neither vertical nor horizontal", e.id)));
            };
            model.elements.push(Element::new(e.id, i.0, j.0, kind, e.desc));
            step.added_elements.push(ElementId(e.id));
        }
        for bc in s.boundary_conditions {
            let fixity = parse_constraints(&bc.constraints)
                .ok_or_else(|| invalid(format!("unknown constraint `{}`", bc.constraints)))?;
            model.supports.push(SupportConstraint {
                node_id: NodeId(bc.node_id),
                fixity,
            });
            step.added_supports.push(NodeId(bc.node_id));
        }
        model.steps.push(step);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::isomorphic;
    use crate::problem::{BaySpec, LoadSpecification, MaterialSpec, SupportKind};

    fn frame(sig: &[u32]) -> FrameProblem {
        FrameProblem::uniform(sig, 6.0, 3.0).unwrap()
    }

    fn reference() -> FrameProblem {
        FrameProblem::new(
            vec![BaySpec::new(1, 6.0, vec![5.0, 4.0, 5.0])],
            SupportKind::Fixed,
            MaterialSpec::default(),
            LoadSpecification::default(),
        )
        .unwrap()
    }

    /// 3-2-3 with 5/4/5 m floors on every bay.
    fn frame_323() -> FrameProblem {
        FrameProblem::new(
            vec![
                BaySpec::new(1, 6.0, vec![5.0, 4.0, 5.0]),
                BaySpec::new(2, 6.0, vec![5.0, 4.0]),
                BaySpec::new(3, 6.0, vec![5.0, 4.0, 5.0]),
            ],
            SupportKind::Fixed,
            MaterialSpec::default(),
            LoadSpecification::default(),
        )
        .unwrap()
    }

    #[test]
    fn plan_for_323() {
        let plan = plan_construction(&frame(&[3, 2, 3]));
        let rules: Vec<_> = plan.iter().map(|s| (s.bay, s.story, s.rule)).collect();
        assert_eq!(
            rules,
            vec![
                (1, 1, Rule::Rule1),
                (1, 2, Rule::Rule2),
                (1, 3, Rule::Rule2),
                (2, 1, Rule::Rule3),
                (2, 2, Rule::Rule4a),
                (3, 1, Rule::Rule3),
                (3, 2, Rule::Rule4a),
                (3, 3, Rule::Rule4b),
            ]
        );
    }

    #[test]
    fn plan_single_cell() {
        let plan = plan_construction(&frame(&[1]));
        assert_eq!(
            plan,
            vec![PlannedStep {
                bay: 1,
                story: 1,
                rule: Rule::Rule1
            }]
        );
    }

    #[test]
    fn plan_for_53241() {
        let plan = plan_construction(&frame(&[5, 3, 2, 4, 1]));
        assert_eq!(plan.len(), 15);
        let rule_at = |bay, story| plan.iter().find(|s| s.bay == bay && s.story == story).unwrap().rule;
        assert_eq!(rule_at(4, 2), Rule::Rule4a);
        assert_eq!(rule_at(4, 3), Rule::Rule4b);
        assert_eq!(rule_at(4, 4), Rule::Rule4b);
        assert_eq!(rule_at(2, 3), Rule::Rule4a);
        assert_eq!(rule_at(5, 1), Rule::Rule3);
    }

    #[test]
    fn equal_story_takes_shared_branch() {
        assert_eq!(select_rule(2, 3, 3), Rule::Rule4a);
        assert_eq!(select_rule(2, 4, 3), Rule::Rule4b);
    }

    #[test]
    fn rule1_reproduces_table_one() {
        let m = build_topology(&reference()).unwrap();
        let step = &m.steps[0];
        assert_eq!(step.rule, Rule::Rule1);
        let coords: Vec<_> = step
            .added_nodes
            .iter()
            .map(|id| {
                let n = m.node(*id).unwrap();
                (n.id.0, n.x, n.y, n.desc.as_str())
            })
            .collect();
        assert_eq!(
            coords,
            vec![
                (1, 0.0, 0.0, "Bottom left"),
                (2, 6.0, 0.0, "Bottom right"),
                (3, 0.0, 5.0, "Top left"),
                (4, 6.0, 5.0, "Top right"),
            ]
        );
        assert_eq!(m.elements[0], Element::new(1, 1, 3, ElementKind::Column, "Left column"));
        assert_eq!(
            m.elements[1],
            Element::new(2, 2, 4, ElementKind::Column, "Right column")
        );
        assert_eq!(m.elements[2], Element::new(3, 3, 4, ElementKind::Girder, "Top girder"));
        assert_eq!(step.added_supports, vec![NodeId(1), NodeId(2)]);
        assert!(m.supports.iter().all(|s| s.fixity == Fixity::FIXED));
    }

    #[test]
    fn rule3_and_rule4a_on_323() {
        let p = frame_323();
        let m = build_topology(&p).unwrap();
        let seg = |id: &ElementId| m.segment(m.element(*id).unwrap()).unwrap();

        let s4 = &m.steps[3];
        assert_eq!((s4.bay, s4.story, s4.rule), (2, 1, Rule::Rule3));
        let pts: Vec<_> = s4
            .added_nodes
            .iter()
            .map(|id| {
                let n = m.node(*id).unwrap();
                (n.x, n.y)
            })
            .collect();
        assert_eq!(pts, vec![(12.0, 0.0), (12.0, 5.0)]);
        assert_eq!(seg(&s4.added_elements[0]), ((12.0, 0.0), (12.0, 5.0)));
        assert_eq!(seg(&s4.added_elements[1]), ((6.0, 5.0), (12.0, 5.0)));
        assert_eq!(m.node(s4.added_supports[0]).map(|n| (n.x, n.y)), Some((12.0, 0.0)));

        let s5 = &m.steps[4];
        assert_eq!((s5.bay, s5.story, s5.rule), (2, 2, Rule::Rule4a));
        let n = m.node(s5.added_nodes[0]).unwrap();
        assert_eq!((n.x, n.y), (12.0, 9.0));
        assert_eq!(seg(&s5.added_elements[0]), ((12.0, 5.0), (12.0, 9.0)));
        assert_eq!(seg(&s5.added_elements[1]), ((6.0, 9.0), (12.0, 9.0)));
    }

    #[test]
    fn step_cardinalities_match_rules() {
        let m = build_topology(&frame(&[2, 4, 3, 5, 1])).unwrap();
        for s in &m.steps {
            assert_eq!(
                (s.added_nodes.len(), s.added_elements.len(), s.added_supports.len()),
                s.rule.cardinality(),
                "{s:?}"
            );
        }
    }

    #[test]
    fn counts_for_benchmark_spot_cases() {
        let m = build_topology(&frame(&[3, 2, 3])).unwrap();
        assert_eq!((m.nodes.len(), m.elements.len(), m.supports.len()), (16, 20, 4));
        let m = build_topology(&frame(&[5, 3, 2, 4, 1])).unwrap();
        assert_eq!((m.nodes.len(), m.elements.len(), m.supports.len()), (28, 37, 6));
        assert_eq!(m.count(ElementKind::Column), 22);
        assert_eq!(m.count(ElementKind::Girder), 15);
        let m = build_topology(&frame(&[1])).unwrap();
        assert_eq!((m.nodes.len(), m.elements.len(), m.supports.len()), (4, 3, 2));
    }

    #[test]
    fn oracle_line_counts() {
        assert_eq!(line_story_counts(&frame(&[3, 2, 3])), vec![3, 3, 3, 3]);
        let o = grid_oracle(&frame(&[3, 2, 3]));
        assert_eq!(
            (
                o.nodes.len(),
                o.count(ElementKind::Column),
                o.count(ElementKind::Girder)
            ),
            (16, 12, 8)
        );
        assert_eq!(line_story_counts(&frame(&[3, 4, 5, 4, 3])), vec![3, 4, 5, 5, 4, 3]);
        let o = grid_oracle(&frame(&[3, 4, 5, 4, 3]));
        assert_eq!(
            (
                o.nodes.len(),
                o.count(ElementKind::Column),
                o.count(ElementKind::Girder)
            ),
            (30, 24, 19)
        );
    }

    #[test]
    fn oracle_matches_rule1_for_single_cell() {
        let p = frame(&[1]);
        assert!(isomorphic(&build_topology(&p).unwrap(), &grid_oracle(&p)));
    }

    #[test]
    fn pinned_supports_propagate() {
        let mut p = frame(&[2, 1]);
        p.support = SupportKind::Pinned;
        let m = build_topology(&p).unwrap();
        assert!(m.supports.iter().all(|s| s.fixity == Fixity::PINNED));
        assert!(isomorphic(&m, &grid_oracle(&p)));
    }

    #[test]
    fn out_of_order_step_is_internal_error() {
        let p = frame(&[2, 2]);
        let err = apply_step(
            TopologyModel::default(),
            &p,
            PlannedStep {
                bay: 2,
                story: 2,
                rule: Rule::Rule4a,
            },
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::MissingSharedNode { bay: 2, story: 2, .. }));
        let err = apply_step(
            TopologyModel::default(),
            &p,
            PlannedStep {
                bay: 1,
                story: 1,
                rule: Rule::Rule2,
            },
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::WrongRule { .. }));
    }

    #[test]
    fn steps_json_roundtrip() {
        let m = build_topology(&frame_323()).unwrap();
        let text = steps_to_json(&m);
        assert!(text.contains("\"Rule\": \"Rule_1\""));
        assert!(text.contains("\"Desc\": \"Bottom left\""));
        let back = topology_from_steps_json(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn steps_json_rejects_diagonals() {
        let text = r#"{"Construction_steps": [{"Step": 1, "Bay": 1, "Story": 1, "Rule": "Rule_1",
            "Nodes": [{"ID": 1, "x": 0, "y": 0}, {"ID": 2, "x": 6, "y": 5}],
            "Elements": [{"ID": 1, "Coord": [[0, 0], [6, 5]]}]}]}"#;
        assert!(matches!(
            topology_from_steps_json(text),
            Err(GeometryError::InvalidStep { step: 1, .. })
        ));
    }
}
