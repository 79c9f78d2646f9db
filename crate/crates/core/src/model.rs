//! Topology model shared by the geometry, validation, script and solver
//! stages: nodes, elements, supports and construction-step provenance.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::COORD_TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub desc: String,
}

impl Node {
    pub fn new(id: u32, x: f64, y: f64, desc: impl Into<String>) -> Self {
        Node {
            id: NodeId(id),
            x,
            y,
            desc: desc.into(),
        }
    }

    pub fn coincides(&self, other: &Node) -> bool {
        same_point((self.x, self.y), (other.x, other.y))
    }
}

pub fn same_point(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() <= COORD_TOLERANCE && (a.1 - b.1).abs() <= COORD_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementKind {
    Column,
    Girder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: ElementId,
    pub node_i: NodeId,
    pub node_j: NodeId,
    pub kind: ElementKind,
    pub desc: String,
}

impl Element {
    pub fn new(id: u32, node_i: u32, node_j: u32, kind: ElementKind, desc: impl Into<String>) -> Self {
        Element {
            id: ElementId(id),
            node_i: NodeId(node_i),
            node_j: NodeId(node_j),
            kind,
            desc: desc.into(),
        }
    }
}

/// Restrained degrees of freedom at a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Fixity {
    pub ux: bool,
    pub uy: bool,
    pub rz: bool,
}

impl Fixity {
    pub const FIXED: Fixity = Fixity {
        ux: true,
        uy: true,
        rz: true,
    };
    pub const PINNED: Fixity = Fixity {
        ux: true,
        uy: true,
        rz: false,
    };

    pub fn merge(self, other: Fixity) -> Fixity {
        Fixity {
            ux: self.ux || other.ux,
            uy: self.uy || other.uy,
            rz: self.rz || other.rz,
        }
    }

    pub fn as_array(self) -> [bool; 3] {
        [self.ux, self.uy, self.rz]
    }

    pub fn label(self) -> String {
        match self {
            Fixity::FIXED => "Fixed".to_string(),
            Fixity::PINNED => "Pinned".to_string(),
            f => format!("[{}, {}, {}]", f.ux as u8, f.uy as u8, f.rz as u8),
        }
    }
}

impl From<crate::problem::SupportKind> for Fixity {
    fn from(kind: crate::problem::SupportKind) -> Self {
        match kind {
            crate::problem::SupportKind::Fixed => Fixity::FIXED,
            crate::problem::SupportKind::Pinned => Fixity::PINNED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportConstraint {
    pub node_id: NodeId,
    pub fixity: Fixity,
}

/// Which construction rule produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// First story of the first bay: four nodes, three elements, two supports.
    #[serde(rename = "Rule_1")]
    Rule1,
    /// Upper story of the first bay: two nodes, three elements.
    #[serde(rename = "Rule_2")]
    Rule2,
    /// First story of a later bay: two nodes, two elements, one support.
    #[serde(rename = "Rule_3")]
    Rule3,
    /// Upper story of a later bay that the bay to its left also reaches.
    #[serde(rename = "Rule_4a")]
    Rule4a,
    /// Upper story of a later bay above the roof of the bay to its left.
    #[serde(rename = "Rule_4b")]
    Rule4b,
}

impl Rule {
    /// (nodes, elements, supports) added by one application.
    pub fn cardinality(self) -> (usize, usize, usize) {
        match self {
            Rule::Rule1 => (4, 3, 2),
            Rule::Rule2 => (2, 3, 0),
            Rule::Rule3 => (2, 2, 1),
            Rule::Rule4a => (1, 2, 0),
            Rule::Rule4b => (2, 3, 0),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Rule1 => "Rule_1",
            Rule::Rule2 => "Rule_2",
            Rule::Rule3 => "Rule_3",
            Rule::Rule4a => "Rule_4a",
            Rule::Rule4b => "Rule_4b",
        }
    }

    pub fn parse(s: &str) -> Option<Rule> {
        match s {
            "Rule_1" => Some(Rule::Rule1),
            "Rule_2" => Some(Rule::Rule2),
            "Rule_3" => Some(Rule::Rule3),
            "Rule_4a" => Some(Rule::Rule4a),
            "Rule_4b" => Some(Rule::Rule4b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionStep {
    pub step: u32,
    pub bay: u32,
    pub story: u32,
    pub rule: Rule,
    pub added_nodes: Vec<NodeId>,
    pub added_elements: Vec<ElementId>,
    pub added_supports: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TopologyModel {
    pub nodes: Vec<Node>,
    pub elements: Vec<Element>,
    pub supports: Vec<SupportConstraint>,
    #[serde(default)]
    pub steps: Vec<ConstructionStep>,
}

impl TopologyModel {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn element(&self, id: ElementId) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    /// First node (in table order) within tolerance of `(x, y)`.
    pub fn node_at(&self, x: f64, y: f64) -> Option<&Node> {
        self.nodes.iter().find(|n| same_point((n.x, n.y), (x, y)))
    }

    pub fn support(&self, id: NodeId) -> Option<&SupportConstraint> {
        self.supports.iter().find(|s| s.node_id == id)
    }

    pub fn count(&self, kind: ElementKind) -> usize {
        self.elements.iter().filter(|e| e.kind == kind).count()
    }

    pub fn next_node_id(&self) -> u32 {
        self.nodes.iter().map(|n| n.id.0).max().unwrap_or(0) + 1
    }

    pub fn next_element_id(&self) -> u32 {
        self.elements.iter().map(|e| e.id.0).max().unwrap_or(0) + 1
    }

    /// End coordinates of `element`, `None` if an endpoint is dangling.
    pub fn segment(&self, element: &Element) -> Option<((f64, f64), (f64, f64))> {
        let a = self.node(element.node_i)?;
        let b = self.node(element.node_j)?;
        Some(((a.x, a.y), (b.x, b.y)))
    }

    /// `(min_x, min_y, max_x, max_y)`; zeros for an empty model.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        if self.nodes.is_empty() {
            return (0.0, 0.0, 0.0, 0.0);
        }
        self.nodes.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), n| (a.min(n.x), b.min(n.y), c.max(n.x), d.max(n.y)),
        )
    }

    /// The model without construction provenance.
    pub fn without_steps(&self) -> TopologyModel {
        TopologyModel {
            steps: Vec::new(),
            ..self.clone()
        }
    }
}

/// Coordinates snapped to the tolerance grid so they can be sorted and compared.
pub type GridPoint = (i64, i64);

pub fn grid_point(x: f64, y: f64) -> GridPoint {
    (
        (x / COORD_TOLERANCE).round() as i64,
        (y / COORD_TOLERANCE).round() as i64,
    )
}

/// Label-free description of a model: sorted node coordinates, element
/// segments with kinds, and supports. Two models are isomorphic exactly when
/// their canonical forms are equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalTopology {
    pub nodes: Vec<GridPoint>,
    pub elements: Vec<(GridPoint, GridPoint, ElementKind)>,
    pub supports: Vec<(GridPoint, Fixity)>,
}

impl CanonicalTopology {
    /// `None` when the model has dangling references.
    pub fn of(model: &TopologyModel) -> Option<CanonicalTopology> {
        let mut nodes: Vec<GridPoint> = model.nodes.iter().map(|n| grid_point(n.x, n.y)).collect();
        nodes.sort_unstable();
        let mut elements = Vec::with_capacity(model.elements.len());
        for e in &model.elements {
            let (a, b) = model.segment(e)?;
            let (a, b) = (grid_point(a.0, a.1), grid_point(b.0, b.1));
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            elements.push((lo, hi, e.kind));
        }
        elements.sort_unstable();
        let mut supports = Vec::with_capacity(model.supports.len());
        for s in &model.supports {
            let n = model.node(s.node_id)?;
            supports.push((grid_point(n.x, n.y), s.fixity));
        }
        supports.sort_unstable();
        Some(CanonicalTopology {
            nodes,
            elements,
            supports,
        })
    }
}

/// Coordinate-preserving isomorphism including element kinds and supports.
pub fn isomorphic(a: &TopologyModel, b: &TopologyModel) -> bool {
    match (CanonicalTopology::of(a), CanonicalTopology::of(b)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn portal() -> TopologyModel {
        TopologyModel {
            nodes: vec![
                Node::new(1, 0.0, 0.0, ""),
                Node::new(2, 6.0, 0.0, ""),
                Node::new(3, 0.0, 5.0, ""),
                Node::new(4, 6.0, 5.0, ""),
            ],
            elements: vec![
                Element::new(1, 1, 3, ElementKind::Column, ""),
                Element::new(2, 2, 4, ElementKind::Column, ""),
                Element::new(3, 3, 4, ElementKind::Girder, ""),
            ],
            supports: vec![
                SupportConstraint {
                    node_id: NodeId(1),
                    fixity: Fixity::FIXED,
                },
                SupportConstraint {
                    node_id: NodeId(2),
                    fixity: Fixity::FIXED,
                },
            ],
            steps: vec![],
        }
    }

    #[test]
    fn relabeling_preserves_isomorphism() {
        let a = portal();
        let mut b = portal();
        // swap ids 1 <-> 4 and reverse element direction
        for n in &mut b.nodes {
            n.id = NodeId(5 - n.id.0);
        }
        for e in &mut b.elements {
            let (i, j) = (e.node_i, e.node_j);
            e.node_i = NodeId(5 - j.0);
            e.node_j = NodeId(5 - i.0);
            e.id = ElementId(10 + e.id.0);
        }
        for s in &mut b.supports {
            s.node_id = NodeId(5 - s.node_id.0);
        }
        assert!(isomorphic(&a, &b));
    }

    #[test]
    fn kind_support_and_geometry_changes_break_isomorphism() {
        let a = portal();
        let mut b = portal();
        b.elements[2].kind = ElementKind::Column;
        assert!(!isomorphic(&a, &b));
        let mut c = portal();
        c.supports[1].fixity = Fixity::PINNED;
        assert!(!isomorphic(&a, &c));
        let mut d = portal();
        d.nodes[3].y = 5.5;
        assert!(!isomorphic(&a, &d));
        let mut e = portal();
        e.elements[0].node_j = NodeId(99);
        assert!(!isomorphic(&a, &e));
    }

    #[test]
    fn fixity_merge_never_loosens() {
        assert_eq!(Fixity::PINNED.merge(Fixity::FIXED), Fixity::FIXED);
        let roller = Fixity {
            ux: false,
            uy: true,
            rz: false,
        };
        assert_eq!(roller.merge(Fixity::PINNED), Fixity::PINNED);
        assert_eq!(roller.label(), "[0, 1, 0]");
    }
}
