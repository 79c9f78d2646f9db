//! Resolution of a problem's load specification onto model ids.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ElementId, ElementKind, NodeId, TopologyModel};
use crate::problem::FrameProblem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoadError {
    #[error("no node at ({x}, {y}) for a nodal load")]
    UnresolvedLocator { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalLoad {
    pub node_id: NodeId,
    pub fx: f64,
    pub fy: f64,
    pub mz: f64,
}

/// Uniform transverse load; positive along the element's local +y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberUdl {
    pub element_id: ElementId,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadSet {
    pub nodal: Vec<NodalLoad>,
    pub member: Vec<MemberUdl>,
}

impl LoadSet {
    pub fn is_empty(&self) -> bool {
        self.nodal.is_empty() && self.member.is_empty()
    }

    /// Merges loads on the same node or element and sorts by id.
    pub fn normalized(&self) -> LoadSet {
        let mut nodal: Vec<NodalLoad> = Vec::new();
        for l in &self.nodal {
            match nodal.iter_mut().find(|n| n.node_id == l.node_id) {
                Some(n) => {
                    n.fx += l.fx;
                    n.fy += l.fy;
                    n.mz += l.mz;
                }
                None => nodal.push(*l),
            }
        }
        let mut member: Vec<MemberUdl> = Vec::new();
        for l in &self.member {
            match member.iter_mut().find(|m| m.element_id == l.element_id) {
                Some(m) => m.w += l.w,
                None => member.push(*l),
            }
        }
        nodal.sort_by_key(|l| l.node_id);
        member.sort_by_key(|l| l.element_id);
        LoadSet { nodal, member }
    }

    pub fn scaled(&self, factor: f64) -> LoadSet {
        LoadSet {
            nodal: self
                .nodal
                .iter()
                .map(|l| NodalLoad {
                    fx: l.fx * factor,
                    fy: l.fy * factor,
                    mz: l.mz * factor,
                    ..*l
                })
                .collect(),
            member: self
                .member
                .iter()
                .map(|l| MemberUdl { w: l.w * factor, ..*l })
                .collect(),
        }
    }

    /// Resultant (Fx, Fy) of all loads in global axes.
    pub fn resultant(&self, model: &TopologyModel) -> (f64, f64) {
        let mut fx: f64 = self.nodal.iter().map(|l| l.fx).sum();
        let mut fy: f64 = self.nodal.iter().map(|l| l.fy).sum();
        for l in &self.member {
            let Some(((x1, y1), (x2, y2))) = model.element(l.element_id).and_then(|e| model.segment(e)) else {
                continue;
            };
            // w·L along the local y axis (-dy, dx)/L
            fx += -l.w * (y2 - y1);
            fy += l.w * (x2 - x1);
        }
        (fx, fy)
    }
}

/// Lateral point loads at the left end of every floor of bay 1, the girder
/// load on every girder and any extra nodal loads located by coordinate.
/// Zero-magnitude loads are omitted.
pub fn derive_loads(problem: &FrameProblem, model: &TopologyModel) -> Result<LoadSet, LoadError> {
    let spec = &problem.loads;
    let mut set = LoadSet::default();

    let (px, py) = spec.lateral_point.vector();
    if px != 0.0 || py != 0.0 {
        if let Some(bay) = problem.bays.first() {
            let x = problem.line_x(0);
            for story in 1..=bay.stories() {
                let y = bay.floor_level(story);
                let node = model.node_at(x, y).ok_or(LoadError::UnresolvedLocator { x, y })?;
                set.nodal.push(NodalLoad {
                    node_id: node.id,
                    fx: px,
                    fy: py,
                    mz: 0.0,
                });
            }
        }
    }

    let (qx, qy) = spec.girder_udl.vector();
    if qx != 0.0 || qy != 0.0 {
        let mut girders: Vec<_> = model
            .elements
            .iter()
            .filter(|e| e.kind == ElementKind::Girder)
            .collect();
        girders.sort_by_key(|e| e.id);
        for e in girders {
            let Some(((x1, y1), (x2, y2))) = model.segment(e) else {
                continue;
            };
            let len = (x2 - x1).hypot(y2 - y1);
            let w = (-qx * (y2 - y1) + qy * (x2 - x1)) / len;
            if w != 0.0 {
                set.member.push(MemberUdl { element_id: e.id, w });
            }
        }
    }

    for extra in &spec.extra_nodal {
        if extra.fx == 0.0 && extra.fy == 0.0 && extra.mz == 0.0 {
            continue;
        }
        let node = model
            .node_at(extra.x, extra.y)
            .ok_or(LoadError::UnresolvedLocator { x: extra.x, y: extra.y })?;
        set.nodal.push(NodalLoad {
            node_id: node.id,
            fx: extra.fx,
            fy: extra.fy,
            mz: extra.mz,
        });
    }

    Ok(set.normalized())
}
