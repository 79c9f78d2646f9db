//! Linear static analysis by the direct stiffness method.
//!
//! Elements are 2D Euler–Bernoulli beam-columns with three DOFs per node
//! (ux, uy, rz). Local x runs from node i to node j and local y is local x
//! turned 90° counterclockwise. End forces are the forces the nodes exert on
//! the element, in local axes, ordered (N_i, V_i, M_i, N_j, V_j, M_j).

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loads::LoadSet;
use crate::model::{Element, ElementId, ElementKind, Fixity, NodeId, TopologyModel};
use crate::problem::MaterialSpec;
use crate::COORD_TOLERANCE;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("element {0} has zero length")]
    DegenerateElement(ElementId),
    #[error("element {element} references unknown node {node}")]
    UnknownNode { element: ElementId, node: NodeId },
    #[error("load on unknown {0}")]
    UnknownLoadTarget(String),
    #[error("stiffness matrix is singular; the frame is a mechanism or under-supported")]
    SingularSystem,
}

/// Local stiffness of a prismatic frame element.
pub fn element_stiffness_local(e: f64, a: f64, i: f64, l: f64) -> Matrix6<f64> {
    let ea = e * a / l;
    let k1 = 12.0 * e * i / l.powi(3);
    let k2 = 6.0 * e * i / l.powi(2);
    let k3 = 4.0 * e * i / l;
    let k4 = 2.0 * e * i / l;
    #[rustfmt::skip]
    let k = Matrix6::new(
         ea, 0.0, 0.0, -ea, 0.0, 0.0,
        0.0,  k1,  k2, 0.0, -k1,  k2,
        0.0,  k2,  k3, 0.0, -k2,  k4,
        -ea, 0.0, 0.0,  ea, 0.0, 0.0,
        0.0, -k1, -k2, 0.0,  k1, -k2,
        0.0,  k2,  k4, 0.0, -k2,  k3,
    );
    k
}

/// Global-to-local rotation for an element whose axis has direction
/// cosines (c, s).
pub fn rotation(c: f64, s: f64) -> Matrix6<f64> {
    let mut t = Matrix6::zeros();
    for b in [0, 3] {
        t[(b, b)] = c;
        t[(b, b + 1)] = s;
        t[(b + 1, b)] = -s;
        t[(b + 1, b + 1)] = c;
        t[(b + 2, b + 2)] = 1.0;
    }
    t
}

/// `Tᵀ k T` for direction cosines (c, s).
pub fn transform_to_global(k_local: &Matrix6<f64>, c: f64, s: f64) -> Matrix6<f64> {
    let t = rotation(c, s);
    t.transpose() * k_local * t
}

/// Equivalent nodal loads of a uniform local-y load `w` on length `l`.
pub fn fixed_end_forces(w: f64, l: f64) -> Vector6<f64> {
    let v = w * l / 2.0;
    let m = w * l * l / 12.0;
    Vector6::new(0.0, v, m, 0.0, v, -m)
}

/// Equation numbers of every node's DOFs; `None` marks a constrained DOF.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    order: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    equations: Vec<[Option<usize>; 3]>,
    free: usize,
}

impl DofMap {
    pub fn new(model: &TopologyModel) -> DofMap {
        let mut order: Vec<NodeId> = model.nodes.iter().map(|n| n.id).collect();
        order.sort_unstable();
        let mut fixity: HashMap<NodeId, Fixity> = HashMap::new();
        for s in &model.supports {
            let f = fixity.entry(s.node_id).or_default();
            *f = f.merge(s.fixity);
        }
        let mut free = 0;
        let mut equations = Vec::with_capacity(order.len());
        for id in &order {
            let fix = fixity.get(id).copied().unwrap_or_default().as_array();
            let mut eq = [None; 3];
            for d in 0..3 {
                if !fix[d] {
                    eq[d] = Some(free);
                    free += 1;
                }
            }
            equations.push(eq);
        }
        let index = order.iter().enumerate().map(|(k, &id)| (id, k)).collect();
        DofMap {
            order,
            index,
            equations,
            free,
        }
    }

    pub fn free_count(&self) -> usize {
        self.free
    }

    pub fn node_count(&self) -> usize {
        self.order.len()
    }

    pub fn equations(&self, node: NodeId) -> Option<[Option<usize>; 3]> {
        self.index.get(&node).map(|&k| self.equations[k])
    }

    /// Position of `node` in id order; global DOF `3·k + d`.
    pub fn position(&self, node: NodeId) -> Option<usize> {
        self.index.get(&node).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeDisplacement {
    pub node_id: NodeId,
    pub ux: f64,
    pub uy: f64,
    pub rz: f64,
}

/// Support reaction; components on unconstrained DOFs are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reaction {
    pub node_id: NodeId,
    pub fixity: Fixity,
    pub rx: f64,
    pub ry: f64,
    pub mz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemberEndForces {
    pub element_id: ElementId,
    pub n_i: f64,
    pub v_i: f64,
    pub m_i: f64,
    pub n_j: f64,
    pub v_j: f64,
    pub m_j: f64,
}

impl MemberEndForces {
    fn from_vector(element_id: ElementId, q: &Vector6<f64>) -> Self {
        MemberEndForces {
            element_id,
            n_i: q[0],
            v_i: q[1],
            m_i: q[2],
            n_j: q[3],
            v_j: q[4],
            m_j: q[5],
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.n_i, self.v_i, self.m_i, self.n_j, self.v_j, self.m_j]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub displacements: Vec<NodeDisplacement>,
    pub reactions: Vec<Reaction>,
    pub member_end_forces: Vec<MemberEndForces>,
}

impl AnalysisResult {
    pub fn displacement(&self, node: NodeId) -> Option<&NodeDisplacement> {
        self.displacements.iter().find(|d| d.node_id == node)
    }

    pub fn reaction(&self, node: NodeId) -> Option<&Reaction> {
        self.reactions.iter().find(|r| r.node_id == node)
    }

    pub fn end_forces(&self, element: ElementId) -> Option<&MemberEndForces> {
        self.member_end_forces.iter().find(|f| f.element_id == element)
    }
}

struct ElementData {
    id: ElementId,
    dofs: [usize; 6],
    length: f64,
    t: Matrix6<f64>,
    k_local: Matrix6<f64>,
}

fn section(material: &MaterialSpec, kind: ElementKind) -> (f64, f64) {
    match kind {
        ElementKind::Column => (material.a_col, material.i_col),
        ElementKind::Girder => (material.a_gir, material.i_gir),
    }
}

fn element_data(
    model: &TopologyModel,
    dofs: &DofMap,
    material: &MaterialSpec,
    e: &Element,
) -> Result<ElementData, SolverError> {
    let locate = |n: NodeId| {
        let pos = dofs
            .position(n)
            .ok_or(SolverError::UnknownNode { element: e.id, node: n })?;
        let node = model.node(n).expect("DofMap covers model nodes");
        Ok((pos, node.x, node.y))
    };
    let (pi, xi, yi) = locate(e.node_i)?;
    let (pj, xj, yj) = locate(e.node_j)?;
    let (dx, dy) = (xj - xi, yj - yi);
    let length = dx.hypot(dy);
    if length <= COORD_TOLERANCE {
        return Err(SolverError::DegenerateElement(e.id));
    }
    let (a, i) = section(material, e.kind);
    Ok(ElementData {
        id: e.id,
        dofs: [3 * pi, 3 * pi + 1, 3 * pi + 2, 3 * pj, 3 * pj + 1, 3 * pj + 2],
        length,
        t: rotation(dx / length, dy / length),
        k_local: element_stiffness_local(material.e, a, i, length),
    })
}

/// Global stiffness (all DOFs, id-ordered nodes) and load vector including
/// the equivalent nodal loads of member loads.
/// Global stiffness, load vector, per-element data and member loads.
type Assembly = (DMatrix<f64>, DVector<f64>, Vec<ElementData>, HashMap<ElementId, f64>);

fn assemble(
    model: &TopologyModel,
    loads: &LoadSet,
    material: &MaterialSpec,
    dofs: &DofMap,
) -> Result<Assembly, SolverError> {
    let n = 3 * dofs.node_count();
    let mut k = DMatrix::zeros(n, n);
    let mut f = DVector::zeros(n);

    let mut udl: HashMap<ElementId, f64> = HashMap::new();
    for l in &loads.member {
        *udl.entry(l.element_id).or_insert(0.0) += l.w;
    }

    let mut elements = Vec::with_capacity(model.elements.len());
    for e in &model.elements {
        let data = element_data(model, dofs, material, e)?;
        let kg = data.t.transpose() * data.k_local * data.t;
        for a in 0..6 {
            for b in 0..6 {
                k[(data.dofs[a], data.dofs[b])] += kg[(a, b)];
            }
        }
        if let Some(&w) = udl.get(&e.id) {
            let fg = data.t.transpose() * fixed_end_forces(w, data.length);
            for a in 0..6 {
                f[data.dofs[a]] += fg[a];
            }
        }
        elements.push(data);
    }
    for id in udl.keys() {
        if model.element(*id).is_none() {
            return Err(SolverError::UnknownLoadTarget(format!("element {id}")));
        }
    }
    for l in &loads.nodal {
        let p = dofs
            .position(l.node_id)
            .ok_or_else(|| SolverError::UnknownLoadTarget(format!("node {}", l.node_id)))?;
        f[3 * p] += l.fx;
        f[3 * p + 1] += l.fy;
        f[3 * p + 2] += l.mz;
    }
    Ok((k, f, elements, udl))
}

/// Assembled global stiffness over all DOFs, nodes in id order.
pub fn global_stiffness(model: &TopologyModel, material: &MaterialSpec) -> Result<DMatrix<f64>, SolverError> {
    let dofs = DofMap::new(model);
    Ok(assemble(model, &LoadSet::default(), material, &dofs)?.0)
}

pub fn solve_static(
    model: &TopologyModel,
    loads: &LoadSet,
    material: &MaterialSpec,
) -> Result<AnalysisResult, SolverError> {
    let dofs = DofMap::new(model);
    let (k, f, elements, udl) = assemble(model, loads, material, &dofs)?;
    let n = k.nrows();

    // global DOF -> free equation
    let mut free_of = vec![None; n];
    for (id, p) in dofs.order.iter().zip(0..) {
        let eq = dofs.equations(*id).expect("ordered ids are mapped");
        for d in 0..3 {
            free_of[3 * p + d] = eq[d];
        }
    }
    let nf = dofs.free_count();
    let mut kff = DMatrix::zeros(nf, nf);
    let mut ff = DVector::zeros(nf);
    for r in 0..n {
        let Some(fr) = free_of[r] else { continue };
        ff[fr] = f[r];
        for c in 0..n {
            if let Some(fc) = free_of[c] {
                kff[(fr, fc)] = k[(r, c)];
            }
        }
    }

    let uf = if nf == 0 {
        DVector::zeros(0)
    } else {
        let scale = (0..nf).map(|d| kff[(d, d)]).fold(0.0_f64, f64::max);
        let chol = kff.clone().cholesky().ok_or(SolverError::SingularSystem)?;
        let min_pivot = (0..nf)
            .map(|d| chol.l_dirty()[(d, d)].powi(2))
            .fold(f64::INFINITY, f64::min);
        if min_pivot.is_nan() || min_pivot <= scale * 1e-12 {
            return Err(SolverError::SingularSystem);
        }
        chol.solve(&ff)
    };

    let mut u = DVector::zeros(n);
    for r in 0..n {
        if let Some(fr) = free_of[r] {
            u[r] = uf[fr];
        }
    }
    let residual = &k * &u - &f;

    let displacements = dofs
        .order
        .iter()
        .enumerate()
        .map(|(p, &id)| NodeDisplacement {
            node_id: id,
            ux: u[3 * p],
            uy: u[3 * p + 1],
            rz: u[3 * p + 2],
        })
        .collect();

    let mut supported: Vec<NodeId> = model.supports.iter().map(|s| s.node_id).collect();
    supported.sort_unstable();
    supported.dedup();
    let mut reactions = Vec::with_capacity(supported.len());
    for id in supported {
        let Some(p) = dofs.position(id) else { continue };
        let eq = dofs.equations(id).expect("positioned ids are mapped");
        let comp = |d: usize| if eq[d].is_none() { residual[3 * p + d] } else { 0.0 };
        reactions.push(Reaction {
            node_id: id,
            fixity: Fixity {
                ux: eq[0].is_none(),
                uy: eq[1].is_none(),
                rz: eq[2].is_none(),
            },
            rx: comp(0),
            ry: comp(1),
            mz: comp(2),
        });
    }

    let mut member_end_forces: Vec<MemberEndForces> = elements
        .iter()
        .map(|data| {
            let ug = Vector6::from_fn(|a, _| u[data.dofs[a]]);
            let ul = data.t * ug;
            let mut q = data.k_local * ul;
            if let Some(&w) = udl.get(&data.id) {
                q -= fixed_end_forces(w, data.length);
            }
            MemberEndForces::from_vector(data.id, &q)
        })
        .collect();
    member_end_forces.sort_by_key(|f| f.element_id);

    Ok(AnalysisResult {
        displacements,
        reactions,
        member_end_forces,
    })
}

/// Axial force, shear and moment along one element in local coordinates.
///
/// `N` is tension-positive. With `w` the local-y load,
/// `V(x) = V_i + w·x` and `M(x) = −M_i + V_i·x + w·x²/2`, so that
/// `V(L) = −V_j`, `M(L) = M_j` and sagging moments under downward load on a
/// left-to-right girder are positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalForceDiagram {
    pub element_id: ElementId,
    pub length: f64,
    pub w: f64,
    pub axial: f64,
    /// `V(x) = shear[0] + shear[1]·x`
    pub shear: [f64; 2],
    /// `M(x) = moment[0] + moment[1]·x + moment[2]·x²`
    pub moment: [f64; 3],
    pub stations: Vec<f64>,
}

impl InternalForceDiagram {
    pub fn n_at(&self, _x: f64) -> f64 {
        self.axial
    }

    pub fn v_at(&self, x: f64) -> f64 {
        self.shear[0] + self.shear[1] * x
    }

    pub fn m_at(&self, x: f64) -> f64 {
        self.moment[0] + self.moment[1] * x + self.moment[2] * x * x
    }

    /// Largest |M| over the stations and a possible interior apex.
    pub fn max_abs_moment(&self) -> f64 {
        let mut best = self.stations.iter().map(|&x| self.m_at(x).abs()).fold(0.0, f64::max);
        if self.moment[2] != 0.0 {
            let apex = -self.moment[1] / (2.0 * self.moment[2]);
            if apex > 0.0 && apex < self.length {
                best = best.max(self.m_at(apex).abs());
            }
        }
        best
    }
}

/// Number of sample stations per element, ends included.
pub const DIAGRAM_STATIONS: usize = 11;

pub fn internal_forces(result: &AnalysisResult, model: &TopologyModel, loads: &LoadSet) -> Vec<InternalForceDiagram> {
    let mut udl: HashMap<ElementId, f64> = HashMap::new();
    for l in &loads.member {
        *udl.entry(l.element_id).or_insert(0.0) += l.w;
    }
    let mut out = Vec::with_capacity(result.member_end_forces.len());
    for q in &result.member_end_forces {
        let Some(((x1, y1), (x2, y2))) = model.element(q.element_id).and_then(|e| model.segment(e)) else {
            continue;
        };
        let length = (x2 - x1).hypot(y2 - y1);
        let w = udl.get(&q.element_id).copied().unwrap_or(0.0);
        let stations = (0..DIAGRAM_STATIONS)
            .map(|k| length * k as f64 / (DIAGRAM_STATIONS - 1) as f64)
            .collect();
        out.push(InternalForceDiagram {
            element_id: q.element_id,
            length,
            w,
            axial: -q.n_i,
            shear: [q.v_i, w],
            moment: [-q.m_i, q.v_i, w / 2.0],
            stations,
        });
    }
    out
}

/// Net force and moment about the origin of reactions plus applied loads,
/// together with the sum of absolute applied magnitudes for scaling.
pub fn equilibrium_residual(model: &TopologyModel, loads: &LoadSet, result: &AnalysisResult) -> ([f64; 3], f64) {
    let mut sum = [0.0; 3];
    let mut scale = 0.0;
    let mut add = |x: f64, y: f64, fx: f64, fy: f64, mz: f64, applied: bool| {
        sum[0] += fx;
        sum[1] += fy;
        sum[2] += x * fy - y * fx + mz;
        if applied {
            scale += fx.abs() + fy.abs() + mz.abs() + (x * fy).abs() + (y * fx).abs();
        }
    };
    for r in &result.reactions {
        if let Some(n) = model.node(r.node_id) {
            add(n.x, n.y, r.rx, r.ry, r.mz, false);
        }
    }
    for l in &loads.nodal {
        if let Some(n) = model.node(l.node_id) {
            add(n.x, n.y, l.fx, l.fy, l.mz, true);
        }
    }
    for l in &loads.member {
        let Some(((x1, y1), (x2, y2))) = model.element(l.element_id).and_then(|e| model.segment(e)) else {
            continue;
        };
        let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
        add(mx, my, -l.w * (y2 - y1), l.w * (x2 - x1), 0.0, true);
    }
    (sum, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loads::{MemberUdl, NodalLoad};
    use crate::model::{Node, SupportConstraint};

    fn unit_material() -> MaterialSpec {
        MaterialSpec {
            e: 1.0,
            a_col: 1.0,
            a_gir: 1.0,
            i_col: 1.0,
            i_gir: 1.0,
        }
    }

    #[test]
    fn unit_stiffness_entries() {
        let k = element_stiffness_local(1.0, 1.0, 1.0, 1.0);
        assert_eq!(k[(0, 0)], 1.0);
        assert_eq!(k[(1, 1)], 12.0);
        assert_eq!(k[(2, 2)], 4.0);
        assert_eq!(k[(1, 2)], 6.0);
        assert_eq!(k[(2, 5)], 2.0);
        assert_eq!(k, k.transpose());
        for mode in [
            Vector6::new(1.0, 0.0, 0.0, 1.0, 0.0, 0.0),
            Vector6::new(0.0, 1.0, 0.0, 0.0, 1.0, 0.0),
        ] {
            assert!((k * mode).norm() < 1e-12);
        }
        let k2 = element_stiffness_local(1.0, 1.0, 1.0, 2.0);
        assert_eq!(k2[(1, 1)], 12.0 / 8.0);
    }

    #[test]
    fn stiffness_matches_beam_equation_by_unit_displacements() {
        // end forces of a clamped-clamped beam under one unit end
        // displacement, from the cubic Hermite solution of EI·v'''' = 0
        let (e, i, l) = (3.0, 2.0, 1.7);
        let k = element_stiffness_local(e, 1.0, i, l);
        let ei = e * i;
        // unit v_i: v = 1 - 3ξ² + 2ξ³; shear = -EI v''' ; moment = EI v''
        let v3 = 12.0 / l.powi(3);
        let v2_0 = -6.0 / l.powi(2);
        assert!((k[(1, 1)] - ei * v3).abs() < 1e-12);
        assert!((k[(2, 1)] - (-ei * v2_0)).abs() < 1e-12);
        // unit θ_i: v = l(ξ - 2ξ² + ξ³)
        let t2_0 = -4.0 / l;
        let t2_l = 2.0 / l;
        assert!((k[(2, 2)] - (-ei * t2_0)).abs() < 1e-12);
        assert!((k[(5, 2)] - ei * t2_l).abs() < 1e-12);
    }

    #[test]
    fn transforms() {
        let k = element_stiffness_local(2.0, 3.0, 5.0, 4.0);
        assert_eq!(transform_to_global(&k, 1.0, 0.0), k);
        let kv = transform_to_global(&k, 0.0, 1.0);
        assert!((kv[(0, 0)] - k[(1, 1)]).abs() < 1e-12);
        assert!((kv[(1, 1)] - k[(0, 0)]).abs() < 1e-12);
        assert!((kv - kv.transpose()).norm() < 1e-12);
    }

    #[test]
    fn fixed_end_vector() {
        let f = fixed_end_forces(10_000.0, 6.0);
        assert_eq!(f[1], 30_000.0);
        assert_eq!(f[4], 30_000.0);
        assert_eq!(f[2], 30_000.0);
        assert_eq!(f[5], -30_000.0);
        assert_eq!(f[1] + f[4], 60_000.0);
        assert_eq!(fixed_end_forces(0.0, 6.0), Vector6::zeros());
    }

    fn cantilever(l: f64) -> TopologyModel {
        TopologyModel {
            nodes: vec![Node::new(1, 0.0, 0.0, ""), Node::new(2, 0.0, l, "")],
            elements: vec![Element::new(1, 1, 2, ElementKind::Column, "")],
            supports: vec![SupportConstraint {
                node_id: NodeId(1),
                fixity: Fixity::FIXED,
            }],
            steps: vec![],
        }
    }

    #[test]
    fn cantilever_tip_load() {
        let (p, l) = (1000.0, 3.0);
        let mat = MaterialSpec::default();
        let loads = LoadSet {
            nodal: vec![NodalLoad {
                node_id: NodeId(2),
                fx: p,
                fy: 0.0,
                mz: 0.0,
            }],
            member: vec![],
        };
        let m = cantilever(l);
        let r = solve_static(&m, &loads, &mat).unwrap();
        let tip = r.displacement(NodeId(2)).unwrap();
        let expected = p * l.powi(3) / (3.0 * mat.e * mat.i_col);
        assert!((tip.ux - expected).abs() <= 1e-9 * expected);
        let base = r.reaction(NodeId(1)).unwrap();
        assert!((base.rx + p).abs() < 1e-6);
        assert!((base.mz.abs() - p * l).abs() < 1e-6 * p * l);
    }

    #[test]
    fn zero_loads_zero_response() {
        let r = solve_static(&cantilever(3.0), &LoadSet::default(), &unit_material()).unwrap();
        assert!(r
            .displacements
            .iter()
            .all(|d| d.ux == 0.0 && d.uy == 0.0 && d.rz == 0.0));
        assert!(r.reactions.iter().all(|x| x.rx == 0.0 && x.ry == 0.0 && x.mz == 0.0));
    }

    #[test]
    fn pinned_beam_midspan_moment() {
        let m = TopologyModel {
            nodes: vec![Node::new(1, 0.0, 0.0, ""), Node::new(2, 6.0, 0.0, "")],
            elements: vec![Element::new(1, 1, 2, ElementKind::Girder, "")],
            supports: vec![
                SupportConstraint {
                    node_id: NodeId(1),
                    fixity: Fixity::PINNED,
                },
                SupportConstraint {
                    node_id: NodeId(2),
                    fixity: Fixity {
                        ux: false,
                        uy: true,
                        rz: false,
                    },
                },
            ],
            steps: vec![],
        };
        let loads = LoadSet {
            nodal: vec![],
            member: vec![MemberUdl {
                element_id: ElementId(1),
                w: -10_000.0,
            }],
        };
        let r = solve_static(&m, &loads, &MaterialSpec::default()).unwrap();
        let d = &internal_forces(&r, &m, &loads)[0];
        assert!((d.m_at(3.0) - 45_000.0).abs() < 1e-6);
        assert!(d.m_at(0.0).abs() < 1e-6 && d.m_at(6.0).abs() < 1e-6);
        assert!(d.v_at(3.0).abs() < 1e-6);
        let q = r.end_forces(ElementId(1)).unwrap();
        assert!((d.v_at(6.0) + q.v_j).abs() < 1e-6);
    }

    #[test]
    fn mechanism_is_singular() {
        let mut m = cantilever(3.0);
        m.supports.clear();
        assert_eq!(
            solve_static(&m, &LoadSet::default(), &unit_material()),
            Err(SolverError::SingularSystem)
        );
        m.supports.push(SupportConstraint {
            node_id: NodeId(1),
            fixity: Fixity::PINNED,
        });
        assert_eq!(
            solve_static(&m, &LoadSet::default(), &unit_material()),
            Err(SolverError::SingularSystem)
        );
    }

    #[test]
    fn degenerate_element() {
        let mut m = cantilever(3.0);
        m.nodes[1].y = 0.0;
        assert_eq!(
            solve_static(&m, &LoadSet::default(), &unit_material()),
            Err(SolverError::DegenerateElement(ElementId(1)))
        );
    }
}
