//! Consistency passes over a topology model.
//!
//! Four passes run in a fixed order: node deduplication, element
//! deduplication, node renumbering and element renumbering. Element endpoints
//! keep their original node ids until the last pass, which first rewrites
//! them through the composed node map (logging a reconnection for each end
//! that pointed at a deleted duplicate) and then compacts element ids.
//!
//! Every change is logged as a [`CorrectiveAction`]; [`replay_actions`]
//! re-derives the repaired model from the input and the log alone.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::loads::{LoadSet, MemberUdl, NodalLoad};
use crate::model::{Element, ElementId, Node, NodeId, SupportConstraint, TopologyModel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("element {element} references node {node}, which does not exist")]
    DanglingReference { element: ElementId, node: NodeId },
    #[error("support references node {0}, which does not exist")]
    DanglingSupport(NodeId),
    #[error("node id {0} is defined more than once")]
    DuplicateNodeId(NodeId),
    #[error("element id {0} is defined more than once")]
    DuplicateElementId(ElementId),
    #[error("element {0} connects a node to itself")]
    DegenerateElement(ElementId),
}

/// One atomic repair. The human-readable message is derived from the fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum CorrectiveAction {
    RemoveDuplicateNode {
        removed: NodeId,
        kept: NodeId,
    },
    RemoveDuplicateElement {
        removed: ElementId,
        kept: ElementId,
    },
    RenumberNode {
        from: NodeId,
        to: NodeId,
    },
    RenumberElement {
        from: ElementId,
        to: ElementId,
    },
    /// Node ids are those of the input model.
    ReconnectElement {
        element: ElementId,
        from_node: NodeId,
        to_node: NodeId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ActionKind {
    RemoveDuplicateNode,
    RemoveDuplicateElement,
    RenumberNode,
    RenumberElement,
    ReconnectElement,
}

impl CorrectiveAction {
    pub fn kind(&self) -> ActionKind {
        match self {
            CorrectiveAction::RemoveDuplicateNode { .. } => ActionKind::RemoveDuplicateNode,
            CorrectiveAction::RemoveDuplicateElement { .. } => ActionKind::RemoveDuplicateElement,
            CorrectiveAction::RenumberNode { .. } => ActionKind::RenumberNode,
            CorrectiveAction::RenumberElement { .. } => ActionKind::RenumberElement,
            CorrectiveAction::ReconnectElement { .. } => ActionKind::ReconnectElement,
        }
    }

    pub fn subject_id(&self) -> u32 {
        match *self {
            CorrectiveAction::RemoveDuplicateNode { removed, .. } => removed.0,
            CorrectiveAction::RemoveDuplicateElement { removed, .. } => removed.0,
            CorrectiveAction::RenumberNode { from, .. } => from.0,
            CorrectiveAction::RenumberElement { from, .. } => from.0,
            CorrectiveAction::ReconnectElement { element, .. } => element.0,
        }
    }

    pub fn replacement_id(&self) -> Option<u32> {
        match *self {
            CorrectiveAction::RemoveDuplicateNode { kept, .. } => Some(kept.0),
            CorrectiveAction::RemoveDuplicateElement { kept, .. } => Some(kept.0),
            CorrectiveAction::RenumberNode { to, .. } => Some(to.0),
            CorrectiveAction::RenumberElement { to, .. } => Some(to.0),
            CorrectiveAction::ReconnectElement { to_node, .. } => Some(to_node.0),
        }
    }

    pub fn message(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CorrectiveAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CorrectiveAction::RemoveDuplicateNode { removed, kept } => {
                write!(f, "Remove duplicate node {removed}, keep node {kept}.")
            }
            CorrectiveAction::RemoveDuplicateElement { removed, kept } => {
                write!(f, "Remove duplicate element {removed}, keep element {kept}.")
            }
            CorrectiveAction::RenumberNode { from, to } => write!(f, "Renumber node {from} to {to}."),
            CorrectiveAction::RenumberElement { from, to } => {
                write!(f, "Renumber element {from} to {to}.")
            }
            CorrectiveAction::ReconnectElement {
                element,
                from_node,
                to_node,
            } => write!(
                f,
                "Reconnect element {element} from deleted node {from_node} to retained node {to_node}."
            ),
        }
    }
}

/// One message per line.
pub fn action_log_text(actions: &[CorrectiveAction]) -> String {
    actions.iter().map(|a| format!("{a}\n")).collect()
}

/// Structured form of the log, one JSON record per action.
pub fn action_log_json(actions: &[CorrectiveAction]) -> String {
    #[derive(Serialize)]
    struct Record<'a> {
        #[serde(flatten)]
        action: &'a CorrectiveAction,
        message: String,
    }
    let records: Vec<Record<'_>> = actions
        .iter()
        .map(|a| Record {
            action: a,
            message: a.message(),
        })
        .collect();
    crate::format::to_canonical_json(&records)
}

/// Ordered mapping from old to new ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap<T: Ord + Copy> {
    map: BTreeMap<T, T>,
}

impl<T: Ord + Copy> Default for IdMap<T> {
    fn default() -> Self {
        IdMap { map: BTreeMap::new() }
    }
}

impl<T: Ord + Copy> IdMap<T> {
    pub fn insert(&mut self, from: T, to: T) {
        self.map.insert(from, to);
    }

    pub fn get(&self, id: T) -> Option<T> {
        self.map.get(&id).copied()
    }

    /// `self` followed by `next`; ids that `next` does not cover pass through.
    pub fn then(&self, next: &IdMap<T>) -> IdMap<T> {
        IdMap {
            map: self.map.iter().map(|(&k, &v)| (k, next.get(v).unwrap_or(v))).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn check_unique_node_ids(nodes: &[Node]) -> Result<(), ValidationError> {
    let mut ids: Vec<NodeId> = nodes.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    match ids.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(ValidationError::DuplicateNodeId(w[0])),
        None => Ok(()),
    }
}

fn check_unique_element_ids(elements: &[Element]) -> Result<(), ValidationError> {
    let mut ids: Vec<ElementId> = elements.iter().map(|e| e.id).collect();
    ids.sort_unstable();
    match ids.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(ValidationError::DuplicateElementId(w[0])),
        None => Ok(()),
    }
}

/// Relabels support entries through `map`, OR-merging entries that land on
/// the same node into the first one.
fn remap_supports(
    supports: &[SupportConstraint],
    map: impl Fn(NodeId) -> Option<NodeId>,
) -> Result<Vec<SupportConstraint>, ValidationError> {
    let mut out: Vec<SupportConstraint> = Vec::with_capacity(supports.len());
    for s in supports {
        let target = map(s.node_id).ok_or(ValidationError::DanglingSupport(s.node_id))?;
        match out.iter_mut().find(|o| o.node_id == target) {
            Some(existing) => existing.fixity = existing.fixity.merge(s.fixity),
            None => out.push(SupportConstraint {
                node_id: target,
                fixity: s.fixity,
            }),
        }
    }
    Ok(out)
}

/// Removes nodes that coincide with a node of smaller id. The returned map
/// covers every input node: survivors map to themselves, duplicates to the
/// survivor. Supports on removed nodes move to the survivor. Element
/// endpoints are left untouched.
pub fn dedup_nodes(
    model: &TopologyModel,
) -> Result<(TopologyModel, Vec<CorrectiveAction>, IdMap<NodeId>), ValidationError> {
    check_unique_node_ids(&model.nodes)?;
    let mut order: Vec<&Node> = model.nodes.iter().collect();
    order.sort_by_key(|n| n.id);

    let mut survivors: Vec<&Node> = Vec::new();
    let mut map = IdMap::default();
    let mut actions = Vec::new();
    for node in order {
        match survivors.iter().find(|s| s.coincides(node)) {
            Some(kept) => {
                map.insert(node.id, kept.id);
                actions.push(CorrectiveAction::RemoveDuplicateNode {
                    removed: node.id,
                    kept: kept.id,
                });
            }
            None => {
                map.insert(node.id, node.id);
                survivors.push(node);
            }
        }
    }

    let nodes = model
        .nodes
        .iter()
        .filter(|n| map.get(n.id) == Some(n.id))
        .cloned()
        .collect();
    let supports = remap_supports(&model.supports, |id| map.get(id))?;
    Ok((
        TopologyModel {
            nodes,
            elements: model.elements.clone(),
            supports,
            steps: model.steps.clone(),
        },
        actions,
        map,
    ))
}

/// Removes elements whose unordered endpoint pair, read through `node_map`,
/// repeats that of an element with smaller id.
pub fn dedup_elements(
    model: &TopologyModel,
    node_map: &IdMap<NodeId>,
) -> Result<(TopologyModel, Vec<CorrectiveAction>, IdMap<ElementId>), ValidationError> {
    check_unique_element_ids(&model.elements)?;
    let mut order: Vec<&Element> = model.elements.iter().collect();
    order.sort_by_key(|e| e.id);

    let mut seen: HashMap<(NodeId, NodeId), ElementId> = HashMap::new();
    let mut map = IdMap::default();
    let mut actions = Vec::new();
    for e in order {
        let resolve = |n: NodeId| {
            node_map
                .get(n)
                .ok_or(ValidationError::DanglingReference { element: e.id, node: n })
        };
        let (a, b) = (resolve(e.node_i)?, resolve(e.node_j)?);
        if a == b {
            return Err(ValidationError::DegenerateElement(e.id));
        }
        let key = if a < b { (a, b) } else { (b, a) };
        match seen.get(&key) {
            Some(&kept) => {
                map.insert(e.id, kept);
                actions.push(CorrectiveAction::RemoveDuplicateElement { removed: e.id, kept });
            }
            None => {
                seen.insert(key, e.id);
                map.insert(e.id, e.id);
            }
        }
    }

    let elements = model
        .elements
        .iter()
        .filter(|e| map.get(e.id) == Some(e.id))
        .cloned()
        .collect();
    Ok((
        TopologyModel {
            elements,
            ..model.clone()
        },
        actions,
        map,
    ))
}

/// Compacts node ids to 1..N in ascending order of the current ids and sorts
/// the node table. Supports follow; element endpoints do not.
pub fn renumber_nodes(
    model: &TopologyModel,
) -> Result<(TopologyModel, Vec<CorrectiveAction>, IdMap<NodeId>), ValidationError> {
    check_unique_node_ids(&model.nodes)?;
    let mut nodes = model.nodes.clone();
    nodes.sort_by_key(|n| n.id);
    let mut map = IdMap::default();
    let mut actions = Vec::new();
    for (rank, node) in nodes.iter_mut().enumerate() {
        let to = NodeId(rank as u32 + 1);
        map.insert(node.id, to);
        if node.id != to {
            actions.push(CorrectiveAction::RenumberNode { from: node.id, to });
            node.id = to;
        }
    }
    let supports = remap_supports(&model.supports, |id| map.get(id))?;
    Ok((
        TopologyModel {
            nodes,
            elements: model.elements.clone(),
            supports,
            steps: model.steps.clone(),
        },
        actions,
        map,
    ))
}

/// Smallest original id mapping to the same target as `id`, when that is
/// not `id` itself (i.e. `id` was a deleted duplicate).
fn retained_for(node_map: &IdMap<NodeId>, id: NodeId) -> Option<NodeId> {
    let target = node_map.get(id)?;
    node_map
        .iter()
        .find(|&(_, to)| to == target)
        .map(|(from, _)| from)
        .filter(|&first| first != id)
}

/// Rewrites element endpoints through `node_map` (original node ids to final
/// ids, covering both node passes), then compacts element ids to 1..M.
pub fn renumber_elements(
    model: &TopologyModel,
    node_map: &IdMap<NodeId>,
) -> Result<(TopologyModel, Vec<CorrectiveAction>, IdMap<ElementId>), ValidationError> {
    check_unique_element_ids(&model.elements)?;
    let mut elements = model.elements.clone();
    elements.sort_by_key(|e| e.id);
    let mut actions = Vec::new();

    for e in elements.iter_mut() {
        let id = e.id;
        for end in [&mut e.node_i, &mut e.node_j] {
            let to = node_map.get(*end).ok_or(ValidationError::DanglingReference {
                element: id,
                node: *end,
            })?;
            if let Some(kept) = retained_for(node_map, *end) {
                actions.push(CorrectiveAction::ReconnectElement {
                    element: id,
                    from_node: *end,
                    to_node: kept,
                });
            }
            *end = to;
        }
        if e.node_i == e.node_j {
            return Err(ValidationError::DegenerateElement(id));
        }
    }

    let mut map = IdMap::default();
    for (rank, e) in elements.iter_mut().enumerate() {
        let to = ElementId(rank as u32 + 1);
        map.insert(e.id, to);
        if e.id != to {
            actions.push(CorrectiveAction::RenumberElement { from: e.id, to });
            e.id = to;
        }
    }
    Ok((
        TopologyModel {
            elements,
            ..model.clone()
        },
        actions,
        map,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub model: TopologyModel,
    pub actions: Vec<CorrectiveAction>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Runs the four passes. Construction provenance survives only when no
/// action was needed, since repaired ids no longer match the steps.
pub fn validate_model(model: &TopologyModel) -> Result<ValidationReport, ValidationError> {
    let (m1, mut actions, dedup_map) = dedup_nodes(model)?;
    let (m2, a2, _) = dedup_elements(&m1, &dedup_map)?;
    actions.extend(a2);
    let (m3, a3, renumber_map) = renumber_nodes(&m2)?;
    actions.extend(a3);
    let node_map = dedup_map.then(&renumber_map);
    let (mut m4, a4, _) = renumber_elements(&m3, &node_map)?;
    actions.extend(a4);
    if !actions.is_empty() {
        m4.steps.clear();
    }
    Ok(ValidationReport { model: m4, actions })
}

/// Applies a corrective-action log to `input` without running the detection
/// passes. For a log produced by [`validate_model`] the result equals the
/// repaired model.
pub fn replay_actions(input: &TopologyModel, actions: &[CorrectiveAction]) -> Result<TopologyModel, ValidationError> {
    let mut nodes = input.nodes.clone();
    let mut elements = input.elements.clone();
    let mut supports = input.supports.clone();
    // original node id -> current node id, for renamed nodes
    let mut renamed: HashMap<NodeId, NodeId> = HashMap::new();
    let mut endpoints_final = false;

    let finalize = |elements: &mut Vec<Element>, renamed: &HashMap<NodeId, NodeId>| {
        for e in elements.iter_mut() {
            for end in [&mut e.node_i, &mut e.node_j] {
                if let Some(&to) = renamed.get(end) {
                    *end = to;
                }
            }
        }
    };

    for action in actions {
        match *action {
            CorrectiveAction::RemoveDuplicateNode { removed, kept } => {
                nodes.retain(|n| n.id != removed);
                supports = remap_supports(&supports, |id| Some(if id == removed { kept } else { id }))?;
            }
            CorrectiveAction::RemoveDuplicateElement { removed, .. } => {
                elements.retain(|e| e.id != removed);
            }
            CorrectiveAction::RenumberNode { from, to } => {
                for n in nodes.iter_mut().filter(|n| n.id == from) {
                    n.id = to;
                }
                for s in supports.iter_mut().filter(|s| s.node_id == from) {
                    s.node_id = to;
                }
                renamed.insert(from, to);
            }
            CorrectiveAction::ReconnectElement {
                element,
                from_node,
                to_node,
            } => {
                for e in elements.iter_mut().filter(|e| e.id == element) {
                    for end in [&mut e.node_i, &mut e.node_j] {
                        if *end == from_node {
                            *end = to_node;
                        }
                    }
                }
            }
            CorrectiveAction::RenumberElement { from, to } => {
                if !endpoints_final {
                    finalize(&mut elements, &renamed);
                    endpoints_final = true;
                }
                for e in elements.iter_mut().filter(|e| e.id == from) {
                    e.id = to;
                }
            }
        }
    }
    if !endpoints_final {
        finalize(&mut elements, &renamed);
    }
    nodes.sort_by_key(|n| n.id);
    elements.sort_by_key(|e| e.id);
    let steps = if actions.is_empty() {
        input.steps.clone()
    } else {
        Vec::new()
    };
    Ok(TopologyModel {
        nodes,
        elements,
        supports,
        steps,
    })
}

// ---------------------------------------------------------------------------
// Fault injection

/// How an inserted id claims a slot that is already taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Every existing id at or above the new one moves up by one.
    Shift,
    /// Only the occupant moves, to one past the current maximum.
    Relocate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Copy of `source` at the same coordinates under `new_id`.
    DuplicateNode {
        source: NodeId,
        new_id: NodeId,
        placement: Placement,
    },
    /// Copy of `source` under `new_id`, optionally with its ends swapped.
    DuplicateElement {
        source: ElementId,
        new_id: ElementId,
        placement: Placement,
        reversed: bool,
    },
    /// Rewire the end of `element` at node `from` to node `to`.
    Misconnect {
        element: ElementId,
        from: NodeId,
        to: NodeId,
    },
    /// Leave a numbering gap by moving node `from` to the unused id `to`.
    NodeGap { from: NodeId, to: NodeId },
    /// Same for an element.
    ElementGap { from: ElementId, to: ElementId },
}

/// Ground truth about what an injection did.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub model: TopologyModel,
    pub applied: Vec<Fault>,
    pub duplicate_nodes: usize,
    pub duplicate_elements: usize,
}

fn rename_node(model: &mut TopologyModel, from: NodeId, to: NodeId) {
    for n in model.nodes.iter_mut().filter(|n| n.id == from) {
        n.id = to;
    }
    for e in model.elements.iter_mut() {
        if e.node_i == from {
            e.node_i = to;
        }
        if e.node_j == from {
            e.node_j = to;
        }
    }
    for s in model.supports.iter_mut().filter(|s| s.node_id == from) {
        s.node_id = to;
    }
}

fn make_room_for_node(model: &mut TopologyModel, id: NodeId, placement: Placement) {
    if model.node(id).is_none() {
        return;
    }
    match placement {
        Placement::Relocate => {
            let to = NodeId(model.next_node_id());
            rename_node(model, id, to);
        }
        Placement::Shift => {
            let mut ids: Vec<NodeId> = model.nodes.iter().map(|n| n.id).filter(|&n| n >= id).collect();
            ids.sort_unstable_by(|a, b| b.cmp(a));
            for from in ids {
                rename_node(model, from, NodeId(from.0 + 1));
            }
        }
    }
}

fn make_room_for_element(model: &mut TopologyModel, id: ElementId, placement: Placement) {
    if model.element(id).is_none() {
        return;
    }
    match placement {
        Placement::Relocate => {
            let to = ElementId(model.next_element_id());
            for e in model.elements.iter_mut().filter(|e| e.id == id) {
                e.id = to;
            }
        }
        Placement::Shift => {
            for e in model.elements.iter_mut().filter(|e| e.id >= id) {
                e.id = ElementId(e.id.0 + 1);
            }
        }
    }
}

/// Applies `recipe` in order. The node and element tables stay sorted by id
/// and construction steps are dropped. Faults that do not apply (unknown
/// source, occupied gap target) are skipped and left out of `applied`.
pub fn inject_faults(model: &TopologyModel, recipe: &[Fault]) -> Injection {
    let mut m = model.clone();
    if !recipe.is_empty() {
        m.steps.clear();
    }
    let mut applied = Vec::new();
    let (mut dn, mut de) = (0, 0);
    for &fault in recipe {
        let ok = match fault {
            Fault::DuplicateNode {
                source,
                new_id,
                placement,
            } => match m.node(source).cloned() {
                Some(src) => {
                    make_room_for_node(&mut m, new_id, placement);
                    m.nodes.push(Node { id: new_id, ..src });
                    dn += 1;
                    true
                }
                None => false,
            },
            Fault::DuplicateElement {
                source,
                new_id,
                placement,
                reversed,
            } => match m.element(source).cloned() {
                Some(src) => {
                    make_room_for_element(&mut m, new_id, placement);
                    let (i, j) = if reversed {
                        (src.node_j, src.node_i)
                    } else {
                        (src.node_i, src.node_j)
                    };
                    m.elements.push(Element {
                        id: new_id,
                        node_i: i,
                        node_j: j,
                        ..src
                    });
                    de += 1;
                    true
                }
                None => false,
            },
            Fault::Misconnect { element, from, to } => {
                let target_exists = m.node(to).is_some();
                match m.elements.iter_mut().find(|e| e.id == element) {
                    Some(e) if target_exists && (e.node_i == from || e.node_j == from) => {
                        if e.node_i == from {
                            e.node_i = to;
                        } else {
                            e.node_j = to;
                        }
                        true
                    }
                    _ => false,
                }
            }
            Fault::NodeGap { from, to } => {
                if m.node(from).is_some() && m.node(to).is_none() {
                    rename_node(&mut m, from, to);
                    true
                } else {
                    false
                }
            }
            Fault::ElementGap { from, to } => {
                if m.element(from).is_some() && m.element(to).is_none() {
                    for e in m.elements.iter_mut().filter(|e| e.id == from) {
                        e.id = to;
                    }
                    true
                } else {
                    false
                }
            }
        };
        if ok {
            applied.push(fault);
        }
        m.nodes.sort_by_key(|n| n.id);
        m.elements.sort_by_key(|e| e.id);
    }
    Injection {
        model: m,
        applied,
        duplicate_nodes: dn,
        duplicate_elements: de,
    }
}

fn pick_placement<R: Rng + ?Sized>(rng: &mut R) -> Placement {
    if rng.random_bool(0.5) {
        Placement::Shift
    } else {
        Placement::Relocate
    }
}

/// Random geometry-preserving recipe of `count` faults for `model`.
/// Apply it with [`inject_faults`]; faults are planned against the model as
/// it evolves so each one applies.
pub fn random_recipe<R: Rng + ?Sized>(model: &TopologyModel, count: usize, rng: &mut R) -> Vec<Fault> {
    let mut m = model.clone();
    let mut recipe = Vec::with_capacity(count);
    while recipe.len() < count && !m.nodes.is_empty() {
        let fault = match rng.random_range(0..5u8) {
            0 => {
                let source = m.nodes.choose(rng).expect("non-empty").id;
                Fault::DuplicateNode {
                    source,
                    new_id: NodeId(rng.random_range(1..=m.next_node_id())),
                    placement: pick_placement(rng),
                }
            }
            1 if !m.elements.is_empty() => {
                let source = m.elements.choose(rng).expect("non-empty").id;
                Fault::DuplicateElement {
                    source,
                    new_id: ElementId(rng.random_range(1..=m.next_element_id())),
                    placement: pick_placement(rng),
                    reversed: rng.random_bool(0.5),
                }
            }
            2 if !m.elements.is_empty() => {
                // point an element end at a coincident twin, if one exists
                let e = m.elements.choose(rng).expect("non-empty").clone();
                let end = if rng.random_bool(0.5) { e.node_i } else { e.node_j };
                let Some(pos) = m.node(end).cloned() else { continue };
                let twins: Vec<NodeId> = m
                    .nodes
                    .iter()
                    .filter(|n| n.id != end && n.coincides(&pos))
                    .map(|n| n.id)
                    .collect();
                match twins.choose(rng) {
                    Some(&to) => Fault::Misconnect {
                        element: e.id,
                        from: end,
                        to,
                    },
                    None => continue,
                }
            }
            3 => {
                let from = m.nodes.choose(rng).expect("non-empty").id;
                Fault::NodeGap {
                    from,
                    to: NodeId(m.next_node_id() + rng.random_range(0..3)),
                }
            }
            4 if !m.elements.is_empty() => {
                let from = m.elements.choose(rng).expect("non-empty").id;
                Fault::ElementGap {
                    from,
                    to: ElementId(m.next_element_id() + rng.random_range(0..3)),
                }
            }
            _ => continue,
        };
        let step = inject_faults(&m, &[fault]);
        if step.applied.len() == 1 {
            m = step.model;
            recipe.push(fault);
        }
    }
    recipe
}

/// Moves loads defined on `input` onto the ids of the model the action log
/// produces. Loads on removed duplicates go to the kept entity; a member
/// load on a duplicate drawn in the opposite direction changes sign.
pub fn remap_loads(loads: &LoadSet, input: &TopologyModel, actions: &[CorrectiveAction]) -> LoadSet {
    let mut node_kept = HashMap::new();
    let mut node_renum = HashMap::new();
    let mut elem_kept = HashMap::new();
    let mut elem_renum = HashMap::new();
    for action in actions {
        match *action {
            CorrectiveAction::RemoveDuplicateNode { removed, kept } => {
                node_kept.insert(removed, kept);
            }
            CorrectiveAction::RenumberNode { from, to } => {
                node_renum.insert(from, to);
            }
            CorrectiveAction::RemoveDuplicateElement { removed, kept } => {
                elem_kept.insert(removed, kept);
            }
            CorrectiveAction::RenumberElement { from, to } => {
                elem_renum.insert(from, to);
            }
            CorrectiveAction::ReconnectElement { .. } => {}
        }
    }
    let survivor = |id: NodeId| node_kept.get(&id).copied().unwrap_or(id);
    let node = |id: NodeId| {
        let s = survivor(id);
        node_renum.get(&s).copied().unwrap_or(s)
    };
    let nodal = loads
        .nodal
        .iter()
        .map(|l| NodalLoad {
            node_id: node(l.node_id),
            ..*l
        })
        .collect();
    let member = loads
        .member
        .iter()
        .map(|l| {
            let mut w = l.w;
            let kept = match elem_kept.get(&l.element_id) {
                Some(&kept) => {
                    if let (Some(a), Some(b)) = (input.element(l.element_id), input.element(kept)) {
                        if survivor(a.node_i) == survivor(b.node_j) && survivor(a.node_j) == survivor(b.node_i) {
                            w = -w;
                        }
                    }
                    kept
                }
                None => l.element_id,
            };
            MemberUdl {
                element_id: elem_renum.get(&kept).copied().unwrap_or(kept),
                w,
            }
        })
        .collect();
    LoadSet { nodal, member }.normalized()
}
