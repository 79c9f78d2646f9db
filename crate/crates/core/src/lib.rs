//! Plane-frame modelling toolkit: problem descriptions, rule-based topology
//! construction, model repair, linear static analysis, script generation and
//! an accuracy benchmark.

/// Two coordinates closer than this on both axes denote the same point.
pub const COORD_TOLERANCE: f64 = 1e-9;

pub mod bench;
pub mod category;
pub mod format;
pub mod geometry;
pub mod loads;
pub mod model;
pub mod pipeline;
pub mod problem;
pub mod remote;
pub mod render;
pub mod script;
pub mod solver;
pub mod validation;
