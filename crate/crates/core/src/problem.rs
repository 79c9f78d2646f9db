//! Canonical frame problem description: bays, stories, supports, sections
//! and load parameters, plus the line-oriented text format and the JSON
//! format used to exchange it.
//!
//! All values are held in SI units (m, N, N/m, Pa). The text format accepts
//! `kN`, `kN/m`, `kN*m`, `MPa` and `GPa` at the surface and converts them.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::{fmt_json_number, to_canonical_json};
use crate::COORD_TOLERANCE;

/// Bay span used when a bay omits `Span`.
pub const DEFAULT_SPAN: f64 = 6.0;
/// Story height used by the `Signature` shorthand and the benchmark cases.
pub const DEFAULT_STORY_HEIGHT: f64 = 3.0;
/// Lateral point load applied at every floor of the leftmost bay [N].
pub const DEFAULT_LATERAL_LOAD: f64 = 50_000.0;
/// Uniform load on every girder [N/m].
pub const DEFAULT_GIRDER_UDL: f64 = 10_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid problem: {0}")]
    Semantic(String),
}

impl ProblemError {
    fn syntax(line: usize, message: impl Into<String>) -> Self {
        ProblemError::Syntax {
            line,
            message: message.into(),
        }
    }

    fn semantic(message: impl Into<String>) -> Self {
        ProblemError::Semantic(message.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SupportKind {
    #[serde(alias = "fixed", alias = "FIXED")]
    Fixed,
    #[serde(alias = "pinned", alias = "PINNED")]
    Pinned,
}

impl fmt::Display for SupportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportKind::Fixed => f.write_str("Fixed"),
            SupportKind::Pinned => f.write_str("Pinned"),
        }
    }
}

/// One bay of the frame, numbered from 1 on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct BaySpec {
    pub index: u32,
    pub span: f64,
    /// Story heights from the ground floor up; its length is the story count.
    pub heights: Vec<f64>,
}

impl BaySpec {
    pub fn new(index: u32, span: f64, heights: Vec<f64>) -> Self {
        BaySpec { index, span, heights }
    }

    pub fn stories(&self) -> u32 {
        self.heights.len() as u32
    }

    /// Elevation of the top of `story` (1-based). Story 0 is the ground.
    pub fn floor_level(&self, story: u32) -> f64 {
        self.heights[..story as usize].iter().fold(0.0, |a, h| a + h)
    }
}

/// Member section data. Columns and girders carry separate properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A_col")]
    pub a_col: f64,
    #[serde(rename = "A_gir")]
    pub a_gir: f64,
    #[serde(rename = "I_col")]
    pub i_col: f64,
    #[serde(rename = "I_gir")]
    pub i_gir: f64,
}

impl Default for MaterialSpec {
    fn default() -> Self {
        MaterialSpec {
            e: 2e11,
            a_col: 2e-3,
            a_gir: 6e-3,
            i_col: 1.6e-5,
            i_gir: 5.4e-5,
        }
    }
}

impl MaterialSpec {
    fn validate(&self) -> Result<(), ProblemError> {
        for (name, v) in [
            ("E", self.e),
            ("A_col", self.a_col),
            ("A_gir", self.a_gir),
            ("I_col", self.i_col),
            ("I_gir", self.i_gir),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ProblemError::semantic(format!(
                    "material property {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Global direction of an applied load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "+x")]
    PosX,
    #[serde(rename = "-x")]
    NegX,
    #[serde(rename = "+y")]
    PosY,
    #[serde(rename = "-y")]
    NegY,
}

impl Direction {
    pub fn unit(self) -> (f64, f64) {
        match self {
            Direction::PosX => (1.0, 0.0),
            Direction::NegX => (-1.0, 0.0),
            Direction::PosY => (0.0, 1.0),
            Direction::NegY => (0.0, -1.0),
        }
    }

    fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_lowercase().as_str() {
            "+x" | "x" | "right" | "rightward" => Some(Direction::PosX),
            "-x" | "left" | "leftward" => Some(Direction::NegX),
            "+y" | "y" | "up" | "upward" => Some(Direction::PosY),
            "-y" | "down" | "downward" => Some(Direction::NegY),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::PosX => "+x",
            Direction::NegX => "-x",
            Direction::PosY => "+y",
            Direction::NegY => "-y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectedLoad {
    #[serde(rename = "Magnitude")]
    pub magnitude: f64,
    #[serde(rename = "Direction")]
    pub direction: Direction,
}

impl DirectedLoad {
    pub fn vector(&self) -> (f64, f64) {
        let (ux, uy) = self.direction.unit();
        (self.magnitude * ux, self.magnitude * uy)
    }
}

/// A nodal load located by the coordinates of the node it acts on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtraNodalLoad {
    pub x: f64,
    pub y: f64,
    #[serde(rename = "Fx")]
    pub fx: f64,
    #[serde(rename = "Fy")]
    pub fy: f64,
    #[serde(rename = "Mz")]
    pub mz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSpecification {
    /// Applied at the left end of every floor of the first bay.
    #[serde(rename = "Lateral_point")]
    pub lateral_point: DirectedLoad,
    /// Applied along every girder.
    #[serde(rename = "Girder_udl")]
    pub girder_udl: DirectedLoad,
    #[serde(rename = "Extra_nodal", default)]
    pub extra_nodal: Vec<ExtraNodalLoad>,
}

impl Default for LoadSpecification {
    fn default() -> Self {
        LoadSpecification {
            lateral_point: DirectedLoad {
                magnitude: DEFAULT_LATERAL_LOAD,
                direction: Direction::PosX,
            },
            girder_udl: DirectedLoad {
                magnitude: DEFAULT_GIRDER_UDL,
                direction: Direction::NegY,
            },
            extra_nodal: Vec::new(),
        }
    }
}

impl LoadSpecification {
    /// No loads at all.
    pub fn unloaded() -> Self {
        let mut spec = LoadSpecification::default();
        spec.lateral_point.magnitude = 0.0;
        spec.girder_udl.magnitude = 0.0;
        spec
    }

    fn validate(&self) -> Result<(), ProblemError> {
        for (name, load) in [
            ("lateral point load", &self.lateral_point),
            ("girder load", &self.girder_udl),
        ] {
            if !(load.magnitude.is_finite() && load.magnitude >= 0.0) {
                return Err(ProblemError::semantic(format!(
                    "{name} magnitude must be non-negative, got {}",
                    load.magnitude
                )));
            }
        }
        if !matches!(self.girder_udl.direction, Direction::PosY | Direction::NegY) {
            return Err(ProblemError::semantic("girder load must act along +y or -y"));
        }
        for extra in &self.extra_nodal {
            let values = [extra.x, extra.y, extra.fx, extra.fy, extra.mz];
            if values.iter().any(|v| !v.is_finite()) {
                return Err(ProblemError::semantic("nodal load values must be finite"));
            }
        }
        Ok(())
    }
}

/// A validated frame problem. Construct through [`FrameProblem::new`],
/// [`parse_problem`] or [`problem_from_json`] so the invariants hold.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameProblem {
    pub bays: Vec<BaySpec>,
    pub support: SupportKind,
    pub material: MaterialSpec,
    pub loads: LoadSpecification,
}

impl FrameProblem {
    pub fn new(
        bays: Vec<BaySpec>,
        support: SupportKind,
        material: MaterialSpec,
        loads: LoadSpecification,
    ) -> Result<Self, ProblemError> {
        let problem = FrameProblem {
            bays,
            support,
            material,
            loads,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Frame with the given per-bay story counts, uniform span and story
    /// height, fixed supports, default sections and benchmark loads.
    pub fn uniform(signature: &[u32], span: f64, height: f64) -> Result<Self, ProblemError> {
        let bays = signature
            .iter()
            .enumerate()
            .map(|(i, &stories)| BaySpec::new(i as u32 + 1, span, vec![height; stories as usize]))
            .collect();
        FrameProblem::new(
            bays,
            SupportKind::Fixed,
            MaterialSpec::default(),
            LoadSpecification::default(),
        )
    }

    pub fn total_bays(&self) -> u32 {
        self.bays.len() as u32
    }

    pub fn story_signature(&self) -> Vec<u32> {
        self.bays.iter().map(BaySpec::stories).collect()
    }

    /// Signature joined by hyphens, e.g. `3-2-3`.
    pub fn signature_name(&self) -> String {
        signature_name(&self.story_signature())
    }

    /// x coordinate of column line `line` (0 = leftmost).
    pub fn line_x(&self, line: usize) -> f64 {
        self.bays[..line].iter().fold(0.0, |a, b| a + b.span)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if self.bays.is_empty() {
            return Err(ProblemError::semantic("a frame needs at least one bay"));
        }
        for (i, bay) in self.bays.iter().enumerate() {
            let expected = i as u32 + 1;
            if bay.index != expected {
                return Err(ProblemError::semantic(format!(
                    "bay numbers must be contiguous from 1: expected bay {expected}, found bay {}",
                    bay.index
                )));
            }
            if !(bay.span.is_finite() && bay.span > 0.0) {
                return Err(ProblemError::semantic(format!(
                    "bay {expected}: span must be positive, got {}",
                    bay.span
                )));
            }
            if bay.heights.is_empty() {
                return Err(ProblemError::semantic(format!(
                    "bay {expected}: at least one story is required"
                )));
            }
            if let Some(h) = bay.heights.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
                return Err(ProblemError::semantic(format!(
                    "bay {expected}: story heights must be positive, got {h}"
                )));
            }
        }
        for pair in self.bays.windows(2) {
            let (left, right) = (&pair[0], &pair[1]);
            let shared = left.heights.len().min(right.heights.len());
            for s in 0..shared {
                if (left.heights[s] - right.heights[s]).abs() > COORD_TOLERANCE {
                    return Err(ProblemError::semantic(format!(
                        "story {} of bay {} has height {} but the same story of bay {} has height {}; \
                         floors of adjacent bays must align",
                        s + 1,
                        right.index,
                        right.heights[s],
                        left.index,
                        left.heights[s]
                    )));
                }
            }
        }
        self.material.validate()?;
        self.loads.validate()
    }
}

pub fn signature_name(signature: &[u32]) -> String {
    signature.iter().map(u32::to_string).collect::<Vec<_>>().join("-")
}

/// Parses `3-2-3` into `[3, 2, 3]`.
pub fn parse_signature(text: &str) -> Option<Vec<u32>> {
    let parts: Option<Vec<u32>> = text
        .trim()
        .split('-')
        .map(|p| p.trim().parse::<u32>().ok().filter(|&n| n >= 1))
        .collect();
    parts.filter(|p| !p.is_empty())
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
struct ProblemDoc {
    #[serde(rename = "Total_bays")]
    total_bays: u32,
    #[serde(rename = "Geometry")]
    geometry: GeometryDoc,
    #[serde(rename = "Supports", default, skip_serializing_if = "Option::is_none")]
    supports: Option<SupportKind>,
    #[serde(rename = "Material", default, skip_serializing_if = "Option::is_none")]
    material: Option<MaterialSpec>,
    #[serde(rename = "Loads", default, skip_serializing_if = "Option::is_none")]
    loads: Option<LoadSpecification>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GeometryDoc {
    Many(Vec<BayDoc>),
    One(BayDoc),
}

#[derive(Serialize, Deserialize)]
struct BayDoc {
    #[serde(rename = "Bay")]
    bay: u32,
    #[serde(rename = "Span", default, skip_serializing_if = "Option::is_none")]
    span: Option<f64>,
    #[serde(rename = "Total_stories", default, skip_serializing_if = "Option::is_none")]
    total_stories: Option<u32>,
    #[serde(rename = "Heights")]
    heights: Vec<f64>,
}

/// Serializes a problem with every field present and keys in schema order.
pub fn problem_to_json(problem: &FrameProblem) -> String {
    let doc = ProblemDoc {
        total_bays: problem.total_bays(),
        geometry: GeometryDoc::Many(
            problem
                .bays
                .iter()
                .map(|b| BayDoc {
                    bay: b.index,
                    span: Some(b.span),
                    total_stories: Some(b.stories()),
                    heights: b.heights.clone(),
                })
                .collect(),
        ),
        supports: Some(problem.support),
        material: Some(problem.material),
        loads: Some(problem.loads.clone()),
    };
    to_canonical_json(&doc)
}

/// Parses the JSON problem format. `Geometry` may be a single bay object or
/// an array of bays; `Span`, `Supports`, `Material` and `Loads` default.
pub fn problem_from_json(text: &str) -> Result<FrameProblem, ProblemError> {
    let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| ProblemError::Syntax {
        line: e.line(),
        message: e.to_string(),
    })?;
    let bay_docs = match doc.geometry {
        GeometryDoc::Many(v) => v,
        GeometryDoc::One(b) => vec![b],
    };
    let mut bays = Vec::with_capacity(bay_docs.len());
    for b in bay_docs {
        if let Some(n) = b.total_stories {
            if n as usize != b.heights.len() {
                return Err(ProblemError::semantic(format!(
                    "bay {}: heights length {} does not match Total_stories {n}",
                    b.bay,
                    b.heights.len()
                )));
            }
        }
        bays.push(BaySpec::new(b.bay, b.span.unwrap_or(DEFAULT_SPAN), b.heights));
    }
    if doc.total_bays as usize != bays.len() {
        return Err(ProblemError::semantic(format!(
            "Total_bays is {} but {} bays are described",
            doc.total_bays,
            bays.len()
        )));
    }
    FrameProblem::new(
        bays,
        doc.supports.unwrap_or(SupportKind::Fixed),
        doc.material.unwrap_or_default(),
        doc.loads.unwrap_or_default(),
    )
}

/// Accepts either format: JSON when the first non-blank character is `{`.
pub fn load_problem(text: &str) -> Result<FrameProblem, ProblemError> {
    if text.trim_start().starts_with('{') {
        problem_from_json(text)
    } else {
        parse_problem(text)
    }
}

// ---------------------------------------------------------------------------
// Line-oriented text format

#[derive(Clone, Copy)]
enum Dimension {
    Length,
    Force,
    LineLoad,
    Moment,
    Modulus,
    Area,
    Inertia,
}

impl Dimension {
    fn scale(self, unit: &str) -> Option<f64> {
        let unit = unit.replace('·', "*").to_ascii_lowercase();
        let scale = match (self, unit.as_str()) {
            (Dimension::Length, "m") => 1.0,
            (Dimension::Length, "mm") => 1e-3,
            (Dimension::Force, "n") => 1.0,
            (Dimension::Force, "kn") => 1e3,
            (Dimension::LineLoad, "n/m") => 1.0,
            (Dimension::LineLoad, "kn/m") => 1e3,
            (Dimension::Moment, "n*m" | "nm" | "n.m") => 1.0,
            (Dimension::Moment, "kn*m" | "knm" | "kn.m") => 1e3,
            (Dimension::Modulus, "pa") => 1.0,
            (Dimension::Modulus, "kpa") => 1e3,
            (Dimension::Modulus, "mpa") => 1e6,
            (Dimension::Modulus, "gpa") => 1e9,
            (Dimension::Area, "m2" | "m^2" | "m²") => 1.0,
            (Dimension::Inertia, "m4" | "m^4" | "m⁴") => 1.0,
            _ => return None,
        };
        Some(scale)
    }
}

/// Splits a token like `10kN` into number and unit.
fn split_number(token: &str) -> (&str, &str) {
    let bytes = token.as_bytes();
    let mut end = 0;
    while end < bytes.len() {
        let c = bytes[end] as char;
        let exp_sign = end > 0 && matches!(c, '+' | '-') && matches!(bytes[end - 1], b'e' | b'E');
        let exp = matches!(c, 'e' | 'E')
            && end + 1 < bytes.len()
            && (bytes[end + 1].is_ascii_digit() || matches!(bytes[end + 1], b'+' | b'-'));
        if c.is_ascii_digit() || c == '.' || (end == 0 && matches!(c, '+' | '-')) || exp_sign || exp {
            end += 1;
        } else {
            break;
        }
    }
    (&token[..end], token[end..].trim())
}

fn parse_quantity(text: &str, dim: Dimension, line: usize, field: &str) -> Result<f64, ProblemError> {
    let compact: String = text.split_whitespace().collect::<Vec<_>>().join("");
    let (number, unit) = split_number(&compact);
    let value: f64 = number
        .parse()
        .map_err(|_| ProblemError::syntax(line, format!("{field}: expected a number, found `{}`", text.trim())))?;
    let scale = if unit.is_empty() {
        1.0
    } else {
        dim.scale(unit)
            .ok_or_else(|| ProblemError::syntax(line, format!("{field}: unsupported unit `{unit}`")))?
    };
    if !value.is_finite() {
        return Err(ProblemError::syntax(line, format!("{field}: value must be finite")));
    }
    Ok(value * scale)
}

fn parse_count(text: &str, line: usize, field: &str) -> Result<u32, ProblemError> {
    text.trim().parse::<u32>().map_err(|_| {
        ProblemError::syntax(
            line,
            format!("{field}: expected a whole number, found `{}`", text.trim()),
        )
    })
}

fn parse_directed(
    text: &str,
    dim: Dimension,
    default_dir: Direction,
    line: usize,
    field: &str,
) -> Result<DirectedLoad, ProblemError> {
    let mut tokens: Vec<&str> = text.split_whitespace().collect();
    let mut direction = default_dir;
    if let Some(last) = tokens.last() {
        if let Some(d) = Direction::parse(last) {
            // a bare `+x` only counts when something precedes it
            if tokens.len() > 1 {
                direction = d;
                tokens.pop();
            }
        }
    }
    let magnitude = parse_quantity(&tokens.join(" "), dim, line, field)?;
    Ok(DirectedLoad { magnitude, direction })
}

fn parse_nodal(text: &str, line: usize) -> Result<ExtraNodalLoad, ProblemError> {
    let mut fields: Vec<(String, String)> = Vec::new();
    for token in text.split_whitespace() {
        if let Some((k, v)) = token.split_once('=') {
            fields.push((k.trim().to_ascii_lowercase(), v.to_string()));
        } else if let Some(last) = fields.last_mut() {
            last.1.push_str(token);
        } else {
            return Err(ProblemError::syntax(
                line,
                format!("Nodal_load: expected key=value, found `{token}`"),
            ));
        }
    }
    let mut load = ExtraNodalLoad {
        x: f64::NAN,
        y: f64::NAN,
        fx: 0.0,
        fy: 0.0,
        mz: 0.0,
    };
    for (k, v) in &fields {
        match k.as_str() {
            "x" => load.x = parse_quantity(v, Dimension::Length, line, "Nodal_load x")?,
            "y" => load.y = parse_quantity(v, Dimension::Length, line, "Nodal_load y")?,
            "fx" => load.fx = parse_quantity(v, Dimension::Force, line, "Nodal_load Fx")?,
            "fy" => load.fy = parse_quantity(v, Dimension::Force, line, "Nodal_load Fy")?,
            "mz" => load.mz = parse_quantity(v, Dimension::Moment, line, "Nodal_load Mz")?,
            other => {
                return Err(ProblemError::syntax(
                    line,
                    format!("Nodal_load: unknown component `{other}`"),
                ))
            }
        }
    }
    if load.x.is_nan() || load.y.is_nan() {
        return Err(ProblemError::syntax(line, "Nodal_load: both x= and y= are required"));
    }
    Ok(load)
}

#[derive(Default)]
struct BayDraft {
    index: u32,
    line: usize,
    span: Option<f64>,
    stories: Option<u32>,
    heights: Option<Vec<f64>>,
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace([' ', '-'], "_")
}

/// Parses the line-oriented text format.
///
/// ```text
/// # Three-bay frame
/// Total_bays: 3
/// Supports: Fixed
/// E: 200 GPa
/// Lateral_load: 50 kN +x
/// Girder_udl: 10 kN/m -y
/// Bay: 1
/// Span: 6 m
/// Heights: 5, 4, 5
/// Bay: 2
/// Heights: 5, 4
/// Bay: 3
/// Heights: 5, 4, 5
/// ```
///
/// `Signature: 3-2-3` may replace the bay blocks; it yields 6 m spans and
/// 3 m stories. Keys are case-insensitive and `#` starts a comment.
pub fn parse_problem(text: &str) -> Result<FrameProblem, ProblemError> {
    let mut total_bays: Option<u32> = None;
    let mut signature: Option<(usize, Vec<u32>)> = None;
    let mut support: Option<SupportKind> = None;
    let mut material = MaterialSpec::default();
    let mut loads = LoadSpecification::default();
    let mut bays: Vec<BayDraft> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut any_content = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        any_content = true;
        let (key, value) = content
            .split_once(':')
            .ok_or_else(|| ProblemError::syntax(line, format!("expected `key: value`, found `{content}`")))?;
        let key = normalize_key(key);
        let value = value.trim();
        if value.is_empty() {
            return Err(ProblemError::syntax(line, format!("`{key}` has no value")));
        }

        let bay_scoped = matches!(key.as_str(), "span" | "total_stories" | "stories" | "heights");
        if !bay_scoped && key != "bay" && key != "nodal_load" && !seen.insert(key.clone()) {
            return Err(ProblemError::syntax(line, format!("duplicate key `{key}`")));
        }

        match key.as_str() {
            "total_bays" => total_bays = Some(parse_count(value, line, "Total_bays")?),
            "signature" => {
                let sig = parse_signature(value).ok_or_else(|| {
                    ProblemError::syntax(line, format!("Signature: expected e.g. `3-2-3`, found `{value}`"))
                })?;
                signature = Some((line, sig));
            }
            "supports" | "support" => {
                support = Some(match value.to_ascii_lowercase().as_str() {
                    "fixed" => SupportKind::Fixed,
                    "pinned" => SupportKind::Pinned,
                    _ => {
                        return Err(ProblemError::syntax(
                            line,
                            format!("Supports: expected Fixed or Pinned, found `{value}`"),
                        ))
                    }
                })
            }
            "e" => material.e = parse_quantity(value, Dimension::Modulus, line, "E")?,
            "a_col" => material.a_col = parse_quantity(value, Dimension::Area, line, "A_col")?,
            "a_gir" => material.a_gir = parse_quantity(value, Dimension::Area, line, "A_gir")?,
            "i_col" => material.i_col = parse_quantity(value, Dimension::Inertia, line, "I_col")?,
            "i_gir" => material.i_gir = parse_quantity(value, Dimension::Inertia, line, "I_gir")?,
            "lateral_load" => {
                loads.lateral_point = parse_directed(value, Dimension::Force, Direction::PosX, line, "Lateral_load")?
            }
            "girder_udl" => {
                loads.girder_udl = parse_directed(value, Dimension::LineLoad, Direction::NegY, line, "Girder_udl")?
            }
            "nodal_load" => loads.extra_nodal.push(parse_nodal(value, line)?),
            "bay" => {
                let index = parse_count(value, line, "Bay")?;
                bays.push(BayDraft {
                    index,
                    line,
                    ..BayDraft::default()
                });
            }
            "span" | "total_stories" | "stories" | "heights" => {
                let bay = bays
                    .last_mut()
                    .ok_or_else(|| ProblemError::syntax(line, format!("`{key}` must follow a `Bay:` line")))?;
                match key.as_str() {
                    "span" => {
                        if bay.span.is_some() {
                            return Err(ProblemError::syntax(line, "duplicate Span in bay"));
                        }
                        bay.span = Some(parse_quantity(value, Dimension::Length, line, "Span")?);
                    }
                    "heights" => {
                        if bay.heights.is_some() {
                            return Err(ProblemError::syntax(line, "duplicate Heights in bay"));
                        }
                        let list = value.trim_start_matches('[').trim_end_matches(']');
                        let heights = list
                            .split([',', ' ', '\t'])
                            .filter(|t| !t.is_empty())
                            .map(|t| parse_quantity(t, Dimension::Length, line, "Heights"))
                            .collect::<Result<Vec<_>, _>>()?;
                        bay.heights = Some(heights);
                    }
                    _ => {
                        if bay.stories.is_some() {
                            return Err(ProblemError::syntax(line, "duplicate Total_stories in bay"));
                        }
                        bay.stories = Some(parse_count(value, line, "Total_stories")?);
                    }
                }
            }
            other => return Err(ProblemError::syntax(line, format!("unknown key `{other}`"))),
        }
    }

    if !any_content {
        return Err(ProblemError::syntax(1, "empty problem description"));
    }

    let resolved: Vec<BaySpec> = match signature {
        Some((line, sig)) => {
            if !bays.is_empty() {
                return Err(ProblemError::syntax(
                    line,
                    "Signature cannot be combined with Bay blocks",
                ));
            }
            sig.iter()
                .enumerate()
                .map(|(i, &n)| BaySpec::new(i as u32 + 1, DEFAULT_SPAN, vec![DEFAULT_STORY_HEIGHT; n as usize]))
                .collect()
        }
        None => {
            let mut out = Vec::with_capacity(bays.len());
            for draft in bays {
                let heights = match (draft.heights, draft.stories) {
                    (Some(h), Some(n)) if h.len() != n as usize => {
                        return Err(ProblemError::semantic(format!(
                            "bay {} (line {}): heights length {} does not match Total_stories {n}",
                            draft.index,
                            draft.line,
                            h.len()
                        )))
                    }
                    (Some(h), _) => h,
                    (None, Some(n)) => vec![DEFAULT_STORY_HEIGHT; n as usize],
                    (None, None) => {
                        return Err(ProblemError::semantic(format!(
                            "bay {} (line {}): needs Heights or Total_stories",
                            draft.index, draft.line
                        )))
                    }
                };
                out.push(BaySpec::new(draft.index, draft.span.unwrap_or(DEFAULT_SPAN), heights));
            }
            out
        }
    };

    if let Some(n) = total_bays {
        if n as usize != resolved.len() {
            return Err(ProblemError::semantic(format!(
                "Total_bays is {n} but {} bays are described",
                resolved.len()
            )));
        }
    }

    FrameProblem::new(resolved, support.unwrap_or(SupportKind::Fixed), material, loads)
}

/// Writes the canonical text form; [`parse_problem`] reads it back exactly.
pub fn problem_to_text(problem: &FrameProblem) -> String {
    let n = fmt_json_number;
    let m = &problem.material;
    let l = &problem.loads;
    let mut out = String::new();
    out.push_str(&format!("# frame {}\n", problem.signature_name()));
    out.push_str(&format!("Total_bays: {}\n", problem.total_bays()));
    out.push_str(&format!("Supports: {}\n", problem.support));
    out.push_str(&format!("E: {} Pa\n", n(m.e)));
    out.push_str(&format!("A_col: {} m2\n", n(m.a_col)));
    out.push_str(&format!("A_gir: {} m2\n", n(m.a_gir)));
    out.push_str(&format!("I_col: {} m4\n", n(m.i_col)));
    out.push_str(&format!("I_gir: {} m4\n", n(m.i_gir)));
    out.push_str(&format!(
        "Lateral_load: {} N {}\n",
        n(l.lateral_point.magnitude),
        l.lateral_point.direction.as_str()
    ));
    out.push_str(&format!(
        "Girder_udl: {} N/m {}\n",
        n(l.girder_udl.magnitude),
        l.girder_udl.direction.as_str()
    ));
    for extra in &l.extra_nodal {
        out.push_str(&format!(
            "Nodal_load: x={} y={} Fx={} Fy={} Mz={}\n",
            n(extra.x),
            n(extra.y),
            n(extra.fx),
            n(extra.fy),
            n(extra.mz)
        ));
    }
    for bay in &problem.bays {
        out.push_str(&format!("Bay: {}\n", bay.index));
        out.push_str(&format!("Span: {}\n", n(bay.span)));
        out.push_str(&format!("Total_stories: {}\n", bay.stories()));
        let heights: Vec<String> = bay.heights.iter().map(|h| n(*h)).collect();
        out.push_str(&format!("Heights: {}\n", heights.join(", ")));
    }
    out
}
