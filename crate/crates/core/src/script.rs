//! OpenSeesPy-dialect analysis scripts: emission and parsing.
//!
//! Emitted scripts use this statement grammar, one statement per line:
//!
//! ```text
//! import openseespy.opensees as ops
//! ops.wipe()
//! ops.model('basic', '-ndm', 2, '-ndf', 3)
//! ops.node(<id>, <x>, <y>)  # <description>
//! ops.fix(<node>, <ux>, <uy>, <rz>)
//! E = <value>                  (also A_col, A_gir, I_col, I_gir)
//! ops.geomTransf('Linear', 1)
//! ops.element('elasticBeamColumn', <id>, <i>, <j>, <A>, <E>, <I>, 1)  # <description>
//! # step <n>: bay <b>, story <s>, <rule>, nodes [...], elements [...], supports [...]
//! ops.timeSeries('Constant', 1)
//! ops.pattern('Plain', 1, 1)
//! ops.load(<node>, <Fx>, <Fy>, <Mz>)
//! ops.eleLoad('-ele', <id>, '-type', '-beamUniform', <w>)
//! ops.constraints(...) ops.numberer(...) ops.system(...) ops.algorithm(...)
//! ops.integrator('LoadControl', <increment>)
//! ops.analysis('Static')
//! ops.analyze(<steps>)
//! ```
//!
//! Numbers are written with twelve significant digits. The parser accepts
//! any import alias (or a star import), literal section values in element
//! commands, and reports statements it does not understand as warnings.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::category::ErrorCategory;
use crate::format::fmt_g12;
use crate::loads::{LoadSet, MemberUdl, NodalLoad};
use crate::model::{
    ConstructionStep, Element, ElementId, ElementKind, Fixity, Node, NodeId, Rule, SupportConstraint, TopologyModel,
};
use crate::problem::MaterialSpec;
use crate::COORD_TOLERANCE;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub constraints: String,
    pub numberer: String,
    pub system: String,
    pub algorithm: String,
    pub integrator: String,
    pub steps: u32,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            constraints: "Plain".into(),
            numberer: "RCM".into(),
            system: "BandGeneral".into(),
            algorithm: "Linear".into(),
            integrator: "LoadControl".into(),
            steps: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatementKind {
    Comment,
    ModelInit,
    NodeDef,
    Fix,
    SectionParams,
    Transf,
    ElementDef,
    TimeSeries,
    Pattern,
    NodalLoadCmd,
    EleLoadCmd,
    AnalysisCmd,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Blank,
    Comment(String),
    Import,
    Wipe,
    ModelInit { ndm: u32, ndf: u32 },
    NodeDef(Node),
    Fix(SupportConstraint),
    SectionParams { name: &'static str, value: f64 },
    Transf { tag: u32 },
    ElementDef(Element),
    Step(ConstructionStep),
    TimeSeries { tag: u32 },
    Pattern { tag: u32, series: u32 },
    NodalLoadCmd(NodalLoad),
    EleLoadCmd(MemberUdl),
    AnalysisCmd { command: &'static str, args: String },
}

const TRANSF_TAG: u32 = 1;
const SERIES_TAG: u32 = 1;
const PATTERN_TAG: u32 = 1;

fn section_names(kind: ElementKind) -> (&'static str, &'static str) {
    match kind {
        ElementKind::Column => ("A_col", "I_col"),
        ElementKind::Girder => ("A_gir", "I_gir"),
    }
}

fn id_list<T: std::fmt::Display>(ids: &[T]) -> String {
    let parts: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn with_comment(code: String, desc: &str) -> String {
    if desc.is_empty() {
        code
    } else {
        format!("{code}  # {desc}")
    }
}

impl Statement {
    pub fn kind(&self) -> StatementKind {
        match self {
            Statement::Blank | Statement::Comment(_) | Statement::Step(_) => StatementKind::Comment,
            Statement::Import | Statement::Wipe | Statement::ModelInit { .. } => StatementKind::ModelInit,
            Statement::NodeDef(_) => StatementKind::NodeDef,
            Statement::Fix(_) => StatementKind::Fix,
            Statement::SectionParams { .. } => StatementKind::SectionParams,
            Statement::Transf { .. } => StatementKind::Transf,
            Statement::ElementDef(_) => StatementKind::ElementDef,
            Statement::TimeSeries { .. } => StatementKind::TimeSeries,
            Statement::Pattern { .. } => StatementKind::Pattern,
            Statement::NodalLoadCmd(_) => StatementKind::NodalLoadCmd,
            Statement::EleLoadCmd(_) => StatementKind::EleLoadCmd,
            Statement::AnalysisCmd { .. } => StatementKind::AnalysisCmd,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Statement::Blank => String::new(),
            Statement::Comment(text) => format!("# {text}"),
            Statement::Import => "import openseespy.opensees as ops".into(),
            Statement::Wipe => "ops.wipe()".into(),
            Statement::ModelInit { ndm, ndf } => format!("ops.model('basic', '-ndm', {ndm}, '-ndf', {ndf})"),
            Statement::NodeDef(n) => with_comment(
                format!("ops.node({}, {}, {})", n.id, fmt_g12(n.x), fmt_g12(n.y)),
                &n.desc,
            ),
            Statement::Fix(s) => {
                let [a, b, c] = s.fixity.as_array().map(u8::from);
                format!("ops.fix({}, {a}, {b}, {c})", s.node_id)
            }
            Statement::SectionParams { name, value } => format!("{name} = {}", fmt_g12(*value)),
            Statement::Transf { tag } => format!("ops.geomTransf('Linear', {tag})"),
            Statement::ElementDef(e) => {
                let (a, i) = section_names(e.kind);
                with_comment(
                    format!(
                        "ops.element('elasticBeamColumn', {}, {}, {}, {a}, E, {i}, {TRANSF_TAG})",
                        e.id, e.node_i, e.node_j
                    ),
                    &e.desc,
                )
            }
            Statement::Step(s) => format!(
                "# step {}: bay {}, story {}, {}, nodes {}, elements {}, supports {}",
                s.step,
                s.bay,
                s.story,
                s.rule.as_str(),
                id_list(&s.added_nodes),
                id_list(&s.added_elements),
                id_list(&s.added_supports)
            ),
            Statement::TimeSeries { tag } => format!("ops.timeSeries('Constant', {tag})"),
            Statement::Pattern { tag, series } => format!("ops.pattern('Plain', {tag}, {series})"),
            Statement::NodalLoadCmd(l) => format!(
                "ops.load({}, {}, {}, {})",
                l.node_id,
                fmt_g12(l.fx),
                fmt_g12(l.fy),
                fmt_g12(l.mz)
            ),
            Statement::EleLoadCmd(l) => format!(
                "ops.eleLoad('-ele', {}, '-type', '-beamUniform', {})",
                l.element_id,
                fmt_g12(l.w)
            ),
            Statement::AnalysisCmd { command, args } => format!("ops.{command}({args})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptDocument {
    pub statements: Vec<Statement>,
    pub text: String,
}

impl ScriptDocument {
    fn from_statements(statements: Vec<Statement>) -> Self {
        let mut text = String::new();
        for s in &statements {
            let _ = writeln!(text, "{}", s.render());
        }
        ScriptDocument { statements, text }
    }

    pub fn count(&self, kind: StatementKind) -> usize {
        self.statements.iter().filter(|s| s.kind() == kind).count()
    }
}

fn quoted(s: &str) -> String {
    format!("'{s}'")
}

pub fn emit_script(
    model: &TopologyModel,
    loads: &LoadSet,
    material: &MaterialSpec,
    config: &AnalysisConfig,
) -> ScriptDocument {
    use Statement as S;
    let mut out = vec![
        S::Comment("2D frame model, linear static analysis".into()),
        S::Import,
        S::Blank,
        S::Wipe,
        S::ModelInit { ndm: 2, ndf: 3 },
        S::Blank,
        S::Comment("Nodes".into()),
    ];
    out.extend(model.nodes.iter().cloned().map(S::NodeDef));
    out.push(S::Blank);
    out.push(S::Comment("Supports".into()));
    out.extend(model.supports.iter().copied().map(S::Fix));
    out.push(S::Blank);
    out.push(S::Comment("Sections".into()));
    for (name, value) in [
        ("E", material.e),
        ("A_col", material.a_col),
        ("A_gir", material.a_gir),
        ("I_col", material.i_col),
        ("I_gir", material.i_gir),
    ] {
        out.push(S::SectionParams { name, value });
    }
    out.push(S::Transf { tag: TRANSF_TAG });
    out.push(S::Blank);
    out.push(S::Comment("Elements".into()));
    out.extend(model.elements.iter().cloned().map(S::ElementDef));
    if !model.steps.is_empty() {
        out.push(S::Blank);
        out.push(S::Comment("Construction steps".into()));
        out.extend(model.steps.iter().cloned().map(S::Step));
    }
    if !loads.is_empty() {
        out.push(S::Blank);
        out.push(S::Comment("Loads".into()));
        out.push(S::TimeSeries { tag: SERIES_TAG });
        out.push(S::Pattern {
            tag: PATTERN_TAG,
            series: SERIES_TAG,
        });
        out.extend(loads.nodal.iter().copied().map(S::NodalLoadCmd));
        out.extend(loads.member.iter().copied().map(S::EleLoadCmd));
    }
    out.push(S::Blank);
    out.push(S::Comment("Analysis".into()));
    let steps = config.steps.max(1);
    for (command, args) in [
        ("constraints", quoted(&config.constraints)),
        ("numberer", quoted(&config.numberer)),
        ("system", quoted(&config.system)),
        ("algorithm", quoted(&config.algorithm)),
        (
            "integrator",
            format!("{}, {}", quoted(&config.integrator), fmt_g12(1.0 / steps as f64)),
        ),
        ("analysis", quoted("Static")),
        ("analyze", steps.to_string()),
    ] {
        out.push(S::AnalysisCmd { command, args });
    }
    ScriptDocument::from_statements(out)
}

// ---------------------------------------------------------------------------
// Parsing

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message} ({category})")]
pub struct ScriptError {
    pub line: usize,
    pub category: ErrorCategory,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptWarning {
    pub line: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedScript {
    pub model: TopologyModel,
    pub loads: LoadSet,
    pub material: MaterialSpec,
    pub config: AnalysisConfig,
    pub warnings: Vec<ScriptWarning>,
}

#[derive(Debug, Clone, PartialEq)]
enum Arg {
    Str(String),
    Num { value: f64, integer: bool },
    Ident(String),
}

impl Arg {
    fn describe(&self) -> String {
        match self {
            Arg::Str(s) => format!("'{s}'"),
            Arg::Num { value, .. } => fmt_g12(*value),
            Arg::Ident(s) => s.clone(),
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_arg(raw: &str) -> Option<Arg> {
    let raw = raw.trim();
    if raw.len() >= 2 {
        let (first, last) = (raw.as_bytes()[0], raw.as_bytes()[raw.len() - 1]);
        if (first == b'\'' || first == b'"') && first == last {
            return Some(Arg::Str(raw[1..raw.len() - 1].to_string()));
        }
    }
    if is_ident(raw) {
        return Some(Arg::Ident(raw.to_string()));
    }
    let digits = raw.strip_prefix(['-', '+']).unwrap_or(raw);
    let integer = !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit());
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(|value| Arg::Num { value, integer })
}

/// Splits a line into code and trailing comment, ignoring `#` inside quotes.
fn split_comment(line: &str) -> (&str, Option<&str>) {
    let mut quote = None;
    for (i, c) in line.char_indices() {
        match (quote, c) {
            (None, '\'' | '"') => quote = Some(c),
            (Some(q), c) if c == q => quote = None,
            (None, '#') => return (line[..i].trim_end(), Some(line[i + 1..].trim())),
            _ => {}
        }
    }
    (line.trim_end(), None)
}

fn split_args(inner: &str) -> Option<Vec<Arg>> {
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    let mut parts = Vec::new();
    let mut quote = None;
    let mut start = 0;
    for (i, c) in inner.char_indices() {
        match (quote, c) {
            (None, '\'' | '"') => quote = Some(c),
            (Some(q), c) if c == q => quote = None,
            (None, ',') => {
                parts.push(&inner[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&inner[start..]);
    parts.into_iter().map(parse_arg).collect()
}

#[derive(Default)]
struct MaterialDraft {
    e: Option<f64>,
    a_col: Option<f64>,
    a_gir: Option<f64>,
    i_col: Option<f64>,
    i_gir: Option<f64>,
}

impl MaterialDraft {
    fn slot(&mut self, name: &str) -> Option<&mut Option<f64>> {
        match name {
            "E" => Some(&mut self.e),
            "A_col" => Some(&mut self.a_col),
            "A_gir" => Some(&mut self.a_gir),
            "I_col" => Some(&mut self.i_col),
            "I_gir" => Some(&mut self.i_gir),
            _ => None,
        }
    }

    fn finish(self) -> MaterialSpec {
        let d = MaterialSpec::default();
        MaterialSpec {
            e: self.e.unwrap_or(d.e),
            a_col: self.a_col.unwrap_or(d.a_col),
            a_gir: self.a_gir.unwrap_or(d.a_gir),
            i_col: self.i_col.unwrap_or(d.i_col),
            i_gir: self.i_gir.unwrap_or(d.i_gir),
        }
    }
}

struct Parser {
    line: usize,
    alias: Option<String>,
    model_defined: bool,
    vars: HashMap<String, f64>,
    material: MaterialDraft,
    model: TopologyModel,
    node_ids: HashSet<NodeId>,
    element_ids: HashSet<ElementId>,
    transforms: HashSet<u32>,
    series: HashSet<u32>,
    pattern_open: bool,
    loads: LoadSet,
    config: AnalysisConfig,
    warnings: Vec<ScriptWarning>,
}

type Step<T = ()> = Result<T, ScriptError>;

impl Parser {
    fn err<T>(&self, category: ErrorCategory, message: impl Into<String>) -> Step<T> {
        Err(ScriptError {
            line: self.line,
            category,
            message: message.into(),
        })
    }

    fn warn(&mut self, text: impl Into<String>) {
        self.warnings.push(ScriptWarning {
            line: self.line,
            text: text.into(),
        });
    }

    fn int(&self, arg: &Arg, category: ErrorCategory, what: &str) -> Step<u32> {
        match arg {
            Arg::Num { value, integer: true } if *value >= 0.0 && *value <= u32::MAX as f64 => Ok(*value as u32),
            other => self.err(
                category,
                format!("{what} must be a non-negative integer, got {}", other.describe()),
            ),
        }
    }

    fn num(&self, arg: &Arg, category: ErrorCategory, what: &str) -> Step<f64> {
        match arg {
            Arg::Num { value, .. } => Ok(*value),
            Arg::Ident(name) => match self.vars.get(name) {
                Some(&v) => Ok(v),
                None => self.err(category, format!("{what} uses undefined variable `{name}`")),
            },
            Arg::Str(s) => self.err(category, format!("{what} must be numeric, got '{s}'")),
        }
    }

    fn string<'a>(&self, arg: &'a Arg, category: ErrorCategory, what: &str) -> Step<&'a str> {
        match arg {
            Arg::Str(s) => Ok(s),
            other => self.err(category, format!("{what} must be a string, got {}", other.describe())),
        }
    }

    fn arity(&self, args: &[Arg], n: usize, category: ErrorCategory, command: &str) -> Step {
        if args.len() != n {
            return self.err(category, format!("{command} expects {n} arguments, got {}", args.len()));
        }
        Ok(())
    }

    fn record_material(&mut self, name: &str, value: f64) -> Step {
        let line = self.line;
        if let Some(slot) = self.material.slot(name) {
            match *slot {
                Some(v) if v != value => {
                    return Err(ScriptError {
                        line,
                        category: ErrorCategory::MaterialProperties,
                        message: format!(
                            "section value `{name}` is {} here but {} elsewhere",
                            fmt_g12(value),
                            fmt_g12(v)
                        ),
                    })
                }
                _ => *slot = Some(value),
            }
        }
        Ok(())
    }

    fn statement(&mut self, code: &str, comment: Option<&str>) -> Step {
        let code = code.trim();
        if let Some(rest) = code.strip_prefix("import ") {
            let rest = rest.trim();
            if let Some((module, alias)) = rest.split_once(" as ") {
                if module.trim() == "openseespy.opensees" {
                    self.alias = Some(alias.trim().to_string());
                    return Ok(());
                }
            }
            self.warn(format!("ignored import `{rest}`"));
            return Ok(());
        }
        if code.starts_with("from ") {
            if code.replace(' ', "") == "fromopenseespy.openseesimport*" {
                self.alias = None;
            } else {
                self.warn(format!("ignored import `{code}`"));
            }
            return Ok(());
        }

        if let Some(open) = code.find('(') {
            if code.ends_with(')') {
                let callee = code[..open].trim();
                let name = match (&self.alias, callee.split_once('.')) {
                    (Some(alias), Some((a, n))) if a == alias => Some(n),
                    (None, None) => Some(callee),
                    _ => None,
                };
                if let Some(name) = name.filter(|n| is_ident(n)) {
                    let Some(args) = split_args(&code[open + 1..code.len() - 1]) else {
                        return self.malformed(name);
                    };
                    return self.call(name, &args, comment);
                }
            }
        }

        if let Some((lhs, rhs)) = code.split_once('=') {
            let lhs = lhs.trim();
            if is_ident(lhs) && !rhs.starts_with('=') {
                return self.assign(lhs, rhs.trim());
            }
        }
        self.warn(format!("unrecognized statement `{code}`"));
        Ok(())
    }

    fn malformed(&self, name: &str) -> Step {
        let category = match name {
            "node" => ErrorCategory::NodeDefinition,
            "fix" => ErrorCategory::SupportConditions,
            "element" | "geomTransf" => ErrorCategory::ElementDefinition,
            "load" | "eleLoad" | "pattern" | "timeSeries" => ErrorCategory::LoadApplication,
            _ => ErrorCategory::Other,
        };
        self.err(category, format!("malformed arguments to `{name}`"))
    }

    fn assign(&mut self, name: &str, rhs: &str) -> Step {
        let value = match parse_arg(rhs) {
            Some(Arg::Num { value, .. }) => value,
            Some(Arg::Ident(other)) if self.vars.contains_key(&other) => self.vars[&other],
            _ => {
                if self.material.slot(name).is_some() {
                    return self.err(
                        ErrorCategory::MaterialProperties,
                        format!("section value `{name}` is not numeric"),
                    );
                }
                self.warn(format!("ignored assignment to `{name}`"));
                return Ok(());
            }
        };
        if let Some(&old) = self.vars.get(name) {
            if old != value && self.material.slot(name).is_some() {
                return self.err(
                    ErrorCategory::MaterialProperties,
                    format!("section value `{name}` reassigned"),
                );
            }
        }
        self.vars.insert(name.to_string(), value);
        self.record_material(name, value)
    }

    fn call(&mut self, name: &str, args: &[Arg], comment: Option<&str>) -> Step {
        use ErrorCategory as C;
        match name {
            "wipe" => Ok(()),
            "model" => {
                let ok = args.len() == 5
                    && args[0] == Arg::Str("basic".into())
                    && args[1] == Arg::Str("-ndm".into())
                    && matches!(args[2], Arg::Num { value, .. } if value == 2.0)
                    && args[3] == Arg::Str("-ndf".into())
                    && matches!(args[4], Arg::Num { value, .. } if value == 3.0);
                if !ok {
                    return self.err(C::Other, "only the 2D model with 3 DOFs per node is supported");
                }
                self.model_defined = true;
                Ok(())
            }
            "node" => self.node(args, comment),
            "fix" => self.fix(args),
            "geomTransf" => {
                if args.len() != 2 {
                    return self.err(C::ElementDefinition, "geomTransf expects a type and a tag");
                }
                let kind = self.string(&args[0], C::ElementDefinition, "transformation type")?;
                if !matches!(kind, "Linear" | "PDelta" | "Corotational") {
                    return self.err(C::ElementDefinition, format!("unknown transformation type '{kind}'"));
                }
                let tag = self.int(&args[1], C::ElementDefinition, "transformation tag")?;
                self.transforms.insert(tag);
                Ok(())
            }
            "element" => self.element(args, comment),
            "timeSeries" => {
                if args.len() < 2 {
                    return self.err(C::LoadApplication, "timeSeries expects a type and a tag");
                }
                let kind = self.string(&args[0], C::LoadApplication, "time series type")?;
                if !matches!(kind, "Constant" | "Linear") {
                    return self.err(C::LoadApplication, format!("unsupported time series '{kind}'"));
                }
                let tag = self.int(&args[1], C::LoadApplication, "time series tag")?;
                self.series.insert(tag);
                Ok(())
            }
            "pattern" => {
                self.arity(args, 3, C::LoadApplication, "pattern")?;
                let kind = self.string(&args[0], C::LoadApplication, "pattern type")?;
                if kind != "Plain" {
                    return self.err(C::LoadApplication, format!("unsupported pattern '{kind}'"));
                }
                self.int(&args[1], C::LoadApplication, "pattern tag")?;
                let series = self.int(&args[2], C::LoadApplication, "time series tag")?;
                if !self.series.contains(&series) {
                    return self.err(
                        C::LoadApplication,
                        format!("pattern refers to undefined time series {series}"),
                    );
                }
                self.pattern_open = true;
                Ok(())
            }
            "load" => {
                if !self.pattern_open {
                    return self.err(C::LoadApplication, "load applied before any load pattern");
                }
                self.arity(args, 4, C::LoadApplication, "load")?;
                let node = NodeId(self.int(&args[0], C::LoadApplication, "loaded node")?);
                if !self.node_ids.contains(&node) {
                    return self.err(C::LoadApplication, format!("load on undefined node {node}"));
                }
                let fx = self.num(&args[1], C::LoadApplication, "Fx")?;
                let fy = self.num(&args[2], C::LoadApplication, "Fy")?;
                let mz = self.num(&args[3], C::LoadApplication, "Mz")?;
                self.loads.nodal.push(NodalLoad {
                    node_id: node,
                    fx,
                    fy,
                    mz,
                });
                Ok(())
            }
            "eleLoad" => {
                if !self.pattern_open {
                    return self.err(C::LoadApplication, "element load applied before any load pattern");
                }
                self.arity(args, 5, C::LoadApplication, "eleLoad")?;
                let shape_ok = args[0] == Arg::Str("-ele".into())
                    && args[2] == Arg::Str("-type".into())
                    && args[3] == Arg::Str("-beamUniform".into());
                if !shape_ok {
                    return self.err(
                        C::LoadApplication,
                        "only '-ele <id> -type -beamUniform <w>' loads are supported",
                    );
                }
                let element = ElementId(self.int(&args[1], C::LoadApplication, "loaded element")?);
                if !self.element_ids.contains(&element) {
                    return self.err(C::LoadApplication, format!("load on undefined element {element}"));
                }
                let w = self.num(&args[4], C::LoadApplication, "line load")?;
                self.loads.member.push(MemberUdl { element_id: element, w });
                Ok(())
            }
            "constraints" | "numberer" | "system" | "algorithm" | "integrator" | "analysis" => {
                let Some(first) = args.first() else {
                    return self.err(C::Other, format!("{name} expects a type"));
                };
                let value = self.string(first, C::Other, name)?.to_string();
                match name {
                    "constraints" => self.config.constraints = value,
                    "numberer" => self.config.numberer = value,
                    "system" => self.config.system = value,
                    "algorithm" => self.config.algorithm = value,
                    "integrator" => self.config.integrator = value,
                    _ if value == "Static" => {}
                    _ => return self.err(C::Other, format!("unsupported analysis type '{value}'")),
                }
                Ok(())
            }
            "analyze" => {
                self.arity(args, 1, C::Other, "analyze")?;
                let steps = self.int(&args[0], C::Other, "step count")?;
                if steps == 0 {
                    return self.err(C::Other, "step count must be at least 1");
                }
                self.config.steps = steps;
                Ok(())
            }
            other => {
                self.warn(format!("unsupported command `{other}`"));
                Ok(())
            }
        }
    }

    fn node(&mut self, args: &[Arg], comment: Option<&str>) -> Step {
        use ErrorCategory as C;
        if !self.model_defined {
            return self.err(C::NodeDefinition, "node defined before the model command");
        }
        self.arity(args, 3, C::NodeDefinition, "node")?;
        let id = NodeId(self.int(&args[0], C::NodeDefinition, "node id")?);
        let x = self.num(&args[1], C::NodeDefinition, "node x")?;
        let y = self.num(&args[2], C::NodeDefinition, "node y")?;
        if !self.node_ids.insert(id) {
            return self.err(C::NodeDefinition, format!("duplicate node id {id}"));
        }
        self.model
            .nodes
            .push(Node::new(id.0, x, y, comment.unwrap_or_default()));
        Ok(())
    }

    fn fix(&mut self, args: &[Arg]) -> Step {
        use ErrorCategory as C;
        self.arity(args, 4, C::SupportConditions, "fix")?;
        let node = NodeId(self.int(&args[0], C::SupportConditions, "support node id")?);
        if !self.node_ids.contains(&node) {
            return self.err(C::SupportConditions, format!("support on undefined node {node}"));
        }
        let mut flags = [false; 3];
        for (k, a) in args[1..].iter().enumerate() {
            flags[k] = match a {
                Arg::Num { value, integer: true } if *value == 0.0 || *value == 1.0 => *value == 1.0,
                other => {
                    return self.err(
                        C::SupportConditions,
                        format!("fixity flag must be 0 or 1, got {}", other.describe()),
                    )
                }
            };
        }
        if self.model.support(node).is_some() {
            return self.err(C::SupportConditions, format!("node {node} is fixed twice"));
        }
        self.model.supports.push(SupportConstraint {
            node_id: node,
            fixity: Fixity {
                ux: flags[0],
                uy: flags[1],
                rz: flags[2],
            },
        });
        Ok(())
    }

    fn element(&mut self, args: &[Arg], comment: Option<&str>) -> Step {
        use ErrorCategory as C;
        let Some(first) = args.first() else {
            return self.err(C::ElementDefinition, "element without a type");
        };
        let kind_name = self.string(first, C::ElementDefinition, "element type")?;
        if kind_name != "elasticBeamColumn" {
            return self.err(C::ElementDefinition, format!("unsupported element type '{kind_name}'"));
        }
        self.arity(args, 8, C::ElementDefinition, "elasticBeamColumn")?;
        let id = ElementId(self.int(&args[1], C::ElementDefinition, "element id")?);
        let i = NodeId(self.int(&args[2], C::ElementDefinition, "element node")?);
        let j = NodeId(self.int(&args[3], C::ElementDefinition, "element node")?);
        for n in [i, j] {
            if !self.node_ids.contains(&n) {
                return self.err(C::ElementDefinition, format!("element {id} uses undefined node {n}"));
            }
        }
        let transf = self.int(&args[7], C::ElementDefinition, "transformation tag")?;
        if !self.transforms.contains(&transf) {
            return self.err(
                C::ElementDefinition,
                format!("element {id} uses undefined transformation {transf}"),
            );
        }
        if self.element_ids.contains(&id) {
            return self.err(C::ElementDefinition, format!("duplicate element id {id}"));
        }

        let (a, b) = (
            self.model.node(i).expect("checked above").clone(),
            self.model.node(j).expect("checked above").clone(),
        );
        let (dx, dy) = ((b.x - a.x).abs(), (b.y - a.y).abs());
        let orientation = match (dx <= COORD_TOLERANCE, dy <= COORD_TOLERANCE) {
            (true, false) => ElementKind::Column,
            (false, true) => ElementKind::Girder,
            (true, true) => return self.err(C::GeometryTopology, format!("element {id} has zero length")),
            (false, false) => {
                return self.err(
                    C::GeometryTopology,
                    format!("element {id} is neither vertical nor horizontal"),
                )
            }
        };

        let named_kind = |arg: &Arg| match arg {
            Arg::Ident(n) if n == "A_col" || n == "I_col" => Some(ElementKind::Column),
            Arg::Ident(n) if n == "A_gir" || n == "I_gir" => Some(ElementKind::Girder),
            _ => None,
        };
        for (arg, slot) in [(&args[4], "area"), (&args[6], "inertia")] {
            if let Some(k) = named_kind(arg) {
                if k != orientation {
                    return self.err(
                        C::MaterialProperties,
                        format!(
                            "element {id} is a {orientation:?} but its {slot} is `{}`",
                            arg.describe()
                        ),
                    );
                }
            }
        }
        let area = self.num(&args[4], C::MaterialProperties, "section area")?;
        let e = self.num(&args[5], C::MaterialProperties, "elastic modulus")?;
        let inertia = self.num(&args[6], C::MaterialProperties, "moment of inertia")?;
        if area <= 0.0 || e <= 0.0 || inertia <= 0.0 {
            return self.err(
                C::MaterialProperties,
                format!("element {id} has non-positive section values"),
            );
        }
        let (a_name, i_name) = section_names(orientation);
        self.record_material("E", e)?;
        self.record_material(a_name, area)?;
        self.record_material(i_name, inertia)?;

        self.element_ids.insert(id);
        self.model
            .elements
            .push(Element::new(id.0, i.0, j.0, orientation, comment.unwrap_or_default()));
        Ok(())
    }
}

fn parse_id_list<T>(text: &str, wrap: fn(u32) -> T) -> Option<Vec<T>> {
    let inner = text.trim().strip_prefix('[')?.strip_suffix(']')?;
    if inner.trim().is_empty() {
        return Some(Vec::new());
    }
    inner.split(',').map(|p| p.trim().parse().ok().map(wrap)).collect()
}

/// Reads a `# step ...` comment back into a construction step.
fn parse_step_comment(text: &str) -> Option<ConstructionStep> {
    let rest = text.strip_prefix("step ")?;
    let (num, rest) = rest.split_once(": ")?;
    let rest = rest.strip_prefix("bay ")?;
    let (bay, rest) = rest.split_once(", story ")?;
    let (story, rest) = rest.split_once(", ")?;
    let (rule, rest) = rest.split_once(", nodes ")?;
    let (nodes, rest) = rest.split_once(", elements ")?;
    let (elements, supports) = rest.split_once(", supports ")?;
    Some(ConstructionStep {
        step: num.parse().ok()?,
        bay: bay.parse().ok()?,
        story: story.parse().ok()?,
        rule: Rule::parse(rule)?,
        added_nodes: parse_id_list(nodes, NodeId)?,
        added_elements: parse_id_list(elements, ElementId)?,
        added_supports: parse_id_list(supports, NodeId)?,
    })
}

pub fn parse_script(text: &str) -> Result<ParsedScript, ScriptError> {
    let mut p = Parser {
        line: 0,
        alias: Some("ops".into()),
        model_defined: false,
        vars: HashMap::new(),
        material: MaterialDraft::default(),
        model: TopologyModel::default(),
        node_ids: HashSet::new(),
        element_ids: HashSet::new(),
        transforms: HashSet::new(),
        series: HashSet::new(),
        pattern_open: false,
        loads: LoadSet::default(),
        config: AnalysisConfig::default(),
        warnings: Vec::new(),
    };
    for (k, raw) in text.lines().enumerate() {
        p.line = k + 1;
        let (code, comment) = split_comment(raw);
        if code.trim().is_empty() {
            if let Some(step) = comment.and_then(parse_step_comment) {
                p.model.steps.push(step);
            }
            continue;
        }
        p.statement(code, comment)?;
    }
    Ok(ParsedScript {
        model: p.model,
        loads: p.loads,
        material: p.material.finish(),
        config: p.config,
        warnings: p.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_topology;
    use crate::loads::derive_loads;
    use crate::problem::{BaySpec, FrameProblem, LoadSpecification, SupportKind};

    fn reference() -> FrameProblem {
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

    fn emit(p: &FrameProblem) -> (TopologyModel, LoadSet, ScriptDocument) {
        let m = build_topology(p).unwrap();
        let l = derive_loads(p, &m).unwrap();
        let doc = emit_script(&m, &l, &p.material, &AnalysisConfig::default());
        (m, l, doc)
    }

    #[test]
    fn statement_counts_for_reference_frame() {
        let (_, _, doc) = emit(&reference());
        assert_eq!(doc.count(StatementKind::NodeDef), 16);
        assert_eq!(doc.count(StatementKind::Fix), 4);
        assert_eq!(doc.count(StatementKind::ElementDef), 20);
        assert_eq!(doc.count(StatementKind::NodalLoadCmd), 3);
        assert_eq!(doc.count(StatementKind::EleLoadCmd), 8);
        assert!(doc.text.contains("ops.node(3, 0, 5)  # Top left\n"));
        assert!(doc.text.contains("ops.load(3, 50000, 0, 0)\n"));
        assert!(doc.text.contains("'-beamUniform', -10000)\n"));
    }

    #[test]
    fn roundtrip_is_exact() {
        let p = reference();
        let (m, l, doc) = emit(&p);
        let back = parse_script(&doc.text).unwrap();
        assert_eq!(back.model, m);
        assert_eq!(back.loads, l);
        assert_eq!(back.material, p.material);
        assert_eq!(back.config, AnalysisConfig::default());
        assert!(back.warnings.is_empty());
        let again = emit_script(&back.model, &back.loads, &back.material, &back.config);
        assert_eq!(again.text, doc.text);
    }

    #[test]
    fn unloaded_script_keeps_analysis_block() {
        let mut p = reference();
        p.loads = LoadSpecification::unloaded();
        let (_, _, doc) = emit(&p);
        assert_eq!(doc.count(StatementKind::Pattern), 0);
        assert_eq!(doc.count(StatementKind::AnalysisCmd), 7);
        assert!(doc.text.ends_with("ops.analyze(1)\n"));
    }

    fn category_of(text: &str) -> ErrorCategory {
        parse_script(text).unwrap_err().category
    }

    #[test]
    fn defect_categories() {
        let (_, _, doc) = emit(&reference());
        let t = &doc.text;
        assert_eq!(
            category_of(&t.replacen("'elasticBeamColumn'", "'elasticBeam'", 1)),
            ErrorCategory::ElementDefinition
        );
        assert_eq!(
            category_of(&t.replacen("ops.node(2, 6, 0)", "ops.node(2.5, 6, 0)", 1)),
            ErrorCategory::NodeDefinition
        );
        assert_eq!(
            category_of(&t.replacen("ops.node(2, 6, 0)", "ops.node(1, 6, 0)", 1)),
            ErrorCategory::NodeDefinition
        );
        assert_eq!(
            category_of(&t.replacen("ops.fix(1,", "ops.fix('1',", 1)),
            ErrorCategory::SupportConditions
        );
        assert_eq!(
            category_of(&t.replacen("A_col, E, I_col", "A_col, E, I_gir", 1)),
            ErrorCategory::MaterialProperties
        );
        let no_pattern: String = t
            .lines()
            .filter(|l| !l.starts_with("ops.timeSeries") && !l.starts_with("ops.pattern"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert_eq!(category_of(&no_pattern), ErrorCategory::LoadApplication);
    }

    #[test]
    fn foreign_script_with_literals() {
        let text = "\
from openseespy.opensees import *
model('basic', '-ndm', 2, '-ndf', 3)
node(1, 0.0, 0.0)
node(2, 0.0, 3.0)
fix(1, 1, 1, 1)
geomTransf('Linear', 7)
element('elasticBeamColumn', 1, 1, 2, 0.002, 2e11, 1.6e-5, 7)
recorder('Node', '-file', 'out.txt')
";
        let parsed = parse_script(text).unwrap();
        assert_eq!(parsed.model.elements[0].kind, ElementKind::Column);
        assert_eq!(parsed.material.a_col, 0.002);
        assert_eq!(parsed.warnings.len(), 1);
        assert_eq!(parsed.warnings[0].line, 8);
    }

    #[test]
    fn diagonal_element_is_topology_error() {
        let text = "\
import openseespy.opensees as ops
ops.model('basic', '-ndm', 2, '-ndf', 3)
ops.node(1, 0, 0)
ops.node(2, 6, 3)
ops.geomTransf('Linear', 1)
ops.element('elasticBeamColumn', 1, 1, 2, 0.01, 2e11, 1e-4, 1)
";
        let err = parse_script(text).unwrap_err();
        assert_eq!(err.category, ErrorCategory::GeometryTopology);
        assert_eq!(err.line, 6);
    }

    #[test]
    fn comments_and_quotes() {
        assert_eq!(
            split_comment("ops.node(1, 0, 0)  # a # b"),
            ("ops.node(1, 0, 0)", Some("a # b"))
        );
        assert_eq!(split_comment("x = '#'"), ("x = '#'", None));
        assert_eq!(
            split_args("'a,b', 1, -2.5e3, E").unwrap(),
            vec![
                Arg::Str("a,b".into()),
                Arg::Num {
                    value: 1.0,
                    integer: true
                },
                Arg::Num {
                    value: -2500.0,
                    integer: false
                },
                Arg::Ident("E".into()),
            ]
        );
    }
}
