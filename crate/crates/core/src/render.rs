//! Static SVG drawings of a frame: geometry, loads and the three internal
//! force diagrams.
//!
//! Output is byte-deterministic for identical inputs. Drawing coordinates
//! are pixels with y pointing down; the model is flipped so +y is up.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::loads::LoadSet;
use crate::model::{ElementKind, Fixity, TopologyModel};
use crate::solver::{internal_forces, AnalysisResult, InternalForceDiagram};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("{0:?} diagrams need an analysis result")]
    MissingResult(RenderKind),
    #[error("render scales must be positive")]
    InvalidScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RenderKind {
    Geometry,
    Loads,
    Axial,
    Shear,
    Moment,
}

impl RenderKind {
    pub const ALL: [RenderKind; 5] = [
        RenderKind::Geometry,
        RenderKind::Loads,
        RenderKind::Axial,
        RenderKind::Shear,
        RenderKind::Moment,
    ];

    /// File stem used for artifacts.
    pub fn file_stem(self) -> &'static str {
        match self {
            RenderKind::Geometry => "geometry",
            RenderKind::Loads => "loads",
            RenderKind::Axial => "axial",
            RenderKind::Shear => "shear",
            RenderKind::Moment => "moment",
        }
    }

    pub fn needs_result(self) -> bool {
        matches!(self, RenderKind::Axial | RenderKind::Shear | RenderKind::Moment)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub kind: RenderKind,
    /// Pixels per metre.
    pub geometry_scale: f64,
    /// Metres of drawing per unit force; `None` scales the largest ordinate
    /// to [`AUTO_ORDINATE_FRACTION`] of the larger frame dimension.
    pub ordinate_scale: Option<f64>,
    pub node_ids: bool,
    pub element_ids: bool,
}

pub const AUTO_ORDINATE_FRACTION: f64 = 0.15;
pub const DEFAULT_GEOMETRY_SCALE: f64 = 40.0;
const MARGIN: f64 = 60.0;
const NODE_RADIUS: f64 = 3.5;
const ARROW: f64 = 40.0;
const COMB: f64 = 24.0;

impl RenderSpec {
    pub fn new(kind: RenderKind) -> Self {
        RenderSpec {
            kind,
            geometry_scale: DEFAULT_GEOMETRY_SCALE,
            ordinate_scale: None,
            node_ids: true,
            element_ids: false,
        }
    }
}

/// Fixed two-decimal coordinate text without trailing zeros or `-0`.
fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Force value in kilo-units with up to two decimals.
fn kilo(v: f64) -> String {
    num(v / 1000.0)
}

struct Canvas {
    min_x: f64,
    max_y: f64,
    scale: f64,
    pad: f64,
    width: f64,
    height: f64,
}

impl Canvas {
    fn new(model: &TopologyModel, scale: f64, pad: f64) -> Canvas {
        let (min_x, min_y, max_x, max_y) = model.bounds();
        Canvas {
            min_x,
            max_y,
            scale,
            pad,
            width: (max_x - min_x) * scale + 2.0 * pad,
            height: (max_y - min_y) * scale + 2.0 * pad,
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.pad + (x - self.min_x) * self.scale,
            self.pad + (self.max_y - y) * self.scale,
        )
    }
}

fn header(out: &mut String, c: &Canvas, title: &str) {
    let (w, h) = (num(c.width), num(c.height));
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, "<title>{title}</title>");
    let _ = writeln!(out, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);
}

fn members(out: &mut String, c: &Canvas, model: &TopologyModel, labels: bool, stroke: &str) {
    let _ = writeln!(out, r#"<g id="members" stroke="{stroke}" stroke-width="2">"#);
    for e in &model.elements {
        let Some(((x1, y1), (x2, y2))) = model.segment(e) else {
            continue;
        };
        let (a, b) = (c.px(x1, y1), c.px(x2, y2));
        let kind = match e.kind {
            ElementKind::Column => "column",
            ElementKind::Girder => "girder",
        };
        let _ = writeln!(
            out,
            r#"<line class="member {kind}" data-id="{}" x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            e.id,
            num(a.0),
            num(a.1),
            num(b.0),
            num(b.1)
        );
    }
    let _ = writeln!(out, "</g>");
    if labels {
        let _ = writeln!(
            out,
            r##"<g id="element-labels" font-family="sans-serif" font-size="10" fill="#1f4e9a" text-anchor="middle">"##
        );
        for e in &model.elements {
            let Some(((x1, y1), (x2, y2))) = model.segment(e) else {
                continue;
            };
            let (mx, my) = c.px((x1 + x2) / 2.0, (y1 + y2) / 2.0);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}">{}</text>"#,
                num(mx + 6.0),
                num(my - 4.0),
                e.id
            );
        }
        let _ = writeln!(out, "</g>");
    }
}

fn supports(out: &mut String, c: &Canvas, model: &TopologyModel) {
    let _ = writeln!(
        out,
        r##"<g id="supports" stroke="#000000" stroke-width="1.5" fill="none">"##
    );
    for s in &model.supports {
        let Some(n) = model.node(s.node_id) else { continue };
        let (x, y) = c.px(n.x, n.y);
        let _ = writeln!(out, r#"<g class="support" data-node="{}">"#, s.node_id);
        if s.fixity == Fixity::FIXED {
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                num(x - 14.0),
                num(y),
                num(x + 14.0),
                num(y)
            );
            for k in 0..5 {
                let hx = x - 12.0 + 6.0 * k as f64;
                let _ = writeln!(
                    out,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                    num(hx),
                    num(y),
                    num(hx - 6.0),
                    num(y + 8.0)
                );
            }
        } else {
            let _ = writeln!(
                out,
                r#"<polygon points="{},{} {},{} {},{}"/>"#,
                num(x),
                num(y),
                num(x - 9.0),
                num(y + 14.0),
                num(x + 9.0),
                num(y + 14.0)
            );
            let _ = writeln!(
                out,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
                num(x - 14.0),
                num(y + 14.0),
                num(x + 14.0),
                num(y + 14.0)
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");
}

fn nodes(out: &mut String, c: &Canvas, model: &TopologyModel, labels: bool) {
    let _ = writeln!(out, r##"<g id="nodes" fill="#000000">"##);
    for n in &model.nodes {
        let (x, y) = c.px(n.x, n.y);
        let _ = writeln!(
            out,
            r#"<circle class="node" data-id="{}" cx="{}" cy="{}" r="{}"/>"#,
            n.id,
            num(x),
            num(y),
            num(NODE_RADIUS)
        );
    }
    let _ = writeln!(out, "</g>");
    if labels {
        let _ = writeln!(
            out,
            r##"<g id="node-labels" font-family="sans-serif" font-size="11" fill="#9a1f1f">"##
        );
        for n in &model.nodes {
            let (x, y) = c.px(n.x, n.y);
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}">{}</text>"#,
                num(x + 5.0),
                num(y - 5.0),
                n.id
            );
        }
        let _ = writeln!(out, "</g>");
    }
}

/// Arrow ending at `tip` pointing along the unit drawing vector `(ux, uy)`.
fn arrow(out: &mut String, tip: (f64, f64), dir: (f64, f64), len: f64) {
    let tail = (tip.0 - dir.0 * len, tip.1 - dir.1 * len);
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
        num(tail.0),
        num(tail.1),
        num(tip.0),
        num(tip.1)
    );
    let (px, py) = (-dir.1, dir.0);
    let base = (tip.0 - dir.0 * 8.0, tip.1 - dir.1 * 8.0);
    let _ = writeln!(
        out,
        r#"<polygon points="{},{} {},{} {},{}"/>"#,
        num(tip.0),
        num(tip.1),
        num(base.0 + px * 3.5),
        num(base.1 + py * 3.5),
        num(base.0 - px * 3.5),
        num(base.1 - py * 3.5)
    );
}

fn unit(x: f64, y: f64) -> Option<(f64, f64)> {
    let l = x.hypot(y);
    (l > 0.0).then(|| (x / l, y / l))
}

fn draw_loads(out: &mut String, c: &Canvas, model: &TopologyModel, loads: &LoadSet) {
    let _ = writeln!(
        out,
        r##"<g id="nodal-loads" stroke="#c0392b" fill="#c0392b" stroke-width="1.5" font-family="sans-serif" font-size="11">"##
    );
    for l in &loads.nodal {
        let Some(n) = model.node(l.node_id) else { continue };
        let tip = c.px(n.x, n.y);
        // drawing y points down
        let Some(dir) = unit(l.fx, -l.fy) else { continue };
        let _ = writeln!(out, r#"<g class="nodal-load" data-node="{}">"#, l.node_id);
        arrow(out, tip, dir, ARROW);
        let label = (tip.0 - dir.0 * (ARROW + 4.0), tip.1 - dir.1 * (ARROW + 4.0) - 4.0);
        let magnitude = l.fx.hypot(l.fy);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" stroke="none" text-anchor="middle">{} kN</text>"#,
            num(label.0),
            num(label.1),
            kilo(magnitude)
        );
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(
        out,
        r##"<g id="member-loads" stroke="#2e6fba" fill="#2e6fba" stroke-width="1" font-family="sans-serif" font-size="10">"##
    );
    for l in &loads.member {
        let Some(e) = model.element(l.element_id) else { continue };
        let Some(((x1, y1), (x2, y2))) = model.segment(e) else {
            continue;
        };
        let len = (x2 - x1).hypot(y2 - y1);
        // global load direction of w along local y, in drawing axes
        let (gx, gy) = (-l.w * (y2 - y1) / len, l.w * (x2 - x1) / len);
        let Some(dir) = unit(gx, -gy) else { continue };
        let (a, b) = (c.px(x1, y1), c.px(x2, y2));
        let count = ((len * c.scale / 20.0).round() as usize).max(2);
        let _ = writeln!(out, r#"<g class="member-load" data-element="{}">"#, l.element_id);
        let off = |p: (f64, f64)| (p.0 - dir.0 * COMB, p.1 - dir.1 * COMB);
        let (ta, tb) = (off(a), off(b));
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#,
            num(ta.0),
            num(ta.1),
            num(tb.0),
            num(tb.1)
        );
        for k in 0..=count {
            let t = k as f64 / count as f64;
            let tip = (a.0 + (b.0 - a.0) * t, a.1 + (b.1 - a.1) * t);
            arrow(out, tip, dir, COMB);
        }
        let mid = ((ta.0 + tb.0) / 2.0 - dir.0 * 6.0, (ta.1 + tb.1) / 2.0 - dir.1 * 6.0);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" stroke="none" text-anchor="middle">{} kN/m</text>"#,
            num(mid.0),
            num(mid.1),
            kilo(l.w.abs())
        );
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</g>");
}

fn diagram_value(kind: RenderKind, d: &InternalForceDiagram, x: f64) -> f64 {
    match kind {
        RenderKind::Axial => d.n_at(x),
        RenderKind::Shear => d.v_at(x),
        _ => d.m_at(x),
    }
}

fn draw_diagrams(
    out: &mut String,
    c: &Canvas,
    model: &TopologyModel,
    diagrams: &[InternalForceDiagram],
    kind: RenderKind,
    ordinate_scale: Option<f64>,
) {
    let peak = diagrams
        .iter()
        .flat_map(|d| d.stations.iter().map(move |&x| diagram_value(kind, d, x).abs()))
        .fold(0.0, f64::max);
    let (min_x, min_y, max_x, max_y) = model.bounds();
    let extent = (max_x - min_x).max(max_y - min_y);
    let scale = match ordinate_scale {
        Some(s) => s,
        None if peak > 0.0 => AUTO_ORDINATE_FRACTION * extent / peak,
        None => 0.0,
    };
    let (fill, stroke) = match kind {
        RenderKind::Axial => ("#8e44ad", "#5b2c6f"),
        RenderKind::Shear => ("#27ae60", "#196f3d"),
        _ => ("#e67e22", "#a04000"),
    };
    let _ = writeln!(
        out,
        r#"<g id="diagrams" fill="{fill}" fill-opacity="0.35" stroke="{stroke}" stroke-width="1">"#
    );
    for d in diagrams {
        let Some(e) = model.element(d.element_id) else { continue };
        let Some(((x1, y1), (x2, y2))) = model.segment(e) else {
            continue;
        };
        let (ux, uy) = ((x2 - x1) / d.length, (y2 - y1) / d.length);
        // moments are drawn on the tension side, the others along local +y
        let side = if kind == RenderKind::Moment { -1.0 } else { 1.0 };
        let (nx, ny) = (-uy * side, ux * side);
        let mut pts = vec![c.px(x1, y1)];
        for &s in &d.stations {
            let v = diagram_value(kind, d, s) * scale;
            pts.push(c.px(x1 + ux * s + nx * v, y1 + uy * s + ny * v));
        }
        pts.push(c.px(x2, y2));
        let points: Vec<String> = pts.iter().map(|p| format!("{},{}", num(p.0), num(p.1))).collect();
        let _ = writeln!(
            out,
            r#"<polygon class="diagram" data-element="{}" points="{}"/>"#,
            d.element_id,
            points.join(" ")
        );
    }
    let _ = writeln!(out, "</g>");

    let (label, unit) = match kind {
        RenderKind::Axial => ("Axial force", "kN"),
        RenderKind::Shear => ("Shear force", "kN"),
        _ => ("Bending moment", "kN·m"),
    };
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="13">{label}, max |value| = {} {unit}</text>"#,
        num(10.0),
        num(20.0),
        kilo(peak)
    );
}

/// Draws one panel. Force kinds need `result`.
pub fn render(
    model: &TopologyModel,
    loads: &LoadSet,
    result: Option<&AnalysisResult>,
    spec: &RenderSpec,
) -> Result<String, RenderError> {
    let positive = |v: f64| v > 0.0;
    if !positive(spec.geometry_scale) || spec.ordinate_scale.is_some_and(|s| !positive(s)) {
        return Err(RenderError::InvalidScale);
    }
    let (min_x, min_y, max_x, max_y) = model.bounds();
    let extent = (max_x - min_x).max(max_y - min_y);
    let pad = MARGIN + AUTO_ORDINATE_FRACTION * extent * spec.geometry_scale;
    let c = Canvas::new(model, spec.geometry_scale, pad);
    let mut out = String::new();
    let title = match spec.kind {
        RenderKind::Geometry => "Frame geometry",
        RenderKind::Loads => "Load pattern",
        RenderKind::Axial => "Axial force diagram",
        RenderKind::Shear => "Shear force diagram",
        RenderKind::Moment => "Bending moment diagram",
    };
    match spec.kind {
        RenderKind::Geometry => {
            header(&mut out, &c, title);
            members(&mut out, &c, model, spec.element_ids, "#000000");
            supports(&mut out, &c, model);
            nodes(&mut out, &c, model, spec.node_ids);
        }
        RenderKind::Loads => {
            header(&mut out, &c, title);
            members(&mut out, &c, model, spec.element_ids, "#000000");
            supports(&mut out, &c, model);
            nodes(&mut out, &c, model, false);
            draw_loads(&mut out, &c, model, loads);
        }
        kind => {
            let result = result.ok_or(RenderError::MissingResult(kind))?;
            let diagrams = internal_forces(result, model, loads);
            header(&mut out, &c, title);
            members(&mut out, &c, model, spec.element_ids, "#7f7f7f");
            supports(&mut out, &c, model);
            draw_diagrams(&mut out, &c, model, &diagrams, kind, spec.ordinate_scale);
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// All five panels in [`RenderKind::ALL`] order.
pub fn render_all(
    model: &TopologyModel,
    loads: &LoadSet,
    result: &AnalysisResult,
) -> Result<Vec<(RenderKind, String)>, RenderError> {
    RenderKind::ALL
        .iter()
        .map(|&k| render(model, loads, Some(result), &RenderSpec::new(k)).map(|svg| (k, svg)))
        .collect()
}
