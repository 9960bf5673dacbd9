//! Panels: one equi-phase picture per parameter value, written as CSV and SVG
//! with a JSON manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{trace_equiphase, PhaseContourSet, PhaseError};
use crate::dislocation::{trace_dislocation_3d, Region};
use crate::fieldlang::{FieldDef, Params};

pub const MAX_PANELS: usize = 64;
const SVG_WIDTH: f64 = 480.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Svg,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Svg => "svg",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelSpec {
    pub field: FieldDef,
    /// Parameter overrides of each panel, on top of `base`.
    pub grid: Vec<Params>,
    pub base: Params,
    pub levels: Vec<f64>,
    pub region: Region,
    pub formats: Vec<OutputFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelEntry {
    pub index: usize,
    pub params: Params,
    pub files: Vec<String>,
    /// Zeros of a planar field; empty for spatial fields.
    pub zeros: Vec<Vec<f64>>,
    pub zero_count: usize,
    /// Number of zero curves of a spatial field.
    pub zero_curves: Option<usize>,
    pub polylines: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelManifest {
    pub field: String,
    pub expression: String,
    pub region: Region,
    pub levels: Vec<f64>,
    pub panels: Vec<PanelEntry>,
}

/// `<field>_<p>=<v>[_<q>=<w>…]`, parameters in name order.
pub fn panel_stem(field: &str, params: &Params) -> String {
    let mut s = field.to_string();
    for (k, v) in params {
        let _ = write!(s, "_{k}={v}");
    }
    s
}

fn svg(set: &PanelContext) -> String {
    let r = &set.contours.region;
    let (x0, x1, y0, y1) = (r.lower[0], r.upper[0], r.lower[1], r.upper[1]);
    let height = SVG_WIDTH * (y1 - y0) / (x1 - x0);
    let sx = |x: f64| (x - x0) / (x1 - x0) * SVG_WIDTH;
    let sy = |y: f64| (y1 - y) / (y1 - y0) * height;
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_WIDTH}" height="{height:.3}" viewBox="0 0 {SVG_WIDTH} {height:.3}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", set.title);
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{SVG_WIDTH}" height="{height:.3}" fill="white" stroke="black"/>"#);
    for c in &set.contours.contours {
        let hue = (c.level.rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU * 360.0).round();
        for line in &c.polylines {
            let d: Vec<String> = line.iter().enumerate().map(|(i, p)| format!("{}{:.3},{:.3}", if i == 0 { "M" } else { "L" }, sx(p[0]), sy(p[1]))).collect();
            let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="hsl({hue},80%,40%)" stroke-width="1"/>"#, d.join(" "));
        }
    }
    for z in &set.contours.zeros {
        let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="4" fill="black"/>"#, sx(z[0]), sy(z[1]));
    }
    out.push_str("</svg>\n");
    out
}

struct PanelContext {
    title: String,
    contours: PhaseContourSet,
    zero_curves: Option<usize>,
}

/// Renders every panel of `spec` into `out_dir` and writes `manifest.json`.
/// An empty parameter grid writes nothing.
pub fn render_panels(spec: &PanelSpec, out_dir: &Path) -> Result<PanelManifest, PhaseError> {
    if spec.grid.len() > MAX_PANELS {
        return Err(PhaseError::TooManyPanels(spec.grid.len()));
    }
    if spec.levels.is_empty() {
        return Err(PhaseError::NoLevels);
    }
    let mut manifest = PanelManifest {
        field: spec.field.name.clone(),
        expression: spec.field.expr.to_string(),
        region: spec.region.clone(),
        levels: spec.levels.clone(),
        panels: Vec::new(),
    };
    if spec.grid.is_empty() {
        return Ok(manifest);
    }
    let rendered: Vec<PanelContext> = spec
        .grid
        .par_iter()
        .map(|over| {
            let mut p = spec.base.clone();
            p.extend(over.iter().map(|(k, v)| (k.clone(), *v)));
            let contours = trace_equiphase(&spec.field, &spec.region, &spec.levels, &p)?;
            let zero_curves = if spec.field.dim == 3 { Some(trace_dislocation_3d(&spec.field, &spec.region, &p)?.curves.len()) } else { None };
            Ok(PanelContext { title: panel_stem(&spec.field.name, over), contours, zero_curves })
        })
        .collect::<Result<_, PhaseError>>()?;
    fs::create_dir_all(out_dir).map_err(|source| PhaseError::Io { path: out_dir.display().to_string(), source })?;
    for (index, (ctx, over)) in rendered.iter().zip(&spec.grid).enumerate() {
        let mut files = Vec::new();
        for fmt in &spec.formats {
            let text = match fmt {
                OutputFormat::Csv => ctx.contours.to_csv()?,
                OutputFormat::Svg => svg(ctx),
            };
            let name = format!("{}.{}", ctx.title, fmt.extension());
            let path = out_dir.join(&name);
            fs::write(&path, text).map_err(|source| PhaseError::Io { path: path.display().to_string(), source })?;
            files.push(name);
        }
        manifest.panels.push(PanelEntry {
            index,
            params: over.clone(),
            files,
            zeros: ctx.contours.zeros.clone(),
            zero_count: ctx.zero_curves.unwrap_or(ctx.contours.zeros.len()),
            zero_curves: ctx.zero_curves,
            polylines: ctx.contours.polyline_count(),
        });
    }
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| PhaseError::Format(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|source| PhaseError::Io { path: path.display().to_string(), source })?;
    Ok(manifest)
}
