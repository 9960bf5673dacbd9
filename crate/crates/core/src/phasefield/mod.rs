//! Equi-phase curves `arg ψ = θ` and figure panels built from them.

mod panels;

use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dislocation::{scan_zeros_2d, DislocationError, Region};
use crate::fieldlang::{EvalError, FieldDef, FieldError, Params, Program};

pub use panels::{render_panels, OutputFormat, PanelEntry, PanelManifest, PanelSpec, MAX_PANELS};

/// Phase accuracy every emitted vertex satisfies.
pub const TAU_PHASE: f64 = 1e-6;
const PROJECTION_STEPS: usize = 3;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("no phase levels given")]
    NoLevels,
    #[error("{0} panels requested, at most {MAX_PANELS} allowed")]
    TooManyPanels(usize),
    #[error("field has dimension {field}, region has dimension {region}")]
    DimMismatch { field: usize, region: usize },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("output: {0}")]
    Format(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Dislocation(#[from] DislocationError),
}

/// `n` levels `2πj/n`, `j = 0..n`.
pub fn equally_spaced_levels(n: usize) -> Vec<f64> {
    (0..n).map(|j| std::f64::consts::TAU * j as f64 / n as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelContours {
    pub level: f64,
    /// Each polyline is a list of points in field coordinates.
    pub polylines: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseContourSet {
    pub field: String,
    pub region: Region,
    pub params: Params,
    /// Height of the slice for spatial fields.
    pub slice_z: Option<f64>,
    pub contours: Vec<LevelContours>,
    /// Zeros of a planar field inside the region; contours keep away from them.
    pub zeros: Vec<Vec<f64>>,
    pub tau_zero: f64,
}

impl PhaseContourSet {
    pub fn polyline_count(&self) -> usize {
        self.contours.iter().map(|c| c.polylines.len()).sum()
    }

    /// Rows `level_rad,polyline_id,x,y[,z]`; ids run over all levels.
    pub fn to_csv(&self) -> Result<String, PhaseError> {
        let err = |e: csv::Error| PhaseError::Format(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["level_rad", "polyline_id", "x", "y"];
        if self.slice_z.is_some() {
            header.push("z");
        }
        w.write_record(&header).map_err(err)?;
        let mut id = 0usize;
        for c in &self.contours {
            for line in &c.polylines {
                for p in line {
                    let mut row = vec![c.level.to_string(), id.to_string()];
                    row.extend(p.iter().map(|v| v.to_string()));
                    w.write_record(&row).map_err(err)?;
                }
                id += 1;
            }
        }
        let bytes = w.into_inner().map_err(|e| PhaseError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| PhaseError::Format(e.to_string()))
    }
}

/// Planar sampling surface: the region itself, or the slice `z = z0` of a
/// spatial region.
struct Plane<'a> {
    prog: &'a Program,
    slice_z: Option<f64>,
}

impl Plane<'_> {
    fn point(&self, x: f64, y: f64) -> Vec<f64> {
        match self.slice_z {
            Some(z) => vec![x, y, z],
            None => vec![x, y],
        }
    }

    fn eval(&self, x: f64, y: f64) -> Result<Complex<f64>, EvalError> {
        self.prog.eval(&self.point(x, y))
    }

    /// Value and planar gradient of `ψ`.
    fn first_order(&self, x: f64, y: f64) -> Result<(Complex<f64>, [Complex<f64>; 2]), EvalError> {
        let s = self.prog.jet(&self.point(x, y), 1)?;
        let d = |a: usize| {
            let mut e = vec![0u8; s.nvars()];
            e[a] = 1;
            s.derivative_at_base(&e)
        };
        Ok((s.constant_term(), [d(0), d(1)]))
    }
}

fn phase_error(v: Complex<f64>, rot: Complex<f64>) -> f64 {
    (v * rot).arg().abs()
}

/// Newton steps on `Im(e^{-iθ}ψ) = 0` along its gradient. Returns the point
/// if it ends on the `θ` half-branch to within [`TAU_PHASE`] and away from
/// the zero set.
fn project(plane: &Plane, p: [f64; 2], rot: Complex<f64>, tau_zero: f64) -> Result<Option<[f64; 2]>, EvalError> {
    let mut p = p;
    for step in 0..=PROJECTION_STEPS {
        let (v, g) = plane.first_order(p[0], p[1])?;
        let w = v * rot;
        if w.norm() <= tau_zero {
            return Ok(None);
        }
        if phase_error(v, rot) < TAU_PHASE * 1e-3 || step == PROJECTION_STEPS {
            return Ok((phase_error(v, rot) < TAU_PHASE && w.re > 0.0).then_some(p));
        }
        let gu = [(g[0] * rot).im, (g[1] * rot).im];
        let n2 = gu[0] * gu[0] + gu[1] * gu[1];
        if n2 == 0.0 {
            return Ok(None);
        }
        p = [p[0] - w.im * gu[0] / n2, p[1] - w.im * gu[1] / n2];
    }
    unreachable!()
}

/// One crossing per grid edge; edges are keyed so that neighbouring cells
/// share them.
fn edge_key(horizontal: bool, i: usize, j: usize, ny: usize) -> usize {
    2 * (i * ny + j) + usize::from(!horizontal)
}

fn segments(plane: &Plane, region: &Region, values: &[Complex<f64>], rot: Complex<f64>) -> Result<Vec<([usize; 2], [[f64; 2]; 2])>, EvalError> {
    let (nx, ny) = (region.resolution[0], region.resolution[1]);
    let u = |i: usize, j: usize| (values[i * ny + j] * rot).im;
    let node = |i: usize, j: usize| [region.node(0, i), region.node(1, j)];
    let crossing = |a: (usize, usize), b: (usize, usize)| -> Option<[f64; 2]> {
        let (ua, ub) = (u(a.0, a.1), u(b.0, b.1));
        if (ua >= 0.0) == (ub >= 0.0) {
            return None;
        }
        let t = ua / (ua - ub);
        let (pa, pb) = (node(a.0, a.1), node(b.0, b.1));
        Some([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])])
    };
    let mut out = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let edges = [
                (edge_key(true, i, j, ny), crossing((i, j), (i + 1, j))),
                (edge_key(false, i + 1, j, ny), crossing((i + 1, j), (i + 1, j + 1))),
                (edge_key(true, i, j + 1, ny), crossing((i, j + 1), (i + 1, j + 1))),
                (edge_key(false, i, j, ny), crossing((i, j), (i, j + 1))),
            ];
            let hits: Vec<(usize, [f64; 2])> = edges.iter().filter_map(|(k, p)| p.map(|p| (*k, p))).collect();
            let pairs: Vec<[usize; 2]> = match hits.len() {
                2 => vec![[0, 1]],
                4 => {
                    let centre = 0.25 * (u(i, j) + u(i + 1, j) + u(i, j + 1) + u(i + 1, j + 1));
                    if (centre >= 0.0) == (u(i, j) >= 0.0) {
                        vec![[0, 1], [2, 3]]
                    } else {
                        vec![[0, 3], [1, 2]]
                    }
                }
                _ => vec![],
            };
            for [p, q] in pairs {
                let (a, b) = (hits[p].1, hits[q].1);
                let mid = plane.eval(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]))?;
                if (mid * rot).re > 0.0 {
                    out.push(([hits[p].0, hits[q].0], [a, b]));
                }
            }
        }
    }
    Ok(out)
}

/// Joins segments sharing an edge crossing into polylines: open chains first
/// (from their lowest free end), then closed loops.
fn chain(segs: &[([usize; 2], [[f64; 2]; 2])]) -> Vec<Vec<[f64; 2]>> {
    let mut at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (s, (keys, _)) in segs.iter().enumerate() {
        for k in keys {
            at.entry(*k).or_default().push(s);
        }
    }
    let mut used = vec![false; segs.len()];
    let mut lines = Vec::new();
    let walk = |start: usize, from_key: usize, used: &mut [bool]| {
        let mut line = Vec::new();
        let (mut s, mut key) = (start, from_key);
        loop {
            used[s] = true;
            let (keys, pts) = &segs[s];
            let (first, second, next_key) = if keys[0] == key { (pts[0], pts[1], keys[1]) } else { (pts[1], pts[0], keys[0]) };
            if line.is_empty() {
                line.push(first);
            }
            line.push(second);
            key = next_key;
            match at[&key].iter().find(|&&o| !used[o]) {
                Some(&o) => s = o,
                None => break,
            }
        }
        line
    };
    for (key, list) in &at {
        if list.len() == 1 && !used[list[0]] {
            lines.push(walk(list[0], *key, &mut used));
        }
    }
    for s in 0..segs.len() {
        if !used[s] {
            lines.push(walk(s, segs[s].0[0], &mut used));
        }
    }
    lines
}

fn level_contours(plane: &Plane, region: &Region, values: &[Complex<f64>], level: f64, zeros: &[Vec<f64>], tau_zero: f64) -> Result<LevelContours, EvalError> {
    let rot = Complex::from_polar(1.0, -level);
    let clip = 0.5 * region.cell_diagonal();
    let mut polylines = Vec::new();
    for raw in chain(&segments(plane, region, values, rot)?) {
        let mut current: Vec<Vec<f64>> = Vec::new();
        for p in raw {
            let kept = project(plane, p, rot, tau_zero)?.filter(|q| zeros.iter().all(|z| (q[0] - z[0]).hypot(q[1] - z[1]) > clip));
            match kept {
                Some(q) => current.push(plane.point(q[0], q[1])),
                None => {
                    if current.len() >= 2 {
                        polylines.push(std::mem::take(&mut current));
                    }
                    current.clear();
                }
            }
        }
        if current.len() >= 2 {
            polylines.push(current);
        }
    }
    Ok(LevelContours { level, polylines })
}

/// Equi-phase curves of a planar field, or of the slice through the middle
/// of a spatial region, for each level in `levels`.
///
/// Each curve is the half of `Im(e^{-iθ}ψ) = 0` on which `Re(e^{-iθ}ψ) > 0`:
/// marching squares on the grid with the sign test at segment midpoints,
/// then Newton projection of every vertex onto the level set. Vertices within
/// half a cell diagonal of a zero are removed.
pub fn trace_equiphase(def: &FieldDef, region: &Region, levels: &[f64], params: &Params) -> Result<PhaseContourSet, PhaseError> {
    if levels.is_empty() {
        return Err(PhaseError::NoLevels);
    }
    region.validate()?;
    let def = def.frozen(params)?;
    if def.dim != region.dim() {
        return Err(PhaseError::DimMismatch { field: def.dim, region: region.dim() });
    }
    let prog = def.compile(params)?;
    let slice_z = (def.dim == 3).then(|| 0.5 * (region.lower[2] + region.upper[2]));
    let plane = Plane { prog: &prog, slice_z };
    let flat = Region::new(region.lower[..2].to_vec(), region.upper[..2].to_vec(), region.resolution[..2].to_vec())?;
    let ny = flat.resolution[1];
    let values: Vec<Complex<f64>> = (0..flat.resolution[0] * ny)
        .into_par_iter()
        .map(|idx| plane.eval(flat.node(0, idx / ny), flat.node(1, idx % ny)))
        .collect::<Result<_, _>>()?;
    let sup = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (zeros, tau_zero) = if def.dim == 2 {
        let scan = scan_zeros_2d(&def, &flat, params)?;
        (scan.points.into_iter().map(|p| p.location).collect(), scan.tau_zero)
    } else {
        (Vec::new(), crate::dislocation::TAU_ZERO_REL * (1.0 + sup))
    };
    let contours = levels
        .par_iter()
        .map(|&level| level_contours(&plane, &flat, &values, level, &zeros, tau_zero))
        .collect::<Result<_, _>>()?;
    Ok(PhaseContourSet { field: def.name.clone(), region: region.clone(), params: params.clone(), slice_z, contours, zeros, tau_zero })
}
