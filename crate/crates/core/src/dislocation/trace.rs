//! Zero curves of spatial fields.
//!
//! Every grid cube is split into six tetrahedra sharing its main diagonal. On
//! each tetrahedron `(Re ψ, Im ψ)` is interpolated linearly, so its zero set
//! is a segment whose ends lie on two faces. Segments are chained through
//! shared faces and the vertices are projected back onto the true zero set.

use std::collections::HashMap;

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::newton::{locate, newton};
use super::scan::{sample_grid, sup_modulus};
use super::{dist, DislocationError, Region, TAU_MERGE_REL, TAU_ZERO_REL};
use crate::fieldlang::{FieldDef, Params, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveStatus {
    Closed,
    OpenAtBoundary,
    /// Open with at least one end inside the region (a tangency or a
    /// resolution problem).
    Open,
    /// An isolated zero, reported as a single-vertex curve.
    DegeneratePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DislocationCurve {
    /// Polyline vertices; a closed curve repeats its first vertex at the end.
    pub points: Vec<[f64; 3]>,
    pub closed: bool,
    pub status: CurveStatus,
    /// Largest `|ψ|` over the vertices.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveTrace {
    pub curves: Vec<DislocationCurve>,
    pub tau_zero: f64,
}

/// Kuhn triangulation: one tetrahedron per axis permutation.
const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

struct Grid<'a> {
    region: &'a Region,
    n: [usize; 3],
    values: Vec<[f64; 2]>,
}

impl Grid<'_> {
    fn id(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    fn ijk(&self, id: usize) -> [usize; 3] {
        [id / (self.n[1] * self.n[2]), (id / self.n[2]) % self.n[1], id % self.n[2]]
    }

    fn pos(&self, id: usize) -> [f64; 3] {
        let c = self.ijk(id);
        [self.region.node(0, c[0]), self.region.node(1, c[1]), self.region.node(2, c[2])]
    }

    /// Zero of the linear interpolant on the triangle `f` (sorted node ids).
    ///
    /// Inclusion is decided by the winding of the image triangle around the
    /// origin, from the signs of the edge determinants `det(v_a, v_b)` taken in
    /// increasing node order. Each edge is evaluated identically for every face
    /// containing it, so neighbouring faces always agree.
    fn face_crossing(&self, f: [usize; 3]) -> Option<[f64; 3]> {
        let [v0, v1, v2] = f.map(|id| self.values[id]);
        let det = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
        let (d01, d12, d02) = (det(v0, v1), det(v1, v2), det(v0, v2));
        let sg = |d: f64| d >= 0.0;
        if !(sg(d01) == sg(d12) && sg(d12) != sg(d02)) {
            return None;
        }
        let total = d12 - d02 + d01;
        let w = [d12 / total, -d02 / total, d01 / total];
        let [p0, p1, p2] = f.map(|id| self.pos(id));
        Some([0, 1, 2].map(|a| w[0] * p0[a] + w[1] * p1[a] + w[2] * p2[a]))
    }

    fn on_boundary(&self, f: [usize; 3]) -> bool {
        let c = f.map(|id| self.ijk(id));
        (0..3).any(|a| (c[0][a] == 0 && c[1][a] == 0 && c[2][a] == 0) || (0..3).all(|v| c[v][a] == self.n[a] - 1))
    }

    /// Segments `(face, point, face, point)` of the cube with lower corner `(i, j, k)`.
    fn cube_segments(&self, i: usize, j: usize, k: usize) -> Vec<([usize; 3], [f64; 3], [usize; 3], [f64; 3])> {
        let mut out = Vec::new();
        for perm in PERMS {
            let mut c = [i, j, k];
            let mut tet = [self.id(i, j, k); 4];
            for (s, &axis) in perm.iter().enumerate() {
                c[axis] += 1;
                tet[s + 1] = self.id(c[0], c[1], c[2]);
            }
            let mut hits = Vec::with_capacity(2);
            for skip in 0..4 {
                let mut f = [0usize; 3];
                let mut w = 0;
                for (v, &id) in tet.iter().enumerate() {
                    if v != skip {
                        f[w] = id;
                        w += 1;
                    }
                }
                f.sort_unstable();
                if let Some(p) = self.face_crossing(f) {
                    hits.push((f, p));
                }
            }
            match hits.len() {
                0 => {}
                2 => out.push((hits[0].0, hits[0].1, hits[1].0, hits[1].1)),
                n => debug!("tetrahedron at cube ({i},{j},{k}) has {n} face crossings"),
            }
        }
        out
    }
}

/// Traces the zero curves of a spatial field in `region`, plus isolated
/// degenerate zeros that no curve passes through.
pub fn trace_dislocation_3d(def: &FieldDef, region: &Region, params: &Params) -> Result<CurveTrace, DislocationError> {
    region.validate()?;
    let def = def.frozen(params)?;
    if def.dim != 3 || region.dim() != 3 {
        return Err(DislocationError::DimMismatch { field: def.dim, region: region.dim() });
    }
    let prog = def.compile(params)?;
    let raw = sample_grid(&prog, region)?;
    let sup = sup_modulus(&raw);
    let tau_zero = TAU_ZERO_REL * (1.0 + sup);
    let tau_merge = TAU_MERGE_REL * region.cell_diagonal();
    let n = [region.resolution[0], region.resolution[1], region.resolution[2]];
    // A tiny deterministic perturbation per node keeps the interpolated map
    // generic where the field vanishes exactly on grid nodes or planes.
    let eps = 1e-12 * (1.0 + sup);
    let values = raw
        .iter()
        .enumerate()
        .map(|(id, v)| {
            let h = splitmix64(id as u64);
            let u = |bits: u64| (bits as f64 / u32::MAX as f64) * 2.0 - 1.0;
            [v.re + eps * u(h & 0xffff_ffff), v.im + eps * u(h >> 32)]
        })
        .collect();
    let grid = Grid { region, n, values };

    let per_slab: Vec<Vec<(usize, Vec<_>)>> = (0..n[0] - 1)
        .into_par_iter()
        .map(|i| {
            let mut v = Vec::new();
            for j in 0..n[1] - 1 {
                for k in 0..n[2] - 1 {
                    let segs = grid.cube_segments(i, j, k);
                    if !segs.is_empty() {
                        v.push((grid.id(i, j, k), segs));
                    }
                }
            }
            v
        })
        .collect();

    let mut face_id: HashMap<[usize; 3], usize> = HashMap::new();
    let mut faces: Vec<([usize; 3], [f64; 3])> = Vec::new();
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut crossing_cube = vec![false; n[0] * n[1] * n[2]];
    for (cube, segs) in per_slab.into_iter().flatten() {
        crossing_cube[cube] = true;
        for (fa, pa, fb, pb) in segs {
            let mut intern = |f: [usize; 3], p: [f64; 3]| {
                *face_id.entry(f).or_insert_with(|| {
                    faces.push((f, p));
                    adj.push(Vec::new());
                    faces.len() - 1
                })
            };
            let (a, b) = (intern(fa, pa), intern(fb, pb));
            if a != b && !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }

    let mut visited = vec![false; faces.len()];
    let mut chains: Vec<(Vec<usize>, bool)> = Vec::new();
    let walk = |start: usize, visited: &mut Vec<bool>| {
        let mut chain = vec![start];
        visited[start] = true;
        let mut cur = start;
        while let Some(&next) = adj[cur].iter().find(|&&f| !visited[f]) {
            visited[next] = true;
            chain.push(next);
            cur = next;
        }
        chain
    };
    for f in 0..faces.len() {
        if !visited[f] && adj[f].len() != 2 {
            let c = walk(f, &mut visited);
            chains.push((c, false));
        }
    }
    for f in 0..faces.len() {
        if !visited[f] {
            let c = walk(f, &mut visited);
            let closed = c.len() >= 3 && adj[*c.last().expect("nonempty")].contains(&f);
            chains.push((c, closed));
        }
    }

    let mut curves: Vec<DislocationCurve> = chains
        .par_iter()
        .map(|(chain, closed)| -> Result<DislocationCurve, DislocationError> {
            let mut pts: Vec<[f64; 3]> = Vec::with_capacity(chain.len() + 1);
            let mut max_residual: f64 = 0.0;
            for &f in chain {
                let p0 = faces[f].1;
                let (p, r) = project(&prog, p0, tau_zero)?;
                max_residual = max_residual.max(r);
                if pts.last().map_or(true, |q| dist(q, &p) >= tau_merge) {
                    pts.push(p);
                }
            }
            let status = if *closed {
                pts.push(pts[0]);
                CurveStatus::Closed
            } else if grid.on_boundary(faces[chain[0]].0) && grid.on_boundary(faces[*chain.last().expect("nonempty")].0) {
                CurveStatus::OpenAtBoundary
            } else {
                CurveStatus::Open
            };
            Ok(DislocationCurve { points: pts, closed: *closed, status, max_residual })
        })
        .collect::<Result<_, _>>()?;

    // isolated zeros: local minima of |ψ| in cubes without crossings
    let diag = region.cell_diagonal();
    let mut seeds = Vec::new();
    for i in 1..n[0] - 1 {
        for j in 1..n[1] - 1 {
            for k in 1..n[2] - 1 {
                let near = (0..8).any(|c| crossing_cube[grid.id(i - (c & 1), j - ((c >> 1) & 1), k - ((c >> 2) & 1))]);
                if near {
                    continue;
                }
                let m = raw[grid.id(i, j, k)].norm_sqr();
                let mut is_min = true;
                let mut strict = false;
                for d in 0..27 {
                    let (di, dj, dk) = (d / 9, (d / 3) % 3, d % 3);
                    if d == 13 {
                        continue;
                    }
                    let o = raw[grid.id(i + di - 1, j + dj - 1, k + dk - 1)].norm_sqr();
                    is_min &= m <= o;
                    strict |= m < o;
                }
                if is_min && strict {
                    seeds.push(grid.pos(grid.id(i, j, k)));
                }
            }
        }
    }
    let isolated: Vec<Option<[f64; 3]>> = seeds
        .par_iter()
        .map(|s| match locate(&prog, s, tau_zero) {
            Ok(r) if region.contains_within(&r.location, 1.0) => Some([r.location[0], r.location[1], r.location[2]]),
            _ => None,
        })
        .collect();
    for p in isolated.into_iter().flatten() {
        let on_curve = curves.iter().any(|c| c.points.iter().any(|q| dist(q, &p) < 2.0 * diag));
        if !on_curve {
            let r = prog.eval(&p)?.norm();
            curves.push(DislocationCurve { points: vec![p], closed: false, status: CurveStatus::DegeneratePoint, max_residual: r });
        }
    }
    Ok(CurveTrace { curves, tau_zero })
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Minimum-norm Newton projection; keeps the input if it cannot converge.
fn project(prog: &Program, p: [f64; 3], tau_zero: f64) -> Result<([f64; 3], f64), DislocationError> {
    match newton(prog, &p, tau_zero) {
        Ok(r) => Ok(([r.location[0], r.location[1], r.location[2]], r.residual)),
        Err(DislocationError::Eval(e)) => Err(e.into()),
        Err(_) => Ok((p, prog.eval(&p)?.norm())),
    }
}
