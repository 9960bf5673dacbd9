//! Grid scan for isolated zeros of planar fields.

use log::{debug, warn};
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use super::newton::{locate, to_point};
use super::{dist, DislocationError, DislocationPoint, Region, TAU_MERGE_REL, TAU_ZERO_REL};
use crate::fieldlang::{FieldDef, Params, Program};

/// Zeros found by a scan together with the thresholds it used.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroScan {
    pub points: Vec<DislocationPoint>,
    pub tau_zero: f64,
    pub tau_merge: f64,
    /// Candidates whose refinement failed or left the region.
    pub dropped: usize,
}

pub(crate) fn sample_grid(prog: &Program, region: &Region) -> Result<Vec<Complex<f64>>, DislocationError> {
    let n = &region.resolution;
    let inner: usize = n[1..].iter().product();
    let rows: Vec<Vec<Complex<f64>>> = (0..n[0])
        .into_par_iter()
        .map(|i| {
            let x = region.node(0, i);
            let mut row = Vec::with_capacity(inner);
            let mut p = vec![x; region.dim()];
            for r in 0..inner {
                if region.dim() == 2 {
                    p[1] = region.node(1, r);
                } else {
                    p[1] = region.node(1, r / n[2]);
                    p[2] = region.node(2, r % n[2]);
                }
                row.push(prog.eval(&p)?);
            }
            Ok(row)
        })
        .collect::<Result<_, DislocationError>>()?;
    Ok(rows.into_iter().flatten().collect())
}

pub(crate) fn sup_modulus(values: &[Complex<f64>]) -> f64 {
    values.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn straddles(vals: impl Iterator<Item = f64> + Clone) -> bool {
    let lo = vals.clone().fold(f64::INFINITY, f64::min);
    let hi = vals.fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

/// Finds the zeros of a planar field in `region`.
///
/// Newton is started in every cell where both `Re ψ` and `Im ψ` change sign
/// over the corners, and from every grid-local minimum of `|ψ|²` outside such
/// cells. Candidates that fail to converge are dropped with a warning.
pub fn scan_zeros_2d(def: &FieldDef, region: &Region, params: &Params) -> Result<ZeroScan, DislocationError> {
    region.validate()?;
    let def = def.frozen(params)?;
    if def.dim != 2 || region.dim() != 2 {
        return Err(DislocationError::DimMismatch { field: def.dim, region: region.dim() });
    }
    let prog = def.compile(params)?;
    let values = sample_grid(&prog, region)?;
    let tau_zero = TAU_ZERO_REL * (1.0 + sup_modulus(&values));
    let tau_merge = TAU_MERGE_REL * region.cell_diagonal();
    let (nx, ny) = (region.resolution[0], region.resolution[1]);
    let at = |i: usize, j: usize| values[i * ny + j];

    let mut in_cell = vec![false; nx * ny];
    // (start, from a sign-change cell)
    let mut seeds: Vec<([f64; 2], bool)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..ny - 1 {
            let c = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            if straddles(c.iter().map(|v| v.re)) && straddles(c.iter().map(|v| v.im)) {
                for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                    in_cell[(i + di) * ny + j + dj] = true;
                }
                seeds.push(([0.5 * (region.node(0, i) + region.node(0, i + 1)), 0.5 * (region.node(1, j) + region.node(1, j + 1))], true));
            }
        }
    }
    for i in 1..nx - 1 {
        for j in 1..ny - 1 {
            if in_cell[i * ny + j] {
                continue;
            }
            let m = at(i, j).norm_sqr();
            let mut strict = false;
            let mut is_min = true;
            for di in 0..3 {
                for dj in 0..3 {
                    if di == 1 && dj == 1 {
                        continue;
                    }
                    let o = at(i + di - 1, j + dj - 1).norm_sqr();
                    is_min &= m <= o;
                    strict |= m < o;
                }
            }
            if is_min && strict {
                seeds.push(([region.node(0, i), region.node(1, j)], false));
            }
        }
    }

    let found: Vec<Option<DislocationPoint>> = seeds
        .par_iter()
        .map(|(seed, _)| match locate(&prog, seed, tau_zero) {
            Ok(r) if region.contains_within(&r.location, 1.0) => to_point(&prog, r).ok(),
            Ok(r) => {
                debug!("zero at {:?} lies outside the region", r.location);
                None
            }
            Err(e) => {
                debug!("seed {seed:?}: {e}");
                None
            }
        })
        .collect();

    let mut points: Vec<DislocationPoint> = Vec::new();
    let mut dropped = 0;
    for ((_, cell), p) in seeds.iter().zip(found) {
        match p {
            Some(p) => {
                if !points.iter().any(|q| dist(&q.location, &p.location) < tau_merge) {
                    points.push(p);
                }
            }
            // a local minimum of |ψ|² is usually not a zero at all
            None if *cell => dropped += 1,
            None => {}
        }
    }
    if dropped > 0 {
        warn!("{}: {dropped} candidate cell(s) did not converge to a zero", def.name);
    }
    Ok(ZeroScan { points, tau_zero, tau_merge, dropped })
}
