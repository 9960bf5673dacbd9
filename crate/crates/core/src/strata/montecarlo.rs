//! Statistics of zeros of random plane-wave sums.

use std::collections::BTreeMap;

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use super::{stratum_vs_classifier_crosscheck, Consistency, StrataError};
use crate::classify::{classify_jet_3d, jet_from_series, ClassificationReport, Jet, ToleranceSet};
use crate::dislocation::{scan_zeros_2d, splitmix64, trace_dislocation_3d, Region};
use crate::fieldlang::{eval_field_jet, Params};
use crate::helmholtz::{hessian_pencil_definite, random_helmholtz_field};
use crate::taylor::DEFAULT_ORDER;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub n_terms: usize,
    pub k: f64,
    pub region: Region,
    pub tolerances: ToleranceSet,
}

impl MonteCarloConfig {
    /// 8 waves with unit wavenumber on `[-3,3]²` (101 nodes per axis) or
    /// `[-2,2]³` (25 nodes per axis).
    pub fn standard(dim: usize, seed: u64, n_samples: usize) -> Result<Self, StrataError> {
        let region = match dim {
            2 => Region::cube(2, -3.0, 3.0, 101)?,
            3 => Region::cube(3, -2.0, 2.0, 25)?,
            d => return Err(StrataError::BadConfig(format!("dimension {d}"))),
        };
        Ok(MonteCarloConfig { seed, n_samples, n_terms: 8, k: 1.0, region, tolerances: ToleranceSet::default() })
    }

    /// Seed of sample `i`, derived from the master seed alone.
    pub fn sample_seed(&self, i: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(i as u64))
    }
}

/// One zero (planar) or one curve vertex (spatial).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloRow {
    pub sample: usize,
    pub zero_index: usize,
    pub x: f64,
    pub y: f64,
    pub z: Option<f64>,
    pub class: String,
    pub stratum: Option<String>,
    pub consistency: Option<String>,
    pub modulus: f64,
    pub r_a: Option<f64>,
    pub r_bc: Option<f64>,
    pub r_d1: Option<f64>,
    pub r_d2: Option<f64>,
    pub r_bordered1: Option<f64>,
    pub r_bordered2: Option<f64>,
    pub pencil_definite: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub samples: usize,
    pub samples_without_zeros: usize,
    pub zeros: usize,
    /// Zeros that could not be classified.
    pub skipped: usize,
    pub classes: BTreeMap<String, usize>,
    pub strata: BTreeMap<String, usize>,
    pub consistency: BTreeMap<String, usize>,
    pub elliptic: usize,
    pub pencil_definite: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloTable {
    pub config: MonteCarloConfig,
    pub rows: Vec<MonteCarloRow>,
    pub summary: MonteCarloSummary,
}

impl MonteCarloTable {
    pub fn to_csv(&self) -> Result<String, StrataError> {
        let err = |e: String| StrataError::Csv(e);
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| err(e.to_string()))?;
        }
        if self.rows.is_empty() {
            w.write_record(HEADER).map_err(|e| err(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| err(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| err(e.to_string()))
    }
}

const HEADER: [&str; 16] =
    ["sample", "zero_index", "x", "y", "z", "class", "stratum", "consistency", "modulus", "r_a", "r_bc", "r_d1", "r_d2", "r_bordered1", "r_bordered2", "pencil_definite"];

struct SampleOutcome {
    rows: Vec<MonteCarloRow>,
    skipped: usize,
}

fn planar_sample(cfg: &MonteCarloConfig, i: usize) -> Result<SampleOutcome, StrataError> {
    let def = random_helmholtz_field(cfg.sample_seed(i), cfg.n_terms, 2, cfg.k)?;
    let scan = scan_zeros_2d(&def, &cfg.region, &Params::new())?;
    let mut out = SampleOutcome { rows: Vec::new(), skipped: 0 };
    for (zi, z) in scan.points.iter().enumerate() {
        let check = stratum_vs_classifier_crosscheck(z, cfg.k, &cfg.tolerances);
        let pencil = jet_from_series(&z.jet).map_err(StrataError::from).and_then(|j| Ok(hessian_pencil_definite(&j)?));
        match (check, pencil) {
            (Ok(c), Ok(p)) => {
                let r = c.strata.residuals;
                out.rows.push(MonteCarloRow {
                    sample: i,
                    zero_index: zi,
                    x: z.location[0],
                    y: z.location[1],
                    z: None,
                    class: c.class.label(),
                    stratum: Some(c.stratum.to_string()),
                    consistency: Some(c.status.to_string()),
                    modulus: c.classification.modulus,
                    r_a: Some(r.a),
                    r_bc: Some(r.bc),
                    r_d1: Some(r.d1),
                    r_d2: Some(r.d2),
                    r_bordered1: Some(r.bordered1),
                    r_bordered2: Some(r.bordered2),
                    pencil_definite: p.definite,
                });
            }
            (Err(e), _) | (_, Err(e)) => {
                warn!("sample {i}, zero {:?}: {e}", z.location);
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

fn spatial_row(i: usize, vi: usize, p: &[f64; 3], rep: &ClassificationReport, definite: bool) -> MonteCarloRow {
    MonteCarloRow {
        sample: i,
        zero_index: vi,
        x: p[0],
        y: p[1],
        z: Some(p[2]),
        class: rep.class.label(),
        stratum: None,
        consistency: None,
        modulus: rep.modulus,
        r_a: None,
        r_bc: None,
        r_d1: None,
        r_d2: None,
        r_bordered1: None,
        r_bordered2: None,
        pencil_definite: definite,
    }
}

fn spatial_sample(cfg: &MonteCarloConfig, i: usize) -> Result<SampleOutcome, StrataError> {
    let def = random_helmholtz_field(cfg.sample_seed(i), cfg.n_terms, 3, cfg.k)?;
    let tr = trace_dislocation_3d(&def, &cfg.region, &Params::new())?;
    let mut out = SampleOutcome { rows: Vec::new(), skipped: 0 };
    let vertices = tr.curves.iter().flat_map(|c| {
        let n = if c.closed { c.points.len().saturating_sub(1) } else { c.points.len() };
        c.points[..n].iter()
    });
    for (vi, p) in vertices.enumerate() {
        let outcome = eval_field_jet(&def, p, &Params::new(), DEFAULT_ORDER).map_err(StrataError::from).and_then(|s| {
            let Jet::Three(j) = jet_from_series(&s)? else { unreachable!("spatial jet") };
            let rep = classify_jet_3d(&j.clone().at(*p), &cfg.tolerances)?;
            let pencil = hessian_pencil_definite(&Jet::Three(j))?;
            Ok((rep, pencil.definite))
        });
        match outcome {
            Ok((rep, definite)) => out.rows.push(spatial_row(i, vi, p, &rep, definite)),
            Err(e) => {
                warn!("sample {i}, vertex {p:?}: {e}");
                out.skipped += 1;
            }
        }
    }
    Ok(out)
}

/// Draws `n_samples` random Helmholtz fields, finds their zeros (planar) or
/// zero curves (spatial) and records class, stratum and pencil test for each.
/// Samples run in parallel; rows come out in sample order.
pub fn monte_carlo_genericity(cfg: &MonteCarloConfig) -> Result<MonteCarloTable, StrataError> {
    if cfg.n_samples == 0 {
        return Err(StrataError::BadConfig("need at least one sample".into()));
    }
    let dim = cfg.region.dim();
    let outcomes: Vec<SampleOutcome> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| if dim == 2 { planar_sample(cfg, i) } else { spatial_sample(cfg, i) })
        .collect::<Result<_, _>>()?;
    let mut summary = MonteCarloSummary { samples: cfg.n_samples, ..Default::default() };
    let mut rows = Vec::new();
    for o in outcomes {
        if o.rows.is_empty() && o.skipped == 0 {
            summary.samples_without_zeros += 1;
        }
        summary.skipped += o.skipped;
        summary.zeros += o.rows.len() + o.skipped;
        rows.extend(o.rows);
    }
    for r in &rows {
        *summary.classes.entry(r.class.clone()).or_default() += 1;
        if let Some(s) = &r.stratum {
            *summary.strata.entry(s.clone()).or_default() += 1;
        }
        if let Some(c) = &r.consistency {
            *summary.consistency.entry(c.clone()).or_default() += 1;
        }
        summary.pencil_definite += r.pencil_definite as usize;
    }
    summary.elliptic = rows.iter().filter(|r| r.class == "Elliptic" || r.class == "DefiniteElliptic").count();
    Ok(MonteCarloTable { config: cfg.clone(), rows, summary })
}

impl MonteCarloSummary {
    /// Fraction of crosschecked zeros that are consistent.
    pub fn consistent_fraction(&self) -> f64 {
        let total: usize = self.consistency.values().sum();
        if total == 0 {
            return 1.0;
        }
        self.consistency.get(&Consistency::Consistent.to_string()).copied().unwrap_or(0) as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_small_run() {
        let mut cfg = MonteCarloConfig::standard(2, 5, 12).unwrap();
        cfg.region = cfg.region.with_resolution(61);
        let t = monte_carlo_genericity(&cfg).unwrap();
        assert!(t.summary.zeros > 0);
        assert_eq!(t.summary.elliptic, 0);
        assert_eq!(t.summary.pencil_definite, 0);
        assert_eq!(t.summary.consistency.get("Inconsistent"), None);
        assert!(t.rows.windows(2).all(|w| (w[0].sample, w[0].zero_index) < (w[1].sample, w[1].zero_index)));
        let again = monte_carlo_genericity(&cfg).unwrap();
        assert_eq!(t, again);
        let csv = t.to_csv().unwrap();
        assert!(csv.starts_with("sample,zero_index,x,y,z,class,stratum,consistency,modulus"));
        assert_eq!(csv.lines().count(), t.rows.len() + 1);
    }

    #[test]
    fn spatial_small_run() {
        let mut cfg = MonteCarloConfig::standard(3, 9, 2).unwrap();
        cfg.region = Region::cube(3, -1.5, 1.5, 16).unwrap();
        let t = monte_carlo_genericity(&cfg).unwrap();
        assert_eq!(t.summary.elliptic, 0);
        assert_eq!(t.summary.pencil_definite, 0);
        assert!(t.rows.iter().all(|r| r.z.is_some() && r.stratum.is_none()));
    }

    #[test]
    fn zero_free_field_gives_empty_table() {
        // a single plane wave never vanishes
        let mut cfg = MonteCarloConfig::standard(2, 1, 1).unwrap();
        cfg.n_terms = 1;
        cfg.region = cfg.region.with_resolution(21);
        let t = monte_carlo_genericity(&cfg).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.summary.samples_without_zeros, 1);
        assert_eq!(t.to_csv().unwrap().lines().count(), 1);
        cfg.n_samples = 0;
        assert!(monte_carlo_genericity(&cfg).is_err());
    }
}
