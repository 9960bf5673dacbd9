//! Zero sets along a sampled parameter path.

use serde::Serialize;

use super::{scan_zeros_2d, trace_dislocation_3d, DislocationCurve, DislocationError, DislocationPoint, Region};
use crate::fieldlang::{FieldDef, Params};

/// A change of the zero count between two consecutive parameter samples.
/// The bifurcation lies somewhere in `interval`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEvent {
    pub interval: [f64; 2],
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub param: String,
    pub values: Vec<f64>,
    /// Number of zeros (planar) or of curves and isolated points (spatial).
    pub counts: Vec<usize>,
    /// Planar zero sets, one per value; empty for spatial fields.
    pub points: Vec<Vec<DislocationPoint>>,
    /// Spatial zero curves, one list per value; empty for planar fields.
    pub curves: Vec<Vec<DislocationCurve>>,
    pub events: Vec<SweepEvent>,
}

/// Scans the field at every value of `param` (with the other parameters from
/// `base`) and records where the count changes.
pub fn sweep_parameter(
    def: &FieldDef,
    region: &Region,
    base: &Params,
    param: &str,
    values: &[f64],
) -> Result<SweepResult, DislocationError> {
    let declared = def.params.contains_key(param) || (param == "t" && def.time_dependent);
    if !declared {
        return Err(DislocationError::UnknownParameter(param.to_string()));
    }
    let mut out = SweepResult {
        param: param.to_string(),
        values: values.to_vec(),
        counts: Vec::new(),
        points: Vec::new(),
        curves: Vec::new(),
        events: Vec::new(),
    };
    for &v in values {
        let mut p = base.clone();
        p.insert(param.to_string(), v);
        if def.dim == 2 {
            let s = scan_zeros_2d(def, region, &p)?;
            out.counts.push(s.points.len());
            out.points.push(s.points);
        } else {
            let tr = trace_dislocation_3d(def, region, &p)?;
            out.counts.push(tr.curves.len());
            out.curves.push(tr.curves);
        }
    }
    for w in 0..values.len().saturating_sub(1) {
        if out.counts[w] != out.counts[w + 1] {
            out.events.push(SweepEvent { interval: [values[w], values[w + 1]], before: out.counts[w], after: out.counts[w + 1] });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldlang::{catalog_get, params};

    fn square() -> Region {
        Region::cube(2, -1.0, 1.0, 101).unwrap()
    }

    #[test]
    fn ht_and_cusp_counts() {
        let s = sweep_parameter(&catalog_get("H2.Ht").unwrap(), &square(), &Params::new(), "t", &[-0.25, 0.0, 0.25]).unwrap();
        assert_eq!(s.counts, vec![2, 1, 0]);
        assert_eq!(s.events.len(), 2);
        assert_eq!(s.events[1], SweepEvent { interval: [0.0, 0.25], before: 1, after: 0 });
        let s = sweep_parameter(&catalog_get("H2.cusp-family").unwrap(), &square(), &params(&[("b", 0.0)]), "a", &[-0.25, 0.0, 0.25]).unwrap();
        assert_eq!(s.counts, vec![1, 1, 3]);
        assert_eq!(s.events.len(), 1);
    }

    #[test]
    fn constant_field_has_no_events() {
        let def = FieldDef::parse("c", 2, false, "x + i*y + 0*q", &[("q", 0.0)], "").unwrap();
        let s = sweep_parameter(&def, &square(), &Params::new(), "q", &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.counts, vec![1, 1, 1]);
        assert!(s.events.is_empty());
    }

    #[test]
    fn undeclared_parameter() {
        let e = sweep_parameter(&catalog_get("H2.regular").unwrap(), &square(), &Params::new(), "t", &[0.0]).unwrap_err();
        assert!(matches!(e, DislocationError::UnknownParameter(_)));
    }

    #[test]
    fn spatial_sweep() {
        let r = Region::cube(3, -1.0, 1.0, 17).unwrap();
        let s = sweep_parameter(&catalog_get("H3.DHt").unwrap(), &r, &Params::new(), "t", &[-0.25, 0.25]).unwrap();
        assert_eq!(s.counts[0], 1);
        assert!(s.curves[0][0].closed);
    }
}
